//! Momentum optimizers on the compact matrix Lie group SO(n), with full
//! instrumentation of their energy and Lyapunov functionals.
//!
//! The crate provides:
//!
//! - SO(n)/so(n) arithmetic under the bi-invariant metric trace(X^T Y),
//!   including the matrix exponential, the principal logarithm, and the
//!   logarithm-differential calculus (`group`, `calculus`, `linalg`);
//! - the Brockett eigendecomposition potential trace(X^T B X N) with designed
//!   condition number, plus Haar sampling of rotations (`potential`);
//! - four discrete schemes (gradient descent, Heavy-Ball, NAG-SC, splitting)
//!   and a reference RK4 integrator for the damped continuous dynamics
//!   (`optimizer`, `ode`);
//! - per-step energy/Lyapunov monitors for the descent and contraction
//!   theorems behind each scheme (`diagnostics`);
//! - condition-number sweeps with empirical rate extraction and log-log
//!   slope fitting (`experiment`), run as data-parallel tasks when the
//!   `parallel` feature (default) is enabled.

pub mod calculus;
pub mod diagnostics;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod group;
pub mod io;
pub mod linalg;
pub mod ode;
pub mod optimizer;
pub mod potential;
pub mod rng;
pub mod trace;
pub mod verify;

pub use calculus::{dlog_apply, estimate_ad_norm, p_series, q_bound};
pub use error::{LieError, Result};
pub use group::{
    bracket, geodesic_distance, group_exp, group_log, inner, AlgebraElement, GroupElement,
    Tolerances,
};
pub use optimizer::{select_params, OptimizerState, Scheme, SchemeParams};
pub use potential::{BrockettPotential, Potential, PotentialSpec, SpectrumSpec};
