//! High-accuracy reference integrator for the continuous optimization
//! dynamics g' = g xi, xi' = -gamma xi - grad(g).
//!
//! Classical fixed-step RK4 on the trivialized pair, using the potential's
//! smooth off-manifold gradient extension between steps and a polar
//! projection back onto SO(n) after each completed step. The integrator is a
//! reference oracle, not an optimizer; dt is expected to be well below
//! 1/gamma and 1/sqrt(L).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{lyapunov_ode, suboptimality};
use crate::group::{AlgebraElement, GroupElement, Tolerances};
use crate::linalg::polar_project;
use crate::potential::Potential;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OdeSample {
    pub t: f64,
    pub u: f64,
    pub subopt: Option<f64>,
    pub xi_norm: f64,
    pub energy: f64,
    pub lyapunov: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct OdeTrace {
    pub samples: Vec<OdeSample>,
    pub final_g: GroupElement,
    pub final_xi: AlgebraElement,
}

/// Integrate the damped flow for `t_final / dt` steps, sampling every
/// `record_every` steps (and always at the end).
pub fn integrate_ode<P: Potential + ?Sized>(
    pot: &P,
    g0: &GroupElement,
    xi0: &AlgebraElement,
    gamma: f64,
    dt: f64,
    t_final: f64,
    g_star: Option<&GroupElement>,
    record_every: usize,
) -> OdeTrace {
    let tol = Tolerances::default();
    let steps = (t_final / dt).round() as usize;
    let record_every = record_every.max(1);
    let mut g = g0.mat().clone();
    let mut xi = xi0.mat().clone();
    let mut samples = Vec::with_capacity(steps / record_every + 2);

    let deriv = |g: &DMatrix<f64>, xi: &DMatrix<f64>| -> (DMatrix<f64>, DMatrix<f64>) {
        let dg = g * xi;
        let dxi = xi * (-gamma) - pot.trivialized_grad_raw(g);
        (dg, dxi)
    };

    let sample = |t: f64, g: &DMatrix<f64>, xi: &DMatrix<f64>| -> OdeSample {
        let ge = GroupElement::from_matrix_unchecked(g.clone());
        let xe = AlgebraElement::from_skew_unchecked((xi - xi.transpose()) * 0.5);
        let u = pot.value(&ge);
        let subopt = g_star.map(|gs| suboptimality(pot, &ge, gs));
        let lyap = g_star.and_then(|gs| lyapunov_ode(&ge, &xe, pot, gs, gamma, &tol).ok());
        OdeSample {
            t,
            u,
            subopt,
            xi_norm: xe.norm(),
            energy: u + 0.5 * xe.norm_squared(),
            lyapunov: lyap,
        }
    };

    samples.push(sample(0.0, &g, &xi));
    for k in 0..steps {
        let (k1g, k1x) = deriv(&g, &xi);
        let (k2g, k2x) = deriv(&(&g + &k1g * (dt / 2.0)), &(&xi + &k1x * (dt / 2.0)));
        let (k3g, k3x) = deriv(&(&g + &k2g * (dt / 2.0)), &(&xi + &k2x * (dt / 2.0)));
        let (k4g, k4x) = deriv(&(&g + &k3g * dt), &(&xi + &k3x * dt));
        g += (k1g + k2g * 2.0 + k3g * 2.0 + k4g) * (dt / 6.0);
        xi += (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (dt / 6.0);
        g = polar_project(&g);
        xi = (&xi - xi.transpose()) * 0.5;
        if (k + 1) % record_every == 0 || k + 1 == steps {
            samples.push(sample((k + 1) as f64 * dt, &g, &xi));
        }
    }

    OdeTrace {
        samples,
        final_g: GroupElement::from_matrix_unchecked(g),
        final_xi: AlgebraElement::from_skew_unchecked(xi),
    }
}

/// Largest defect of the continuous energy identity
/// |E(t2) - E(t1) + gamma * integral of |xi|^2| over consecutive samples,
/// with the integral approximated by the trapezoid rule.
pub fn energy_identity_defect(trace: &OdeTrace, gamma: f64) -> f64 {
    let mut worst = 0.0f64;
    for w in trace.samples.windows(2) {
        let dt = w[1].t - w[0].t;
        let integral = 0.5 * dt * (w[0].xi_norm.powi(2) + w[1].xi_norm.powi(2));
        let defect = (w[1].energy - w[0].energy + gamma * integral).abs();
        worst = worst.max(defect);
    }
    worst
}
