//! Discrete momentum schemes on SO(n): gradient descent, Heavy-Ball, NAG-SC,
//! and the exact-friction splitting update. All schemes move by group
//! multiplication with an exponential, so iterates stay on the manifold
//! without projection.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::calculus::p_series;
use crate::error::{LieError, Result};
use crate::group::{AlgebraElement, GroupElement};
use crate::potential::Potential;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Gd,
    HeavyBall,
    NagSc,
    Splitting,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Gd => "gd",
            Scheme::HeavyBall => "heavy-ball",
            Scheme::NagSc => "nag-sc",
            Scheme::Splitting => "splitting",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = LieError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gd" => Ok(Scheme::Gd),
            "heavy-ball" | "hb" => Ok(Scheme::HeavyBall),
            "nag-sc" | "nag" => Ok(Scheme::NagSc),
            "splitting" => Ok(Scheme::Splitting),
            other => Err(LieError::InvalidParameter(format!(
                "unknown scheme '{other}' (expected gd, heavy-ball, nag-sc, splitting)"
            ))),
        }
    }
}

/// Step size, friction and the curvature-radius parameter for NAG-SC.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SchemeParams {
    pub scheme: Scheme,
    pub h: f64,
    pub gamma: f64,
    /// Radius parameter in (0, 2 pi) entering the NAG-SC step rule via p(a).
    pub a: f64,
}

impl SchemeParams {
    pub fn new(scheme: Scheme, h: f64, gamma: f64, a: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(LieError::InvalidParameter(format!(
                "step size h must be positive, got {h}"
            )));
        }
        if !(a > 0.0 && a < TAU) {
            return Err(LieError::InvalidParameter(format!(
                "curvature radius a must lie in (0, 2 pi), got {a}"
            )));
        }
        match scheme {
            Scheme::Gd => {}
            Scheme::Splitting => {
                if !(gamma > 0.0) {
                    return Err(LieError::InvalidParameter(format!(
                        "friction gamma must be positive, got {gamma}"
                    )));
                }
            }
            Scheme::HeavyBall | Scheme::NagSc => {
                if !(gamma > 0.0) {
                    return Err(LieError::InvalidParameter(format!(
                        "friction gamma must be positive, got {gamma}"
                    )));
                }
                if !(gamma * h < 1.0) {
                    return Err(LieError::InvalidParameter(format!(
                        "gamma * h = {} violates the invariant gamma * h < 1 required by {}",
                        gamma * h,
                        scheme.as_str()
                    )));
                }
            }
        }
        Ok(SchemeParams {
            scheme,
            h,
            gamma,
            a,
        })
    }
}

/// Step size and friction from (L, mu): gamma = 2 sqrt(mu) with
/// h = sqrt(mu)/(4L) for Heavy-Ball/splitting, h = min(1/sqrt(2L), 1/(2 p(a)))
/// for NAG-SC, and h = 1/L for momentumless gradient descent.
pub fn select_params(l: f64, mu: f64, scheme: Scheme, a: f64) -> Result<SchemeParams> {
    if !(mu > 0.0 && l >= mu) {
        return Err(LieError::InvalidParameter(format!(
            "need L >= mu > 0, got L = {l}, mu = {mu}"
        )));
    }
    match scheme {
        Scheme::Gd => SchemeParams::new(scheme, 1.0 / l, 0.0, a),
        Scheme::HeavyBall | Scheme::Splitting => {
            SchemeParams::new(scheme, mu.sqrt() / (4.0 * l), 2.0 * mu.sqrt(), a)
        }
        Scheme::NagSc => {
            let h = (1.0 / (2.0 * l).sqrt()).min(1.0 / (2.0 * p_series(a)));
            SchemeParams::new(scheme, h, 2.0 * mu.sqrt(), a)
        }
    }
}

/// One trajectory's state: position, left-trivialized velocity, the cached
/// previous trivialized gradient (NAG-SC), and the step counter.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    pub g: GroupElement,
    pub xi: AlgebraElement,
    pub prev_grad: Option<AlgebraElement>,
    pub k: u64,
}

impl OptimizerState {
    /// Fresh state with zero velocity, per the initialization xi_0 = 0.
    pub fn new(g: GroupElement) -> Self {
        let n = g.dim();
        OptimizerState {
            g,
            xi: AlgebraElement::zeros(n),
            prev_grad: None,
            k: 0,
        }
    }

    #[cfg(debug_assertions)]
    fn check(&self) {
        let n = self.g.dim();
        debug_assert!((self.g.mat().column(0).norm() - 1.0).abs() < 1e-6);
        debug_assert!((self.xi.mat()[(0, n - 1)] + self.xi.mat()[(n - 1, 0)]).abs() < 1e-12);
    }
    #[cfg(not(debug_assertions))]
    fn check(&self) {}
}

/// Shared friction-plus-force update (1 - gamma h) xi - h grad. NAG-SC adds
/// its correction on top of this exact expression so that a vanishing
/// gradient difference reproduces the Heavy-Ball update path bitwise.
fn momentum_update(
    xi: &AlgebraElement,
    grad: &AlgebraElement,
    gamma: f64,
    h: f64,
) -> AlgebraElement {
    &xi.scale(1.0 - gamma * h) - &grad.scale(h)
}

/// Riemannian gradient descent: g_{k+1} = g_k exp(-h grad). The velocity
/// field is unused and kept at zero.
pub fn step_gd<P: Potential + ?Sized>(state: &OptimizerState, pot: &P, h: f64) -> OptimizerState {
    let grad = pot.trivialized_grad(&state.g);
    let g = state.g.compose(&grad.scale(-h).exp());
    let out = OptimizerState {
        g,
        xi: AlgebraElement::zeros(state.xi.dim()),
        prev_grad: None,
        k: state.k + 1,
    };
    out.check();
    out
}

/// Heavy-Ball: momentum first, then position.
pub fn step_heavy_ball<P: Potential + ?Sized>(
    state: &OptimizerState,
    pot: &P,
    params: &SchemeParams,
) -> OptimizerState {
    let grad = pot.trivialized_grad(&state.g);
    let xi = momentum_update(&state.xi, &grad, params.gamma, params.h);
    let g = state.g.compose(&xi.scale(params.h).exp());
    let out = OptimizerState {
        g,
        xi,
        prev_grad: None,
        k: state.k + 1,
    };
    out.check();
    out
}

/// NAG-SC: Heavy-Ball plus the (1 - gamma h) h (grad_k - grad_{k-1})
/// correction. At k = 0 the previous gradient defaults to the current one, so
/// the first step coincides with Heavy-Ball.
pub fn step_nag_sc<P: Potential + ?Sized>(
    state: &OptimizerState,
    pot: &P,
    params: &SchemeParams,
) -> OptimizerState {
    let grad = pot.trivialized_grad(&state.g);
    let prev = state.prev_grad.as_ref().unwrap_or(&grad);
    let base = momentum_update(&state.xi, &grad, params.gamma, params.h);
    let correction = (&grad - prev).scale((1.0 - params.gamma * params.h) * params.h);
    let xi = &base - &correction;
    let g = state.g.compose(&xi.scale(params.h).exp());
    let out = OptimizerState {
        g,
        xi,
        prev_grad: Some(grad),
        k: state.k + 1,
    };
    out.check();
    out
}

/// Exact-friction splitting: xi_{k+1} = e^{-gamma h} xi_k
/// - (1 - e^{-gamma h})/gamma grad, then the usual position update.
pub fn step_splitting<P: Potential + ?Sized>(
    state: &OptimizerState,
    pot: &P,
    params: &SchemeParams,
) -> OptimizerState {
    let grad = pot.trivialized_grad(&state.g);
    let decay = (-params.gamma * params.h).exp();
    let xi = &state.xi.scale(decay) - &grad.scale((1.0 - decay) / params.gamma);
    let g = state.g.compose(&xi.scale(params.h).exp());
    let out = OptimizerState {
        g,
        xi,
        prev_grad: None,
        k: state.k + 1,
    };
    out.check();
    out
}

/// Dispatch a single step of the configured scheme.
pub fn step<P: Potential + ?Sized>(
    state: &OptimizerState,
    pot: &P,
    params: &SchemeParams,
) -> OptimizerState {
    match params.scheme {
        Scheme::Gd => step_gd(state, pot, params.h),
        Scheme::HeavyBall => step_heavy_ball(state, pot, params),
        Scheme::NagSc => step_nag_sc(state, pot, params),
        Scheme::Splitting => step_splitting(state, pot, params),
    }
}

/// Change of variables mapping a splitting trajectory onto a Heavy-Ball one:
/// returns the equivalent Heavy-Ball parameters and the factor rescaling the
/// splitting velocity into the Heavy-Ball velocity.
pub fn splitting_as_heavy_ball(params: &SchemeParams) -> Result<(SchemeParams, f64)> {
    let s = 1.0 - (-params.gamma * params.h).exp();
    let velocity_scale = (params.h * params.gamma / s).sqrt();
    let gamma_hb = (params.gamma * s / params.h).sqrt();
    let h_hb = (s / (params.h * params.gamma)).sqrt() * params.h;
    Ok((
        SchemeParams::new(Scheme::HeavyBall, h_hb, gamma_hb, params.a)?,
        velocity_scale,
    ))
}
