//! Energy and Lyapunov functionals with per-step monotonicity monitors.
//!
//! The discrete energies certify global convergence (Heavy-Ball descends by
//! at least gamma h |xi_k|^2 per step when h <= gamma/(gamma^2 + L); the
//! NAG-SC modified energy is nonincreasing when h <= min(1/gamma,
//! gamma/(2L))). The Lyapunov functions contract geometrically near a
//! strongly convex minimizer. Monitors never abort a run; they log violations
//! with step index and magnitude, because several bounds intentionally fail
//! outside their step-size regimes.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::group::{geodesic_distance, AlgebraElement, GroupElement, Tolerances};
use crate::optimizer::{Scheme, SchemeParams};
use crate::potential::Potential;

/// U(g) - U(g_*), preferring the potential's cancellation-free evaluator.
pub fn suboptimality<P: Potential + ?Sized>(pot: &P, g: &GroupElement, g_star: &GroupElement) -> f64 {
    pot.suboptimality(g)
        .unwrap_or_else(|| pot.value(g) - pot.value(g_star))
}

/// Total energy U(g) + |xi|^2 / 2 of the continuous dynamics.
pub fn energy_ode<P: Potential + ?Sized>(g: &GroupElement, xi: &AlgebraElement, pot: &P) -> f64 {
    pot.value(g) + 0.5 * xi.norm_squared()
}

/// Modified Heavy-Ball energy U(g) + (1 - gamma h)^2 |xi|^2 / 2.
pub fn energy_hb<P: Potential + ?Sized>(
    g: &GroupElement,
    xi: &AlgebraElement,
    pot: &P,
    params: &SchemeParams,
) -> f64 {
    energy_hb_from_value(pot.value(g), xi, params)
}

pub(crate) fn energy_hb_from_value(u: f64, xi: &AlgebraElement, params: &SchemeParams) -> f64 {
    let damp = 1.0 - params.gamma * params.h;
    u + 0.5 * damp * damp * xi.norm_squared()
}

/// Modified NAG-SC energy
/// U(g) + (1-gamma h)^2 / (2 (1 + gamma h - gamma^2 h^2)) |xi + h grad|^2.
///
/// The gradient is evaluated at g exp(-h xi), the previous iterate along a
/// trajectory; the statement-level form pairs xi_k with grad(g_{k-1}) in the
/// proof of its monotonicity, matching how the Lyapunov functions are
/// evaluated.
pub fn energy_nagsc<P: Potential + ?Sized>(
    g: &GroupElement,
    xi: &AlgebraElement,
    pot: &P,
    params: &SchemeParams,
) -> f64 {
    energy_nagsc_from_value(pot.value(g), g, xi, pot, params)
}

pub(crate) fn energy_nagsc_from_value<P: Potential + ?Sized>(
    u: f64,
    g: &GroupElement,
    xi: &AlgebraElement,
    pot: &P,
    params: &SchemeParams,
) -> f64 {
    let gh = params.gamma * params.h;
    let damp = 1.0 - gh;
    let prev = g.compose(&xi.scale(-params.h).exp());
    let shifted = xi + &pot.trivialized_grad(&prev).scale(params.h);
    u + damp * damp / (2.0 * (1.0 + gh - gh * gh)) * shifted.norm_squared()
}

/// Continuous-time Lyapunov function
/// U(g) - U(g_*) + |xi|^2/4 + |gamma log(g_*^{-1} g) + xi|^2 / 4.
pub fn lyapunov_ode<P: Potential + ?Sized>(
    g: &GroupElement,
    xi: &AlgebraElement,
    pot: &P,
    g_star: &GroupElement,
    gamma: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let log = g_star.inverse().compose(g).log(tol)?;
    Ok(lyapunov_ode_with_log(g, xi, pot, g_star, gamma, &log))
}

pub(crate) fn lyapunov_ode_with_log<P: Potential + ?Sized>(
    g: &GroupElement,
    xi: &AlgebraElement,
    pot: &P,
    g_star: &GroupElement,
    gamma: f64,
    log: &AlgebraElement,
) -> f64 {
    let mix = &log.scale(gamma) + xi;
    suboptimality(pot, g, g_star) + 0.25 * xi.norm_squared() + 0.25 * mix.norm_squared()
}

/// Heavy-Ball Lyapunov function; the potential term is evaluated at
/// g exp(-h xi), which equals the previous iterate along a trajectory.
pub fn lyapunov_hb<P: Potential + ?Sized>(
    g: &GroupElement,
    xi: &AlgebraElement,
    pot: &P,
    g_star: &GroupElement,
    params: &SchemeParams,
    tol: &Tolerances,
) -> Result<f64> {
    let log = g_star.inverse().compose(g).log(tol)?;
    Ok(lyapunov_hb_with_log(g, xi, pot, g_star, params, &log))
}

pub(crate) fn lyapunov_hb_with_log<P: Potential + ?Sized>(
    g: &GroupElement,
    xi: &AlgebraElement,
    pot: &P,
    g_star: &GroupElement,
    params: &SchemeParams,
    log: &AlgebraElement,
) -> f64 {
    let damp = 1.0 - params.gamma * params.h;
    let prev = g.compose(&xi.scale(-params.h).exp());
    let mix = &log.scale(params.gamma / damp) + xi;
    suboptimality(pot, &prev, g_star) / damp
        + 0.25 * xi.norm_squared()
        + 0.25 * mix.norm_squared()
}

/// NAG-SC Lyapunov function: adds the cross term with h grad(g exp(-h xi))
/// and subtracts h^2 (2 - gamma h) / (4 (1 - gamma h)) |grad(g exp(-h xi))|^2.
pub fn lyapunov_nagsc<P: Potential + ?Sized>(
    g: &GroupElement,
    xi: &AlgebraElement,
    pot: &P,
    g_star: &GroupElement,
    params: &SchemeParams,
    tol: &Tolerances,
) -> Result<f64> {
    let log = g_star.inverse().compose(g).log(tol)?;
    Ok(lyapunov_nagsc_with_log(g, xi, pot, g_star, params, &log))
}

pub(crate) fn lyapunov_nagsc_with_log<P: Potential + ?Sized>(
    g: &GroupElement,
    xi: &AlgebraElement,
    pot: &P,
    g_star: &GroupElement,
    params: &SchemeParams,
    log: &AlgebraElement,
) -> f64 {
    let h = params.h;
    let gh = params.gamma * h;
    let damp = 1.0 - gh;
    let prev = g.compose(&xi.scale(-h).exp());
    let grad_prev = pot.trivialized_grad(&prev);
    let cross = &(xi + &log.scale(params.gamma / damp)) + &grad_prev.scale(h);
    suboptimality(pot, &prev, g_star) / damp + 0.25 * xi.norm_squared()
        + 0.25 * cross.norm_squared()
        - h * h * (2.0 - gh) / (4.0 * damp) * grad_prev.norm_squared()
}

/// Scheme-appropriate energy.
pub fn energy_for_scheme<P: Potential + ?Sized>(
    g: &GroupElement,
    xi: &AlgebraElement,
    pot: &P,
    params: &SchemeParams,
) -> f64 {
    energy_for_scheme_from_value(pot.value(g), g, xi, pot, params)
}

/// Same with U(g) already computed.
pub fn energy_for_scheme_from_value<P: Potential + ?Sized>(
    u: f64,
    g: &GroupElement,
    xi: &AlgebraElement,
    pot: &P,
    params: &SchemeParams,
) -> f64 {
    match params.scheme {
        Scheme::HeavyBall => energy_hb_from_value(u, xi, params),
        Scheme::NagSc => energy_nagsc_from_value(u, g, xi, pot, params),
        Scheme::Gd | Scheme::Splitting => u + 0.5 * xi.norm_squared(),
    }
}

/// Scheme-appropriate Lyapunov value.
pub fn lyapunov_for_scheme<P: Potential + ?Sized>(
    g: &GroupElement,
    xi: &AlgebraElement,
    pot: &P,
    g_star: &GroupElement,
    params: &SchemeParams,
    tol: &Tolerances,
) -> Result<f64> {
    let log = g_star.inverse().compose(g).log(tol)?;
    Ok(lyapunov_for_scheme_with_log(
        g, xi, pot, g_star, params, &log,
    ))
}

/// Same as `lyapunov_for_scheme` with log(g_*^{-1} g) already computed; the
/// runner shares one logarithm between the distance and Lyapunov columns.
pub fn lyapunov_for_scheme_with_log<P: Potential + ?Sized>(
    g: &GroupElement,
    xi: &AlgebraElement,
    pot: &P,
    g_star: &GroupElement,
    params: &SchemeParams,
    log: &AlgebraElement,
) -> f64 {
    match params.scheme {
        Scheme::HeavyBall | Scheme::Splitting => {
            lyapunov_hb_with_log(g, xi, pot, g_star, params, log)
        }
        Scheme::NagSc => lyapunov_nagsc_with_log(g, xi, pot, g_star, params, log),
        Scheme::Gd => lyapunov_ode_with_log(g, xi, pot, g_star, params.gamma, log),
    }
}

/// Per-step theoretical contraction factor of the Lyapunov function.
/// Heavy-Ball: (1 + mu/(16 L))^{-1}; NAG-SC: (1 + sqrt(mu) h / 30)^{-1}.
pub fn theoretical_contraction(scheme: Scheme, l: f64, mu: f64, h: f64) -> Option<f64> {
    match scheme {
        Scheme::HeavyBall | Scheme::Splitting => Some(1.0 / (1.0 + mu / (16.0 * l))),
        Scheme::NagSc => Some(1.0 / (1.0 + mu.sqrt() * h / 30.0)),
        Scheme::Gd => None,
    }
}

/// Continuous-time rate c = (2/3) sqrt(mu) for gamma = 2 sqrt(mu).
pub fn ode_rate(mu: f64) -> f64 {
    2.0 / 3.0 * mu.sqrt()
}

/// Which discrete energy inequality to enforce while monitoring.
///
/// For Heavy-Ball two bounds are tracked side by side: the decrement
/// -gamma h |xi_k|^2 as stated with the theorem, and the weaker
/// -gamma h / 2 |xi_k|^2 that its proof actually establishes (the proof
/// bounds the energy difference by (h^2 L - 2 gamma h + gamma^2 h^2)/2
/// times |xi_k|^2, and h <= gamma/(gamma^2 + L) makes the parenthesis at
/// most -gamma h, half of which survives the leading 1/2). The stated form
/// is falsified on real trajectories whenever the local curvature along the
/// step is positive and the velocity is not gradient-dominated; the halved
/// form is an exact consequence of L-smoothness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyCheck {
    /// Delta E <= -gamma h |xi_k|^2 (stated) and -gamma h/2 |xi_k|^2 (provable).
    HeavyBallDecrement,
    /// Delta E <= 0 (NAG-SC modified energy).
    NonIncreasing,
    /// Log only.
    None,
}

impl EnergyCheck {
    pub fn for_scheme(scheme: Scheme) -> Self {
        match scheme {
            Scheme::HeavyBall => EnergyCheck::HeavyBallDecrement,
            Scheme::NagSc => EnergyCheck::NonIncreasing,
            Scheme::Gd | Scheme::Splitting => EnergyCheck::None,
        }
    }
}

/// Streaming per-step monitor configuration.
#[derive(Debug, Clone)]
pub struct MonitorConfig {
    pub energy_check: EnergyCheck,
    /// gamma * h entering the Heavy-Ball decrement bound.
    pub gamma_h: f64,
    /// Absolute tolerance scale for the "exact" discrete inequalities,
    /// applied as tol * max(1, |E|).
    pub energy_tol: f64,
    /// Theoretical per-step Lyapunov contraction factor, when known.
    pub contraction: Option<f64>,
    /// Additive slack on the contraction ratio.
    pub ratio_tol: f64,
    /// Radius of the ball around g_* where the contraction bound applies.
    pub ball_radius: f64,
}

impl MonitorConfig {
    pub fn new(params: &SchemeParams, contraction: Option<f64>, ball_radius: f64) -> Self {
        MonitorConfig {
            energy_check: EnergyCheck::for_scheme(params.scheme),
            gamma_h: params.gamma * params.h,
            energy_tol: 1e-12,
            contraction,
            ratio_tol: 1e-9,
            ball_radius,
        }
    }
}

/// Violation counts and indices accumulated along one trajectory.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MonitorSummary {
    pub steps: u64,
    /// Violations of the stated decrement bound.
    pub energy_violations: u64,
    /// Violations of the provable decrement bound.
    pub energy_violations_provable: u64,
    pub first_energy_violation: Option<u64>,
    pub max_energy_excess: f64,
    pub lyapunov_violations: u64,
    pub first_lyapunov_violation: Option<u64>,
    pub max_lyapunov_ratio: Option<f64>,
    pub first_ball_entry: Option<u64>,
    pub left_ball_after_entry: Option<u64>,
    pub lyapunov_increases: u64,
    pub potential_increases: u64,
}

/// Streaming monitor; feed it one observation per optimizer step.
#[derive(Debug, Clone)]
pub struct Monitor {
    cfg: MonitorConfig,
    summary: MonitorSummary,
    prev_u: Option<f64>,
    prev_energy: Option<f64>,
    prev_lyap: Option<f64>,
    prev_in_ball: bool,
}

impl Monitor {
    pub fn new(cfg: MonitorConfig) -> Self {
        Monitor {
            cfg,
            summary: MonitorSummary::default(),
            prev_u: None,
            prev_energy: None,
            prev_lyap: None,
            prev_in_ball: false,
        }
    }

    /// Record step k. `xi_norm_sq` is |xi_k|^2 of the state being observed,
    /// `dist` the geodesic distance to g_* when available.
    pub fn observe(
        &mut self,
        k: u64,
        u: f64,
        xi_norm_sq: f64,
        energy: f64,
        lyapunov: Option<f64>,
        dist: Option<f64>,
    ) {
        self.summary.steps = k;
        if let Some(pu) = self.prev_u {
            if u > pu + 1e-12 * pu.abs().max(1.0) {
                self.summary.potential_increases += 1;
            }
        }
        self.prev_u = Some(u);

        if let Some(pe) = self.prev_energy {
            let delta = energy - pe;
            let tol = self.cfg.energy_tol * energy.abs().max(pe.abs()).max(1.0);
            let (stated, provable) = match self.cfg.energy_check {
                EnergyCheck::HeavyBallDecrement => (
                    -self.cfg.gamma_h * xi_norm_sq,
                    -0.5 * self.cfg.gamma_h * xi_norm_sq,
                ),
                EnergyCheck::NonIncreasing => (0.0, 0.0),
                EnergyCheck::None => (f64::INFINITY, f64::INFINITY),
            };
            if delta > stated + tol {
                self.summary.energy_violations += 1;
                self.summary.first_energy_violation.get_or_insert(k);
                self.summary.max_energy_excess =
                    self.summary.max_energy_excess.max(delta - stated);
            }
            if delta > provable + tol {
                self.summary.energy_violations_provable += 1;
            }
        }
        self.prev_energy = Some(energy);

        let in_ball = dist.map(|d| d <= self.cfg.ball_radius).unwrap_or(false);
        if in_ball && self.summary.first_ball_entry.is_none() {
            self.summary.first_ball_entry = Some(k);
        }
        if !in_ball
            && self.summary.first_ball_entry.is_some()
            && self.summary.left_ball_after_entry.is_none()
        {
            self.summary.left_ball_after_entry = Some(k);
        }

        if let (Some(pl), Some(l)) = (self.prev_lyap, lyapunov) {
            if l > pl * (1.0 + 1e-12) + 1e-300 {
                self.summary.lyapunov_increases += 1;
            }
            if self.prev_in_ball && in_ball {
                if let Some(c) = self.cfg.contraction {
                    if pl > 0.0 {
                        let ratio = l / pl;
                        self.summary.max_lyapunov_ratio = Some(
                            self.summary
                                .max_lyapunov_ratio
                                .map_or(ratio, |m| m.max(ratio)),
                        );
                        if ratio > c + self.cfg.ratio_tol {
                            self.summary.lyapunov_violations += 1;
                            self.summary.first_lyapunov_violation.get_or_insert(k);
                        }
                    }
                }
            }
        }
        self.prev_lyap = lyapunov;
        self.prev_in_ball = in_ball;
    }

    pub fn summary(&self) -> &MonitorSummary {
        &self.summary
    }

    pub fn into_summary(self) -> MonitorSummary {
        self.summary
    }
}

/// Per-step energy audit of a fully recorded trajectory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyReport {
    pub values: Vec<f64>,
    pub deltas: Vec<f64>,
    pub bounds: Vec<f64>,
    pub violations: Vec<bool>,
}

/// Build an energy report from per-step energies and |xi_k|^2 values.
pub fn energy_report(energies: &[f64], xi_norm_sq: &[f64], check: EnergyCheck, gamma_h: f64) -> EnergyReport {
    assert_eq!(energies.len(), xi_norm_sq.len());
    let mut deltas = Vec::with_capacity(energies.len().saturating_sub(1));
    let mut bounds = Vec::with_capacity(deltas.capacity());
    let mut violations = Vec::with_capacity(deltas.capacity());
    for k in 1..energies.len() {
        let delta = energies[k] - energies[k - 1];
        let bound = match check {
            EnergyCheck::HeavyBallDecrement => -gamma_h * xi_norm_sq[k],
            EnergyCheck::NonIncreasing => 0.0,
            EnergyCheck::None => f64::INFINITY,
        };
        let tol = 1e-12 * energies[k].abs().max(energies[k - 1].abs()).max(1.0);
        deltas.push(delta);
        bounds.push(bound);
        violations.push(delta > bound + tol);
    }
    EnergyReport {
        values: energies.to_vec(),
        deltas,
        bounds,
        violations,
    }
}

/// Per-step Lyapunov audit of a fully recorded trajectory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LyapunovReport {
    pub values: Vec<f64>,
    pub ratios: Vec<f64>,
    pub rate: f64,
    pub first_entry: Option<usize>,
    pub violations: Vec<usize>,
}

pub fn lyapunov_report(
    values: &[f64],
    dists: &[f64],
    rate: f64,
    ball_radius: f64,
    ratio_tol: f64,
) -> LyapunovReport {
    assert_eq!(values.len(), dists.len());
    let first_entry = dists.iter().position(|&d| d <= ball_radius);
    let mut ratios = Vec::with_capacity(values.len().saturating_sub(1));
    let mut violations = Vec::new();
    for k in 1..values.len() {
        let ratio = values[k] / values[k - 1];
        ratios.push(ratio);
        let inside = dists[k] <= ball_radius && dists[k - 1] <= ball_radius;
        if inside && first_entry.map_or(false, |e| k > e) && ratio > rate + ratio_tol {
            violations.push(k);
        }
    }
    LyapunovReport {
        values: values.to_vec(),
        ratios,
        rate,
        first_entry,
        violations,
    }
}

/// Sub-level trap verdict: membership in the starting component is proxied by
/// distance to a representative.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrapReport {
    pub trapped: bool,
    pub first_escape: Option<usize>,
    pub level: f64,
    pub radius: f64,
}

/// Check that every iterate with recorded distance stays within `radius` of
/// the component representative. Escape is recorded, not failed: high-energy
/// starts legitimately leave their starting basin.
pub fn check_sublevel_trap(dists: &[Option<f64>], level: f64, radius: f64) -> TrapReport {
    let first_escape = dists
        .iter()
        .position(|d| d.map_or(true, |v| v > radius));
    TrapReport {
        trapped: first_escape.is_none(),
        first_escape,
        level,
        radius,
    }
}

/// Conservative trap radius for small n: half the minimal geodesic distance
/// from the global minimizer to any other stationary point of the census.
pub fn trap_radius_from_census(
    pot: &crate::potential::BrockettPotential,
    tol: &Tolerances,
) -> Result<f64> {
    let g_star = pot.known_minimizer().expect("Brockett knows its minimizer");
    let census = crate::potential::stationary_census(pot);
    let mut min_dist = f64::INFINITY;
    for pt in &census {
        let n = pot.dim();
        let mut x = nalgebra::DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let col = pot.eigenvectors().column(pt.pi[j]) * pt.signs[j] as f64;
            x.set_column(j, &col);
        }
        let g = GroupElement::from_matrix_unchecked(x);
        match geodesic_distance(&g_star, &g, tol) {
            Ok(d) if d > 1e-9 => min_dist = min_dist.min(d),
            _ => {}
        }
    }
    Ok(0.5 * min_dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::group_exp;
    use crate::optimizer::{select_params, step, OptimizerState};
    use crate::potential::{sample_haar_rotation, BrockettPotential, SpectrumSpec};
    use crate::rng::{derive_rng, rand_algebra, rand_unit_algebra};
    use std::f64::consts::PI;

    fn brockett(n: usize, kappa: f64, seed: u64) -> BrockettPotential {
        BrockettPotential::from_spectrum(&SpectrumSpec::new(n, kappa).unwrap(), seed).unwrap()
    }

    #[test]
    fn energies_reduce_to_total_energy() {
        let pot = brockett(4, 50.0, 1);
        let g = sample_haar_rotation(4, 2);
        let mut rng = derive_rng(1, 1);
        let xi = rand_algebra(4, 0.7, &mut rng);
        let e0 = energy_ode(&g, &xi, &pot);
        // gamma h -> 0 sends the Heavy-Ball energy to the total energy.
        let params = SchemeParams::new(Scheme::HeavyBall, 1e-9, 1e-9, PI).unwrap();
        assert!((energy_hb(&g, &xi, &pot, &params) - e0).abs() < 1e-9);
        // and the NAG-SC energy to U + |xi + h grad|^2 / 2 with tiny h.
        let en = energy_nagsc(&g, &xi, &pot, &params);
        let expected = pot.value(&g)
            + 0.5
                * (&xi + &pot.trivialized_grad(&g).scale(params.h))
                    .norm_squared();
        assert!((en - expected).abs() < 1e-8);
    }

    #[test]
    fn energy_constant_at_stationary_start() {
        let pot = brockett(4, 60.0, 3);
        let g_star = pot.known_minimizer().unwrap();
        let params = select_params(60.0, 1.0, Scheme::HeavyBall, PI).unwrap();
        let mut state = OptimizerState::new(g_star);
        let e0 = energy_hb(&state.g, &state.xi, &pot, &params);
        for _ in 0..10 {
            state = step(&state, &pot, &params);
        }
        let e1 = energy_hb(&state.g, &state.xi, &pot, &params);
        assert!((e1 - e0).abs() < 1e-10);
    }

    #[test]
    fn lyapunov_zero_at_minimizer() {
        let pot = brockett(5, 70.0, 4);
        let g_star = pot.known_minimizer().unwrap();
        let xi = AlgebraElement::zeros(5);
        let tol = Tolerances::default();
        let params = select_params(70.0, 1.0, Scheme::NagSc, PI).unwrap();
        assert!(lyapunov_ode(&g_star, &xi, &pot, &g_star, 2.0, &tol)
            .unwrap()
            .abs()
            < 1e-12);
        assert!(lyapunov_hb(&g_star, &xi, &pot, &g_star, &params, &tol)
            .unwrap()
            .abs()
            < 1e-12);
        assert!(lyapunov_nagsc(&g_star, &xi, &pot, &g_star, &params, &tol)
            .unwrap()
            .abs()
            < 1e-12);
    }

    #[test]
    fn lyapunov_dominates_suboptimality() {
        let pot = brockett(4, 55.0, 5);
        let g_star = pot.known_minimizer().unwrap();
        let tol = Tolerances::default();
        let mut rng = derive_rng(2, 2);
        for _ in 0..20 {
            let g = g_star.compose(&group_exp(&rand_unit_algebra(4, &mut rng).scale(0.3)));
            let xi = rand_algebra(4, 0.5, &mut rng);
            let l = lyapunov_ode(&g, &xi, &pot, &g_star, 2.0, &tol).unwrap();
            assert!(l >= suboptimality(&pot, &g, &g_star) - 1e-12);
        }
    }

    #[test]
    fn heavy_ball_provable_energy_decrement_holds_exactly() {
        // h <= gamma / (gamma^2 + L) with the certified global bound gives
        // Delta E <= -(gamma h / 2) |xi_k|^2 without exception.
        let pot = brockett(6, 90.0, 6);
        let l_cert = pot.global_smoothness_bound();
        let gamma = 2.0;
        let h = gamma / (gamma * gamma + l_cert);
        let params = SchemeParams::new(Scheme::HeavyBall, h, gamma, PI).unwrap();
        let mut state = OptimizerState::new(sample_haar_rotation(6, 7));
        let mut rng = derive_rng(3, 3);
        state.xi = rand_algebra(6, 0.5, &mut rng);
        let mut prev_e = energy_hb(&state.g, &state.xi, &pot, &params);
        for _ in 0..5000 {
            state = step(&state, &pot, &params);
            let e = energy_hb(&state.g, &state.xi, &pot, &params);
            let bound = -0.5 * params.gamma * params.h * state.xi.norm_squared();
            let tol = 1e-12 * e.abs().max(prev_e.abs()).max(1.0);
            assert!(
                e - prev_e <= bound + tol,
                "provable Heavy-Ball decrement violated: delta {} bound {}",
                e - prev_e,
                bound
            );
            prev_e = e;
        }
    }

    #[test]
    fn heavy_ball_stated_decrement_fails_off_gradient_domination() {
        // The decrement written with the full gamma h factor requires
        // |grad|^2 >= (L + gamma^2) |xi|^2; descending trajectories leave that
        // region, so violations of the stated form are expected.
        let pot = brockett(6, 90.0, 6);
        let l_cert = pot.global_smoothness_bound();
        let gamma = 2.0;
        let h = gamma / (gamma * gamma + l_cert);
        let params = SchemeParams::new(Scheme::HeavyBall, h, gamma, PI).unwrap();
        let mut state = OptimizerState::new(sample_haar_rotation(6, 7));
        let mut rng = derive_rng(3, 3);
        state.xi = rand_algebra(6, 0.5, &mut rng);
        let mut prev_e = energy_hb(&state.g, &state.xi, &pot, &params);
        let mut stated_violations = 0u64;
        for _ in 0..5000 {
            state = step(&state, &pot, &params);
            let e = energy_hb(&state.g, &state.xi, &pot, &params);
            let bound = -params.gamma * params.h * state.xi.norm_squared();
            let tol = 1e-12 * e.abs().max(prev_e.abs()).max(1.0);
            if e - prev_e > bound + tol {
                stated_violations += 1;
            }
            prev_e = e;
        }
        assert!(
            stated_violations > 0,
            "expected the stated decrement to fail somewhere along a converging run"
        );
    }

    #[test]
    fn nagsc_energy_monotone_at_small_step() {
        let pot = brockett(6, 90.0, 8);
        let l_cert = pot.global_smoothness_bound();
        let gamma = 2.0f64;
        let h = (1.0 / gamma).min(gamma / (2.0 * l_cert));
        let params = SchemeParams::new(Scheme::NagSc, h, gamma, PI).unwrap();
        let mut state = OptimizerState::new(sample_haar_rotation(6, 9));
        let mut prev_e = energy_nagsc(&state.g, &state.xi, &pot, &params);
        for _ in 0..2000 {
            state = step(&state, &pot, &params);
            let e = energy_nagsc(&state.g, &state.xi, &pot, &params);
            let tol = 1e-12 * e.abs().max(prev_e.abs()).max(1.0);
            assert!(e - prev_e <= tol, "NAG-SC energy increased by {}", e - prev_e);
            prev_e = e;
        }
    }

    #[test]
    fn monitor_counts_potential_oscillation() {
        let mut m = Monitor::new(MonitorConfig {
            energy_check: EnergyCheck::None,
            gamma_h: 0.0,
            energy_tol: 1e-12,
            contraction: Some(0.9),
            ratio_tol: 1e-9,
            ball_radius: 1.0,
        });
        // u goes down, up, down; lyapunov contracts each step inside the ball.
        let us = [1.0, 0.5, 0.7, 0.2];
        let ls = [1.0, 0.8, 0.64, 0.512];
        for (k, (&u, &l)) in us.iter().zip(ls.iter()).enumerate() {
            m.observe(k as u64, u, 0.0, 0.0, Some(l), Some(0.1));
        }
        let s = m.summary();
        assert_eq!(s.potential_increases, 1);
        assert_eq!(s.lyapunov_violations, 0);
        assert_eq!(s.first_ball_entry, Some(0));

        // A ratio above the contraction bound is flagged.
        let mut m = Monitor::new(MonitorConfig {
            energy_check: EnergyCheck::None,
            gamma_h: 0.0,
            energy_tol: 1e-12,
            contraction: Some(0.9),
            ratio_tol: 1e-9,
            ball_radius: 1.0,
        });
        m.observe(0, 1.0, 0.0, 0.0, Some(1.0), Some(0.1));
        m.observe(1, 1.0, 0.0, 0.0, Some(0.95), Some(0.1));
        assert_eq!(m.summary().lyapunov_violations, 1);
    }

    #[test]
    fn energy_report_flags_bound_breaches() {
        let energies = [10.0, 9.0, 9.5, 8.0];
        let xi_sq = [1.0, 1.0, 1.0, 1.0];
        let report = energy_report(&energies, &xi_sq, EnergyCheck::HeavyBallDecrement, 0.1);
        assert_eq!(report.values.len(), 4);
        assert_eq!(report.deltas, vec![-1.0, 0.5, -1.5]);
        assert_eq!(report.bounds, vec![-0.1, -0.1, -0.1]);
        assert_eq!(report.violations, vec![false, true, false]);

        let report = energy_report(&energies, &xi_sq, EnergyCheck::None, 0.0);
        assert!(report.violations.iter().all(|v| !v));
    }

    #[test]
    fn lyapunov_report_restricts_to_ball() {
        let values = [1.0, 0.9, 0.95, 0.5];
        // Third step happens outside the ball, so its ratio is not judged.
        let dists = [0.05, 0.05, 0.2, 0.05];
        let report = lyapunov_report(&values, &dists, 0.92, 0.1, 1e-9);
        assert_eq!(report.first_entry, Some(0));
        assert_eq!(report.ratios.len(), 3);
        assert_eq!(report.violations, Vec::<usize>::new());

        let report = lyapunov_report(&values, &[0.05; 4], 0.92, 0.1, 1e-9);
        assert_eq!(report.violations, vec![2]);
    }

    #[test]
    fn trap_report_distinguishes_stay_and_escape() {
        let stay = check_sublevel_trap(&[Some(0.1), Some(0.2), Some(0.15)], 1.0, 0.5);
        assert!(stay.trapped);
        let escape = check_sublevel_trap(&[Some(0.1), Some(0.8)], 1.0, 0.5);
        assert!(!escape.trapped);
        assert_eq!(escape.first_escape, Some(1));
    }

    #[test]
    fn low_energy_run_stays_trapped_n2() {
        // Energy below the lowest saddle value cannot cross basins.
        let pot = brockett(2, 4.0, 10);
        let tol = Tolerances::default();
        let census = crate::potential::stationary_census(&pot);
        let min_val = pot.known_min_value().unwrap();
        let lowest_saddle = census
            .iter()
            .filter(|p| p.value > min_val + 1e-9)
            .map(|p| p.value)
            .fold(f64::INFINITY, f64::min);
        let radius = trap_radius_from_census(&pot, &tol).unwrap();

        let g_star = pot.known_minimizer().unwrap();
        let mut rng = derive_rng(4, 4);
        // Start close enough that the total energy sits below the saddle.
        let g0 = g_star.compose(&group_exp(&rand_unit_algebra(2, &mut rng).scale(0.05)));
        let params = select_params(4.0, 4.0, Scheme::HeavyBall, PI).unwrap();
        let mut state = OptimizerState::new(g0);
        assert!(energy_hb(&state.g, &state.xi, &pot, &params) < lowest_saddle);
        let mut dists = Vec::new();
        for _ in 0..500 {
            dists.push(geodesic_distance(&state.g, &g_star, &tol).ok());
            state = step(&state, &pot, &params);
        }
        let report = check_sublevel_trap(&dists, lowest_saddle, radius);
        assert!(report.trapped, "escaped at {:?}", report.first_escape);
    }
}
