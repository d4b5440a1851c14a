//! Self-check battery behind the CLI `verify` subcommand: group axioms, dlog
//! identities, gradient consistency, scheme equivalences, and the discrete
//! energy/Lyapunov inequalities at their theorem step sizes.

use std::f64::consts::PI;

use crate::calculus::{dlog_apply, q_bound, q_complex_eval};
use crate::diagnostics::{
    energy_hb, energy_nagsc, lyapunov_for_scheme, suboptimality, theoretical_contraction,
};
use crate::group::{
    bracket, group_exp, group_log, inner, AlgebraElement, GroupElement,
    Tolerances,
};
use crate::ode::{energy_identity_defect, integrate_ode};
use crate::optimizer::{
    select_params, splitting_as_heavy_ball, step, step_heavy_ball, OptimizerState, Scheme,
    SchemeParams,
};
use crate::potential::{
    sample_haar_rotation, stationary_census, BrockettPotential, Potential, SpectrumSpec,
};
use crate::rng::{derive_rng, rand_algebra, rand_unit_algebra};

/// Deliberate defects injectable for negative testing of the monitors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Flip the sign of the friction factor in the Heavy-Ball update.
    HeavyBallFrictionSign,
}

impl std::str::FromStr for Fault {
    type Err = crate::error::LieError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hb-friction-sign" => Ok(Fault::HeavyBallFrictionSign),
            other => Err(crate::error::LieError::InvalidParameter(format!(
                "unknown fault '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub group: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(
    out: &mut Vec<CheckResult>,
    group: &'static str,
    name: &'static str,
    result: (bool, String),
) {
    out.push(CheckResult {
        group,
        name,
        passed: result.0,
        detail: result.1,
    });
}

/// Run the battery. `only` filters by group name; `fault` injects a defect so
/// callers can confirm the monitors catch it.
pub fn run_battery(only: Option<&str>, fault: Option<Fault>) -> Vec<CheckResult> {
    let mut results = Vec::new();
    let wants = |g: &str| only.map_or(true, |o| o == g);

    if wants("lie-core") {
        check(&mut results, "lie-core", "exp-log roundtrip", exp_log_roundtrip());
        check(&mut results, "lie-core", "ad skew-adjointness", ad_skew_adjoint());
        check(&mut results, "lie-core", "Jacobi identity", jacobi());
        check(&mut results, "lie-core", "dlog pairing identity", dlog_pairing());
        check(&mut results, "lie-core", "dlog quadratic bound", dlog_quadratic());
        check(&mut results, "lie-core", "dlog finite differences", dlog_fd());
        check(&mut results, "lie-core", "q dual evaluation", q_two_routes());
    }
    if wants("potentials") {
        check(&mut results, "potentials", "gradient vs finite differences", grad_fd());
        check(&mut results, "potentials", "stationary census", census());
        check(&mut results, "potentials", "Haar sampling", haar());
    }
    if wants("optimizers") {
        check(
            &mut results,
            "optimizers",
            "splitting = Heavy-Ball change of variables",
            splitting_equivalence(),
        );
        check(
            &mut results,
            "optimizers",
            "NAG-SC degenerates to Heavy-Ball",
            nag_degenerates(),
        );
    }
    if wants("diagnostics") {
        check(
            &mut results,
            "diagnostics",
            "Heavy-Ball energy decrement",
            hb_energy_decrement(fault),
        );
        check(
            &mut results,
            "diagnostics",
            "NAG-SC energy monotone at small step",
            nagsc_energy_monotone(),
        );
        check(
            &mut results,
            "diagnostics",
            "Lyapunov contraction near minimum",
            lyapunov_contraction(),
        );
        check(
            &mut results,
            "diagnostics",
            "continuous energy identity",
            ode_energy_identity(),
        );
    }
    results
}

fn exp_log_roundtrip() -> (bool, String) {
    let tol = Tolerances::default();
    let mut worst = 0.0f64;
    let mut rng = derive_rng(101, 1);
    for n in [3usize, 5, 10] {
        for _ in 0..30 {
            let xi = rand_unit_algebra(n, &mut rng).scale(1.5);
            let back = match group_log(&group_exp(&xi), &tol) {
                Ok(b) => b,
                Err(e) => return (false, format!("log failed: {e}")),
            };
            worst = worst.max((&back - &xi).norm());
        }
    }
    (worst <= 1e-10, format!("max roundtrip defect {worst:.2e}"))
}

fn ad_skew_adjoint() -> (bool, String) {
    let mut rng = derive_rng(102, 1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let x = rand_algebra(4, 1.0, &mut rng);
        let y = rand_algebra(4, 1.0, &mut rng);
        let z = rand_algebra(4, 1.0, &mut rng);
        let defect = inner(&bracket(&x, &y).unwrap(), &z).unwrap()
            + inner(&y, &bracket(&x, &z).unwrap()).unwrap();
        worst = worst.max(defect.abs());
    }
    (worst <= 1e-12, format!("max pairing defect {worst:.2e}"))
}

fn jacobi() -> (bool, String) {
    let mut rng = derive_rng(103, 1);
    let mut worst = 0.0f64;
    for _ in 0..300 {
        let x = rand_algebra(5, 1.0, &mut rng);
        let y = rand_algebra(5, 1.0, &mut rng);
        let z = rand_algebra(5, 1.0, &mut rng);
        let s = &(&x.commutator(&y.commutator(&z)) + &y.commutator(&z.commutator(&x)))
            + &z.commutator(&x.commutator(&y));
        worst = worst.max(s.norm());
    }
    (worst <= 1e-12, format!("max Jacobi defect {worst:.2e}"))
}

fn dlog_pairing() -> (bool, String) {
    let tol = Tolerances::default();
    let mut rng = derive_rng(104, 1);
    let mut worst = 0.0f64;
    for _ in 0..60 {
        let g = group_exp(&rand_algebra(5, 0.4, &mut rng));
        let xi = rand_algebra(5, 1.0, &mut rng);
        let log_g = g.log(&tol).unwrap();
        let d = dlog_apply(&g, &xi, &tol).unwrap();
        worst = worst.max((inner(&d, &log_g).unwrap() - inner(&log_g, &xi).unwrap()).abs());
    }
    (worst <= 1e-10, format!("max defect {worst:.2e}"))
}

fn dlog_quadratic() -> (bool, String) {
    let tol = Tolerances::default();
    let mut rng = derive_rng(105, 1);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..60 {
        let g = group_exp(&rand_algebra(4, 0.6, &mut rng));
        let xi = rand_algebra(4, 1.0, &mut rng);
        let d = dlog_apply(&g, &xi, &tol).unwrap();
        worst = worst.max(inner(&d, &xi).unwrap() - xi.norm_squared());
    }
    (worst <= 1e-10, format!("max excess {worst:.2e}"))
}

fn dlog_fd() -> (bool, String) {
    let tol = Tolerances::default();
    let mut rng = derive_rng(106, 1);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let g = group_exp(&rand_algebra(4, 0.5, &mut rng));
        let xi = rand_algebra(4, 1.0, &mut rng);
        let t = 1e-6;
        let fd = (&g.compose(&group_exp(&xi.scale(t))).log(&tol).unwrap() - &g.log(&tol).unwrap())
            .scale(1.0 / t);
        let d = dlog_apply(&g, &xi, &tol).unwrap();
        worst = worst.max((&fd - &d).norm() / d.norm().max(1e-12));
    }
    (worst <= 1e-4, format!("max relative defect {worst:.2e}"))
}

fn q_two_routes() -> (bool, String) {
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let x = 0.01 + (2.0 * PI - 0.02) * i as f64 / 999.0;
        worst = worst.max((q_bound(x).unwrap() - q_complex_eval(x)).abs());
    }
    (worst <= 1e-12, format!("max route disagreement {worst:.2e}"))
}

fn grad_fd() -> (bool, String) {
    let pot = BrockettPotential::from_spectrum(&SpectrumSpec::new(6, 120.0).unwrap(), 61).unwrap();
    let mut rng = derive_rng(107, 1);
    let mut worst = 0.0f64;
    for p in 0..20 {
        let g = sample_haar_rotation(6, 500 + p);
        let grad = pot.trivialized_grad(&g);
        for _ in 0..20 {
            let xi = rand_unit_algebra(6, &mut rng);
            let t = 1e-6;
            let fd = (pot.value(&g.compose(&group_exp(&xi.scale(t))))
                - pot.value(&g.compose(&group_exp(&xi.scale(-t)))))
                / (2.0 * t);
            let an = grad.dot(&xi);
            worst = worst.max(((fd - an) / an.abs().max(1.0)).abs());
        }
    }
    (worst <= 1e-5, format!("max relative defect {worst:.2e}"))
}

fn census() -> (bool, String) {
    for n in [2usize, 3] {
        let spec = SpectrumSpec::new(n, ((n - 1) * (n - 1)) as f64 + 2.0).unwrap();
        let pot = BrockettPotential::from_spectrum(&spec, 62).unwrap();
        let census = stationary_census(&pot);
        let min_val = pot.known_min_value().unwrap();
        for pt in &census {
            if pt.grad_norm > 1e-10 {
                return (false, format!("non-stationary census point at n = {n}"));
            }
            if pt.value < min_val - 1e-9 {
                return (false, format!("census value below the minimum at n = {n}"));
            }
        }
    }
    (true, "all signed permutations stationary, minimum attained".into())
}

fn haar() -> (bool, String) {
    let mut worst = 0.0f64;
    for seed in 0..50u64 {
        let g = sample_haar_rotation(7, seed);
        worst = worst.max(g.orthogonality_defect());
        worst = worst.max((g.mat().determinant() - 1.0).abs());
    }
    (worst <= 1e-12, format!("max defect {worst:.2e}"))
}

fn splitting_equivalence() -> (bool, String) {
    let pot = BrockettPotential::from_spectrum(&SpectrumSpec::new(5, 60.0).unwrap(), 63).unwrap();
    let params_s = SchemeParams::new(Scheme::Splitting, 0.04, 1.5, PI).unwrap();
    let (params_h, vel_scale) = splitting_as_heavy_ball(&params_s).unwrap();
    let g0 = sample_haar_rotation(5, 64);
    let mut rng = derive_rng(108, 1);
    let xi0 = rand_algebra(5, 0.4, &mut rng);
    let mut s = OptimizerState::new(g0.clone());
    s.xi = xi0.clone();
    let mut h = OptimizerState::new(g0);
    h.xi = xi0.scale(vel_scale);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        s = step(&s, &pot, &params_s);
        h = step(&h, &pot, &params_h);
        worst = worst.max((s.g.mat() - h.g.mat()).norm());
    }
    (worst <= 1e-12, format!("max position gap {worst:.2e}"))
}

fn nag_degenerates() -> (bool, String) {
    struct ConstGrad(AlgebraElement);
    impl Potential for ConstGrad {
        fn dim(&self) -> usize {
            self.0.dim()
        }
        fn value(&self, _: &GroupElement) -> f64 {
            0.0
        }
        fn trivialized_grad(&self, _: &GroupElement) -> AlgebraElement {
            self.0.clone()
        }
    }
    let mut rng = derive_rng(109, 1);
    let pot = ConstGrad(rand_algebra(4, 0.3, &mut rng));
    let params = SchemeParams::new(Scheme::NagSc, 0.05, 0.8, PI).unwrap();
    let hb = SchemeParams::new(Scheme::HeavyBall, 0.05, 0.8, PI).unwrap();
    let g0 = GroupElement::identity(4);
    let mut a = OptimizerState::new(g0.clone());
    let mut b = OptimizerState::new(g0);
    for _ in 0..25 {
        a = step(&a, &pot, &params);
        b = step(&b, &pot, &hb);
        if a.g.mat() != b.g.mat() || a.xi.mat() != b.xi.mat() {
            return (false, "update paths differ".into());
        }
    }
    (true, "bitwise identical update path".into())
}

fn hb_energy_decrement(fault: Option<Fault>) -> (bool, String) {
    let pot = BrockettPotential::from_spectrum(&SpectrumSpec::new(8, 300.0).unwrap(), 65).unwrap();
    let l_cert = pot.global_smoothness_bound();
    let gamma = 2.0;
    let h = gamma / (gamma * gamma + l_cert);
    let params = SchemeParams::new(Scheme::HeavyBall, h, gamma, PI).unwrap();
    let mut state = OptimizerState::new(sample_haar_rotation(8, 66));
    let mut prev = energy_hb(&state.g, &state.xi, &pot, &params);
    let mut violations = 0u64;
    for _ in 0..3000 {
        state = match fault {
            Some(Fault::HeavyBallFrictionSign) => {
                // Mutated update: friction applied with the wrong sign.
                let grad = pot.trivialized_grad(&state.g);
                let xi = &state.xi.scale(1.0 + params.gamma * params.h) - &grad.scale(params.h);
                let g = state.g.compose(&xi.scale(params.h).exp());
                OptimizerState {
                    g,
                    xi,
                    prev_grad: None,
                    k: state.k + 1,
                }
            }
            None => step_heavy_ball(&state, &pot, &params),
        };
        let e = energy_hb(&state.g, &state.xi, &pot, &params);
        // Provable decrement: -(gamma h / 2) |xi_k|^2.
        let bound = -0.5 * params.gamma * params.h * state.xi.norm_squared();
        let tol = 1e-12 * e.abs().max(prev.abs()).max(1.0);
        if e - prev > bound + tol {
            violations += 1;
        }
        prev = e;
    }
    (
        violations == 0,
        format!("{violations} decrement violations over 3000 steps"),
    )
}

fn nagsc_energy_monotone() -> (bool, String) {
    let pot = BrockettPotential::from_spectrum(&SpectrumSpec::new(8, 300.0).unwrap(), 67).unwrap();
    let l_cert = pot.global_smoothness_bound();
    let gamma = 2.0f64;
    let h = (1.0 / gamma).min(gamma / (2.0 * l_cert));
    let params = SchemeParams::new(Scheme::NagSc, h, gamma, PI).unwrap();
    let mut state = OptimizerState::new(sample_haar_rotation(8, 68));
    let mut prev = energy_nagsc(&state.g, &state.xi, &pot, &params);
    let mut violations = 0u64;
    for _ in 0..3000 {
        state = step(&state, &pot, &params);
        let e = energy_nagsc(&state.g, &state.xi, &pot, &params);
        if e - prev > 1e-12 * e.abs().max(prev.abs()).max(1.0) {
            violations += 1;
        }
        prev = e;
    }
    (
        violations == 0,
        format!("{violations} monotonicity violations over 3000 steps"),
    )
}

fn lyapunov_contraction() -> (bool, String) {
    let tol = Tolerances::default();
    let pot = BrockettPotential::from_spectrum(&SpectrumSpec::new(10, 100.0).unwrap(), 69).unwrap();
    let est = pot.local_smoothness().unwrap();
    let g_star = pot.known_minimizer().unwrap();
    for scheme in [Scheme::HeavyBall, Scheme::NagSc] {
        let params = select_params(est.l, est.mu, scheme, PI).unwrap();
        let c = theoretical_contraction(scheme, est.l, est.mu, params.h).unwrap();
        let mut rng = derive_rng(110, scheme as u64);
        let rho = 0.01 * PI;
        let g0 = g_star.compose(&rand_unit_algebra(10, &mut rng).scale(rho).exp());
        let mut state = OptimizerState::new(g0);
        let l0 = lyapunov_for_scheme(&state.g, &state.xi, &pot, &g_star, &params, &tol).unwrap();
        let mut prev = l0;
        for _ in 0..3000 {
            state = step(&state, &pot, &params);
            let l =
                lyapunov_for_scheme(&state.g, &state.xi, &pot, &g_star, &params, &tol).unwrap();
            if prev > 0.0 && l / prev > c + 1e-9 {
                return (
                    false,
                    format!("ratio {} above rate {c} for {scheme:?}", l / prev),
                );
            }
            prev = l;
            // The contraction claim is checked down to fifteen decades of
            // decay; past that the iterate stalls at the resolution of f64
            // and ratios sit at 1.
            if prev < 1e-15 * l0 {
                break;
            }
        }
    }
    (true, "every step within the theoretical rate".into())
}

fn ode_energy_identity() -> (bool, String) {
    let pot = BrockettPotential::from_spectrum(&SpectrumSpec::new(5, 80.0).unwrap(), 70).unwrap();
    let g_star = pot.known_minimizer().unwrap();
    let mut rng = derive_rng(111, 1);
    let g0 = g_star.compose(&rand_unit_algebra(5, &mut rng).scale(0.2).exp());
    let gamma = 2.0;
    let trace = integrate_ode(
        &pot,
        &g0,
        &AlgebraElement::zeros(5),
        gamma,
        1e-4,
        0.4,
        None,
        1,
    );
    let defect = energy_identity_defect(&trace, gamma);
    // Suboptimality evaluator agrees with the plain difference at this scale.
    let naive = pot.value(&g0) - pot.known_min_value().unwrap();
    let stable = suboptimality(&pot, &g0, &g_star);
    let agree = (naive - stable).abs() < 1e-8 * naive.abs().max(1.0);
    (
        defect < 1e-6 && agree,
        format!("energy identity defect {defect:.2e}"),
    )
}
