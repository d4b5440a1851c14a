//! Scalar and operator calculus around the logarithm differential: the power
//! series p(x) = x / (1 - exp(-x)), the deviation bound q, the bracket
//! operator-norm constant, and the action of p(ad_{log g}).

use std::f64::consts::TAU;

use crate::error::{LieError, Result};
use crate::group::{AlgebraElement, GroupElement, Tolerances};
use crate::linalg;
use crate::rng::{derive_rng, rand_unit_algebra};

/// Refuse the dlog series when `|ad_{log g}|_op` is this close to 2*pi.
pub const SERIES_GUARD: f64 = 1e-3;

/// p(x) = x / (1 - exp(-x)), extended through the removable singularity at 0.
pub fn p_series(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        // 1 + x/2 + x^2/12 - x^4/720 + ...; the quartic term is below eps here.
        return 1.0 + 0.5 * x + x * x / 12.0;
    }
    x / (-(-x).exp_m1())
}

/// Even Taylor coefficient of p: coefficient of x^{2k}, equal to
/// B_{2k} / (2k)! = (-1)^{k+1} 2 zeta(2k) / (2 pi)^{2k}.
///
/// Low orders come from the exact Bernoulli values; for 2k >= 12 the zeta
/// series needs at most a few dozen terms at f64 accuracy.
fn p_even_coeff(k: usize) -> f64 {
    const EXACT: [f64; 6] = [
        0.0,                  // unused (k = 0 handled by the constant term)
        1.0 / 12.0,           // B_2 / 2!
        -1.0 / 720.0,         // B_4 / 4!
        1.0 / 30_240.0,       // B_6 / 6!
        -1.0 / 1_209_600.0,   // B_8 / 8!
        1.0 / 47_900_160.0,   // B_10 / 10!
    ];
    if k < EXACT.len() {
        return EXACT[k];
    }
    let two_k = 2 * k as i32;
    // m^{-2k} < 1e-19 once m exceeds 10^{19/(2k)}.
    let cutoff = 10f64.powf(19.0 / two_k as f64).ceil() as u64 + 1;
    let mut zeta = 0.0f64;
    for m in (1..=cutoff).rev() {
        zeta += (m as f64).powi(-two_k);
    }
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    sign * 2.0 * zeta / TAU.powi(two_k)
}

/// q(x) = |p(ix) - 1| for x in (0, 2 pi).
///
/// Evaluates the defining expression directly: a stabilized closed form for
/// large x and the complex Taylor series of p(ix) - 1 for small x, where the
/// naive radicand cancels catastrophically (and can even go negative in
/// floating point).
pub fn q_bound(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < TAU) {
        return Err(LieError::OutOfDomain {
            value: x,
            lo: 0.0,
            hi: TAU,
        });
    }
    if x <= 1.0 {
        // p(ix) - 1 = ix/2 + sum_k c_{2k} (ix)^{2k}; the constant term drops
        // out symbolically so there is no cancellation at small x.
        let im = 0.5 * x;
        let mut re = 0.0f64;
        let x2 = x * x;
        let mut pow = 1.0f64;
        for k in 1..40 {
            pow *= x2;
            let term = p_even_coeff(k) * pow * if k % 2 == 1 { -1.0 } else { 1.0 };
            re += term;
            if term.abs() < 1e-18 {
                break;
            }
        }
        Ok(re.hypot(im))
    } else {
        // q^2 = (2 - 2 cos x + x^2 - 2 x sin x) / (2 (1 - cos x)) with
        // 1 - cos x = 2 sin^2(x/2).
        let one_minus_cos = 2.0 * (0.5 * x).sin().powi(2);
        let num = 2.0 * one_minus_cos + x * x - 2.0 * x * x.sin();
        Ok((num / (2.0 * one_minus_cos)).sqrt())
    }
}

/// Evaluate |p(ix) - 1| by direct complex arithmetic; independent route used
/// as an oracle for `q_bound`.
pub fn q_complex_eval(x: f64) -> f64 {
    // 1 - exp(-ix) = (1 - cos x) + i sin x, with 1 - cos x = 2 sin^2(x/2).
    let den_re = 2.0 * (0.5 * x).sin().powi(2);
    let den_im = x.sin();
    let den_sq = den_re * den_re + den_im * den_im;
    // p(ix) = ix * conj(den) / |den|^2.
    let p_re = x * den_im / den_sq;
    let p_im = x * den_re / den_sq;
    (p_re - 1.0).hypot(p_im)
}

/// Lower-bound estimate of A = max_{|X|=1} |ad_X|_op by sampling random unit
/// X and running power iteration on -ad_X^2. Deterministic given the seed and
/// monotone nondecreasing in `samples`.
pub fn estimate_ad_norm(n: usize, samples: usize, seed: u64) -> f64 {
    let mut best = 0.0f64;
    for i in 0..samples {
        let mut rng = derive_rng(seed, i as u64);
        let x = rand_unit_algebra(n, &mut rng);
        let mut y = rand_unit_algebra(n, &mut rng);
        let mut lambda = 0.0f64;
        for _ in 0..60 {
            // z = -[X, [X, y]] is the PSD square of ad_X.
            let z = x.commutator(&x.commutator(&y)).scale(-1.0);
            let zn = z.norm();
            if zn < 1e-300 {
                lambda = 0.0;
                break;
            }
            lambda = z.dot(&y);
            y = z.scale(1.0 / zn);
        }
        best = best.max(lambda.max(0.0).sqrt());
    }
    best
}

/// Apply the logarithm differential `p(ad_{log g})` to `xi`.
///
/// The operator series is truncated with a certified geometric tail bound
/// below 1e-13 relative; inputs whose `ad_{log g}` operator norm reaches
/// 2*pi - 1e-3 are refused instead of silently diverging.
pub fn dlog_apply(
    g: &GroupElement,
    xi: &AlgebraElement,
    tol: &Tolerances,
) -> Result<AlgebraElement> {
    if g.dim() != xi.dim() {
        return Err(LieError::DimensionMismatch(g.dim(), xi.dim()));
    }
    let log = linalg::so_log(g.mat(), tol.cut)?;
    if log.ad_opnorm >= TAU - SERIES_GUARD {
        return Err(LieError::SeriesDivergence {
            norm: log.ad_opnorm,
        });
    }
    let x = AlgebraElement::from_skew_unchecked(log.skew);
    let rho = (log.ad_opnorm / TAU).min(1.0 - 1e-9);
    let xi_norm = xi.norm().max(1e-300);

    // result = xi + 1/2 [X, xi] + sum_k c_{2k} ad^{2k} xi
    let mut w = x.commutator(xi);
    let mut acc = xi + &w.scale(0.5);
    let mut order = 1usize;
    loop {
        w = x.commutator(&w);
        order += 1;
        if order % 2 == 0 {
            let k = order / 2;
            acc = &acc + &w.scale(p_even_coeff(k));
            // Tail of sum_{j>k} |c_{2j}| r^{2j} <= 3.3 rho^{2k+2} / (1 - rho^2).
            let tail = 3.3 * rho.powi(2 * k as i32 + 2) / (1.0 - rho * rho);
            if order >= 20 && tail * xi_norm < 1e-13 * xi_norm {
                break;
            }
        }
        if order > 400_000 {
            return Err(LieError::SeriesDivergence {
                norm: log.ad_opnorm,
            });
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{geodesic_distance, group_exp, inner};
    use std::f64::consts::PI;
    use crate::rng::rand_algebra;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn p_even_coefficients_match_zeta_route() {
        // The exact Bernoulli constants agree with the zeta formula.
        for k in 1..=5usize {
            let two_k = 2 * k as i32;
            let mut zeta = 0.0f64;
            for m in (1..=2_000_000u64).rev() {
                zeta += (m as f64).powi(-two_k);
            }
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            let via_zeta = sign * 2.0 * zeta / TAU.powi(two_k);
            let exact = p_even_coeff(k);
            assert!(
                ((via_zeta - exact) / exact).abs() < 1e-6,
                "k = {k}: {via_zeta} vs {exact}"
            );
        }
        // Continuity across the exact/zeta switch: B_12/12! = -691/(2730 * 12!).
        let c12 = -691.0 / (2730.0 * 479_001_600.0);
        assert!(((p_even_coeff(6) - c12) / c12).abs() < 1e-14);
    }

    #[test]
    fn p_series_values() {
        assert_eq!(p_series(0.0), 1.0);
        assert!((p_series(1.0) - 1.5819767068693265).abs() < 1e-14);
        assert!((p_series(PI) - 3.2834849017545444).abs() < 1e-13);
        // Both branches agree at the switch point.
        let x = 1e-4;
        let series = 1.0 + 0.5 * x + x * x / 12.0;
        assert!((p_series(x) - series).abs() < 1e-15);
    }

    #[test]
    fn q_small_x_asymptote() {
        let q = q_bound(1e-6).unwrap();
        assert!((q - 5e-7).abs() < 1e-12, "q(1e-6) = {q:e}");
    }

    #[test]
    fn q_matches_complex_eval_on_grid() {
        for i in 0..1000 {
            let x = 0.01 + (TAU - 0.02) * (i as f64) / 999.0;
            let a = q_bound(x).unwrap();
            let b = q_complex_eval(x);
            assert!((a - b).abs() < 1e-12, "q mismatch at x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn q_at_half_pi_from_oracle() {
        let q = q_bound(PI / 2.0).unwrap();
        let oracle = q_complex_eval(PI / 2.0);
        assert!((q - oracle).abs() < 1e-13);
        // Direct radicand: (2 + pi^2/4 - pi) / 2.
        let expected = ((2.0 + PI * PI / 4.0 - PI) / 2.0).sqrt();
        assert!((q - expected).abs() < 1e-13);
    }

    #[test]
    fn q_rejects_out_of_domain() {
        assert!(q_bound(0.0).is_err());
        assert!(q_bound(-1.0).is_err());
        assert!(q_bound(TAU).is_err());
    }

    #[test]
    fn ad_norm_so3_is_inverse_sqrt_two() {
        let a = estimate_ad_norm(3, 200, 1);
        assert!(
            (a - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-3,
            "estimate {a}"
        );
    }

    #[test]
    fn ad_norm_so2_vanishes() {
        assert_eq!(estimate_ad_norm(2, 50, 1), 0.0);
    }

    #[test]
    fn ad_norm_monotone_in_samples() {
        let mut prev = 0.0;
        for s in 1..10 {
            let a = estimate_ad_norm(4, s, 9);
            assert!(a >= prev);
            prev = a;
        }
    }

    #[test]
    fn dlog_identity_at_group_identity() {
        let g = GroupElement::identity(4);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let xi = rand_algebra(4, 1.0, &mut rng);
        let out = dlog_apply(&g, &xi, &Tolerances::default()).unwrap();
        assert!((&out - &xi).norm() < 1e-14);
    }

    #[test]
    fn dlog_pairing_with_log_is_metric_pairing() {
        // <dlog_g(xi), log g> = <log g, xi> on random samples.
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let x = rand_algebra(5, 0.4, &mut rng);
            let g = group_exp(&x);
            let xi = rand_algebra(5, 1.0, &mut rng);
            let log_g = g.log(&tol).unwrap();
            let d = dlog_apply(&g, &xi, &tol).unwrap();
            let lhs = inner(&d, &log_g).unwrap();
            let rhs = inner(&log_g, &xi).unwrap();
            assert!((lhs - rhs).abs() < 1e-10, "pairing defect {:e}", lhs - rhs);
        }
    }

    #[test]
    fn dlog_quadratic_form_bounded_by_norm() {
        // <dlog_g(xi), xi> <= |xi|^2.
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let g = group_exp(&rand_algebra(4, 0.6, &mut rng));
            let xi = rand_algebra(4, 1.0, &mut rng);
            let d = dlog_apply(&g, &xi, &tol).unwrap();
            let quad = inner(&d, &xi).unwrap();
            assert!(quad <= xi.norm_squared() + 1e-10);
        }
    }

    #[test]
    fn dlog_deviation_bounded_by_q() {
        // |dlog_g - Id|_op <= q(a) whenever d(g, e) <= a / A.
        let tol = Tolerances::default();
        let a = 2.0;
        let big_a = 1.0; // exact for so(4)
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let q_a = q_bound(a).unwrap();
        for _ in 0..50 {
            let radius = 0.95 * a / big_a;
            let g = group_exp(&rand_unit_algebra(4, &mut rng).scale(radius));
            let dist = geodesic_distance(&GroupElement::identity(4), &g, &tol).unwrap();
            assert!(dist <= a / big_a + 1e-9);
            let xi = rand_unit_algebra(4, &mut rng);
            let d = dlog_apply(&g, &xi, &tol).unwrap();
            let dev = (&d - &xi).norm();
            assert!(dev <= q_a + 1e-10, "deviation {dev} vs q(a) {q_a}");
        }
    }

    #[test]
    fn dlog_matches_finite_differences() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..20 {
            let g = group_exp(&rand_algebra(4, 0.5, &mut rng));
            let xi = rand_algebra(4, 1.0, &mut rng);
            let t = 1e-6;
            let moved = g.compose(&group_exp(&xi.scale(t)));
            let fd = (&moved.log(&tol).unwrap() - &g.log(&tol).unwrap()).scale(1.0 / t);
            let d = dlog_apply(&g, &xi, &tol).unwrap();
            let rel = (&fd - &d).norm() / d.norm().max(1e-12);
            assert!(rel < 1e-4, "relative defect {rel:e}");
        }
    }

    #[test]
    fn dlog_refuses_near_divergence() {
        // Two near-pi rotation planes push |ad_{log g}|_op toward 2 pi, but the
        // branch-cut check fires first; build the refusal directly instead.
        let theta = PI - 1e-4;
        let mut m = nalgebra::DMatrix::<f64>::zeros(4, 4);
        m[(0, 1)] = -theta;
        m[(1, 0)] = theta;
        m[(2, 3)] = -theta;
        m[(3, 2)] = theta;
        let xi = AlgebraElement::new(m).unwrap();
        let g = group_exp(&xi);
        let tol = Tolerances::default();
        match dlog_apply(&g, &xi, &tol) {
            Err(LieError::SeriesDivergence { norm }) => {
                assert!(norm >= TAU - 1e-3);
            }
            Err(LieError::AngleAtCut { .. }) => {
                // Acceptable alternative: the log itself is already ambiguous.
            }
            other => panic!("expected divergence refusal, got {other:?}"),
        }
    }
}
