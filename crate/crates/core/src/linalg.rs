//! Dense matrix kernels: exponential, principal logarithm on SO(n), polar
//! projection.
//!
//! The exponential uses the scaling-and-squaring method with diagonal Pade
//! approximants of degree 3/5/7/9/13 chosen from the 1-norm of the argument
//! (Higham 2005). The logarithm exploits the real Schur normal form of an
//! orthogonal matrix: 2x2 rotation blocks plus +/-1 entries, so the principal
//! branch reduces to per-block angle extraction.

use nalgebra::DMatrix;

use crate::error::{LieError, Result};

/// Degree thresholds for the graded Pade approximants (Higham 2005, Table 2.3).
const THETA_3: f64 = 1.495_585_217_958_292e-2;
const THETA_5: f64 = 2.539_398_330_063_23e-1;
const THETA_7: f64 = 9.504_178_996_162_932e-1;
const THETA_9: f64 = 2.097_847_961_257_068;
const THETA_13: f64 = 5.371_920_351_148_152;

const PADE_3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE_5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE_7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1_512.0,
    56.0,
    1.0,
];
const PADE_9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3_960.0,
    90.0,
    1.0,
];
const PADE_13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

fn one_norm(a: &DMatrix<f64>) -> f64 {
    let mut best = 0.0_f64;
    for j in 0..a.ncols() {
        let s: f64 = a.column(j).iter().map(|v| v.abs()).sum();
        best = best.max(s);
    }
    best
}

/// Solve (V - U) X = (V + U) for the Pade quotient.
fn pade_quotient(u: DMatrix<f64>, v: DMatrix<f64>) -> DMatrix<f64> {
    let denom = &v - &u;
    let numer = &v + &u;
    denom
        .lu()
        .solve(&numer)
        .expect("Pade denominator is singular; argument norm exceeds the method's scaling bound")
}

fn pade_low_degree(a: &DMatrix<f64>, coeffs: &[f64]) -> DMatrix<f64> {
    let n = a.nrows();
    let a2 = a * a;
    // U = A * (sum of odd coeffs * A^{2k}), V = sum of even coeffs * A^{2k}.
    let half = coeffs.len() / 2;
    let mut u_poly = DMatrix::<f64>::identity(n, n) * coeffs[1];
    let mut v = DMatrix::<f64>::identity(n, n) * coeffs[0];
    let mut pow = a2.clone();
    for k in 1..half {
        u_poly += &pow * coeffs[2 * k + 1];
        v += &pow * coeffs[2 * k];
        if k + 1 < half {
            pow = &pow * &a2;
        }
    }
    pade_quotient(a * u_poly, v)
}

fn pade_13(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let b = &PADE_13;
    let id = DMatrix::<f64>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let u_inner = &a6 * b[13] + &a4 * b[11] + &a2 * b[9];
    let u = a * (&a6 * u_inner + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &id * b[1]);
    let v_inner = &a6 * b[12] + &a4 * b[10] + &a2 * b[8];
    let v = &a6 * v_inner + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &id * b[0];
    pade_quotient(u, v)
}

/// Matrix exponential by scaling and squaring with graded Pade approximants.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let eta = one_norm(a);
    if eta <= THETA_3 {
        return pade_low_degree(a, &PADE_3);
    }
    if eta <= THETA_5 {
        return pade_low_degree(a, &PADE_5);
    }
    if eta <= THETA_7 {
        return pade_low_degree(a, &PADE_7);
    }
    if eta <= THETA_9 {
        return pade_low_degree(a, &PADE_9);
    }
    let s = ((eta / THETA_13).log2().ceil()).max(0.0) as u32;
    let scaled = a * 0.5_f64.powi(s as i32);
    let mut r = pade_13(&scaled);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Principal logarithm of a special orthogonal matrix plus metadata needed by
/// the dlog series.
#[derive(Debug)]
pub struct OrthogonalLog {
    /// Skew-symmetric principal logarithm.
    pub skew: DMatrix<f64>,
    /// Upper bound for the operator norm of `ad_{log g}` on so(n).
    pub ad_opnorm: f64,
    /// Largest rotation angle (absolute value), 0 for the identity.
    pub max_angle: f64,
}

/// Principal log for g in SO(n).
///
/// Near-identity arguments use the Mercator series of log(I + S); everything
/// else goes through the real Schur form. Errors with `AngleAtCut` when a
/// rotation angle is within `tol_cut` of pi.
pub fn so_log(g: &DMatrix<f64>, tol_cut: f64) -> Result<OrthogonalLog> {
    let n = g.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let s = g - &id;
    if s.norm() <= 0.25 {
        let skew = log_series(&s);
        let nf = skew.norm();
        return Ok(OrthogonalLog {
            // 2*spectral <= 2*Frobenius; plenty below the 2*pi radius here.
            ad_opnorm: 2.0 * nf,
            max_angle: nf / std::f64::consts::SQRT_2,
            skew,
        });
    }
    so_log_schur(g, tol_cut)
}

/// Mercator series for log(I + S), symmetrized to exact skew output.
fn log_series(s: &DMatrix<f64>) -> DMatrix<f64> {
    let mut acc = s.clone();
    let mut pow = s.clone();
    let norm0 = s.norm();
    let mut k = 2.0_f64;
    loop {
        pow = &pow * s;
        let term = &pow * (if (k as usize) % 2 == 0 { -1.0 } else { 1.0 } / k);
        acc += &term;
        // Geometric tail bound in Frobenius norm.
        if norm0.powi(k as i32 + 1) / (k + 1.0) < 1e-17 || k > 80.0 {
            break;
        }
        k += 1.0;
    }
    let skew = (&acc - acc.transpose()) * 0.5;
    skew
}

fn so_log_schur(g: &DMatrix<f64>, tol_cut: f64) -> Result<OrthogonalLog> {
    let n = g.nrows();
    let (q, t) = g.clone().schur().unpack();
    let mut k = DMatrix::<f64>::zeros(n, n);
    let mut angles: Vec<f64> = Vec::new();
    let mut minus_ones = 0usize;
    let mut i = 0;
    while i < n {
        let two_by_two = i + 1 < n && t[(i + 1, i)] != 0.0;
        if two_by_two {
            let c = 0.5 * (t[(i, i)] + t[(i + 1, i + 1)]);
            let sn = 0.5 * (t[(i + 1, i)] - t[(i, i + 1)]);
            let theta = sn.atan2(c);
            if theta.abs() >= std::f64::consts::PI - tol_cut {
                return Err(LieError::AngleAtCut {
                    angle: theta.abs(),
                    tol: tol_cut,
                });
            }
            k[(i, i + 1)] = -theta;
            k[(i + 1, i)] = theta;
            angles.push(theta.abs());
            i += 2;
        } else {
            if t[(i, i)] < 0.0 {
                minus_ones += 1;
            }
            i += 1;
        }
    }
    if minus_ones > 0 {
        // det +1 forces -1 eigenvalues to pair up into rotations by exactly pi.
        return Err(LieError::AngleAtCut {
            angle: std::f64::consts::PI,
            tol: tol_cut,
        });
    }
    let x = &q * k * q.transpose();
    let skew = (&x - x.transpose()) * 0.5;
    angles.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let max_angle = angles.first().copied().unwrap_or(0.0);
    let ad_opnorm = match angles.len() {
        0 => 0.0,
        1 => {
            if n >= 3 {
                angles[0]
            } else {
                // so(2) is abelian.
                0.0
            }
        }
        _ => angles[0] + angles[1],
    };
    Ok(OrthogonalLog {
        skew,
        ad_opnorm,
        max_angle,
    })
}

/// Project a near-orthogonal matrix onto the orthogonal group by Newton
/// iteration for the polar factor.
pub fn polar_project(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let mut x = a.clone();
    for _ in 0..20 {
        let inv_t = x
            .clone()
            .lu()
            .try_inverse()
            .expect("polar iteration hit a singular matrix")
            .transpose();
        x = (&x + inv_t) * 0.5;
        let defect = (x.transpose() * &x - &id).norm();
        if defect < 1e-15 {
            break;
        }
    }
    x
}
