//! Objectives on SO(n): the generic potential contract, the Brockett
//! eigendecomposition potential trace(X^T B X N) with N = diag(1..n), and
//! Haar-uniform rotation sampling.
//!
//! With N ascending, the global minimum of the trace pairs the largest
//! eigenvalue of B with the smallest N weight: the minimizer is the
//! eigenvector matrix with its columns in reverse order. The Hessian spectrum
//! at that minimizer is exactly { (j - i)(lambda_j - lambda_i) : i < j }, so
//! the condition number at the minimum of the designed spectrum equals the
//! requested kappa.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{LieError, Result};
use crate::group::{AlgebraElement, GroupElement, Tolerances};
use crate::rng::{derive_rng, rand_gaussian_matrix};

/// An evaluable objective on SO(n) with a left-trivialized gradient oracle.
///
/// The gradient convention is fixed by the metric trace(X^T Y):
/// d/dt U(g exp(t xi)) at t = 0 equals `<trivialized_grad(g), xi>`.
pub trait Potential: Sync + Send {
    fn dim(&self) -> usize;

    fn value(&self, g: &GroupElement) -> f64;

    fn trivialized_grad(&self, g: &GroupElement) -> AlgebraElement;

    /// Gradient formula extended smoothly off the manifold, used by the
    /// reference ODE integrator between projections.
    fn trivialized_grad_raw(&self, mat: &DMatrix<f64>) -> DMatrix<f64> {
        let g = GroupElement::from_matrix_unchecked(crate::linalg::polar_project(mat));
        self.trivialized_grad(&g).mat().clone()
    }

    fn known_minimizer(&self) -> Option<GroupElement> {
        None
    }

    fn known_min_value(&self) -> Option<f64> {
        None
    }

    /// U(g) - U(g_*) evaluated without catastrophic cancellation, when the
    /// potential knows how. Near machine-precision convergence the naive
    /// difference of two O(|B|) values loses every significant digit, which
    /// would swamp per-step contraction ratios.
    fn suboptimality(&self, g: &GroupElement) -> Option<f64> {
        let _ = g;
        None
    }

    /// Local (L, mu) estimate at the minimizer, when available.
    fn smoothness_estimate(&self) -> Option<(f64, f64)> {
        None
    }
}

/// Designed eigenvalue ladder diag(0, 1, ..., n-2, kappa/(n-1)).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpectrumSpec {
    pub n: usize,
    pub kappa: f64,
}

impl SpectrumSpec {
    pub fn new(n: usize, kappa: f64) -> Result<Self> {
        if n < 2 {
            return Err(LieError::InvalidParameter(format!(
                "spectrum needs n >= 2, got {n}"
            )));
        }
        let floor = ((n - 1) * (n - 2)) as f64;
        if kappa < floor {
            return Err(LieError::InvalidParameter(format!(
                "kappa = {kappa} below validity floor (n-1)(n-2) = {floor}"
            )));
        }
        Ok(SpectrumSpec { n, kappa })
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut lambda: Vec<f64> = (0..self.n - 1).map(|i| i as f64).collect();
        lambda.push(self.kappa / (self.n - 1) as f64);
        lambda
    }
}

/// Smoothness and convexity constants estimated from the Hessian spectrum at
/// the global minimum.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SmoothnessEstimate {
    pub l: f64,
    pub mu: f64,
    pub kappa: f64,
}

/// L = (n-1)(lambda_n - lambda_1), mu = min adjacent gap; errors when the
/// spectrum is degenerate (mu = 0 would make kappa infinite downstream).
pub fn smoothness_from_eigenvalues(lambda: &[f64]) -> Result<SmoothnessEstimate> {
    let n = lambda.len();
    if n < 2 {
        return Err(LieError::InvalidParameter(
            "need at least two eigenvalues".into(),
        ));
    }
    let scale = lambda.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    let l = (n - 1) as f64 * (lambda[n - 1] - lambda[0]);
    let mut mu = f64::INFINITY;
    for w in lambda.windows(2) {
        let gap = w[1] - w[0];
        if gap <= 1e-12 * scale {
            return Err(LieError::DegenerateSpectrum { gap });
        }
        mu = mu.min(gap);
    }
    Ok(SmoothnessEstimate {
        l,
        mu,
        kappa: l / mu,
    })
}

/// Convenience wrapper: (L, mu, kappa) for a designed spectrum.
pub fn estimate_l_mu(spec: &SpectrumSpec) -> Result<SmoothnessEstimate> {
    smoothness_from_eigenvalues(&spec.eigenvalues())
}

/// The Brockett potential U(X) = trace(X^T B X N) with N = diag(1, ..., n).
#[derive(Debug, Clone)]
pub struct BrockettPotential {
    b: DMatrix<f64>,
    /// Ascending eigenvalues of B.
    lambda: Vec<f64>,
    /// Eigenvector matrix, columns ascending: B = R Lambda R^T.
    r: DMatrix<f64>,
    minimizer: GroupElement,
    min_value: f64,
}

impl BrockettPotential {
    /// Build from a designed spectrum with a Haar-random eigenbasis.
    pub fn from_spectrum(spec: &SpectrumSpec, seed: u64) -> Result<Self> {
        let n = spec.n;
        let lambda = spec.eigenvalues();
        let r = sample_haar_rotation(n, seed);
        let mut b = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            let col = r.mat().column(k);
            for i in 0..n {
                for j in 0..n {
                    b[(i, j)] += lambda[k] * col[i] * col[j];
                }
            }
        }
        let b = (&b + b.transpose()) * 0.5;
        Self::assemble(b, lambda, r.mat().clone())
    }

    /// Build from an explicit symmetric matrix.
    pub fn from_matrix(b: DMatrix<f64>) -> Result<Self> {
        let n = b.nrows();
        if n != b.ncols() {
            return Err(LieError::DimensionMismatch(n, b.ncols()));
        }
        let asym = (&b - b.transpose()).norm();
        if asym > 1e-12 * (1.0 + b.norm()) {
            return Err(LieError::InvalidParameter(format!(
                "B is not symmetric (defect {asym:.3e})"
            )));
        }
        let b = (&b + b.transpose()) * 0.5;
        let eig = nalgebra::SymmetricEigen::new(b.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
        let lambda: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut r = DMatrix::<f64>::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            r.set_column(dst, &eig.eigenvectors.column(src));
        }
        if r.determinant() < 0.0 {
            let neg = -r.column(0).clone_owned();
            r.set_column(0, &neg);
        }
        Self::assemble(b, lambda, r)
    }

    fn assemble(b: DMatrix<f64>, lambda: Vec<f64>, r: DMatrix<f64>) -> Result<Self> {
        let n = lambda.len();
        // Global minimizer: eigenvector columns in reverse order, one sign
        // flipped if needed to stay in SO(n).
        let mut x_min = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            x_min.set_column(j, &r.column(n - 1 - j));
        }
        if x_min.determinant() < 0.0 {
            let neg = -x_min.column(0).clone_owned();
            x_min.set_column(0, &neg);
        }
        let minimizer = GroupElement::new(x_min, &Tolerances::default())?;
        let min_value: f64 = (0..n).map(|j| (j + 1) as f64 * lambda[n - 1 - j]).sum();
        Ok(BrockettPotential {
            b,
            lambda,
            r,
            minimizer,
            min_value,
        })
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.lambda
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.r
    }

    /// The maximizing stationary point: eigenvector columns in ascending
    /// order (identity permutation), sign-fixed onto SO(n).
    pub fn known_maximizer(&self) -> Option<GroupElement> {
        let mut x = self.r.clone();
        if x.determinant() < 0.0 {
            let neg = -x.column(0).clone_owned();
            x.set_column(0, &neg);
        }
        GroupElement::new(x, &Tolerances::default()).ok()
    }

    /// Certified global bound on the geodesic Lipschitz constant of the
    /// trivialized gradient: 4 |B|_2 |N|_2.
    pub fn global_smoothness_bound(&self) -> f64 {
        let bnorm = self.lambda.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        4.0 * bnorm * self.dim() as f64
    }

    /// Local smoothness constants from the Hessian spectrum at the minimum.
    pub fn local_smoothness(&self) -> Result<SmoothnessEstimate> {
        smoothness_from_eigenvalues(&self.lambda)
    }

    fn value_of_matrix(&self, x: &DMatrix<f64>) -> f64 {
        let bx = &self.b * x;
        let mut acc = 0.0;
        for j in 0..x.ncols() {
            acc += (j + 1) as f64 * x.column(j).dot(&bx.column(j));
        }
        acc
    }

    fn grad_of_matrix(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let n = x.nrows();
        let m = x.transpose() * (&self.b * x);
        let m = (&m + m.transpose()) * 0.5;
        // [M, N] with N = diag(1..n) has entries M_ij (j - i); exactly skew.
        DMatrix::from_fn(n, n, |i, j| m[(i, j)] * (j as f64 - i as f64))
    }
}

impl Potential for BrockettPotential {
    fn dim(&self) -> usize {
        self.lambda.len()
    }

    fn value(&self, g: &GroupElement) -> f64 {
        self.value_of_matrix(g.mat())
    }

    fn trivialized_grad(&self, g: &GroupElement) -> AlgebraElement {
        AlgebraElement::from_skew_unchecked(self.grad_of_matrix(g.mat()))
    }

    fn trivialized_grad_raw(&self, mat: &DMatrix<f64>) -> DMatrix<f64> {
        self.grad_of_matrix(mat)
    }

    fn known_minimizer(&self) -> Option<GroupElement> {
        Some(self.minimizer.clone())
    }

    fn known_min_value(&self) -> Option<f64> {
        Some(self.min_value)
    }

    fn suboptimality(&self, g: &GroupElement) -> Option<f64> {
        // In the eigenbasis Y = R^T X with column targets lambda_{n-1-j},
        //   U(X) - U_* = sum_j (j+1) sum_i (lambda_i - lambda_{n-1-j}) Y_ij^2,
        // a sum of terms that each vanish at the minimizer, so the result is
        // accurate relative to itself instead of relative to |B|.
        let n = self.dim();
        let y = self.r.transpose() * g.mat();
        let mut acc = 0.0;
        for j in 0..n {
            let target = self.lambda[n - 1 - j];
            let w = (j + 1) as f64;
            let mut col = 0.0;
            for i in 0..n {
                let yij = y[(i, j)];
                col += (self.lambda[i] - target) * yij * yij;
            }
            acc += w * col;
        }
        Some(acc)
    }

    fn smoothness_estimate(&self) -> Option<(f64, f64)> {
        self.local_smoothness().ok().map(|s| (s.l, s.mu))
    }
}

/// Hessian eigenvalue formula sigma_ij = (j - i)(lambda_pi(j) - lambda_pi(i))
/// for 1 <= i < j <= n at the stationary point whose columns are permuted by
/// `pi` (0-based permutation of 0..n). Returned in lexicographic (i, j) order.
///
/// All values are positive exactly when pi is the reversal permutation, i.e.
/// at the global minimizer the Hessian spectrum is the sigma set of the
/// identity permutation.
pub fn hessian_spectrum(lambda: &[f64], pi: &[usize]) -> Result<Vec<f64>> {
    let n = lambda.len();
    if pi.len() != n {
        return Err(LieError::InvalidParameter(format!(
            "permutation length {} does not match dimension {n}",
            pi.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in pi {
        if p >= n || seen[p] {
            return Err(LieError::InvalidParameter(
                "not a permutation of 0..n".into(),
            ));
        }
        seen[p] = true;
    }
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            out.push((j - i) as f64 * (lambda[pi[j]] - lambda[pi[i]]));
        }
    }
    Ok(out)
}

/// Haar-uniform sample from SO(n): QR of a Gaussian matrix with the R-diagonal
/// sign correction, then a column flip onto the det = +1 component.
pub fn sample_haar_rotation(n: usize, seed: u64) -> GroupElement {
    let mut rng = derive_rng(seed, 0x48_41_41_52);
    let gauss = rand_gaussian_matrix(n, &mut rng);
    let qr = gauss.qr();
    let r_diag: Vec<f64> = (0..n).map(|i| qr.r()[(i, i)]).collect();
    let mut q = qr.q();
    for (j, d) in r_diag.iter().enumerate() {
        if *d < 0.0 {
            let neg = -q.column(j).clone_owned();
            q.set_column(j, &neg);
        }
    }
    if q.determinant() < 0.0 {
        let neg = -q.column(n - 1).clone_owned();
        q.set_column(n - 1, &neg);
    }
    GroupElement::from_matrix_unchecked(q)
}

/// Serializable potential description: a designed spectrum or an explicit
/// symmetric matrix in row-major order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialSpec {
    Spectrum { n: usize, kappa: f64, seed: u64 },
    Explicit { n: usize, b: Vec<f64> },
}

impl PotentialSpec {
    pub fn build(&self) -> Result<BrockettPotential> {
        match self {
            PotentialSpec::Spectrum { n, kappa, seed } => {
                let spec = SpectrumSpec::new(*n, *kappa)?;
                BrockettPotential::from_spectrum(&spec, *seed)
            }
            PotentialSpec::Explicit { n, b } => {
                if b.len() != n * n {
                    return Err(LieError::InvalidParameter(format!(
                        "explicit B needs {} entries, got {}",
                        n * n,
                        b.len()
                    )));
                }
                BrockettPotential::from_matrix(DMatrix::from_row_slice(*n, *n, b))
            }
        }
    }
}

/// One stationary point of the Brockett potential: a signed permutation of
/// the eigenvector columns.
#[derive(Debug, Clone)]
pub struct StationaryPoint {
    /// Column j of the stationary point carries eigenvector pi[j].
    pub pi: Vec<usize>,
    pub signs: Vec<i8>,
    pub value: f64,
    pub grad_norm: f64,
    /// Number of negative Hessian eigenvalues (0 = local minimum).
    pub morse_index: usize,
}

/// Brute-force census over all 2^n n! signed permutation matrices with
/// det = +1 applied to the eigenbasis. Intended for n <= 5.
pub fn stationary_census(pot: &BrockettPotential) -> Vec<StationaryPoint> {
    let n = pot.dim();
    assert!(n <= 5, "census is exponential; use n <= 5");
    let lambda = pot.eigenvalues();
    let mut out = Vec::new();
    let mut pi: Vec<usize> = (0..n).collect();
    permute_all(&mut pi, 0, &mut |perm: &[usize]| {
        for mask in 0u32..(1 << n) {
            let signs: Vec<i8> = (0..n)
                .map(|j| if mask >> j & 1 == 1 { -1 } else { 1 })
                .collect();
            let mut x = DMatrix::<f64>::zeros(n, n);
            for j in 0..n {
                let col = pot.eigenvectors().column(perm[j]) * signs[j] as f64;
                x.set_column(j, &col);
            }
            if x.determinant() < 0.0 {
                continue;
            }
            let g = GroupElement::from_matrix_unchecked(x);
            let value = pot.value(&g);
            let grad_norm = pot.trivialized_grad(&g).norm();
            let mut morse_index = 0;
            for a in 0..n {
                for b in (a + 1)..n {
                    // Hessian along the (a, b) plane at this stationary point.
                    let h = (b - a) as f64 * (lambda[perm[a]] - lambda[perm[b]]);
                    if h < 0.0 {
                        morse_index += 1;
                    }
                }
            }
            out.push(StationaryPoint {
                pi: perm.to_vec(),
                signs,
                value,
                grad_norm,
                morse_index,
            });
        }
    });
    out
}

fn permute_all(items: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute_all(items, k + 1, visit);
        items.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{geodesic_distance, group_exp, group_log};
    use crate::rng::{rand_algebra, rand_unit_algebra};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag_potential(lambda: &[f64]) -> BrockettPotential {
        let n = lambda.len();
        let mut b = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            b[(i, i)] = lambda[i];
        }
        BrockettPotential::from_matrix(b).unwrap()
    }

    #[test]
    fn value_at_identity_with_diagonal_b() {
        let pot = diag_potential(&[0.0, 1.0, 2.0]);
        let v = pot.value(&GroupElement::identity(3));
        // sum of i * lambda_i with 1-based indices
        assert!((v - (1.0 * 0.0 + 2.0 * 1.0 + 3.0 * 2.0)).abs() < 1e-14);
    }

    #[test]
    fn value_two_kappa_at_identity_n2() {
        let kappa = 7.5;
        let pot = diag_potential(&[0.0, kappa]);
        let v = pot.value(&GroupElement::identity(2));
        assert!((v - 2.0 * kappa).abs() < 1e-12);
    }

    #[test]
    fn gradient_vanishes_at_eigenbasis() {
        let spec = SpectrumSpec::new(4, 50.0).unwrap();
        let pot = BrockettPotential::from_spectrum(&spec, 3).unwrap();
        let mut r = pot.eigenvectors().clone();
        if r.determinant() < 0.0 {
            let neg = -r.column(0).clone_owned();
            r.set_column(0, &neg);
        }
        let g = GroupElement::new(r, &Tolerances::default()).unwrap();
        assert!(pot.trivialized_grad(&g).norm() < 1e-12);
    }

    #[test]
    fn gradient_matches_directional_derivative() {
        let spec = SpectrumSpec::new(5, 40.0).unwrap();
        let pot = BrockettPotential::from_spectrum(&spec, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let g = sample_haar_rotation(5, rng.random());
            let grad = pot.trivialized_grad(&g);
            for _ in 0..20 {
                let xi = rand_unit_algebra(5, &mut rng);
                let t = 1e-6;
                let plus = pot.value(&g.compose(&group_exp(&xi.scale(t))));
                let minus = pot.value(&g.compose(&group_exp(&xi.scale(-t))));
                let fd = (plus - minus) / (2.0 * t);
                let an = grad.dot(&xi);
                let denom = an.abs().max(1.0);
                assert!(
                    ((fd - an) / denom).abs() < 1e-5,
                    "directional derivative mismatch: fd {fd} vs analytic {an}"
                );
            }
        }
    }

    #[test]
    fn gradient_magnitude_closed_form_n2() {
        // B = diag(0, 1): gradient at rotation by theta has entries
        // +/- sin(2 theta) / 2.
        let pot = diag_potential(&[0.0, 1.0]);
        for theta in [0.3f64, 1.1, 2.4] {
            let g = GroupElement::new(
                DMatrix::from_row_slice(
                    2,
                    2,
                    &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()],
                ),
                &Tolerances::default(),
            )
            .unwrap();
            let grad = pot.trivialized_grad(&g);
            let entry = grad.mat()[(0, 1)].abs();
            assert!(
                (entry - (2.0 * theta).sin().abs() / 2.0).abs() < 1e-12,
                "entry {entry} at theta {theta}"
            );
        }
    }

    #[test]
    fn hessian_spectrum_examples() {
        // n = 3, lambda = (0, 1, 2), identity permutation.
        let sigma = hessian_spectrum(&[0.0, 1.0, 2.0], &[0, 1, 2]).unwrap();
        assert_eq!(sigma, vec![1.0, 4.0, 1.0]);

        // n = 2 swap: negative signature.
        let sigma = hessian_spectrum(&[0.0, 3.0], &[1, 0]).unwrap();
        assert_eq!(sigma, vec![-3.0]);

        assert!(hessian_spectrum(&[0.0, 1.0], &[0, 0]).is_err());
    }

    #[test]
    fn hessian_spectrum_matches_finite_differences_at_minimizer() {
        let spec = SpectrumSpec::new(10, 1e4).unwrap();
        let pot = BrockettPotential::from_spectrum(&spec, 11).unwrap();
        let sigma = hessian_spectrum(pot.eigenvalues(), &(0..10).collect::<Vec<_>>()).unwrap();
        let min_sigma = sigma.iter().cloned().fold(f64::INFINITY, f64::min);
        let max_sigma = sigma.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!((min_sigma - 1.0).abs() < 1e-9);
        assert!((max_sigma - 1e4).abs() < 1e-6);

        // Central second differences of U along the coordinate planes of the
        // minimizer reproduce the sigma set.
        let g_star = pot.known_minimizer().unwrap();
        let u_star = pot.value(&g_star);
        let h = 1e-4;
        let mut fd = Vec::new();
        for a in 0..10usize {
            for b in (a + 1)..10 {
                let mut m = DMatrix::<f64>::zeros(10, 10);
                // unit-norm direction in the (a, b) plane
                let inv = 1.0 / std::f64::consts::SQRT_2;
                m[(a, b)] = -inv;
                m[(b, a)] = inv;
                let xi = AlgebraElement::new(m).unwrap();
                let plus = pot.value(&g_star.compose(&group_exp(&xi.scale(h))));
                let minus = pot.value(&g_star.compose(&group_exp(&xi.scale(-h))));
                fd.push((plus + minus - 2.0 * u_star) / (h * h));
            }
        }
        let mut sigma_sorted = sigma.clone();
        sigma_sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
        fd.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (s, f) in sigma_sorted.iter().zip(fd.iter()) {
            assert!(
                (s - f).abs() / s.abs().max(1.0) < 1e-4,
                "sigma {s} vs finite difference {f}"
            );
        }
    }

    #[test]
    fn smoothness_estimates() {
        let spec = SpectrumSpec::new(10, 1e4).unwrap();
        let est = estimate_l_mu(&spec).unwrap();
        assert!((est.l - 1e4).abs() < 1e-9);
        assert!((est.mu - 1.0).abs() < 1e-12);
        assert!((est.kappa - 1e4).abs() < 1e-6);

        let est = smoothness_from_eigenvalues(&[0.0, 5.0]).unwrap();
        assert_eq!(est.l, 5.0);
        assert_eq!(est.mu, 5.0);
        assert_eq!(est.kappa, 1.0);

        assert!(matches!(
            smoothness_from_eigenvalues(&[0.0, 1.0, 1.0]),
            Err(LieError::DegenerateSpectrum { .. })
        ));
    }

    #[test]
    fn haar_sample_is_group_element() {
        for seed in 0..20 {
            let g = sample_haar_rotation(6, seed);
            assert!(g.orthogonality_defect() < 1e-13);
            assert!((g.mat().determinant() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn haar_angle_uniform_on_so2() {
        // Kolmogorov-Smirnov distance of sampled angles against the uniform
        // law on (-pi, pi].
        let n_samples = 10_000;
        let mut angles: Vec<f64> = (0..n_samples)
            .map(|s| {
                let g = sample_haar_rotation(2, s as u64);
                g.mat()[(1, 0)].atan2(g.mat()[(0, 0)])
            })
            .collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut ks = 0.0f64;
        for (i, th) in angles.iter().enumerate() {
            let cdf = (th + std::f64::consts::PI) / (2.0 * std::f64::consts::PI);
            let emp_hi = (i + 1) as f64 / n_samples as f64;
            let emp_lo = i as f64 / n_samples as f64;
            ks = ks.max((cdf - emp_lo).abs()).max((emp_hi - cdf).abs());
        }
        assert!(ks < 0.02, "KS statistic {ks}");
    }

    #[test]
    fn haar_mean_is_zero() {
        let n_samples = 10_000;
        let mut mean = DMatrix::<f64>::zeros(3, 3);
        for s in 0..n_samples {
            mean += sample_haar_rotation(3, 1_000_000 + s as u64).mat();
        }
        mean /= n_samples as f64;
        let bound = 3.0 / (n_samples as f64).sqrt();
        for v in mean.iter() {
            assert!(v.abs() < bound, "mean entry {v} vs bound {bound}");
        }
    }

    #[test]
    fn census_confirms_stationarity_and_extremes() {
        for n in [2usize, 3] {
            let spec = SpectrumSpec::new(n, ((n - 1) * (n - 1)) as f64 + 3.0).unwrap();
            let pot = BrockettPotential::from_spectrum(&spec, 7).unwrap();
            let census = stationary_census(&pot);
            assert_eq!(census.len(), (1usize << n) * factorial(n) / 2);
            let min_val = pot.known_min_value().unwrap();
            for pt in &census {
                assert!(pt.grad_norm < 1e-10, "gradient norm {}", pt.grad_norm);
                assert!(pt.value >= min_val - 1e-9);
                // Morse index 0 exactly at the reversal permutation.
                let reversed: Vec<usize> = (0..n).rev().collect();
                if pt.pi == reversed {
                    assert_eq!(pt.morse_index, 0);
                    assert!((pt.value - min_val).abs() < 1e-9);
                }
                // Identity permutation is the global maximum.
                let id: Vec<usize> = (0..n).collect();
                if pt.pi == id {
                    assert_eq!(pt.morse_index, n * (n - 1) / 2);
                }
            }
        }
    }

    #[test]
    fn potential_spec_json_roundtrip() {
        let spec = PotentialSpec::Spectrum {
            n: 4,
            kappa: 100.0,
            seed: 9,
        };
        let json = serde_json::to_string(&spec).unwrap();
        let back: PotentialSpec = serde_json::from_str(&json).unwrap();
        let a = spec.build().unwrap();
        let b = back.build().unwrap();
        assert_eq!(a.b(), b.b());

        let explicit = PotentialSpec::Explicit {
            n: 2,
            b: vec![0.0, 0.0, 0.0, 1.0],
        };
        let pot = explicit.build().unwrap();
        assert!((pot.value(&GroupElement::identity(2)) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn local_smoothness_bounds_hold_empirically() {
        let spec = SpectrumSpec::new(6, 200.0).unwrap();
        let pot = BrockettPotential::from_spectrum(&spec, 13).unwrap();
        let est = pot.local_smoothness().unwrap();
        let g_star = pot.known_minimizer().unwrap();
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(31);

        // L-smoothness on a radius-0.1 ball.
        for _ in 0..1000 {
            let a = g_star.compose(&group_exp(&rand_algebra(6, 0.03, &mut rng)));
            let b = g_star.compose(&group_exp(&rand_algebra(6, 0.03, &mut rng)));
            let d = geodesic_distance(&a, &b, &tol).unwrap();
            if d < 1e-9 {
                continue;
            }
            let diff = (&pot.trivialized_grad(&a) - &pot.trivialized_grad(&b)).norm();
            assert!(diff / d <= 1.05 * est.l, "ratio {} vs L {}", diff / d, est.l);
        }

        // Strong convexity within radius 0.05.
        for _ in 0..1000 {
            let g = g_star.compose(&group_exp(&rand_unit_algebra(6, &mut rng).scale(0.04)));
            let log = group_log(&g_star.inverse().compose(&g), &tol).unwrap();
            let d2 = log.norm_squared();
            let lhs = pot.trivialized_grad(&g).dot(&log);
            assert!(
                lhs >= 0.95 * est.mu * d2,
                "convexity defect: {lhs} vs {}",
                0.95 * est.mu * d2
            );
        }
    }

    fn factorial(n: usize) -> usize {
        (1..=n).product()
    }
}
