//! SO(n) group elements, so(n) algebra elements, and the bi-invariant metric
//! `<X, Y> = trace(X^T Y)` under which `ad` is skew-adjoint.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{LieError, Result};
use crate::linalg;

/// Numerical tolerances for constructor checks and branch-cut detection.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tolerances {
    /// Allowed orthogonality / determinant defect for group elements.
    pub orth: f64,
    /// Distance from pi at which a rotation angle counts as sitting on the
    /// principal-branch cut.
    pub cut: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            orth: 1e-10,
            cut: 1e-8,
        }
    }
}

/// An element of SO(n): an orthogonal matrix with determinant +1.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    mat: DMatrix<f64>,
}

impl GroupElement {
    /// Validating constructor.
    pub fn new(mat: DMatrix<f64>, tol: &Tolerances) -> Result<Self> {
        let n = mat.nrows();
        if n != mat.ncols() {
            return Err(LieError::DimensionMismatch(n, mat.ncols()));
        }
        let defect = (mat.transpose() * &mat - DMatrix::<f64>::identity(n, n)).norm();
        if defect > tol.orth {
            return Err(LieError::NotOrthogonal {
                defect,
                tol: tol.orth,
            });
        }
        let det = mat.determinant();
        if (det - 1.0).abs() > tol.orth.max(1e-8) {
            return Err(LieError::NotSpecial { det });
        }
        Ok(GroupElement { mat })
    }

    /// Constructor for matrices already known to lie on SO(n), e.g. products
    /// of validated elements. Spot-checked when debug assertions are enabled
    /// (full checks would double the cost of every hot-loop step).
    pub(crate) fn from_matrix_unchecked(mat: DMatrix<f64>) -> Self {
        debug_assert!(
            {
                let c0 = mat.column(0);
                let c1 = mat.column(mat.ncols() - 1);
                (c0.norm() - 1.0).abs() < 1e-6 && (mat.ncols() < 2 || c0.dot(&c1).abs() < 1e-6)
            },
            "matrix far from orthogonal"
        );
        GroupElement { mat }
    }

    pub fn identity(n: usize) -> Self {
        GroupElement {
            mat: DMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &DMatrix<f64> {
        &self.mat
    }

    /// Group inverse (= transpose).
    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            mat: self.mat.transpose(),
        }
    }

    /// Group multiplication. Dimensions must agree.
    pub fn compose(&self, rhs: &GroupElement) -> GroupElement {
        debug_assert_eq!(self.dim(), rhs.dim());
        GroupElement {
            mat: &self.mat * &rhs.mat,
        }
    }

    /// Principal logarithm; errors with `AngleAtCut` near the branch cut.
    pub fn log(&self, tol: &Tolerances) -> Result<AlgebraElement> {
        let out = linalg::so_log(&self.mat, tol.cut)?;
        Ok(AlgebraElement { mat: out.skew })
    }

    /// Orthogonality defect `|g^T g - I|_F`, for drift monitoring.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.dim();
        (self.mat.transpose() * &self.mat - DMatrix::<f64>::identity(n, n)).norm()
    }

    /// Row-major flat serialization of the matrix entries.
    pub fn to_row_major(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.mat[(i, j)]);
            }
        }
        out
    }

    pub fn from_row_major(n: usize, data: &[f64], tol: &Tolerances) -> Result<Self> {
        if data.len() != n * n {
            return Err(LieError::InvalidParameter(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        GroupElement::new(DMatrix::from_row_slice(n, n, data), tol)
    }
}

/// An element of so(n): a skew-symmetric matrix. The constructor symmetrizes,
/// so `mat + mat^T = 0` holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    mat: DMatrix<f64>,
}

impl AlgebraElement {
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        let n = mat.nrows();
        if n != mat.ncols() {
            return Err(LieError::DimensionMismatch(n, mat.ncols()));
        }
        let skew = (&mat - mat.transpose()) * 0.5;
        Ok(AlgebraElement { mat: skew })
    }

    /// Wrap a matrix that is skew-symmetric by construction.
    pub(crate) fn from_skew_unchecked(mat: DMatrix<f64>) -> Self {
        debug_assert!((&mat + mat.transpose()).norm() < 1e-10 * (1.0 + mat.norm()));
        AlgebraElement { mat }
    }

    pub fn zeros(n: usize) -> Self {
        AlgebraElement {
            mat: DMatrix::zeros(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &DMatrix<f64> {
        &self.mat
    }

    /// Exponential map into the group.
    pub fn exp(&self) -> GroupElement {
        GroupElement::from_matrix_unchecked(linalg::expm(&self.mat))
    }

    pub fn scale(&self, s: f64) -> AlgebraElement {
        AlgebraElement {
            mat: &self.mat * s,
        }
    }

    /// Metric inner product against another algebra element (unchecked dims).
    pub fn dot(&self, other: &AlgebraElement) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.mat.dot(&other.mat)
    }

    pub fn norm_squared(&self) -> f64 {
        self.mat.norm_squared()
    }

    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }

    /// Commutator `[self, other]` (unchecked dims).
    pub fn commutator(&self, other: &AlgebraElement) -> AlgebraElement {
        debug_assert_eq!(self.dim(), other.dim());
        let m = &self.mat * &other.mat - &other.mat * &self.mat;
        AlgebraElement { mat: m }
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.mat[(i, j)]);
            }
        }
        out
    }
}

impl std::ops::Add<&AlgebraElement> for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: &AlgebraElement) -> AlgebraElement {
        debug_assert_eq!(self.dim(), rhs.dim());
        AlgebraElement {
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl std::ops::Sub<&AlgebraElement> for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: &AlgebraElement) -> AlgebraElement {
        debug_assert_eq!(self.dim(), rhs.dim());
        AlgebraElement {
            mat: &self.mat - &rhs.mat,
        }
    }
}

/// Inner product `<x, y> = trace(x^T y)`.
pub fn inner(x: &AlgebraElement, y: &AlgebraElement) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(LieError::DimensionMismatch(x.dim(), y.dim()));
    }
    Ok(x.dot(y))
}

/// Lie bracket `[x, y] = xy - yx`.
pub fn bracket(x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
    if x.dim() != y.dim() {
        return Err(LieError::DimensionMismatch(x.dim(), y.dim()));
    }
    Ok(x.commutator(y))
}

/// Exponential map from the algebra; free-function form of `xi.exp()`.
pub fn group_exp(xi: &AlgebraElement) -> GroupElement {
    xi.exp()
}

/// Principal-branch logarithm; free-function form of `g.log(tol)`.
pub fn group_log(g: &GroupElement, tol: &Tolerances) -> Result<AlgebraElement> {
    g.log(tol)
}

/// Geodesic distance `|log(g^T h)|` in the bi-invariant metric.
pub fn geodesic_distance(g: &GroupElement, h: &GroupElement, tol: &Tolerances) -> Result<f64> {
    if g.dim() != h.dim() {
        return Err(LieError::DimensionMismatch(g.dim(), h.dim()));
    }
    let rel = g.inverse().compose(h);
    Ok(rel.log(tol)?.norm())
}
