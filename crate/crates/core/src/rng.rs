//! Seeded randomness helpers. All randomness flows from explicitly passed
//! generators; there is no global RNG state.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::group::AlgebraElement;

/// Derive an independent deterministic stream from a base seed and a salt.
/// Uses a SplitMix64 scramble so nearby salts give unrelated streams.
pub fn derive_rng(seed: u64, salt: u64) -> ChaCha8Rng {
    let mut z = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(z)
}

/// Random skew-symmetric matrix with independent N(0, scale^2) entries above
/// the diagonal.
pub fn rand_algebra<R: Rng>(n: usize, scale: f64, rng: &mut R) -> AlgebraElement {
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v: f64 = rng.sample(StandardNormal);
            m[(i, j)] = scale * v;
            m[(j, i)] = -scale * v;
        }
    }
    AlgebraElement::from_skew_unchecked(m)
}

/// Random skew-symmetric matrix normalized to unit Frobenius norm.
pub fn rand_unit_algebra<R: Rng>(n: usize, rng: &mut R) -> AlgebraElement {
    loop {
        let x = rand_algebra(n, 1.0, rng);
        let norm = x.norm();
        if norm > 1e-12 {
            return x.scale(1.0 / norm);
        }
    }
}

/// Random n x n matrix with independent standard normal entries.
pub fn rand_gaussian_matrix<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.sample(StandardNormal))
}
