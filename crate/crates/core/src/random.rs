//! Seeded random matrices.
//!
//! All generators draw from a ChaCha stream so that a seed fixes the output
//! bit for bit on every platform.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::linalg::Operator;

pub type SeededRng = ChaCha20Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Derives an independent child seed from a root seed (SplitMix64 finalizer).
pub fn split_seed(root: u64, index: u64) -> u64 {
    let mut z = root
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard complex Gaussian, `E|z|² = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix of i.i.d. complex Gaussians (Ginibre ensemble).
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Operator {
    // Fill in row-major order so the stream layout is independent of storage.
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = complex_gaussian(rng);
        }
    }
    m
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Operator {
    let g = random_matrix(rng, d, d);
    (&g + g.adjoint()).scale(0.5)
}

/// `G G†` with `G` of shape `d × rank`: PSD with rank `rank` almost surely.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, d: usize, rank: usize) -> Operator {
    let g = random_matrix(rng, d, rank);
    &g * g.adjoint()
}

/// Haar-distributed isometry `rows × cols` (`rows >= cols`), from the QR
/// decomposition of a Ginibre matrix with the phases of `R` removed.
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Operator {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let g = random_matrix(rng, rows, cols);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        let d = r[(j, j)];
        let n = d.norm();
        if n > 0.0 {
            let col = q.column(j) * (d / n);
            q.set_column(j, &col);
        }
    }
    q
}

pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Operator {
    random_isometry(rng, d, d)
}
