//! Dense complex linear algebra on small Hilbert spaces.
//!
//! Every operator is a `DMatrix<Complex64>`. Subsystems are ordered
//! big-endian: in `A ⊗ B` the index of `A` is the most significant digit.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// A dense complex matrix. Square unless stated otherwise.
pub type Operator = DMatrix<Complex64>;

/// Largest dimension a tensor product may produce unless overridden.
pub const DEFAULT_MAX_DIM: usize = 4096;

/// Relative Hermiticity tolerance accepted by [`eig_hermitian`].
pub const HERMITIAN_RTOL: f64 = 1e-10;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// How small an eigenvalue must be before it counts as zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum RankTolerance {
    /// `d * machine-epsilon * λ_max`.
    #[default]
    Default,
    /// `r * λ_max`.
    Relative(f64),
    /// A fixed cutoff.
    Absolute(f64),
}

impl RankTolerance {
    pub fn cutoff(self, dim: usize, lambda_max: f64) -> f64 {
        let scale = lambda_max.abs();
        match self {
            RankTolerance::Default => dim as f64 * f64::EPSILON * scale,
            RankTolerance::Relative(r) => r.abs() * scale,
            RankTolerance::Absolute(a) => a.abs(),
        }
    }
}

/// Scalar functions that can be lifted to PSD operators on their support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixFunction {
    /// `λ^p`.
    Power(f64),
    /// `λ^{it}`, unitary on the support.
    ImaginaryPower(f64),
    /// `λ^z` for complex `z`.
    ComplexPower(Complex64),
    /// Natural logarithm.
    Log,
}

impl MatrixFunction {
    pub fn eval(self, lambda: f64) -> Complex64 {
        match self {
            MatrixFunction::Power(p) => Complex64::new(lambda.powf(p), 0.0),
            MatrixFunction::ImaginaryPower(t) => Complex64::cis(t * lambda.ln()),
            MatrixFunction::ComplexPower(z) => {
                let l = lambda.ln();
                Complex64::from_polar((z.re * l).exp(), z.im * l)
            }
            MatrixFunction::Log => Complex64::new(lambda.ln(), 0.0),
        }
    }
}

/// Eigen-decomposition of a Hermitian operator, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Columns are orthonormal eigenvectors, in the order of `eigenvalues`.
    pub eigenvectors: Operator,
    /// Eigenvalues at or below this are treated as zero.
    pub cutoff: f64,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Number of eigenvalues strictly above the cutoff.
    pub fn rank(&self) -> usize {
        self.eigenvalues.iter().filter(|&&l| l > self.cutoff).count()
    }

    /// Fails if some eigenvalue lies below `-cutoff`.
    pub fn check_psd(&self) -> Result<()> {
        let min = self.min_eigenvalue();
        if min < -self.cutoff {
            return Err(Error::NotPositive {
                eigenvalue: min,
                cutoff: self.cutoff,
            });
        }
        Ok(())
    }

    /// `V Λ V†`.
    pub fn reconstruct(&self) -> Operator {
        let mut scaled = self.eigenvectors.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(j).scale_mut(l);
        }
        &scaled * self.eigenvectors.adjoint()
    }

    /// `Σ g(λ_j) |v_j⟩⟨v_j|` over eigenvalues above the cutoff; zero on the kernel.
    pub fn map_support(&self, g: impl Fn(f64) -> Complex64) -> Operator {
        let d = self.dim();
        let mut scaled = Operator::zeros(d, d);
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            if l > self.cutoff {
                let c = g(l);
                scaled.set_column(j, &(self.eigenvectors.column(j) * c));
            }
        }
        &scaled * self.eigenvectors.adjoint()
    }

    pub fn apply(&self, f: MatrixFunction) -> Operator {
        self.map_support(|l| f.eval(l))
    }

    pub fn support_projector(&self) -> Operator {
        self.map_support(|_| ONE)
    }

    /// Projector onto the eigenvectors at or below the cutoff.
    pub fn kernel_projector(&self) -> Operator {
        let d = self.dim();
        let mut cols = Operator::zeros(d, d);
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            if l <= self.cutoff {
                cols.set_column(j, &self.eigenvectors.column(j));
            }
        }
        &cols * cols.adjoint()
    }

    /// Groups of indices of support eigenvalues that coincide within
    /// `rtol * λ_max`. Groups are ordered by decreasing eigenvalue.
    pub fn eigenspaces(&self, rtol: f64) -> Vec<Vec<usize>> {
        let tol = rtol * self.max_eigenvalue().abs();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            if l <= self.cutoff {
                break;
            }
            match groups.last_mut() {
                Some(g) if (self.eigenvalues[g[0]] - l).abs() <= tol => g.push(j),
                _ => groups.push(vec![j]),
            }
        }
        groups
    }

    /// Spectral projectors for [`Self::eigenspaces`].
    pub fn eigenspace_projectors(&self, rtol: f64) -> Vec<Operator> {
        let d = self.dim();
        self.eigenspaces(rtol)
            .into_iter()
            .map(|g| {
                let mut cols = Operator::zeros(d, d);
                for j in g {
                    cols.set_column(j, &self.eigenvectors.column(j));
                }
                &cols * cols.adjoint()
            })
            .collect()
    }
}

pub fn ensure_square(m: &Operator) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub fn ensure_finite(m: &Operator) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// `‖H − H†‖_F`.
pub fn hermiticity_residual(h: &Operator) -> f64 {
    (h - h.adjoint()).norm()
}

/// `(H + H†) / 2`.
pub fn hermitian_part(h: &Operator) -> Operator {
    (h + h.adjoint()).scale(0.5)
}

pub fn eig_hermitian(h: &Operator) -> Result<SpectralDecomposition> {
    eig_hermitian_with(h, RankTolerance::Default)
}

/// Hermitian eigen-decomposition with an explicit rank tolerance.
///
/// The input must satisfy `‖H − H†‖ ≤ 1e-10 ‖H‖` (Frobenius norms); the
/// Hermitian part is what actually gets diagonalized.
pub fn eig_hermitian_with(h: &Operator, tol: RankTolerance) -> Result<SpectralDecomposition> {
    let d = ensure_square(h)?;
    ensure_finite(h)?;
    let residual = hermiticity_residual(h);
    let limit = HERMITIAN_RTOL * h.norm();
    if residual > limit {
        return Err(Error::NotHermitian { residual, limit });
    }
    if d == 0 {
        return Ok(SpectralDecomposition {
            eigenvalues: Vec::new(),
            eigenvectors: Operator::zeros(0, 0),
            cutoff: 0.0,
        });
    }
    let eig = SymmetricEigen::try_new(hermitian_part(h), f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("Hermitian eigensolver did not converge".into()))?;

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let mut eigenvectors = Operator::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    let lambda_max = eigenvalues
        .iter()
        .fold(0.0_f64, |acc, l| acc.max(l.abs()));
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        cutoff: tol.cutoff(d, lambda_max),
    })
}

/// Applies `f` to the eigenvalues of a PSD operator above the rank cutoff.
///
/// The kernel maps to zero, so negative powers are pseudo-inverse powers.
pub fn matrix_function_on_support(h: &Operator, f: MatrixFunction) -> Result<Operator> {
    matrix_function_on_support_with(h, f, RankTolerance::Default)
}

pub fn matrix_function_on_support_with(
    h: &Operator,
    f: MatrixFunction,
    tol: RankTolerance,
) -> Result<Operator> {
    let spec = eig_hermitian_with(h, tol)?;
    spec.check_psd()?;
    Ok(spec.apply(f))
}

pub fn support_projector(h: &Operator) -> Result<Operator> {
    support_projector_with(h, RankTolerance::Default)
}

pub fn support_projector_with(h: &Operator, tol: RankTolerance) -> Result<Operator> {
    let spec = eig_hermitian_with(h, tol)?;
    spec.check_psd()?;
    Ok(spec.support_projector())
}

/// Square root of an operator that should be PSD but may carry rounding
/// noise: eigenvalues at or below the default rank cutoff are dropped.
///
/// Only gross violations (below `-1e-9 λ_max`) are rejected.
pub fn psd_sqrt_lenient(h: &Operator) -> Result<Operator> {
    let spec = psd_spectrum_lenient(h)?;
    Ok(spec.map_support(|l| Complex64::new(l.sqrt(), 0.0)))
}

/// Eigen-decomposition for nominally PSD operators produced by other
/// computations, tolerating negative noise down to `-1e-9 λ_max`.
pub fn psd_spectrum_lenient(h: &Operator) -> Result<SpectralDecomposition> {
    let spec = eig_hermitian(h)?;
    let floor = 1e-9 * spec.max_eigenvalue().abs().max(f64::MIN_POSITIVE);
    if spec.min_eigenvalue() < -floor {
        return Err(Error::NotPositive {
            eigenvalue: spec.min_eigenvalue(),
            cutoff: floor,
        });
    }
    Ok(spec)
}

/// Singular values, largest first.
pub fn singular_values(m: &Operator) -> Result<Vec<f64>> {
    ensure_finite(m)?;
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let mut s: Vec<f64> = match SVD::try_new(m.clone(), false, false, f64::EPSILON, 0) {
        Some(svd) => svd.singular_values.iter().copied().collect(),
        None => {
            // Fall back to the eigenvalues of M†M.
            let gram = m.adjoint() * m;
            eig_hermitian(&gram)?
                .eigenvalues
                .iter()
                .map(|l| l.max(0.0).sqrt())
                .collect()
        }
    };
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Schatten `p`-norm; pass `f64::INFINITY` for the operator norm.
pub fn schatten_norm(m: &Operator, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::domain(format!("Schatten index must be >= 1, got {p}")));
    }
    let s = singular_values(m)?;
    Ok(lp_norm(&s, p))
}

fn lp_norm(s: &[f64], p: f64) -> f64 {
    let max = s.iter().fold(0.0_f64, |a, &b| a.max(b));
    if p.is_infinite() || max == 0.0 {
        return max;
    }
    if p == 1.0 {
        return s.iter().sum();
    }
    // Scale by the largest value so that large p does not overflow.
    let sum: f64 = s.iter().map(|&x| (x / max).powf(p)).sum();
    max * sum.powf(1.0 / p)
}

pub fn trace_norm(m: &Operator) -> Result<f64> {
    schatten_norm(m, 1.0)
}

pub fn tensor_product(a: &Operator, b: &Operator) -> Result<Operator> {
    tensor_product_with_max(a, b, DEFAULT_MAX_DIM)
}

/// Kronecker product `a ⊗ b`; `a` indexes the most significant digit.
pub fn tensor_product_with_max(a: &Operator, b: &Operator, max_dim: usize) -> Result<Operator> {
    let rows = a.nrows().saturating_mul(b.nrows());
    let cols = a.ncols().saturating_mul(b.ncols());
    let dim = rows.max(cols);
    if dim > max_dim {
        return Err(Error::TooLarge { dim, max: max_dim });
    }
    Ok(a.kronecker(b))
}

/// Tensor product of several factors, left to right.
pub fn tensor_all<'a>(factors: impl IntoIterator<Item = &'a Operator>) -> Result<Operator> {
    let mut acc = Operator::from_element(1, 1, ONE);
    for f in factors {
        acc = tensor_product(&acc, f)?;
    }
    Ok(acc)
}

/// Offsets of every multi-index over the selected factors, in big-endian order.
fn factor_offsets(dims: &[usize], strides: &[usize], factors: &[usize]) -> Vec<usize> {
    let mut offsets = vec![0usize];
    for &f in factors {
        let mut next = Vec::with_capacity(offsets.len() * dims[f]);
        for &o in &offsets {
            for digit in 0..dims[f] {
                next.push(o + digit * strides[f]);
            }
        }
        offsets = next;
    }
    offsets
}

/// Traces out every factor not listed in `keep`. Kept factors retain their
/// relative order.
pub fn partial_trace(m: &Operator, dims: &[usize], keep: &[usize]) -> Result<Operator> {
    let d = ensure_square(m)?;
    let total: usize = dims.iter().product();
    if total != d {
        return Err(Error::DimensionMismatch {
            context: "partial trace factor dimensions",
            expected: d,
            found: total,
        });
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() || kept.iter().any(|&k| k >= dims.len()) {
        return Err(Error::domain(format!(
            "invalid subsystem selection {keep:?} for {} factors",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !kept.contains(i)).collect();

    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let kept_off = factor_offsets(dims, &strides, &kept);
    let traced_off = factor_offsets(dims, &strides, &traced);

    let dk = kept_off.len();
    let mut out = Operator::zeros(dk, dk);
    for (i, &oi) in kept_off.iter().enumerate() {
        for (j, &oj) in kept_off.iter().enumerate() {
            let mut acc = ZERO;
            for &r in &traced_off {
                acc += m[(oi + r, oj + r)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

pub fn trace(m: &Operator) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Real part of the trace.
pub fn trace_re(m: &Operator) -> f64 {
    trace(m).re
}

pub fn identity(d: usize) -> Operator {
    Operator::identity(d, d)
}

pub fn from_real_diagonal(diag: &[f64]) -> Operator {
    Operator::from_diagonal(&DVector::from_iterator(
        diag.len(),
        diag.iter().map(|&x| Complex64::new(x, 0.0)),
    ))
}

pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Operator {
    Operator::from_row_iterator(rows, cols, entries.iter().map(|&x| Complex64::new(x, 0.0)))
}

/// Computational basis vector `|i⟩` in dimension `d`.
pub fn ket(d: usize, i: usize) -> DVector<Complex64> {
    let mut v = DVector::zeros(d);
    v[i] = ONE;
    v
}

/// `|ψ⟩⟨ψ|`.
pub fn projector_onto(psi: &DVector<Complex64>) -> Operator {
    psi * psi.adjoint()
}

/// Matrix unit `|i⟩⟨j|`.
pub fn matrix_unit(d: usize, i: usize, j: usize) -> Operator {
    let mut m = Operator::zeros(d, d);
    m[(i, j)] = ONE;
    m
}

/// Frobenius inner product `tr(A† B)`.
pub fn hs_inner(a: &Operator, b: &Operator) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Largest absolute entry.
pub fn max_abs(m: &Operator) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}
