//! Positive operators and density operators.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, ensure_finite, ensure_square, from_real_diagonal, hermitian_part, identity,
    projector_onto, trace_re, Operator,
};
use crate::random::{random_psd, rng_from_seed};

/// Relative tolerance for negative eigenvalues when validating inputs.
pub const PSD_RTOL: f64 = 1e-10;
/// Tolerance on the trace of a normalized state.
pub const TRACE_TOL: f64 = 1e-10;

/// Anything that carries an operator.
pub trait AsOperator {
    fn operator(&self) -> &Operator;
}

impl AsOperator for Operator {
    fn operator(&self) -> &Operator {
        self
    }
}

fn validated_psd(matrix: &Operator) -> Result<(Operator, f64)> {
    ensure_square(matrix)?;
    ensure_finite(matrix)?;
    let spec = eig_hermitian(matrix)?;
    let floor = PSD_RTOL * spec.max_eigenvalue().abs().max(1.0);
    if spec.min_eigenvalue() < -floor {
        return Err(Error::NotPositive {
            eigenvalue: spec.min_eigenvalue(),
            cutoff: floor,
        });
    }
    let h = hermitian_part(matrix);
    let tr = trace_re(&h);
    Ok((h, tr))
}

/// A nonzero positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveOperator {
    matrix: Operator,
    trace: f64,
}

impl PositiveOperator {
    /// Validates Hermiticity, positivity and a strictly positive trace.
    /// The stored matrix is the Hermitian part of the input.
    pub fn new(matrix: Operator) -> Result<Self> {
        let (matrix, trace) = validated_psd(&matrix)?;
        if trace <= 0.0 {
            return Err(Error::InvalidState(format!("trace must be positive, got {trace:e}")));
        }
        Ok(Self { matrix, trace })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            matrix: identity(d),
            trace: d as f64,
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(from_real_diagonal(diag))
    }

    pub fn matrix(&self) -> &Operator {
        &self.matrix
    }

    pub fn into_matrix(self) -> Operator {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    /// `self / tr(self)`.
    pub fn normalized(&self) -> DensityOperator {
        DensityOperator {
            matrix: self.matrix.unscale(self.trace),
            subnormalized: false,
        }
    }
}

impl AsOperator for PositiveOperator {
    fn operator(&self) -> &Operator {
        &self.matrix
    }
}

/// A density operator, normalized or (when flagged) subnormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: Operator,
    subnormalized: bool,
}

impl DensityOperator {
    /// A state with unit trace (within `1e-10`).
    pub fn new(matrix: Operator) -> Result<Self> {
        let (matrix, tr) = validated_psd(&matrix)?;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        Ok(Self {
            matrix,
            subnormalized: false,
        })
    }

    /// A state with trace in `(0, 1]`.
    pub fn subnormalized(matrix: Operator) -> Result<Self> {
        let (matrix, tr) = validated_psd(&matrix)?;
        if tr <= 0.0 || tr > 1.0 + TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "subnormalized trace {tr} outside (0, 1]"
            )));
        }
        Ok(Self {
            matrix,
            subnormalized: true,
        })
    }

    /// Rescales a nonzero PSD operator to unit trace.
    pub fn normalize(matrix: Operator) -> Result<Self> {
        Ok(PositiveOperator::new(matrix)?.normalized())
    }

    pub fn pure(psi: &DVector<Complex64>) -> Result<Self> {
        let n = psi.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidState("state vector must be nonzero".into()));
        }
        Ok(Self {
            matrix: projector_onto(&psi.unscale(n)),
            subnormalized: false,
        })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            matrix: identity(d).unscale(d as f64),
            subnormalized: false,
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(from_real_diagonal(diag))
    }

    pub fn matrix(&self) -> &Operator {
        &self.matrix
    }

    pub fn into_matrix(self) -> Operator {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        trace_re(&self.matrix)
    }

    pub fn is_subnormalized(&self) -> bool {
        self.subnormalized
    }

    pub fn to_positive(&self) -> Result<PositiveOperator> {
        PositiveOperator::new(self.matrix.clone())
    }
}

impl AsOperator for DensityOperator {
    fn operator(&self) -> &Operator {
        &self.matrix
    }
}

/// Random state ensembles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateEnsemble {
    /// Induced by the Hilbert-Schmidt measure (full rank almost surely).
    HilbertSchmidt,
    /// `G G† / tr` with `G` of shape `d × k`.
    Rank(usize),
}

pub fn random_density(dim: usize, seed: u64, ensemble: StateEnsemble) -> Result<DensityOperator> {
    let mut rng = rng_from_seed(seed);
    random_density_with(&mut rng, dim, ensemble)
}

pub fn random_density_with<R: rand::Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    ensemble: StateEnsemble,
) -> Result<DensityOperator> {
    if dim == 0 {
        return Err(Error::domain("state dimension must be at least 1"));
    }
    let k = match ensemble {
        StateEnsemble::HilbertSchmidt => dim,
        StateEnsemble::Rank(k) if k >= 1 && k <= dim => k,
        StateEnsemble::Rank(k) => {
            return Err(Error::domain(format!("rank {k} not in 1..={dim}")));
        }
    };
    let g = random_psd(rng, dim, k);
    let tr = trace_re(&g);
    Ok(DensityOperator {
        matrix: hermitian_part(&g).unscale(tr),
        subnormalized: false,
    })
}

/// Projector onto the `k` leading eigenvectors of `reference`.
pub fn leading_projector(reference: &Operator, k: usize) -> Result<Operator> {
    let d = ensure_square(reference)?;
    if k == 0 || k > d {
        return Err(Error::domain(format!("truncation rank {k} not in 1..={d}")));
    }
    let spec = eig_hermitian(reference)?;
    let v = spec.eigenvectors.columns(0, k).into_owned();
    Ok(&v * v.adjoint())
}

/// `Π ρ Π` where `Π` projects onto the `k` leading eigenvectors of
/// `reference` (of `rho` itself when `None`).
pub fn truncate_project(
    rho: &PositiveOperator,
    k: usize,
    reference: Option<&Operator>,
) -> Result<PositiveOperator> {
    let reference = reference.unwrap_or(rho.matrix());
    if reference.nrows() != rho.dim() {
        return Err(Error::DimensionMismatch {
            context: "truncation reference",
            expected: rho.dim(),
            found: reference.nrows(),
        });
    }
    if k == rho.dim() {
        return Ok(rho.clone());
    }
    let p = leading_projector(reference, k)?;
    PositiveOperator::new(&p * rho.matrix() * &p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, trace_norm};

    #[test]
    fn scalar_state() {
        let r = random_density(1, 5, StateEnsemble::HilbertSchmidt).unwrap();
        assert!((r.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn seeded_states_repeat() {
        let a = random_density(4, 99, StateEnsemble::Rank(2)).unwrap();
        let b = random_density(4, 99, StateEnsemble::Rank(2)).unwrap();
        assert_eq!(a, b);
        let spec = eig_hermitian(a.matrix()).unwrap();
        assert_eq!(spec.rank(), 2);
        assert!(random_density(3, 1, StateEnsemble::Rank(4)).is_err());
    }

    #[test]
    fn qubit_ensemble_mean_is_maximally_mixed() {
        let mut rng = rng_from_seed(2024);
        let mut mean = Operator::zeros(2, 2);
        let n = 10_000;
        for _ in 0..n {
            mean += random_density_with(&mut rng, 2, StateEnsemble::HilbertSchmidt)
                .unwrap()
                .into_matrix();
        }
        mean /= Complex64::new(n as f64, 0.0);
        assert!(max_abs(&(mean - identity(2).scale(0.5))) <= 0.02);
    }

    #[test]
    fn validation() {
        assert!(DensityOperator::from_diagonal(&[0.5, 0.6]).is_err());
        assert!(DensityOperator::from_diagonal(&[1.2, -0.2]).is_err());
        assert!(DensityOperator::subnormalized(from_real_diagonal(&[0.3, 0.2])).is_ok());
        assert!(PositiveOperator::from_diagonal(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn truncation_examples() {
        let rho = random_density(5, 7, StateEnsemble::HilbertSchmidt)
            .unwrap()
            .to_positive()
            .unwrap();
        assert_eq!(truncate_project(&rho, 5, None).unwrap(), rho);

        let pure = random_density(4, 8, StateEnsemble::Rank(1)).unwrap().to_positive().unwrap();
        let t = truncate_project(&pure, 1, None).unwrap();
        assert!(max_abs(&(t.matrix() - pure.matrix())) < 1e-12);
        assert!(truncate_project(&pure, 0, None).is_err());
    }

    #[test]
    fn truncation_error_shrinks_with_rank() {
        let rho = random_density(12, 3, StateEnsemble::HilbertSchmidt)
            .unwrap()
            .to_positive()
            .unwrap();
        let spec = eig_hermitian(rho.matrix()).unwrap();
        let mut last = f64::INFINITY;
        for k in 1..=12 {
            let t = truncate_project(&rho, k, None).unwrap();
            let err = trace_norm(&(t.matrix() - rho.matrix())).unwrap();
            // The error is exactly the discarded eigenvalue tail.
            let tail: f64 = spec.eigenvalues[k..].iter().sum();
            assert!((err - tail).abs() < 1e-12);
            assert!(err <= last + 1e-15);
            last = err;
        }
    }
}
