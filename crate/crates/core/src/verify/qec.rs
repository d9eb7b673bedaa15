use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::QuantumChannel;
use crate::entropy::{binary_entropy, fidelity, relative_entropy};
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, identity, max_abs, tensor_all, trace_re, Operator};
use crate::quadrature::QuadratureRule;
use crate::random::{random_isometry, rng_from_seed};
use crate::recovery::PetzFactory;
use crate::state::{random_density_with, DensityOperator, PositiveOperator, StateEnsemble};

const PROJECTOR_TOL: f64 = 1e-10;
const CODESPACE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QecSample {
    /// `D(ρ‖Π) − D(N(ρ)‖N(Π))`.
    pub gap: f64,
    /// `F(ρ, (R_{Π,N}∘N)(ρ))`.
    pub fidelity: f64,
}

/// Approximate error correction bounds evaluated on sampled code states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QecReport {
    pub code_dim: usize,
    pub samples: Vec<QecSample>,
    pub sampled_max_gap: f64,
    pub min_recovered_fidelity: f64,
    /// `1 − ε̂/2` with `ε̂` the sampled maximum gap.
    pub forward_bound: f64,
    pub forward_ok: bool,
    /// `2(1 − min F)`.
    pub epsilon_prime: f64,
    /// `√ε' ln d_C + h₂(√ε')`; absent when `ε' > 1`, where `h₂(√ε')` is
    /// undefined and the converse says nothing.
    pub converse_bound: Option<f64>,
    pub converse_ok: bool,
}

impl QecReport {
    pub fn passed(&self) -> bool {
        self.forward_ok && self.converse_ok
    }
}

/// Evaluates the forward bound `F ≥ 1 − ε̂/2` and the converse bound
/// `gap ≤ √ε' ln d_C + h₂(√ε')` with the recovery map `R_{Π,N}`.
pub fn qec_analyze(
    code: &Operator,
    channel: &QuantumChannel,
    samples: &[DensityOperator],
    rule: &QuadratureRule,
    tolerance: f64,
) -> Result<QecReport> {
    let code_dim = check_projector(code)?;
    if code.nrows() != channel.dim_in() {
        return Err(Error::DimensionMismatch {
            context: "codespace",
            expected: channel.dim_in(),
            found: code.nrows(),
        });
    }
    if samples.is_empty() {
        return Err(Error::domain("no code states to sample"));
    }
    let sigma = PositiveOperator::new(code.clone())?;
    let map = PetzFactory::new(&sigma, channel)?.universal(rule);
    let n_code = channel.apply(code)?;
    let rows = samples
        .iter()
        .enumerate()
        .map(|(i, rho)| {
            let inside = trace_re(&(code * rho.matrix()));
            if inside < rho.trace() - CODESPACE_TOL {
                return Err(Error::InvalidState(format!(
                    "sample {i} has weight {inside} in the codespace"
                )));
            }
            let out = channel.apply(rho.matrix())?;
            let gap = relative_entropy(rho, code)?.value() - relative_entropy(&out, &n_code)?.value();
            let rec = map.apply(&out)?;
            Ok(QecSample {
                gap,
                fidelity: fidelity(rho, &rec)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let max_gap = rows.iter().map(|r| r.gap).fold(f64::NEG_INFINITY, f64::max);
    let min_f = rows.iter().map(|r| r.fidelity).fold(f64::INFINITY, f64::min);
    let eps_hat = max_gap.max(0.0);
    let forward_bound = 1.0 - eps_hat / 2.0;
    let epsilon_prime = (2.0 * (1.0 - min_f)).max(0.0);
    let converse_bound = if epsilon_prime <= 1.0 {
        let s = epsilon_prime.sqrt();
        let d = code_dim.max(2) as f64;
        Some(s * d.ln() + binary_entropy(s)?)
    } else {
        None
    };
    Ok(QecReport {
        code_dim,
        samples: rows,
        sampled_max_gap: max_gap,
        min_recovered_fidelity: min_f,
        forward_bound,
        forward_ok: min_f >= forward_bound - tolerance,
        epsilon_prime,
        converse_ok: converse_bound.is_none_or(|b| max_gap <= b + tolerance),
        converse_bound,
    })
}

/// Checks `Π = Π† = Π²` and returns its rank.
fn check_projector(p: &Operator) -> Result<usize> {
    let defect = max_abs(&(p * p - p)).max(max_abs(&(p - p.adjoint())));
    if defect > PROJECTOR_TOL {
        return Err(Error::domain(format!(
            "codespace operator is not a projector (defect {defect:.3e})"
        )));
    }
    let rank = trace_re(p).round() as usize;
    if rank == 0 {
        return Err(Error::domain("codespace is empty"));
    }
    Ok(rank)
}

/// Orthonormal basis of the range of a projector, as columns.
fn code_basis(code: &Operator) -> Result<Operator> {
    let k = check_projector(code)?;
    Ok(eig_hermitian(code)?.eigenvectors.columns(0, k).into_owned())
}

/// The code basis states followed by random pure and mixed code states,
/// `count` in total.
pub fn codespace_samples(code: &Operator, count: usize, seed: u64) -> Result<Vec<DensityOperator>> {
    let v = code_basis(code)?;
    let k = v.ncols();
    let mut rng = rng_from_seed(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let inner = if i < k {
            DensityOperator::pure(&crate::linalg::ket(k, i))?
        } else if i % 2 == 0 {
            random_density_with(&mut rng, k, StateEnsemble::Rank(1))?
        } else {
            random_density_with(&mut rng, k, StateEnsemble::HilbertSchmidt)?
        };
        out.push(DensityOperator::normalize(&v * inner.matrix() * v.adjoint())?);
    }
    Ok(out)
}

/// Projector onto a Haar-random `code_dim`-dimensional subspace.
pub fn random_codespace(dim: usize, code_dim: usize, seed: u64) -> Result<Operator> {
    if code_dim == 0 || code_dim > dim {
        return Err(Error::domain(format!("code dimension {code_dim} not in 1..={dim}")));
    }
    let v = random_isometry(&mut rng_from_seed(seed), dim, code_dim);
    Ok(&v * v.adjoint())
}

/// The three-qubit repetition code `span{|000⟩, |111⟩}` and the channel
/// with Kraus operators `√(1−3p) I, √p X₁, √p X₂, √p X₃`.
pub fn three_qubit_bit_flip(p: f64) -> Result<(Operator, QuantumChannel)> {
    if !(0.0..=1.0 / 3.0).contains(&p) {
        return Err(Error::domain(format!("flip probability {p} not in [0, 1/3]")));
    }
    let mut code = Operator::zeros(8, 8);
    code[(0, 0)] = Complex64::new(1.0, 0.0);
    code[(7, 7)] = Complex64::new(1.0, 0.0);
    let x = crate::linalg::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let i2 = identity(2);
    let mut kraus = vec![identity(8) * Complex64::new((1.0 - 3.0 * p).sqrt(), 0.0)];
    for q in 0..3 {
        let factors: Vec<&Operator> = (0..3).map(|j| if j == q { &x } else { &i2 }).collect();
        kraus.push(tensor_all(factors)? * Complex64::new(p.sqrt(), 0.0));
    }
    Ok((code, QuantumChannel::trace_preserving(kraus)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::NamedChannel;
    use crate::quadrature::beta0_quadrature;
    use crate::random::random_unitary;

    #[test]
    fn unitary_channel_is_perfect() {
        let code = random_codespace(4, 2, 1).unwrap();
        let u = random_unitary(&mut rng_from_seed(2), 4);
        let ch = NamedChannel::Unitary(u).build().unwrap();
        let samples = codespace_samples(&code, 8, 3).unwrap();
        let r = qec_analyze(&code, &ch, &samples, &beta0_quadrature(17).unwrap(), 1e-8).unwrap();
        assert!(r.sampled_max_gap.abs() < 1e-8);
        assert!((r.min_recovered_fidelity - 1.0).abs() < 1e-8);
        assert!(r.passed());
    }

    #[test]
    fn depolarized_code_is_consistent() {
        let code = random_codespace(4, 2, 5).unwrap();
        let ch = NamedChannel::Depolarizing { dim: 4, lambda: 0.2 }.build().unwrap();
        let samples = codespace_samples(&code, 10, 6).unwrap();
        let r = qec_analyze(&code, &ch, &samples, &beta0_quadrature(33).unwrap(), 1e-8).unwrap();
        assert!(r.forward_ok, "{r:?}");
        assert!(r.converse_ok, "{r:?}");
        assert!(r.sampled_max_gap > 0.0);
    }

    #[test]
    fn rejects_non_projector() {
        let ch = QuantumChannel::identity(2);
        let samples = vec![DensityOperator::maximally_mixed(2)];
        let half = identity(2) * Complex64::new(0.5, 0.0);
        assert!(qec_analyze(&half, &ch, &samples, &beta0_quadrature(5).unwrap(), 1e-8).is_err());
    }

    #[test]
    fn rejects_state_outside_code() {
        let (code, ch) = three_qubit_bit_flip(0.1).unwrap();
        let samples = vec![DensityOperator::maximally_mixed(8)];
        assert!(qec_analyze(&code, &ch, &samples, &beta0_quadrature(5).unwrap(), 1e-8).is_err());
    }
}
