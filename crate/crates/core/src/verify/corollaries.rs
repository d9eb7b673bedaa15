use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{check_simplex, dpi_remainder, extended_f64, neg_two_log, slack};
use crate::channel::NamedChannel;
use crate::entropy::{
    conditional_entropy, conditional_mutual_information, fidelity, relative_entropy, EntropyValue,
};
use crate::error::{Error, Result};
use crate::linalg::{identity, partial_trace, tensor_product, Operator};
use crate::quadrature::QuadratureRule;
use crate::recovery::PetzFactory;
use crate::state::{AsOperator, DensityOperator, PositiveOperator};

/// Strong subadditivity with remainder:
/// `I(A:C|B) ≥ −2 ln F(ρ_ABC, R_{B→BC}(ρ_AB))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsaReport {
    pub cmi: EntropyValue,
    /// The same quantity as a relative entropy difference, for cross-checking.
    pub entropy_difference: EntropyValue,
    #[serde(with = "extended_f64")]
    pub rhs_mixture: f64,
    #[serde(with = "extended_f64")]
    pub rhs_strong: f64,
    pub recovered_fidelity: f64,
    #[serde(with = "extended_f64")]
    pub slack_mixture: f64,
    #[serde(with = "extended_f64")]
    pub slack_strong: f64,
}

/// Uses `σ = I_A ⊗ ρ_BC` and `N = tr_C`, for which the recovery map acts
/// as `id_A ⊗ R_{B→BC}`.
pub fn ssa_remainder<R: AsOperator + ?Sized>(
    rho_abc: &R,
    dims: (usize, usize, usize),
    rule: &QuadratureRule,
) -> Result<SsaReport> {
    let m = rho_abc.operator();
    let (da, db, dc) = dims;
    if da * db * dc != m.nrows() {
        return Err(Error::DimensionMismatch {
            context: "tripartite state",
            expected: da * db * dc,
            found: m.nrows(),
        });
    }
    let cmi = conditional_mutual_information(m, dims)?;
    let rho_bc = partial_trace(m, &[da, db, dc], &[1, 2])?;
    let sigma = PositiveOperator::new(tensor_product(&identity(da), &rho_bc)?)?;
    let trace_c = NamedChannel::PartialTrace {
        dims: vec![da, db, dc],
        traced: 2,
    }
    .build()?;
    let dpi = dpi_remainder(m, &sigma, &trace_c, rule)?;
    Ok(SsaReport {
        cmi,
        entropy_difference: dpi.lhs,
        rhs_mixture: dpi.rhs_mixture,
        rhs_strong: dpi.rhs_strong,
        recovered_fidelity: dpi.recovered_fidelity,
        slack_mixture: slack(cmi.value(), dpi.rhs_mixture),
        slack_strong: slack(cmi.value(), dpi.rhs_strong),
    })
}

/// Concavity of conditional entropy with remainder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcavityReport {
    /// `H(A|B)_ρ − Σ_x ν(x) H(A|B)_{ρ^x}` for the average state `ρ`.
    pub lhs: f64,
    /// `−2 ln Σ_x ν(x) F(ρ^x_AB, R_{B→AB}(ρ^x_B))`.
    #[serde(with = "extended_f64")]
    pub rhs: f64,
    pub fidelities: Vec<f64>,
    #[serde(with = "extended_f64")]
    pub slack: f64,
}

/// Uses `σ = ρ_AB` (the average) and `N = tr_A`.
pub fn concavity_remainder(
    ensemble: &[(f64, DensityOperator)],
    dims: (usize, usize),
    rule: &QuadratureRule,
) -> Result<ConcavityReport> {
    let weights: Vec<f64> = ensemble.iter().map(|(w, _)| *w).collect();
    check_simplex(&weights)?;
    let d = dims.0 * dims.1;
    for (_, r) in ensemble {
        if r.dim() != d {
            return Err(Error::DimensionMismatch {
                context: "ensemble member",
                expected: d,
                found: r.dim(),
            });
        }
    }
    let avg = weighted_sum(ensemble.iter().map(|(w, r)| (*w, r.matrix())), d);
    let mut lhs = conditional_entropy(&avg, dims)?;
    for (w, r) in ensemble {
        lhs -= w * conditional_entropy(r, dims)?;
    }
    let trace_a = NamedChannel::PartialTrace {
        dims: vec![dims.0, dims.1],
        traced: 0,
    }
    .build()?;
    let map = PetzFactory::new(&PositiveOperator::new(avg)?, &trace_a)?.universal(rule);
    let fidelities = ensemble
        .iter()
        .map(|(_, r)| {
            let rec = map.apply(&trace_a.apply(r.matrix())?)?;
            fidelity(r, &rec)
        })
        .collect::<Result<Vec<_>>>()?;
    let avg_f: f64 = weights.iter().zip(&fidelities).map(|(w, f)| w * f).sum();
    let rhs = neg_two_log(avg_f);
    Ok(ConcavityReport {
        lhs,
        rhs,
        fidelities,
        slack: slack(lhs, rhs),
    })
}

/// Joint convexity of relative entropy with remainder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointConvexityReport {
    /// `Σ_x ν(x) D(ρ^x‖σ^x) − D(ρ‖σ)`.
    pub lhs: EntropyValue,
    /// `−2 ln Σ_x ν(x) F(ρ^x, τ_x/ν(x))` with `τ_x` the `x` block of
    /// `R_{σ_XA, tr_X}(ρ)`.
    #[serde(with = "extended_f64")]
    pub rhs: f64,
    /// `−2 ln F(ρ_XA, R(ρ))`, equal to `rhs` because the recovered state is
    /// block diagonal.
    #[serde(with = "extended_f64")]
    pub rhs_joint: f64,
    /// Per-member fidelities; zero-weight members get `None`.
    pub fidelities: Vec<Option<f64>>,
    /// Members with `supp ρ^x ⊄ supp σ^x`.
    pub support_violations: Vec<usize>,
    #[serde(with = "extended_f64")]
    pub slack: f64,
}

pub fn joint_convexity_remainder(
    ensemble: &[(f64, DensityOperator, PositiveOperator)],
    rule: &QuadratureRule,
) -> Result<JointConvexityReport> {
    let weights: Vec<f64> = ensemble.iter().map(|(w, _, _)| *w).collect();
    check_simplex(&weights)?;
    let d = ensemble[0].1.dim();
    for (_, r, s) in ensemble {
        for found in [r.dim(), s.dim()] {
            if found != d {
                return Err(Error::DimensionMismatch {
                    context: "ensemble member",
                    expected: d,
                    found,
                });
            }
        }
    }
    let n = ensemble.len();
    let rho = weighted_sum(ensemble.iter().map(|(w, r, _)| (*w, r.matrix())), d);
    let sigma = weighted_sum(ensemble.iter().map(|(w, _, s)| (*w, s.matrix())), d);

    let mut support_violations = Vec::new();
    let mut avg_d = 0.0;
    for (x, (w, r, s)) in ensemble.iter().enumerate() {
        let dx = relative_entropy(r, s)?;
        if dx.is_infinite() {
            support_violations.push(x);
            if *w > 0.0 {
                avg_d = f64::INFINITY;
            }
        } else {
            avg_d += w * dx.value();
        }
    }
    let lhs = if avg_d.is_infinite() {
        EntropyValue::INFINITE
    } else {
        EntropyValue::nats(avg_d - relative_entropy(&rho, &sigma)?.value())?
    };

    let mut sigma_xa = Operator::zeros(n * d, n * d);
    let mut rho_xa = Operator::zeros(n * d, n * d);
    for (x, (w, r, s)) in ensemble.iter().enumerate() {
        let c = Complex64::new(*w, 0.0);
        sigma_xa.view_mut((x * d, x * d), (d, d)).copy_from(&(s.matrix() * c));
        rho_xa.view_mut((x * d, x * d), (d, d)).copy_from(&(r.matrix() * c));
    }
    let trace_x = NamedChannel::PartialTrace {
        dims: vec![n, d],
        traced: 0,
    }
    .build()?;
    let map = PetzFactory::new(&PositiveOperator::new(sigma_xa)?, &trace_x)?.universal(rule);
    let recovered = map.apply(&rho)?;
    let fidelities = ensemble
        .iter()
        .enumerate()
        .map(|(x, (w, r, _))| {
            if *w == 0.0 {
                return Ok(None);
            }
            let block = recovered.view((x * d, x * d), (d, d)).unscale(*w);
            Ok(Some(fidelity(r, &block)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let avg_f: f64 = weights
        .iter()
        .zip(&fidelities)
        .map(|(w, f)| w * f.unwrap_or(0.0))
        .sum();
    let rhs = neg_two_log(avg_f);
    Ok(JointConvexityReport {
        lhs,
        rhs,
        rhs_joint: neg_two_log(fidelity(&rho_xa, &recovered)?),
        fidelities,
        support_violations,
        slack: slack(lhs.value(), rhs),
    })
}

fn weighted_sum<'a>(terms: impl Iterator<Item = (f64, &'a Operator)>, d: usize) -> Operator {
    let mut acc = Operator::zeros(d, d);
    for (w, m) in terms {
        acc += m * Complex64::new(w, 0.0);
    }
    acc
}
