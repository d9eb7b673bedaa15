use serde::{Deserialize, Serialize};

use super::{extended_f64, neg_two_log, slack};
use crate::channel::QuantumChannel;
use crate::entropy::{fidelity_with_sqrt, renyi_delta, EntropyValue};
use crate::error::{Error, Result};
use crate::linalg::psd_sqrt_lenient;
use crate::quadrature::beta_theta_quadrature;
use crate::recovery::PetzFactory;
use crate::state::{AsOperator, PositiveOperator};

/// Tolerance of the exact identity at `α = 1/2`.
pub const IDENTITY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaBoundRow {
    pub alpha: f64,
    /// `θ = (1−α)/α`; absent at `α = 1/2`, where the identity is checked.
    pub theta: Option<f64>,
    pub renyi_delta: EntropyValue,
    #[serde(with = "extended_f64")]
    pub rhs: f64,
    #[serde(with = "extended_f64")]
    pub slack: f64,
    pub passed: bool,
}

/// Checks `Δ̃_α ≥ −2 ∫ dt β_θ(t) ln F(ρ, (R^{t/2}∘N)(ρ))`, `θ = (1−α)/α`,
/// for each `α ∈ (1/2, 1)`. At `α = 1/2` the two sides coincide with
/// `−2 ln F(ρ, P(N(ρ)))` and the check is `|slack| ≤ 1e-8`.
pub fn alpha_bound_check<R: AsOperator + ?Sized>(
    rho: &R,
    sigma: &PositiveOperator,
    channel: &QuantumChannel,
    alphas: &[f64],
    nodes: usize,
    tolerance: f64,
) -> Result<Vec<AlphaBoundRow>> {
    if let Some(&a) = alphas.iter().find(|&&a| !(0.5..1.0).contains(&a)) {
        return Err(Error::domain(format!("alpha must lie in [1/2, 1), got {a}")));
    }
    let rho = rho.operator();
    let factory = PetzFactory::new(sigma, channel)?;
    let out = channel.apply(rho)?;
    let sqrt_rho = psd_sqrt_lenient(rho)?;
    let log_fid = |t: f64| -> Result<f64> {
        let rec = factory.rotated(t).apply(&out)?;
        Ok(neg_two_log(fidelity_with_sqrt(&sqrt_rho, &rec)?))
    };
    alphas
        .iter()
        .map(|&alpha| {
            let lhs = renyi_delta(rho, sigma, channel, alpha)?;
            if alpha == 0.5 {
                let rhs = log_fid(0.0)?;
                let s = slack(lhs.value(), rhs);
                return Ok(AlphaBoundRow {
                    alpha,
                    theta: None,
                    renyi_delta: lhs,
                    rhs,
                    slack: s,
                    passed: s.abs() <= IDENTITY_TOLERANCE,
                });
            }
            let theta = (1.0 - alpha) / alpha;
            let rule = beta_theta_quadrature(theta, nodes)?;
            let mut rhs = 0.0;
            for (t, w) in rule.iter() {
                rhs += w * log_fid(t / 2.0)?;
            }
            let s = slack(lhs.value(), rhs);
            Ok(AlphaBoundRow {
                alpha,
                theta: Some(theta),
                renyi_delta: lhs,
                rhs,
                slack: s,
                passed: s >= -tolerance,
            })
        })
        .collect()
}
