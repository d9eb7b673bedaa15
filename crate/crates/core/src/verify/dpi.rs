use serde::{Deserialize, Serialize};

use super::{extended_f64, neg_two_log, slack, ORDERING_TOLERANCE};
use crate::channel::QuantumChannel;
use crate::entropy::{fidelity_with_sqrt, relative_entropy, trace_distance, EntropyValue};
use crate::error::{Error, Result};
use crate::io::{kraus_fingerprint, MatrixRecord};
use crate::linalg::{psd_sqrt_lenient, Operator};
use crate::quadrature::QuadratureRule;
use crate::recovery::{PetzFactory, RecoveryKind, RecoveryMap};
use crate::state::{AsOperator, PositiveOperator};

/// One component of a mixture map and the fidelity it achieves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeFidelity {
    /// Rotation parameter of the component map (`t/2` for a `β₀` node `t`).
    pub rotation: Option<f64>,
    pub weight: f64,
    pub fidelity: f64,
}

/// Both sides of the data-processing remainder inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpiReport {
    /// `D(ρ‖σ) − D(N(ρ)‖N(σ))`.
    pub lhs: EntropyValue,
    /// `−2 ln F(ρ, (R∘N)(ρ))` for the mixed map.
    #[serde(with = "extended_f64")]
    pub rhs_mixture: f64,
    /// `−2 Σ_k w_k ln F(ρ, (R_k∘N)(ρ))`.
    #[serde(with = "extended_f64")]
    pub rhs_strong: f64,
    pub node_fidelities: Vec<NodeFidelity>,
    #[serde(with = "extended_f64")]
    pub slack_mixture: f64,
    #[serde(with = "extended_f64")]
    pub slack_strong: f64,
    pub recovered_fidelity: f64,
    pub trace_distance: f64,
    /// `D(ρ‖(R∘N)(ρ))`, reported for comparison only; no bound is claimed.
    pub exploratory_divergence: EntropyValue,
    /// Whether `rhs_strong ≥ rhs_mixture − 1e-9`.
    pub ordering_ok: bool,
    pub recovery_fingerprint: String,
    pub recovered: MatrixRecord,
}

impl DpiReport {
    pub fn min_slack(&self) -> f64 {
        self.slack_mixture.min(self.slack_strong)
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.min_slack() >= -tolerance && self.ordering_ok
    }
}

/// Evaluates the remainder inequality with the universal recovery map built
/// from `rule`.
pub fn dpi_remainder<R: AsOperator + ?Sized>(
    rho: &R,
    sigma: &PositiveOperator,
    channel: &QuantumChannel,
    rule: &QuadratureRule,
) -> Result<DpiReport> {
    check_dims(rho.operator(), sigma, channel)?;
    let map = PetzFactory::new(sigma, channel)?.universal(rule);
    dpi_with_map(rho, sigma, channel, &map)
}

fn check_dims(rho: &Operator, sigma: &PositiveOperator, channel: &QuantumChannel) -> Result<()> {
    for (context, d) in [("rho", rho.nrows()), ("sigma", sigma.dim())] {
        if d != channel.dim_in() {
            return Err(Error::DimensionMismatch {
                context,
                expected: channel.dim_in(),
                found: d,
            });
        }
    }
    Ok(())
}

/// Evaluates the remainder inequality for a given recovery map. The strong
/// form averages over the map's mixture components, or uses the map itself
/// if it has none.
pub fn dpi_with_map<R: AsOperator + ?Sized>(
    rho: &R,
    sigma: &PositiveOperator,
    channel: &QuantumChannel,
    map: &RecoveryMap,
) -> Result<DpiReport> {
    let rho = rho.operator();
    check_dims(rho, sigma, channel)?;
    if map.dim_in() != channel.dim_out() || map.dim_out() != channel.dim_in() {
        return Err(Error::DimensionMismatch {
            context: "recovery map",
            expected: channel.dim_out(),
            found: map.dim_in(),
        });
    }
    let lhs = {
        let a = relative_entropy(rho, sigma)?;
        if a.is_infinite() {
            EntropyValue::INFINITE
        } else {
            let b = relative_entropy(&channel.apply(rho)?, &channel.apply(sigma.matrix())?)?;
            EntropyValue::nats(a.value() - b.value())?
        }
    };
    let out = channel.apply(rho)?;
    let sqrt_rho = psd_sqrt_lenient(rho)?;

    let recovered = map.apply(&out)?;
    let recovered_fidelity = fidelity_with_sqrt(&sqrt_rho, &recovered)?;
    let rhs_mixture = neg_two_log(recovered_fidelity);

    let node_fidelities = if map.components().is_empty() {
        vec![NodeFidelity {
            rotation: rotation_of(map),
            weight: 1.0,
            fidelity: recovered_fidelity,
        }]
    } else {
        map.components()
            .iter()
            .map(|(w, m)| {
                Ok(NodeFidelity {
                    rotation: rotation_of(m),
                    weight: *w,
                    fidelity: fidelity_with_sqrt(&sqrt_rho, &m.apply(&out)?)?,
                })
            })
            .collect::<Result<Vec<_>>>()?
    };
    let rhs_strong = node_fidelities
        .iter()
        .map(|n| if n.weight == 0.0 { 0.0 } else { n.weight * neg_two_log(n.fidelity) })
        .sum::<f64>();

    let lhs_v = lhs.value();
    let ordering_ok = rhs_strong >= rhs_mixture - ORDERING_TOLERANCE;
    Ok(DpiReport {
        lhs,
        rhs_mixture,
        rhs_strong,
        slack_mixture: slack(lhs_v, rhs_mixture),
        slack_strong: slack(lhs_v, rhs_strong),
        node_fidelities,
        recovered_fidelity,
        trace_distance: trace_distance(rho, &recovered)?,
        exploratory_divergence: relative_entropy(rho, &recovered)?,
        ordering_ok,
        recovery_fingerprint: kraus_fingerprint(map.kraus()),
        recovered: MatrixRecord::from_operator(&recovered),
    })
}

fn rotation_of(map: &RecoveryMap) -> Option<f64> {
    match map.kind() {
        RecoveryKind::Petz => Some(0.0),
        RecoveryKind::Rotated { t } => Some(*t),
        _ => None,
    }
}
