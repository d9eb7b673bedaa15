use serde::{Deserialize, Serialize};

use super::{dpi_remainder, extended_f64::option as ext_opt};
use crate::channel::QuantumChannel;
use crate::entropy::{generalized_relative_entropy, relative_entropy, EntropyValue};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;
use crate::state::{truncate_project, DensityOperator, PositiveOperator};

/// Allowed excess of a truncated divergence over the full one.
pub const MONOTONE_TOL: f64 = 1e-9;
/// Required agreement of the last truncation with the full divergence.
pub const CONVERGENCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationRow {
    pub k: usize,
    pub trace_rho: f64,
    /// `D(ρᵏ‖σᵏ)` without trace correction.
    pub relative_entropy: EntropyValue,
    /// `D(ρᵏ‖σᵏ) + tr σᵏ − tr ρᵏ`, the quantity that is monotone in `k`.
    pub generalized_relative_entropy: EntropyValue,
    /// `D(ρᵏ‖σᵏ) − D(N(ρᵏ)‖N(σᵏ))`; the trace corrections cancel.
    pub entropy_difference: EntropyValue,
    /// Remainder slack for the normalized truncation; absent if `ρᵏ = 0`.
    #[serde(with = "ext_opt")]
    pub slack: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub full_relative_entropy: EntropyValue,
    pub full_generalized_relative_entropy: EntropyValue,
    pub full_entropy_difference: EntropyValue,
    pub rows: Vec<TruncationRow>,
    /// Every truncated generalized divergence is at most the full one.
    pub monotone_ok: bool,
    /// The generalized divergences are nondecreasing in `k`.
    pub nondecreasing: bool,
    #[serde(with = "ext_opt")]
    pub final_gap: Option<f64>,
    pub converged: bool,
}

/// Projects `ρ` and `σ` onto the `k` leading eigenvectors of `σ` for each
/// `k` and tracks the divergences and the remainder slack.
pub fn truncation_convergence(
    rho: &DensityOperator,
    sigma: &PositiveOperator,
    channel: &QuantumChannel,
    k_list: &[usize],
    rule: &QuadratureRule,
) -> Result<ConvergenceReport> {
    let d = rho.dim();
    if k_list.is_empty() || k_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("k list must be nonempty and strictly increasing"));
    }
    if let Some(&k) = k_list.iter().find(|&&k| k == 0 || k > d) {
        return Err(Error::domain(format!("truncation rank {k} not in 1..={d}")));
    }
    let rho_p = rho.to_positive()?;
    let reference = sigma.matrix();
    let full_d = relative_entropy(rho, sigma)?;
    let full_dl = generalized_relative_entropy(rho, sigma)?;
    let full_diff = dpi_remainder(rho, sigma, channel, rule)?.lhs;

    let rows = k_list
        .iter()
        .map(|&k| {
            let rk = truncate_project(&rho_p, k, Some(reference))?;
            let sk = truncate_project(sigma, k, Some(reference))?;
            let d_plain = relative_entropy(&rk, &sk)?;
            let d_gen = generalized_relative_entropy(&rk, &sk)?;
            let diff = if d_plain.is_infinite() {
                EntropyValue::INFINITE
            } else {
                let out = relative_entropy(&channel.apply(rk.matrix())?, &channel.apply(sk.matrix())?)?;
                EntropyValue::nats(d_plain.value() - out.value())?
            };
            let slack = if rk.trace() > 0.0 {
                let normalized = DensityOperator::normalize(rk.matrix().clone())?;
                Some(dpi_remainder(&normalized, &sk, channel, rule)?.slack_mixture)
            } else {
                None
            };
            Ok(TruncationRow {
                k,
                trace_rho: rk.trace(),
                relative_entropy: d_plain,
                generalized_relative_entropy: d_gen,
                entropy_difference: diff,
                slack,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let monotone_ok = rows
        .iter()
        .all(|r| r.generalized_relative_entropy.value() <= full_dl.value() + MONOTONE_TOL);
    let nondecreasing = rows.windows(2).all(|w| {
        w[0].generalized_relative_entropy.value() <= w[1].generalized_relative_entropy.value() + MONOTONE_TOL
    });
    let last = rows.last().map(|r| r.relative_entropy.value());
    let final_gap = match last {
        Some(x) if x.is_infinite() && full_d.is_infinite() => Some(0.0),
        Some(x) => Some((x - full_d.value()).abs()),
        None => None,
    };
    Ok(ConvergenceReport {
        full_relative_entropy: full_d,
        full_generalized_relative_entropy: full_dl,
        full_entropy_difference: full_diff,
        converged: final_gap.is_some_and(|g| g <= CONVERGENCE_TOL),
        final_gap,
        monotone_ok,
        nondecreasing,
        rows,
    })
}
