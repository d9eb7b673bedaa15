use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{dpi_remainder, extended_f64, DEFAULT_TOLERANCE};
use crate::channel::{random_channel_with, QuantumChannel};
use crate::entropy::EntropyValue;
use crate::error::{Error, Result};
use crate::linalg::eig_hermitian;
use crate::quadrature::{beta0_quadrature, DEFAULT_NODES};
use crate::random::{rng_from_seed, split_seed};
use crate::state::{random_density_with, DensityOperator, PositiveOperator, StateEnsemble};

/// Largest condition number of `σ` accepted before regeneration.
pub const MAX_CONDITION: f64 = 1e8;
const MAX_REGENERATIONS: usize = 1000;
/// Recovery accuracy demanded when the left side vanishes.
pub const EQUALITY_TRACE_DISTANCE: f64 = 1e-5;
const EQUALITY_LHS: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub seed: u64,
    pub count: usize,
    pub dim_min: usize,
    pub dim_max: usize,
    /// Upper end of the environment dimension range; raised when a channel
    /// needs a larger environment to be an isometry.
    pub env_max: usize,
    pub nodes: usize,
    pub tolerance: f64,
    /// Adds per-instance wall times, which makes reports nondeterministic.
    pub record_timing: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            count: 100,
            dim_min: 2,
            dim_max: 5,
            env_max: 4,
            nodes: DEFAULT_NODES,
            tolerance: DEFAULT_TOLERANCE,
            record_timing: false,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim_min == 0 || self.dim_min > self.dim_max {
            return Err(Error::domain(format!(
                "bad dimension range {}..{}",
                self.dim_min, self.dim_max
            )));
        }
        if self.env_max == 0 {
            return Err(Error::domain("env_max must be at least 1"));
        }
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return Err(Error::domain(format!("bad tolerance {}", self.tolerance)));
        }
        Ok(())
    }
}

/// One generated instance.
#[derive(Debug, Clone)]
pub struct SweepInstance {
    pub index: usize,
    pub seed: u64,
    pub rho: DensityOperator,
    pub sigma: PositiveOperator,
    pub channel: QuantumChannel,
    pub rho_rank: usize,
    pub regenerations: usize,
}

/// Instance `index` of the sweep, drawn from `split_seed(config.seed, index)`.
pub fn generate_instance(config: &SweepConfig, index: usize) -> Result<SweepInstance> {
    let seed = split_seed(config.seed, index as u64);
    let mut rng = rng_from_seed(seed);
    let din = rng.random_range(config.dim_min..=config.dim_max);
    let dout = rng.random_range(config.dim_min..=config.dim_max);
    let env_lo = din.div_ceil(dout);
    let env = rng.random_range(env_lo..=config.env_max.max(env_lo));
    let channel = random_channel_with(&mut rng, din, dout, env)?;
    let rho_rank = rng.random_range(1..=din);
    let rho = random_density_with(&mut rng, din, StateEnsemble::Rank(rho_rank))?;
    let mut regenerations = 0;
    let sigma = loop {
        let s = random_density_with(&mut rng, din, StateEnsemble::HilbertSchmidt)?;
        let spec = eig_hermitian(s.matrix())?;
        if spec.max_eigenvalue() <= MAX_CONDITION * spec.min_eigenvalue() {
            break s.to_positive()?;
        }
        regenerations += 1;
        if regenerations >= MAX_REGENERATIONS {
            return Err(Error::Numerical(format!(
                "instance {index}: no well-conditioned sigma after {regenerations} draws"
            )));
        }
    };
    Ok(SweepInstance {
        index,
        seed,
        rho,
        sigma,
        channel,
        rho_rank,
        regenerations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub seed: u64,
    pub dim_in: usize,
    pub dim_out: usize,
    pub env_dim: usize,
    pub rho_rank: usize,
    pub lhs: EntropyValue,
    #[serde(with = "extended_f64")]
    pub rhs_strong: f64,
    #[serde(with = "extended_f64")]
    pub rhs_mixture: f64,
    #[serde(with = "extended_f64")]
    pub slack_mixture: f64,
    #[serde(with = "extended_f64")]
    pub slack_strong: f64,
    pub ordering_ok: bool,
    pub trace_distance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub count: usize,
    /// Instances with a slack below `−tolerance`, an ordering violation or a
    /// failed equality-case recovery.
    pub failures: usize,
    pub ordering_violations: usize,
    pub equality_case_violations: usize,
    pub regenerations: usize,
    pub min_slack_mixture: Option<f64>,
    pub mean_slack_mixture: Option<f64>,
    pub min_slack_strong: Option<f64>,
    pub mean_slack_strong: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub format_version: u32,
    pub crate_version: String,
    pub config: SweepConfig,
    pub summary: SweepSummary,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.summary.failures == 0
    }
}

fn row_fails(row: &SweepRow, tolerance: f64) -> bool {
    row.slack_mixture < -tolerance
        || row.slack_strong < -tolerance
        || !row.ordering_ok
        || equality_violation(row)
}

fn equality_violation(row: &SweepRow) -> bool {
    row.lhs.value() <= EQUALITY_LHS && row.trace_distance > EQUALITY_TRACE_DISTANCE
}

/// Runs the sweep in parallel. Rows are in instance order and, without
/// timing, the report is a pure function of the config.
pub fn sweep(config: &SweepConfig) -> Result<SweepReport> {
    config.validate()?;
    let rule = beta0_quadrature(config.nodes)?;
    let results: Vec<(SweepRow, usize)> = (0..config.count)
        .into_par_iter()
        .map(|index| {
            let start = Instant::now();
            let inst = generate_instance(config, index)?;
            let r = dpi_remainder(&inst.rho, &inst.sigma, &inst.channel, &rule)?;
            let row = SweepRow {
                index,
                seed: inst.seed,
                dim_in: inst.channel.dim_in(),
                dim_out: inst.channel.dim_out(),
                env_dim: inst.channel.env_dim(),
                rho_rank: inst.rho_rank,
                lhs: r.lhs,
                rhs_strong: r.rhs_strong,
                rhs_mixture: r.rhs_mixture,
                slack_mixture: r.slack_mixture,
                slack_strong: r.slack_strong,
                ordering_ok: r.ordering_ok,
                trace_distance: r.trace_distance,
                wall_time_ms: config
                    .record_timing
                    .then(|| start.elapsed().as_secs_f64() * 1e3),
            };
            Ok((row, inst.regenerations))
        })
        .collect::<Result<_>>()?;
    let regenerations = results.iter().map(|(_, n)| n).sum();
    let rows: Vec<SweepRow> = results.into_iter().map(|(r, _)| r).collect();
    let stats = |f: fn(&SweepRow) -> f64| -> (Option<f64>, Option<f64>) {
        let finite: Vec<f64> = rows.iter().map(f).filter(|x| x.is_finite()).collect();
        if finite.is_empty() {
            return (None, None);
        }
        let min = finite.iter().copied().fold(f64::INFINITY, f64::min);
        (Some(min), Some(finite.iter().sum::<f64>() / finite.len() as f64))
    };
    let (min_m, mean_m) = stats(|r| r.slack_mixture);
    let (min_s, mean_s) = stats(|r| r.slack_strong);
    let summary = SweepSummary {
        count: rows.len(),
        failures: rows.iter().filter(|r| row_fails(r, config.tolerance)).count(),
        ordering_violations: rows.iter().filter(|r| !r.ordering_ok).count(),
        equality_case_violations: rows.iter().filter(|r| equality_violation(r)).count(),
        regenerations,
        min_slack_mixture: min_m,
        mean_slack_mixture: mean_m,
        min_slack_strong: min_s,
        mean_slack_strong: mean_s,
    };
    Ok(SweepReport {
        format_version: 1,
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        summary,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64, count: usize) -> SweepConfig {
        SweepConfig {
            seed,
            count,
            nodes: 33,
            ..SweepConfig::default()
        }
    }

    #[test]
    fn empty_sweep_succeeds() {
        let r = sweep(&small(1, 0)).unwrap();
        assert!(r.rows.is_empty() && r.passed());
        assert_eq!(r.summary.min_slack_mixture, None);
    }

    #[test]
    fn sweep_is_deterministic_and_passes() {
        let a = sweep(&small(7, 12)).unwrap();
        let b = sweep(&small(7, 12)).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.passed(), "{:?}", a.summary);
        assert!(a.rows.iter().enumerate().all(|(i, r)| r.index == i));
    }

    #[test]
    fn instances_respect_ranges() {
        let cfg = SweepConfig {
            dim_min: 2,
            dim_max: 3,
            env_max: 2,
            ..small(3, 0)
        };
        for i in 0..30 {
            let inst = generate_instance(&cfg, i).unwrap();
            assert!((2..=3).contains(&inst.channel.dim_in()));
            assert!(inst.channel.env_dim() <= 2);
        }
    }

    #[test]
    fn bad_config_is_rejected() {
        let cfg = SweepConfig {
            dim_min: 4,
            dim_max: 2,
            ..SweepConfig::default()
        };
        assert!(sweep(&cfg).is_err());
    }
}
