//! Settings from flags, an optional TOML file and the environment, in that
//! order of precedence.

use std::path::{Path, PathBuf};

use qrecover::entropy::Unit;
use qrecover::quadrature::DEFAULT_NODES;
use qrecover::verify::{SweepConfig, DEFAULT_TOLERANCE};
use serde::Deserialize;

use crate::CliError;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "QRECOVER_OUTPUT_DIR";

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub nodes: Option<usize>,
    pub unit: Option<String>,
    pub tolerance: Option<f64>,
    pub output: Option<PathBuf>,
    pub renormalize: Option<bool>,
    #[serde(default)]
    pub sweep: SweepSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub count: Option<usize>,
    pub dim_min: Option<usize>,
    pub dim_max: Option<usize>,
    pub env_max: Option<usize>,
    pub record_timing: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

/// Resolved settings shared by every command.
#[derive(Debug, Clone)]
pub struct Settings {
    pub seed: u64,
    pub nodes: usize,
    pub unit: Unit,
    pub tolerance: f64,
    pub output: Option<PathBuf>,
    pub renormalize: bool,
}

impl Settings {
    pub fn resolve(flags: &crate::CommonArgs, file: &FileConfig) -> Result<Self, CliError> {
        let unit = match (&flags.unit, &file.unit) {
            (Some(u), _) => *u,
            (None, Some(s)) => s.parse().map_err(|e: qrecover::Error| CliError::Usage(e.to_string()))?,
            (None, None) => Unit::Nats,
        };
        let tolerance = flags.tolerance.or(file.tolerance).unwrap_or(DEFAULT_TOLERANCE);
        if !(tolerance >= 0.0 && tolerance.is_finite()) {
            return Err(CliError::Usage(format!("tolerance must be a nonnegative number, got {tolerance}")));
        }
        Ok(Self {
            seed: flags.seed.or(file.seed).unwrap_or(0),
            nodes: flags.nodes.or(file.nodes).unwrap_or(DEFAULT_NODES),
            unit,
            tolerance,
            output: flags
                .output
                .clone()
                .or_else(|| file.output.clone())
                .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from)),
            renormalize: flags.renormalize || file.renormalize.unwrap_or(false),
        })
    }
}

/// Parses `a..b` or `a..=b` (both inclusive) or a single dimension.
pub fn parse_dim_range(s: &str) -> Result<(usize, usize), String> {
    let num = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("bad dimension {x:?}: {e}"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?),
        None => {
            let d = num(s)?;
            (d, d)
        }
    };
    if lo == 0 || lo > hi {
        return Err(format!("bad dimension range {s:?}"));
    }
    Ok((lo, hi))
}

pub fn sweep_config(
    settings: &Settings,
    file: &SweepSection,
    args: &crate::SweepArgs,
) -> SweepConfig {
    let defaults = SweepConfig::default();
    let (dim_min, dim_max) = args.dims.unwrap_or((
        file.dim_min.unwrap_or(defaults.dim_min),
        file.dim_max.unwrap_or(defaults.dim_max),
    ));
    SweepConfig {
        seed: settings.seed,
        count: args.count.or(file.count).unwrap_or(defaults.count),
        dim_min,
        dim_max,
        env_max: args.env_max.or(file.env_max).unwrap_or(defaults.env_max),
        nodes: settings.nodes,
        tolerance: settings.tolerance,
        record_timing: args.timing || file.record_timing.unwrap_or(false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dim_ranges() {
        assert_eq!(parse_dim_range("2..4"), Ok((2, 4)));
        assert_eq!(parse_dim_range("2..=5"), Ok((2, 5)));
        assert_eq!(parse_dim_range("3"), Ok((3, 3)));
        assert!(parse_dim_range("4..2").is_err());
        assert!(parse_dim_range("0..2").is_err());
        assert!(parse_dim_range("x").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<FileConfig>("sede = 3").is_err());
        let c: FileConfig = toml::from_str("seed = 3\n[sweep]\ncount = 4\n").unwrap();
        assert_eq!((c.seed, c.sweep.count), (Some(3), Some(4)));
    }
}
