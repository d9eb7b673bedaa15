//! JSON file formats for states, channels, instances and recovery maps.
//!
//! Matrices are stored as `rows`, `cols` and row-major `[re, im]` pairs.
//! Floats are written in shortest round-trip form, so parsing a written
//! file reproduces every entry exactly.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{CompletenessMode, QuantumChannel};
use crate::error::{Error, Result};
use crate::linalg::Operator;
use crate::recovery::{RecoveryKind, RecoveryMap};
use crate::state::{DensityOperator, PositiveOperator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixRecord {
    pub fn from_operator(m: &Operator) -> Self {
        let mut entries = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            entries,
        }
    }

    pub fn to_operator(&self) -> Result<Operator> {
        if self.entries.len() != self.rows * self.cols {
            return Err(Error::Parse {
                what: "matrix",
                message: format!(
                    "{}x{} matrix needs {} entries, found {}",
                    self.rows,
                    self.cols,
                    self.rows * self.cols,
                    self.entries.len()
                ),
            });
        }
        Ok(Operator::from_row_iterator(
            self.rows,
            self.cols,
            self.entries.iter().map(|[re, im]| Complex64::new(*re, *im)),
        ))
    }

    /// SHA-256 of the little-endian bytes of the shape and entries.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.rows as u64).to_le_bytes());
        h.update((self.cols as u64).to_le_bytes());
        for [re, im] in &self.entries {
            h.update(re.to_le_bytes());
            h.update(im.to_le_bytes());
        }
        hex(&h.finalize())
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn operator_fingerprint(m: &Operator) -> String {
    MatrixRecord::from_operator(m).fingerprint()
}

pub fn kraus_fingerprint(kraus: &[Operator]) -> String {
    let mut h = Sha256::new();
    for k in kraus {
        h.update(operator_fingerprint(k).as_bytes());
    }
    hex(&h.finalize())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
    #[serde(default)]
    pub subnormalized: bool,
}

impl StateRecord {
    pub fn from_state(rho: &DensityOperator) -> Self {
        let m = MatrixRecord::from_operator(rho.matrix());
        Self {
            dim: m.rows,
            entries: m.entries,
            subnormalized: rho.is_subnormalized(),
        }
    }

    fn matrix(&self) -> Result<Operator> {
        MatrixRecord {
            rows: self.dim,
            cols: self.dim,
            entries: self.entries.clone(),
        }
        .to_operator()
    }

    pub fn to_state(&self) -> Result<DensityOperator> {
        let m = self.matrix()?;
        if self.subnormalized {
            DensityOperator::subnormalized(m)
        } else {
            DensityOperator::new(m)
        }
    }

    pub fn to_positive(&self) -> Result<PositiveOperator> {
        PositiveOperator::new(self.matrix()?)
    }

    pub fn from_positive(p: &PositiveOperator) -> Self {
        let m = MatrixRecord::from_operator(p.matrix());
        Self {
            dim: m.rows,
            entries: m.entries,
            subnormalized: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRecord {
    pub dim_in: usize,
    pub dim_out: usize,
    pub mode: CompletenessMode,
    /// Row-major `dim_out × dim_in` blocks.
    pub kraus: Vec<Vec<[f64; 2]>>,
}

impl ChannelRecord {
    pub fn from_channel(ch: &QuantumChannel) -> Self {
        Self::from_kraus(ch.kraus(), ch.dim_in(), ch.dim_out(), ch.mode())
    }

    fn from_kraus(kraus: &[Operator], dim_in: usize, dim_out: usize, mode: CompletenessMode) -> Self {
        Self {
            dim_in,
            dim_out,
            mode,
            kraus: kraus
                .iter()
                .map(|k| MatrixRecord::from_operator(k).entries)
                .collect(),
        }
    }

    fn operators(&self) -> Result<Vec<Operator>> {
        self.kraus
            .iter()
            .map(|entries| {
                MatrixRecord {
                    rows: self.dim_out,
                    cols: self.dim_in,
                    entries: entries.clone(),
                }
                .to_operator()
            })
            .collect()
    }

    pub fn to_channel(&self) -> Result<QuantumChannel> {
        QuantumChannel::new(self.operators()?, self.mode)
    }

    pub fn fingerprint(&self) -> Result<String> {
        Ok(kraus_fingerprint(&self.operators()?))
    }
}

/// A data-processing instance: `ρ`, `σ` and a channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    #[serde(default)]
    pub description: Option<String>,
    pub rho: StateRecord,
    pub sigma: StateRecord,
    pub channel: ChannelRecord,
}

pub struct Instance {
    pub rho: DensityOperator,
    pub sigma: PositiveOperator,
    pub channel: QuantumChannel,
}

impl InstanceRecord {
    pub fn to_instance(&self) -> Result<Instance> {
        let inst = Instance {
            rho: self.rho.to_state()?,
            sigma: self.sigma.to_positive()?,
            channel: self.channel.to_channel()?,
        };
        if inst.rho.dim() != inst.channel.dim_in() || inst.sigma.dim() != inst.channel.dim_in() {
            return Err(Error::DimensionMismatch {
                context: "instance file",
                expected: inst.channel.dim_in(),
                found: inst.rho.dim(),
            });
        }
        Ok(inst)
    }
}

/// Recovery map file: the channel format plus provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryRecord {
    pub kind: RecoveryKind,
    pub sigma_hash: String,
    pub channel_hash: String,
    pub map: ChannelRecord,
}

impl RecoveryRecord {
    pub fn new(map: &RecoveryMap, sigma: &PositiveOperator, channel: &QuantumChannel) -> Self {
        Self {
            kind: map.kind().clone(),
            sigma_hash: operator_fingerprint(sigma.matrix()),
            channel_hash: kraus_fingerprint(channel.kraus()),
            map: ChannelRecord::from_kraus(
                map.kraus(),
                map.dim_in(),
                map.dim_out(),
                CompletenessMode::TraceNonIncreasing,
            ),
        }
    }

    /// Hash of the realized Kraus list.
    pub fn fingerprint(&self) -> Result<String> {
        self.map.fingerprint()
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        what: "JSON document",
        message: format!("{}: {e}", path.display()),
    })
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Parse {
        what: "JSON document",
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::random_channel;
    use crate::recovery::petz;
    use crate::state::{random_density, StateEnsemble};

    #[test]
    fn state_round_trip_is_exact() {
        let rho = random_density(4, 3, StateEnsemble::HilbertSchmidt).unwrap();
        let text = serde_json::to_string(&StateRecord::from_state(&rho)).unwrap();
        let back: StateRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_state().unwrap(), rho);
    }

    #[test]
    fn channel_round_trip_is_exact() {
        let ch = random_channel(3, 2, 2, 9).unwrap();
        let text = serde_json::to_string(&ChannelRecord::from_channel(&ch)).unwrap();
        let back: ChannelRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_channel().unwrap(), ch);
    }

    #[test]
    fn recovery_record_hashes_are_stable() {
        let sigma = random_density(3, 1, StateEnsemble::HilbertSchmidt).unwrap().to_positive().unwrap();
        let ch = random_channel(3, 3, 2, 2).unwrap();
        let p = petz(&sigma, &ch).unwrap();
        let a = RecoveryRecord::new(&p, &sigma, &ch);
        let b = RecoveryRecord::new(&petz(&sigma, &ch).unwrap(), &sigma, &ch);
        assert_eq!(a, b);
        assert_eq!(a.sigma_hash.len(), 64);
        let text = serde_json::to_string(&a).unwrap();
        let back: RecoveryRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn malformed_matrix_is_rejected() {
        let m = MatrixRecord {
            rows: 2,
            cols: 2,
            entries: vec![[1.0, 0.0]],
        };
        assert!(matches!(m.to_operator(), Err(Error::Parse { .. })));
    }
}
