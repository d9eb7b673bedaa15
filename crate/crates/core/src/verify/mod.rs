//! The inequality harness.
//!
//! Each check evaluates both sides of an inequality and reports the slack,
//! left side minus right side, which the theorems guarantee to be
//! nonnegative up to rounding.

mod alpha;
mod corollaries;
mod dpi;
mod qec;
pub mod report;
mod search;
mod sweep;
mod truncation;

pub use alpha::{alpha_bound_check, AlphaBoundRow};
pub use corollaries::{
    concavity_remainder, joint_convexity_remainder, ssa_remainder, ConcavityReport,
    JointConvexityReport, SsaReport,
};
pub use dpi::{dpi_remainder, dpi_with_map, DpiReport, NodeFidelity};
pub use qec::{
    codespace_samples, qec_analyze, random_codespace, three_qubit_bit_flip, QecReport, QecSample,
};
pub use search::{finite_set_recovery_search, SearchResult, SearchStateRow};
pub use sweep::{generate_instance, sweep, SweepConfig, SweepInstance, SweepReport, SweepRow, SweepSummary};
pub use truncation::{truncation_convergence, ConvergenceReport, TruncationRow};

/// Default slack tolerance for the data-processing family of checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
/// Allowed violation of `rhs_strong ≥ rhs_mixture`.
pub const ORDERING_TOLERANCE: f64 = 1e-9;

/// Serde adapter for `f64` values that may be `±∞` (written as strings).
pub mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_infinite() {
            s.serialize_str(if *x > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(*x)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(x),
            Raw::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Raw::Str(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("bad number {s:?}"))),
        }
    }

    /// The same for `Option<f64>`.
    pub mod option {
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        #[derive(Serialize, Deserialize)]
        struct Wrap(#[serde(with = "super")] f64);

        pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            x.map(Wrap).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
        }
    }
}

/// `−2 ln F`, which is `+∞` at `F = 0`.
pub(crate) fn neg_two_log(f: f64) -> f64 {
    if f <= 0.0 {
        f64::INFINITY
    } else {
        -2.0 * f.ln()
    }
}

/// `lhs − rhs` with `∞ − finite = ∞`.
pub(crate) fn slack(lhs: f64, rhs: f64) -> f64 {
    if lhs.is_infinite() && lhs > 0.0 {
        f64::INFINITY
    } else {
        lhs - rhs
    }
}

pub(crate) fn check_simplex(weights: &[f64]) -> crate::Result<()> {
    if weights.is_empty() {
        return Err(crate::Error::domain("ensemble is empty"));
    }
    if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
        return Err(crate::Error::domain("ensemble weights must be nonnegative"));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(crate::Error::domain(format!("ensemble weights sum to {sum}")));
    }
    Ok(())
}
