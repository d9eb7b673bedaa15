//! Tab-separated tables for reports. Numbers carry 12 significant digits;
//! infinities are written `inf`.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{extended_f64, SweepReport};
use crate::entropy::Unit;

pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.11e}")
    }
}

/// One inequality check and its verdict. Entropic rows are stored in nats
/// and converted on output; the others (fidelities) are unitless.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub entropic: bool,
    #[serde(with = "extended_f64")]
    pub lhs: f64,
    #[serde(with = "extended_f64")]
    pub rhs: f64,
    #[serde(with = "extended_f64")]
    pub slack: f64,
    pub passed: bool,
}

impl CheckRow {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::build(name.into(), true, lhs, rhs, tolerance)
    }

    pub fn unitless(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::build(name.into(), false, lhs, rhs, tolerance)
    }

    fn build(name: String, entropic: bool, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let slack = super::slack(lhs, rhs);
        Self {
            name,
            entropic,
            lhs,
            rhs,
            slack,
            passed: slack >= -tolerance,
        }
    }
}

pub fn checks_table(rows: &[CheckRow], unit: Unit) -> String {
    let mut out = String::from("check\tunit\tlhs\trhs\tslack\tpassed\n");
    for r in rows {
        let (label, conv): (&str, &dyn Fn(f64) -> f64) = if r.entropic {
            (unit.label(), &|x| unit.convert(x))
        } else {
            ("1", &|x| x)
        };
        let _ = writeln!(
            out,
            "{}\t{label}\t{}\t{}\t{}\t{}",
            r.name,
            format_number(conv(r.lhs)),
            format_number(conv(r.rhs)),
            format_number(conv(r.slack)),
            r.passed
        );
    }
    out
}

pub fn sweep_table(report: &SweepReport, unit: Unit) -> String {
    let u = unit.label();
    let timing = report.config.record_timing;
    let mut out = format!(
        "index\tseed\tdim_in\tdim_out\tenv_dim\tlhs_{u}\trhs_strong_{u}\trhs_mixture_{u}\tslack_mixture_{u}\tslack_strong_{u}"
    );
    if timing {
        out.push_str("\twall_time_ms");
    }
    out.push('\n');
    for r in &report.rows {
        let _ = write!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.index,
            r.seed,
            r.dim_in,
            r.dim_out,
            r.env_dim,
            format_number(r.lhs.in_unit(unit)),
            format_number(unit.convert(r.rhs_strong)),
            format_number(unit.convert(r.rhs_mixture)),
            format_number(unit.convert(r.slack_mixture)),
            format_number(unit.convert(r.slack_strong)),
        );
        if timing {
            let _ = write!(out, "\t{}", r.wall_time_ms.map_or("nan".into(), format_number));
        }
        out.push('\n');
    }
    out
}
