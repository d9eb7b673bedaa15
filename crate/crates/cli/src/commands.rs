use std::fmt::Write as _;

use qrecover::channel::{random_channel, NamedChannel, QuantumChannel};
use qrecover::entropy::Unit;
use qrecover::io::{self, Instance, InstanceRecord, MatrixRecord, RecoveryRecord, StateRecord};
use qrecover::linalg::{ket, projector_onto, trace_re};
use qrecover::quadrature::{beta_theta, beta_theta_quadrature, beta0_quadrature};
use qrecover::random::split_seed;
use qrecover::recovery::PetzFactory;
use qrecover::state::{random_density, DensityOperator, StateEnsemble};
use qrecover::verify::report::{checks_table, format_number, sweep_table, CheckRow};
use qrecover::verify::{
    alpha_bound_check, codespace_samples, concavity_remainder, dpi_with_map,
    joint_convexity_remainder, qec_analyze, random_codespace, ssa_remainder, three_qubit_bit_flip,
    ORDERING_TOLERANCE,
};
use serde_json::json;

use crate::config::{sweep_config, Settings, SweepSection};
use crate::{
    CliError, CorollaryArgs, DpiArgs, Example, Produced, QecArgs, QecPreset, QuadratureArgs,
    RunReport, SsaArgs, SweepArgs,
};

const CLASSICAL_DEPOLARIZING: &str = include_str!("../data/classical_depolarizing.json");

fn to_value<T: serde::Serialize>(v: &T) -> Result<serde_json::Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Usage(format!("cannot encode report: {e}")))
}

fn fixed(x: f64) -> String {
    if x.is_finite() {
        let s = format!("{x:.6}");
        match s.strip_prefix('-') {
            Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
            _ => s,
        }
    } else {
        format_number(x)
    }
}

/// `label  value unit`, with `value` in nats converted to `unit`.
fn entropic_line(out: &mut String, label: &str, nats: f64, unit: Unit) {
    let v = unit.convert(nats);
    let _ = writeln!(out, "  {label:<24} {} {}", fixed(v), unit.label());
}

fn finish(
    command: &str,
    settings: &Settings,
    checks: Vec<CheckRow>,
    details: serde_json::Value,
    mut summary: String,
) -> Result<Produced, CliError> {
    let passed = checks.iter().all(|c| c.passed);
    let failed = checks.iter().filter(|c| !c.passed).count();
    if passed {
        let _ = writeln!(summary, "PASS: {} checks within tolerance {:e}", checks.len(), settings.tolerance);
    } else {
        let _ = writeln!(summary, "FAIL: {failed} of {} checks violated", checks.len());
        for c in checks.iter().filter(|c| !c.passed) {
            let _ = writeln!(summary, "  {} slack {}", c.name, format_number(c.slack));
        }
    }
    let table = checks_table(&checks, settings.unit);
    let report = RunReport {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: settings.seed,
        nodes: settings.nodes,
        tolerance: settings.tolerance,
        passed,
        checks,
        details,
    };
    Ok(Produced {
        json: io::to_json_pretty(&report)? + "\n",
        table,
        summary,
        passed,
    })
}

fn load_instance(settings: &Settings, args: &DpiArgs) -> Result<(Instance, String), CliError> {
    if let Some(path) = &args.instance {
        let rec: InstanceRecord = io::read_json(path)?;
        return Ok((rec.to_instance()?, path.display().to_string()));
    }
    if let Some(Example::ClassicalDepolarizing) = args.example {
        let rec: InstanceRecord = serde_json::from_str(CLASSICAL_DEPOLARIZING)
            .map_err(|e| CliError::Usage(format!("bundled example is corrupt: {e}")))?;
        return Ok((rec.to_instance()?, "classical-depolarizing".into()));
    }
    let s = settings.seed;
    let rho = random_density(args.dim_in, split_seed(s, 0), StateEnsemble::HilbertSchmidt)?;
    let sigma = random_density(args.dim_in, split_seed(s, 1), StateEnsemble::HilbertSchmidt)?.to_positive()?;
    let channel = random_channel(args.dim_in, args.dim_out, args.env, split_seed(s, 2))?;
    Ok((
        Instance { rho, sigma, channel },
        format!("random {} -> {}, env {}, seed {s}", args.dim_in, args.dim_out, args.env),
    ))
}

pub fn verify_dpi(settings: &Settings, args: &DpiArgs) -> Result<Produced, CliError> {
    let (inst, source) = load_instance(settings, args)?;
    let rule = beta0_quadrature(settings.nodes)?;
    let map = PetzFactory::new(&inst.sigma, &inst.channel)?.universal(&rule);
    let mut report = dpi_with_map(&inst.rho, &inst.sigma, &inst.channel, &map)?;
    if settings.renormalize {
        let m = report.recovered.to_operator()?;
        let tr = trace_re(&m);
        if tr > 0.0 {
            report.recovered = MatrixRecord::from_operator(&m.unscale(tr));
        }
    }
    if let Some(path) = &args.save_recovery {
        let rec = RecoveryRecord::new(&map, &inst.sigma, &inst.channel);
        crate::write_atomic(path, &(io::to_json_pretty(&rec)? + "\n"))?;
    }

    let tol = settings.tolerance;
    let lhs = report.lhs.value();
    let mut checks = vec![
        CheckRow::new("dpi-mixture", lhs, report.rhs_mixture, tol),
        CheckRow::new("dpi-strong", lhs, report.rhs_strong, tol),
        CheckRow::new("strong-vs-mixture", report.rhs_strong, report.rhs_mixture, ORDERING_TOLERANCE),
    ];
    let alpha_rows = if args.alpha.is_empty() {
        Vec::new()
    } else {
        alpha_bound_check(&inst.rho, &inst.sigma, &inst.channel, &args.alpha, settings.nodes, tol)?
    };
    for r in &alpha_rows {
        let mut row = CheckRow::new(format!("renyi-alpha-{}", r.alpha), r.renyi_delta.value(), r.rhs, tol);
        row.passed = r.passed;
        checks.push(row);
    }

    let u = settings.unit;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "verify-dpi: {source} ({} -> {}, {} Kraus operators, {} nodes)",
        inst.channel.dim_in(),
        inst.channel.dim_out(),
        inst.channel.env_dim(),
        settings.nodes
    );
    entropic_line(&mut s, "lhs", lhs, u);
    entropic_line(&mut s, "rhs (mixture)", report.rhs_mixture, u);
    entropic_line(&mut s, "rhs (strong)", report.rhs_strong, u);
    entropic_line(&mut s, "slack (mixture)", report.slack_mixture, u);
    entropic_line(&mut s, "slack (strong)", report.slack_strong, u);
    let _ = writeln!(s, "  {:<24} {}", "F(rho, R(N(rho)))", fixed(report.recovered_fidelity));
    entropic_line(&mut s, "D(rho||R(N(rho)))", report.exploratory_divergence.value(), u);
    for r in &alpha_rows {
        let _ = writeln!(
            s,
            "  alpha {}: delta {} rhs {} slack {}",
            r.alpha,
            fixed(r.renyi_delta.in_unit(u)),
            fixed(u.convert(r.rhs)),
            fixed(u.convert(r.slack))
        );
    }
    let details = json!({
        "source": source,
        "dpi": to_value(&report)?,
        "alpha": to_value(&alpha_rows)?,
    });
    finish("verify-dpi", settings, checks, details, s)
}

fn ghz() -> Result<DensityOperator, CliError> {
    let psi = (ket(8, 0) + ket(8, 7)).unscale(std::f64::consts::SQRT_2);
    Ok(DensityOperator::new(projector_onto(&psi))?)
}

pub fn verify_ssa(settings: &Settings, args: &SsaArgs) -> Result<Produced, CliError> {
    let dims = (args.dims[0], args.dims[1], args.dims[2]);
    let (rho, source) = if args.ghz {
        if dims != (2, 2, 2) {
            return Err(CliError::Usage("--ghz needs --dims 2,2,2".into()));
        }
        (ghz()?, "GHZ".to_string())
    } else if let Some(path) = &args.state {
        let rec: StateRecord = io::read_json(path)?;
        (rec.to_state()?, path.display().to_string())
    } else {
        let d = dims.0 * dims.1 * dims.2;
        let rho = random_density(d, split_seed(settings.seed, 0), StateEnsemble::HilbertSchmidt)?;
        (rho, format!("random, seed {}", settings.seed))
    };
    let rule = beta0_quadrature(settings.nodes)?;
    let r = ssa_remainder(&rho, dims, &rule)?;
    let tol = settings.tolerance;
    let checks = vec![
        CheckRow::new("ssa-mixture", r.cmi.value(), r.rhs_mixture, tol),
        CheckRow::new("ssa-strong", r.cmi.value(), r.rhs_strong, tol),
    ];
    let u = settings.unit;
    let mut s = String::new();
    let _ = writeln!(s, "verify-ssa: {source} (dims {}x{}x{})", dims.0, dims.1, dims.2);
    entropic_line(&mut s, "I(A:C|B)", r.cmi.value(), u);
    entropic_line(&mut s, "rhs (mixture)", r.rhs_mixture, u);
    entropic_line(&mut s, "rhs (strong)", r.rhs_strong, u);
    entropic_line(&mut s, "slack (mixture)", r.slack_mixture, u);
    let _ = writeln!(s, "  {:<24} {}", "recovered fidelity", fixed(r.recovered_fidelity));
    let details = json!({ "source": source, "dims": [dims.0, dims.1, dims.2], "ssa": to_value(&r)? });
    finish("verify-ssa", settings, checks, details, s)
}

pub fn verify_corollaries(settings: &Settings, args: &CorollaryArgs) -> Result<Produced, CliError> {
    if args.ensembles == 0 {
        return Err(CliError::Usage("--ensembles must be positive".into()));
    }
    let rule = beta0_quadrature(settings.nodes)?;
    let tol = settings.tolerance;
    let mut checks = Vec::new();
    let mut concavity = Vec::new();
    let mut convexity = Vec::new();
    for e in 0..args.ensembles {
        let seed = split_seed(settings.seed, e as u64);
        let size = 2 + e % 3;
        let weights = random_weights(size, seed);

        let mut ens = Vec::with_capacity(size);
        for (i, &w) in weights.iter().enumerate() {
            let rho = random_density(4, split_seed(seed, 2 * i as u64), StateEnsemble::HilbertSchmidt)?;
            ens.push((w, rho));
        }
        let c = concavity_remainder(&ens, (2, 2), &rule)?;
        checks.push(CheckRow::new(format!("concavity-{e}"), c.lhs, c.rhs, tol));
        concavity.push(c);

        let mut ens = Vec::with_capacity(size);
        for (i, &w) in weights.iter().enumerate() {
            let rho = random_density(3, split_seed(seed, 2 * i as u64 + 1), StateEnsemble::HilbertSchmidt)?;
            let sigma = random_density(3, split_seed(seed, 1000 + i as u64), StateEnsemble::HilbertSchmidt)?
                .to_positive()?;
            ens.push((w, rho, sigma));
        }
        let j = joint_convexity_remainder(&ens, &rule)?;
        checks.push(CheckRow::new(format!("joint-convexity-{e}"), j.lhs.value(), j.rhs, tol));
        convexity.push(j);
    }
    let u = settings.unit;
    let min_of = |pred: &str| {
        checks
            .iter()
            .filter(|c| c.name.starts_with(pred))
            .map(|c| c.slack)
            .fold(f64::INFINITY, f64::min)
    };
    let mut s = String::new();
    let _ = writeln!(s, "verify-corollaries: {} ensembles, seed {}", args.ensembles, settings.seed);
    entropic_line(&mut s, "min slack (concavity)", min_of("concavity"), u);
    entropic_line(&mut s, "min slack (joint conv.)", min_of("joint-convexity"), u);
    let details = json!({ "concavity": to_value(&concavity)?, "joint_convexity": to_value(&convexity)? });
    finish("verify-corollaries", settings, checks, details, s)
}

/// Probability vector from normalized uniform draws, bounded away from 0.
fn random_weights(n: usize, seed: u64) -> Vec<f64> {
    let d = random_density(n, seed ^ 0x5eed, StateEnsemble::HilbertSchmidt).expect("n >= 1");
    let raw: Vec<f64> = (0..n).map(|i| d.matrix()[(i, i)].re + 0.05).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

pub fn qec(settings: &Settings, args: &QecArgs) -> Result<Produced, CliError> {
    let s0 = settings.seed;
    let (code, channel, label): (_, QuantumChannel, String) = match args.preset {
        QecPreset::BitFlip => {
            let (code, ch) = three_qubit_bit_flip(args.p)?;
            (code, ch, format!("three-qubit bit flip, p = {}", args.p))
        }
        QecPreset::Depolarizing => {
            let code = random_codespace(args.dim, args.code_dim, split_seed(s0, 0))?;
            let ch = NamedChannel::Depolarizing { dim: args.dim, lambda: args.lambda }.build()?;
            (code, ch, format!("random [{}, {}] code, depolarizing lambda = {}", args.dim, args.code_dim, args.lambda))
        }
        QecPreset::Random => {
            let code = random_codespace(args.dim, args.code_dim, split_seed(s0, 0))?;
            let ch = random_channel(args.dim, args.dim, args.env, split_seed(s0, 1))?;
            (code, ch, format!("random [{}, {}] code, random channel, env {}", args.dim, args.code_dim, args.env))
        }
    };
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let samples = codespace_samples(&code, args.samples, split_seed(s0, 2))?;
    let rule = beta0_quadrature(settings.nodes)?;
    let tol = settings.tolerance;
    let r = qec_analyze(&code, &channel, &samples, &rule, tol)?;

    let mut checks = vec![CheckRow::unitless("qec-forward", r.min_recovered_fidelity, r.forward_bound, tol)];
    if let Some(b) = r.converse_bound {
        checks.push(CheckRow::new("qec-converse", b, r.sampled_max_gap, tol));
    }
    let u = settings.unit;
    let mut s = String::new();
    let _ = writeln!(s, "qec: {label}, {} samples", args.samples);
    entropic_line(&mut s, "max entropy gap", r.sampled_max_gap, u);
    let _ = writeln!(s, "  {:<24} {}", "min fidelity", fixed(r.min_recovered_fidelity));
    let _ = writeln!(s, "  {:<24} {}", "forward bound", fixed(r.forward_bound));
    match r.converse_bound {
        Some(b) => entropic_line(&mut s, "converse bound", b, u),
        None => {
            let _ = writeln!(s, "  converse bound not applicable (epsilon' = {} > 1)", fixed(r.epsilon_prime));
        }
    }
    let details = json!({ "code": label, "qec": to_value(&r)? });
    finish("qec", settings, checks, details, s)
}

pub fn sweep(settings: &Settings, file: &SweepSection, args: &SweepArgs) -> Result<Produced, CliError> {
    let config = sweep_config(settings, file, args);
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let report = qrecover::verify::sweep(&config)?;
    let m = &report.summary;
    let u = settings.unit;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "sweep: {} instances, dims {}..={}, env <= {}, seed {}",
        m.count, config.dim_min, config.dim_max, config.env_max, config.seed
    );
    if let (Some(min), Some(mean)) = (m.min_slack_mixture, m.mean_slack_mixture) {
        entropic_line(&mut s, "min slack (mixture)", min, u);
        entropic_line(&mut s, "mean slack (mixture)", mean, u);
    }
    if let Some(min) = m.min_slack_strong {
        entropic_line(&mut s, "min slack (strong)", min, u);
    }
    let _ = writeln!(
        s,
        "  failures {}, ordering violations {}, equality-case violations {}, regenerated sigmas {}",
        m.failures, m.ordering_violations, m.equality_case_violations, m.regenerations
    );
    let passed = report.passed();
    let _ = writeln!(s, "{}", if passed { "PASS" } else { "FAIL" });
    Ok(Produced {
        json: io::to_json_pretty(&report)? + "\n",
        table: sweep_table(&report, u),
        summary: s,
        passed,
    })
}

pub fn quadrature_info(settings: &Settings, args: &QuadratureArgs) -> Result<Produced, CliError> {
    let rule = if args.theta == 0.0 {
        beta0_quadrature(settings.nodes)?
    } else {
        beta_theta_quadrature(args.theta, settings.nodes)?
    };
    let mut table = String::from("index\tnode\tweight\tdensity\n");
    for (i, (t, w)) in rule.iter().enumerate() {
        let density = beta_theta(args.theta, t)?;
        let _ = writeln!(table, "{i}\t{}\t{}\t{}", format_number(t), format_number(w), format_number(density));
    }
    let sum = rule.weight_sum();
    let mut s = table.clone();
    let _ = writeln!(s, "theta {}, {} nodes, weight sum {}", args.theta, rule.len(), format_number(sum));
    let checks = vec![CheckRow::unitless("weight-sum", sum, 1.0, 1e-12), CheckRow::unitless("weight-sum-upper", 1.0, sum, 1e-12)];
    let details = json!({ "theta": args.theta, "nodes": rule.nodes, "weights": rule.weights });
    let mut produced = finish("quadrature-info", settings, checks, details, s)?;
    produced.table = table;
    Ok(produced)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_example_parses() {
        let rec: InstanceRecord = serde_json::from_str(CLASSICAL_DEPOLARIZING).unwrap();
        let inst = rec.to_instance().unwrap();
        assert_eq!(inst.channel.dim_in(), 2);
    }

    #[test]
    fn weights_form_a_distribution() {
        let w = random_weights(4, 9);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(w.iter().all(|&x| x > 0.0));
    }
}
