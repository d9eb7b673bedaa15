use std::path::Path;
use std::process::{Command, Output};

use qrecover::io::RecoveryRecord;
use qrecover::verify::SweepReport;
use qrecover_cli::RunReport;

fn qrecover(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrecover"))
        .args(args)
        .env_remove("QRECOVER_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn tsv_column(table: &str, name: &str) -> Vec<String> {
    let mut lines = table.lines();
    let header: Vec<&str> = lines.next().unwrap().split('\t').collect();
    let idx = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split('\t').nth(idx).unwrap().to_string()).collect()
}

#[test]
fn quadrature_weights_sum_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = qrecover(&["quadrature-info", "--nodes", "65", "--output", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let report: RunReport = serde_json::from_str(&read(&dir.path().join("quadrature-info.json"))).unwrap();
    let weights: Vec<f64> = serde_json::from_value(report.details["weights"].clone()).unwrap();
    assert_eq!(weights.len(), 65);
    assert!((weights.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    let table = read(&dir.path().join("quadrature-info.tsv"));
    let sum: f64 = tsv_column(&table, "weight").iter().map(|w| w.parse::<f64>().unwrap()).sum();
    assert!((sum - 1.0).abs() <= 1e-10);
}

#[test]
fn bundled_example_matches_closed_form() {
    let o = qrecover(&["verify-dpi", "--example", "classical-depolarizing"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("0.143841"), "{s}");
    assert!(s.contains("0.069336"), "{s}");
}

#[test]
fn sweep_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = qrecover(&["sweep", "--seed", "7", "--count", "10", "--dims", "2..4", "--output", d.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    }
    for f in ["sweep.json", "sweep.tsv"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f} differs"
        );
    }
    let report: SweepReport = serde_json::from_str(&read(&a.path().join("sweep.json"))).unwrap();
    assert_eq!(report.rows.len(), 10);
    assert!(report.rows.iter().all(|r| r.wall_time_ms.is_none()));
    assert!(!read(&a.path().join("sweep.tsv")).contains("wall_time"));
}

#[test]
fn empty_sweep_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let o = qrecover(&["sweep", "--count", "0", "--output", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let table = read(&dir.path().join("sweep.tsv"));
    assert_eq!(table.lines().count(), 1);
    assert!(table.starts_with("index\tseed\t"));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(qrecover(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(qrecover(&["verify-dpi", "--unit", "furlongs"]).status.code(), Some(2));
    assert_eq!(qrecover(&["sweep", "--dims", "5..2"]).status.code(), Some(2));
    assert_eq!(qrecover(&["quadrature-info", "--nodes", "1"]).status.code(), Some(2));
    assert_eq!(qrecover(&["verify-dpi", "--alpha", "1.5"]).status.code(), Some(2));
    assert_eq!(qrecover(&["--help"]).status.code(), Some(0));
}

#[test]
fn bad_config_and_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "sede = 3\n").unwrap();
    assert_eq!(qrecover(&["--config", cfg.to_str().unwrap(), "quadrature-info"]).status.code(), Some(2));

    let missing = dir.path().join("missing.json");
    let o = qrecover(&["verify-dpi", "--instance", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));

    let bad = dir.path().join("bad.json");
    let text = include_str!("../data/classical_depolarizing.json").replace("[0.75, 0.0]", "[-0.75, 0.0]");
    std::fs::write(&bad, text).unwrap();
    let o = qrecover(&["verify-dpi", "--instance", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("positive"));
}

#[test]
fn unwritable_output_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let out = blocker.join("reports");
    let o = qrecover(&["quadrature-info", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("q.toml");
    let out = dir.path().join("from-config");
    std::fs::write(
        &cfg,
        format!("seed = 5\nnodes = 17\nunit = \"bits\"\noutput = {:?}\n", out.to_str().unwrap()),
    )
    .unwrap();
    let o = qrecover(&["--config", cfg.to_str().unwrap(), "verify-dpi", "--seed", "9"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("bits"));
    let report: RunReport = serde_json::from_str(&read(&out.join("verify-dpi.json"))).unwrap();
    assert_eq!((report.seed, report.nodes), (9, 17));
    assert_eq!(tsv_column(&read(&out.join("verify-dpi.tsv")), "unit")[0], "bits");

    let flag_out = dir.path().join("from-flag");
    let o = qrecover(&["--config", cfg.to_str().unwrap(), "--output", flag_out.to_str().unwrap(), "quadrature-info"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(flag_out.join("quadrature-info.json").exists());
    assert!(!out.join("quadrature-info.json").exists());
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_qrecover"))
        .args(["quadrature-info", "--nodes", "9"])
        .env("QRECOVER_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("quadrature-info.tsv").exists());
}

#[test]
fn bits_are_nats_over_ln2() {
    let dir = tempfile::tempdir().unwrap();
    let tables: Vec<String> = ["nats", "bits"]
        .iter()
        .map(|u| {
            let out = dir.path().join(u);
            let o = qrecover(&["verify-dpi", "--seed", "2", "--unit", u, "--output", out.to_str().unwrap()]);
            assert_eq!(o.status.code(), Some(0));
            read(&out.join("verify-dpi.tsv"))
        })
        .collect();
    for col in ["lhs", "rhs", "slack"] {
        let nats = tsv_column(&tables[0], col);
        let bits = tsv_column(&tables[1], col);
        for (n, b) in nats.iter().zip(&bits) {
            let (n, b): (f64, f64) = (n.parse().unwrap(), b.parse().unwrap());
            assert!((b - n / std::f64::consts::LN_2).abs() <= 1e-10 * (1.0 + n.abs()), "{col}: {n} vs {b}");
        }
    }
    let j0 = read(&dir.path().join("nats/verify-dpi.json"));
    let j1 = read(&dir.path().join("bits/verify-dpi.json"));
    assert_eq!(j0, j1, "structured output is always in nats");
}

#[test]
fn reports_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for args in [
        vec!["verify-dpi", "--seed", "4", "--alpha", "0.5,0.8"],
        vec!["verify-ssa", "--seed", "4"],
        vec!["verify-corollaries", "--ensembles", "2"],
        vec!["qec", "--preset", "depolarizing"],
    ] {
        let mut full = args.clone();
        full.extend(["--output", out]);
        let o = qrecover(&full);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stdout(&o));
        let text = read(&dir.path().join(format!("{}.json", args[0])));
        let report: RunReport = serde_json::from_str(&text).unwrap();
        assert!(report.passed);
        assert_eq!(qrecover::io::to_json_pretty(&report).unwrap() + "\n", text);
    }
    let o = qrecover(&["sweep", "--count", "3", "--output", out]);
    assert_eq!(o.status.code(), Some(0));
    let text = read(&dir.path().join("sweep.json"));
    let report: SweepReport = serde_json::from_str(&text).unwrap();
    assert_eq!(qrecover::io::to_json_pretty(&report).unwrap() + "\n", text);
}

#[test]
fn renormalize_leaves_bounds_alone() {
    let dir = tempfile::tempdir().unwrap();
    let plain = dir.path().join("plain");
    let renorm = dir.path().join("renorm");
    for (out, extra) in [(&plain, None), (&renorm, Some("--renormalize"))] {
        let mut args = vec!["verify-dpi", "--seed", "11", "--dim-in", "4", "--dim-out", "2", "--output", out.to_str().unwrap()];
        args.extend(extra);
        assert_eq!(qrecover(&args).status.code(), Some(0));
    }
    assert_eq!(read(&plain.join("verify-dpi.tsv")), read(&renorm.join("verify-dpi.tsv")));
    let a: RunReport = serde_json::from_str(&read(&plain.join("verify-dpi.json"))).unwrap();
    let b: RunReport = serde_json::from_str(&read(&renorm.join("verify-dpi.json"))).unwrap();
    assert_eq!(a.checks, b.checks);
}

#[test]
fn ghz_is_an_equality_case() {
    let dir = tempfile::tempdir().unwrap();
    let o = qrecover(&["verify-ssa", "--ghz", "--output", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let report: RunReport = serde_json::from_str(&read(&dir.path().join("verify-ssa.json"))).unwrap();
    let row = &report.checks[0];
    assert!((row.lhs - std::f64::consts::LN_2).abs() <= 1e-9);
    assert!(row.slack.abs() <= 1e-8);
}

#[test]
fn saved_recovery_map_is_readable() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("map.json");
    let o = qrecover(&["verify-dpi", "--seed", "1", "--nodes", "9", "--save-recovery", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let rec: RecoveryRecord = serde_json::from_str(&read(&path)).unwrap();
    let map = rec.map.to_channel().unwrap();
    assert_eq!((map.dim_in(), map.dim_out()), (2, 3));
}
