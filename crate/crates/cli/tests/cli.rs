use std::path::Path;
use std::process::{Command, Output};

fn kamtree(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kamtree"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn json(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&read(dir, name)).unwrap()
}

/// Data rows of a report CSV, skipping the config comment line.
fn csv_rows(dir: &Path, name: &str) -> Vec<csv::StringRecord> {
    let text = read(dir, name);
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    r.records().map(|x| x.unwrap()).collect()
}

#[test]
fn betaseq_reports_fix_a_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = kamtree(dir.path(), &["betaseq"]);
    assert!(out.status.success());
    let text = read(dir.path(), "betaseq.csv");
    assert!(text.starts_with("# config: {"));
    assert!(text.lines().nth(1).unwrap() == "m,two_pow_m,beta,witness_mode");
    let rows = csv_rows(dir.path(), "betaseq.csv");
    assert_eq!(rows.len(), 11);
    assert_eq!(rows[0][2].parse::<f64>().unwrap(), 1.0);
    let b1: f64 = rows[1][2].parse().unwrap();
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    assert!((b1 - (golden - 2f64.sqrt())).abs() < 1e-12);
    assert_eq!(
        json(dir.path(), "scales.json")["ms"],
        serde_json::json!([0, 1, 3, 5, 7, 10])
    );
}

#[test]
fn reports_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for cmd in ["synthesize", "measure", "cancel"] {
        assert!(
            kamtree(a.path(), &[cmd, "--set", "samples=256", "--k", "5"])
                .status
                .success()
        );
        assert!(
            kamtree(b.path(), &[cmd, "--set", "samples=256", "--k", "5"])
                .status
                .success()
        );
    }
    for name in [
        "synthesize.json",
        "coefficients.csv",
        "measure.json",
        "cancel.csv",
    ] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"k": 3, "s2": 0.1}"#).unwrap();
    let cfg = cfg.to_str().unwrap();
    assert!(kamtree(dir.path(), &["expand", "--config", cfg])
        .status
        .success());
    let e = json(dir.path(), "expand.json");
    assert_eq!(e["K"], 3);
    assert_eq!(e["config"]["s2"], 0.1);
    assert!(
        kamtree(dir.path(), &["expand", "--config", cfg, "--k", "2"])
            .status
            .success()
    );
    assert_eq!(json(dir.path(), "expand.json")["K"], 2);
    let rows = csv_rows(dir.path(), "coefficients.csv");
    assert!(rows.iter().all(|r| r[0].parse::<usize>().unwrap() <= 2));
}

#[test]
fn potential_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let pot = dir.path().join("f.txt");
    std::fs::write(&pot, "# one harmonic\ncos: 0 -> 1\n").unwrap();
    let arg = format!(r#"potential={{"kind":"file","path":"{}"}}"#, pot.display());
    assert!(kamtree(dir.path(), &["expand", "--set", &arg, "--k", "1"])
        .status
        .success());
    let rows = csv_rows(dir.path(), "coefficients.csv");
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert_eq!(&r[2], "0");
        assert_eq!(r[4].parse::<f64>().unwrap().abs(), 0.5);
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let code = |args: &[&str]| kamtree(&out, args).status.code().unwrap();
    assert_eq!(code(&["expand", "--set", "s2=0.9"]), 2);
    assert_eq!(code(&["expand", "--set", "nonsense=1"]), 2);
    assert_eq!(code(&["expand", "--config", "/nonexistent.json"]), 2);
    assert_eq!(
        code(&[
            "betaseq",
            "--set",
            r#"frequency={"kind":"explicit","values":[1,1,2]}"#
        ]),
        3
    );
    assert_eq!(code(&["trees", "--set", "tree_cap=10"]), 4);
    assert!(!out.exists(), "failed runs must not write reports");
}

#[test]
fn tree_dump_lists_every_labelled_tree() {
    let dir = tempfile::tempdir().unwrap();
    assert!(kamtree(
        dir.path(),
        &[
            "trees",
            "--dump",
            "--set",
            "dump_k=2",
            "--set",
            "tree_k=3",
            "--set",
            "counting_k=2"
        ]
    )
    .status
    .success());
    let rows = csv_rows(dir.path(), "trees_dump.csv");
    assert_eq!(rows.len(), 16);
    assert!(rows.iter().all(|r| &r[0] == "(())"));
    let t = json(dir.path(), "trees.json");
    assert!(t["relative_difference"]
        .as_array()
        .unwrap()
        .iter()
        .all(|x| x.as_f64().unwrap() <= 1e-10));
}

#[test]
fn measure_report_fields() {
    let dir = tempfile::tempdir().unwrap();
    assert!(kamtree(dir.path(), &["measure", "--set", "samples=128"])
        .status
        .success());
    let m = json(dir.path(), "measure.json");
    for key in [
        "gamma", "mu1", "mu2", "q", "rho", "N", "samples", "seed", "fraction",
    ] {
        assert!(m.get(key).is_some(), "{key}");
    }
    assert_eq!(m["samples"], 128);
}

#[test]
fn thresholds_report() {
    let dir = tempfile::tempdir().unwrap();
    assert!(kamtree(dir.path(), &["thresholds"]).status.success());
    let t = json(dir.path(), "thresholds.json");
    assert_eq!(t["eps2_over_eps1"].as_f64().unwrap(), 1.0 / 9.0);
    assert_eq!(t["omega_diophantine"], true);
    assert!(t["ln_eps1"].as_f64().unwrap() < t["scaled"]["ln_eps1"].as_f64().unwrap());
}

#[test]
fn validate_reports_small_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = kamtree(
        dir.path(),
        &[
            "validate",
            "--epsilon",
            "0",
            "--epsilon",
            "0.001",
            "--set",
            "t_end=10",
        ],
    );
    assert!(out.status.success());
    let runs = json(dir.path(), "validate.json")["runs"]
        .as_array()
        .unwrap()
        .clone();
    assert_eq!(runs.len(), 2);
    assert!(runs[0]["sup_error"].as_f64().unwrap() <= 1e-10);
    assert!(runs[1]["sup_error"].as_f64().unwrap() <= 1e-6);
    assert_eq!(csv_rows(dir.path(), "validate_1.csv").len(), 101);
}

#[test]
fn all_passes_on_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = kamtree(dir.path(), &["all"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS ")).count(), 7);
    let checks = json(dir.path(), "acceptance.json")["checks"]
        .as_array()
        .unwrap()
        .clone();
    assert!(checks.iter().all(|c| c["passed"] == true));
}
