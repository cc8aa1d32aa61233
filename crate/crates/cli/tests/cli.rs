//! End-to-end tests of the command-line binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_auctionkit"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().expect("binary runs")
}

fn run_ok(args: &[&str], dir: &Path) {
    let out = run(args, dir);
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
}

fn run_err(args: &[&str], dir: &Path) -> String {
    let out = run(args, dir);
    assert!(!out.status.success(), "command {args:?} unexpectedly succeeded");
    let stderr = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(stderr.starts_with("error: "), "stderr must start with `error: `, got {stderr:?}");
    assert_eq!(stderr.trim_end().lines().count(), 1, "error output must be one line: {stderr:?}");
    stderr
}

const TRUTHFUL_VCG: &str = r#"
mechanism = "vcg"
rounds = 100
seed = 1

[[agents]]
kind = "truthful-noisy"
value = 21

[[agents]]
kind = "truthful-noisy"
value = 27

[[agents]]
kind = "truthful-noisy"
value = 33

[[agents]]
kind = "truthful-noisy"
value = 39

[[agents]]
kind = "truthful-noisy"
value = 45
"#;

fn estimates_of(path: &Path) -> Vec<f64> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn truthful_session_avg_bid_recovers_values_exactly() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("session.toml"), TRUTHFUL_VCG).unwrap();
    run_ok(&["simulate", "--config", "session.toml", "--out-dir", "run"], dir.path());
    run_ok(
        &[
            "estimate",
            "--bids",
            "run/bids.csv",
            "--mechanism",
            "vcg",
            "--method",
            "avg-bid",
            "--out",
            "est.csv",
        ],
        dir.path(),
    );
    assert_eq!(estimates_of(&dir.path().join("est.csv")), vec![21.0, 27.0, 33.0, 39.0, 45.0]);
}

#[test]
fn same_seed_twice_is_byte_identical() {
    // Identical relative paths in two directories, so even the embedded
    // manifests match byte for byte.
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [dir_a.path(), dir_b.path()] {
        fs::write(dir.join("session.toml"), TRUTHFUL_VCG).unwrap();
        run_ok(&["simulate", "--config", "session.toml", "--out-dir", "run", "--seed", "5"], dir);
    }
    for name in ["bids.csv", "values.csv", "outcomes.csv"] {
        let a = fs::read(dir_a.path().join("run").join(name)).unwrap();
        let b = fs::read(dir_b.path().join("run").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical seeds");
    }
}

#[test]
fn env_seed_is_recorded_in_manifest() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("session.toml"), TRUTHFUL_VCG).unwrap();
    let out = bin()
        .args(["simulate", "--config", "session.toml", "--out-dir", "run"])
        .env("AUCTIONKIT_SEED", "4242")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let first = fs::read_to_string(dir.path().join("run/bids.csv")).unwrap();
    let first = first.lines().next().unwrap().to_string();
    assert!(first.contains("\"4242\""), "manifest must record the env seed: {first}");
}

#[test]
fn explicit_seed_beats_env_seed() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("session.toml"), TRUTHFUL_VCG).unwrap();
    let out = bin()
        .args(["simulate", "--config", "session.toml", "--out-dir", "run", "--seed", "7"])
        .env("AUCTIONKIT_SEED", "4242")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let first = fs::read_to_string(dir.path().join("run/bids.csv")).unwrap();
    assert!(first.lines().next().unwrap().contains("\"7\""));
}

#[test]
fn equilibrium_log_yields_vcg_ne_values() {
    let dir = tempfile::tempdir().unwrap();
    // Bids whose interior value chain is exactly (39, 33, 27, 21).
    let bids = [
        30.0,
        28.421052631578949,
        25.137931034482758,
        21.6,
        17.181818181818183,
    ];
    let mut log = String::from("auction_index,bidder_id,bid\n");
    for t in 1..=20 {
        for (i, b) in bids.iter().enumerate() {
            log.push_str(&format!("{t},{},{b:.12}\n", i + 1));
        }
    }
    fs::write(dir.path().join("bids.csv"), log).unwrap();
    run_ok(
        &[
            "estimate",
            "--bids",
            "bids.csv",
            "--method",
            "vcg-ne",
            "--out",
            "est.csv",
            "--out-deviations",
            "dev.csv",
        ],
        dir.path(),
    );
    let est = estimates_of(&dir.path().join("est.csv"));
    for (got, want) in est.iter().zip([39.0, 39.0, 33.0, 27.0, 21.0]) {
        assert!((got - want).abs() < 1e-6, "got {est:?}");
    }
    let dev = fs::read_to_string(dir.path().join("dev.csv")).unwrap();
    for line in dev.lines().skip(2) {
        let d: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(d, 0.0, "equilibrium log needs no perturbation");
    }
}

#[test]
fn wide_and_long_logs_agree() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("session.toml"), TRUTHFUL_VCG).unwrap();
    run_ok(&["simulate", "--config", "session.toml", "--out-dir", "run"], dir.path());
    // Convert the long log to wide form.
    let long = fs::read_to_string(dir.path().join("run/bids.csv")).unwrap();
    let mut rows: Vec<Vec<String>> = Vec::new();
    for line in long.lines().skip(2) {
        let parts: Vec<&str> = line.split(',').collect();
        let t: usize = parts[0].parse().unwrap();
        if rows.len() < t {
            rows.push(vec![t.to_string()]);
        }
        rows[t - 1].push(parts[2].to_string());
    }
    let mut wide = String::from("auction_index,bidder_1,bidder_2,bidder_3,bidder_4,bidder_5\n");
    for row in rows {
        wide.push_str(&row.join(","));
        wide.push('\n');
    }
    fs::write(dir.path().join("wide.csv"), wide).unwrap();
    let common = ["--mechanism", "vcg", "--method", "avg-bid"];
    let mut a = vec!["estimate", "--bids", "run/bids.csv"];
    a.extend(common);
    a.extend(["--out", "est_long.csv"]);
    run_ok(&a, dir.path());
    let mut b = vec!["estimate", "--bids", "wide.csv", "--wide"];
    b.extend(common);
    b.extend(["--out", "est_wide.csv"]);
    run_ok(&b, dir.path());
    assert_eq!(
        estimates_of(&dir.path().join("est_long.csv")),
        estimates_of(&dir.path().join("est_wide.csv")),
    );
}

#[test]
fn malformed_logs_report_single_line_errors() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["estimate", "--bids", "bad.csv", "--method", "avg-bid", "--out", "x.csv"];

    let mut log = String::from("auction_index,bidder_id,bid\n");
    for i in 1..=5 {
        log.push_str(&format!("1,{i},10\n"));
    }
    log.push_str("2,1,10\n");
    fs::write(dir.path().join("bad.csv"), log).unwrap();
    let e = run_err(&base, dir.path());
    assert!(e.contains("incomplete profile at auction 2"), "{e}");

    fs::write(
        dir.path().join("bad.csv"),
        "auction_index,bidder_id,bid\n1,1,10\n1,1,12\n",
    )
    .unwrap();
    let e = run_err(&base, dir.path());
    assert!(e.contains("duplicate entry for auction 1, bidder 1"), "{e}");

    fs::write(dir.path().join("bad.csv"), "auction_index,bidder_id,bid\n1,1,-3\n").unwrap();
    let e = run_err(&base, dir.path());
    assert!(e.contains("invalid bid"), "{e}");

    fs::write(dir.path().join("bad.csv"), "auction_index,bidder_id,bid\n1,1,ten\n").unwrap();
    let e = run_err(&base, dir.path());
    assert!(e.contains("line 2"), "{e}");
    assert!(e.contains("bad bid"), "{e}");

    fs::write(dir.path().join("bad.csv"), "auction_index,bidder_id,bid\n0,1,10\n").unwrap();
    let e = run_err(&base, dir.path());
    assert!(e.contains("1-based"), "{e}");
}

#[test]
fn unknown_method_and_bad_window_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("session.toml"), TRUTHFUL_VCG).unwrap();
    run_ok(&["simulate", "--config", "session.toml", "--out-dir", "run"], dir.path());
    let e = run_err(
        &["estimate", "--bids", "run/bids.csv", "--method", "magic", "--out", "x.csv"],
        dir.path(),
    );
    assert!(e.contains("unknown method `magic`"), "{e}");
    let e = run_err(
        &[
            "estimate",
            "--bids",
            "run/bids.csv",
            "--method",
            "avg-bid",
            "--window",
            "50:9999",
            "--out",
            "x.csv",
        ],
        dir.path(),
    );
    assert!(e.contains("window"), "{e}");
}

#[test]
fn evaluate_emits_rounded_json_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("session.toml"), TRUTHFUL_VCG).unwrap();
    run_ok(&["simulate", "--config", "session.toml", "--out-dir", "run"], dir.path());
    run_ok(
        &[
            "estimate", "--bids", "run/bids.csv", "--mechanism", "vcg", "--method", "avg-bid",
            "--out", "est.csv",
        ],
        dir.path(),
    );
    run_ok(
        &[
            "evaluate", "--bids", "run/bids.csv", "--mechanism", "vcg", "--estimates", "est.csv",
            "--values", "run/values.csv", "--out", "eval.json", "--out-csv", "eval.csv",
        ],
        dir.path(),
    );
    let text = fs::read_to_string(dir.path().join("eval.json")).unwrap();
    let root: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(root["schema_version"], 1);
    assert_eq!(root["manifest"]["command"], "evaluate");
    let report = &root["evaluations"][0]["report"];
    assert_eq!(report["rms"], 0.0);
    assert_eq!(report["bidders"].as_array().unwrap().len(), 5);
    let csv = fs::read_to_string(dir.path().join("eval.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("method,bidder_id,value"));
}

#[test]
fn rerun_reproduces_every_output_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("session.toml"), TRUTHFUL_VCG).unwrap();
    run_ok(&["simulate", "--config", "session.toml", "--out-dir", "run"], dir.path());
    run_ok(
        &[
            "regret", "--bids", "run/bids.csv", "--mechanism", "vcg", "--values",
            "run/values.csv", "--out-dir", "reg",
        ],
        dir.path(),
    );
    run_ok(
        &[
            "estimate", "--bids", "run/bids.csv", "--mechanism", "vcg", "--method",
            "regret-min", "--out", "est.csv",
        ],
        dir.path(),
    );
    run_ok(
        &[
            "report", "--bids", "run/bids.csv", "--mechanism", "vcg", "--values",
            "run/values.csv", "--out", "report.json",
        ],
        dir.path(),
    );
    for target in ["run/bids.csv", "reg/curves.csv", "est.csv", "report.json"] {
        let before = fs::read(dir.path().join(target)).unwrap();
        run_ok(&["rerun", target], dir.path());
        let after = fs::read(dir.path().join(target)).unwrap();
        assert_eq!(before, after, "rerun changed {target}");
    }
}
