//! End-to-end checks of the `ssbc` binary: exit codes, determinism, and the
//! shape of JSON/CSV outputs.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ssbc"))
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn asymptotic_report_breaks_down_per_subset() {
    let out = run(&["rate-asymptotic", "--channel", &data("channel_three_user.json")]);
    let v = stdout_json(&out);
    assert_eq!(v["config"]["command"], "rate-asymptotic");
    assert!(v["version"].as_str().unwrap().starts_with("ssbc-cli "));
    // 𝔸 = upward closure of {{1,2},{2,3}} has 3 sets; 𝔹 the other 5.
    assert_eq!(v["result"]["max_entropy_terms"].as_array().unwrap().len(), 3);
    assert_eq!(v["result"]["min_entropy_terms"].as_array().unwrap().len(), 5);
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = run(&[
            "simulate",
            "--channel",
            &data("channel_two_user.json"),
            "--seed",
            "7",
            "--trials",
            "2000",
            "--eps1",
            "0.05",
            "--eps2",
            "0.05",
            "--out",
            &path.display().to_string(),
        ]);
        assert!(
            out.status.success(),
            "stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let ba = std::fs::read(&a).unwrap();
    let bb = std::fs::read(&b).unwrap();
    assert!(!ba.is_empty());
    assert_eq!(ba, bb);
}

#[test]
fn simulate_without_seed_is_a_validation_error() {
    let out = run(&["simulate", "--channel", &data("channel_two_user.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn degenerate_channel_has_zero_capacity() {
    let out = run(&["capacity", "--channel", &data("channel_degenerate.json")]);
    let v = stdout_json(&out);
    assert!(v["result"]["capacity_bits"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn malformed_channel_file_reports_location_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{\n  \"users\": 2,\n  \"oops\n").unwrap();
    let out = run(&["entropy", "--channel", &path.display().to_string()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line"), "missing diagnostics: {err}");
}

#[test]
fn separate_access_file_overrides_embedded_structure() {
    let out = run(&[
        "entropy",
        "--channel",
        &data("channel_three_user.json"),
        "--access",
        &data("access_majority_three.json"),
    ]);
    let v = stdout_json(&out);
    let rows = v["result"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    let authorized: usize = rows
        .iter()
        .filter(|r| r["authorized"].as_bool().unwrap())
        .count();
    // Majority of three: the three pairs plus the full set.
    assert_eq!(authorized, 4);
    for r in rows {
        let hmin = r["h_min"].as_f64().unwrap();
        let h = r["h"].as_f64().unwrap();
        let hmax = r["h_max"].as_f64().unwrap();
        assert!(hmin <= h + 1e-9 && h <= hmax + 1e-9);
    }
}

fn csv_rows(out: &Output) -> Vec<Vec<String>> {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes());
    rdr.records()
        .map(|r| r.unwrap().iter().map(|f| f.to_string()).collect())
        .collect()
}

#[test]
fn n_sweep_approaches_the_asymptotic_rate_within_band() {
    let asym = {
        let out = run(&["rate-asymptotic", "--channel", &data("channel_flip11.json")]);
        stdout_json(&out)["result"]["rate_bits"].as_f64().unwrap()
    };
    let out = run(&[
        "rate-second-order",
        "--channel",
        &data("channel_flip11.json"),
        "--eps1",
        "0.05",
        "--sweep",
        "n=100,1000,10000",
    ]);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 4);
    assert_eq!(&rows[0][..3], &["n", "rate", "band"]);
    let mut prev_gap = f64::INFINITY;
    for row in &rows[1..] {
        let rate: f64 = row[1].parse().unwrap();
        let band: f64 = row[2].parse().unwrap();
        let gap = (rate - asym).abs();
        assert!(gap < prev_gap, "gap {gap} did not shrink");
        prev_gap = gap;
        assert!(rate <= asym + band);
    }
    // The largest block length gets within its own uncertainty band scale.
    let last_rate: f64 = rows[3][1].parse().unwrap();
    assert!((last_rate - asym).abs() < 0.05);
}

#[test]
fn single_point_sweep_emits_one_row() {
    let out = run(&[
        "rate-second-order",
        "--channel",
        &data("channel_flip11.json"),
        "--eps1",
        "0.05",
        "--sweep",
        "n=1000",
    ]);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 2);
}

#[test]
fn eps_sweep_rate_is_nondecreasing() {
    let out = run(&[
        "rate-second-order",
        "--channel",
        &data("channel_flip11.json"),
        "--n",
        "1000",
        "--sweep",
        "eps1=0.01,0.02,0.05,0.1",
    ]);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 5);
    let mut prev = f64::NEG_INFINITY;
    for row in &rows[1..] {
        let rate: f64 = row[1].parse().unwrap();
        assert!(rate >= prev - 1e-12, "rate {rate} dropped below {prev}");
        prev = rate;
    }
}

#[test]
fn sweep_on_other_commands_is_rejected() {
    let out = run(&[
        "capacity",
        "--channel",
        &data("channel_flip11.json"),
        "--sweep",
        "n=100",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&[
        "rate-second-order",
        "--channel",
        &data("channel_flip11.json"),
        "--sweep",
        "n=1000,100",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ascending"));
}

#[test]
fn lhl_check_holds_on_sample_channel() {
    let out = run(&[
        "lhl-check",
        "--channel",
        &data("channel_two_user.json"),
        "--eps1",
        "0.05",
        "--n",
        "1",
    ]);
    let v = stdout_json(&out);
    let rows = v["result"].as_array().unwrap();
    assert!(!rows.is_empty());
    for r in rows {
        assert!(r["satisfied"].as_bool().unwrap());
    }
}

#[test]
fn oneshot_and_converse_order_correctly() {
    // The converse (no penalty terms) must sit above the penalized
    // achievable rate at matching smoothing parameters.
    let ach = {
        let out = run(&[
            "rate-oneshot",
            "--channel",
            &data("channel_flip11.json"),
            "--eps1",
            "0.05",
            "--eps2",
            "0.05",
            "--delta",
            "1",
        ]);
        stdout_json(&out)["result"]["rate_bits"].as_f64().unwrap()
    };
    let conv = {
        let out = run(&[
            "rate-converse",
            "--channel",
            &data("channel_flip11.json"),
            "--eps1",
            "0.05",
        ]);
        stdout_json(&out)["result"]["report"]["rate_bits"]
            .as_f64()
            .unwrap()
    };
    assert!(conv > ach, "converse {conv} not above achievable {ach}");
}
