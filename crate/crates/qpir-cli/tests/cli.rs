//! Black-box tests of the binary: flags, exit codes, report shapes.

use serde_json::Value;
use std::process::{Command, Output};

fn qpir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpir-lab"))
        .args(args)
        .env_remove("QPIR_LAB_SEED")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn missing_required_flag_exits_2_with_usage() {
    let out = qpir(&["run", "--files", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--ell"), "stderr: {err}");
}

#[test]
fn exhaustive_run_emits_all_transcripts() {
    let out = qpir(&["run", "--ell", "2", "--files", "2", "--mode", "exhaustive"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["count"], 128);
    assert_eq!(v["all_correct"], true);
    assert_eq!(v["schema_version"], "1");
    assert_eq!(v["transcripts"].as_array().unwrap().len(), 128);
    assert!(v["transcripts"][0].get("state").is_none());
}

#[test]
fn sampled_run_with_seed_is_correct() {
    let out = qpir(&[
        "run", "--ell", "3", "--files", "2", "--mode", "sampled", "--seed", "7", "--trials",
        "100",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["count"], 100);
    assert_eq!(v["all_correct"], true);
    assert_eq!(v["seed"], 7);
}

#[test]
fn dump_state_includes_amplitudes() {
    let out = qpir(&[
        "run",
        "--ell",
        "2",
        "--files",
        "2",
        "--mode",
        "sampled",
        "--trials",
        "1",
        "--dump-state",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let state = v["transcripts"][0]["state"].as_array().unwrap();
    assert_eq!(state.len(), 4);
    assert_eq!(state[0].as_array().unwrap().len(), 2);
}

#[test]
fn run_rejects_csv_format() {
    let out = qpir(&["run", "--ell", "2", "--files", "2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn audit_csv_is_single_row_with_header() {
    let out = qpir(&["audit", "--ell", "2", "--files", "2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.trim_end().lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(
        lines[0],
        "ell,F,p_err,s_serv_bits,s_user_bits,upload_bits,download_logdim,rate,notes"
    );
    assert!(lines[1].starts_with("2,2,"));
}

#[test]
fn audit_json_reports_zero_leakage() {
    let out = qpir(&["audit", "--ell", "2", "--files", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["report"]["s_serv_bits"], 0.0);
    assert_eq!(v["report"]["s_user_bits"], 0.0);
    assert_eq!(v["report"]["rate"], 1.0);
}

#[test]
fn audit_over_cap_is_refused_with_message() {
    let out = qpir(&["audit", "--ell", "5", "--files", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("cap"), "stderr: {err}");
}

#[test]
fn audit_singleton_variant_flags_the_leak() {
    let out = qpir(&[
        "audit",
        "--ell",
        "2",
        "--files",
        "2",
        "--variant",
        "singleton-leak",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert!(v["report"]["s_user_bits"].as_f64().unwrap() >= 0.5);
}

#[test]
fn converse_grid_csv_has_nine_rows() {
    let out = qpir(&[
        "converse",
        "--ell",
        "2",
        "--files",
        "2",
        "--s-grid",
        "0.1:0.9:0.1",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.trim_end().lines().collect();
    assert_eq!(lines[0], "s,lhs,rhs,slack");
    assert_eq!(lines.len(), 10);
    for line in &lines[1..] {
        let slack: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!(slack >= -1e-8);
    }
}

#[test]
fn converse_empty_grid_exits_2() {
    let out = qpir(&[
        "converse", "--ell", "2", "--files", "2", "--s-grid", "0.9:0.1:0.1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn converse_multiround_reports_equality_gap() {
    let out = qpir(&["converse", "--ell", "2", "--files", "2", "--multiround", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["report"]["epsilon"], 0.0);
    let gap = v["report"]["gap"].as_f64().unwrap();
    assert!(gap.abs() <= 1e-8, "gap {gap}");
}

#[test]
fn compare_single_emits_table_shaped_json() {
    let out = qpir(&["compare", "--n", "2", "--files", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["table"]["c_qpir"], 1.0);
    assert_eq!(v["table"]["c_sym"], 0.5);
    assert_eq!(v["table"]["upload_quantum_bits"], 4.0);
}

#[test]
fn compare_sweep_csv_has_one_row_per_n() {
    let out = qpir(&[
        "compare", "--sweep-n", "2:8", "--files", "2", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.trim_end().lines().collect();
    assert_eq!(lines.len(), 8);
    assert!(lines[0].starts_with("n,F,c_pir"));
}

#[test]
fn compare_invalid_n_exits_2() {
    let out = qpir(&["compare", "--n", "1", "--files", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn basis_check_passes() {
    let out = qpir(&["basis-check", "--ell", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["basis_size"], 36);
}

#[test]
fn lemma3_command_passes() {
    let out = qpir(&["lemma3", "--trials", "50", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["pass"], true);
    assert!(v["max_slack_bits"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn env_seed_is_used_when_flag_is_absent() {
    let out = Command::new(env!("CARGO_BIN_EXE_qpir-lab"))
        .args(["run", "--ell", "2", "--files", "2", "--mode", "sampled", "--trials", "3"])
        .env("QPIR_LAB_SEED", "99")
        .output()
        .expect("binary runs");
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["seed"], 99);

    // The flag wins over the environment.
    let out = Command::new(env!("CARGO_BIN_EXE_qpir-lab"))
        .args([
            "run", "--ell", "2", "--files", "2", "--mode", "sampled", "--trials", "3", "--seed",
            "5",
        ])
        .env("QPIR_LAB_SEED", "99")
        .output()
        .expect("binary runs");
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["seed"], 5);
}
