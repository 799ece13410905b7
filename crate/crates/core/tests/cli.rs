use std::process::{Command, Output};

use steane_ft::report::{read_records, Format, ResultRecord};

fn steane_ft(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_steane-ft")).args(args).env_remove("STEANE_FT_OUT_DIR").output().unwrap()
}

fn csv_records(bytes: &[u8]) -> Vec<ResultRecord> {
    csv::Reader::from_reader(bytes).deserialize().collect::<Result<_, _>>().unwrap()
}

#[test]
fn zero_rate_sweep_has_no_failures() {
    let out = steane_ft(&["sweep", "--p", "0", "--protocols", "decoding,simple-series", "--trials", "100", "--seed", "9"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let records = csv_records(&out.stdout);
    assert_eq!(records.len(), 2 * 4);
    for r in &records {
        assert_eq!((r.trials, r.failures, r.reruns, r.rate, r.master_seed), (100, 0, 0, 0.0, 9));
    }
    let bases: Vec<&str> = records[..4].iter().map(|r| r.basis.as_str()).collect();
    assert_eq!(bases, ["X", "Y", "Z", "combined"]);
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(
        &config,
        r#"{"protocols": ["two-ancilla-parallel"], "grid": {"p_cnot": [1e-3, 2e-3], "p_wait": [1e-3]},
            "filters": ["all", "class2"], "trials": 500, "master_seed": 1}"#,
    )
    .unwrap();
    let out = dir.path().join("nested/out.json");
    let status = steane_ft(&["sweep", "--config", config.to_str().unwrap(), "--seed", "77", "--out", out.to_str().unwrap()]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let records = read_records(&out, Format::Json).unwrap();
    assert_eq!(records.len(), 2 * 2 * 4);
    assert!(records.iter().all(|r| r.master_seed == 77 && r.trials == 500 && r.p_prep == 0.0));
    assert_eq!(records[4].filter.to_string(), "class2");
    assert_eq!(records[8].p_cnot, 2e-3);
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_steane-ft"))
        .args(["figure", "compare", "--trials", "1000", "--protocols", "decoding"])
        .env("STEANE_FT_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("compare.csv")).unwrap();
    assert!(text.starts_with("p,P_L_decoding,ci_low_decoding,ci_high_decoding\n"));
    assert_eq!(text.lines().count(), 11);
}

#[test]
fn fault_enum_certifies_decoding() {
    let out = steane_ft(&["fault-enum", "--order", "1", "--protocols", "decoding", "--terms"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let p = &report["protocols"][0];
    assert_eq!(p["protocol"], "decoding");
    assert_eq!(p["first_order_failures"], 0);
    assert_eq!(p["fault_tolerant"], true);
    assert_eq!(p["first_order_terms"].as_array().unwrap().len(), 0);
}

#[test]
fn fault_enum_lists_non_ft_terms() {
    let out = steane_ft(&["fault-enum", "--protocols", "non-ft", "--terms"]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let terms = report["protocols"][0]["first_order_terms"].as_array().unwrap();
    assert_eq!(terms.len() as u64, report["protocols"][0]["first_order_failures"].as_u64().unwrap());
    assert!(!terms.is_empty());
}

#[test]
fn validate_passes() {
    let out = steane_ft(&["validate", "--circuits", "200"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["random_mismatches"], 0);
    assert_eq!(report["library_mismatches"], 0);
}

#[test]
fn exit_codes() {
    assert_eq!(steane_ft(&["figure", "nonsense"]).status.code(), Some(2));
    assert_eq!(steane_ft(&["sweep", "--p", "1e-3", "--trials", "10"]).status.code(), Some(2));
    assert_eq!(steane_ft(&["sweep", "--p", "2", "--protocols", "decoding", "--trials", "10", "--seed", "1"]).status.code(), Some(2));
    assert_eq!(steane_ft(&["sweep", "--config", "/nonexistent/run.json"]).status.code(), Some(3));
    assert_eq!(steane_ft(&["--help"]).status.code(), Some(0));
}

#[test]
fn rerun_cap_surfaces_verbatim() {
    // every cycle is skipped at this rate, so the cap is hit immediately
    let out = steane_ft(&[
        "sweep", "--p", "0.5", "--protocols", "two-ancilla-series", "--trials", "10", "--seed", "1", "--rerun-cap", "0",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rerun"));
}
