//! End-to-end behavior of the `pipeflow` binary: exit codes, config
//! validation, artifact layout, and flag handling.

use std::process::Command;

struct CmdResult {
    code: i32,
    stdout: String,
    stderr: String,
}

/// Writes `cfg_text` into a fresh temp dir, runs `pipeflow <cmd>` with the
/// temp dir as output directory, and returns the outcome plus the dir for
/// artifact inspection.
fn pipeflow(cmd: &str, cfg_text: &str, extra: &[&str]) -> (CmdResult, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.cfg");
    std::fs::write(&cfg, cfg_text).unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_pipeflow"))
        .arg(cmd)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .args(extra)
        .output()
        .unwrap();
    (
        CmdResult {
            code: output.status.code().unwrap_or(-1),
            stdout: String::from_utf8_lossy(&output.stdout).into_owned(),
            stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
        },
        dir,
    )
}

fn read_json(dir: &tempfile::TempDir, name: &str) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
    serde_json::from_str(&text).unwrap()
}

const LINEAR_MINIMAL: &str = "schema_version = 1\n\n\
    [flow]\nphi = 5.0\nalpha = 1.0\n\n\
    [mode]\nxi = 1.0\n";

#[test]
fn solve_linear_writes_a_gated_record() {
    let (res, dir) = pipeflow("solve-linear", LINEAR_MINIMAL, &[]);
    assert_eq!(res.code, 0, "stderr: {}", res.stderr);
    assert!(res.stdout.contains("wrote"), "stdout: {}", res.stdout);
    let doc = read_json(&dir, "solve-linear.json");
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["config"]["flow"]["phi"], 5.0);
    assert_eq!(doc["record"]["convergence_gate"], true);
    assert_eq!(doc["record"]["identity_gaps"].as_array().unwrap().len(), 2);
}

#[test]
fn json_config_matches_text_config_byte_for_byte() {
    let json_cfg = "{\n  \"schema_version\": 1,\n  \"flow\": {\"phi\": 5.0, \"alpha\": 1.0},\n  \"mode\": {\"xi\": 1.0}\n}\n";
    let (res_a, dir_a) = pipeflow("solve-linear", LINEAR_MINIMAL, &[]);
    let (res_b, dir_b) = pipeflow("solve-linear", json_cfg, &[]);
    assert_eq!(res_a.code, 0, "stderr: {}", res_a.stderr);
    assert_eq!(res_b.code, 0, "stderr: {}", res_b.stderr);
    let a = std::fs::read(dir_a.path().join("solve-linear.json")).unwrap();
    let b = std::fs::read(dir_b.path().join("solve-linear.json")).unwrap();
    assert!(a == b, "text and JSON configs produced different artifacts");
}

#[test]
fn malformed_numbers_are_config_errors() {
    let cfg = "schema_version = 1\n\n[flow]\nphi = fast\nalpha = 1.0\n\n[mode]\nxi = 1.0\n";
    let (res, _dir) = pipeflow("solve-linear", cfg, &[]);
    assert_eq!(res.code, 2, "stderr: {}", res.stderr);
    assert!(res.stderr.contains("error:"), "stderr: {}", res.stderr);
}

#[test]
fn unknown_keys_are_rejected() {
    let cfg =
        "schema_version = 1\n\n[flow]\nphi = 5.0\nalpha = 1.0\nfuzz = 1.0\n\n[mode]\nxi = 1.0\n";
    let (res, _dir) = pipeflow("solve-linear", cfg, &[]);
    assert_eq!(res.code, 2, "stderr: {}", res.stderr);
    assert!(res.stderr.contains("flow.fuzz"), "stderr: {}", res.stderr);
}

#[test]
fn schema_version_is_mandatory_and_checked() {
    let missing = "[flow]\nphi = 5.0\nalpha = 1.0\n\n[mode]\nxi = 1.0\n";
    let (res, _dir) = pipeflow("solve-linear", missing, &[]);
    assert_eq!(res.code, 2, "stderr: {}", res.stderr);

    let wrong = "schema_version = 2\n\n[flow]\nphi = 5.0\nalpha = 1.0\n\n[mode]\nxi = 1.0\n";
    let (res, _dir) = pipeflow("solve-linear", wrong, &[]);
    assert_eq!(res.code, 2, "stderr: {}", res.stderr);
}

#[test]
fn tiny_grids_are_config_errors() {
    let cfg = "schema_version = 1\n\n[flow]\nphi = 5.0\nalpha = 1.0\n\n\
        [mode]\nxi = 1.0\nn_points = 4\n";
    let (res, _dir) = pipeflow("solve-linear", cfg, &[]);
    assert_eq!(res.code, 2, "stderr: {}", res.stderr);
}

#[test]
fn seeds_only_apply_to_the_random_family() {
    let cfg = "schema_version = 1\n\n[flow]\nphi = 5.0\nalpha = 1.0\n\n\
        [mode]\nxi = 1.0\nseed = 5\n";
    let (res, _dir) = pipeflow("solve-linear", cfg, &[]);
    assert_eq!(res.code, 2, "stderr: {}", res.stderr);
}

#[test]
fn random_family_requires_a_seed() {
    let cfg = "schema_version = 1\n\n[flow]\nphi = 5.0\nalpha = 1.0\n\n\
        [mode]\nxi = 1.0\nforcing = random-smooth\n";
    let (res, _dir) = pipeflow("solve-linear", cfg, &[]);
    assert_eq!(res.code, 2, "stderr: {}", res.stderr);
    assert!(res.stderr.contains("seed"), "stderr: {}", res.stderr);
}

#[test]
fn seed_flag_is_equivalent_to_the_config_key() {
    let keyed = "schema_version = 1\n\n[flow]\nphi = 5.0\nalpha = 1.0\n\n\
        [mode]\nxi = 1.0\nforcing = random-smooth\nseed = 11\n";
    let flagged = "schema_version = 1\n\n[flow]\nphi = 5.0\nalpha = 1.0\n\n\
        [mode]\nxi = 1.0\nforcing = random-smooth\n";
    let (res_a, dir_a) = pipeflow("solve-linear", keyed, &[]);
    let (res_b, dir_b) = pipeflow("solve-linear", flagged, &["--seed", "11"]);
    assert_eq!(res_a.code, 0, "stderr: {}", res_a.stderr);
    assert_eq!(res_b.code, 0, "stderr: {}", res_b.stderr);
    let a = std::fs::read(dir_a.path().join("solve-linear.json")).unwrap();
    let b = std::fs::read(dir_b.path().join("solve-linear.json")).unwrap();
    assert!(
        a == b,
        "--seed and the config seed produced different artifacts"
    );
}

#[test]
fn failed_quality_gate_exits_4_after_writing() {
    let cfg = "schema_version = 1\n\n[flow]\nphi = 5.0\nalpha = 1.0\n\n\
        [mode]\nxi = 1.0\n\n[gates]\nidentity_tol = 1e-18\n";
    let (res, dir) = pipeflow("solve-linear", cfg, &[]);
    assert_eq!(res.code, 4, "stderr: {}", res.stderr);
    assert!(
        dir.path().join("solve-linear.json").exists(),
        "record must be written before the gate verdict"
    );
}

#[test]
fn underresolved_solve_exits_3() {
    let cfg = "schema_version = 1\n\n[flow]\nphi = 1000000.0\nalpha = 1.0\n\n\
        [mode]\nxi = 1.0\nn_points = 16\n";
    let (res, _dir) = pipeflow("solve-linear", cfg, &[]);
    assert_eq!(res.code, 3, "stderr: {}", res.stderr);
    assert!(res.stderr.contains("unconverged"), "stderr: {}", res.stderr);
}

#[test]
fn sweep_reports_rejected_triples_without_failing() {
    let cfg = "schema_version = 1\n\n[sweep]\nphi = 1.0, 1000000.0\nxi = 1.0\n\
        alpha = 1.0\n\n[gates]\nn_points = 16\n";
    let (res, dir) = pipeflow("sweep", cfg, &[]);
    assert_eq!(res.code, 0, "stderr: {}", res.stderr);
    assert!(
        res.stdout.contains("accepted 1 records, rejected 1"),
        "stdout: {}",
        res.stdout
    );
    let doc = read_json(&dir, "sweep-records.json");
    assert_eq!(doc["outcome"]["records"].as_array().unwrap().len(), 1);
    assert_eq!(doc["outcome"]["rejected"].as_array().unwrap().len(), 1);
}

#[test]
fn empty_sweep_lists_are_config_errors() {
    let cfg = "schema_version = 1\n\n[sweep]\nphi =\nxi = 1.0\nalpha = 1.0\n";
    let (res, _dir) = pipeflow("sweep", cfg, &[]);
    assert_eq!(res.code, 2, "stderr: {}", res.stderr);
}

#[test]
fn nonlinear_zero_forcing_fixes_the_zero_field() {
    let cfg = "schema_version = 1\n\n[flow]\nphi = 10.0\nalpha = 1.0\n\n\
        [domain]\nmax_mode = 2\n\n[forcing]\namplitude = 0.0\n\n\
        [picard]\nn_points = 32\n";
    let (res, dir) = pipeflow("solve-nonlinear", cfg, &[]);
    assert_eq!(res.code, 0, "stderr: {}", res.stderr);
    let doc = read_json(&dir, "nonlinear-trace.json");
    assert_eq!(
        doc["result"]["trace"]["entries"].as_array().unwrap().len(),
        1
    );
    assert_eq!(doc["result"]["final"]["field_norm"].as_f64().unwrap(), 0.0);
}

#[test]
fn regimes_reproduce_the_reference_labels() {
    let cfg = "schema_version = 1\n\n[regimes]\nphi = 10000.0\n\
        xi = 1.0, 0.0001, 50.0\nalpha = 0.0\n";
    let (res, dir) = pipeflow("regimes", cfg, &[]);
    assert_eq!(res.code, 0, "stderr: {}", res.stderr);
    let table = std::fs::read_to_string(dir.path().join("regimes.csv")).unwrap();
    for label in ["mid-intermediate-slip", "low-frequency", "high-frequency"] {
        assert!(table.contains(label), "missing {label} in:\n{table}");
    }
}

#[test]
fn regimes_reject_the_seed_flag() {
    let cfg = "schema_version = 1\n\n[regimes]\nphi = 1.0\nxi = 1.0\nalpha = 0.0\n";
    let (res, _dir) = pipeflow("regimes", cfg, &["--seed", "1"]);
    assert_eq!(res.code, 2, "stderr: {}", res.stderr);
}

#[test]
fn swirl_probe_is_embedded_on_request() {
    let cfg = "schema_version = 1\n\n[flow]\nphi = 10.0\nalpha = 1.0\n\n\
        [mode]\nxi = 1.0\n\n[probe]\nnullspace = true\n";
    let (res, dir) = pipeflow("solve-swirl", cfg, &[]);
    assert_eq!(res.code, 0, "stderr: {}", res.stderr);
    let doc = read_json(&dir, "solve-swirl.json");
    let sigma = doc["result"]["nullspace_probe"]["sigma_min"]
        .as_f64()
        .unwrap();
    assert!(sigma <= 1e-8, "probe σ_min {sigma:.3e}");
}

#[test]
fn missing_config_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_pipeflow"))
        .args(["solve-linear", "--config"])
        .arg(dir.path().join("nope.cfg"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn output_directories_are_created() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.cfg");
    std::fs::write(&cfg, LINEAR_MINIMAL).unwrap();
    let nested = dir.path().join("a/b/c");
    let output = Command::new(env!("CARGO_BIN_EXE_pipeflow"))
        .args(["solve-linear", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&nested)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert!(nested.join("solve-linear.json").exists());
}

#[test]
fn thread_count_flag_is_accepted() {
    let (res, _dir) = pipeflow("solve-linear", LINEAR_MINIMAL, &["--threads", "2"]);
    assert_eq!(res.code, 0, "stderr: {}", res.stderr);
}
