use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparse-doppler"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("cfg.json");
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn design_reports_minimal_nested_pattern() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["design", "-P", "256"], tmp.path());
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("N=31"), "{stdout}");
    let pattern: serde_json::Value =
        serde_json::from_slice(&std::fs::read(tmp.path().join("pattern.json")).unwrap()).unwrap();
    assert_eq!(pattern["slots"].as_array().unwrap().len(), 31);
    let csv = std::fs::read_to_string(tmp.path().join("design.csv")).unwrap();
    assert!(csv.lines().count() > 1);
}

#[test]
fn design_json_lists_both_optima() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["design", "-P", "128", "--format", "json"], tmp.path());
    assert!(out.status.success());
    let doc: serde_json::Value =
        serde_json::from_slice(&std::fs::read(tmp.path().join("design.json")).unwrap()).unwrap();
    assert_eq!(doc["transmissions"], 23);
    assert_eq!(doc["nested_optima"], serde_json::json!([[15, 8], [7, 16]]));
}

#[test]
fn unknown_config_field_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"P":16,"bogus":1}"#);
    let out = run(&["estimate", "--config", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_pattern_flag_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["design", "--pattern", "nested:x"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_thread_count_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_sparse-doppler"))
        .args(["design", "-P", "16", "--out-dir"])
        .arg(tmp.path())
        .env("SPARSE_DOPPLER_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_lags_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"P":256,"pattern":{"family":"k_level","params":{"levels":[3,3,3,4]}},
            "tones":[{"nu":0.2,"power":1}],"analytic":true,"estimators":["nest"]}"#,
    );
    let out = run(&["estimate", "--config", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing"));
}

#[test]
fn sparse_welch_without_zero_fill_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"P":16,"tones":[{"nu":0.2,"power":1}],"Q":20}"#,
    );
    let out = run(
        &["estimate", "--config", &cfg, "--estimator", "welch"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn estimate_writes_each_format() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"P":32,"tones":[{"nu":0.25,"power":1}],"Q":50,"welch":{"zero_fill":true}}"#,
    );
    for (fmt, ext) in [("csv", "csv"), ("json", "json"), ("pgm", "pgm")] {
        let out = run(
            &["estimate", "--config", &cfg, "--format", fmt, "--seed", "3"],
            tmp.path(),
        );
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        for est in ["nest", "nesprit", "welch"] {
            assert!(
                tmp.path().join(format!("{est}.{ext}")).exists(),
                "{est}.{ext}"
            );
        }
    }
    let pgm = std::fs::read(tmp.path().join("nest.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n"));
}

#[test]
fn seed_changes_simulated_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"P":16,"tones":[{"nu":0.1,"power":1}],"Q":5}"#,
    );
    let read = |seed: &str| {
        let dir = tmp.path().join(seed);
        let out = run(&["simulate", "--config", &cfg, "--seed", seed], &dir);
        assert!(out.status.success());
        std::fs::read(dir.join("frame_0000.csv")).unwrap()
    };
    assert_ne!(read("1"), read("2"));
    assert_eq!(read("1"), read("1"));
}

#[test]
fn shipped_configs_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = sparse_doppler::experiments::ExperimentConfig::from_path(&path).unwrap();
        cfg.validate().unwrap();
        cfg.build_pattern().unwrap();
        seen += 1;
    }
    assert!(seen >= 4);
}
