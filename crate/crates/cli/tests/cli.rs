use std::path::Path;
use std::process::{Command, Output};

const TINY: &str = r#"{
  "master_seed": 11,
  "sim": { "duration": 80.0, "ramp": 20.0 },
  "train": { "epochs": 2, "seq_len": 400, "resolution_factor": 2,
             "hidden_size": 4, "layers": 1, "batch_size": 2 },
  "campaign": { "conditions": 3, "headings_deg": [60], "realizations": 2, "split": [2, 1, 1] }
}"#;

fn seakeep(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seakeep"))
        .arg("--out")
        .arg(dir)
        .arg("--config")
        .arg(dir.join("config.json"))
        .arg("--jobs")
        .arg("1")
        .args(args)
        .output()
        .unwrap()
}

fn tiny_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("config.json"), TINY).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn help_and_usage_errors() {
    let bin = env!("CARGO_BIN_EXE_seakeep");
    let help = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("gen-conditions"));
    let bad = Command::new(bin).arg("sail").output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    let profile = Command::new(bin).args(["--profile", "huge", "report"]).output().unwrap();
    assert_eq!(profile.status.code(), Some(1));
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("config.json"), r#"{"campaign": {"condtions": 3}}"#).unwrap();
    let o = seakeep(dir.path(), &["gen-conditions"]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn gen_conditions_writes_one_row_per_condition_and_heading() {
    let dir = tiny_dir();
    let o = seakeep(dir.path(), &["gen-conditions"]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("manifest.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config_hash="));
    assert!(lines.next().unwrap().starts_with("id,"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn malformed_histogram_is_a_data_error() {
    let dir = tiny_dir();
    let h = dir.path().join("hist.csv");
    std::fs::write(&h, "lat,lon\n1,2\n").unwrap();
    let o = seakeep(dir.path(), &["gen-conditions", "--histogram", h.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_without_manifest_is_a_data_error() {
    let dir = tiny_dir();
    let o = seakeep(dir.path(), &["simulate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_resumes_and_pipeline_completes() {
    let dir = tiny_dir();
    assert_eq!(seakeep(dir.path(), &["gen-conditions"]).status.code(), Some(0));
    let first = seakeep(dir.path(), &["simulate"]);
    assert_eq!(first.status.code(), Some(0));
    assert!(stdout(&first).contains("12 runs: 12 simulated, 0 skipped, 0 failed"));
    let again = seakeep(dir.path(), &["simulate", "--fidelity", "lofi"]);
    assert!(stdout(&again).contains("6 runs: 0 simulated, 6 skipped"), "{}", stdout(&again));

    for cmd in ["train", "correct", "report"] {
        let o = seakeep(dir.path(), &[cmd]);
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert!(dir.path().join("models/h060/checkpoint.json").exists());
    assert!(dir.path().join("report/report.json").exists());
}
