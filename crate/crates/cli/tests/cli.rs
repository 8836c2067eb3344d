use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn magspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magspec")).args(args).env("RUST_LOG", "warn").output().expect("magspec runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn files(dir: &Path) -> usize {
    std::fs::read_dir(dir).unwrap().count()
}

#[test]
fn bad_config_exits_two() {
    let o = magspec(&["fiber-spectrum", "--flux", "3/6"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert_eq!(code(&magspec(&["fiber-spectrum", "--kgrid", "0"])), 2);
    assert_eq!(code(&magspec(&["fiber-spectrum", "--no-such-flag"])), 2);
}

#[test]
fn unknown_config_key_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "flux = \"1/3\"\nkgird = 8\n").unwrap();
    let o = magspec(&["fiber-spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("kgird"), "{}", stderr(&o));
}

#[test]
fn failing_check_exits_three() {
    let o = magspec(&["lll-compare", "--B", "10,5", "--n-ll", "3", "--amplitude", "0.1"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("strictly_decreasing"));
}

#[test]
fn infeasible_models_exit_four() {
    let o = magspec(&["chern", "--flux", "1/2"]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("band crossing"));
    assert_eq!(code(&magspec(&["gauge-check", "--B", "0.11"])), 4);
    let o = magspec(&["continuum-spectrum", "--B", "10", "--snap", "false"]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("nearest feasible"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"flux": "1/3", "kgrid": 16}"#).unwrap();
    let out = dir.path().join("o.json");
    let o = magspec(&[
        "fiber-spectrum",
        "--config",
        cfg.to_str().unwrap(),
        "--kgrid",
        "8",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["config"]["kgrid"], 8);
    assert_eq!(v["config"]["flux"], "1/3");
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    assert_eq!(v["columns"], serde_json::json!(["band", "lo", "hi"]));
}

#[test]
fn sidecar_replays_identically() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let o = magspec(&["disorder-dos", "--side", "12", "--realizations", "3", "--seed", "11", "--out", a.to_str().unwrap()]);
    assert!(matches!(code(&o), 0 | 3), "{}", stderr(&o));
    let meta = dir.path().join("a.csv.meta.json");
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&meta).unwrap()).unwrap();
    assert_eq!(v["seed"], 11);
    assert!(v["wall_time_s"].as_f64().unwrap() > 0.0);
    magspec(&["disorder-dos", "--config", meta.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn csv_goes_to_stdout_without_out() {
    let o = magspec(&["peierls-check", "--flux", "1/3"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("# magspec"));
    assert!(text.contains("\nflux,points,max_abs_diff\n1/3,"));
}

#[test]
fn unwritable_output_leaves_no_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing/o.csv");
    let o = magspec(&["peierls-check", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert_eq!(files(dir.path()), 0);
}
