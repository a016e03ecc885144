use std::process::{Command, Output};

fn wslln(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wslln")).args(args).output().expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    wslln(args).status.code().expect("exit code")
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["check", "--example", "E1", "--p", "2", "--beta", "0.5", "--delta", "0.2", "--expect", "admissible"]), 0);
    assert_eq!(code(&["check", "--G", "n", "--W", "n", "--p", "2", "--expect", "admissible"]), 1);
    assert_eq!(code(&["check", "--G", "n^", "--W", "n"]), 2);
    assert_eq!(code(&["check", "--example", "E9"]), 2);
    assert_eq!(code(&["check", "--example", "E1", "--expect", "no-such-token"]), 2);
    assert_eq!(code(&["check", "--bogus-flag"]), 2);
    assert_eq!(code(&["random", "--G", "n^0.5", "--n-max", "128", "--samples", "2"]), 3);
    assert_eq!(code(&["random", "--G", "n^0.5", "--n-max", "128", "--samples", "2", "--no-regime-check"]), 0);
    assert_eq!(code(&["list-examples"]), 0);
}

#[test]
fn expectation_lines_are_printed() {
    let out = wslln(&["check", "--G", "n", "--W", "n", "--expect", "admissible"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("MISMATCH"), "{text}");
}

#[test]
fn run_directories_are_named_by_config_hash_and_stable() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_str().unwrap();
    let args = ["check", "--example", "E5", "--out", root];
    assert_eq!(code(&args), 0);
    let runs: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(runs.len(), 1);
    let name = runs[0].file_name().unwrap().to_string_lossy().into_owned();
    assert_eq!(name.len(), 16);
    let manifest = std::fs::read(runs[0].join("manifest.json")).unwrap();
    let report = std::fs::read(runs[0].join("check_T21.json")).unwrap();

    // Flag order, thread count and a config file with the same content do not change the run.
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"example":"E5","command":"check"}"#).unwrap();
    assert_eq!(code(&["check", "--threads", "2", "--config", cfg.to_str().unwrap(), "--out", root]), 0);
    let runs: Vec<_> = std::fs::read_dir(dir.path()).unwrap().filter(|e| e.as_ref().unwrap().path().is_dir()).collect();
    assert_eq!(runs.len(), 1);
    assert_eq!(manifest, std::fs::read(dir.path().join(&name).join("manifest.json")).unwrap());
    assert_eq!(report, std::fs::read(dir.path().join(&name).join("check_T21.json")).unwrap());

    let v: serde_json::Value = serde_json::from_slice(&report).unwrap();
    assert_eq!(v["config_hash"], name.as_str());
    assert_eq!(v["tool_version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn csv_outputs_carry_the_hash_line() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_str().unwrap();
    assert_eq!(code(&["slln", "--G", "n^0.5", "--W", "n^2*<G>", "--n-max", "256", "--points", "8", "--out", root]), 0);
    let run = std::fs::read_dir(dir.path()).unwrap().next().unwrap().unwrap().path();
    let csv = std::fs::read_to_string(run.join("slln_trace.csv")).unwrap();
    let first = csv.lines().next().unwrap();
    assert!(first.starts_with("# config_hash="), "{first}");
    assert!(first.contains("meaningful_regime=false"), "{first}");
}
