use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ergolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ergolab")).args(args).output().expect("spawn ergolab")
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn quick_config_runs_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("quick.csv");
    let o = ergolab(&["run", config("quick.json").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("scenario_id,quantity,value,lower,upper,tolerance,pass\n"));
    let h_conv = csv.lines().find(|l| l.starts_with("conv_bb,h_conv,")).unwrap();
    let value: f64 = h_conv.split(',').nth(2).unwrap().parse().unwrap();
    assert!((value - 0.661563).abs() < 5e-7);
    assert!(h_conv.ends_with(",true"));
    assert!(csv.contains("haar_max,gap[0] equality case,0,"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    assert_eq!(json["pass"], true);
    assert_eq!(json["scenarios"][0]["id"], "conv_bb");
    assert!(json["scenarios"][0]["statement"].as_str().unwrap().contains("h(mu*nu)"));
    let plot = fs::read_to_string(dir.path().join("quick.conv_bb.h_conv.csv")).unwrap();
    assert!(plot.starts_with("L,h_L\n1,"));
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o =
            ergolab(&["run", config("quick.json").to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "7"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(fs::read(a.with_extension("json")).unwrap(), fs::read(b.with_extension("json")).unwrap());
}

#[test]
fn thread_count_does_not_change_reports() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("t{threads}.csv"));
        let o = Command::new(env!("CARGO_BIN_EXE_ergolab"))
            .args(["run", config("quick.json").to_str().unwrap(), "--out", out.to_str().unwrap()])
            .env("ERGOLAB_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        reports.push(fs::read(&out).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn malformed_json_exits_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let o = ergolab(&[
        "run",
        config("malformed.json").to_str().unwrap(),
        "--out",
        dir.path().join("m.csv").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3, column"), "{}", stderr(&o));
    assert!(!dir.path().join("m.csv").exists());
}

#[test]
fn schema_errors_exit_2_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(
        &cfg,
        r#"{"scenarios": [{"id": "x", "kind": "convolution_entropy",
            "parameters": {"mu": {"type": "bernoulli", "weights": [0.75, 0.25]}, "nu": {"type": "haar"}}}]}"#,
    )
    .unwrap();
    let o = ergolab(&["run", cfg.to_str().unwrap(), "--out", dir.path().join("r.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("scenarios[0].parameters.mu") && err.contains("got 0.75"), "{err}");

    fs::write(&cfg, r#"{"scenarios": [{"id": "x", "kind": "teleport", "parameters": {}}]}"#).unwrap();
    let o = ergolab(&["run", cfg.to_str().unwrap(), "--out", dir.path().join("r.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("teleport"));
}

#[test]
fn failing_row_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("wrong.json");
    fs::write(
        &cfg,
        r#"{"scenarios": [{"id": "wrong", "kind": "convolution_entropy",
            "parameters": {"mu": {"type": "bernoulli", "weights": ["3/4", "1/4"]},
                           "nu": {"type": "bernoulli", "weights": ["3/4", "1/4"]}, "expected": 0.5}}]}"#,
    )
    .unwrap();
    let out = dir.path().join("r.csv");
    let o = ergolab(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(fs::read_to_string(&out).unwrap().contains("wrong,h_conv,0.66156"));
}

#[test]
fn list_is_stable_and_complete() {
    let a = ergolab(&["list"]);
    assert_eq!(a.status.code(), Some(0));
    let text = stdout(&a);
    assert!(text.contains("convolution_ergodicity"));
    let addition = text.split("\n\n").find(|s| s.starts_with("entropy_addition")).unwrap();
    assert!(addition.contains("parameters:") && addition.contains("phi"));
    assert_eq!(text, stdout(&ergolab(&["list"])));
}

#[test]
fn verify_rejects_unknown_suite() {
    let o = ergolab(&["verify", "--suite", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_exact_passes() {
    let o = ergolab(&["verify", "--suite", "exact"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.contains(" PASS ")).count(), 9, "{text}");
}
