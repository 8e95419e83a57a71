use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mgids(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mgids"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

// Short training runs keep the end-to-end test fast.
const FAST_CONFIG: &str = r#"
[binary]
num_iterations = 15

[multiclass]
num_iterations = 15

[kd.student_params]
num_iterations = 10

[eval]
latency_batch = 200
latency_reps = 2
"#;

fn write_config(dir: &Path) -> String {
    let p = dir.join("fast.toml");
    fs::write(&p, FAST_CONFIG).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(mgids(&[]).status.code(), Some(1));
    assert_eq!(mgids(&["train"]).status.code(), Some(1));
    assert_eq!(
        mgids(&["train", "--binary", "--multiclass"]).status.code(),
        Some(1)
    );
    assert_eq!(mgids(&["--help"]).status.code(), Some(0));
}

#[test]
fn unknown_scenario_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = mgids(&["--out", out, "simulate", "--scenario", "Bogus"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn missing_artifacts_name_the_producing_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = mgids(&["--out", out, "dataset"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("simulate"), "{}", stderr(&o));

    let o = mgids(&["--out", out, "distill"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("train --multiclass"), "{}", stderr(&o));
}

#[test]
fn bad_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    fs::write(&p, "[multiclass]\nnum_leaves = 0\n").unwrap();
    let o = mgids(&["--config", p.to_str().unwrap(), "dataset"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    fs::write(&p, "[multiclass]\nleaves = 4\n").unwrap();
    let o = mgids(&["--config", p.to_str().unwrap(), "dataset"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn simulate_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = mgids(&[
            "--out",
            d.path().to_str().unwrap(),
            "simulate",
            "--scenario",
            "Ramp",
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let read = |d: &tempfile::TempDir| {
        let mut files: Vec<_> = walk(d.path())
            .into_iter()
            .filter(|p| p.extension().is_some_and(|e| e == "csv"))
            .collect();
        assert_eq!(files.len(), 1);
        fs::read(files.pop().unwrap()).unwrap()
    };
    let (x, y) = (read(&a), read(&b));
    assert_eq!(x, y);
    // header plus one row per sample over the default 1 s horizon
    let lines = x.iter().filter(|&&c| c == b'\n').count();
    assert_eq!(lines, 10_002);
}

fn walk(p: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in fs::read_dir(p).unwrap() {
        let e = e.unwrap().path();
        if e.is_dir() {
            out.extend(walk(&e));
        } else {
            out.push(e);
        }
    }
    out
}

#[test]
fn full_pipeline_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let out = out.to_str().unwrap();
    let cfg = write_config(dir.path());
    let step = |args: &[&str]| {
        let mut full = vec!["--config", cfg.as_str(), "--out", out];
        full.extend_from_slice(args);
        let o = mgids(&full);
        assert!(
            o.status.success(),
            "{args:?} failed: {}\n{}",
            stderr(&o),
            stdout(&o)
        );
        stdout(&o)
    };
    let sim = step(&["simulate", "--all"]);
    assert_eq!(sim.lines().count(), 7, "{sim}");
    step(&["dataset"]);
    step(&["train", "--binary"]);
    step(&["train", "--multiclass"]);
    let kd = step(&["distill"]);
    assert!(kd.contains("argmax_agreement_pct"), "{kd}");
    let ev = step(&["eval"]);
    assert!(ev.contains("demo:"), "{ev}");
    let bench = step(&["bench"]);
    assert!(bench.contains("latency_ratio"), "{bench}");

    let files = walk(Path::new(out));
    for name in [
        "binary.model",
        "multiclass.model",
        "student.model",
        "distill_report.txt",
        "ablation.csv",
    ] {
        let found = files
            .iter()
            .any(|p| p.file_name().is_some_and(|f| f == name));
        if name == "ablation.csv" {
            assert!(!found, "ablation ran without being asked");
        } else {
            assert!(found, "{name} missing from {files:?}");
        }
    }

    let test_csv = files
        .iter()
        .find(|p| p.file_name().is_some_and(|f| f == "test.csv"))
        .expect("test split written");
    let pred = step(&[
        "predict",
        "--model",
        "student",
        "--input",
        test_csv.to_str().unwrap(),
        "--limit",
        "5",
    ]);
    let lines: Vec<&str> = pred.lines().collect();
    assert_eq!(lines[0], "row,predicted,probability");
    assert_eq!(lines.len(), 6);
}
