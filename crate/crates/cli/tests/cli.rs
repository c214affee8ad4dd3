use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use stokeslab::ExperimentId;

fn stokeslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stokeslab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn without_timings(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timings");
    v
}

#[test]
fn list_names_every_experiment() {
    let out = stokeslab(&["list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for id in ExperimentId::ALL {
        assert!(text.contains(id.name()), "{} missing from list", id.name());
    }
    assert!(text.lines().any(|l| l.starts_with("all")));
}

#[test]
fn configuration_errors_exit_with_two_and_write_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let out = out_dir.to_str().unwrap();

    let unknown = stokeslab(&["run", "no-such-experiment", "--out", out]);
    assert_eq!(unknown.status.code(), Some(2));

    let bad_key = tmp.path().join("bad_key.toml");
    fs::write(&bad_key, "[besov_divergence]\nslope_tolerance = 0.1\n").unwrap();
    let bad = stokeslab(&[
        "run",
        "besov-divergence",
        "--config",
        bad_key.to_str().unwrap(),
        "--out",
        out,
    ]);
    assert_eq!(bad.status.code(), Some(2));

    let wrong_id = tmp.path().join("wrong_id.toml");
    fs::write(&wrong_id, "experiment = \"plancherel\"\n").unwrap();
    let mismatch = stokeslab(&[
        "run",
        "besov-divergence",
        "--config",
        wrong_id.to_str().unwrap(),
        "--out",
        out,
    ]);
    assert_eq!(mismatch.status.code(), Some(2));

    let invalid = tmp.path().join("invalid.toml");
    fs::write(&invalid, "[besov_divergence]\np = 0.5\n").unwrap();
    let rejected = stokeslab(&[
        "run",
        "besov-divergence",
        "--config",
        invalid.to_str().unwrap(),
        "--out",
        out,
    ]);
    assert_eq!(rejected.status.code(), Some(2));

    let threads = stokeslab(&[
        "run",
        "besov-divergence",
        "--quick",
        "--threads",
        "0",
        "--out",
        out,
    ]);
    assert_eq!(threads.status.code(), Some(2));

    assert!(!out_dir.exists());
}

#[test]
fn failing_hard_check_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("strict.toml");
    fs::write(&cfg, "[besov_divergence]\nslope_tol = 1e-6\n").unwrap();
    let out = stokeslab(&[
        "run",
        "besov-divergence",
        "--quick",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&tmp.path().join("besov-divergence"));
    assert_eq!(r["passed"], false);
    assert_eq!(r["config"]["besov_divergence"]["slope_tol"], 1e-6);
}

#[test]
fn identical_runs_give_identical_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let run = || {
        let out = stokeslab(&[
            "run",
            "besov-divergence",
            "--quick",
            "--out",
            tmp.path().to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let dir = tmp.path().join("besov-divergence");
        let mut files: Vec<_> = fs::read_dir(&dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|e| e == "svg" || e == "csv"))
            .collect();
        files.sort();
        let bytes: Vec<(String, Vec<u8>)> = files
            .iter()
            .map(|p| {
                (
                    p.file_name().unwrap().to_string_lossy().into_owned(),
                    fs::read(p).unwrap(),
                )
            })
            .collect();
        (without_timings(report(&dir)), bytes)
    };
    let (first_report, first_files) = run();
    let (second_report, second_files) = run();
    assert_eq!(first_report, second_report);
    assert!(first_files.iter().any(|(name, _)| name.ends_with(".svg")));
    assert_eq!(first_files, second_files);
}

#[test]
fn every_quick_report_lists_exactly_the_documented_checks() {
    let tmp = tempfile::tempdir().unwrap();
    let out = stokeslab(&[
        "run",
        "all",
        "--quick",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    for id in ExperimentId::ALL {
        let dir = tmp.path().join(id.name());
        let r = report(&dir);
        let names: Vec<&str> = r["checks"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c["name"].as_str().unwrap())
            .collect();
        assert_eq!(names, id.checks(), "{}", id.name());
        for file in r["tables"]
            .as_array()
            .unwrap()
            .iter()
            .chain(r["plots"].as_array().unwrap())
        {
            assert!(
                dir.join(file.as_str().unwrap()).is_file(),
                "{} missing",
                file
            );
        }
        assert!(r["timings"]["total_seconds"].as_f64().unwrap() >= 0.0);
    }
}
