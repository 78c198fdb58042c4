use std::path::{Path, PathBuf};
use std::process::Command;

use epr_lab::records::RecordFormat;
use epr_lab::{run, RunOptions, Scenario};
use serde_json::Value;

fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(format!("{name}.toml"))
}

fn bundled() -> Vec<PathBuf> {
    let mut paths: Vec<_> =
        std::fs::read_dir(Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios"))
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|e| e == "toml"))
            .collect();
    paths.sort();
    assert!(paths.len() >= 3);
    paths
}

fn epr(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_epr"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn bundled_scenarios_round_trip() {
    for path in bundled() {
        let s = Scenario::load(&path).unwrap();
        let again = Scenario::from_toml_str(&s.to_toml_string()).unwrap();
        assert_eq!(again, s, "{}", path.display());
    }
}

#[test]
fn report_is_independent_of_worker_count() {
    for path in bundled() {
        let s = Scenario::load(&path).unwrap();
        let base = run(
            &s,
            &RunOptions {
                workers: Some(1),
                ..Default::default()
            },
        )
        .unwrap()
        .report
        .to_json();
        for workers in [2, 5] {
            let other = run(
                &s,
                &RunOptions {
                    workers: Some(workers),
                    ..Default::default()
                },
            )
            .unwrap();
            assert_eq!(
                other.report.to_json(),
                base,
                "{} with {workers} workers",
                path.display()
            );
        }
    }
}

#[test]
fn shared_axis_report_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, stdout, _) = epr(&[
        "--scenario",
        scenario_path("epr_shared_axis").to_str().unwrap(),
        "--out",
        out,
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("bell_locality"));
    let r = report(dir.path());
    let p = &r["probabilities"][0];
    assert_eq!(p["eq5"]["alice_up_given_bob_down"].as_f64().unwrap(), 1.0);
    assert!(p["eq6"]["joint_up_up"].as_f64().unwrap().abs() <= 1e-12);
    let bell = &r["locality"][0]["bell_locality"];
    assert_eq!(bell["tag"], "eq8");
    assert_eq!(bell["holds"], false);
    assert!((bell["gap"].as_f64().unwrap() - 0.5).abs() <= 1e-12);
    assert_eq!(r["sampling"]["pairs"][0]["equal_outcomes"], 0);
    assert!(r["frames"].get("god_view").is_none());
    assert!(r["timings"].is_null());
}

#[test]
fn chsh_exact_mode() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, _, _) = epr(&[
        "--scenario",
        scenario_path("chsh_canonical").to_str().unwrap(),
        "--out",
        out,
        "--exact",
        "-q",
    ]);
    assert_eq!(code, 0);
    let r = report(dir.path());
    let c = &r["chsh"];
    assert_eq!(c["classical_bound"].as_f64().unwrap(), 2.0);
    assert_eq!(c["correlations"]["mode"], "exact");
    assert!((c["correlations"]["s"].as_f64().unwrap() - 2.8284271).abs() < 1e-7);
    assert_eq!(c["correlations"]["se"].as_f64().unwrap(), 0.0);
    assert_eq!(c["lhv_baseline"]["max_abs_s"].as_f64().unwrap(), 2.0);
    assert!(r.get("sampling").is_none());
}

#[test]
fn zero_trials_means_no_sampling_section() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let path = scenario_path("epr_shared_axis");
    let (code, _, _) = epr(&[
        "--scenario",
        path.to_str().unwrap(),
        "--out",
        out,
        "--seed",
        "42",
        "--trials",
        "0",
        "-q",
    ]);
    assert_eq!(code, 0);
    let r = report(dir.path());
    assert!(r.get("sampling").is_none());
    assert_eq!(r["seed"], 42);
    assert_eq!(r["scenario"]["trials"], 0);
    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let top: Vec<_> = text
        .lines()
        .filter_map(|l| l.strip_prefix("  \"").and_then(|l| l.split('"').next()))
        .collect();
    assert_eq!(
        top,
        [
            "scenario",
            "seed",
            "probabilities",
            "locality",
            "chsh",
            "frames",
            "retrodiction",
            "timings"
        ]
    );
}

#[test]
fn binary_output_is_byte_identical() {
    let path = scenario_path("chsh_canonical");
    let mut reports = Vec::new();
    for workers in ["1", "4"] {
        let dir = tempfile::tempdir().unwrap();
        let (code, _, _) = epr(&[
            "--scenario",
            path.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
            "--workers",
            workers,
            "--records",
            "csv",
            "-q",
        ]);
        assert_eq!(code, 0);
        reports.push((
            std::fs::read(dir.path().join("report.json")).unwrap(),
            std::fs::read(dir.path().join("records.csv")).unwrap(),
        ));
    }
    assert_eq!(reports[0], reports[1]);
    let csv = String::from_utf8(reports[0].1.clone()).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "trial,observer,theta,phi,outcome"
    );
    assert_eq!(csv.lines().count(), 1 + 4 * 100_000 * 2);
}

#[test]
fn god_view_and_timings_are_opt_in() {
    let s = Scenario::load(&scenario_path("epr_shared_axis")).unwrap();
    let out = run(
        &s,
        &RunOptions {
            exact: true,
            god_view: true,
            timings: true,
            ..Default::default()
        },
    )
    .unwrap();
    let god = out
        .report
        .frames
        .as_ref()
        .unwrap()
        .god_view
        .as_ref()
        .unwrap();
    assert_eq!(god.rho.rows(), 36);
    assert!(!out.report.timings.as_ref().unwrap().is_empty());
}

#[test]
fn jsonl_records_match_trials() {
    let s = Scenario::load(&scenario_path("epr_perpendicular")).unwrap();
    let out = run(
        &s,
        &RunOptions {
            trials: Some(10),
            records: Some(RecordFormat::Jsonl),
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(out.records.len(), 20);
    let dir = tempfile::tempdir().unwrap();
    epr_lab::write_outputs(dir.path(), &out, Some(RecordFormat::Jsonl)).unwrap();
    let text = std::fs::read_to_string(dir.path().join("records.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 20);
    assert!(text.starts_with("{\"trial\":0,\"observer\":\"alice\",\"theta\":"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();

    let missing = dir.path().join("nope.toml");
    let (code, _, err) = epr(&["--scenario", missing.to_str().unwrap(), "--out", out]);
    assert_eq!(code, 2, "{err}");

    let bad = dir.path().join("bad.toml");
    let src = std::fs::read_to_string(scenario_path("epr_shared_axis"))
        .unwrap()
        .replace("theta = 0.0", "theta = 270.0");
    std::fs::write(&bad, src).unwrap();
    let (code, _, err) = epr(&["--scenario", bad.to_str().unwrap(), "--out", out]);
    assert_eq!(code, 2);
    assert!(
        err.contains("stations[0].axes[0]") && err.contains("line "),
        "{err}"
    );

    let (code, _, err) = epr(&[
        "--scenario",
        scenario_path("chsh_canonical").to_str().unwrap(),
        "--out",
        out,
        "--trials",
        "0",
        "--seed",
        "x",
    ]);
    assert_eq!(code, 2, "{err}");

    let (code, _, err) = epr(&[
        "--scenario",
        scenario_path("epr_shared_axis").to_str().unwrap(),
        "--out",
        out,
        "--workers",
        "0",
    ]);
    assert_eq!(code, 2, "{err}");

    // Output directory cannot be created.
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let target = blocker.join("sub");
    let (code, _, err) = epr(&[
        "--scenario",
        scenario_path("epr_shared_axis").to_str().unwrap(),
        "--out",
        target.to_str().unwrap(),
        "--exact",
    ]);
    assert_eq!(code, 3, "{err}");
}

#[test]
fn product_state_scenario_is_local() {
    let src = std::fs::read_to_string(scenario_path("epr_shared_axis"))
        .unwrap()
        .replace(
            "kind = \"singlet\"",
            "kind = \"product\"\nalice = { axis = { theta = 90.0, phi = 0.0 }, outcome = \"up\" }\nbob = { axis = { theta = 90.0, phi = 0.0 }, outcome = \"down\" }",
        );
    let s = Scenario::from_toml_str(&src).unwrap();
    let out = run(
        &s,
        &RunOptions {
            exact: true,
            ..Default::default()
        },
    )
    .unwrap();
    let loc = &out.report.locality.as_ref().unwrap()[0];
    assert!(loc.bell_locality.as_ref().unwrap().report.holds);
    assert!(loc.factorization.as_ref().unwrap().report.holds);
}
