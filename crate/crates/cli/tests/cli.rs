use std::path::Path;
use std::process::{Command, Output};

use dynex_core::estimators::Method;
use dynex_core::harness::{find, from_json, Check, ExperimentKind, ExperimentSpec, Quantity, Reference, CSV_HEADER};

fn dynex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynex")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// The single table1 case at an irrational point, whose index is 1.
fn generic_point_spec(reference: f64) -> ExperimentSpec {
    let mut spec = find("table1").unwrap();
    spec.id = "generic-point".into();
    spec.trajectory.n_points = 100_000;
    spec.trajectory.replicas = 2;
    let ExperimentKind::Estimates { cases } = &mut spec.kind else { unreachable!() };
    cases.retain(|c| c.label == "2x z=1/pi");
    assert_eq!(cases.len(), 1);
    cases[0].diagnostics.clear();
    cases[0].checks = vec![Check::near(Quantity::Theta(Method::OrderM(5)), Reference::Value(reference), 0.02)];
    spec
}

fn write_spec(dir: &Path, spec: &ExperimentSpec) -> String {
    let path = dir.join(format!("{}.json", spec.id));
    std::fs::write(&path, serde_json::to_string(spec).unwrap()).unwrap();
    path.to_str().unwrap().to_owned()
}

fn write_orbit_csv(path: &Path, rows: usize) {
    let mut x: f64 = 0.123_456_7;
    let mut text = String::from("x,y\n");
    for i in 0..rows {
        x = (4.0 * x * (1.0 - x)).clamp(1e-12, 1.0 - 1e-12);
        text.push_str(&format!("{x},{}\n", (i as f64 * 0.618_033_988_749_895).fract()));
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn list_names_every_registry_experiment() {
    let o = dynex(&["list"]);
    assert!(o.status.success());
    let out = stdout(&o);
    for id in ["table1", "table2-rotation", "dei-markov", "visits-rotation", "sequential-appendix"] {
        assert!(out.lines().any(|l| l.starts_with(&format!("{id}\t"))), "missing {id}");
    }
    assert_eq!(out.lines().count(), 17);
}

#[test]
fn unknown_experiment_is_an_error() {
    let o = dynex(&["run", "no-such-experiment"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no-such-experiment"));
}

#[test]
fn exit_code_tracks_self_checks() {
    let dir = tempfile::tempdir().unwrap();
    let pass = dynex(&["run", &write_spec(dir.path(), &generic_point_spec(1.0))]);
    assert_eq!(pass.status.code(), Some(0), "{}", stderr(&pass));
    let lines: Vec<String> = stdout(&pass).lines().map(str::to_owned).collect();
    assert_eq!(lines[0], CSV_HEADER.join(","));
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("generic-point,2x z=1/pi,order_m(5),"));

    let mut failing = generic_point_spec(0.5);
    failing.id = "generic-point-wrong".into();
    let fail = dynex(&["run", &write_spec(dir.path(), &failing)]);
    assert_eq!(fail.status.code(), Some(1));
    assert!(stderr(&fail).contains("FAIL generic-point-wrong"));
}

#[test]
fn json_output_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), &generic_point_spec(1.0));
    let out = dir.path().join("res.json");
    let o = dynex(&["run", &spec, "--format", "json", "--out", out.to_str().unwrap(), "--seed", "9"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let records = from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0].trajectory.seed, 9);
    assert!(records[0].pass);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), &generic_point_spec(1.0));
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[run]\nreplicas = 3\nseed = 5\n\n[output]\nformat = \"json\"\n").unwrap();
    let o = dynex(&["run", &spec, "--config", cfg.to_str().unwrap(), "--seed", "6"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let records = from_json(&stdout(&o)).unwrap();
    assert_eq!(records[0].trajectory.replicas, 3);
    assert_eq!(records[0].trajectory.seed, 6);

    std::fs::write(&cfg, "[run]\nbogus = 1\n").unwrap();
    let bad = dynex(&["run", &spec, "--config", cfg.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn sweep_emits_one_record_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), &generic_point_spec(1.0));
    let o = dynex(&["sweep", "--base", &spec, "--param", "m", "--values", "1,3", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let records = from_json(&stdout(&o)).unwrap();
    assert_eq!(records.len(), 2);
    assert_eq!(records[0].rows[0].method, "order_m(1)");
    assert_eq!(records[1].rows[0].method, "order_m(3)");
}

#[test]
fn ei_on_an_ingested_series() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("orbit.csv");
    write_orbit_csv(&csv, 20_000);
    let o =
        dynex(&["ei", "--input", csv.to_str().unwrap(), "--target", "row:10", "--quantile", "0.99", "--order", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let methods: Vec<&str> = out.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(methods, ["order_m(3)", "q_hat(0)", "q_hat(1)", "q_hat(2)"]);
    let theta: f64 = out.lines().nth(1).unwrap().split(',').nth(3).unwrap().parse().unwrap();
    assert!((0.0..=1.0).contains(&theta));

    let s = dynex(&["ei", "--input", csv.to_str().unwrap(), "--target", "0.3,0.3", "--method", "suveges"]);
    assert!(s.status.success(), "{}", stderr(&s));
    assert!(stdout(&s).contains(",suveges,"));
}

#[test]
fn ei_reports_malformed_input_with_its_row() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    std::fs::write(&csv, "a,b\n0.1,0.2\n0.3,oops\n").unwrap();
    let o = dynex(&["ei", "--input", csv.to_str().unwrap(), "--target", "row:0"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("row 3") || err.contains("line 3"), "{err}");

    std::fs::write(&csv, "0.5,0.5\n0.5,0.5\n0.5,0.5\n").unwrap();
    let flat = dynex(&["ei", "--input", csv.to_str().unwrap(), "--target", "row:0"]);
    assert_eq!(flat.status.code(), Some(2));
}

#[test]
fn visits_on_an_ingested_series_writes_a_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("orbit.csv");
    write_orbit_csv(&csv, 50_000);
    let out = dir.path().join("visits.csv");
    let o = dynex(&[
        "visits",
        "--input",
        csv.to_str().unwrap(),
        "--target",
        "row:100",
        "--t",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = std::fs::read_to_string(&out).unwrap();
    assert!(summary.contains("tv[poisson(5)]"));
    let hist = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.to_string_lossy().ends_with(".hist.csv"))
        .expect("histogram file");
    let text = std::fs::read_to_string(hist).unwrap();
    assert!(text.starts_with("k,empirical,model1,model2"));
    let total: f64 = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
}
