use std::fmt::Write as _;
use std::path::Path;

use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use dynex_core::dynamics::{orbit, MapSpec, PerturbationScheme, PointState, TrajectoryConfig};
use dynex_core::estimators::{estimate, q_spectrum, Method};
use dynex_core::harness::{ingest_series, observable_series, read_table, require_variation, IngestTarget, Metric};
use dynex_core::observables::{exceedances_at_quantile, observe_fixed, points, DEFAULT_CAP};
use dynex_core::Error;

const METHODS: [Method; 4] = [Method::Suveges, Method::OrderM(1), Method::OrderM(5), Method::FromQk(5)];

fn write_rows(path: &Path, header: Option<&str>, rows: &[Vec<f64>]) {
    let mut text = String::new();
    if let Some(h) = header {
        writeln!(text, "{h}").unwrap();
    }
    for r in rows {
        let fields: Vec<String> = r.iter().map(f64::to_string).collect();
        writeln!(text, "{}", fields.join(",")).unwrap();
    }
    std::fs::write(path, text).unwrap();
}

/// Doubling orbit in the first column, tripling orbit in the second.
fn two_column_orbit(n: usize) -> Vec<Vec<f64>> {
    let a = orbit(&MapSpec::Doubling, &PerturbationScheme::None, &TrajectoryConfig::new(n, 11)).unwrap();
    let b = orbit(&MapSpec::Tripling, &PerturbationScheme::None, &TrajectoryConfig::new(n, 12)).unwrap();
    a.zip(b).map(|(x, y)| vec![x.coords()[0], y.coords()[0]]).collect()
}

fn all_estimates(values: Vec<f64>, p: f64) -> Vec<f64> {
    let s = exceedances_at_quantile(values, p).unwrap();
    let mut out: Vec<f64> = METHODS.iter().map(|&m| estimate(&s, m).unwrap()).collect();
    out.extend(q_spectrum(&s, 5).unwrap().q);
    out
}

#[test]
fn file_round_trip_matches_in_memory_pipeline() {
    let rows = two_column_orbit(200_000);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("orbit.csv");
    write_rows(&path, Some("x,y"), &rows);

    for i in [0usize, 777, 123_456] {
        let z = PointState::new(&rows[i]).unwrap();
        let stream = points(rows.iter().map(|r| PointState::new(r).unwrap()));
        let in_memory = observe_fixed(stream, &z).unwrap();
        let ingested = ingest_series(&path, &IngestTarget::Row(i), Metric::Torus).unwrap();
        assert_eq!(in_memory.len(), ingested.len());
        let worst = in_memory.iter().zip(&ingested).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(worst <= 1e-12, "row {i}: observable gap {worst}");

        for p in [0.99, 0.999] {
            let a = all_estimates(in_memory.clone(), p);
            let b = all_estimates(ingested.clone(), p);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-12, "row {i}, p {p}: {a:?} vs {b:?}");
            }
        }
    }
}

#[test]
fn explicit_vector_target_equals_row_target() {
    let rows = two_column_orbit(5_000);
    let by_row = observable_series(&rows, &IngestTarget::Row(42), Metric::Euclidean).unwrap();
    let by_vec = observable_series(&rows, &IngestTarget::Vector(rows[42].clone()), Metric::Euclidean).unwrap();
    assert_eq!(by_row, by_vec);
    assert_eq!(by_row[42], DEFAULT_CAP);
}

#[test]
fn iid_gaussian_rows_show_no_clustering() {
    let mut rng = StdRng::seed_from_u64(2024);
    let rows: Vec<Vec<f64>> =
        (0..100_000).map(|_| (0..10).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gauss.csv");
    write_rows(&path, None, &rows);
    let values = ingest_series(&path, &IngestTarget::Vector(vec![0.0; 10]), Metric::Euclidean).unwrap();
    require_variation(&values).unwrap();
    let s = exceedances_at_quantile(values, 0.99).unwrap();
    // i.i.d. flags: θ̂_m converges to (1 − q)^m with q = 0.01.
    let theta5 = estimate(&s, Method::OrderM(5)).unwrap();
    assert!((theta5 - 0.99f64.powi(5)).abs() <= 0.01, "theta5 {theta5}");
    let suveges = estimate(&s, Method::Suveges).unwrap();
    assert!((suveges - 1.0).abs() <= 0.02, "suveges {suveges}");
}

#[test]
fn identical_rows_sit_at_the_cap_and_carry_no_variation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("same.csv");
    std::fs::write(&path, "0.25,0.5\n0.25,0.5\n0.25,0.5\n").unwrap();
    let values = ingest_series(&path, &IngestTarget::Row(0), Metric::Euclidean).unwrap();
    assert_eq!(values, vec![DEFAULT_CAP; 3]);
    assert!(matches!(require_variation(&values), Err(Error::ZeroVariance)));
}

#[test]
fn ragged_rows_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ragged.csv");
    std::fs::write(&path, "1,2\n3,4\n5\n").unwrap();
    match read_table(&path) {
        Err(Error::Parse { row, reason, .. }) => {
            assert_eq!(row, 3);
            assert!(reason.contains("expected 2 fields"), "{reason}");
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn empty_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    std::fs::write(&path, "").unwrap();
    assert!(matches!(read_table(&path), Err(Error::EmptyInput(_))));
    std::fs::write(&path, "x,y\n").unwrap();
    assert!(matches!(read_table(&path), Err(Error::EmptyInput(_))));
}

#[test]
fn non_numeric_field_reports_its_row() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "x,y\n0.1,0.2\n0.3,0.4\n0.5,n/a\n").unwrap();
    match read_table(&path) {
        Err(e @ Error::Parse { row: 4, .. }) => assert!(e.to_string().contains("n/a"), "{e}"),
        other => panic!("unexpected {other:?}"),
    }
    let missing = dir.path().join("missing.csv");
    assert!(matches!(read_table(&missing), Err(Error::Io { .. })));
}

#[test]
fn header_is_optional() {
    let dir = tempfile::tempdir().unwrap();
    let with = dir.path().join("with.csv");
    let without = dir.path().join("without.csv");
    let rows = vec![vec![0.1, 0.2], vec![0.3, 0.4]];
    write_rows(&with, Some("a,b"), &rows);
    write_rows(&without, None, &rows);
    assert_eq!(read_table(&with).unwrap(), rows);
    assert_eq!(read_table(&without).unwrap(), rows);
}
