//! The CSV rows and JSON summary written by scaling runs: the interface a
//! downstream report consumes.

use std::collections::BTreeMap;

use qsynth_core::experiments::{
    fit_rows, read_scaling_csv, scaling_run, write_scaling_csv, ExperimentFile, ScalingRow, SCALING_HEADER,
};
use qsynth_core::gates::GateSet;

const CONFIG: &str = r#"
[run]
gate_set = "v5"
budget = 6
seed = 21
prob = true

[targets]
specs = ["haar:2", "rz:0.3", "edge:q1234"]

[grid]
eps = [0.4, 0.3, 0.2, 0.15]
"#;

fn run() -> qsynth_core::experiments::ScalingReport {
    scaling_run(&ExperimentFile::parse(CONFIG).unwrap().scaling().unwrap()).unwrap()
}

#[test]
fn header_and_columns() {
    let csv = run().csv().unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "target_id,kind,eps,det_count,prob_count,best_distance,elapsed_ms");
    assert_eq!(SCALING_HEADER.len(), 7);
    for l in lines {
        let f: Vec<&str> = l.split(',').collect();
        assert_eq!(f.len(), 7, "{l}");
        assert!(f[2].parse::<f64>().is_ok());
        assert!(f[3].is_empty() || f[3].parse::<u32>().is_ok());
        assert!(f[4].is_empty() || f[4].parse::<u32>().is_ok());
        assert!(f[5].parse::<f64>().is_ok());
        // timing is off by default
        assert!(f[6].is_empty());
    }
}

#[test]
fn csv_round_trips_and_is_deterministic() {
    let a = run();
    let b = run();
    let csv = a.csv().unwrap();
    assert_eq!(csv, b.csv().unwrap());
    assert_eq!(a.summary_json(), b.summary_json());
    let rows = read_scaling_csv(&csv).unwrap();
    assert_eq!(rows.len(), 4 * 4);
    for (r, s) in rows.iter().zip(&a.rows) {
        assert_eq!(r.target_id, s.target_id);
        assert_eq!(r.det_count, s.det_count);
        assert_eq!(r.prob_count, s.prob_count);
        assert_eq!(r.eps, s.eps);
        assert_eq!(r.best_distance.to_bits(), s.best_distance.to_bits());
    }
}

#[test]
fn summary_matches_fits_of_written_csv() {
    let report = run();
    let summary: BTreeMap<String, Option<f64>> = serde_json::from_str(&report.summary_json()).unwrap();
    let rows = read_scaling_csv(&report.csv().unwrap()).unwrap();
    let ids: std::collections::BTreeSet<&str> = rows.iter().map(|r| r.target_id.as_str()).collect();
    assert_eq!(summary.keys().map(String::as_str).collect::<std::collections::BTreeSet<_>>(), ids);
    for (id, slope) in &summary {
        let own: Vec<ScalingRow> = rows.iter().filter(|r| &r.target_id == id).cloned().collect();
        let refit = fit_rows(&own, GateSet::CliffordV(5)).ok().map(|f| f.slope);
        assert_eq!(*slope, refit, "{id}");
    }
}

#[test]
fn fixture_with_exact_slope_three() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/slope3.csv")).unwrap();
    let rows = read_scaling_csv(&text).unwrap();
    assert!(rows.iter().all(|r| r.prob_count.is_none() && r.elapsed_ms.is_none()));
    // ε = 5^{-j}/5 with count 3j: slope 3 in base 5
    let fit = fit_rows(&rows, GateSet::CliffordV(5)).unwrap();
    assert!((fit.slope - 3.0).abs() < 1e-12);
    assert!(fit.residual < 1e-12);
    assert_eq!(write_scaling_csv(&rows).unwrap(), text);
}

#[test]
fn malformed_rows_name_the_row() {
    let bad = "target_id,kind,eps,det_count,prob_count,best_distance,elapsed_ms\na,haar,0.1,3,,0.05,\nb,haar,x,3,,0.05,\n";
    let e = read_scaling_csv(bad).unwrap_err().to_string();
    assert!(e.contains("row 2"), "{e}");
    let wrong_header = "target,kind\n";
    assert!(read_scaling_csv(wrong_header).is_err());
}

#[test]
fn summary_is_a_flat_object_of_numbers_or_null() {
    let v: serde_json::Value = serde_json::from_str(&run().summary_json()).unwrap();
    let obj = v.as_object().unwrap();
    assert!(!obj.is_empty());
    assert!(obj.values().all(|x| x.is_f64() || x.is_null()));
}
