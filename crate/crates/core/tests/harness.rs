use std::collections::BTreeSet;
use std::fs;

use gibbsfree::harness::oracle::{l2_error, linear_fit, log_linear_slope, log_log_slope, uniform_points, L2_POINTS};
use gibbsfree::mollify::{BoundaryMode, MollifierConfig};
use gibbsfree::harness::{emit_csv, run_convergence_study, run_study, Row, RunConfig, Study, StudyResult, CSV_HEADER, STUDY_IDS};
use gibbsfree::cheb::Domain;

fn small() -> RunConfig {
    let mut cfg = RunConfig {
        orders: vec![16, 32],
        random_pairs: 2,
        seed: 7,
        ..Default::default()
    };
    cfg.advect.orders = vec![16];
    cfg.advect.snapshot_times = vec![0.0, 0.5];
    cfg
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [a.path(), b.path()] {
        for r in run_study(&small()).unwrap() {
            emit_csv(&r, dir).unwrap();
        }
    }
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 6);
    for n in names {
        assert_eq!(fs::read(a.path().join(&n)).unwrap(), fs::read(b.path().join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn every_study_reports_every_order() {
    let cfg = small();
    let res = run_study(&cfg).unwrap();
    let rows: Vec<&Row> = res.iter().flat_map(|r| &r.rows).collect();
    for id in STUDY_IDS {
        let orders: BTreeSet<usize> = rows.iter().filter(|r| r.study == id).map(|r| r.order).collect();
        let want: BTreeSet<usize> = if id == "fig13" || id == "fig16" {
            cfg.advect.orders.iter().copied().collect()
        } else {
            cfg.orders.iter().copied().collect()
        };
        assert_eq!(orders, want, "{id}");
    }
    assert!(res.iter().all(|r| r.failures == 0));
    assert!(rows.iter().all(|r| r.seconds.is_none()));
}

#[test]
fn single_study_selection() {
    let cfg = RunConfig {
        study: Study::Edges,
        ..small()
    };
    let res = run_study(&cfg).unwrap();
    assert_eq!(res.len(), 1);
    assert_eq!(res[0].name, "edges");
    assert!(res[0].rows.iter().any(|r| r.location.starts_with("random")));
}

#[test]
fn empty_result_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let res = StudyResult {
        name: "empty".into(),
        rows: vec![],
        fits: vec![],
        failures: 0,
        config: RunConfig::default(),
    };
    let (csv, manifest) = emit_csv(&res, dir.path()).unwrap();
    assert_eq!(fs::read_to_string(csv).unwrap(), format!("{}\n", CSV_HEADER.join(",")));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(manifest).unwrap()).unwrap();
    assert_eq!(m["rows"], 0);
    assert_eq!(m["config"]["orders"][0], 8);
}

#[test]
fn awkward_fields_are_quoted() {
    let dir = tempfile::tempdir().unwrap();
    let res = StudyResult {
        name: "quoted".into(),
        rows: vec![Row {
            study: "fig9".into(),
            order: 16,
            metric: "say \"hi\"".into(),
            location: "a,b".into(),
            value: 0.5,
            seconds: Some(1.25),
        }],
        fits: vec![],
        failures: 0,
        config: RunConfig::default(),
    };
    let (csv, _) = emit_csv(&res, dir.path()).unwrap();
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().nth(1).unwrap(), "fig9,16,\"say \"\"hi\"\"\",\"a,b\",5e-1,1.250000");
    let mut rd = csv::Reader::from_path(&csv).unwrap();
    let rec = rd.records().next().unwrap().unwrap();
    assert_eq!(&rec[3], "a,b");
    assert_eq!(rec[4].parse::<f64>().unwrap(), 0.5);
}

#[test]
fn l2_oracle_on_known_integrals() {
    let d = Domain::default();
    // int_{-1}^{1} x^2 dx = 2/3
    let xs = uniform_points(d, L2_POINTS);
    let e = l2_error(&xs, |_| 0.0, d).unwrap();
    assert!((e - (2.0f64 / 3.0).sqrt()).abs() < 1e-6);
    let s: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
    assert_eq!(l2_error(&s, f64::sin, d).unwrap(), 0.0);
    assert!(l2_error(&s[1..], f64::sin, d).is_err());
}

#[test]
fn slope_fits() {
    let ns = [8usize, 16, 32, 64];
    let ys: Vec<f64> = ns.iter().map(|&n| 3.0 * (n as f64).powf(-1.5)).collect();
    let (s, r) = log_log_slope(&ns, &ys);
    assert!((s + 1.5).abs() < 1e-12 && (r + 1.0).abs() < 1e-12);
    let ys: Vec<f64> = ns.iter().map(|&n| (-0.2 * n as f64).exp()).collect();
    let (s, _) = log_linear_slope(&ns, &ys);
    assert!((s + 0.2).abs() < 1e-12);
    let (slope, r) = linear_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]);
    assert!((slope - 2.0).abs() < 1e-14 && (r - 1.0).abs() < 1e-14);
}

#[test]
fn mirror_and_truncate_agree_in_the_interior() {
    // the boundary treatment must not leak inward
    let res = run_convergence_study(&RunConfig { orders: vec![64], ..Default::default() }).unwrap();
    let v = res.value("fig14", 64, "mollified", "two_edge@0.002").unwrap();
    let cfg = RunConfig {
        mollifier: MollifierConfig {
            boundary: BoundaryMode::Mirror,
            ..Default::default()
        },
        orders: vec![64],
        ..Default::default()
    };
    let m = run_convergence_study(&cfg).unwrap();
    let w = m.value("fig14", 64, "mollified", "two_edge@0.002").unwrap();
    assert!((v - w).abs() <= 1e-12, "{v} {w}");
}
