use std::path::Path;

use proptest::prelude::*;
use ua_wkb::SchemeKind;
use ua_wkb_harness::reference::{decode_field, encode_field, ReferenceKey};
use ua_wkb_harness::sweep::wkb_reference_key;
use ua_wkb_harness::{
    read_records, run_convergence_sweep, run_convergence_sweep_with, write_records, CacheError, ErrorRecord,
    HarnessError, InitialData, ReferenceField, ReferenceStore, Status, SweepConfig, CSV_HEADER,
};

/// A sweep small enough for unit-test time budgets.
fn small() -> SweepConfig {
    SweepConfig {
        schemes: vec![SchemeKind::Lie1234],
        eps: vec![0.25],
        nx: vec![32],
        nt: vec![8, 16, 32, 64],
        nx_ref: 64,
        nt_ref: 1024,
        nx_ref_wave: 512,
        nt_ref_wave: 1024,
        ..SweepConfig::default()
    }
}

#[test]
fn self_comparison_has_zero_wkb_error() {
    let cfg = SweepConfig {
        schemes: vec![SchemeKind::StrangPalindromic],
        nx: vec![64],
        nt: vec![256],
        nt_ref: 256,
        ..small()
    };
    let records = run_convergence_sweep(&cfg).unwrap();
    assert_eq!(records.len(), 1);
    let r = &records[0];
    assert!(r.err_sa <= 1e-12, "{}", r.err_sa);
    assert_eq!(r.status, Status::Ok);
    assert!(r.mass_drift_rel < 1e-12);
    assert_eq!(r.h, 0.2 / 256.0);
    assert_eq!(r.dx, 2.0 * std::f64::consts::PI / 64.0);
    // the wave reference is a different discretization; agreement is at the
    // level of the time error only
    assert!(r.err_psi < 1e-4 && r.err_rho < 1e-4, "{r:?}");
}

#[test]
fn lie_refinement_is_monotone_and_first_order() {
    let cfg = SweepConfig { eps: vec![0.25, 0.0625], ..small() };
    let records = run_convergence_sweep(&cfg).unwrap();
    for eps in &cfg.eps {
        let e: Vec<f64> = records.iter().filter(|r| r.eps == *eps).map(|r| r.err_sa).collect();
        assert_eq!(e.len(), 4);
        for w in e.windows(2) {
            assert!(w[1] <= 1.05 * w[0], "{e:?}");
            let ratio = w[0] / w[1];
            assert!((1.7..2.3).contains(&ratio), "{e:?}");
        }
    }
}

#[test]
fn records_sorted_and_counted() {
    let cfg = SweepConfig {
        schemes: vec![SchemeKind::StrangPalindromic, SchemeKind::Lie1234],
        eps: vec![0.25, 1.0],
        nx: vec![32, 16],
        nt: vec![16, 8],
        ..small()
    };
    let records = run_convergence_sweep(&cfg).unwrap();
    assert_eq!(records.len(), 2 * 2 * 2 * 2);
    let keys: Vec<(String, f64, usize, usize)> = records
        .iter()
        .map(|r| (r.scheme.name().to_string(), r.eps, r.nx, r.nt))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then((a.2, a.3).cmp(&(b.2, b.3))));
    assert_eq!(keys, sorted);
    assert_eq!(keys[0], ("lie_1234".to_string(), 0.25, 16, 8));
}

fn without_wallclock(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| {
            let mut f: Vec<&str> = l.split(',').collect();
            f.remove(11);
            f.join(",")
        })
        .collect()
}

#[test]
fn deterministic_output_and_cache_reuse() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SweepConfig {
        cache_dir: Some(dir.path().join("cache")),
        ..small()
    };
    let first = run_convergence_sweep(&cfg).unwrap();
    let files = std::fs::read_dir(dir.path().join("cache")).unwrap().count();
    assert_eq!(files, 2);
    // second run reads the cached references
    let second = run_convergence_sweep(&cfg).unwrap();
    let fresh = run_convergence_sweep(&SweepConfig { cache_dir: None, ..cfg.clone() }).unwrap();
    for ((a, b), c) in first.iter().zip(&second).zip(&fresh) {
        for (x, y) in [(a.err_sa, b.err_sa), (a.err_rho, b.err_rho), (a.err_psi, c.err_psi), (a.err_sa, c.err_sa)] {
            assert!((x - y).abs() <= 1e-14);
        }
    }
    let (p1, p2) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    write_records(&first, &p1).unwrap();
    write_records(&second, &p2).unwrap();
    assert_eq!(without_wallclock(&p1), without_wallclock(&p2));
}

#[test]
fn corrupt_cache_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SweepConfig {
        cache_dir: Some(dir.path().to_path_buf()),
        nt: vec![8],
        ..small()
    };
    run_convergence_sweep(&cfg).unwrap();
    let key = wkb_reference_key(&cfg, SchemeKind::Lie1234, 0.25, 8);
    let path = dir.path().join(key.file_name());
    let text = std::fs::read_to_string(&path).unwrap();
    let truncated: String = text.lines().take(10).map(|l| format!("{l}\n")).collect();
    std::fs::write(&path, truncated).unwrap();
    match run_convergence_sweep(&cfg) {
        Err(HarnessError::Cache(CacheError::Corrupt { .. })) => {}
        other => panic!("expected corrupt cache, got {other:?}"),
    }
    let mut lines: Vec<&str> = text.lines().collect();
    lines[1] = "0 1 x 0";
    std::fs::write(&path, lines.join("\n")).unwrap();
    assert!(matches!(
        run_convergence_sweep(&cfg),
        Err(HarnessError::Cache(CacheError::Corrupt { line: 2, .. }))
    ));
}

#[test]
fn cache_encoding_round_trips_exactly() {
    let key = ReferenceKey {
        scheme: SchemeKind::StrangPalindromic,
        eps: 0.1,
        nx: 16,
        nt: 4,
        t_final: 0.3,
        data_hash: "abc".into(),
    };
    let field = ua_wkb_harness::reference::compute_reference(&key, &ua_wkb_harness::InitialData::Builtin).unwrap();
    let text = encode_field(&key, &field);
    assert_eq!(text.lines().count(), 17);
    assert_eq!(text.lines().nth(1).unwrap().split(' ').count(), 4);
    let back = decode_field(&key, &text, Path::new("mem")).unwrap();
    let (a, b) = (field.as_wkb().unwrap(), back.as_wkb().unwrap());
    assert_eq!(a.phase().values(), b.phase().values());
    assert_eq!(a.amplitude().values(), b.amplitude().values());

    let wave_key = ReferenceKey { scheme: SchemeKind::TsspYoshida4, ..key };
    let wave = ua_wkb_harness::reference::compute_reference(&wave_key, &ua_wkb_harness::InitialData::Builtin).unwrap();
    let text = encode_field(&wave_key, &wave);
    assert_eq!(text.lines().nth(1).unwrap().split(' ').count(), 3);
    match decode_field(&wave_key, &text, Path::new("mem")).unwrap() {
        ReferenceField::Wave(w) => assert_eq!(w.psi().values(), wave.as_wave().unwrap().psi().values()),
        other => panic!("{other:?}"),
    }
}

#[test]
fn diverged_cells_are_recorded() {
    let cfg = SweepConfig {
        // one step of length 0.24 against max|S''| = 4 breaks the contraction bound
        initial_data: InitialData::expr("4*sin(x)", "1", "0", "0").unwrap(),
        nt: vec![1, 64],
        t_final: 0.24,
        ..small()
    };
    let records = run_convergence_sweep_with(&cfg, &ReferenceStore::default()).unwrap();
    assert_eq!(records[0].nt, 1);
    assert_eq!(records[0].status, Status::Diverged);
    assert!(records[0].err_sa.is_nan());
    assert_eq!(records[1].status, Status::Ok);
}

#[test]
fn csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    write_records(&[], &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), format!("{CSV_HEADER}\n"));
    assert!(read_records(&path).unwrap().is_empty());

    let r = sample_record(0.0625, 1.52587890625e-5);
    write_records(std::slice::from_ref(&r), &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().count(), 2);
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("lie_1234,6.2500000000000000e-2,128,64,"), "{row}");
    assert!(row.contains(",1.5258789062500000e-5,3.0517578125000000e-5,7.6293945312500000e-6,"));
    assert_eq!(read_records(&path).unwrap(), vec![r]);

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "scheme,eps\n").unwrap();
    assert!(read_records(&bad).is_err());
    assert!(matches!(
        write_records(&[], &dir.path().join("missing/x.csv")),
        Err(HarnessError::Io { .. })
    ));
}

fn sample_record(eps: f64, err: f64) -> ErrorRecord {
    ErrorRecord {
        scheme: SchemeKind::Lie1234,
        eps,
        nx: 128,
        nt: 64,
        h: 0.2 / 64.0,
        dx: 2.0 * std::f64::consts::PI / 128.0,
        t_final: 0.2,
        err_rho: err,
        err_psi: 2.0 * err,
        err_sa: 0.5 * err,
        mass_drift_rel: 1e-15,
        wallclock_seconds: 0.25,
        status: Status::Ok,
        reference_id: "0123456789abcdef+fedcba9876543210".into(),
    }
}

proptest! {
    #[test]
    fn csv_rows_round_trip(eps in 1e-6f64..1.0, err in 0f64..1e3, nx in 2u32..14, nt in 0u32..16, diverged: bool) {
        let mut r = sample_record(eps, err);
        r.nx = 1 << nx;
        r.nt = 1 << nt;
        if diverged {
            r.status = Status::Diverged;
            r.err_sa = f64::NAN;
        }
        let back = ErrorRecord::from_csv_row(&r.to_csv_row()).unwrap();
        prop_assert_eq!(back.to_csv_row(), r.to_csv_row());
        prop_assert_eq!(back.eps, r.eps);
        prop_assert_eq!(back.err_rho, r.err_rho);
    }
}
