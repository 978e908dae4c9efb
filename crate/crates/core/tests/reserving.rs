//! Fisher-Lange and collective-risk reserving properties on the fixture triangles.

use std::path::PathBuf;

use proptest::prelude::*;
use riskkit::lossreserve::{crm_reserve, fisher_lange, read_vector_csv, LossReserve, ReservingModel, TriangleSet};

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/fixture")
}

fn data() -> TriangleSet {
    TriangleSet::read_dir(fixture_dir()).unwrap()
}

fn czj() -> Vec<f64> {
    read_vector_csv(fixture_dir().join("czj.csv")).unwrap()
}

#[test]
fn fixture_reserve_is_stable() {
    let fl = fisher_lange(&data(), &ReservingModel::fisher_lange(false, vec![1.0]).unwrap()).unwrap();
    assert!((fl.reserve / 101_663_757.15 - 1.0).abs() < 1e-9, "{}", fl.reserve);
    assert_eq!(fl.reserve_by_period[0], 0.0);
    let by_period: f64 = fl.reserve_by_period.iter().sum();
    assert!((by_period - fl.reserve).abs() < 1e-6 * fl.reserve);
}

#[test]
fn weights_and_alpha_conventions_with_tail() {
    let fl = fisher_lange(&data(), &ReservingModel::fisher_lange(true, vec![1.0]).unwrap()).unwrap();
    let jj = fl.horizon;
    assert_eq!(fl.alpha[jj], 1.0);
    for (i, w) in fl.settlement_speed.iter().enumerate() {
        assert_eq!(w.len(), fl.future(i).len());
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-10, "row {i}");
        assert!(w.iter().all(|&v| v >= 0.0));
    }
    let no_tail = fisher_lange(&data(), &ReservingModel::fisher_lange(false, vec![1.0]).unwrap()).unwrap();
    assert!(fl.reserve >= no_tail.reserve);
}

#[test]
fn claims_inflation_raises_the_reserve() {
    let flat = fisher_lange(&data(), &ReservingModel::fisher_lange(false, vec![1.0]).unwrap()).unwrap();
    let infl = fisher_lange(&data(), &ReservingModel::fisher_lange(false, vec![1.03]).unwrap()).unwrap();
    assert!(infl.reserve > flat.reserve);
    // the first future calendar period is inflated once
    let i = flat.horizon;
    let j = flat.future(i).start;
    assert!((infl.average_cost[i][j] / flat.average_cost[i][j] - 1.03).abs() < 1e-12);
}

#[test]
fn crm_summary_statistics() {
    let model = ReservingModel::crm(false, vec![1.0], 0.01, 0.01, czj()).unwrap();
    let lr = LossReserve::new(data(), model, 500, 3).unwrap();
    let dist = lr.dist().unwrap();
    assert_eq!(dist.totals.len(), 500);
    assert!((lr.reserve() / lr.fl.reserve - 1.0).abs() < 0.02);
    assert!(lr.ppf(0.25).unwrap() <= lr.ppf(0.5).unwrap() && lr.ppf(0.5).unwrap() <= lr.ppf(0.995).unwrap());
    assert!(lr.coeff_variation().unwrap() > 0.0);
    let report = lr.report_csv();
    assert!(report.starts_with("accident_period,reserve,std,cov\n"));
    assert_eq!(report.lines().count(), lr.fl.horizon + 3);
    assert!(lr.summary().contains("Sim. std"));
}

#[test]
fn fisher_lange_has_no_distribution() {
    let lr = LossReserve::new(data(), ReservingModel::fisher_lange(false, vec![1.0]).unwrap(), 0, 0).unwrap();
    assert!(lr.dist().is_err());
    assert_eq!(lr.std(), 0.0);
}

#[test]
fn structure_variables_widen_the_distribution() {
    let fl_model = ReservingModel::crm(false, vec![1.0], 0.01, 0.01, czj()).unwrap();
    let fl = fisher_lange(&data(), &fl_model).unwrap();
    let narrow = crm_reserve(&fl, &fl_model, 400, 11).unwrap();
    let wide_model = ReservingModel::crm(false, vec![1.0], 0.1, 0.1, czj()).unwrap();
    let wide = crm_reserve(&fl, &wide_model, 400, 11).unwrap();
    assert!(wide.std() > 2.0 * narrow.std());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn reserve_scales_with_amounts(k in 0.01f64..100.0) {
        let model = ReservingModel::fisher_lange(false, vec![1.0]).unwrap();
        let base = fisher_lange(&data(), &model).unwrap();
        let scaled = fisher_lange(&data().scaled_amounts(k), &model).unwrap();
        prop_assert!((scaled.reserve / (k * base.reserve) - 1.0).abs() < 1e-10);
        prop_assert_eq!(scaled.alpha, base.alpha);
    }

    #[test]
    fn crm_is_seed_deterministic(seed in any::<u64>()) {
        let model = ReservingModel::crm(false, vec![1.0], 0.01, 0.01, czj()).unwrap();
        let fl = fisher_lange(&data(), &model).unwrap();
        let a = crm_reserve(&fl, &model, 50, seed).unwrap();
        let b = crm_reserve(&fl, &model, 50, seed).unwrap();
        prop_assert_eq!(a.totals, b.totals);
    }
}
