//! Invariants of the numerical engines under randomised inputs.

use proptest::prelude::*;
use riskkit::aggregate_engine::{compute_fft, compute_recursive};
use riskkit::copulas::Copula;
use riskkit::discretize::{discretize, ArithmeticSeverity, DiscretizationMethod};
use riskkit::distributions::{params, Continuous, Discrete};
use riskkit::lossaggregation::{LossAggregation, Margins};
use riskkit::lossmodel::{cost_layer, EngineConfig, Frequency, Layer};

fn lattice() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 2..9).prop_filter_map("needs mass", |w| {
        let total: f64 = w.iter().sum();
        (total > 1e-3).then(|| w.iter().map(|x| x / total).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fft_agrees_with_recursion(fj in lattice(), mu in 0.1f64..6.0) {
        let s: f64 = fj.iter().sum();
        let sev = ArithmeticSeverity::from_probs(1.0, fj.iter().map(|x| x / s).collect()).unwrap();
        let freq = Discrete::poisson(mu).unwrap();
        let a = compute_fft(&freq, &sev, 256).unwrap();
        let b = compute_recursive(&freq, &sev, 256).unwrap();
        let (_, fa) = a.cdf_nodes();
        let (_, fb) = b.cdf_nodes();
        let sup = fa.iter().zip(&fb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(sup <= 1e-9, "sup {}", sup);
        prop_assert!(fa.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn discretisation_is_a_probability_vector(a in 0.5f64..10.0, h in 0.05f64..1.0, d in 0.0f64..3.0) {
        let sev = Continuous::from_name("gamma", &params(&[("a", a)])).unwrap();
        for method in [DiscretizationMethod::MassDispersal, DiscretizationMethod::LocalMoments, DiscretizationMethod::UpperDiscretisation] {
            let lat = discretize(&sev, method, 200, h, d, f64::INFINITY).unwrap();
            let total: f64 = lat.fj.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-9, "{:?} sums to {}", method, total);
            prop_assert!(lat.fj.iter().all(|p| *p >= 0.0));
        }
    }

    #[test]
    fn local_moments_preserve_the_limited_mean(a in 0.5f64..10.0, h in 0.05f64..0.5) {
        let sev = Continuous::from_name("gamma", &params(&[("a", a)])).unwrap();
        let lat = discretize(&sev, DiscretizationMethod::LocalMoments, 100, h, 0.0, f64::INFINITY).unwrap();
        let lev = sev.lev(99.0 * h).unwrap();
        prop_assert!((lat.mean() - lev).abs() < 1e-8 * lev.max(1.0));
    }

    #[test]
    fn archimedean_cdfs_respect_frechet_bounds(u in 0.01f64..0.99, v in 0.01f64..0.99, theta in 0.1f64..5.0) {
        let lower = (u + v - 1.0).max(0.0);
        let upper = u.min(v);
        for c in [Copula::clayton(theta, 2).unwrap(), Copula::frank(theta, 2).unwrap(), Copula::gumbel(1.0 + theta, 2).unwrap()] {
            let p = c.cdf(&[u, v]).unwrap();
            prop_assert!(p >= lower - 1e-12 && p <= upper + 1e-12, "{} {}", c.name(), p);
        }
    }

    #[test]
    fn aep_is_monotone_in_the_threshold(s in 0.1f64..50.0, ds in 0.01f64..10.0, theta in 0.2f64..3.0) {
        let m = Margins::new(vec![
            Continuous::from_name("pareto2", &params(&[("shape", 1.5)])).unwrap(),
            Continuous::from_name("exponential", &params(&[])).unwrap(),
        ]).unwrap();
        let la = LossAggregation::new(m, Copula::clayton(theta, 2).unwrap(), 7).unwrap();
        let (a, b) = (la.aep_cdf(s, 7).unwrap(), la.aep_cdf(s + ds, 7).unwrap());
        prop_assert!((0.0..=1.0).contains(&a) && a <= b + 1e-9, "{} {}", a, b);
    }

    #[test]
    fn contiguous_layers_add_up(split in 1.0f64..99.0, mu in 0.5f64..5.0) {
        let sev = Continuous::from_name("lognormal", &params(&[("shape", 1.0), ("scale", 20.0)])).unwrap();
        let f = Frequency::new(Discrete::poisson(mu).unwrap(), 0.0).unwrap();
        let prem = |d: f64, c: f64| {
            cost_layer(&f, &sev, &Layer::xl(c, d).unwrap(), &EngineConfig::default(), 0).unwrap().pure_premium.unwrap()
        };
        let whole = prem(5.0, 100.0);
        let parts = prem(5.0, split) + prem(5.0 + split, 100.0 - split);
        prop_assert!((whole - parts).abs() < 1e-9 * whole);
    }
}
