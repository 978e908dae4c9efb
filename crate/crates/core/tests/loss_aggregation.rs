use riskkit::copulas::Copula;
use riskkit::distributions::{params, Continuous};
use riskkit::lossaggregation::{LossAggregation, Margins};

fn lomax(shape: f64) -> Continuous {
    Continuous::from_name("pareto2", &params(&[("scale", 1.0), ("shape", shape)])).unwrap()
}

fn clayton_sum(d: usize, theta: f64, n_iter: u32) -> LossAggregation {
    let shapes = [0.9, 1.8, 2.6, 3.3, 4.1];
    let margins = Margins::new(shapes[..d].iter().map(|&g| lomax(g)).collect()).unwrap();
    LossAggregation::new(margins, Copula::clayton(theta, d).unwrap(), n_iter).unwrap()
}

// Higher dimensions have no tabulated reference: check AEP against Monte Carlo and its
// convergence in the number of iterations.
#[test]
fn higher_dimensions_agree_with_monte_carlo() {
    for (d, n_iter) in [(4, 6), (5, 4)] {
        let mut la = clayton_sum(d, 0.8, n_iter);
        la.dist_calculate(400_000, 11).unwrap();
        for s in [2.0, 10.0, 50.0] {
            let coarse = la.aep_cdf(s, n_iter - 1).unwrap();
            let fine = la.aep_cdf(s, n_iter).unwrap();
            let mc = la.mc_cdf(s).unwrap();
            let se = (mc * (1.0 - mc) / 400_000.0).sqrt();
            println!("d={d} s={s} aep({})={coarse} aep({n_iter})={fine} mc={mc}", n_iter - 1);
            assert!((fine - mc).abs() <= (fine - coarse).abs() + 4.0 * se, "d={d} s={s}");
            assert!((0.0..=1.0).contains(&fine));
        }
    }
}

#[test]
fn higher_dimensions_monotone_in_threshold() {
    for d in [4, 5] {
        let la = clayton_sum(d, 0.8, 4);
        let cdf: Vec<f64> = [0.5, 1.0, 5.0, 20.0, 100.0]
            .iter()
            .map(|&s| la.aep_cdf(s, 4).unwrap())
            .collect();
        assert!(cdf.windows(2).all(|w| w[0] <= w[1]), "d={d}: {cdf:?}");
    }
}
