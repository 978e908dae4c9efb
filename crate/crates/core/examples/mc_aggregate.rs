//! Monte Carlo aggregate losses: seeded, reproducible simulation of a layer and its
//! distribution services.

use riskkit::aggregate_engine::AggregateMethod;
use riskkit::distributions::{params, Continuous, Discrete};
use riskkit::lossmodel::{EngineConfig, Frequency, Layer, LossModel, PolicyStructure};

fn main() -> riskkit::Result<()> {
    let frequency = Frequency::new(Discrete::from_name("nbinom", &params(&[("n", 3.0), ("p", 0.4)]))?, 0.0)?;
    let severity = Continuous::from_name("weibull", &params(&[("c", 0.8), ("scale", 10.0)]))?;
    let policy = PolicyStructure::new(vec![Layer::xl(50.0, 2.0)?])?;
    let engine = EngineConfig {
        n_sim: 200_000,
        random_state: 2024,
        ..EngineConfig::with_method(AggregateMethod::Mc, 1 << 14)
    };
    let lm = LossModel::new(frequency.clone(), severity.clone(), policy.clone(), engine.clone())?;

    let closed = lm.moments(0, false)?;
    let sim = lm.moments(0, true)?;
    println!("{:<10}{:>14}{:>14}", "", "closed form", "simulated");
    println!("{:<10}{:>14.4}{:>14.4}", "mean", closed.mean, sim.mean);
    println!(
        "{:<10}{:>14.4}{:>14.4}",
        "CoV", closed.coeff_variation, sim.coeff_variation
    );
    println!("{:<10}{:>14.4}{:>14.4}", "skewness", closed.skewness, sim.skewness);
    for q in [0.5, 0.75, 0.95, 0.995] {
        println!("ppf({q}) = {:.4}", lm.ppf(0, q)?);
    }

    let again = LossModel::new(frequency, severity, policy, engine)?;
    println!(
        "same seed reproduces the sample: {}",
        again.rvs(0, 5, 9)? == lm.rvs(0, 5, 9)?
    );
    Ok(())
}
