//! Excess-of-loss costing: 20 xs 5 on gamma(a=5) severities with poisson(4) counts,
//! priced from closed forms and from the FFT aggregate distribution.

use riskkit::aggregate_engine::AggregateMethod;
use riskkit::distributions::{params, Continuous, Discrete};
use riskkit::lossmodel::{EngineConfig, Frequency, Layer, LossModel, PolicyStructure};

fn main() -> riskkit::Result<()> {
    let frequency = Frequency::new(Discrete::poisson(4.0)?, 0.0)?;
    let severity = Continuous::from_name("gamma", &params(&[("a", 5.0)]))?;
    let policy = PolicyStructure::new(vec![Layer::xl(20.0, 5.0)?])?;
    let lm = LossModel::new(
        frequency,
        severity,
        policy,
        EngineConfig::with_method(AggregateMethod::Fft, 1 << 17),
    )?;

    println!("{}", lm.costing_summary(0)?);
    println!("{}", lm.aggr_loss_specs(0)?);
    println!("closed-form premium    {:.15}", lm.pure_premium()[0].unwrap());
    println!("distribution premium   {:.15}", lm.pure_premium_dist()[0].unwrap());
    let m = lm.moments(0, true)?;
    println!(
        "mean {:.6}  std {:.6}  CoV {:.6}  skewness {:.6}",
        m.mean, m.std, m.coeff_variation, m.skewness
    );
    for q in [0.5, 0.9, 0.99, 0.995] {
        println!("ppf({q}) = {}", lm.ppf(0, q)?);
    }
    Ok(())
}
