//! Layers with aggregate modifiers: a reinstated 100 xs 0 layer, and a programme of a
//! quota-shared layer, a reinstated layer and a stop-loss capped layer.

use riskkit::aggregate_engine::AggregateMethod;
use riskkit::distributions::{params, Continuous, Discrete};
use riskkit::lossmodel::{EngineConfig, Frequency, Layer, LossModel, PolicyStructure};

fn main() -> riskkit::Result<()> {
    let frequency = Frequency::new(Discrete::poisson(0.5)?, 0.0)?;
    let engine = EngineConfig::with_method(AggregateMethod::Fft, 1 << 17);

    // two reinstatements at 100% after an aggregate deductible of 100
    let pareto = Continuous::from_name("pareto2", &params(&[("scale", 100.0), ("shape", 1.2)]))?;
    let rs = Layer::new(0.0, 100.0, 100.0, None, Some(2), vec![1.0], 1.0)?;
    let lm = LossModel::new(
        frequency.clone(),
        pareto,
        PolicyStructure::new(vec![rs])?,
        engine.clone(),
    )?;
    println!("{}", lm.policy_layer_summary(0)?);
    println!("reinstated layer premium {:.12}\n", lm.pure_premium_dist()[0].unwrap());

    let sev = Continuous::from_name("genpareto", &params(&[("loc", 0.0), ("scale", 83.34), ("c", 0.834)]))?;
    let policy = PolicyStructure::new(vec![
        Layer::new(100.0, 100.0, 0.0, None, None, vec![], 0.5)?,
        Layer::new(100.0, 200.0, 0.0, None, Some(2), vec![0.6], 1.0)?,
        Layer::new(100.0, 100.0, 0.0, Some(200.0), None, vec![], 1.0)?,
    ])?;
    let lm = LossModel::new(frequency, sev, policy, engine)?;
    for idx in 0..lm.policystructure.length() {
        println!("{}", lm.costing_summary(idx)?);
    }
    Ok(())
}
