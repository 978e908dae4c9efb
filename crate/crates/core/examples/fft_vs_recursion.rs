//! Accuracy and speed of FFT, recursion and Monte Carlo against closed-form moments for
//! lognormal(1.3, 36315.49) severities, poisson(3) counts and a 10000 deductible.

use std::time::Instant;

use riskkit::aggregate_engine::AggregateMethod;
use riskkit::distributions::{params, Continuous, Discrete};
use riskkit::lossmodel::{closed_moments, EngineConfig, Frequency, Layer, LossModel, PolicyStructure};

fn main() -> riskkit::Result<()> {
    let sev = Continuous::from_name("lognormal", &params(&[("shape", 1.3), ("scale", 36315.49)]))?;
    let freq = Frequency::new(Discrete::poisson(3.0)?, 10_000.0)?;
    let layer = Layer::xl(f64::INFINITY, 10_000.0)?;
    let reference = closed_moments(&freq, &sev, &layer)?;
    println!(
        "reference: mean {:.0}, CoV {:.5}, skewness {:.5}\n",
        reference.mean, reference.coeff_variation, reference.skewness
    );
    println!(
        "{:<30}{:>10}{:>14}{:>14}{:>14}",
        "method", "time (s)", "mean", "CoV", "skewness"
    );

    let mut runs = Vec::new();
    for log_m in [14, 16, 18] {
        for h in [50.0, 100.0, 200.0, 400.0] {
            runs.push((AggregateMethod::Fft, h, 1usize << log_m));
        }
    }
    for h in [50.0, 100.0, 200.0, 400.0] {
        runs.push((AggregateMethod::Recursive, h, 1 << 14));
    }
    for (method, h, m) in runs {
        let engine = EngineConfig {
            sev_discr_step: Some(h),
            ..EngineConfig::with_method(method, m)
        };
        let t = Instant::now();
        let lm = LossModel::new(
            freq.clone(),
            sev.clone(),
            PolicyStructure::new(vec![layer.clone()])?,
            engine,
        )?;
        let secs = t.elapsed().as_secs_f64();
        report(
            &format!("{} (h = {h}, m = 2^{})", method.name(), m.trailing_zeros()),
            secs,
            &lm,
            &reference,
        )?;
    }
    for log_n in [14, 16, 18] {
        let engine = EngineConfig {
            n_sim: 1 << log_n,
            random_state: 1,
            ..EngineConfig::with_method(AggregateMethod::Mc, 1 << 14)
        };
        let t = Instant::now();
        let lm = LossModel::new(
            freq.clone(),
            sev.clone(),
            PolicyStructure::new(vec![layer.clone()])?,
            engine,
        )?;
        let secs = t.elapsed().as_secs_f64();
        report(&format!("mc (2^{log_n} sim.)"), secs, &lm, &reference)?;
    }
    Ok(())
}

fn report(label: &str, secs: f64, lm: &LossModel, r: &riskkit::lossmodel::Moments) -> riskkit::Result<()> {
    let m = lm.moments(0, true)?;
    println!(
        "{label:<30}{secs:>10.3}{:>14.5e}{:>14.5e}{:>14.5e}",
        m.mean / r.mean - 1.0,
        m.coeff_variation / r.coeff_variation - 1.0,
        m.skewness / r.skewness - 1.0
    );
    Ok(())
}
