//! Claim-count models: (a,b,0) and (a,b,1) families, their moments and recursion
//! coefficients, seeded sampling, and thinning to a higher threshold.

use riskkit::distributions::{params, Continuous, Discrete};
use riskkit::lossmodel::{thinned_frequency, Frequency};

fn main() -> riskkit::Result<()> {
    let models = [
        ("poisson", params(&[("mu", 3.0)])),
        ("binom", params(&[("n", 10.0), ("p", 0.3)])),
        ("nbinom", params(&[("n", 2.0), ("p", 0.4)])),
        ("ztpoisson", params(&[("mu", 1.2)])),
        ("zmnbinom", params(&[("n", 2.0), ("p", 0.4), ("p0M", 0.5)])),
        ("logser", params(&[("p", 0.6)])),
    ];
    println!(
        "{:<12}{:>10}{:>10}{:>10}{:>10}{:>10}{:>10}",
        "family", "mean", "std", "skew", "a", "b", "P(N=0)"
    );
    for (name, par) in &models {
        let n = Discrete::from_name(name, par)?;
        let (m, s, k) = n.mean_std_skewness()?;
        let ab = n.ab();
        println!(
            "{:<12}{m:>10.4}{s:>10.4}{k:>10.4}{:>10.4}{:>10.4}{:>10.4}",
            name,
            ab.a,
            ab.b,
            n.pmf(0)
        );
    }

    let zt = Discrete::from_name("ztpoisson", &params(&[("mu", 1.2)]))?;
    let draws = zt.rvs(100_000, 42);
    let mean = draws.iter().sum::<u64>() as f64 / draws.len() as f64;
    println!(
        "\nztpoisson(1.2): sample mean {mean:.4} vs {:.4}; no zeros drawn: {}",
        zt.mean()?,
        !draws.contains(&0)
    );

    // counts observed above 1000 thinned to counts above a 5000 deductible
    let sev = Continuous::from_name("lognormal", &params(&[("shape", 1.0), ("scale", 2000.0)]))?;
    let freq = Frequency::new(Discrete::poisson(5.0)?, 1000.0)?;
    let thinned = thinned_frequency(&freq, &sev, 5000.0)?;
    println!(
        "poisson(5) above 1000 → {} above 5000 (mean {:.4})",
        thinned.name(),
        thinned.mean()?
    );
    Ok(())
}
