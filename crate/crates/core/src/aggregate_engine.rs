//! Aggregate loss distributions: FFT, Panjer recursion and Monte Carlo, plus the
//! usual distribution services on the resulting lattice or sample.

use rand::Rng;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::discretize::ArithmeticSeverity;
use crate::distributions::{Continuous, Discrete};
use crate::error::{Error, Result, Warning};
use crate::rng::{open_unit, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregateMethod {
    Fft,
    Recursive,
    Mc,
}

impl AggregateMethod {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "fft" => Ok(Self::Fft),
            "recursive" | "recursion" => Ok(Self::Recursive),
            "mc" => Ok(Self::Mc),
            _ => Err(Error::UnknownName {
                kind: "aggregate method",
                name: name.to_string(),
            }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Fft => "fft",
            Self::Recursive => "recursive",
            Self::Mc => "mc",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub enum Support {
    /// Probabilities `g[s]` at the nodes `h * s`.
    Lattice { h: f64, g: Vec<f64> },
    /// Sorted Monte Carlo sample with equal weights.
    Empirical { sorted: Vec<f64>, seed: u64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct AggregateDistribution {
    pub method: AggregateMethod,
    pub support: Support,
    pub warnings: Vec<Warning>,
}

const MC_CHUNK: usize = 1 << 16;

/// FFT anti-aliasing: transform length as a multiple of the lattice, and θ·m of the
/// exponential tilt. Mass beyond the lattice that would wrap onto it is damped by
/// e^{-θ·m·FFT_PAD} while round-off grows by at most e^{θ·m}.
const FFT_PAD: usize = 8;
const FFT_TILT: f64 = 3.0;

fn check_power_of_two(m: usize) -> Result<()> {
    if m < 2 || !m.is_power_of_two() {
        return Err(Error::param(
            "n_aggr_dist_nodes",
            format!("must be a power of two ≥ 2, got {m}"),
        ));
    }
    Ok(())
}

/// Expected lattice mean E[N]·E[Y] when the severity lattice is proper.
fn expected_mean(freq: &Discrete, sev: &ArithmeticSeverity) -> Option<f64> {
    if sev.tail_mass > 0.0 {
        return None;
    }
    freq.mean().ok().map(|n| n * sev.mean())
}

fn truncation_warning(freq: &Discrete, sev: &ArithmeticSeverity, agg: &AggregateDistribution) -> Option<Warning> {
    let expected = expected_mean(freq, sev)?;
    let got = agg.mean();
    let rel = if expected > 0.0 {
        (got / expected - 1.0).abs()
    } else {
        got.abs()
    };
    (rel > 1e-6).then(|| {
        Warning::new(
            "aggregate_engine",
            "truncation",
            format!(
                "aggregate mean on the lattice ({got:.6e}) differs from E[N]E[Y] ({expected:.6e}) by {rel:.2e}; increase n_aggr_dist_nodes or the step"
            ),
        )
    })
}

/// Compound distribution via the discrete Fourier transform on `m_agg` nodes.
pub fn compute_fft(freq: &Discrete, sev: &ArithmeticSeverity, m_agg: usize) -> Result<AggregateDistribution> {
    check_power_of_two(m_agg)?;
    if sev.m() > m_agg {
        return Err(Error::param(
            "n_aggr_dist_nodes",
            format!("must be ≥ the severity node count {}", sev.m()),
        ));
    }
    let len = FFT_PAD * m_agg;
    let theta = FFT_TILT / m_agg as f64;
    let mut buf: Vec<Complex64> = (0..len)
        .map(|j| Complex64::new(sev.fj.get(j).copied().unwrap_or(0.0) * (-theta * j as f64).exp(), 0.0))
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(len).process(&mut buf);
    for z in buf.iter_mut() {
        *z = freq.pgf_complex(*z);
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    let scale = 1.0 / len as f64;
    let raw: Vec<f64> = buf[..m_agg]
        .iter()
        .enumerate()
        .map(|(s, z)| z.re * scale * (theta * s as f64).exp())
        .collect();
    let mut g: Vec<f64> = raw.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = g.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Numerical("FFT produced no probability mass".into()));
    }
    let target: f64 = raw.iter().sum();
    let k = if target > 0.0 { target / total } else { 1.0 };
    for v in g.iter_mut() {
        *v *= k;
    }
    let l1: f64 = g.iter().zip(&raw).map(|(a, b)| (a - b).abs()).sum();
    let mut warnings = Vec::new();
    if l1 > 1e-8 {
        warnings.push(Warning::new(
            "aggregate_engine",
            "fft_clamp",
            format!("clamping negative FFT round-off changed the distribution by {l1:.3e} in L1"),
        ));
    }
    let mut agg = AggregateDistribution {
        method: AggregateMethod::Fft,
        support: Support::Lattice { h: sev.h, g },
        warnings,
    };
    if let Some(w) = truncation_warning(freq, sev, &agg) {
        agg.warnings.push(w);
    }
    Ok(agg)
}

/// Compound distribution via the Panjer recursion on `m_agg` nodes.
pub fn compute_recursive(freq: &Discrete, sev: &ArithmeticSeverity, m_agg: usize) -> Result<AggregateDistribution> {
    if m_agg < 1 {
        return Err(Error::param("n_aggr_dist_nodes", "must be ≥ 1"));
    }
    let ab = freq.ab();
    let f = &sev.fj;
    let f0 = f[0];
    let g0 = freq.pgf(f0)?;
    if !(g0 > 0.0) {
        return Err(Error::Numerical(format!(
            "P(X = 0) = P_N(f_0) underflows to {g0}; use the FFT method"
        )));
    }
    let denom = 1.0 - ab.a * f0;
    let lead = ab.p1 - (ab.a + ab.b) * ab.p0;
    let mut g = vec![0.0; m_agg];
    g[0] = g0;
    for s in 1..m_agg {
        let top = s.min(f.len() - 1);
        let sf = s as f64;
        let mut acc = if s < f.len() { lead * f[s] } else { 0.0 };
        for j in 1..=top {
            acc += (ab.a + ab.b * j as f64 / sf) * f[j] * g[s - j];
        }
        g[s] = acc / denom;
    }
    let mut agg = AggregateDistribution {
        method: AggregateMethod::Recursive,
        support: Support::Lattice { h: sev.h, g },
        warnings: Vec::new(),
    };
    if let Some(w) = truncation_warning(freq, sev, &agg) {
        agg.warnings.push(w);
    }
    Ok(agg)
}

/// Per-loss transform applied to simulated ground-up severities.
#[derive(Debug, Clone, Copy)]
pub struct LossTransform {
    /// Losses are drawn conditional on exceeding this threshold.
    pub threshold: f64,
    pub deductible: f64,
    pub cover: f64,
}

impl Default for LossTransform {
    fn default() -> Self {
        LossTransform {
            threshold: 0.0,
            deductible: 0.0,
            cover: f64::INFINITY,
        }
    }
}

/// Monte Carlo aggregate: `freq` counts losses above `transform.threshold`.
pub fn compute_mc(
    freq: &Discrete,
    sev: &Continuous,
    transform: LossTransform,
    n_sim: usize,
    seed: u64,
) -> Result<AggregateDistribution> {
    if n_sim < 1 {
        return Err(Error::param("n_sim", "must be ≥ 1"));
    }
    let LossTransform {
        threshold,
        deductible,
        cover,
    } = transform;
    let (lo, _) = sev.support();
    let conditional = threshold > lo;
    let p_below = sev.cdf(threshold);
    let sf_t = sev.sf(threshold);
    if conditional && !(sf_t > 0.0) {
        return Err(Error::Domain(format!(
            "no severity mass above the threshold {threshold}"
        )));
    }
    let draw = |rng: &mut crate::rng::StreamRng| -> Result<f64> {
        let z = if conditional {
            let u = open_unit(rng);
            // invert on whichever tail is better conditioned
            if p_below < 0.5 {
                sev.ppf(p_below + u * sf_t)?
            } else {
                sev.ppf(1.0 - u * sf_t)?
            }
        } else {
            sev.sample(rng)
        };
        Ok((z - deductible).max(0.0).min(cover))
    };
    let chunks: Vec<usize> = (0..n_sim.div_ceil(MC_CHUNK)).collect();
    let parts: Vec<Vec<f64>> = chunks
        .par_iter()
        .map(|&k| -> Result<Vec<f64>> {
            let mut rng = stream(seed, k as u64);
            let len = MC_CHUNK.min(n_sim - k * MC_CHUNK);
            let mut out = Vec::with_capacity(len);
            for _ in 0..len {
                let n = freq.sample(&mut rng);
                let mut x = 0.0;
                for _ in 0..n {
                    x += draw(&mut rng)?;
                }
                out.push(x);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut sorted: Vec<f64> = parts.into_iter().flatten().collect();
    sorted.sort_by(f64::total_cmp);
    Ok(AggregateDistribution {
        method: AggregateMethod::Mc,
        support: Support::Empirical { sorted, seed },
        warnings: Vec::new(),
    })
}

impl AggregateDistribution {
    /// Node values and their probabilities.
    pub fn nodes_probs(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.support {
            Support::Lattice { h, g } => ((0..g.len()).map(|s| s as f64 * h).collect(), g.clone()),
            Support::Empirical { sorted, .. } => {
                let w = 1.0 / sorted.len() as f64;
                (sorted.clone(), vec![w; sorted.len()])
            }
        }
    }

    /// Lattice step (None for Monte Carlo).
    pub fn step(&self) -> Option<f64> {
        match &self.support {
            Support::Lattice { h, .. } => Some(*h),
            Support::Empirical { .. } => None,
        }
    }

    pub fn len(&self) -> usize {
        match &self.support {
            Support::Lattice { g, .. } => g.len(),
            Support::Empirical { sorted, .. } => sorted.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Σ φ(x) p(x) over the support.
    pub fn expect<F: Fn(f64) -> f64>(&self, phi: F) -> f64 {
        match &self.support {
            Support::Lattice { h, g } => g.iter().enumerate().map(|(s, p)| phi(s as f64 * h) * p).sum(),
            Support::Empirical { sorted, .. } => sorted.iter().map(|x| phi(*x)).sum::<f64>() / sorted.len() as f64,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match &self.support {
            Support::Lattice { h, g } => {
                if x < 0.0 {
                    return 0.0;
                }
                let k = ((x / h) * (1.0 + 1e-14)).floor();
                let k = if k >= g.len() as f64 { g.len() - 1 } else { k as usize };
                g[..=k].iter().sum::<f64>().min(1.0)
            }
            Support::Empirical { sorted, .. } => sorted.partition_point(|v| *v <= x) as f64 / sorted.len() as f64,
        }
    }

    /// Cumulative probabilities at every node.
    pub fn cdf_nodes(&self) -> (Vec<f64>, Vec<f64>) {
        let (x, p) = self.nodes_probs();
        let mut acc = 0.0;
        let c = p
            .iter()
            .map(|v| {
                acc += v;
                acc.min(1.0)
            })
            .collect();
        (x, c)
    }

    /// Smallest support point x with cdf(x) ≥ q, q ∈ (0, 1).
    pub fn ppf(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Domain(format!("quantile level {q} outside (0, 1)")));
        }
        match &self.support {
            Support::Lattice { h, g } => {
                let mut acc = 0.0;
                for (s, p) in g.iter().enumerate() {
                    acc += p;
                    if acc >= q * (1.0 - 1e-14) {
                        return Ok(s as f64 * h);
                    }
                }
                Ok((g.len() - 1) as f64 * h)
            }
            Support::Empirical { sorted, .. } => {
                let n = sorted.len();
                let k = ((q * n as f64).ceil() as usize).clamp(1, n);
                Ok(sorted[k - 1])
            }
        }
    }

    /// Draws by inversion from the discrete law.
    pub fn rvs(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = stream(seed, 0);
        let (x, c) = self.cdf_nodes();
        (0..n)
            .map(|_| {
                let u: f64 = rng.random::<f64>() * c[c.len() - 1];
                let k = c.partition_point(|v| *v < u).min(x.len() - 1);
                x[k]
            })
            .collect()
    }

    /// Raw (`central = false`) or central moment of order `n`.
    pub fn moment(&self, n: u32, central: bool) -> f64 {
        let c = if central { self.mean() } else { 0.0 };
        self.expect(|x| (x - c).powi(n as i32))
    }

    pub fn mean(&self) -> f64 {
        self.expect(|x| x)
    }

    pub fn var(&self) -> f64 {
        self.moment(2, true)
    }

    pub fn std(&self) -> f64 {
        self.var().sqrt()
    }

    pub fn coeff_variation(&self) -> f64 {
        self.std() / self.mean()
    }

    pub fn skewness(&self) -> f64 {
        self.moment(3, true) / self.var().powf(1.5)
    }

    /// E[min(max(X − v, 0), u)] evaluated exactly at the support points.
    pub fn layer_expectation(&self, v: f64, u: f64) -> f64 {
        self.expect(|x| (x - v).max(0.0).min(u))
    }

    /// Affine image a·X of the distribution (used for shares).
    pub fn scaled(&self, a: f64) -> AggregateDistribution {
        let support = match &self.support {
            Support::Lattice { h, g } => Support::Lattice { h: h * a, g: g.clone() },
            Support::Empirical { sorted, seed } => Support::Empirical {
                sorted: sorted.iter().map(|x| x * a).collect(),
                seed: *seed,
            },
        };
        AggregateDistribution {
            method: self.method,
            support,
            warnings: self.warnings.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{discretize, DiscretizationMethod};
    use crate::distributions::params;

    fn gamma_lattice(h: f64, m: usize) -> ArithmeticSeverity {
        let g = Continuous::from_name("gamma", &params(&[("a", 5.0)])).unwrap();
        discretize(&g, DiscretizationMethod::MassDispersal, m, h, 0.0, f64::INFINITY).unwrap()
    }

    /// Σ_k p_k f^{*k} by direct convolution.
    fn brute_force(freq: &Discrete, f: &[f64], m: usize, kmax: u64) -> Vec<f64> {
        let mut out = vec![0.0; m];
        let mut conv = vec![0.0; m];
        conv[0] = 1.0;
        for k in 0..=kmax {
            let p = freq.pmf(k);
            for s in 0..m {
                out[s] += p * conv[s];
            }
            let mut next = vec![0.0; m];
            for (i, a) in conv.iter().enumerate() {
                if *a == 0.0 {
                    continue;
                }
                for (j, b) in f.iter().enumerate() {
                    if i + j < m {
                        next[i + j] += a * b;
                    }
                }
            }
            conv = next;
        }
        out
    }

    #[test]
    fn degenerate_severity_gives_point_mass_at_zero() {
        let sev = ArithmeticSeverity::from_probs(1.0, vec![1.0, 0.0]).unwrap();
        let freq = Discrete::poisson(3.0).unwrap();
        let agg = compute_fft(&freq, &sev, 16).unwrap();
        let (_, g) = agg.nodes_probs();
        assert!((g[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fft_mean_matches_closed_form() {
        let sev = gamma_lattice(0.01, 1 << 14);
        let agg = compute_fft(&Discrete::poisson(4.0).unwrap(), &sev, 1 << 17).unwrap();
        assert!((agg.mean() - 20.0).abs() < 1e-6);
    }

    #[test]
    fn recursion_first_step() {
        let sev = ArithmeticSeverity::from_probs(1.0, vec![0.0, 0.4, 0.6]).unwrap();
        let freq = Discrete::poisson(2.0).unwrap();
        let agg = compute_recursive(&freq, &sev, 8).unwrap();
        let (_, g) = agg.nodes_probs();
        let ab = freq.ab();
        let expected = (ab.p1 - (ab.a + ab.b) * ab.p0) * 0.4 + (ab.a + ab.b) * 0.4 * g[0];
        assert!((g[1] - expected).abs() < 1e-15);
    }

    #[test]
    fn engines_match_brute_force() {
        let f = vec![0.1, 0.25, 0.2, 0.15, 0.1, 0.1, 0.05, 0.05];
        let sev = ArithmeticSeverity::from_probs(1.0, f.clone()).unwrap();
        let m = 256;
        let freqs = [
            Discrete::poisson(2.0).unwrap(),
            Discrete::from_name("nbinom", &params(&[("n", 3.0), ("p", 0.7)])).unwrap(),
            Discrete::from_name("zmbinom", &params(&[("n", 5.0), ("p", 0.3), ("p0M", 0.2)])).unwrap(),
            Discrete::from_name("logser", &params(&[("p", 0.4)])).unwrap(),
        ];
        for freq in &freqs {
            let oracle = brute_force(freq, &f, m, 80);
            for agg in [
                compute_fft(freq, &sev, m).unwrap(),
                compute_recursive(freq, &sev, m).unwrap(),
            ] {
                let (_, g) = agg.nodes_probs();
                for s in 0..m {
                    assert!(
                        (g[s] - oracle[s]).abs() < 1e-10,
                        "{} {:?} s={s}",
                        freq.name(),
                        agg.method
                    );
                }
            }
        }
    }

    #[test]
    fn fft_equals_recursion_on_same_lattice() {
        let sev = gamma_lattice(0.05, 1024);
        let freq = Discrete::poisson(4.0).unwrap();
        let a = compute_fft(&freq, &sev, 4096).unwrap().cdf_nodes().1;
        let b = compute_recursive(&freq, &sev, 4096).unwrap().cdf_nodes().1;
        let sup = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(sup < 1e-9, "{sup}");
    }

    #[test]
    fn services_are_consistent() {
        let sev = gamma_lattice(0.05, 2048);
        let agg = compute_fft(&Discrete::poisson(4.0).unwrap(), &sev, 4096).unwrap();
        let (x, g) = agg.nodes_probs();
        let direct: f64 = x.iter().zip(&g).map(|(a, b)| a * b).sum();
        assert_eq!(agg.moment(1, false), direct);
        for &q in &[0.1, 0.5, 0.9, 0.999] {
            let v = agg.ppf(q).unwrap();
            assert!(agg.cdf(v) >= q - 1e-12);
            assert!(agg.cdf(v - 0.05) < q);
        }
        for &xq in &[3.0, 17.35, 40.0] {
            let back = agg.ppf(agg.cdf(xq)).unwrap();
            assert!((back - xq).abs() <= 0.05 + 1e-9, "{xq} {back}");
        }
        assert!(agg.ppf(0.0).is_err() && agg.ppf(1.0).is_err());
        let draws = agg.rvs(50_000, 3);
        let m = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!((m - agg.mean()).abs() < 4.0 * agg.std() / (50_000f64).sqrt());
    }

    #[test]
    fn constant_severity_skewness() {
        let sev = ArithmeticSeverity::from_probs(1.0, vec![0.0, 1.0]).unwrap();
        let mu: f64 = 6.0;
        let agg = compute_fft(&Discrete::poisson(mu).unwrap(), &sev, 128).unwrap();
        assert!((agg.skewness() - 1.0 / mu.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn mc_is_seeded_and_unbiased() {
        let g = Continuous::from_name("gamma", &params(&[("a", 5.0)])).unwrap();
        let freq = Discrete::poisson(4.0).unwrap();
        let a = compute_mc(&freq, &g, LossTransform::default(), 100_000, 42).unwrap();
        assert!((a.mean() - 20.0).abs() < 0.15);
        let b = compute_mc(&freq, &g, LossTransform::default(), 1, 42).unwrap();
        let c = compute_mc(&freq, &g, LossTransform::default(), 1, 42).unwrap();
        assert_eq!(b.nodes_probs().0, c.nodes_probs().0);
        assert_eq!(a.cdf(f64::INFINITY), 1.0);
    }

    #[test]
    fn rejects_non_power_of_two() {
        let sev = gamma_lattice(0.1, 64);
        assert!(compute_fft(&Discrete::poisson(1.0).unwrap(), &sev, 100).is_err());
    }
}
