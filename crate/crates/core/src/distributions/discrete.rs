use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma as GammaSampler, Geometric, Poisson as PoissonSampler};
use rustfft::num_complex::Complex64;
use statrs::function::beta::beta_reg;
use statrs::function::gamma::{gamma_ur, ln_gamma};

use super::{take_params, ParamMap};
use crate::error::{Error, Result};
use crate::rng::open_unit;

/// Base (untruncated) discrete families on {0, 1, 2, ...}; `logser` lives on {1, 2, ...}.
#[derive(Debug, Clone, PartialEq)]
pub enum DiscreteFamily {
    /// pmf e^-mu mu^k / k!
    Poisson { mu: f64 },
    /// n trials with success probability p
    Binom { n: u64, p: f64 },
    /// failures before the first success: p (1-p)^k
    Geom { p: f64 },
    /// scipy convention: C(k+n-1, k) p^n (1-p)^k, real n > 0
    NBinom { n: f64, p: f64 },
    /// -p^k / (k ln(1-p)), k ≥ 1
    Logser { p: f64 },
}

/// How the mass at zero relates to the base family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZeroMass {
    Natural,
    Truncated,
    Modified(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discrete {
    pub family: DiscreteFamily,
    pub zero: ZeroMass,
}

/// Panjer coefficients: p_k = (a + b/k) p_{k-1} from k = 1 (class 0) or k = 2 (class 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbCoefficients {
    pub a: f64,
    pub b: f64,
    pub p0: f64,
    pub p1: f64,
    pub class: u8,
}

fn prob(name: &str, p: f64, open_low: bool, open_high: bool) -> Result<f64> {
    let ok = p.is_finite() && if open_low { p > 0.0 } else { p >= 0.0 } && if open_high { p < 1.0 } else { p <= 1.0 };
    if ok {
        Ok(p)
    } else {
        Err(Error::param(name, format!("probability out of range: {p}")))
    }
}

impl Discrete {
    pub const NAMES: [&'static str; 14] = [
        "poisson",
        "binom",
        "geom",
        "nbinom",
        "logser",
        "ztpoisson",
        "ztbinom",
        "ztgeom",
        "ztnbinom",
        "zmpoisson",
        "zmbinom",
        "zmgeom",
        "zmnbinom",
        "zmlogser",
    ];

    pub fn new(family: DiscreteFamily, zero: ZeroMass) -> Result<Self> {
        use DiscreteFamily::*;
        match family {
            Poisson { mu } => {
                if !(mu.is_finite() && mu >= 0.0) {
                    return Err(Error::param("mu", format!("must be ≥ 0, got {mu}")));
                }
                if mu == 0.0 && zero != ZeroMass::Natural {
                    return Err(Error::param("mu", "must be > 0 for zero-truncated/modified variants"));
                }
            }
            Binom { n, p } => {
                prob("p", p, false, false)?;
                if n == 0 {
                    return Err(Error::param("n", "must be ≥ 1"));
                }
                if zero != ZeroMass::Natural && p == 0.0 {
                    return Err(Error::param("p", "must be > 0 for zero-truncated/modified variants"));
                }
            }
            Geom { p } => {
                prob("p", p, true, false)?;
                if zero != ZeroMass::Natural && p >= 1.0 {
                    return Err(Error::param("p", "must be < 1 for zero-truncated/modified variants"));
                }
            }
            NBinom { n, p } => {
                if !(n.is_finite() && n > 0.0) {
                    return Err(Error::param("n", format!("must be > 0, got {n}")));
                }
                prob("p", p, true, false)?;
                if zero != ZeroMass::Natural && p >= 1.0 {
                    return Err(Error::param("p", "must be < 1 for zero-truncated/modified variants"));
                }
            }
            Logser { p } => {
                prob("p", p, true, true)?;
                if zero == ZeroMass::Truncated {
                    return Err(Error::param("p", "logser has no mass at zero; use `logser`"));
                }
            }
        }
        if let ZeroMass::Modified(p0m) = zero {
            prob("p0M", p0m, false, true)?;
        }
        Ok(Discrete { family, zero })
    }

    pub fn from_name(name: &str, par: &ParamMap) -> Result<Self> {
        use DiscreteFamily::*;
        let (zero_kind, base) = if let Some(b) = name.strip_prefix("zt") {
            (1, b)
        } else if let Some(b) = name.strip_prefix("zm") {
            (2, b)
        } else {
            (0, name)
        };
        if !matches!(base, "poisson" | "binom" | "geom" | "nbinom" | "logser") || (zero_kind == 1 && base == "logser") {
            return Err(Error::UnknownName {
                kind: "discrete distribution",
                name: name.to_string(),
            });
        }
        // zero-modified variants carry p0M (lower-case alias accepted)
        let mut par = par.clone();
        let p0m = if zero_kind == 2 {
            let v = par.remove("p0M").or_else(|| par.remove("p0m"));
            Some(v.ok_or_else(|| Error::param("p0M", format!("required by `{name}`")))?)
        } else {
            None
        };
        let family = match base {
            "poisson" => Poisson {
                mu: take_params(name, &par, &["mu"], &[])?[0],
            },
            "binom" => {
                let p = take_params(name, &par, &["n", "p"], &[])?;
                if p[0].fract() != 0.0 || p[0] < 1.0 {
                    return Err(Error::param("n", format!("must be a positive integer, got {}", p[0])));
                }
                Binom {
                    n: p[0] as u64,
                    p: p[1],
                }
            }
            "geom" => Geom {
                p: take_params(name, &par, &["p"], &[])?[0],
            },
            "nbinom" => {
                let p = take_params(name, &par, &["n", "p"], &[])?;
                NBinom { n: p[0], p: p[1] }
            }
            _ => Logser {
                p: take_params(name, &par, &["p"], &[])?[0],
            },
        };
        let zero = match (zero_kind, p0m) {
            (1, _) => ZeroMass::Truncated,
            (2, Some(v)) => ZeroMass::Modified(v),
            _ => ZeroMass::Natural,
        };
        Discrete::new(family, zero)
    }

    pub fn poisson(mu: f64) -> Result<Self> {
        Discrete::new(DiscreteFamily::Poisson { mu }, ZeroMass::Natural)
    }

    pub fn name(&self) -> String {
        use DiscreteFamily::*;
        let base = match self.family {
            Poisson { .. } => "poisson",
            Binom { .. } => "binom",
            Geom { .. } => "geom",
            NBinom { .. } => "nbinom",
            Logser { .. } => "logser",
        };
        match self.zero {
            ZeroMass::Natural => base.to_string(),
            ZeroMass::Truncated => format!("zt{base}"),
            ZeroMass::Modified(_) => format!("zm{base}"),
        }
    }

    /// Mass at zero of the base family.
    fn base_p0(&self) -> f64 {
        use DiscreteFamily::*;
        match self.family {
            Poisson { mu } => (-mu).exp(),
            Binom { n, p } => (1.0 - p).powi(n as i32),
            Geom { p } => p,
            NBinom { n, p } => p.powf(n),
            Logser { .. } => 0.0,
        }
    }

    fn base_ln_pmf(&self, k: u64) -> f64 {
        use DiscreteFamily::*;
        let kf = k as f64;
        match self.family {
            Poisson { mu } => {
                if mu == 0.0 {
                    return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
                }
                kf * mu.ln() - mu - ln_gamma(kf + 1.0)
            }
            Binom { n, p } => {
                if k > n {
                    return f64::NEG_INFINITY;
                }
                let nf = n as f64;
                let lc = ln_gamma(nf + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(nf - kf + 1.0);
                let t1 = if k == 0 { 0.0 } else { kf * p.ln() };
                let t2 = if k == n { 0.0 } else { (nf - kf) * (-p).ln_1p() };
                lc + t1 + t2
            }
            Geom { p } => {
                if k == 0 {
                    p.ln()
                } else {
                    p.ln() + kf * (-p).ln_1p()
                }
            }
            NBinom { n, p } => {
                let lc = ln_gamma(kf + n) - ln_gamma(n) - ln_gamma(kf + 1.0);
                let t2 = if k == 0 { 0.0 } else { kf * (-p).ln_1p() };
                lc + n * p.ln() + t2
            }
            Logser { p } => {
                if k == 0 {
                    return f64::NEG_INFINITY;
                }
                kf * p.ln() - kf.ln() - (-(-p).ln_1p()).ln()
            }
        }
    }

    /// Factor applied to base pmf values for k ≥ 1, and the mass at zero.
    fn zero_adjust(&self) -> (f64, f64) {
        let p0 = self.base_p0();
        match self.zero {
            ZeroMass::Natural => (1.0, p0),
            ZeroMass::Truncated => (1.0 / (1.0 - p0), 0.0),
            ZeroMass::Modified(m) => ((1.0 - m) / (1.0 - p0), m),
        }
    }

    pub fn pmf(&self, k: u64) -> f64 {
        let (scale, zero) = self.zero_adjust();
        if k == 0 {
            return zero;
        }
        scale * self.base_ln_pmf(k).exp()
    }

    fn base_cdf(&self, k: u64) -> f64 {
        use DiscreteFamily::*;
        let kf = k as f64;
        match self.family {
            Poisson { mu } => {
                if mu == 0.0 {
                    1.0
                } else {
                    gamma_ur(kf + 1.0, mu)
                }
            }
            Binom { n, p } => {
                if k >= n {
                    1.0
                } else {
                    beta_reg((n - k) as f64, kf + 1.0, 1.0 - p)
                }
            }
            Geom { p } => -((kf + 1.0) * (-p).ln_1p()).exp_m1(),
            NBinom { n, p } => beta_reg(n, kf + 1.0, p),
            Logser { .. } => (1..=k).map(|j| self.base_ln_pmf(j).exp()).sum::<f64>().min(1.0),
        }
    }

    pub fn cdf(&self, k: f64) -> f64 {
        if k < 0.0 {
            return 0.0;
        }
        let k = k.floor() as u64;
        let p0 = self.base_p0();
        match self.zero {
            ZeroMass::Natural => self.base_cdf(k),
            ZeroMass::Truncated => ((self.base_cdf(k) - p0) / (1.0 - p0)).max(0.0),
            ZeroMass::Modified(m) => m + (1.0 - m) * ((self.base_cdf(k) - p0) / (1.0 - p0)).max(0.0),
        }
    }

    /// Smallest k with cdf(k) ≥ q.
    pub fn ppf(&self, q: f64) -> Result<u64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Domain(format!("quantile level {q} outside [0, 1]")));
        }
        if q >= 1.0 {
            if let DiscreteFamily::Binom { n, .. } = self.family {
                return Ok(n);
            }
            return Err(Error::Domain("quantile at level 1 is unbounded".into()));
        }
        let mut hi: u64 = (self.mean().unwrap_or(1.0).max(1.0) * 2.0) as u64 + 1;
        while self.cdf(hi as f64) < q {
            hi = hi.saturating_mul(2);
            if hi == u64::MAX {
                return Err(Error::Numerical("quantile search overflow".into()));
            }
        }
        let mut lo = 0u64;
        if self.cdf(0.0) >= q {
            return Ok(0);
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.cdf(mid as f64) >= q {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// Factorial moments E[N(N-1)...(N-r+1)] of the base family, r = 1..3.
    fn base_factorial_moments(&self) -> [f64; 3] {
        use DiscreteFamily::*;
        match self.family {
            Poisson { mu } => [mu, mu * mu, mu.powi(3)],
            Binom { n, p } => {
                let nf = n as f64;
                [
                    nf * p,
                    nf * (nf - 1.0) * p * p,
                    nf * (nf - 1.0) * (nf - 2.0) * p.powi(3),
                ]
            }
            Geom { p } => {
                let b = (1.0 - p) / p;
                [b, 2.0 * b * b, 6.0 * b.powi(3)]
            }
            NBinom { n, p } => {
                let b = (1.0 - p) / p;
                [n * b, n * (n + 1.0) * b * b, n * (n + 1.0) * (n + 2.0) * b.powi(3)]
            }
            Logser { p } => {
                let l = -(-p).ln_1p();
                let r = p / (1.0 - p);
                [r / l, r * r / l, 2.0 * r.powi(3) / l]
            }
        }
    }

    /// Raw moments E[N], E[N^2], E[N^3].
    pub fn raw_moments(&self) -> [f64; 3] {
        let [f1, f2, f3] = self.base_factorial_moments();
        let base = [f1, f2 + f1, f3 + 3.0 * f2 + f1];
        let p0 = self.base_p0();
        let factor = match self.zero {
            ZeroMass::Natural => 1.0,
            ZeroMass::Truncated => 1.0 / (1.0 - p0),
            ZeroMass::Modified(m) => (1.0 - m) / (1.0 - p0),
        };
        [base[0] * factor, base[1] * factor, base[2] * factor]
    }

    pub fn mean(&self) -> Result<f64> {
        Ok(self.raw_moments()[0])
    }

    pub fn var(&self) -> Result<f64> {
        let [m1, m2, _] = self.raw_moments();
        Ok((m2 - m1 * m1).max(0.0))
    }

    pub fn std(&self) -> Result<f64> {
        Ok(self.var()?.sqrt())
    }

    /// Third central moment.
    pub fn third_central(&self) -> f64 {
        let [m1, m2, m3] = self.raw_moments();
        m3 - 3.0 * m1 * m2 + 2.0 * m1.powi(3)
    }

    pub fn skewness(&self) -> Result<f64> {
        let v = self.var()?;
        if v == 0.0 {
            return Err(Error::MomentUndefined {
                family: self.name(),
                order: 3,
            });
        }
        Ok(self.third_central() / v.powf(1.5))
    }

    pub fn mean_std_skewness(&self) -> Result<(f64, f64, f64)> {
        Ok((self.mean()?, self.std()?, self.skewness()?))
    }

    /// Radius of convergence of the pgf.
    fn pgf_radius(&self) -> f64 {
        use DiscreteFamily::*;
        match self.family {
            Poisson { .. } | Binom { .. } => f64::INFINITY,
            Geom { p } | NBinom { p, .. } => 1.0 / (1.0 - p),
            Logser { p } => 1.0 / p,
        }
    }

    /// Base pgf at a complex argument (principal branches).
    fn base_pgf_c(&self, z: Complex64) -> Complex64 {
        use DiscreteFamily::*;
        let one = Complex64::new(1.0, 0.0);
        match self.family {
            Poisson { mu } => ((z - one) * mu).exp(),
            Binom { n, p } => (one + (z - one) * p).powi(n as i32),
            Geom { p } => Complex64::new(p, 0.0) / (one - z * (1.0 - p)),
            NBinom { n, p } => (Complex64::new(p, 0.0) / (one - z * (1.0 - p))).powf(n),
            Logser { p } => (one - z * p).ln() / (-p).ln_1p(),
        }
    }

    /// Probability generating function E[z^N] for complex z inside the disc of convergence.
    pub fn pgf_complex(&self, z: Complex64) -> Complex64 {
        let base = self.base_pgf_c(z);
        let p0 = self.base_p0();
        match self.zero {
            ZeroMass::Natural => base,
            ZeroMass::Truncated => (base - p0) / (1.0 - p0),
            ZeroMass::Modified(m) => (base - p0) * ((1.0 - m) / (1.0 - p0)) + m,
        }
    }

    pub fn pgf(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t.abs() >= self.pgf_radius() {
            return Err(Error::Domain(format!(
                "pgf argument {t} outside the radius of convergence {}",
                self.pgf_radius()
            )));
        }
        if t == 0.0 {
            return Ok(self.pmf(0));
        }
        Ok(self.pgf_complex(Complex64::new(t, 0.0)).re)
    }

    /// (a, b, p0, p1) if the family belongs to the (a,b,0) or (a,b,1) class.
    pub fn ab(&self) -> AbCoefficients {
        use DiscreteFamily::*;
        let (a, b) = match self.family {
            Poisson { mu } => (0.0, mu),
            Binom { n, p } => (-p / (1.0 - p), (n as f64 + 1.0) * p / (1.0 - p)),
            Geom { p } => (1.0 - p, 0.0),
            NBinom { n, p } => (1.0 - p, (n - 1.0) * (1.0 - p)),
            Logser { p } => (p, -p),
        };
        let class = if self.zero == ZeroMass::Natural && !matches!(self.family, Logser { .. }) {
            0
        } else {
            1
        };
        AbCoefficients {
            a,
            b,
            p0: self.pmf(0),
            p1: self.pmf(1),
            class,
        }
    }

    /// Distribution of the number of claims when each is retained independently with
    /// probability `nu` (thinning). Zero-modified variants keep their class.
    pub fn thin(&self, nu: f64) -> Result<Discrete> {
        use DiscreteFamily::*;
        if !(nu.is_finite() && nu > 0.0) {
            return Err(Error::Domain(format!("thinning probability must be > 0, got {nu}")));
        }
        if nu == 1.0 {
            return Ok(self.clone());
        }
        let family = match self.family {
            Poisson { mu } => Poisson { mu: mu * nu },
            Binom { n, p } => {
                if p * nu > 1.0 {
                    return Err(Error::Domain(format!("binomial rescaling p·ν = {} exceeds 1", p * nu)));
                }
                Binom { n, p: p * nu }
            }
            Geom { p } => {
                let beta = (1.0 - p) / p * nu;
                Geom { p: 1.0 / (1.0 + beta) }
            }
            NBinom { n, p } => {
                let beta = (1.0 - p) / p * nu;
                NBinom {
                    n,
                    p: 1.0 / (1.0 + beta),
                }
            }
            Logser { p } => {
                let den = 1.0 - p + p * nu;
                if !(den > 0.0) || p * nu / den >= 1.0 {
                    return Err(Error::Domain("log-series rescaling leaves the parameter space".into()));
                }
                Logser { p: p * nu / den }
            }
        };
        // P(N* = 0) for the original law: p0M + (1 - p0M) P_T(1 - nu), where P_T is the
        // pgf of the zero-truncated base.
        let zero = match (self.zero, &self.family) {
            (ZeroMass::Natural, Logser { p }) => {
                if nu > 1.0 {
                    return Err(Error::Domain("log-series cannot be rescaled upwards".into()));
                }
                let m = (1.0 - p + p * nu).ln() / (-p).ln_1p();
                ZeroMass::Modified(m)
            }
            (ZeroMass::Natural, _) => ZeroMass::Natural,
            (z, _) => {
                if nu > 1.0 {
                    return Err(Error::Domain(
                        "zero-truncated/modified laws cannot be rescaled upwards".into(),
                    ));
                }
                let m = match z {
                    ZeroMass::Modified(m) => m,
                    _ => 0.0,
                };
                let p0 = self.base_p0();
                let pt = (self.base_pgf_c(Complex64::new(1.0 - nu, 0.0)).re - p0) / (1.0 - p0);
                let new_m = m + (1.0 - m) * pt;
                ZeroMass::Modified(new_m)
            }
        };
        Discrete::new(family, zero)
    }

    fn sample_base<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        use DiscreteFamily::*;
        match self.family {
            Poisson { mu } => {
                if mu <= 0.0 {
                    0
                } else {
                    PoissonSampler::new(mu).map(|d| d.sample(rng) as u64).unwrap_or(0)
                }
            }
            Binom { n, p } => Binomial::new(n, p).map(|d| d.sample(rng)).unwrap_or(0),
            Geom { p } => Geometric::new(p).map(|d| d.sample(rng)).unwrap_or(0),
            NBinom { n, p } => {
                let lam = GammaSampler::new(n, (1.0 - p) / p)
                    .map(|g| g.sample(rng))
                    .unwrap_or(0.0);
                if lam <= 0.0 {
                    0
                } else {
                    PoissonSampler::new(lam).map(|d| d.sample(rng) as u64).unwrap_or(0)
                }
            }
            Logser { p } => {
                // Kemp's second accelerated generator
                let r = (-p).ln_1p();
                let v: f64 = open_unit(rng);
                if v >= p {
                    return 1;
                }
                let u: f64 = open_unit(rng);
                let q = -(r * u).exp_m1();
                if v <= q * q {
                    (1.0 + v.ln() / q.ln()).floor().max(1.0) as u64
                } else if v <= q {
                    2
                } else {
                    1
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let p0 = self.base_p0();
        let positive = |rng: &mut R| -> u64 {
            if p0 <= 0.95 {
                loop {
                    let k = self.sample_base(rng);
                    if k > 0 {
                        return k;
                    }
                }
            }
            // inversion on the truncated law when zero dominates
            let u = p0 + (1.0 - p0) * open_unit(rng);
            let base = Discrete {
                family: self.family.clone(),
                zero: ZeroMass::Natural,
            };
            base.ppf(u).unwrap_or(1).max(1)
        };
        match self.zero {
            ZeroMass::Natural => self.sample_base(rng),
            ZeroMass::Truncated => positive(rng),
            ZeroMass::Modified(m) => {
                if open_unit(rng) < m {
                    0
                } else {
                    positive(rng)
                }
            }
        }
    }

    pub fn rvs(&self, n: usize, seed: u64) -> Vec<u64> {
        let mut rng = crate::rng::stream(seed, 0);
        (0..n).map(|_| self.sample(&mut rng)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(name: &str, par: &[(&str, f64)]) -> Discrete {
        let m: ParamMap = par.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        Discrete::from_name(name, &m).unwrap()
    }

    pub(crate) fn all() -> Vec<Discrete> {
        vec![
            d("poisson", &[("mu", 3.0)]),
            d("binom", &[("n", 12.0), ("p", 0.3)]),
            d("geom", &[("p", 0.4)]),
            d("nbinom", &[("n", 2.5), ("p", 0.35)]),
            d("logser", &[("p", 0.6)]),
            d("ztpoisson", &[("mu", 2.0)]),
            d("ztbinom", &[("n", 8.0), ("p", 0.2)]),
            d("ztgeom", &[("p", 0.3)]),
            d("ztnbinom", &[("n", 1.7), ("p", 0.5)]),
            d("zmpoisson", &[("mu", 2.0), ("p0M", 0.3)]),
            d("zmbinom", &[("n", 8.0), ("p", 0.2), ("p0M", 0.05)]),
            d("zmgeom", &[("p", 0.3), ("p0M", 0.6)]),
            d("zmnbinom", &[("n", 1.7), ("p", 0.5), ("p0m", 0.2)]),
            d("zmlogser", &[("p", 0.6), ("p0M", 0.25)]),
        ]
    }

    #[test]
    fn poisson_reference_values() {
        let p = d("poisson", &[("mu", 2.0)]);
        assert!((p.pmf(0) - (-2f64).exp()).abs() < 1e-16);
        let zt = d("ztpoisson", &[("mu", 2.0)]);
        assert_eq!(zt.pmf(0), 0.0);
        assert_eq!(zt.pgf(0.0).unwrap(), 0.0);
        assert!((zt.mean().unwrap() - 2.3130352854993315).abs() < 1e-15);
        let p3 = d("poisson", &[("mu", 3.0)]);
        assert!((p3.pgf(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((p3.pgf(0.0).unwrap() - (-3f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn pmf_sums_to_one_and_matches_moments() {
        for dist in all() {
            let mut s = 0.0;
            let (mut m1, mut m2, mut m3) = (0.0, 0.0, 0.0);
            for k in 0..2000u64 {
                let p = dist.pmf(k);
                assert!(p >= 0.0);
                let kf = k as f64;
                s += p;
                m1 += kf * p;
                m2 += kf * kf * p;
                m3 += kf * kf * kf * p;
            }
            assert!((s - 1.0).abs() < 1e-12, "{} {s}", dist.name());
            let r = dist.raw_moments();
            for (a, b) in [(m1, r[0]), (m2, r[1]), (m3, r[2])] {
                assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "{} {a} vs {b}", dist.name());
            }
        }
    }

    #[test]
    fn panjer_recursion_reproduces_pmf() {
        for dist in all() {
            let ab = dist.ab();
            let start = if ab.class == 0 { 1 } else { 2 };
            assert!((ab.p0 - dist.pmf(0)).abs() < 1e-15);
            for k in start..200u64 {
                let prev = dist.pmf(k - 1);
                let rec = (ab.a + ab.b / k as f64) * prev;
                let direct = dist.pmf(k);
                assert!(
                    (rec - direct).abs() <= 1e-12 * direct.max(1e-300) + 1e-300,
                    "{} k={k}",
                    dist.name()
                );
            }
        }
    }

    #[test]
    fn zero_modified_relates_to_base() {
        let base = d("poisson", &[("mu", 2.0)]);
        let zm = d("zmpoisson", &[("mu", 2.0), ("p0M", 0.3)]);
        assert_eq!(zm.pmf(0), 0.3);
        let p0 = base.pmf(0);
        for k in 1..30 {
            let expected = (1.0 - 0.3) / (1.0 - p0) * base.pmf(k);
            assert!((zm.pmf(k) - expected).abs() < 1e-12 * expected.max(1e-300));
        }
    }

    #[test]
    fn cdf_and_ppf_are_consistent() {
        for dist in all() {
            let mut acc = 0.0;
            for k in 0..40u64 {
                acc += dist.pmf(k);
                assert!((dist.cdf(k as f64) - acc).abs() < 1e-12, "{} k={k}", dist.name());
            }
            for &q in &[0.01, 0.3, 0.5, 0.9, 0.999] {
                let k = dist.ppf(q).unwrap();
                assert!(dist.cdf(k as f64) >= q - 1e-14);
                if k > 0 {
                    assert!(dist.cdf(k as f64 - 1.0) < q);
                }
            }
        }
    }

    #[test]
    fn pgf_matches_series() {
        for dist in all() {
            for &t in &[0.0f64, 0.3, 0.9, -0.5] {
                let series: f64 = (0..3000u64).map(|k| dist.pmf(k) * t.powi(k as i32)).sum();
                assert!((dist.pgf(t).unwrap() - series).abs() < 1e-12, "{} t={t}", dist.name());
            }
        }
        let nb = d("nbinom", &[("n", 2.0), ("p", 0.5)]);
        assert!(nb.pgf(2.5).is_err());
    }

    #[test]
    fn thinning_matches_compound_binomial() {
        // P(N* = k) = Σ_n P(N = n) C(n,k) ν^k (1-ν)^(n-k)
        let nu: f64 = 0.37;
        for dist in all() {
            let thin = dist.thin(nu).unwrap();
            for k in 0..6u64 {
                let mut v = 0.0;
                for n in k..600u64 {
                    let lc = ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0);
                    v += dist.pmf(n) * (lc + k as f64 * nu.ln() + (n - k) as f64 * (1.0 - nu).ln()).exp();
                }
                assert!(
                    (thin.pmf(k) - v).abs() < 1e-12,
                    "{} k={k}: {} vs {v}",
                    dist.name(),
                    thin.pmf(k)
                );
            }
        }
    }

    #[test]
    fn ztpoisson_sample_mean() {
        let zt = d("ztpoisson", &[("mu", 2.0)]);
        let xs = zt.rvs(100_000, 1);
        let m = xs.iter().sum::<u64>() as f64 / xs.len() as f64;
        assert!((m - 2.31303).abs() < 0.02, "{m}");
        assert_eq!(zt.rvs(1, 5), zt.rvs(1, 5));
    }

    #[test]
    fn samplers_are_unbiased() {
        for dist in all() {
            let xs = dist.rvs(200_000, 11);
            let m = xs.iter().sum::<u64>() as f64 / xs.len() as f64;
            let se = dist.std().unwrap() / (xs.len() as f64).sqrt();
            assert!((m - dist.mean().unwrap()).abs() < 4.5 * se, "{} {m}", dist.name());
        }
    }
}
