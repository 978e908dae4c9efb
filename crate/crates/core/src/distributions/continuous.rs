use rand::Rng;
use rand_distr::{Beta as BetaSampler, Distribution, Gamma as GammaSampler, StandardNormal};
use statrs::function::beta::{beta_reg, ln_beta};
use statrs::function::gamma::ln_gamma;

use super::{take_params, ParamMap};
use crate::error::{Error, Result};
use crate::numeric::{gamma_lr, gamma_ur, integrate, integrate_to_inf, invert_increasing, norm_cdf, norm_ppf, norm_sf};
use crate::rng::open_unit;

/// Continuous severity families. Parameters follow the scipy-style names used in
/// configuration files; `loc` shifts every family except `uniform`.
#[derive(Debug, Clone, PartialEq)]
pub enum ContinuousFamily {
    /// shape `a`, `scale`
    Gamma { a: f64, scale: f64 },
    /// log-scale standard deviation `shape`, median `scale`
    LogNormal { shape: f64, scale: f64 },
    /// rate `theta`
    Exponential { rate: f64 },
    /// shape `c` (any sign), `scale`
    GenPareto { c: f64, scale: f64 },
    /// single-parameter Pareto: sf = (scale/x)^shape for x ≥ scale
    Pareto1 { shape: f64, scale: f64 },
    /// Lomax: sf = (1 + x/scale)^-shape
    Pareto2 { shape: f64, scale: f64 },
    /// beta(a, b) stretched to [0, scale]
    Beta { a: f64, b: f64, scale: f64 },
    /// Burr XII: sf = (1 + (x/scale)^c)^-d
    Burr12 { c: f64, d: f64, scale: f64 },
    /// sf = exp(-(x/scale)^c)
    Weibull { c: f64, scale: f64 },
    /// uniform on [a, b]
    Uniform { a: f64, b: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Continuous {
    pub family: ContinuousFamily,
    pub loc: f64,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::param(name, format!("must be finite and > 0, got {v}")))
    }
}

impl Continuous {
    pub const NAMES: [&'static str; 10] = [
        "gamma",
        "lognormal",
        "exponential",
        "genpareto",
        "pareto1",
        "pareto2",
        "beta",
        "burr12",
        "weibull",
        "uniform",
    ];

    pub fn new(family: ContinuousFamily, loc: f64) -> Result<Self> {
        use ContinuousFamily::*;
        if !loc.is_finite() {
            return Err(Error::param("loc", "must be finite"));
        }
        match family {
            Gamma { a, scale } => {
                positive("a", a)?;
                positive("scale", scale)?;
            }
            LogNormal { shape, scale } => {
                positive("shape", shape)?;
                positive("scale", scale)?;
            }
            Exponential { rate } => {
                positive("theta", rate)?;
            }
            GenPareto { c, scale } => {
                positive("scale", scale)?;
                if !c.is_finite() {
                    return Err(Error::param("c", "must be finite"));
                }
            }
            Pareto1 { shape, scale } | Pareto2 { shape, scale } => {
                positive("shape", shape)?;
                positive("scale", scale)?;
            }
            Beta { a, b, scale } => {
                positive("a", a)?;
                positive("b", b)?;
                positive("scale", scale)?;
            }
            Burr12 { c, d, scale } => {
                positive("c", c)?;
                positive("d", d)?;
                positive("scale", scale)?;
            }
            Weibull { c, scale } => {
                positive("c", c)?;
                positive("scale", scale)?;
            }
            Uniform { a, b } => {
                if !(a.is_finite() && b.is_finite() && b > a) {
                    return Err(Error::param("b", format!("uniform requires a < b, got a={a}, b={b}")));
                }
                if loc != 0.0 {
                    return Err(Error::param("loc", "uniform is specified by `a` and `b` only"));
                }
            }
        }
        Ok(Continuous { family, loc })
    }

    /// Build from a family name and a parameter map, rejecting unknown keys.
    pub fn from_name(name: &str, par: &ParamMap) -> Result<Self> {
        use ContinuousFamily::*;
        let (family, loc) = match name {
            "gamma" => {
                let p = take_params(name, par, &["a"], &[("scale", 1.0), ("loc", 0.0)])?;
                (Gamma { a: p[0], scale: p[1] }, p[2])
            }
            "lognormal" | "lognorm" => {
                let p = take_params(name, par, &["shape"], &[("scale", 1.0), ("loc", 0.0)])?;
                (
                    LogNormal {
                        shape: p[0],
                        scale: p[1],
                    },
                    p[2],
                )
            }
            "exponential" | "expon" => {
                let rate = match (par.get("theta"), par.get("rate")) {
                    (Some(_), Some(_)) => return Err(Error::param("rate", "give either `theta` or `rate`")),
                    (_, Some(&r)) => r,
                    (Some(&t), _) => t,
                    (None, None) => 1.0,
                };
                let rest: ParamMap = par
                    .iter()
                    .filter(|(k, _)| k.as_str() != "theta" && k.as_str() != "rate")
                    .map(|(k, v)| (k.clone(), *v))
                    .collect();
                let p = take_params(name, &rest, &[], &[("loc", 0.0)])?;
                (Exponential { rate }, p[0])
            }
            "genpareto" => {
                let p = take_params(name, par, &["c"], &[("scale", 1.0), ("loc", 0.0)])?;
                (GenPareto { c: p[0], scale: p[1] }, p[2])
            }
            "pareto1" => {
                let p = take_params(name, par, &["shape"], &[("scale", 1.0), ("loc", 0.0)])?;
                (
                    Pareto1 {
                        shape: p[0],
                        scale: p[1],
                    },
                    p[2],
                )
            }
            "pareto2" => {
                let p = take_params(name, par, &["shape"], &[("scale", 1.0), ("loc", 0.0)])?;
                (
                    Pareto2 {
                        shape: p[0],
                        scale: p[1],
                    },
                    p[2],
                )
            }
            "beta" => {
                let p = take_params(name, par, &["a", "b"], &[("scale", 1.0), ("loc", 0.0)])?;
                (
                    Beta {
                        a: p[0],
                        b: p[1],
                        scale: p[2],
                    },
                    p[3],
                )
            }
            "burr12" => {
                let p = take_params(name, par, &["c", "d"], &[("scale", 1.0), ("loc", 0.0)])?;
                (
                    Burr12 {
                        c: p[0],
                        d: p[1],
                        scale: p[2],
                    },
                    p[3],
                )
            }
            "weibull" | "weibull_min" => {
                let p = take_params(name, par, &["c"], &[("scale", 1.0), ("loc", 0.0)])?;
                (Weibull { c: p[0], scale: p[1] }, p[2])
            }
            "uniform" => {
                let p = take_params(name, par, &[], &[("a", 0.0), ("b", 1.0)])?;
                (Uniform { a: p[0], b: p[1] }, 0.0)
            }
            other => {
                return Err(Error::UnknownName {
                    kind: "continuous distribution",
                    name: other.to_string(),
                })
            }
        };
        Continuous::new(family, loc)
    }

    pub fn name(&self) -> &'static str {
        use ContinuousFamily::*;
        match self.family {
            Gamma { .. } => "gamma",
            LogNormal { .. } => "lognormal",
            Exponential { .. } => "exponential",
            GenPareto { .. } => "genpareto",
            Pareto1 { .. } => "pareto1",
            Pareto2 { .. } => "pareto2",
            Beta { .. } => "beta",
            Burr12 { .. } => "burr12",
            Weibull { .. } => "weibull",
            Uniform { .. } => "uniform",
        }
    }

    /// Support of the unshifted variable Y = Z - loc.
    fn base_support(&self) -> (f64, f64) {
        use ContinuousFamily::*;
        match self.family {
            GenPareto { c, scale } if c < 0.0 => (0.0, -scale / c),
            Pareto1 { scale, .. } => (scale, f64::INFINITY),
            Beta { scale, .. } => (0.0, scale),
            Uniform { a, b } => (a, b),
            _ => (0.0, f64::INFINITY),
        }
    }

    pub fn support(&self) -> (f64, f64) {
        let (a, b) = self.base_support();
        (a + self.loc, b + self.loc)
    }

    fn base_sf(&self, y: f64) -> f64 {
        use ContinuousFamily::*;
        let (lo, hi) = self.base_support();
        if y <= lo {
            return 1.0;
        }
        if y >= hi {
            return 0.0;
        }
        match self.family {
            Gamma { a, scale } => gamma_ur(a, y / scale),
            LogNormal { shape, scale } => norm_sf((y / scale).ln() / shape),
            Exponential { rate } => (-rate * y).exp(),
            GenPareto { c, scale } => {
                if c == 0.0 {
                    (-y / scale).exp()
                } else {
                    (-(c * y / scale).ln_1p() / c).exp()
                }
            }
            Pareto1 { shape, scale } => (scale / y).powf(shape),
            Pareto2 { shape, scale } => (-shape * (y / scale).ln_1p()).exp(),
            Beta { a, b, scale } => beta_reg(b, a, 1.0 - y / scale),
            Burr12 { c, d, scale } => (-d * (y / scale).powf(c).ln_1p()).exp(),
            Weibull { c, scale } => (-(y / scale).powf(c)).exp(),
            Uniform { a, b } => (b - y) / (b - a),
        }
    }

    fn base_cdf(&self, y: f64) -> f64 {
        use ContinuousFamily::*;
        let (lo, hi) = self.base_support();
        if y <= lo {
            return 0.0;
        }
        if y >= hi {
            return 1.0;
        }
        match self.family {
            Gamma { a, scale } => gamma_lr(a, y / scale),
            LogNormal { shape, scale } => norm_cdf((y / scale).ln() / shape),
            Exponential { rate } => -(-rate * y).exp_m1(),
            GenPareto { c, scale } => {
                if c == 0.0 {
                    -(-y / scale).exp_m1()
                } else {
                    -(-(c * y / scale).ln_1p() / c).exp_m1()
                }
            }
            Pareto1 { shape, scale } => -(shape * (scale / y).ln()).exp_m1(),
            Pareto2 { shape, scale } => -(-shape * (y / scale).ln_1p()).exp_m1(),
            Beta { a, b, scale } => beta_reg(a, b, y / scale),
            Burr12 { c, d, scale } => -(-d * (y / scale).powf(c).ln_1p()).exp_m1(),
            Weibull { c, scale } => -(-(y / scale).powf(c)).exp_m1(),
            Uniform { a, b } => (y - a) / (b - a),
        }
    }

    fn base_pdf(&self, y: f64) -> f64 {
        use ContinuousFamily::*;
        let (lo, hi) = self.base_support();
        if y < lo || y > hi {
            return 0.0;
        }
        if let Gamma { a, scale } = self.family {
            if y == 0.0 && a == 1.0 {
                return 1.0 / scale;
            }
        }
        match self.family {
            Gamma { a, scale } => {
                let x = y / scale;
                ((a - 1.0) * x.ln() - x - ln_gamma(a)).exp() / scale
            }
            LogNormal { shape, scale } => {
                let z = (y / scale).ln() / shape;
                (-0.5 * z * z).exp() / (y * shape * (2.0 * std::f64::consts::PI).sqrt())
            }
            Exponential { rate } => rate * (-rate * y).exp(),
            GenPareto { c, scale } => {
                if c == 0.0 {
                    (-y / scale).exp() / scale
                } else {
                    (-(1.0 / c + 1.0) * (c * y / scale).ln_1p()).exp() / scale
                }
            }
            Pareto1 { shape, scale } => shape * scale.powf(shape) / y.powf(shape + 1.0),
            Pareto2 { shape, scale } => shape / scale * (-(shape + 1.0) * (y / scale).ln_1p()).exp(),
            Beta { a, b, scale } => {
                let x = y / scale;
                ((a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_beta(a, b)).exp() / scale
            }
            Burr12 { c, d, scale } => {
                let t = y / scale;
                c * d / scale * t.powf(c - 1.0) * (-(d + 1.0) * t.powf(c).ln_1p()).exp()
            }
            Weibull { c, scale } => {
                let t = y / scale;
                c / scale * t.powf(c - 1.0) * (-t.powf(c)).exp()
            }
            Uniform { a, b } => 1.0 / (b - a),
        }
    }

    fn base_ppf(&self, q: f64) -> f64 {
        use ContinuousFamily::*;
        let (lo, hi) = self.base_support();
        if q <= 0.0 {
            return lo;
        }
        if q >= 1.0 {
            return hi;
        }
        // -ln(1 - q) computed without cancellation
        let e = -(-q).ln_1p();
        match self.family {
            Exponential { rate } => e / rate,
            LogNormal { shape, scale } => scale * (shape * norm_ppf(q)).exp(),
            GenPareto { c, scale } => {
                if c == 0.0 {
                    scale * e
                } else {
                    scale / c * (c * e).exp_m1()
                }
            }
            Pareto1 { shape, scale } => scale * (e / shape).exp(),
            Pareto2 { shape, scale } => scale * (e / shape).exp_m1(),
            Burr12 { c, d, scale } => scale * (e / d).exp_m1().powf(1.0 / c),
            Weibull { c, scale } => scale * e.powf(1.0 / c),
            Uniform { a, b } => a + q * (b - a),
            Gamma { a, scale } => {
                let g = |x: f64| gamma_lr(a, x);
                let hint = (a + 3.0 * a.sqrt() + 5.0).max(1.0);
                let tol = 1e-15 * hint.max(1.0);
                let x = if q < 0.5 {
                    invert_increasing(g, q, 0.0, hint, tol)
                } else {
                    // work on the survival side for accuracy in the upper tail
                    invert_increasing(|x| -gamma_ur(a, x), -(1.0 - q), 0.0, hint, tol)
                };
                x.map(|v| v * scale).unwrap_or(f64::NAN)
            }
            Beta { a, b, scale } => {
                let x = crate::numeric::brent(|x| beta_reg(a, b, x) - q, 0.0, 1.0, 1e-16, 500);
                x.map(|v| v * scale).unwrap_or(f64::NAN)
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.base_cdf(x - self.loc)
    }

    pub fn sf(&self, x: f64) -> f64 {
        self.base_sf(x - self.loc)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.base_pdf(x - self.loc)
    }

    pub fn ppf(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Domain(format!("quantile level {q} outside [0, 1]")));
        }
        Ok(self.base_ppf(q) + self.loc)
    }

    fn heavy(&self, k: u32, bound: f64) -> Result<()> {
        if (k as f64) < bound {
            Ok(())
        } else {
            Err(Error::MomentUndefined {
                family: self.name().into(),
                order: k,
            })
        }
    }

    /// E[Y^k] of the unshifted variable.
    fn base_moment(&self, k: u32) -> Result<f64> {
        self.base_upm(k, f64::NEG_INFINITY)
    }

    /// Upper partial moment E[Y^k ; Y > x] of the unshifted variable.
    fn base_upm(&self, k: u32, x: f64) -> Result<f64> {
        use ContinuousFamily::*;
        let kf = k as f64;
        let (lo, hi) = self.base_support();
        let x = x.max(lo);
        if x >= hi {
            // still report undefined moments for heavy tails
            if let Pareto2 { shape, .. } | Pareto1 { shape, .. } = self.family {
                self.heavy(k, shape)?;
            }
            return Ok(0.0);
        }
        if k == 0 {
            return Ok(self.base_sf(x));
        }
        let v = match self.family {
            Gamma { a, scale } => {
                let m = (ln_gamma(a + kf) - ln_gamma(a)).exp() * scale.powi(k as i32);
                if x <= 0.0 {
                    m
                } else {
                    m * gamma_ur(a + kf, x / scale)
                }
            }
            LogNormal { shape, scale } => {
                let m = scale.powi(k as i32) * (0.5 * kf * kf * shape * shape).exp();
                if x <= 0.0 {
                    m
                } else {
                    m * norm_sf(((x / scale).ln() - kf * shape * shape) / shape)
                }
            }
            Exponential { rate } => {
                let m = (ln_gamma(kf + 1.0)).exp() / rate.powi(k as i32);
                if x <= 0.0 {
                    m
                } else {
                    m * gamma_ur(kf + 1.0, rate * x)
                }
            }
            Weibull { c, scale } => {
                let s = 1.0 + kf / c;
                let m = scale.powi(k as i32) * ln_gamma(s).exp();
                if x <= 0.0 {
                    m
                } else {
                    m * gamma_ur(s, (x / scale).powf(c))
                }
            }
            GenPareto { c: 0.0, scale } => {
                let m = (ln_gamma(kf + 1.0)).exp() * scale.powi(k as i32);
                if x <= 0.0 {
                    m
                } else {
                    m * gamma_ur(kf + 1.0, x / scale)
                }
            }
            GenPareto { c, scale } if c > 0.0 => lomax_upm(self, k, 1.0 / c, scale / c, x)?,
            Pareto2 { shape, scale } => lomax_upm(self, k, shape, scale, x)?,
            GenPareto { c, scale } => {
                // bounded support: V = |c| Y / scale ~ Beta(1, 1/|c|)
                let g = -c;
                let b = 1.0 / g;
                let m = (scale / g).powi(k as i32) * (ln_beta(kf + 1.0, b) - ln_beta(1.0, b)).exp();
                let v0 = (g * x / scale).clamp(0.0, 1.0);
                if v0 <= 0.0 {
                    m
                } else {
                    m * beta_reg(b, kf + 1.0, 1.0 - v0)
                }
            }
            Pareto1 { shape, scale } => {
                self.heavy(k, shape)?;
                let xx = x.max(scale);
                shape * scale.powf(shape) * xx.powf(kf - shape) / (shape - kf)
            }
            Beta { a, b, scale } => {
                let m = scale.powi(k as i32) * (ln_beta(a + kf, b) - ln_beta(a, b)).exp();
                if x <= 0.0 {
                    m
                } else {
                    m * beta_reg(b, a + kf, 1.0 - x / scale)
                }
            }
            Burr12 { c, d, scale } => {
                self.heavy(k, c * d)?;
                let (p, q) = (1.0 + kf / c, d - kf / c);
                let m = scale.powi(k as i32) * d * ln_beta(p, q).exp();
                if x <= 0.0 {
                    m
                } else {
                    let t = (x / scale).powf(c);
                    m * beta_reg(q, p, 1.0 / (1.0 + t))
                }
            }
            Uniform { a, b } => {
                let xx = x.max(a);
                (b.powi(k as i32 + 1) - xx.powi(k as i32 + 1)) / ((kf + 1.0) * (b - a))
            }
        };
        Ok(v)
    }

    /// Raw moment E[Z^k].
    pub fn moment(&self, k: u32) -> Result<f64> {
        let mut total = 0.0;
        for i in 0..=k {
            total += binom(k, i) * self.loc.powi((k - i) as i32) * self.base_moment(i)?;
        }
        Ok(total)
    }

    pub fn mean(&self) -> Result<f64> {
        Ok(self.loc + self.base_moment(1)?)
    }

    pub fn var(&self) -> Result<f64> {
        let m1 = self.base_moment(1)?;
        let m2 = self.base_moment(2)?;
        Ok((m2 - m1 * m1).max(0.0))
    }

    pub fn std(&self) -> Result<f64> {
        Ok(self.var()?.sqrt())
    }

    pub fn skewness(&self) -> Result<f64> {
        let m1 = self.base_moment(1)?;
        let m2 = self.base_moment(2)?;
        let m3 = self.base_moment(3)?;
        let v = m2 - m1 * m1;
        Ok((m3 - 3.0 * m1 * m2 + 2.0 * m1.powi(3)) / v.powf(1.5))
    }

    pub fn mean_std_skewness(&self) -> Result<(f64, f64, f64)> {
        Ok((self.mean()?, self.std()?, self.skewness()?))
    }

    /// Limited expected value E[min(Z, u)].
    pub fn lev(&self, u: f64) -> Result<f64> {
        if u < 0.0 {
            return Err(Error::Domain(format!("lev requires u ≥ 0, got {u}")));
        }
        self.censored_moment(1, 0.0, u)
    }

    /// E[min(max(Z - d, 0), c)^n]: the n-th moment of the per-loss layer
    /// transform with deductible `d` and cover `c` (unconditional on Z > d).
    pub fn censored_moment(&self, n: u32, d: f64, c: f64) -> Result<f64> {
        if n == 0 {
            return Ok(1.0);
        }
        if !(d >= 0.0 && c >= 0.0) || d.is_nan() || c.is_nan() {
            return Err(Error::Domain(format!("censored moment needs d, c ≥ 0 (d={d}, c={c})")));
        }
        if c == 0.0 {
            return Ok(0.0);
        }
        let e = d - self.loc;
        let (lo, hi) = self.base_support();
        // E[(Y - e)^n ; Y > x] by binomial expansion of upper partial moments
        let tail = |x: f64| -> Result<(f64, f64)> {
            let mut s = 0.0;
            let mut scale = 0.0;
            for i in 0..=n {
                let t = binom(n, i) * (-e).powi((n - i) as i32) * self.base_upm(i, x)?;
                s += t;
                scale += t.abs();
            }
            Ok((s, scale))
        };
        let x1 = e.max(lo);
        let (value, scale) = if c.is_infinite() {
            tail(x1)?
        } else {
            let x2 = e + c;
            let parts = tail(x1).and_then(|t1| Ok((t1, if x2 >= hi { (0.0, 0.0) } else { tail(x2)? })));
            match parts {
                Ok(((a1, s1), (a2, s2))) => {
                    let cap = c.powi(n as i32) * self.base_sf(x2);
                    (a1 - a2 + cap, s1 + s2 + cap)
                }
                // a bounded layer has every moment even when the tail does not
                Err(Error::MomentUndefined { .. }) => return self.sf_integral(n as f64, e, c),
                Err(err) => return Err(err),
            }
        };
        if scale <= 1e6 * value.abs() || (value == 0.0 && scale == 0.0) {
            return Ok(value.max(0.0));
        }
        self.sf_integral(n as f64, e, c)
    }

    /// ∫_0^c n t^{n-1} sf_Y(e + t) dt (c may be infinite), split at the support ends.
    fn sf_integral(&self, n: f64, e: f64, c: f64) -> Result<f64> {
        let (lo, hi) = self.base_support();
        let end = c.min(hi - e);
        if end <= 0.0 {
            return Ok(0.0);
        }
        let f = |t: f64| {
            if t <= 0.0 {
                0.0
            } else {
                n * t.powf(n - 1.0) * self.base_sf(e + t)
            }
        };
        let mut pts = vec![0.0];
        if lo - e > 0.0 && lo - e < end {
            pts.push(lo - e);
        }
        let mut total = 0.0;
        if end.is_finite() {
            pts.push(end);
        } else {
            let last = *pts.last().unwrap();
            let pivot = (self.base_ppf(0.5) - e).max(last);
            if pivot > last {
                pts.push(pivot);
            }
            total += integrate_to_inf(f, *pts.last().unwrap(), 1e-14, 1e-12)?;
        }
        for w in pts.windows(2) {
            total += integrate(f, w[0], w[1], 1e-14, 1e-13)?;
        }
        Ok(total)
    }

    /// Draw `n` variates using generator `rng`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        use ContinuousFamily::*;
        let y = match self.family {
            Gamma { a, scale } => GammaSampler::new(a, scale).map(|g| g.sample(rng)).unwrap_or(f64::NAN),
            LogNormal { shape, scale } => {
                let z: f64 = StandardNormal.sample(rng);
                scale * (shape * z).exp()
            }
            Beta { a, b, scale } => BetaSampler::new(a, b)
                .map(|g| scale * g.sample(rng))
                .unwrap_or(f64::NAN),
            _ => self.base_ppf(open_unit(rng)),
        };
        y + self.loc
    }

    /// Deterministic i.i.d. variates from a seeded ChaCha stream.
    pub fn rvs(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = crate::rng::stream(seed, 0);
        (0..n).map(|_| self.sample(&mut rng)).collect()
    }
}

fn lomax_upm(dist: &Continuous, k: u32, alpha: f64, lambda: f64, x: f64) -> Result<f64> {
    dist.heavy(k, alpha)?;
    let kf = k as f64;
    // alpha * B(k+1, alpha-k) * lambda^k, times the incomplete-beta tail
    let m = lambda.powi(k as i32) * (alpha.ln() + ln_beta(kf + 1.0, alpha - kf)).exp();
    if x <= 0.0 {
        return Ok(m);
    }
    let w = x / lambda;
    Ok(m * beta_reg(alpha - kf, kf + 1.0, 1.0 / (1.0 + w)))
}

pub(crate) fn binom(n: u32, k: u32) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(name: &str, par: &[(&str, f64)]) -> Continuous {
        let m: ParamMap = par.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        Continuous::from_name(name, &m).unwrap()
    }

    fn all() -> Vec<Continuous> {
        vec![
            dist("gamma", &[("a", 5.0)]),
            dist("gamma", &[("a", 0.7), ("scale", 3.0), ("loc", 1.0)]),
            dist("lognormal", &[("shape", 1.3), ("scale", 36315.49)]),
            dist("exponential", &[("theta", 0.5)]),
            dist("genpareto", &[("c", 0.834), ("scale", 83.34)]),
            dist("genpareto", &[("c", -0.3), ("scale", 2.0)]),
            dist("genpareto", &[("c", 0.0), ("scale", 2.0)]),
            dist("pareto1", &[("shape", 3.5), ("scale", 2.0)]),
            dist("pareto2", &[("shape", 4.2), ("scale", 100.0)]),
            dist("beta", &[("a", 2.0), ("b", 3.0), ("scale", 10.0)]),
            dist("burr12", &[("c", 2.0), ("d", 3.0), ("scale", 5.0)]),
            dist("weibull", &[("c", 1.7), ("scale", 4.0)]),
            dist("uniform", &[("a", 1.0), ("b", 4.0)]),
        ]
    }

    #[test]
    fn gamma_density_at_mode() {
        let g = dist("gamma", &[("a", 5.0)]);
        let expected = 4f64.powi(4) * (-4f64).exp() / 24.0;
        assert!((g.pdf(4.0) - expected).abs() < 1e-15);
    }

    #[test]
    fn lognormal_moments_match_reference() {
        let d = dist("lognormal", &[("shape", 1.3), ("scale", 36315.49)]);
        let (m, s, _) = d.mean_std_skewness().unwrap();
        assert!((m - 84541.68).abs() < 0.05, "{m}");
        assert!((s - 177728.30).abs() < 0.2, "{s}");
    }

    #[test]
    fn ppf_inverts_cdf() {
        for d in all() {
            for i in 1..100 {
                let q = i as f64 / 100.0;
                let x = d.ppf(q).unwrap();
                let back = d.cdf(x);
                assert!((back - q).abs() < 1e-11, "{} q={q} x={x} cdf={back}", d.name());
                let x2 = d.ppf(back).unwrap();
                assert!(
                    (x2 - x).abs() <= 1e-9 * x.abs().max(1e-12),
                    "{} x={x} x2={x2}",
                    d.name()
                );
            }
        }
    }

    #[test]
    fn pdf_integrates_to_cdf() {
        for d in all() {
            let (x0, x1) = (d.ppf(0.1).unwrap(), d.ppf(0.7).unwrap());
            let v = integrate(|t| d.pdf(t), x0, x1, 1e-13, 1e-12).unwrap();
            assert!((v - 0.6).abs() < 1e-8, "{} {v}", d.name());
        }
    }

    #[test]
    fn moments_match_quadrature() {
        for d in all() {
            let (lo, hi) = d.support();
            let mid = d.ppf(0.5).unwrap();
            for k in 1..=2u32 {
                let m = match d.moment(k) {
                    Ok(m) => m,
                    Err(_) => continue,
                };
                if d.moment(2 * k).is_err() {
                    continue; // tail too heavy for the quadrature oracle
                }
                let g = |t: f64| t.powi(k as i32) * d.pdf(t);
                let body = integrate(g, lo, mid, 1e-12, 1e-12).unwrap();
                let tail = if hi.is_finite() {
                    integrate(g, mid, hi, 1e-12, 1e-12).unwrap()
                } else {
                    integrate_to_inf(g, mid, 1e-12, 1e-12).unwrap()
                };
                let q = body + tail;
                assert!(
                    (q - m).abs() <= 1e-6 * m.abs().max(1.0),
                    "{} k={k} {q} vs {m}",
                    d.name()
                );
            }
        }
    }

    #[test]
    fn censored_moment_closed_form_matches_quadrature() {
        for d in all() {
            for &(dd, c) in &[(0.0, 1.0), (0.5, 3.0), (2.0, 50.0), (100.0, 250.0)] {
                for n in 1..=3u32 {
                    let closed = d.censored_moment(n, dd, c).unwrap();
                    let e = dd - d.loc;
                    let quad = d.sf_integral(n as f64, e, c).unwrap();
                    assert!(
                        (closed - quad).abs() <= 1e-9 * quad.abs().max(1e-300) + 1e-14,
                        "{} n={n} d={dd} c={c}: {closed} vs {quad}",
                        d.name()
                    );
                }
            }
        }
    }

    #[test]
    fn uniform_and_exponential_lev() {
        let u = dist("uniform", &[("a", 0.0), ("b", 1.0)]);
        assert!((u.lev(0.5).unwrap() - 0.375).abs() < 1e-15);
        assert!((u.censored_moment(1, 0.5, f64::INFINITY).unwrap() - 0.125).abs() < 1e-15);
        assert!((u.mean().unwrap() - 0.5).abs() < 1e-15);
        let e = dist("exponential", &[("rate", 1.0)]);
        for &x in &[1e-6, 0.1, 1.0, 7.5] {
            let l = e.lev(x).unwrap();
            assert!((l + (-x).exp_m1()).abs() < 1e-13 * l.max(1e-6), "{x} {l}");
        }
        let g = dist("gamma", &[("a", 5.0)]);
        assert!((g.lev(f64::INFINITY).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn heavy_tails_raise_moment_errors() {
        let p = dist("pareto2", &[("shape", 1.2), ("scale", 100.0)]);
        assert!(p.mean().is_ok());
        assert!(matches!(p.var(), Err(Error::MomentUndefined { .. })));
        assert!(matches!(
            p.censored_moment(2, 10.0, f64::INFINITY),
            Err(Error::MomentUndefined { .. })
        ));
        assert!(p.censored_moment(2, 10.0, 1e4).is_ok());
    }

    #[test]
    fn rejects_bad_parameters() {
        let m: ParamMap = [("a".to_string(), -1.0)].into_iter().collect();
        assert!(Continuous::from_name("gamma", &m).is_err());
        let m: ParamMap = [("a".to_string(), 1.0), ("shape".to_string(), 1.0)]
            .into_iter()
            .collect();
        let err = Continuous::from_name("gamma", &m).unwrap_err();
        assert!(err.to_string().contains("shape"));
    }

    #[test]
    fn sampling_is_deterministic_and_unbiased() {
        let g = dist("gamma", &[("a", 5.0)]);
        assert_eq!(g.rvs(1, 9), g.rvs(1, 9));
        let xs = g.rvs(1_000_000, 3);
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((m - 5.0).abs() < 4.0 * 5f64.sqrt() / 1e3, "{m}");
    }
}
