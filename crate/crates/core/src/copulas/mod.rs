//! Copula catalogue: Archimedean (Clayton, Frank, Gumbel, Joe, Ali–Mikhail–Haq),
//! elliptical (Gaussian, Student t) and fundamental (independence, Fréchet–Hoeffding
//! bounds) copulas with cdf evaluation and seeded sampling.

pub mod mvn;

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Exp1, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::Deserialize;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::numeric::{brent, norm_cdf, norm_ppf, t_cdf, t_ppf};
use crate::rng::{open_unit, stream, StreamRng};
pub use mvn::{Estimate, QmcConfig};

/// Lazily built radial scale table of a Student t copula.
#[derive(Debug, Clone, Default)]
pub struct RadialCache(Arc<OnceLock<Vec<Vec<f64>>>>);

impl PartialEq for RadialCache {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

/// Correlation structure shared by the elliptical families.
#[derive(Debug, Clone, PartialEq)]
pub struct Correlation {
    pub corr: Vec<Vec<f64>>,
    chol: Vec<Vec<f64>>,
}

impl Correlation {
    pub fn new(corr: Vec<Vec<f64>>) -> Result<Self> {
        let d = corr.len();
        if d < 2 {
            return Err(Error::param("corr", "needs dimension ≥ 2"));
        }
        for (i, row) in corr.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Dimension {
                    expected: d,
                    got: row.len(),
                });
            }
            if (row[i] - 1.0).abs() > 1e-12 {
                return Err(Error::param("corr", "diagonal entries must equal 1"));
            }
            for j in 0..d {
                if (row[j] - corr[j][i]).abs() > 1e-12 {
                    return Err(Error::param("corr", "matrix must be symmetric"));
                }
                if row[j].abs() > 1.0 {
                    return Err(Error::param("corr", "entries must lie in [-1, 1]"));
                }
            }
        }
        let chol = mvn::cholesky(&corr)?;
        Ok(Correlation { corr, chol })
    }

    pub fn dim(&self) -> usize {
        self.corr.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CopulaFamily {
    Clayton(f64),
    Frank(f64),
    Gumbel(f64),
    Joe(f64),
    AliMikhailHaq(f64),
    Gaussian(Correlation),
    TStudent(Correlation, f64),
    Independence,
    /// Countermonotonic bound W (d = 2 only).
    FrechetLower,
    /// Comonotonic bound M.
    FrechetUpper,
}

/// Copula parameters as written in configuration files.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CopulaPar {
    pub par: Option<f64>,
    pub dim: Option<usize>,
    pub corr: Option<Vec<Vec<f64>>>,
    pub df: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Copula {
    pub family: CopulaFamily,
    pub dim: usize,
    pub qmc: QmcConfig,
    radial: RadialCache,
}

impl Copula {
    pub fn new(family: CopulaFamily, dim: usize) -> Result<Self> {
        use CopulaFamily::*;
        if dim < 2 {
            return Err(Error::param("dim", format!("must be ≥ 2, got {dim}")));
        }
        let bad = |name: &str, msg: String| Err(Error::param(name, msg));
        match &family {
            Clayton(t) if !(*t > 0.0 && t.is_finite()) => return bad("par", format!("clayton needs θ > 0, got {t}")),
            Frank(t) if !t.is_finite() || *t == 0.0 || (dim > 2 && *t < 0.0) => {
                return bad("par", format!("frank needs θ ≠ 0 (θ > 0 for d > 2), got {t}"))
            }
            Gumbel(t) if !(*t >= 1.0 && t.is_finite()) => return bad("par", format!("gumbel needs θ ≥ 1, got {t}")),
            Joe(t) if !(*t >= 1.0 && t.is_finite()) => return bad("par", format!("joe needs θ ≥ 1, got {t}")),
            AliMikhailHaq(t) if !(*t >= -1.0 && *t < 1.0) || (dim > 2 && *t < 0.0) => {
                return bad(
                    "par",
                    format!("ali-mikhail-haq needs θ ∈ [-1, 1) (θ ≥ 0 for d > 2), got {t}"),
                )
            }
            Gaussian(c) | TStudent(c, _) if c.dim() != dim => {
                return Err(Error::Dimension {
                    expected: dim,
                    got: c.dim(),
                })
            }
            Gaussian(_) | TStudent(..) if dim > mvn::MAX_DIM => {
                return Err(Error::Unsupported(format!(
                    "elliptical copulas support d ≤ {}",
                    mvn::MAX_DIM
                )))
            }
            TStudent(_, df) if !(*df > 0.0) => return bad("df", format!("must be > 0, got {df}")),
            FrechetLower if dim != 2 => {
                return Err(Error::Unsupported(
                    "the Fréchet–Hoeffding lower bound is a copula only for d = 2".into(),
                ))
            }
            _ => {}
        }
        Ok(Copula {
            family,
            dim,
            qmc: QmcConfig::default(),
            radial: RadialCache::default(),
        })
    }

    pub fn clayton(theta: f64, dim: usize) -> Result<Self> {
        Copula::new(CopulaFamily::Clayton(theta), dim)
    }

    pub fn frank(theta: f64, dim: usize) -> Result<Self> {
        Copula::new(CopulaFamily::Frank(theta), dim)
    }

    pub fn gumbel(theta: f64, dim: usize) -> Result<Self> {
        Copula::new(CopulaFamily::Gumbel(theta), dim)
    }

    pub fn joe(theta: f64, dim: usize) -> Result<Self> {
        Copula::new(CopulaFamily::Joe(theta), dim)
    }

    pub fn ali_mikhail_haq(theta: f64, dim: usize) -> Result<Self> {
        Copula::new(CopulaFamily::AliMikhailHaq(theta), dim)
    }

    pub fn gaussian(corr: Vec<Vec<f64>>) -> Result<Self> {
        let c = Correlation::new(corr)?;
        let d = c.dim();
        Copula::new(CopulaFamily::Gaussian(c), d)
    }

    pub fn tstudent(corr: Vec<Vec<f64>>, df: f64) -> Result<Self> {
        let c = Correlation::new(corr)?;
        let d = c.dim();
        Copula::new(CopulaFamily::TStudent(c, df), d)
    }

    pub fn independence(dim: usize) -> Result<Self> {
        Copula::new(CopulaFamily::Independence, dim)
    }

    pub fn frechet_lower() -> Result<Self> {
        Copula::new(CopulaFamily::FrechetLower, 2)
    }

    pub fn frechet_upper(dim: usize) -> Result<Self> {
        Copula::new(CopulaFamily::FrechetUpper, dim)
    }

    pub fn with_qmc(mut self, qmc: QmcConfig) -> Self {
        self.qmc = qmc;
        self.radial = RadialCache::default();
        self
    }

    /// Builds a copula from its catalogue name and parameters.
    pub fn from_name(name: &str, p: &CopulaPar) -> Result<Self> {
        let theta = || {
            p.par
                .ok_or_else(|| Error::param("par", format!("{name} requires `par`")))
        };
        let dim = || {
            p.dim
                .ok_or_else(|| Error::param("dim", format!("{name} requires `dim`")))
        };
        let corr = || {
            p.corr
                .clone()
                .ok_or_else(|| Error::param("corr", format!("{name} requires `corr`")))
        };
        let reject = |field: &str, present: bool| -> Result<()> {
            if present {
                Err(Error::param(field, format!("not a parameter of {name}")))
            } else {
                Ok(())
            }
        };
        match name {
            "clayton" | "frank" | "gumbel" | "joe" | "ali-mikhail-haq" | "amh" => {
                reject("corr", p.corr.is_some())?;
                reject("df", p.df.is_some())?;
                let (t, d) = (theta()?, dim()?);
                match name {
                    "clayton" => Copula::clayton(t, d),
                    "frank" => Copula::frank(t, d),
                    "gumbel" => Copula::gumbel(t, d),
                    "joe" => Copula::joe(t, d),
                    _ => Copula::ali_mikhail_haq(t, d),
                }
            }
            "gaussian" => {
                reject("par", p.par.is_some())?;
                reject("df", p.df.is_some())?;
                let c = Copula::gaussian(corr()?)?;
                check_dim(p.dim, c.dim)?;
                Ok(c)
            }
            "tstudent" => {
                reject("par", p.par.is_some())?;
                let df = p.df.ok_or_else(|| Error::param("df", "tstudent requires `df`"))?;
                let c = Copula::tstudent(corr()?, df)?;
                check_dim(p.dim, c.dim)?;
                Ok(c)
            }
            "independent" | "independence" => Copula::independence(dim()?),
            "frechet-lower" | "frechet-hoeffding-lower" => {
                check_dim(p.dim, 2)?;
                Copula::frechet_lower()
            }
            "frechet-upper" | "frechet-hoeffding-upper" => Copula::frechet_upper(dim()?),
            _ => Err(Error::UnknownName {
                kind: "copula",
                name: name.into(),
            }),
        }
    }

    pub fn name(&self) -> &'static str {
        use CopulaFamily::*;
        match self.family {
            Clayton(_) => "clayton",
            Frank(_) => "frank",
            Gumbel(_) => "gumbel",
            Joe(_) => "joe",
            AliMikhailHaq(_) => "ali-mikhail-haq",
            Gaussian(_) => "gaussian",
            TStudent(..) => "tstudent",
            Independence => "independent",
            FrechetLower => "frechet-lower",
            FrechetUpper => "frechet-upper",
        }
    }

    /// Whether cdf values carry a numerical-integration error.
    pub fn is_elliptical(&self) -> bool {
        matches!(self.family, CopulaFamily::Gaussian(_) | CopulaFamily::TStudent(..))
    }

    /// C(u) with its absolute error estimate (zero for closed-form families).
    pub fn cdf_with_error(&self, u: &[f64]) -> Result<Estimate> {
        use CopulaFamily::*;
        if u.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: u.len(),
            });
        }
        if u.iter().any(|x| x.is_nan()) {
            return Err(Error::Domain("copula argument is NaN".into()));
        }
        if u.iter().any(|&x| x <= 0.0) {
            return Ok(Estimate { value: 0.0, error: 0.0 });
        }
        let u: Vec<f64> = u.iter().map(|x| x.min(1.0)).collect();
        let exact = |value: f64| {
            Ok(Estimate {
                value: value.clamp(0.0, 1.0),
                error: 0.0,
            })
        };
        // coordinates equal to one drop out of every copula
        let free: Vec<f64> = u.iter().copied().filter(|&x| x < 1.0).collect();
        match free.len() {
            0 => return exact(1.0),
            1 => return exact(free[0]),
            _ => {}
        }
        match &self.family {
            Clayton(t) => {
                let s: f64 = free.iter().map(|x| (-t * x.ln()).exp_m1()).sum();
                exact((-s.ln_1p() / t).exp())
            }
            Frank(t) => {
                let em = (-t).exp_m1();
                let prod: f64 = free.iter().map(|x| (-t * x).exp_m1() / em).product();
                exact(-(em * prod).ln_1p() / t)
            }
            Gumbel(t) => {
                let s: f64 = free.iter().map(|x| (-x.ln()).powf(*t)).sum();
                exact((-s.powf(1.0 / t)).exp())
            }
            Joe(t) => {
                let lp: f64 = free.iter().map(|x| (-(1.0 - x).powf(*t)).ln_1p()).sum();
                exact(1.0 - (-lp.exp_m1()).powf(1.0 / t))
            }
            AliMikhailHaq(t) => {
                let prod: f64 = free.iter().map(|x| (1.0 - t * (1.0 - x)) / x).product();
                exact((1.0 - t) / (prod - t))
            }
            Independence => exact(free.iter().product()),
            FrechetUpper => exact(free.iter().copied().fold(1.0, f64::min)),
            FrechetLower => exact((u[0] + u[1] - 1.0).max(0.0)),
            Gaussian(c) => {
                let b: Vec<f64> = u
                    .iter()
                    .map(|&x| if x >= 1.0 { f64::INFINITY } else { norm_ppf(x) })
                    .collect();
                mvn::mvn_cdf(&c.corr, &b, &self.qmc)
            }
            TStudent(c, df) => {
                let b: Vec<f64> = u
                    .iter()
                    .map(|&x| if x >= 1.0 { f64::INFINITY } else { t_ppf(x, *df) })
                    .collect();
                let table = self.radial.0.get_or_init(|| mvn::radial_table(*df, &self.qmc));
                mvn::mvt_cdf(&c.corr, &b, *df, &self.qmc, table)
            }
        }
    }

    pub fn cdf(&self, u: &[f64]) -> Result<f64> {
        Ok(self.cdf_with_error(u)?.value)
    }

    /// cdf at each row of an n×d matrix.
    pub fn cdf_points(&self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        points.par_iter().map(|p| self.cdf(p)).collect()
    }

    /// Conditional cdf C(v | u) = ∂C(u, v)/∂u of a bivariate Archimedean copula.
    fn conditional(&self, u: f64, v: f64) -> f64 {
        use CopulaFamily::*;
        // derivative of the generator φ
        let dphi = |x: f64| -> f64 {
            match self.family {
                AliMikhailHaq(t) => t / (1.0 - t * (1.0 - x)) - 1.0 / x,
                Joe(t) => {
                    let p = (1.0 - x).powf(t);
                    -t * (1.0 - x).powf(t - 1.0) / (1.0 - p)
                }
                Frank(t) => t * (-t * x).exp() / (-t * x).exp_m1(),
                _ => unreachable!("conditional inversion is only used for AMH, Joe and Frank"),
            }
        };
        let c = self.cdf(&[u, v]).unwrap_or(0.0);
        if c <= 0.0 {
            return 0.0;
        }
        (dphi(u) / dphi(c)).clamp(0.0, 1.0)
    }

    /// Draws V given U = u with conditional probability w by root finding.
    fn invert_conditional(&self, u: f64, w: f64) -> f64 {
        let g = |v: f64| self.conditional(u, v) - w;
        brent(g, 1e-300, 1.0, 1e-15, 200).unwrap_or(w)
    }

    /// Fills `out` (length d) with one draw from the copula.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        use CopulaFamily::*;
        let d = self.dim;
        let exp = |rng: &mut R| -> f64 { Exp1.sample(rng) };
        match &self.family {
            Independence => out.iter_mut().for_each(|x| *x = open_unit(rng)),
            FrechetUpper => {
                let u = open_unit(rng);
                out.iter_mut().for_each(|x| *x = u);
            }
            FrechetLower => {
                let u = open_unit(rng);
                out[0] = u;
                out[1] = 1.0 - u;
            }
            Clayton(t) => {
                let v: f64 = Gamma::new(1.0 / t, 1.0).expect("valid gamma").sample(rng);
                for x in out.iter_mut() {
                    *x = (-(exp(rng) / v).ln_1p() / t).exp();
                }
            }
            Gumbel(t) => {
                let v = if *t == 1.0 { 1.0 } else { positive_stable(1.0 / t, rng) };
                for x in out.iter_mut() {
                    *x = (-(exp(rng) / v).powf(1.0 / t)).exp();
                }
            }
            Frank(t) if *t > 0.0 => {
                let v = log_series(-*t, rng) as f64;
                let em = (-t).exp_m1();
                for x in out.iter_mut() {
                    *x = -((-exp(rng) / v).exp() * em).ln_1p() / t;
                }
            }
            AliMikhailHaq(t) if d > 2 => {
                // geometric frailty on {1, 2, …} with P(V = k) = (1 − θ)θ^(k−1)
                let v = if *t == 0.0 {
                    1.0
                } else {
                    1.0 + (open_unit(rng).ln() / t.ln()).floor()
                };
                for x in out.iter_mut() {
                    *x = (1.0 - t) / ((exp(rng) / v).exp() - t);
                }
            }
            Joe(t) if d > 2 => {
                let v = sibuya(1.0 / t, rng);
                for x in out.iter_mut() {
                    *x = 1.0 - (-(-exp(rng) / v).exp_m1()).powf(1.0 / t);
                }
            }
            Frank(_) | AliMikhailHaq(_) | Joe(_) => {
                let u = open_unit(rng);
                let w = open_unit(rng);
                out[0] = u;
                out[1] = self.invert_conditional(u, w);
            }
            Gaussian(c) => {
                let z = correlated_normals(&c.chol, rng);
                for (x, zi) in out.iter_mut().zip(z) {
                    *x = norm_cdf(zi);
                }
            }
            TStudent(c, df) => {
                let z = correlated_normals(&c.chol, rng);
                let w: f64 = ChiSquared::new(*df).expect("valid df").sample(rng);
                let s = (w / df).sqrt();
                for (x, zi) in out.iter_mut().zip(z) {
                    *x = t_cdf(zi / s, *df);
                }
            }
        }
    }

    /// n draws as rows of an n×d matrix; chunk k uses stream (seed, k).
    pub fn rvs(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        const CHUNK: usize = 1 << 14;
        let chunks = n.div_ceil(CHUNK);
        (0..chunks)
            .into_par_iter()
            .flat_map_iter(|k| {
                let mut rng: StreamRng = stream(seed, k as u64);
                let len = CHUNK.min(n - k * CHUNK);
                (0..len)
                    .map(|_| {
                        let mut row = vec![0.0; self.dim];
                        self.sample_into(&mut rng, &mut row);
                        row
                    })
                    .collect::<Vec<_>>()
            })
            .collect()
    }
}

fn check_dim(given: Option<usize>, actual: usize) -> Result<()> {
    match given {
        Some(d) if d != actual => Err(Error::Dimension {
            expected: actual,
            got: d,
        }),
        _ => Ok(()),
    }
}

fn correlated_normals<R: Rng + ?Sized>(chol: &[Vec<f64>], rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..chol.len()).map(|_| StandardNormal.sample(rng)).collect();
    chol.iter()
        .map(|row| row.iter().zip(&e).map(|(l, x)| l * x).sum())
        .collect()
}

/// Positive stable variate with Laplace transform exp(−t^α), 0 < α < 1 (Kanter's representation).
fn positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let th = std::f64::consts::PI * open_unit(rng);
    let w: f64 = Exp1.sample(rng);
    let a = (alpha * th).sin().powf(alpha / (1.0 - alpha)) * ((1.0 - alpha) * th).sin()
        / th.sin().powf(1.0 / (1.0 - alpha));
    (a / w).powf((1.0 - alpha) / alpha)
}

/// Logarithmic-series variate with P(V = k) ∝ p^k / k, where `ln_q` = ln(1 − p) (Kemp's LK).
fn log_series<R: Rng + ?Sized>(ln_q: f64, rng: &mut R) -> u64 {
    let p = -ln_q.exp_m1();
    let u = open_unit(rng);
    if u > p {
        return 1;
    }
    let q = -(ln_q * open_unit(rng)).exp_m1();
    if u < q * q {
        let k = (1.0 + u.ln() / q.ln()).floor();
        return if k.is_finite() && k >= 1.0 { k as u64 } else { 1 };
    }
    if u > q {
        1
    } else {
        2
    }
}

/// Sibuya(α) variate: P(V > n) = Γ(n + 1 − α) / (Γ(n + 1) Γ(1 − α)).
fn sibuya<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    use statrs::function::gamma::ln_gamma;
    if alpha >= 1.0 {
        return 1.0;
    }
    let u = open_unit(rng);
    if u <= alpha {
        return 1.0;
    }
    let lg = ln_gamma(1.0 - alpha);
    let ln_sf = |n: f64| ln_gamma(n + 1.0 - alpha) - ln_gamma(n + 1.0) - lg;
    let target = (1.0 - u).ln();
    // tail asymptotics P(V > n) ≈ n^(−α)/Γ(1 − α) give the starting point
    let guess = ((1.0 - u) * (1.0 - alpha).exp().max(1.0) * lg.exp()).powf(-1.0 / alpha);
    if !(guess < 1e15) {
        return guess.min(1e300);
    }
    let mut n = guess.floor().max(1.0);
    while ln_sf(n) > target {
        n += 1.0;
    }
    while n > 1.0 && ln_sf(n - 1.0) <= target {
        n -= 1.0;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kendall_tau(rows: &[Vec<f64>]) -> f64 {
        let mut pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[1])).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let n = ys.len();
        let disc = count_inversions(&mut ys);
        let total = (n * (n - 1) / 2) as f64;
        1.0 - 2.0 * disc as f64 / total
    }

    fn count_inversions(v: &mut [f64]) -> u64 {
        let n = v.len();
        if n < 2 {
            return 0;
        }
        let (a, b) = v.split_at_mut(n / 2);
        let mut inv = count_inversions(a) + count_inversions(b);
        let mut merged = Vec::with_capacity(n);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            if a[i] <= b[j] {
                merged.push(a[i]);
                i += 1;
            } else {
                merged.push(b[j]);
                inv += (a.len() - i) as u64;
                j += 1;
            }
        }
        merged.extend_from_slice(&a[i..]);
        merged.extend_from_slice(&b[j..]);
        v.copy_from_slice(&merged);
        inv
    }

    fn ks_uniform(mut x: Vec<f64>) -> f64 {
        x.sort_by(f64::total_cmp);
        let n = x.len() as f64;
        x.iter()
            .enumerate()
            .map(|(i, &v)| (v - i as f64 / n).abs().max(((i + 1) as f64 / n - v).abs()))
            .fold(0.0, f64::max)
    }

    fn catalogue() -> Vec<Copula> {
        vec![
            Copula::clayton(1.2, 2).unwrap(),
            Copula::frank(3.0, 2).unwrap(),
            Copula::frank(-4.0, 2).unwrap(),
            Copula::gumbel(1.7, 2).unwrap(),
            Copula::joe(2.2, 2).unwrap(),
            Copula::ali_mikhail_haq(0.6, 2).unwrap(),
            Copula::ali_mikhail_haq(-0.8, 2).unwrap(),
            Copula::gaussian(vec![vec![1.0, 0.6], vec![0.6, 1.0]]).unwrap(),
            Copula::tstudent(vec![vec![1.0, -0.4], vec![-0.4, 1.0]], 4.5).unwrap(),
            Copula::independence(2).unwrap(),
            Copula::frechet_lower().unwrap(),
            Copula::frechet_upper(2).unwrap(),
        ]
    }

    #[test]
    fn gumbel_reference_value() {
        let c = Copula::gumbel(1.2, 2).unwrap();
        assert!((c.cdf(&[0.5, 0.5]).unwrap() - 0.2908208406483879).abs() < 1e-12);
    }

    #[test]
    fn clayton_generator_formula() {
        let c = Copula::clayton(1.2, 2).unwrap();
        let want = (0.3f64.powf(-1.2) + 0.7f64.powf(-1.2) - 1.0).powf(-1.0 / 1.2);
        assert!((c.cdf(&[0.3, 0.7]).unwrap() - want).abs() < 1e-15);
        let i3 = Copula::independence(3).unwrap();
        assert!((i3.cdf(&[0.2, 0.5, 0.9]).unwrap() - 0.09).abs() < 1e-16);
    }

    #[test]
    fn grounded_with_uniform_margins() {
        for c in catalogue() {
            assert_eq!(c.cdf(&[0.0, 0.4]).unwrap(), 0.0, "{}", c.name());
            assert_eq!(c.cdf(&[1.0, 1.0]).unwrap(), 1.0);
            for &u in &[0.01, 0.37, 0.93] {
                assert!((c.cdf(&[u, 1.0]).unwrap() - u).abs() < 1e-9, "{}", c.name());
                assert!((c.cdf(&[1.0, u]).unwrap() - u).abs() < 1e-9, "{}", c.name());
            }
        }
        assert!(matches!(
            Copula::gumbel(1.2, 2).unwrap().cdf(&[0.5]),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn two_increasing_on_random_rectangles() {
        let mut rng = stream(7, 0);
        for c in catalogue() {
            for _ in 0..200 {
                let (a, b): (f64, f64) = (rng.random(), rng.random());
                let (h, k) = (0.05 * rng.random::<f64>(), 0.05 * rng.random::<f64>());
                let (a2, b2) = ((a + h).min(1.0), (b + k).min(1.0));
                let v = c.cdf(&[a2, b2]).unwrap() - c.cdf(&[a, b2]).unwrap() - c.cdf(&[a2, b]).unwrap()
                    + c.cdf(&[a, b]).unwrap();
                assert!(v >= -1e-9, "{} at ({a},{b}): {v}", c.name());
            }
        }
    }

    #[test]
    fn parameter_domains() {
        assert!(Copula::gumbel(0.9, 2).is_err());
        assert!(Copula::clayton(0.0, 2).is_err());
        assert!(Copula::frank(-1.0, 3).is_err());
        assert!(Copula::ali_mikhail_haq(1.0, 2).is_err());
        assert!(matches!(
            Copula::new(CopulaFamily::FrechetLower, 3),
            Err(Error::Unsupported(_))
        ));
        assert!(Copula::gaussian(vec![vec![1.0, 0.5], vec![0.4, 1.0]]).is_err());
        let p = CopulaPar {
            par: Some(1.2),
            dim: Some(2),
            ..Default::default()
        };
        assert_eq!(
            Copula::from_name("gumbel", &p).unwrap(),
            Copula::gumbel(1.2, 2).unwrap()
        );
        assert!(matches!(
            Copula::from_name("plackett", &p),
            Err(Error::UnknownName { .. })
        ));
        assert!(Copula::from_name("gaussian", &p).is_err());
    }

    #[test]
    fn gaussian_identity_is_independence() {
        let g3 = Copula::gaussian(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        let i3 = Copula::independence(3).unwrap();
        let g2 = Copula::gaussian(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        for &a in &[0.1, 0.5, 0.8] {
            for &b in &[0.2, 0.6, 0.95] {
                let u = [a, b, 0.7];
                assert!((g3.cdf(&u).unwrap() - i3.cdf(&u).unwrap()).abs() < 1e-9);
                assert!((g2.cdf(&[a, b]).unwrap() - a * b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn student_t_approaches_gaussian() {
        let corr = vec![vec![1.0, 0.5, 0.2], vec![0.5, 1.0, 0.3], vec![0.2, 0.3, 1.0]];
        let g = Copula::gaussian(corr.clone()).unwrap();
        let t = Copula::tstudent(corr, 1e6).unwrap();
        for &u in &[[0.2, 0.5, 0.7], [0.9, 0.9, 0.4], [0.05, 0.6, 0.99]] {
            let (a, b) = (g.cdf(&u).unwrap(), t.cdf(&u).unwrap());
            assert!((a - b).abs() < 1e-4, "{a} vs {b}");
        }
    }

    #[test]
    fn sampled_margins_are_uniform() {
        let corr3 = vec![vec![1.0, 0.5, 0.2], vec![0.5, 1.0, 0.3], vec![0.2, 0.3, 1.0]];
        let mut cops = catalogue();
        cops.extend([
            Copula::clayton(0.8, 3).unwrap(),
            Copula::gumbel(2.0, 4).unwrap(),
            Copula::frank(5.0, 3).unwrap(),
            Copula::joe(1.8, 3).unwrap(),
            Copula::ali_mikhail_haq(0.7, 3).unwrap(),
            Copula::tstudent(corr3, 3.0).unwrap(),
        ]);
        for c in cops {
            let x = c.rvs(100_000, 11);
            for j in 0..c.dim {
                let d = ks_uniform(x.iter().map(|r| r[j]).collect());
                assert!(d < 0.007, "{} margin {j}: KS {d}", c.name());
            }
        }
    }

    #[test]
    fn empirical_copula_converges_to_cdf() {
        for c in catalogue()
            .into_iter()
            .chain([Copula::joe(1.8, 3).unwrap(), Copula::ali_mikhail_haq(0.7, 3).unwrap()])
        {
            let x = c.rvs(100_000, 3);
            let n = x.len() as f64;
            for &a in &[0.2, 0.5, 0.8] {
                for &b in &[0.3, 0.7] {
                    let mut u = vec![a, b];
                    u.resize(c.dim, 0.6);
                    let emp = x.iter().filter(|r| r.iter().zip(&u).all(|(v, w)| v <= w)).count() as f64 / n;
                    assert!((emp - c.cdf(&u).unwrap()).abs() < 0.006, "{} at {u:?}", c.name());
                }
            }
        }
    }

    #[test]
    fn kendall_tau_of_samples() {
        let tau = kendall_tau(&Copula::clayton(2.0, 2).unwrap().rvs(100_000, 5));
        assert!((tau - 0.5).abs() < 0.01, "{tau}");
        let tau = kendall_tau(&Copula::independence(2).unwrap().rvs(100_000, 5));
        assert!(tau.abs() < 0.01);
        let tau = kendall_tau(&Copula::gumbel(2.0, 2).unwrap().rvs(100_000, 5));
        assert!((tau - 0.5).abs() < 0.01, "{tau}");
        let x = Copula::frechet_upper(2).unwrap().rvs(1000, 1);
        assert!(x.iter().all(|r| r[0] == r[1]));
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let c = Copula::frank(1.2, 2).unwrap();
        assert_eq!(c.rvs(70_000, 9), c.rvs(70_000, 9));
        assert_ne!(c.rvs(10, 9), c.rvs(10, 10));
    }

    #[test]
    fn gaussian_qmc_error_is_small() {
        let corr = vec![vec![1.0, 0.5, 0.3], vec![0.5, 1.0, -0.2], vec![0.3, -0.2, 1.0]];
        let c = Copula::gaussian(corr).unwrap();
        for i in 1..=10 {
            let a = i as f64 / 11.0;
            let e = c.cdf_with_error(&[a, 1.0 - a / 2.0, 0.5]).unwrap();
            assert!(e.error <= 1e-5, "{e:?}");
        }
    }
}
