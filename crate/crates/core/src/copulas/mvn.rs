//! Multivariate normal and Student t orthant probabilities P(X ≤ b).
//!
//! Bivariate normal probabilities use Genz's Gauss–Legendre scheme (double precision).
//! Higher dimensions use the separation-of-variables transform integrated by a randomized
//! Richtmyer (Kronecker) lattice with tent periodisation; the error estimate is three
//! standard errors across independent random shifts.

use rand::Rng;

use crate::error::{Error, Result};
use crate::numeric::{gamma_ppf, integrate_to_inf, norm_cdf, norm_ppf, t_cdf};
use crate::rng::stream;

/// Quasi-Monte Carlo budget: points per shift grow in batches until the error estimate
/// falls below `abs_tol` or `max_points` is reached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QmcConfig {
    pub shifts: usize,
    pub batch: usize,
    pub max_points: usize,
    pub abs_tol: f64,
    pub seed: u64,
}

impl Default for QmcConfig {
    fn default() -> Self {
        QmcConfig {
            shifts: 10,
            batch: 1_000,
            max_points: 10_000,
            abs_tol: 1e-6,
            seed: 0x5eed,
        }
    }
}

/// Probability and its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

const GL_W: [[f64; 10]; 3] = [
    [
        0.1713244923791705,
        0.3607615730481384,
        0.4679139345726904,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.04717533638651177,
        0.1069393259953183,
        0.1600783285433464,
        0.2031674267230659,
        0.2334925365383547,
        0.2491470458134029,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.01761400713915212,
        0.04060142980038694,
        0.06267204833410906,
        0.08327674157670475,
        0.1019301198172404,
        0.1181945319615184,
        0.1316886384491766,
        0.1420961093183821,
        0.1491729864726037,
        0.1527533871307259,
    ],
];
const GL_X: [[f64; 10]; 3] = [
    [
        -0.9324695142031522,
        -0.6612093864662647,
        -0.2386191860831970,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        -0.9815606342467191,
        -0.9041172563704750,
        -0.7699026741943050,
        -0.5873179542866171,
        -0.3678314989981802,
        -0.1252334085114692,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        -0.9931285991850949,
        -0.9639719272779138,
        -0.9122344282513259,
        -0.8391169718222188,
        -0.7463319064601508,
        -0.6360536807265150,
        -0.5108670019508271,
        -0.3737060887154196,
        -0.2277858511416451,
        -0.07652652113349733,
    ],
];

/// Upper orthant P(X > h, Y > k) of a standard bivariate normal with correlation r.
fn bvn_upper(h: f64, k: f64, r: f64) -> f64 {
    use std::f64::consts::TAU;
    let (ng, lg) = if r.abs() < 0.3 {
        (0, 3)
    } else if r.abs() < 0.75 {
        (1, 6)
    } else {
        (2, 10)
    };
    let (w, x) = (&GL_W[ng], &GL_X[ng]);
    let mut k = k;
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        let hs = (h * h + k * k) / 2.0;
        let asr = r.asin();
        for i in 0..lg {
            for sgn in [1.0, -1.0] {
                let sn = (asr * (sgn * x[i] + 1.0) / 2.0).sin();
                bvn += w[i] * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
            }
        }
        return bvn * asr / (2.0 * TAU) + norm_cdf(-h) * norm_cdf(-k);
    }
    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    if r.abs() < 1.0 {
        let as_ = (1.0 - r) * (1.0 + r);
        let mut a = as_.sqrt();
        let bs = (h - k).powi(2);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        bvn = a
            * (-(bs / as_ + hk) / 2.0).exp()
            * (1.0 - c * (bs - as_) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as_ * as_ / 5.0);
        if hk > -160.0 {
            let b = bs.sqrt();
            bvn -= (-hk / 2.0).exp() * TAU.sqrt() * norm_cdf(-b / a) * b * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
        }
        a /= 2.0;
        for i in 0..lg {
            let xs = (a * (x[i] + 1.0)).powi(2);
            let rs = (1.0 - xs).sqrt();
            bvn += a
                * w[i]
                * ((-bs / (2.0 * xs) - hk / (1.0 + rs)).exp() / rs
                    - (-(bs / xs + hk) / 2.0).exp() * (1.0 + c * xs * (1.0 + d * xs)));
            let xs = as_ * (1.0 - x[i]).powi(2) / 4.0;
            let rs = (1.0 - xs).sqrt();
            bvn += a
                * w[i]
                * (-(bs / xs + hk) / 2.0).exp()
                * ((-hk * xs / (2.0 * (1.0 + rs).powi(2))).exp() / rs - (1.0 + c * xs * (1.0 + d * xs)));
        }
        bvn = -bvn / TAU;
    }
    if r > 0.0 {
        bvn + norm_cdf(-h.max(k))
    } else {
        -bvn + (norm_cdf(-h) - norm_cdf(-k)).max(0.0)
    }
}

/// P(X ≤ x, Y ≤ y) for a standard bivariate normal with correlation r.
pub fn bvn_cdf(x: f64, y: f64, r: f64) -> f64 {
    if x == f64::NEG_INFINITY || y == f64::NEG_INFINITY {
        return 0.0;
    }
    if x == f64::INFINITY {
        return norm_cdf(y);
    }
    if y == f64::INFINITY {
        return norm_cdf(x);
    }
    bvn_upper(-x, -y, r).clamp(0.0, 1.0)
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky(a: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        if a[i].len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: a[i].len(),
            });
        }
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let v = a[i][i] - s;
                if !(v > 1e-14) {
                    return Err(Error::param("corr", "matrix is not positive definite"));
                }
                l[i][j] = v.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Ok(l)
}

const PRIMES: [f64; MAX_DIM] = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0, 23.0, 29.0, 31.0, 37.0];

/// Random shifts; each shift draws `MAX_DIM` coordinates so the leading coordinates do
/// not depend on the integration dimension.
fn shifts(cfg: &QmcConfig) -> Vec<[f64; MAX_DIM]> {
    let mut rng = stream(cfg.seed, 0);
    (0..cfg.shifts.max(2))
        .map(|_| {
            let mut s = [0.0; MAX_DIM];
            s.iter_mut().for_each(|x| *x = rng.random());
            s
        })
        .collect()
}

fn lattice_point(k: usize, shift: &[f64; MAX_DIM], w: &mut [f64]) {
    for (i, wi) in w.iter_mut().enumerate() {
        let x = (k as f64 * PRIMES[i].sqrt().fract() + shift[i]).fract();
        *wi = (2.0 * x - 1.0).abs();
    }
}

/// Integrates `f(shift, k, w)` over the unit cube of dimension `dim` with a randomized lattice.
fn lattice_integrate<F: Fn(usize, usize, &[f64]) -> f64>(f: F, dim: usize, cfg: &QmcConfig) -> Estimate {
    let shifts = shifts(cfg);
    let mut sums = vec![0.0; shifts.len()];
    let mut n = 0usize;
    let mut w = vec![0.0; dim];
    loop {
        let end = (n + cfg.batch.max(1)).min(cfg.max_points.max(1));
        for (s, shift) in shifts.iter().enumerate() {
            let mut acc = 0.0;
            for k in (n + 1)..=end {
                lattice_point(k, shift, &mut w);
                acc += f(s, k, &w);
            }
            sums[s] += acc;
        }
        n = end;
        let means: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();
        let m = means.len() as f64;
        let value = means.iter().sum::<f64>() / m;
        let var = means.iter().map(|x| (x - value).powi(2)).sum::<f64>() / (m * (m - 1.0));
        let error = 3.0 * var.sqrt();
        if error <= cfg.abs_tol || n >= cfg.max_points {
            return Estimate { value, error };
        }
    }
}

/// Radial scales sqrt(W/df), W ~ χ²(df), at the first lattice coordinate of every point
/// and shift; computed once per (df, budget) and reused by every t probability.
pub fn radial_table(df: f64, cfg: &QmcConfig) -> Vec<Vec<f64>> {
    use rayon::prelude::*;
    shifts(cfg)
        .par_iter()
        .map(|shift| {
            let mut w = [0.0];
            (1..=cfg.max_points.max(1))
                .map(|k| {
                    lattice_point(k, shift, &mut w);
                    (2.0 * gamma_ppf(0.5 * df, w[0].clamp(1e-300, 1.0 - 1e-16)) / df).sqrt()
                })
                .collect()
        })
        .collect()
}

/// Separation-of-variables integrand for P(LZ ≤ b) given scaled bounds; `w` has d−1 entries.
fn sov_normal(l: &[Vec<f64>], b: &[f64], w: &[f64], y: &mut [f64]) -> f64 {
    let d = b.len();
    let mut e = norm_cdf(b[0] / l[0][0]);
    let mut f = e;
    for i in 1..d {
        y[i - 1] = norm_ppf((w[i - 1] * e).clamp(1e-300, 1.0 - 1e-16));
        let s: f64 = (0..i).map(|j| l[i][j] * y[j]).sum();
        e = norm_cdf((b[i] - s) / l[i][i]);
        f *= e;
        if f == 0.0 {
            break;
        }
    }
    f
}

/// Keeps finite coordinates and orders them by increasing standardized bound,
/// which lowers the variance of the sequential integrand.
fn reduce(corr: &[Vec<f64>], b: &[f64]) -> Option<(Vec<Vec<f64>>, Vec<f64>)> {
    if b.contains(&f64::NEG_INFINITY) {
        return None;
    }
    let mut idx: Vec<usize> = (0..b.len()).filter(|&i| b[i].is_finite()).collect();
    idx.sort_by(|&i, &j| b[i].total_cmp(&b[j]));
    let sub = idx.iter().map(|&i| idx.iter().map(|&j| corr[i][j]).collect()).collect();
    Some((sub, idx.iter().map(|&i| b[i]).collect()))
}

/// P(X ≤ b) for X ~ N(0, corr) with unit-diagonal `corr`.
pub fn mvn_cdf(corr: &[Vec<f64>], b: &[f64], cfg: &QmcConfig) -> Result<Estimate> {
    let Some((sub, bs)) = reduce(corr, b) else {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    };
    match bs.len() {
        0 => return Ok(Estimate { value: 1.0, error: 0.0 }),
        1 => {
            return Ok(Estimate {
                value: norm_cdf(bs[0]),
                error: 0.0,
            })
        }
        2 => {
            return Ok(Estimate {
                value: bvn_cdf(bs[0], bs[1], sub[0][1]),
                error: 0.0,
            })
        }
        _ => {}
    }
    let l = cholesky(&sub)?;
    let d = bs.len();
    let est = lattice_integrate(
        |_, _, w| {
            let mut y = [0.0; 16];
            sov_normal(&l, &bs, w, &mut y[..d])
        },
        d - 1,
        cfg,
    );
    Ok(Estimate {
        value: est.value.clamp(0.0, 1.0),
        error: est.error,
    })
}

/// P(T₁ ≤ a, T₂ ≤ b) for a bivariate t with correlation r, by integrating the
/// conditional law T₂ | T₁ = x, a scaled t with df + 1 degrees of freedom.
pub fn bvt_cdf(a: f64, b: f64, r: f64, df: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    if a == f64::NEG_INFINITY || b == f64::NEG_INFINITY {
        return 0.0;
    }
    if a == f64::INFINITY {
        return t_cdf(b, df);
    }
    if b == f64::INFINITY {
        return t_cdf(a, df);
    }
    if df > 1e7 {
        return bvn_cdf(a, b, r);
    }
    let c = ln_gamma(0.5 * (df + 1.0)) - ln_gamma(0.5 * df) - 0.5 * (df * std::f64::consts::PI).ln();
    let q = (1.0 - r * r).sqrt();
    let f = |y: f64| {
        let x = -y;
        let dens = (c - 0.5 * (df + 1.0) * (x * x / df).ln_1p()).exp();
        let z = (b - r * x) / q * ((df + 1.0) / (df + x * x)).sqrt();
        dens * t_cdf(z, df + 1.0)
    };
    integrate_to_inf(f, -a, 1e-15, 1e-13)
        .unwrap_or(f64::NAN)
        .clamp(0.0, 1.0)
}

/// P(T ≤ t) for a multivariate Student t with dispersion `corr` and `df` degrees of freedom.
/// `radial` is the table from [`radial_table`] for the same `df` and budget.
pub fn mvt_cdf(corr: &[Vec<f64>], t: &[f64], df: f64, cfg: &QmcConfig, radial: &[Vec<f64>]) -> Result<Estimate> {
    let Some((sub, ts)) = reduce(corr, t) else {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    };
    match ts.len() {
        0 => return Ok(Estimate { value: 1.0, error: 0.0 }),
        1 => {
            return Ok(Estimate {
                value: t_cdf(ts[0], df),
                error: 0.0,
            })
        }
        2 => {
            return Ok(Estimate {
                value: bvt_cdf(ts[0], ts[1], sub[0][1], df),
                error: 0.0,
            })
        }
        _ => {}
    }
    let l = cholesky(&sub)?;
    let d = ts.len();
    let est = lattice_integrate(
        |s, k, w| {
            let scale = radial[s][k - 1];
            let mut b = [0.0; 16];
            for i in 0..d {
                b[i] = ts[i] * scale;
            }
            let mut y = [0.0; 16];
            sov_normal(&l, &b[..d], &w[1..], &mut y[..d])
        },
        d,
        cfg,
    );
    Ok(Estimate {
        value: est.value.clamp(0.0, 1.0),
        error: est.error,
    })
}

/// Largest dimension supported by the lattice generator.
pub const MAX_DIM: usize = 12;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::integrate;

    /// Plackett's identity: ∂Φ₂/∂r is the bivariate density, so Φ₂(x,y,r) = Φ(x)Φ(y) + ∫₀ʳ φ₂.
    fn bvn_oracle(x: f64, y: f64, r: f64) -> f64 {
        let dens = |s: f64| {
            let q = 1.0 - s * s;
            (-(x * x - 2.0 * s * x * y + y * y) / (2.0 * q)).exp() / (std::f64::consts::TAU * q.sqrt())
        };
        let part = if r >= 0.0 {
            integrate(dens, 0.0, r, 1e-15, 1e-13)
        } else {
            integrate(dens, r, 0.0, 1e-15, 1e-13).map(|v| -v)
        };
        norm_cdf(x) * norm_cdf(y) + part.unwrap()
    }

    #[test]
    fn bivariate_normal_matches_plackett_integral() {
        for &r in &[-0.95, -0.7, -0.2, 0.0, 0.1, 0.5, 0.8, 0.93, 0.99] {
            for &(x, y) in &[(0.0, 0.0), (-1.3, 0.4), (2.1, -0.7), (-3.0, -2.5), (1.5, 1.5)] {
                let got = bvn_cdf(x, y, r);
                let want = bvn_oracle(x, y, r);
                assert!((got - want).abs() < 1e-13, "r={r} x={x} y={y}: {got} vs {want}");
            }
        }
        assert!((bvn_cdf(0.0, 0.0, 0.5) - (0.25 + 0.5f64.asin() / std::f64::consts::TAU)).abs() < 1e-15);
    }

    #[test]
    fn trivariate_normal_against_closed_form() {
        // equicorrelated orthant: P(Z ≤ 0) = 1/8 + 3·asin(ρ)/(4π)
        let rho = 0.4;
        let c = vec![vec![1.0, rho, rho], vec![rho, 1.0, rho], vec![rho, rho, 1.0]];
        let e = mvn_cdf(&c, &[0.0, 0.0, 0.0], &QmcConfig::default()).unwrap();
        let want = 0.125 + 3.0 * rho.asin() / (4.0 * std::f64::consts::PI);
        assert!(
            (e.value - want).abs() < 1e-5 && (e.value - want).abs() < 2.0 * e.error,
            "{e:?} vs {want}"
        );
        assert!(e.error < 1e-5);
    }

    #[test]
    fn student_t_reduces_correctly() {
        let c = vec![vec![1.0, 0.3], vec![0.3, 1.0]];
        // bivariate t orthant probability: 1/4 + asin(ρ)/(2π) for every df
        let v = bvt_cdf(0.0, 0.0, 0.3, 3.5);
        assert!(
            (v - (0.25 + 0.3f64.asin() / std::f64::consts::TAU)).abs() < 1e-12,
            "{v}"
        );
        let cfg = QmcConfig::default();
        let table = radial_table(4.0, &cfg);
        let e = mvt_cdf(&c, &[0.7, f64::INFINITY], 4.0, &cfg, &table).unwrap();
        assert!((e.value - t_cdf(0.7, 4.0)).abs() < 1e-15);
        // trivariate equicorrelated orthant is 1/8 + 3·asin(ρ)/(4π) for every df
        let rho = 0.4;
        let c3 = vec![vec![1.0, rho, rho], vec![rho, 1.0, rho], vec![rho, rho, 1.0]];
        let e = mvt_cdf(&c3, &[0.0; 3], 4.0, &cfg, &table).unwrap();
        let want = 0.125 + 3.0 * rho.asin() / (4.0 * std::f64::consts::PI);
        assert!((e.value - want).abs() < 1e-5 && e.error < 1e-5, "{e:?} vs {want}");
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        assert!(cholesky(&[vec![1.0, 1.2], vec![1.2, 1.0]]).is_err());
    }
}
