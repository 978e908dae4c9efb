//! Numerical kernels shared across modules: normal helpers, adaptive
//! Gauss–Kronrod quadrature and Brent root finding.

use libm::erfc;
use statrs::function::beta::beta_reg;
use statrs::function::erf::erfc_inv;
use statrs::function::gamma::{checked_gamma_lr, checked_gamma_ur, ln_gamma};

use crate::error::{Error, Result};

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

pub fn norm_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn norm_ppf(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let x = -SQRT_2 * erfc_inv(2.0 * p);
    // one Halley step polishes the inverse to full precision
    let e = if x < 0.0 {
        norm_cdf(x) - p
    } else {
        (1.0 - p) - norm_sf(x)
    };
    let u = e / norm_pdf(x);
    if u.is_finite() {
        x - u / (1.0 + 0.5 * x * u)
    } else {
        x
    }
}

/// Student t cdf with `nu` degrees of freedom (nu may be non-integer).
pub fn t_cdf(x: f64, nu: f64) -> f64 {
    if x.is_infinite() {
        return if x > 0.0 { 1.0 } else { 0.0 };
    }
    if nu > 1e7 {
        return norm_cdf(x);
    }
    let tail = 0.5 * beta_reg(0.5 * nu, 0.5, nu / (nu + x * x));
    if x > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

pub fn t_ppf(p: f64, nu: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if nu > 1e7 {
        return norm_ppf(p);
    }
    let z = norm_ppf(p);
    let (mut lo, mut hi) = (z.min(0.0) - 1.0, z.max(0.0) + 1.0);
    while t_cdf(lo, nu) > p {
        lo *= 2.0;
    }
    while t_cdf(hi, nu) < p {
        hi *= 2.0;
    }
    brent(|x| t_cdf(x, nu) - p, lo, hi, 1e-14, 200).unwrap_or(z)
}

/// Brent's method on a sign-changing bracket [a, b].
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64, max_iter: usize) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Numerical(format!(
            "root not bracketed in [{a}, {b}] (f = {fa}, {fb})"
        )));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol * m.signum() };
        fb = f(b);
    }
    Err(Error::Numerical("Brent iteration did not converge".into()))
}

/// Smallest x in [lo, ∞) with g(x) ≥ target for a nondecreasing g, to `xtol`.
/// The upper end of the bracket is found by doubling from `hint`.
pub fn invert_increasing<F: Fn(f64) -> f64>(g: F, target: f64, lo: f64, hint: f64, xtol: f64) -> Result<f64> {
    if g(lo) >= target {
        return Ok(lo);
    }
    let mut hi = if hint > lo { hint } else { lo + 1.0 };
    let mut step = (hi - lo).max(1.0);
    let mut n = 0;
    while g(hi) < target {
        step *= 2.0;
        hi = lo + step;
        n += 1;
        if n > 2000 || !hi.is_finite() {
            return Err(Error::Numerical(format!(
                "could not bracket the inverse at level {target}"
            )));
        }
    }
    brent(|x| g(x) - target, lo, hi, xtol, 500)
}

// 21-point Kronrod nodes and weights with the embedded 10-point Gauss rule.
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208964163580,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hl = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[10];
    let mut rg = 0.0;
    for j in 0..10 {
        let x = hl * XGK[j];
        // nodes that round onto an endpoint are dropped (integrable endpoint singularities)
        let (l, r) = (c - x, c + x);
        let s = if l > a { f(l) } else { 0.0 } + if r < b { f(r) } else { 0.0 };
        rk += WGK[j] * s;
        if j % 2 == 1 {
            rg += WG[j / 2] * s;
        }
    }
    let res = rk * hl;
    let err = ((rk - rg) * hl).abs();
    (res, err)
}

/// Adaptive Gauss–Kronrod quadrature of `f` over the finite interval [a, b].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain("integrate requires finite limits".into()));
    }
    let mut segs: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (r, e) = gk21(&f, a, b);
    segs.push((a, b, r, e));
    let (mut total, mut err) = (r, e);
    for _ in 0..2000 {
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        // split the segment with the largest error estimate
        let (idx, _) = segs
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, s)| if s.3 > acc.1 { (i, s.3) } else { acc });
        let (sa, sb, sr, se) = segs.swap_remove(idx);
        if sb - sa <= 64.0 * f64::EPSILON * sa.abs().max(sb.abs()) {
            // cannot be refined further in floating point
            err -= se;
            segs.push((sa, sb, sr, 0.0));
            continue;
        }
        let mid = 0.5 * (sa + sb);
        let (r1, e1) = gk21(&f, sa, mid);
        let (r2, e2) = gk21(&f, mid, sb);
        total += r1 + r2 - sr;
        err += e1 + e2 - se;
        segs.push((sa, mid, r1, e1));
        segs.push((mid, sb, r2, e2));
    }
    if !total.is_finite() {
        return Err(Error::Numerical("quadrature produced a non-finite value".into()));
    }
    // accept the best estimate: the error bound is usually very pessimistic
    Ok(total)
}

/// Quadrature over [a, ∞) through the map x = a + t / (1 - t).
pub fn integrate_to_inf<F: Fn(f64) -> f64>(f: F, a: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    integrate(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let u = 1.0 - t;
            let v = f(a + t / u) / (u * u);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
    )
}

/// Regularised lower incomplete gamma P(a, x), 0 for x ≤ 0.
pub fn gamma_lr(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x.is_infinite() {
        1.0
    } else {
        checked_gamma_lr(a, x).unwrap_or(f64::NAN)
    }
}

/// Regularised upper incomplete gamma Q(a, x), 1 for x ≤ 0.
pub fn gamma_ur(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x.is_infinite() {
        0.0
    } else {
        checked_gamma_ur(a, x).unwrap_or(f64::NAN)
    }
}

/// Quantile of the standard gamma(a) law: Wilson–Hilferty start, then safeguarded Newton.
pub fn gamma_ppf(a: f64, p: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let z = norm_ppf(p);
    let wh = a * (1.0 - 1.0 / (9.0 * a) + z / (3.0 * a.sqrt())).powi(3);
    let mut x = if wh > 0.0 {
        wh
    } else {
        (p * a * ln_gamma(a).exp()).powf(1.0 / a).max(f64::MIN_POSITIVE)
    };
    let (mut lo, mut hi) = (0.0, f64::INFINITY);
    let lg = ln_gamma(a);
    for _ in 0..100 {
        let f = gamma_lr(a, x) - p;
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let dens = ((a - 1.0) * x.ln() - x - lg).exp();
        let mut next = x - f / dens;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = if hi.is_finite() {
                0.5 * (lo + hi)
            } else {
                2.0 * x.max(1.0)
            };
        }
        if (next - x).abs() <= 1e-15 * x {
            return next;
        }
        x = next;
    }
    x
}
