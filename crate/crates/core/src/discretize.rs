//! Arithmetisation of continuous severities on the lattice {0, h, ..., h(m-1)}.

use serde::Serialize;

use crate::distributions::Continuous;
use crate::error::{Error, Result, Warning};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscretizationMethod {
    MassDispersal,
    UpperDiscretisation,
    LowerDiscretisation,
    LocalMoments,
}

impl DiscretizationMethod {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "massdispersal" => Ok(Self::MassDispersal),
            "upper_discretisation" | "upper_discretization" => Ok(Self::UpperDiscretisation),
            "lower_discretisation" | "lower_discretization" => Ok(Self::LowerDiscretisation),
            "localmoments" => Ok(Self::LocalMoments),
            _ => Err(Error::UnknownName {
                kind: "discretisation method",
                name: name.to_string(),
            }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::MassDispersal => "massdispersal",
            Self::UpperDiscretisation => "upper_discretisation",
            Self::LowerDiscretisation => "lower_discretisation",
            Self::LocalMoments => "localmoments",
        }
    }
}

/// Probabilities `fj` on the nodes `h * j`, j = 0..m-1.
#[derive(Debug, Clone, Serialize)]
pub struct ArithmeticSeverity {
    pub h: f64,
    pub fj: Vec<f64>,
    pub method: DiscretizationMethod,
    /// Mass left beyond the last node (only the lower method leaves any).
    pub tail_mass: f64,
    pub warnings: Vec<Warning>,
}

impl ArithmeticSeverity {
    /// Wraps an explicit lattice; probabilities must be non-negative and sum to one.
    pub fn from_probs(h: f64, fj: Vec<f64>) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::param("h", format!("must be > 0, got {h}")));
        }
        if fj.is_empty() || fj.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::param("fj", "probabilities must be non-negative"));
        }
        let total: f64 = fj.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::param("fj", format!("probabilities sum to {total}, not 1")));
        }
        Ok(ArithmeticSeverity {
            h,
            fj,
            method: DiscretizationMethod::MassDispersal,
            tail_mass: 0.0,
            warnings: Vec::new(),
        })
    }

    pub fn m(&self) -> usize {
        self.fj.len()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.fj.len()).map(|j| j as f64 * self.h).collect()
    }

    pub fn moment(&self, k: u32) -> f64 {
        self.fj
            .iter()
            .enumerate()
            .map(|(j, p)| (j as f64 * self.h).powi(k as i32) * p)
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    /// Cumulative probabilities at the nodes.
    pub fn cdf(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.fj
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect()
    }
}

/// Per-loss layer view of a severity: Y = min((Z - d) | Z > d, c).
struct Excess<'a> {
    sev: &'a Continuous,
    d: f64,
    c: f64,
    sf_d: f64,
    cdf_d: f64,
}

impl<'a> Excess<'a> {
    fn new(sev: &'a Continuous, d: f64, c: f64) -> Result<Self> {
        let sf_d = sev.sf(d);
        if !(sf_d > 0.0) {
            return Err(Error::Domain(format!("no severity mass above the deductible {d}")));
        }
        Ok(Excess {
            sev,
            d,
            c,
            sf_d,
            cdf_d: sev.cdf(d),
        })
    }

    fn cdf(&self, y: f64) -> f64 {
        if y < 0.0 {
            0.0
        } else if y >= self.c {
            1.0
        } else {
            ((self.sev.cdf(self.d + y) - self.cdf_d) / self.sf_d).clamp(0.0, 1.0)
        }
    }

    fn sf(&self, y: f64) -> f64 {
        if y < 0.0 {
            1.0
        } else if y >= self.c {
            0.0
        } else {
            (self.sev.sf(self.d + y) / self.sf_d).clamp(0.0, 1.0)
        }
    }

    /// P(a < Y ≤ b), using whichever tail is numerically better conditioned.
    fn mass(&self, a: f64, b: f64) -> f64 {
        let fa = self.cdf(a);
        if fa < 0.5 {
            (self.cdf(b) - fa).max(0.0)
        } else {
            (self.sf(a) - self.sf(b)).max(0.0)
        }
    }

    /// E[Y ∧ x].
    fn lev(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        Ok(self.sev.censored_moment(1, self.d, x.min(self.c))? / self.sf_d)
    }
}

/// Lattice size and step: with a finite cover the lattice spans [0, cover] exactly and
/// the requested step is an upper bound.
pub fn lattice_for_cover(m: usize, h: f64, cover: f64) -> (usize, f64) {
    if cover.is_finite() {
        let needed = (cover / h - 1e-9).ceil() as usize + 1;
        let m = m.max(needed).max(2);
        (m, cover / (m - 1) as f64)
    } else {
        (m, h)
    }
}

/// Discretises `sev` (conditional on exceeding `deductible`, censored at `cover`).
pub fn discretize(
    sev: &Continuous,
    method: DiscretizationMethod,
    m: usize,
    h: f64,
    deductible: f64,
    cover: f64,
) -> Result<ArithmeticSeverity> {
    if m < 2 {
        return Err(Error::param("n_discr_nodes", format!("must be ≥ 2, got {m}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::param("discr_step", format!("must be > 0, got {h}")));
    }
    if !(deductible >= 0.0 && deductible.is_finite()) {
        return Err(Error::param("deductible", format!("must be ≥ 0, got {deductible}")));
    }
    if !(cover > 0.0) {
        return Err(Error::param("cover", format!("must be > 0, got {cover}")));
    }
    let (m, h) = lattice_for_cover(m, h, cover);
    let y = Excess::new(sev, deductible, cover)?;
    let mut warnings = Vec::new();
    let last = m - 1;
    let x = |j: usize| j as f64 * h;
    let mut fj = vec![0.0; m];
    let mut tail_mass = 0.0;
    match method {
        DiscretizationMethod::MassDispersal => {
            fj[0] = y.cdf(0.5 * h);
            for (j, f) in fj.iter_mut().enumerate().take(last).skip(1) {
                *f = y.mass(x(j) - 0.5 * h, x(j) + 0.5 * h);
            }
            fj[last] = y.sf(x(last) - 0.5 * h);
        }
        DiscretizationMethod::UpperDiscretisation => {
            for (j, f) in fj.iter_mut().enumerate().take(last) {
                *f = if j == 0 { y.cdf(h) } else { y.mass(x(j), x(j + 1)) };
            }
            fj[last] = y.sf(x(last));
        }
        DiscretizationMethod::LowerDiscretisation => {
            fj[0] = y.cdf(0.0);
            for (j, f) in fj.iter_mut().enumerate().skip(1) {
                *f = y.mass(x(j) - h, x(j));
            }
            tail_mass = y.sf(x(last));
        }
        DiscretizationMethod::LocalMoments => {
            let lev: Vec<f64> = (0..=m).map(|j| y.lev(x(j))).collect::<Result<_>>()?;
            fj[0] = 1.0 - lev[1] / h;
            for j in 1..last {
                fj[j] = (2.0 * lev[j] - lev[j - 1] - lev[j + 1]) / h;
            }
            // the last node closes the lattice so the mean equals E[Y ∧ h(m-1)]
            fj[last] = (lev[last] - lev[last - 1]) / h;
            let negative: f64 = fj.iter().filter(|p| **p < 0.0).map(|p| -p).sum();
            if negative > 0.0 {
                for p in fj.iter_mut() {
                    *p = p.max(0.0);
                }
                let total: f64 = fj.iter().sum();
                for p in fj.iter_mut() {
                    *p /= total;
                }
                if negative > 1e-15 {
                    warnings.push(Warning::new(
                        "discretize",
                        "negative_mass",
                        format!(
                            "local moment matching produced {negative:.3e} negative mass; clamped and renormalised"
                        ),
                    ));
                }
            }
        }
    }
    if cover.is_infinite() {
        let beyond = y.sf(x(last));
        if beyond > 1e-6 {
            warnings.push(Warning::new(
                "discretize",
                "coverage",
                format!(
                    "lattice [0, {}] leaves {beyond:.3e} of the severity mass beyond the last node; increase the step or node count",
                    x(last)
                ),
            ));
        }
    }
    Ok(ArithmeticSeverity {
        h,
        fj,
        method,
        tail_mass,
        warnings,
    })
}

/// Lattice cdf of the upper and lower methods against the exact cdf at each node.
#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub nodes: Vec<f64>,
    pub lower: Vec<f64>,
    pub exact: Vec<f64>,
    pub upper: Vec<f64>,
    /// Largest violation of lower ≤ exact ≤ upper (0 when the ordering holds).
    pub max_violation: f64,
}

impl BoundsReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.max_violation <= tol
    }
}

pub fn bounds_check(sev: &Continuous, m: usize, h: f64) -> Result<BoundsReport> {
    let upper = discretize(sev, DiscretizationMethod::UpperDiscretisation, m, h, 0.0, f64::INFINITY)?;
    let lower = discretize(sev, DiscretizationMethod::LowerDiscretisation, m, h, 0.0, f64::INFINITY)?;
    let nodes = upper.nodes();
    let exact: Vec<f64> = nodes.iter().map(|x| sev.cdf(*x)).collect();
    let (fu, fl) = (upper.cdf(), lower.cdf());
    let max_violation = (0..m)
        .map(|j| (fl[j] - exact[j]).max(exact[j] - fu[j]).max(0.0))
        .fold(0.0, f64::max);
    Ok(BoundsReport {
        nodes,
        lower: fl,
        exact,
        upper: fu,
        max_violation,
    })
}

/// Sup-norm change of the lattice cdf when the step is halved over the same span.
pub fn convergence_diagnostic(
    sev: &Continuous,
    method: DiscretizationMethod,
    m: usize,
    h: f64,
    deductible: f64,
    cover: f64,
) -> Result<f64> {
    let coarse = discretize(sev, method, m, h, deductible, cover)?;
    let fine = discretize(sev, method, 2 * coarse.m() - 1, coarse.h / 2.0, deductible, cover)?;
    let (fc, ff) = (coarse.cdf(), fine.cdf());
    Ok(fc
        .iter()
        .enumerate()
        .map(|(j, v)| (v - ff[2 * j]).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::params;
    use DiscretizationMethod::*;

    fn gamma5() -> Continuous {
        Continuous::from_name("gamma", &params(&[("a", 5.0)])).unwrap()
    }

    #[test]
    fn mass_dispersal_preserves_mass_and_mean() {
        let s = discretize(&gamma5(), MassDispersal, 50_000, 0.01, 0.0, f64::INFINITY).unwrap();
        let total: f64 = s.fj.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((s.mean() - 5.0).abs() < 1e-10, "{}", s.mean());
        assert!(s.warnings.is_empty());
    }

    #[test]
    fn local_moments_match_limited_mean() {
        let g = gamma5();
        let s = discretize(&g, LocalMoments, 20, 1.0, 0.0, f64::INFINITY).unwrap();
        let lev = g.lev(19.0).unwrap();
        assert!((s.mean() - lev).abs() < 1e-8 * lev);
        assert!((s.fj.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(s.fj.iter().all(|p| *p >= 0.0));
    }

    #[test]
    fn lower_method_starts_at_cdf_zero_and_keeps_tail() {
        let g = gamma5();
        let s = discretize(&g, LowerDiscretisation, 20, 1.0, 0.0, f64::INFINITY).unwrap();
        assert_eq!(s.fj[0], g.cdf(0.0));
        let total: f64 = s.fj.iter().sum();
        assert!((total + s.tail_mass - 1.0).abs() < 1e-12);
        assert!(s.tail_mass > 0.0);
    }

    #[test]
    fn bounds_hold_for_gamma_and_exponential() {
        let r = bounds_check(&gamma5(), 20, 1.0).unwrap();
        assert!(r.holds(1e-12));
        assert_eq!(r.lower[0], r.exact[0]);
        let e = Continuous::from_name("exponential", &params(&[("theta", 1.0)])).unwrap();
        assert!(bounds_check(&e, 40, 0.5).unwrap().holds(1e-12));
    }

    #[test]
    fn finite_cover_spans_the_layer() {
        let s = discretize(&gamma5(), MassDispersal, 100, 0.5, 5.0, 20.0).unwrap();
        assert!(((s.m() - 1) as f64 * s.h - 20.0).abs() < 1e-12);
        assert!(s.h <= 0.5);
        let g = gamma5();
        let exact = g.censored_moment(1, 5.0, 20.0).unwrap() / g.sf(5.0);
        assert!((s.mean() - exact).abs() < 1e-3);
        let lm = discretize(&g, LocalMoments, 100, 0.5, 5.0, 20.0).unwrap();
        assert!((lm.mean() - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn deductible_gives_conditional_excess() {
        let e = Continuous::from_name("exponential", &params(&[("theta", 1.0)])).unwrap();
        // memoryless: excess over any deductible is the same exponential
        let a = discretize(&e, MassDispersal, 200, 0.1, 0.0, f64::INFINITY).unwrap();
        let b = discretize(&e, MassDispersal, 200, 0.1, 3.0, f64::INFINITY).unwrap();
        for (x, y) in a.fj.iter().zip(&b.fj) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn short_lattice_warns() {
        let s = discretize(&gamma5(), MassDispersal, 10, 0.5, 0.0, f64::INFINITY).unwrap();
        assert_eq!(s.warnings.len(), 1);
        assert_eq!(s.warnings[0].module, "discretize");
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = gamma5();
        assert!(discretize(&g, MassDispersal, 1, 1.0, 0.0, f64::INFINITY).is_err());
        assert!(discretize(&g, MassDispersal, 10, 0.0, 0.0, f64::INFINITY).is_err());
        assert!(discretize(&g, MassDispersal, 10, 1.0, -1.0, f64::INFINITY).is_err());
        assert!(DiscretizationMethod::from_name("midpoint").is_err());
    }

    #[test]
    fn methods_converge_as_step_shrinks() {
        let g = gamma5();
        let span = 40.0;
        let x = 6.0;
        for method in [MassDispersal, UpperDiscretisation, LowerDiscretisation, LocalMoments] {
            let mut errs = Vec::new();
            for h in [0.4, 0.2, 0.1] {
                let m = (span / h) as usize + 1;
                let s = discretize(&g, method, m, h, 0.0, f64::INFINITY).unwrap();
                let cdf = s.cdf();
                // cdf of the lattice just below x + h/2 versus the true cdf at x
                let j = ((x + 0.5 * h) / h).floor() as usize;
                let mid_err = (cdf[j - 1] + cdf[j]) / 2.0 - g.cdf(x);
                errs.push(mid_err.abs());
            }
            assert!(errs[0] > errs[1] && errs[1] > errs[2], "{method:?} {errs:?}");
            let d = convergence_diagnostic(&g, method, 101, 0.4, 0.0, f64::INFINITY).unwrap();
            assert!(d < 0.2);
        }
    }
}
