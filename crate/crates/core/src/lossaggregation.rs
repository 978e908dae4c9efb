//! Distribution of S = X₁ + … + X_d for dependent non-negative margins joined by a
//! copula: the AEP geometric algorithm and Monte Carlo simulation.

use rayon::prelude::*;

use crate::copulas::Copula;
use crate::distributions::{Continuous, ParamMap};
use crate::error::{Error, Result};
use crate::numeric::invert_increasing;

/// Ordered marginal distributions.
#[derive(Debug, Clone)]
pub struct Margins {
    pub dists: Vec<Continuous>,
}

impl Margins {
    pub fn new(dists: Vec<Continuous>) -> Result<Self> {
        if dists.len() < 2 {
            return Err(Error::param(
                "margins",
                format!("need at least two margins, got {}", dists.len()),
            ));
        }
        for (i, m) in dists.iter().enumerate() {
            if m.support().0 < 0.0 {
                return Err(Error::param(
                    "margins",
                    format!("margin {} ({}) must have non-negative support", i + 1, m.name()),
                ));
            }
        }
        Ok(Margins { dists })
    }

    pub fn from_names(names: &[String], pars: &[ParamMap]) -> Result<Self> {
        if names.len() != pars.len() {
            return Err(Error::Dimension {
                expected: names.len(),
                got: pars.len(),
            });
        }
        let dists = names
            .iter()
            .zip(pars)
            .map(|(n, p)| Continuous::from_name(n, p))
            .collect::<Result<Vec<_>>>()?;
        Margins::new(dists)
    }

    pub fn dim(&self) -> usize {
        self.dists.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregationMethod {
    Aep,
    Mc,
}

impl AggregationMethod {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "aep" => Ok(AggregationMethod::Aep),
            "mc" => Ok(AggregationMethod::Mc),
            _ => Err(Error::UnknownName {
                kind: "aggregation method",
                name: name.into(),
            }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AggregationMethod::Aep => "aep",
            AggregationMethod::Mc => "mc",
        }
    }
}

/// AEP probability with its propagated copula-integration error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AepEstimate {
    pub value: f64,
    pub error: f64,
}

/// Sorted simulated sums for one (n_sim, seed) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct McSample {
    pub n_sim: usize,
    pub seed: u64,
    pub sorted: Vec<f64>,
}

/// Signed simplex S(b, h) awaiting approximation.
#[derive(Debug, Clone)]
struct SimplexNode {
    b: Vec<f64>,
    h: f64,
    sign: f64,
}

/// Child offset masks and multipliers shared by every node in dimension d.
#[derive(Debug, Clone)]
struct AepGeometry {
    d: usize,
    alpha: f64,
    children: Vec<(u32, f64)>,
    extrapolation: f64,
}

impl AepGeometry {
    fn new(d: usize) -> Self {
        let alpha = 2.0 / (d as f64 + 1.0);
        let inv = (d as f64 + 1.0) / 2.0;
        let mut children = Vec::new();
        for mask in 1u32..(1 << d) {
            let k = mask.count_ones() as f64;
            let m = if k < inv {
                if (1 + mask.count_ones()).is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                }
            } else if k > inv {
                if (d as u32 + 1 - mask.count_ones()).is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                }
            } else {
                continue;
            };
            children.push((mask, m));
        }
        let fact: f64 = (1..=d).map(|i| i as f64).product();
        let extrapolation = (d as f64 + 1.0).powi(d as i32) / (fact * 2f64.powi(d as i32));
        AepGeometry {
            d,
            alpha,
            children,
            extrapolation,
        }
    }

    /// Number of nodes visited by `n_iter` iterations.
    fn node_count(&self, n_iter: u32) -> f64 {
        let c = self.children.len() as f64;
        (0..n_iter).map(|k| c.powi(k as i32)).sum()
    }
}

/// Default ceiling on simplexes processed per AEP evaluation.
pub const DEFAULT_NODE_BUDGET: f64 = 2e9;

#[derive(Debug, Clone)]
pub struct LossAggregation {
    pub margins: Margins,
    pub copula: Copula,
    pub n_iter: u32,
    pub node_budget: f64,
    mc: Option<McSample>,
}

impl LossAggregation {
    pub fn new(margins: Margins, copula: Copula, n_iter: u32) -> Result<Self> {
        if copula.dim != margins.dim() {
            return Err(Error::Dimension {
                expected: margins.dim(),
                got: copula.dim,
            });
        }
        if n_iter == 0 {
            return Err(Error::param("n_iter", "must be ≥ 1"));
        }
        Ok(LossAggregation {
            margins,
            copula,
            n_iter,
            node_budget: DEFAULT_NODE_BUDGET,
            mc: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.margins.dim()
    }

    /// H(x) = C(F₁(x₁), …, F_d(x_d)).
    pub fn joint_cdf(&self, x: &[f64]) -> Result<f64> {
        Ok(self.joint_cdf_with_error(x)?.0)
    }

    fn joint_cdf_with_error(&self, x: &[f64]) -> Result<(f64, f64)> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|&v| v <= 0.0) {
            // margins are non-negative, so any coordinate ≤ 0 has (at most) an atom at 0
            if x.iter().any(|&v| v < 0.0) {
                return Ok((0.0, 0.0));
            }
        }
        let mut u = [0.0; 16];
        for (i, (m, &v)) in self.margins.dists.iter().zip(x).enumerate() {
            u[i] = m.cdf(v);
        }
        let e = self.copula.cdf_with_error(&u[..x.len()])?;
        Ok((e.value, e.error))
    }

    /// Signed H-measure of the square inscribed in S(b, h).
    fn square_measure(&self, geo: &AepGeometry, b: &[f64], h: f64) -> Result<(f64, f64)> {
        let d = geo.d;
        let side = geo.alpha * h;
        let mut x = [0.0; 16];
        let (mut v, mut err) = (0.0, 0.0);
        for mask in 0u32..(1 << d) {
            for i in 0..d {
                x[i] = if mask >> i & 1 == 1 { b[i] + side } else { b[i] };
            }
            let ones = mask.count_ones() as usize;
            let lower = if h > 0.0 { d - ones } else { ones };
            let (c, e) = self.joint_cdf_with_error(&x[..d])?;
            v += if lower % 2 == 0 { c } else { -c };
            err += e;
        }
        Ok((v, err))
    }

    fn children(&self, geo: &AepGeometry, node: &SimplexNode) -> Vec<SimplexNode> {
        let side = geo.alpha * node.h;
        geo.children
            .iter()
            .map(|&(mask, m)| {
                let k = mask.count_ones() as f64;
                let b = node
                    .b
                    .iter()
                    .enumerate()
                    .map(|(i, bi)| if mask >> i & 1 == 1 { bi + side } else { *bi })
                    .collect();
                SimplexNode {
                    b,
                    h: (1.0 - k * geo.alpha) * node.h,
                    sign: node.sign * m,
                }
            })
            .collect()
    }

    /// Depth-first accumulation of signed square measures per level; `level` is 0-based.
    fn visit(
        &self,
        geo: &AepGeometry,
        node: &SimplexNode,
        level: usize,
        n_iter: usize,
        acc: &mut [f64],
        err: &mut f64,
    ) -> Result<()> {
        let (v, e) = self.square_measure(geo, &node.b, node.h)?;
        acc[level] += node.sign * v;
        *err += e;
        if level + 1 < n_iter {
            for child in self.children(geo, node) {
                self.visit(geo, &child, level + 1, n_iter, acc, err)?;
            }
        }
        Ok(())
    }

    /// Checks that an AEP evaluation with `n_iter` iterations is supported and within budget.
    pub fn check_aep(&self, n_iter: u32) -> Result<()> {
        let d = self.dim();
        if !(2..=5).contains(&d) {
            return Err(Error::Unsupported(format!("AEP supports 2 ≤ d ≤ 5, got d = {d}")));
        }
        if n_iter == 0 {
            return Err(Error::param("n_iter", "must be ≥ 1"));
        }
        let geo = AepGeometry::new(d);
        let nodes = geo.node_count(n_iter);
        if nodes > self.node_budget {
            let max_iter = (1..n_iter)
                .rev()
                .find(|&n| geo.node_count(n) <= self.node_budget)
                .unwrap_or(1);
            return Err(Error::Resource(format!(
                "AEP with d = {d} and n_iter = {n_iter} visits {nodes:.3e} simplexes (budget {:.3e}); use n_iter ≤ {max_iter}",
                self.node_budget
            )));
        }
        Ok(())
    }

    /// Per-level sums of the AEP expansion for P(S ≤ s).
    fn aep_levels(&self, s: f64, n_iter: u32) -> Result<(Vec<f64>, f64)> {
        self.check_aep(n_iter)?;
        let d = self.dim();
        let geo = AepGeometry::new(d);
        let n = n_iter as usize;
        // expand breadth-first until there is enough work to share, then descend each subtree
        let mut acc = vec![0.0; n];
        let mut err = 0.0;
        let mut frontier = vec![SimplexNode {
            b: vec![0.0; d],
            h: s,
            sign: 1.0,
        }];
        let mut level = 0;
        while level + 1 < n && frontier.len() < 256 {
            let mut next = Vec::with_capacity(frontier.len() * geo.children.len());
            for node in &frontier {
                let (v, e) = self.square_measure(&geo, &node.b, node.h)?;
                acc[level] += node.sign * v;
                err += e;
                next.extend(self.children(&geo, node));
            }
            frontier = next;
            level += 1;
        }
        let parts = frontier
            .par_iter()
            .map(|node| {
                let mut a = vec![0.0; n];
                let mut e = 0.0;
                self.visit(&geo, node, level, n, &mut a, &mut e)?;
                Ok((a, e))
            })
            .collect::<Result<Vec<_>>>()?;
        for (a, e) in parts {
            for (t, x) in acc.iter_mut().zip(a) {
                *t += x;
            }
            err += e;
        }
        Ok((acc, err))
    }

    /// AEP approximation of P(S ≤ s) after `n_iter` iterations, with the extrapolation
    /// step applied from the second iteration on.
    pub fn aep_cdf_with_error(&self, s: f64, n_iter: u32) -> Result<AepEstimate> {
        if n_iter == 0 {
            return Err(Error::param("n_iter", "must be ≥ 1"));
        }
        if s.is_nan() {
            return Err(Error::Domain("s is NaN".into()));
        }
        if s <= 0.0 {
            return Ok(AepEstimate { value: 0.0, error: 0.0 });
        }
        if s.is_infinite() {
            return Ok(AepEstimate { value: 1.0, error: 0.0 });
        }
        let (levels, err) = self.aep_levels(s, n_iter)?;
        let p_n: f64 = levels.iter().sum();
        let value = if n_iter >= 2 {
            let p_prev = p_n - levels[levels.len() - 1];
            let ext = AepGeometry::new(self.dim()).extrapolation;
            p_n + (ext - 1.0) * (p_n - p_prev)
        } else {
            p_n
        };
        Ok(AepEstimate { value, error: err })
    }

    pub fn aep_cdf(&self, s: f64, n_iter: u32) -> Result<f64> {
        Ok(self.aep_cdf_with_error(s, n_iter)?.value)
    }

    /// Simulates and caches `n_sim` sums; later MC queries reuse the sample.
    pub fn dist_calculate(&mut self, n_sim: usize, seed: u64) -> Result<()> {
        if n_sim == 0 {
            return Err(Error::param("n_sim", "must be ≥ 1"));
        }
        if let Some(mc) = &self.mc {
            if mc.n_sim == n_sim && mc.seed == seed {
                return Ok(());
            }
        }
        let mut sorted = self.simulate(n_sim, seed)?;
        sorted.sort_by(f64::total_cmp);
        self.mc = Some(McSample { n_sim, seed, sorted });
        Ok(())
    }

    fn simulate(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        let u = self.copula.rvs(n, seed);
        u.par_iter()
            .map(|row| {
                let mut s = 0.0;
                for (m, &ui) in self.margins.dists.iter().zip(row) {
                    s += m.ppf(ui)?;
                }
                Ok(s)
            })
            .collect()
    }

    pub fn mc_sample(&self) -> Result<&McSample> {
        self.mc.as_ref().ok_or_else(|| {
            Error::NotComputed("Monte Carlo sample (set n_sim and random_state, or call dist_calculate)".into())
        })
    }

    pub fn mc_cdf(&self, s: f64) -> Result<f64> {
        let mc = self.mc_sample()?;
        Ok(mc.sorted.partition_point(|&x| x <= s) as f64 / mc.sorted.len() as f64)
    }

    pub fn cdf(&self, s: f64, method: AggregationMethod) -> Result<f64> {
        match method {
            AggregationMethod::Aep => self.aep_cdf(s, self.n_iter),
            AggregationMethod::Mc => self.mc_cdf(s),
        }
    }

    pub fn sf(&self, s: f64, method: AggregationMethod) -> Result<f64> {
        Ok(1.0 - self.cdf(s, method)?)
    }

    /// Quantile: bracketed root of the AEP cdf, or the empirical order statistic.
    pub fn ppf(&self, q: f64, method: AggregationMethod) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Domain(format!("quantile level must lie in (0, 1), got {q}")));
        }
        match method {
            AggregationMethod::Mc => {
                let mc = self.mc_sample()?;
                let n = mc.sorted.len();
                let idx = ((q * n as f64).ceil() as usize).clamp(1, n) - 1;
                Ok(mc.sorted[idx])
            }
            AggregationMethod::Aep => {
                let hint: f64 = self
                    .margins
                    .dists
                    .iter()
                    .map(|m| m.ppf(q).unwrap_or(1.0))
                    .sum::<f64>()
                    .max(1e-12);
                let err = std::cell::Cell::new(None);
                let g = |s: f64| match self.aep_cdf(s, self.n_iter) {
                    Ok(v) => v,
                    Err(e) => {
                        err.set(Some(e));
                        f64::NAN
                    }
                };
                let x = invert_increasing(g, q, 0.0, hint, 1e-10 * hint);
                match err.take() {
                    Some(e) => Err(e),
                    None => x,
                }
            }
        }
    }

    /// Fresh simulated sums (not cached).
    pub fn rvs(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        self.simulate(n, seed)
    }

    fn sample_mean<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        let mc = self.mc_sample()?;
        Ok(mc.sorted.iter().map(|&x| f(x)).sum::<f64>() / mc.sorted.len() as f64)
    }

    pub fn mean(&self) -> Result<f64> {
        self.sample_mean(|x| x)
    }

    pub fn moment(&self, n: u32, central: bool) -> Result<f64> {
        let m = if central { self.mean()? } else { 0.0 };
        self.sample_mean(|x| (x - m).powi(n as i32))
    }

    pub fn var(&self) -> Result<f64> {
        self.moment(2, true)
    }

    pub fn std(&self) -> Result<f64> {
        Ok(self.var()?.sqrt())
    }

    pub fn skewness(&self) -> Result<f64> {
        Ok(self.moment(3, true)? / self.var()?.powf(1.5))
    }

    /// E[min(max(S − d, 0), c)^n] from the cached sample.
    pub fn censored_moment(&self, n: u32, d: f64, c: f64) -> Result<f64> {
        if !(d >= 0.0 && c > 0.0) {
            return Err(Error::param("censored_moment", "needs d ≥ 0 and c > 0"));
        }
        self.sample_mean(|x| (x - d).max(0.0).min(c).powi(n as i32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::params;

    fn uniform() -> Continuous {
        Continuous::from_name("uniform", &params(&[("a", 0.0), ("b", 1.0)])).unwrap()
    }

    fn lomax(g: f64) -> Continuous {
        Continuous::from_name("pareto2", &params(&[("scale", 1.0), ("shape", g)])).unwrap()
    }

    #[test]
    fn aep_geometry() {
        let g2 = AepGeometry::new(2);
        assert_eq!(g2.children, vec![(1, 1.0), (2, 1.0), (3, -1.0)]);
        assert!((g2.extrapolation - 9.0 / 8.0).abs() < 1e-15);
        // |k| = (d+1)/2 children cancel exactly in odd dimension
        assert_eq!(AepGeometry::new(3).children.len(), 4);
        assert_eq!(AepGeometry::new(4).children.len(), 15);
        assert_eq!(AepGeometry::new(5).children.len(), 21);
    }

    #[test]
    fn independent_uniform_oracle() {
        let la = LossAggregation::new(
            Margins::new(vec![uniform(), uniform()]).unwrap(),
            Copula::independence(2).unwrap(),
            13,
        )
        .unwrap();
        for &s in &[0.25, 0.6, 1.0] {
            let p = la.aep_cdf(s, 13).unwrap();
            assert!((p - s * s / 2.0).abs() < 1e-8, "{s}: {p}");
        }
    }

    #[test]
    fn clayton_pareto_reference() {
        let la = LossAggregation::new(
            Margins::new(vec![lomax(0.9), lomax(1.8)]).unwrap(),
            Copula::clayton(1.2, 2).unwrap(),
            13,
        )
        .unwrap();
        let p = la.aep_cdf(1.0, 13).unwrap();
        assert!((p / 0.315835041363441 - 1.0).abs() < 1e-9, "{p}");
        let mut prev = 0.0;
        for &s in &[0.5, 1.0, 3.0, 10.0] {
            let p = la.aep_cdf(s, 7).unwrap();
            assert!(p >= prev);
            prev = p;
        }
    }

    #[test]
    fn gaussian_uniform_first_iterations() {
        let c = Copula::gaussian(vec![vec![1.0, 0.7], vec![0.7, 1.0]]).unwrap();
        let la = LossAggregation::new(Margins::new(vec![uniform(), uniform()]).unwrap(), c, 7).unwrap();
        assert!((la.aep_cdf(1.0, 1).unwrap() - 0.55188934403716).abs() < 1e-10);
        assert!((la.aep_cdf(1.0, 2).unwrap() - 0.4934418427652146).abs() < 1e-10);
    }

    #[test]
    fn node_budget_guard() {
        let mut la = LossAggregation::new(
            Margins::new(vec![lomax(1.0), lomax(2.0), lomax(3.0), lomax(4.0), lomax(5.0)]).unwrap(),
            Copula::clayton(0.3, 5).unwrap(),
            7,
        )
        .unwrap();
        la.node_budget = 1e6;
        match la.aep_cdf(10.0, 7) {
            Err(Error::Resource(msg)) => assert!(msg.contains("n_iter ≤ 5"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn comonotone_uniforms_by_simulation() {
        let mut la = LossAggregation::new(
            Margins::new(vec![uniform(), uniform()]).unwrap(),
            Copula::frechet_upper(2).unwrap(),
            7,
        )
        .unwrap();
        assert!(matches!(la.mean(), Err(Error::NotComputed(_))));
        la.dist_calculate(100_000, 1).unwrap();
        let n = 100_000f64;
        assert!((la.mc_cdf(1.0).unwrap() - 0.5).abs() < 3.0 * (0.25 / n).sqrt());
        assert!((la.ppf(0.5, AggregationMethod::Mc).unwrap() - 1.0).abs() < 0.01);
        let var = la.var().unwrap();
        assert!((var - 1.0 / 3.0).abs() < 3.0 * (4.0 / 45.0 / n).sqrt() * 2.0, "{var}");
        let p = la.mc_cdf(0.8).unwrap();
        let q = la.ppf(p, AggregationMethod::Mc).unwrap();
        assert!(q <= 0.8 && 0.8 - q < 1e-3);
    }

    #[test]
    fn independent_exponential_mean() {
        let e = || Continuous::from_name("exponential", &params(&[("theta", 1.0)])).unwrap();
        let mut la = LossAggregation::new(
            Margins::new(vec![e(), e()]).unwrap(),
            Copula::independence(2).unwrap(),
            7,
        )
        .unwrap();
        la.dist_calculate(100_000, 4).unwrap();
        assert!((la.mean().unwrap() - 2.0).abs() < 3.0 * (2.0f64 / 1e5).sqrt());
        let m = la.mean().unwrap();
        la.dist_calculate(100_000, 4).unwrap();
        assert_eq!(la.mean().unwrap(), m);
    }

    #[test]
    fn rejects_bad_inputs() {
        let neg = Continuous::from_name("uniform", &params(&[("a", -1.0), ("b", 1.0)])).unwrap();
        assert!(Margins::new(vec![neg, uniform()]).is_err());
        let m = Margins::new(vec![uniform(), uniform()]).unwrap();
        assert!(matches!(
            LossAggregation::new(m.clone(), Copula::clayton(1.0, 3).unwrap(), 7),
            Err(Error::Dimension { .. })
        ));
        let la = LossAggregation::new(m, Copula::clayton(1.0, 2).unwrap(), 7).unwrap();
        assert!(la.ppf(1.0, AggregationMethod::Aep).is_err());
    }
}
