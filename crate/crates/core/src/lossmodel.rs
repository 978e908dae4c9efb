//! Collective risk model costing: frequency/severity assumptions, policy layers with
//! per-loss and aggregate modifiers, reinstatements, and closed-form moments.

use rayon::prelude::*;
use serde::Serialize;

use crate::aggregate_engine::{
    compute_fft, compute_mc, compute_recursive, AggregateDistribution, AggregateMethod, LossTransform,
};
use crate::discretize::{discretize, DiscretizationMethod};
use crate::distributions::{Continuous, Discrete};
use crate::error::{Error, Result, Warning};

/// Claim-count model; `threshold` is the analysis threshold above which counts are observed.
#[derive(Debug, Clone)]
pub struct Frequency {
    pub dist: Discrete,
    pub threshold: f64,
}

impl Frequency {
    pub fn new(dist: Discrete, threshold: f64) -> Result<Self> {
        if !(threshold >= 0.0 && threshold.is_finite()) {
            return Err(Error::param("threshold", format!("must be ≥ 0, got {threshold}")));
        }
        Ok(Frequency { dist, threshold })
    }
}

/// Per-loss (d, c), aggregate (v, u), reinstatement and share modifiers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Layer {
    pub deductible: f64,
    pub cover: f64,
    pub aggr_deductible: f64,
    pub aggr_cover: f64,
    pub n_reinst: Option<u32>,
    pub reinst_percentage: Vec<f64>,
    pub share: f64,
}

impl Default for Layer {
    fn default() -> Self {
        Layer {
            deductible: 0.0,
            cover: f64::INFINITY,
            aggr_deductible: 0.0,
            aggr_cover: f64::INFINITY,
            n_reinst: None,
            reinst_percentage: Vec::new(),
            share: 1.0,
        }
    }
}

impl Layer {
    /// Validates modifiers. With `n_reinst = Some(K)` the aggregate cover is implied as
    /// (K+1)·c and must not be given explicitly; `reinst_percentage` may have length 1
    /// (applied to every reinstatement) or K.
    pub fn new(
        deductible: f64,
        cover: f64,
        aggr_deductible: f64,
        aggr_cover: Option<f64>,
        n_reinst: Option<u32>,
        reinst_percentage: Vec<f64>,
        share: f64,
    ) -> Result<Self> {
        if !(deductible >= 0.0 && deductible.is_finite()) {
            return Err(Error::param(
                "deductible",
                format!("must be ≥ 0 and finite, got {deductible}"),
            ));
        }
        if !(cover > 0.0) {
            return Err(Error::param("cover", format!("must be > 0, got {cover}")));
        }
        if !(aggr_deductible >= 0.0 && aggr_deductible.is_finite()) {
            return Err(Error::param(
                "aggr_deductible",
                format!("must be ≥ 0 and finite, got {aggr_deductible}"),
            ));
        }
        if !(share > 0.0 && share <= 1.0) {
            return Err(Error::param("share", format!("must be in (0, 1], got {share}")));
        }
        if reinst_percentage.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err(Error::param("reinst_percentage", "percentages must lie in [0, 1]"));
        }
        let (aggr_cover, reinst_percentage) = match n_reinst {
            Some(k) => {
                if cover.is_infinite() {
                    return Err(Error::Structure("reinstatements require a finite cover".into()));
                }
                if aggr_cover.is_some() {
                    return Err(Error::Structure(
                        "aggr_cover is implied by n_reinst as (n_reinst + 1) * cover; do not set both".into(),
                    ));
                }
                let l = match reinst_percentage.len() {
                    0 => vec![0.0; k as usize],
                    1 => vec![reinst_percentage[0]; k as usize],
                    n if n == k as usize => reinst_percentage,
                    n => {
                        return Err(Error::Structure(format!(
                            "reinst_percentage has {n} entries, expected 1 or n_reinst = {k}"
                        )))
                    }
                };
                ((k as f64 + 1.0) * cover, l)
            }
            None => {
                if !reinst_percentage.is_empty() {
                    return Err(Error::Structure("reinst_percentage given without n_reinst".into()));
                }
                let u = aggr_cover.unwrap_or(f64::INFINITY);
                if !(u > 0.0) {
                    return Err(Error::param("aggr_cover", format!("must be > 0, got {u}")));
                }
                (u, Vec::new())
            }
        };
        Ok(Layer {
            deductible,
            cover,
            aggr_deductible,
            aggr_cover,
            n_reinst,
            reinst_percentage,
            share,
        })
    }

    /// Plain XL layer `cover` xs `deductible`.
    pub fn xl(cover: f64, deductible: f64) -> Result<Self> {
        Layer::new(deductible, cover, 0.0, None, None, Vec::new(), 1.0)
    }

    pub fn has_aggregate_modifiers(&self) -> bool {
        self.aggr_deductible > 0.0 || self.aggr_cover.is_finite() || self.n_reinst.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyStructure {
    pub layers: Vec<Layer>,
}

impl PolicyStructure {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Structure("a policy structure needs at least one layer".into()));
        }
        Ok(PolicyStructure { layers })
    }

    pub fn length(&self) -> usize {
        self.layers.len()
    }
}

impl Default for PolicyStructure {
    fn default() -> Self {
        PolicyStructure {
            layers: vec![Layer::default()],
        }
    }
}

/// Numerical settings for the aggregate loss distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngineConfig {
    pub aggr_loss_dist_method: Option<AggregateMethod>,
    pub n_aggr_dist_nodes: usize,
    pub sev_discr_method: DiscretizationMethod,
    pub n_sev_discr_nodes: Option<usize>,
    pub sev_discr_step: Option<f64>,
    pub n_sim: usize,
    pub random_state: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            aggr_loss_dist_method: None,
            n_aggr_dist_nodes: 1 << 14,
            sev_discr_method: DiscretizationMethod::MassDispersal,
            n_sev_discr_nodes: None,
            sev_discr_step: None,
            n_sim: 10_000,
            random_state: 0,
        }
    }
}

impl EngineConfig {
    pub fn with_method(method: AggregateMethod, n_aggr_dist_nodes: usize) -> Self {
        EngineConfig {
            aggr_loss_dist_method: Some(method),
            n_aggr_dist_nodes,
            ..Default::default()
        }
    }
}

/// Severity lattice actually used for a layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeSpec {
    pub h: f64,
    pub m: usize,
}

/// Resolves severity lattice settings for a layer:
/// - finite cover: `n_sev_discr_nodes` (default m_agg/8) nodes spanning [0, c]; a
///   user step is an upper bound;
/// - infinite cover with a step: `n_sev_discr_nodes` (default m_agg) nodes of that step;
/// - otherwise m_agg/8 nodes reaching the 1 − 1e-6 quantile of the excess loss.
pub fn severity_lattice(sev: &Continuous, layer: &Layer, engine: &EngineConfig) -> Result<LatticeSpec> {
    let m_agg = engine.n_aggr_dist_nodes;
    let d = layer.deductible;
    if layer.cover.is_finite() {
        let m = engine.n_sev_discr_nodes.unwrap_or((m_agg / 8).max(2));
        let h = engine.sev_discr_step.unwrap_or(f64::INFINITY);
        let (m, h) = crate::discretize::lattice_for_cover(m, h.min(layer.cover / (m.max(2) - 1) as f64), layer.cover);
        return Ok(LatticeSpec { h, m });
    }
    match engine.sev_discr_step {
        Some(h) => Ok(LatticeSpec {
            h,
            m: engine.n_sev_discr_nodes.unwrap_or(m_agg),
        }),
        None => {
            let m = engine.n_sev_discr_nodes.unwrap_or((m_agg / 8).max(2));
            let sf_d = sev.sf(d);
            if !(sf_d > 0.0) {
                return Err(Error::Domain(format!("no severity mass above the deductible {d}")));
            }
            let q = sev.ppf(1.0 - 1e-6 * sf_d)? - d;
            Ok(LatticeSpec {
                h: q.max(f64::MIN_POSITIVE) / (m - 1) as f64,
                m,
            })
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LayerResult {
    pub idx: usize,
    /// Closed-form premium (only without aggregate modifiers).
    pub pure_premium: Option<f64>,
    /// Premium from the aggregate distribution.
    pub pure_premium_dist: Option<f64>,
    pub lattice: Option<LatticeSpec>,
    #[serde(skip)]
    pub dist: Option<AggregateDistribution>,
    pub warnings: Vec<Warning>,
}

/// Moments of a·X from frequency/severity closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub std: f64,
    pub var: f64,
    pub coeff_variation: f64,
    pub skewness: f64,
}

#[derive(Debug, Clone)]
pub struct LossModel {
    pub frequency: Frequency,
    pub severity: Continuous,
    pub policystructure: PolicyStructure,
    pub engine: EngineConfig,
    pub results: Vec<LayerResult>,
    pub warnings: Vec<Warning>,
}

impl LossModel {
    /// Builds the model, computes each layer's aggregate distribution (when a method is
    /// given) and costs every layer.
    pub fn new(
        frequency: Frequency,
        severity: Continuous,
        policystructure: PolicyStructure,
        engine: EngineConfig,
    ) -> Result<Self> {
        if let Some(AggregateMethod::Fft) = engine.aggr_loss_dist_method {
            if !engine.n_aggr_dist_nodes.is_power_of_two() {
                return Err(Error::param(
                    "n_aggr_dist_nodes",
                    format!("must be a power of two for FFT, got {}", engine.n_aggr_dist_nodes),
                ));
            }
        }
        let mut warnings = Vec::new();
        if engine.aggr_loss_dist_method.is_none() {
            warnings.push(Warning::new(
                "lossmodel",
                "dist_omitted",
                "Aggregate loss distribution calculation is omitted as aggr_loss_dist_method is missing",
            ));
        }
        let results = policystructure
            .layers
            .par_iter()
            .enumerate()
            .map(|(idx, layer)| cost_layer(&frequency, &severity, layer, &engine, idx))
            .collect::<Result<Vec<_>>>()?;
        Ok(LossModel {
            frequency,
            severity,
            policystructure,
            engine,
            results,
            warnings,
        })
    }

    /// Recomputes every layer with new numerical settings; closed-form premiums are unchanged.
    pub fn dist_calculate(&mut self, engine: EngineConfig) -> Result<()> {
        let rebuilt = LossModel::new(
            self.frequency.clone(),
            self.severity.clone(),
            self.policystructure.clone(),
            engine,
        )?;
        *self = rebuilt;
        Ok(())
    }

    fn result(&self, idx: usize) -> Result<&LayerResult> {
        self.results.get(idx).ok_or_else(|| {
            Error::Domain(format!(
                "layer index {idx} out of range (policy has {} layers)",
                self.results.len()
            ))
        })
    }

    fn layer(&self, idx: usize) -> Result<&Layer> {
        self.result(idx)?;
        Ok(&self.policystructure.layers[idx])
    }

    pub fn pure_premium(&self) -> Vec<Option<f64>> {
        self.results.iter().map(|r| r.pure_premium).collect()
    }

    pub fn pure_premium_dist(&self) -> Vec<Option<f64>> {
        self.results.iter().map(|r| r.pure_premium_dist).collect()
    }

    /// Every warning raised while building the model, model-level first.
    pub fn all_warnings(&self) -> Vec<Warning> {
        let mut out = self.warnings.clone();
        for r in &self.results {
            out.extend(r.warnings.iter().cloned());
        }
        out
    }

    pub fn dist(&self, idx: usize) -> Result<&AggregateDistribution> {
        self.result(idx)?
            .dist
            .as_ref()
            .ok_or_else(|| Error::NotComputed("aggregate loss distribution (aggr_loss_dist_method is missing)".into()))
    }

    /// Distribution of a·L_{u,v}(X) evaluated through `phi`.
    fn dist_expect<F: Fn(f64) -> f64>(&self, idx: usize, phi: F) -> Result<f64> {
        let layer = self.layer(idx)?;
        let (a, v, u) = (layer.share, layer.aggr_deductible, layer.aggr_cover);
        Ok(self.dist(idx)?.expect(|x| phi(a * (x - v).max(0.0).min(u))))
    }

    /// Moments of a·L_{u,v}(X): from the distribution or in closed form.
    pub fn moments(&self, idx: usize, use_dist: bool) -> Result<Moments> {
        let layer = self.layer(idx)?;
        if use_dist {
            let mean = self.dist_expect(idx, |x| x)?;
            let var = self.dist_expect(idx, |x| (x - mean).powi(2))?;
            let m3 = self.dist_expect(idx, |x| (x - mean).powi(3))?;
            return Ok(Moments::from_central(mean, var, m3));
        }
        if layer.has_aggregate_modifiers() {
            return Err(Error::Unsupported(
                "closed-form moments are not available with aggregate coverage modifiers; use the distribution".into(),
            ));
        }
        closed_moments(&self.frequency, &self.severity, layer)
    }

    pub fn mean(&self, idx: usize, use_dist: bool) -> Result<f64> {
        Ok(self.moments(idx, use_dist)?.mean)
    }

    pub fn std(&self, idx: usize, use_dist: bool) -> Result<f64> {
        Ok(self.moments(idx, use_dist)?.std)
    }

    pub fn var(&self, idx: usize, use_dist: bool) -> Result<f64> {
        Ok(self.moments(idx, use_dist)?.var)
    }

    pub fn coeff_variation(&self, idx: usize, use_dist: bool) -> Result<f64> {
        Ok(self.moments(idx, use_dist)?.coeff_variation)
    }

    pub fn skewness(&self, idx: usize, use_dist: bool) -> Result<f64> {
        Ok(self.moments(idx, use_dist)?.skewness)
    }

    /// Raw or central moment of the aggregate distribution of layer `idx`.
    pub fn moment(&self, idx: usize, central: bool, n: u32) -> Result<f64> {
        let mean = if central { self.dist_expect(idx, |x| x)? } else { 0.0 };
        self.dist_expect(idx, |x| (x - mean).powi(n as i32))
    }

    /// Quantile of the (unmodified) aggregate loss of layer `idx`.
    pub fn ppf(&self, idx: usize, q: f64) -> Result<f64> {
        self.dist(idx)?.ppf(q)
    }

    pub fn cdf(&self, idx: usize, x: f64) -> Result<f64> {
        Ok(self.dist(idx)?.cdf(x))
    }

    pub fn rvs(&self, idx: usize, n: usize, seed: u64) -> Result<Vec<f64>> {
        Ok(self.dist(idx)?.rvs(n, seed))
    }

    /// Fixed-width costing summary of layer `idx`.
    pub fn costing_summary(&self, idx: usize) -> Result<String> {
        let layer = self.layer(idx)?;
        let r = self.result(idx)?;
        let mut rows: Vec<(String, String)> = vec![
            ("Cover".into(), fmt_num(layer.cover)),
            ("Deductible".into(), fmt_num(layer.deductible)),
            ("Aggregate cover".into(), fmt_num(layer.aggr_cover)),
            ("Aggregate deductible".into(), fmt_num(layer.aggr_deductible)),
        ];
        if let Some(k) = layer.n_reinst {
            rows.push(("Reinstatements (no.)".into(), k.to_string()));
            for (i, l) in layer.reinst_percentage.iter().enumerate() {
                rows.push((format!("Reinst. layer percentage {}", i + 1), fmt_num(*l)));
            }
        }
        let a = layer.share;
        rows.extend([
            (
                "Pure premium (dist est.) before share particip.".into(),
                fmt_premium(r.pure_premium_dist.map(|p| p / a)),
            ),
            (
                "Pure premium before share particip.".into(),
                fmt_premium(r.pure_premium.map(|p| p / a)),
            ),
            ("Share particip.".into(), fmt_num(a)),
            ("Pure premium (dist est.)".into(), fmt_premium(r.pure_premium_dist)),
            ("Pure premium".into(), fmt_premium(r.pure_premium)),
        ]);
        Ok(table(
            &format!("Costing Summary: Layer {}", idx + 1),
            "Quantity",
            55,
            &rows,
        ))
    }

    /// Fixed-width summary of the modifiers of layer `idx`.
    pub fn policy_layer_summary(&self, idx: usize) -> Result<String> {
        let layer = self.layer(idx)?;
        let mut rows: Vec<(String, String)> = vec![
            ("Deductible".into(), fmt_num(layer.deductible)),
            ("Cover".into(), fmt_num(layer.cover)),
            ("Aggregate deductible".into(), fmt_num(layer.aggr_deductible)),
        ];
        match layer.n_reinst {
            Some(k) => {
                rows.push(("Reinstatements (no.)".into(), k.to_string()));
                for (i, l) in layer.reinst_percentage.iter().enumerate() {
                    rows.push((format!("Reinst. layer percentage {}", i + 1), fmt_num(*l)));
                }
            }
            None => rows.push(("Aggregate cover".into(), fmt_num(layer.aggr_cover))),
        }
        rows.push(("Share participation".into(), fmt_num(layer.share)));
        Ok(table(
            &format!("Policy Structure Summary: layer {}", idx + 1),
            "Specification",
            31,
            &rows,
        ))
    }

    /// Fixed-width summary of the numerical settings used for layer `idx`.
    pub fn aggr_loss_specs(&self, idx: usize) -> Result<String> {
        let r = self.result(idx)?;
        let e = &self.engine;
        let method = e.aggr_loss_dist_method.map(|m| m.name()).unwrap_or("-");
        let mut rows: Vec<(String, String)> = vec![("Aggregate loss dist. method".into(), method.into())];
        match e.aggr_loss_dist_method {
            Some(AggregateMethod::Mc) => {
                rows.push(("Number of simulation".into(), e.n_sim.to_string()));
                rows.push(("Random state".into(), e.random_state.to_string()));
            }
            Some(_) => {
                rows.push(("n_aggr_dist_nodes".into(), e.n_aggr_dist_nodes.to_string()));
                rows.push(("Sev. discr. method".into(), e.sev_discr_method.name().into()));
                if let Some(l) = r.lattice {
                    rows.push(("Sev. discr. step".into(), fmt_num(l.h)));
                    rows.push(("Number of sev. discr. nodes".into(), l.m.to_string()));
                }
            }
            None => {}
        }
        Ok(table(
            &format!("Aggregate Loss Distribution: layer {}", idx + 1),
            "Quantity",
            34,
            &rows,
        ))
    }
}

impl Moments {
    fn from_central(mean: f64, var: f64, m3: f64) -> Self {
        let std = var.max(0.0).sqrt();
        Moments {
            mean,
            std,
            var,
            coeff_variation: std / mean,
            skewness: m3 / var.powf(1.5),
        }
    }
}

/// Frequency of losses exceeding `d`, obtained by thinning counts above the analysis threshold.
pub fn thinned_frequency(frequency: &Frequency, sev: &Continuous, d: f64) -> Result<Discrete> {
    let sf_t = sev.sf(frequency.threshold);
    if !(sf_t > 0.0) {
        return Err(Error::Domain(format!(
            "severity has no mass above the frequency threshold {}",
            frequency.threshold
        )));
    }
    let nu = sev.sf(d) / sf_t;
    if nu <= 0.0 {
        return Err(Error::Domain(format!("no severity mass above the deductible {d}")));
    }
    frequency.dist.thin(nu)
}

/// Closed-form moments of a·Σ L_{c,d}(Z_i).
pub fn closed_moments(frequency: &Frequency, sev: &Continuous, layer: &Layer) -> Result<Moments> {
    let (d, c, a) = (layer.deductible, layer.cover, layer.share);
    let n = thinned_frequency(frequency, sev, d)?;
    let sf_d = sev.sf(d);
    let ey = |k: u32| -> Result<f64> { Ok(sev.censored_moment(k, d, c)? / sf_d) };
    let (y1, y2, y3) = (ey(1)?, ey(2)?, ey(3)?);
    let vy = y2 - y1 * y1;
    let m3y = y3 - 3.0 * y1 * y2 + 2.0 * y1.powi(3);
    let (en, vn, m3n) = (n.mean()?, n.var()?, n.third_central());
    let mean = a * en * y1;
    let var = a * a * (en * vy + vn * y1 * y1);
    let m3 = a.powi(3) * (en * m3y + 3.0 * vn * y1 * vy + m3n * y1.powi(3));
    Ok(Moments::from_central(mean, var, m3))
}

/// Costs one layer: closed-form premium when possible, distribution-based premium when
/// an aggregate method is configured.
pub fn cost_layer(
    frequency: &Frequency,
    sev: &Continuous,
    layer: &Layer,
    engine: &EngineConfig,
    idx: usize,
) -> Result<LayerResult> {
    let mut warnings = Vec::new();
    let pure_premium = if layer.has_aggregate_modifiers() {
        None
    } else {
        let freq_mean = frequency.dist.mean()?;
        let sf_t = sev.sf(frequency.threshold);
        Some(layer.share * freq_mean * sev.censored_moment(1, layer.deductible, layer.cover)? / sf_t)
    };
    let (dist, lattice) = match engine.aggr_loss_dist_method {
        None => {
            if layer.has_aggregate_modifiers() {
                warnings.push(Warning::new(
                    "lossmodel",
                    "costing_omitted",
                    format!(
                        "Layer {}: costing is omitted as aggr_loss_dist_method is missing",
                        idx + 1
                    ),
                ));
            }
            (None, None)
        }
        Some(AggregateMethod::Mc) => {
            log::info!(target: "lossmodel", "Layer {}: approximating aggregate loss distribution via Monte Carlo simulation", idx + 1);
            let transform = LossTransform {
                threshold: frequency.threshold,
                deductible: layer.deductible,
                cover: layer.cover,
            };
            let agg = compute_mc(&frequency.dist, sev, transform, engine.n_sim, engine.random_state)?;
            (Some(agg), None)
        }
        Some(method) => {
            log::info!(target: "lossmodel", "Layer {}: approximating aggregate loss distribution via {}", idx + 1, method.name());
            let spec = severity_lattice(sev, layer, engine)?;
            let lattice = discretize(
                sev,
                engine.sev_discr_method,
                spec.m,
                spec.h,
                layer.deductible,
                layer.cover,
            )?;
            warnings.extend(lattice.warnings.iter().cloned());
            let freq = thinned_frequency(frequency, sev, layer.deductible)?;
            let m_agg = engine.n_aggr_dist_nodes;
            if lattice.m() > m_agg {
                return Err(Error::param(
                    "n_sev_discr_nodes",
                    format!("severity lattice ({}) exceeds n_aggr_dist_nodes ({m_agg})", lattice.m()),
                ));
            }
            let agg = if method == AggregateMethod::Fft {
                compute_fft(&freq, &lattice, m_agg)?
            } else {
                compute_recursive(&freq, &lattice, m_agg)?
            };
            let reach = (m_agg - 1) as f64 * lattice.h;
            let needed = layer.aggr_deductible + layer.aggr_cover;
            let tail = 1.0 - agg.cdf(reach);
            if needed > reach && agg.layer_expectation(reach, f64::INFINITY) == 0.0 && tail > 1e-6 {
                warnings.push(Warning::new(
                    "lossmodel",
                    "lattice_reach",
                    format!(
                        "Layer {}: aggregate lattice ends at {reach} below the aggregate layer top {needed}",
                        idx + 1
                    ),
                ));
            }
            (
                Some(agg),
                Some(LatticeSpec {
                    h: lattice.h,
                    m: lattice.m(),
                }),
            )
        }
    };
    let mut dist = dist;
    if let Some(agg) = dist.as_mut() {
        warnings.append(&mut agg.warnings);
    }
    let pure_premium_dist = dist.as_ref().map(|agg| layer.share * dist_premium(agg, layer));
    Ok(LayerResult {
        idx,
        pure_premium,
        pure_premium_dist,
        lattice,
        dist,
        warnings,
    })
}

/// E[L_{u,v}(X)], divided by the reinstatement loading when reinstatements apply.
pub fn dist_premium(agg: &AggregateDistribution, layer: &Layer) -> f64 {
    let (v, u) = (layer.aggr_deductible, layer.aggr_cover);
    let base = agg.layer_expectation(v, u);
    match layer.n_reinst {
        None => base,
        Some(_) => {
            let c = layer.cover;
            let loading: f64 = layer
                .reinst_percentage
                .iter()
                .enumerate()
                .map(|(k, l)| l * agg.layer_expectation(k as f64 * c + v, c))
                .sum();
            base / (1.0 + loading / c)
        }
    }
}

/// Compact number formatting for summaries: integers without decimals, `inf`, `-`.
pub fn fmt_num(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x.fract() == 0.0 && x.abs() < 1e15 {
        return format!("{}", x as i64);
    }
    let s = format!("{x:.10}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn fmt_premium(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into())
}

/// Two-column table with right-aligned columns framed by `=` rules.
pub fn table(title: &str, header: &str, key_width: usize, rows: &[(String, String)]) -> String {
    let width = key_width + 16;
    let rule = "=".repeat(width + 3);
    let mut out = String::new();
    let pad = width.saturating_sub(title.len()) / 2;
    out.push_str(&format!("{}{}\n", " ".repeat(pad), title));
    out.push_str(&rule);
    out.push('\n');
    out.push_str(&format!("{header:>key_width$}{:>16}\n", "Value"));
    out.push_str(&rule);
    out.push('\n');
    for (k, v) in rows {
        out.push_str(&format!("{k:>key_width$}{v:>16}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::params;

    fn gamma5() -> Continuous {
        Continuous::from_name("gamma", &params(&[("a", 5.0)])).unwrap()
    }

    fn poisson(mu: f64) -> Frequency {
        Frequency::new(Discrete::poisson(mu).unwrap(), 0.0).unwrap()
    }

    #[test]
    fn layer_invariants() {
        assert!(matches!(
            Layer::new(0.0, f64::INFINITY, 0.0, None, Some(2), vec![1.0], 1.0),
            Err(Error::Structure(_))
        ));
        assert!(Layer::new(0.0, 10.0, 0.0, Some(30.0), Some(2), vec![], 1.0).is_err());
        let l = Layer::new(0.0, 100.0, 100.0, None, Some(2), vec![1.0], 1.0).unwrap();
        assert_eq!(l.aggr_cover, 300.0);
        assert_eq!(l.reinst_percentage, vec![1.0, 1.0]);
        assert!(Layer::new(0.0, 10.0, 0.0, None, None, vec![], 0.0).is_err());
        assert!(PolicyStructure::new(vec![]).is_err());
    }

    #[test]
    fn closed_premium_is_linear_in_share() {
        let full = Layer::xl(20.0, 5.0).unwrap();
        let half = Layer {
            share: 0.5,
            ..full.clone()
        };
        let ps = PolicyStructure::new(vec![full, half]).unwrap();
        let lm = LossModel::new(poisson(4.0), gamma5(), ps, EngineConfig::default()).unwrap();
        let p = lm.pure_premium();
        assert_eq!(p[1].unwrap(), 0.5 * p[0].unwrap());
        assert!(lm.warnings.len() == 1 && lm.results[0].warnings.is_empty());
    }

    #[test]
    fn contiguous_layers_add_up() {
        let sev = Continuous::from_name("lognormal", &params(&[("shape", 1.3), ("scale", 36315.49)])).unwrap();
        let f = poisson(3.0);
        let prem = |d: f64, c: f64| {
            cost_layer(&f, &sev, &Layer::xl(c, d).unwrap(), &EngineConfig::default(), 0)
                .unwrap()
                .pure_premium
                .unwrap()
        };
        let whole = prem(10_000.0, 150_000.0);
        let parts = prem(10_000.0, 50_000.0) + prem(60_000.0, 100_000.0);
        assert!((whole - parts).abs() < 1e-10 * whole);
    }

    #[test]
    fn closed_moments_without_modifiers() {
        let lm = LossModel::new(
            poisson(4.0),
            gamma5(),
            PolicyStructure::default(),
            EngineConfig::default(),
        )
        .unwrap();
        let m = lm.moments(0, false).unwrap();
        assert!((m.mean - 20.0).abs() < 1e-12);
        assert!((m.coeff_variation - 0.5477225575051661).abs() < 1e-12);
        assert!((m.skewness - 0.6390096504226938).abs() < 1e-12);
        assert!(matches!(lm.moments(0, true), Err(Error::NotComputed(_))));
    }

    #[test]
    fn xl_costing_matches_reference() {
        let ps = PolicyStructure::new(vec![Layer::xl(20.0, 5.0).unwrap()]).unwrap();
        let engine = EngineConfig::with_method(AggregateMethod::Fft, 1 << 17);
        let lm = LossModel::new(poisson(4.0), gamma5(), ps, engine).unwrap();
        let closed = lm.pure_premium()[0].unwrap();
        let dist = lm.pure_premium_dist()[0].unwrap();
        assert!((closed - 3.50934614394912).abs() < 1e-6, "{closed}");
        assert!((dist - 3.509346100359707).abs() < 1e-5, "{dist}");
        assert!((lm.coeff_variation(0, false).unwrap() - 1.0001481667319252).abs() < 1e-8);
        assert!((lm.skewness(0, false).unwrap() - 1.3814094309741256).abs() < 1e-8);
        let summary = lm.costing_summary(0).unwrap();
        assert!(summary.contains("Pure premium            3.51"), "{summary}");
        assert!(summary.contains("Share particip.               1"));
        assert!(lm.costing_summary(3).is_err());
    }

    #[test]
    fn reinstatement_limits() {
        let sev = Continuous::from_name("pareto2", &params(&[("scale", 100.0), ("shape", 1.2)])).unwrap();
        let engine = EngineConfig::with_method(AggregateMethod::Fft, 1 << 12);
        let free = Layer::new(0.0, 100.0, 50.0, None, Some(2), vec![0.0], 1.0).unwrap();
        let sl = Layer::new(0.0, 100.0, 50.0, Some(300.0), None, vec![], 1.0).unwrap();
        let a = cost_layer(&poisson(0.5), &sev, &free, &engine, 0)
            .unwrap()
            .pure_premium_dist
            .unwrap();
        let b = cost_layer(&poisson(0.5), &sev, &sl, &engine, 0)
            .unwrap()
            .pure_premium_dist
            .unwrap();
        assert!((a - b).abs() < 1e-14);
        let k0 = Layer::new(0.0, 100.0, 50.0, None, Some(0), vec![], 1.0).unwrap();
        let sl0 = Layer::new(0.0, 100.0, 50.0, Some(100.0), None, vec![], 1.0).unwrap();
        let a = cost_layer(&poisson(0.5), &sev, &k0, &engine, 0)
            .unwrap()
            .pure_premium_dist
            .unwrap();
        let b = cost_layer(&poisson(0.5), &sev, &sl0, &engine, 0)
            .unwrap()
            .pure_premium_dist
            .unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn missing_method_warns_per_layer() {
        let ps = PolicyStructure::new(vec![
            Layer::xl(10.0, 2.0).unwrap(),
            Layer::new(0.0, 10.0, 5.0, None, None, vec![], 1.0).unwrap(),
        ])
        .unwrap();
        let lm = LossModel::new(poisson(1.0), gamma5(), ps, EngineConfig::default()).unwrap();
        assert_eq!(lm.pure_premium_dist(), vec![None, None]);
        assert!(lm.pure_premium()[1].is_none());
        let w = lm.all_warnings();
        assert_eq!(w.len(), 2);
        assert_eq!(
            w[1].to_string(),
            "WARNING|lossmodel|Layer 2: costing is omitted as aggr_loss_dist_method is missing"
        );
        assert!(matches!(lm.moments(1, false), Err(Error::Unsupported(_))));
    }

    #[test]
    fn reinstatements_and_multilayer_reference() {
        let sev = Continuous::from_name("pareto2", &params(&[("scale", 100.0), ("shape", 1.2)])).unwrap();
        let engine = EngineConfig::with_method(AggregateMethod::Fft, 1 << 17);
        let rs = Layer::new(0.0, 100.0, 100.0, None, Some(2), vec![1.0], 1.0).unwrap();
        let p = cost_layer(&poisson(0.5), &sev, &rs, &engine, 0)
            .unwrap()
            .pure_premium_dist
            .unwrap();
        assert!((p - 4.319350355177216).abs() < 1e-6, "{p}");

        let sev = Continuous::from_name("genpareto", &params(&[("loc", 0.0), ("scale", 83.34), ("c", 0.834)])).unwrap();
        let ps = PolicyStructure::new(vec![
            Layer::new(100.0, 100.0, 0.0, None, None, vec![], 0.5).unwrap(),
            Layer::new(100.0, 200.0, 0.0, None, Some(2), vec![0.6], 1.0).unwrap(),
            Layer::new(100.0, 100.0, 0.0, Some(200.0), None, vec![], 1.0).unwrap(),
        ])
        .unwrap();
        let mut lm = LossModel::new(poisson(0.5), sev, ps, EngineConfig::default()).unwrap();
        assert_eq!(lm.pure_premium_dist(), vec![None, None, None]);
        lm.dist_calculate(engine).unwrap();
        let want = [8.479087307062226, 25.99131088702302, 16.88704720494799];
        for (got, w) in lm.pure_premium_dist().iter().zip(want) {
            assert!((got.unwrap() - w).abs() < 1e-4, "{got:?} vs {w}");
        }
        assert!((lm.pure_premium()[0].unwrap() - 8.479087307840043).abs() < 1e-7);
        assert_eq!(&lm.pure_premium()[1..], &[None, None]);
    }

    #[test]
    fn table_layout() {
        let t = table("T", "Quantity", 55, &[("Cover".into(), "20".into())]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[1].len(), 74);
        assert_eq!(lines[4].len(), 71);
        assert_eq!(fmt_num(0.6), "0.6");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
    }
}
