//! JSON run configurations. Field names follow the library constructors; every
//! document is resolved into a [`Plan`] before any computation so that `validate`
//! and the run subcommands accept exactly the same inputs.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::Value;

use crate::aggregate_engine::AggregateMethod;
use crate::copulas::{Copula, CopulaPar};
use crate::discretize::DiscretizationMethod;
use crate::distributions::{Continuous, Discrete, ParamMap};
use crate::error::{Error, Result};
use crate::lossaggregation::{AggregationMethod, LossAggregation, Margins};
use crate::lossmodel::{severity_lattice, EngineConfig, Frequency, LatticeSpec, Layer, PolicyStructure};
use crate::lossreserve::{read_vector_csv, ReservingMethod, ReservingModel, Triangle, TriangleSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CommandKind {
    Cost,
    Aggregate,
    Reserve,
    Discretize,
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::Cost => "cost",
            CommandKind::Aggregate => "aggregate",
            CommandKind::Reserve => "reserve",
            CommandKind::Discretize => "discretize",
        }
    }

    fn from_name(name: &str) -> Result<Self> {
        match name {
            "cost" => Ok(CommandKind::Cost),
            "aggregate" => Ok(CommandKind::Aggregate),
            "reserve" => Ok(CommandKind::Reserve),
            "discretize" => Ok(CommandKind::Discretize),
            _ => Err(Error::config("command", format!("unknown command `{name}`"))),
        }
    }
}

/// A number or one of the strings `inf` / `infinity`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Num(f64),
    Text(String),
}

fn bound(field: &str, v: &Option<Bound>, default: f64) -> Result<f64> {
    match v {
        None => Ok(default),
        Some(Bound::Num(x)) => Ok(*x),
        Some(Bound::Text(s)) if matches!(s.to_ascii_lowercase().as_str(), "inf" | "infinity") => Ok(f64::INFINITY),
        Some(Bound::Text(s)) => Err(Error::config(
            field,
            format!("expected a number or \"inf\", got \"{s}\""),
        )),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Percentages {
    One(f64),
    Many(Vec<f64>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistSpec {
    pub dist: String,
    #[serde(default)]
    pub par: ParamMap,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencySpec {
    pub dist: String,
    #[serde(default)]
    pub par: ParamMap,
    #[serde(default)]
    pub threshold: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    pub deductible: Option<f64>,
    pub cover: Option<Bound>,
    pub aggr_deductible: Option<f64>,
    pub aggr_cover: Option<Bound>,
    pub n_reinst: Option<u32>,
    pub reinst_percentage: Option<Percentages>,
    pub share: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    pub layers: Vec<LayerSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostConfig {
    pub command: Option<String>,
    pub frequency: FrequencySpec,
    pub severity: DistSpec,
    pub policystructure: Option<PolicySpec>,
    pub aggr_loss_dist_method: Option<String>,
    pub n_aggr_dist_nodes: Option<usize>,
    pub sev_discr_method: Option<String>,
    pub n_sev_discr_nodes: Option<usize>,
    pub sev_discr_step: Option<f64>,
    pub n_sim: Option<usize>,
    pub random_state: Option<u64>,
    #[serde(default)]
    pub quantiles: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginsSpec {
    pub dist: Vec<String>,
    pub par: Vec<ParamMap>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CopulaSpec {
    pub dist: String,
    pub par: CopulaPar,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregateConfig {
    pub command: Option<String>,
    pub margins: MarginsSpec,
    pub copula: CopulaSpec,
    pub method: Option<String>,
    pub n_iter: Option<u32>,
    pub n_sim: Option<usize>,
    pub random_state: Option<u64>,
    #[serde(default)]
    pub x: Vec<f64>,
    #[serde(default)]
    pub q: Vec<f64>,
    pub plot_points: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    pub incremental_payments: PathBuf,
    pub payments_number: PathBuf,
    pub cased_payments: PathBuf,
    pub open_claims_number: PathBuf,
    pub reported_claims: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum VectorSpec {
    Values(Vec<f64>),
    File(PathBuf),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReservingModelSpec {
    #[serde(default)]
    pub tail: bool,
    pub reserving_method: String,
    #[serde(default)]
    pub claims_inflation: Vec<f64>,
    pub mixing_fq_par: Option<f64>,
    pub mixing_sev_par: Option<f64>,
    pub czj: Option<VectorSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReserveConfig {
    pub command: Option<String>,
    pub data: DataSpec,
    pub reservingmodel: ReservingModelSpec,
    pub ntr_sim: Option<usize>,
    pub random_state: Option<u64>,
    #[serde(default)]
    pub q: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizeConfig {
    pub command: Option<String>,
    pub severity: DistSpec,
    pub discr_method: String,
    pub n_discr_nodes: usize,
    pub discr_step: f64,
    pub deductible: Option<f64>,
    pub cover: Option<Bound>,
}

/// Fully resolved inputs of a run.
#[derive(Debug, Clone)]
pub enum Plan {
    Cost(CostPlan),
    Aggregate(Box<AggregatePlan>),
    Reserve(ReservePlan),
    Discretize(DiscretizePlan),
}

#[derive(Debug, Clone)]
pub struct CostPlan {
    pub frequency: Frequency,
    pub frequency_spec: FrequencySpec,
    pub severity: Continuous,
    pub severity_spec: DistSpec,
    pub policystructure: PolicyStructure,
    pub engine: EngineConfig,
    /// Severity lattice of each layer when a lattice method is used.
    pub lattices: Vec<Option<LatticeSpec>>,
    pub quantiles: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct AggregatePlan {
    pub model: LossAggregation,
    pub spec: AggregateConfig,
    pub method: AggregationMethod,
    pub n_sim: Option<usize>,
    pub random_state: u64,
    pub x: Vec<f64>,
    pub q: Vec<f64>,
    pub plot_points: usize,
}

#[derive(Debug, Clone)]
pub struct ReservePlan {
    pub data: TriangleSet,
    pub model: ReservingModel,
    pub ntr_sim: usize,
    pub random_state: u64,
    pub q: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DiscretizePlan {
    pub severity: Continuous,
    pub severity_spec: DistSpec,
    pub method: DiscretizationMethod,
    pub n_discr_nodes: usize,
    pub discr_step: f64,
    pub deductible: f64,
    pub cover: f64,
}

impl Plan {
    pub fn kind(&self) -> CommandKind {
        match self {
            Plan::Cost(_) => CommandKind::Cost,
            Plan::Aggregate(_) => CommandKind::Aggregate,
            Plan::Reserve(_) => CommandKind::Reserve,
            Plan::Discretize(_) => CommandKind::Discretize,
        }
    }
}

fn config_err(e: serde_json::Error) -> Error {
    Error::config("config", e.to_string())
}

/// Determines the command from an explicit `command` key or from the top-level keys.
fn infer_kind(doc: &Value) -> Result<CommandKind> {
    let obj = doc
        .as_object()
        .ok_or_else(|| Error::config("config", "the document must be a JSON object"))?;
    if let Some(c) = obj.get("command") {
        let name = c.as_str().ok_or_else(|| Error::config("command", "must be a string"))?;
        return CommandKind::from_name(name);
    }
    if obj.contains_key("frequency") {
        Ok(CommandKind::Cost)
    } else if obj.contains_key("margins") {
        Ok(CommandKind::Aggregate)
    } else if obj.contains_key("reservingmodel") || obj.contains_key("data") {
        Ok(CommandKind::Reserve)
    } else if obj.contains_key("severity") {
        Ok(CommandKind::Discretize)
    } else {
        Err(Error::config(
            "command",
            "cannot infer the command; add a `command` key",
        ))
    }
}

/// Reads and resolves a configuration file. `expected` is the subcommand being run
/// (None for `validate`); `seed` overrides the configured random state.
pub fn load(path: &Path, expected: Option<CommandKind>, seed: Option<u64>) -> Result<Plan> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let doc: Value = serde_json::from_str(&text).map_err(config_err)?;
    let base = path.parent().unwrap_or(Path::new("."));
    resolve(doc, base, expected, seed)
}

pub fn resolve(doc: Value, base: &Path, expected: Option<CommandKind>, seed: Option<u64>) -> Result<Plan> {
    let kind = infer_kind(&doc)?;
    if let Some(e) = expected {
        if e != kind {
            return Err(Error::config(
                "command",
                format!("this configuration is for `{}`, not `{}`", kind.name(), e.name()),
            ));
        }
    }
    match kind {
        CommandKind::Cost => cost_plan(serde_json::from_value(doc).map_err(config_err)?, seed).map(Plan::Cost),
        CommandKind::Aggregate => {
            aggregate_plan(serde_json::from_value(doc).map_err(config_err)?, seed).map(|p| Plan::Aggregate(Box::new(p)))
        }
        CommandKind::Reserve => {
            reserve_plan(serde_json::from_value(doc).map_err(config_err)?, base, seed).map(Plan::Reserve)
        }
        CommandKind::Discretize => {
            discretize_plan(serde_json::from_value(doc).map_err(config_err)?).map(Plan::Discretize)
        }
    }
}

fn layer(idx: usize, s: &LayerSpec) -> Result<Layer> {
    let field = |name: &str| format!("policystructure.layers[{idx}].{name}");
    let cover = bound(&field("cover"), &s.cover, f64::INFINITY)?;
    let aggr_cover = match &s.aggr_cover {
        None => None,
        some => Some(bound(&field("aggr_cover"), some, f64::INFINITY)?),
    };
    let percentages = match &s.reinst_percentage {
        None => Vec::new(),
        Some(Percentages::One(p)) => vec![*p],
        Some(Percentages::Many(v)) => v.clone(),
    };
    Layer::new(
        s.deductible.unwrap_or(0.0),
        cover,
        s.aggr_deductible.unwrap_or(0.0),
        aggr_cover,
        s.n_reinst,
        percentages,
        s.share.unwrap_or(1.0),
    )
    .map_err(|e| match e {
        Error::Structure(m) => Error::Structure(format!("layer {}: {m}", idx + 1)),
        e => e,
    })
}

fn cost_plan(c: CostConfig, seed: Option<u64>) -> Result<CostPlan> {
    let dist = Discrete::from_name(&c.frequency.dist, &c.frequency.par)?;
    let frequency = Frequency::new(dist, c.frequency.threshold)?;
    let severity = Continuous::from_name(&c.severity.dist, &c.severity.par)?;
    let layers = match &c.policystructure {
        Some(p) => p
            .layers
            .iter()
            .enumerate()
            .map(|(i, l)| layer(i, l))
            .collect::<Result<Vec<_>>>()?,
        None => vec![Layer::default()],
    };
    let policystructure = PolicyStructure::new(layers)?;
    let defaults = EngineConfig::default();
    let engine = EngineConfig {
        aggr_loss_dist_method: c
            .aggr_loss_dist_method
            .as_deref()
            .map(AggregateMethod::from_name)
            .transpose()?,
        n_aggr_dist_nodes: c.n_aggr_dist_nodes.unwrap_or(defaults.n_aggr_dist_nodes),
        sev_discr_method: c
            .sev_discr_method
            .as_deref()
            .map(DiscretizationMethod::from_name)
            .transpose()?
            .unwrap_or(defaults.sev_discr_method),
        n_sev_discr_nodes: c.n_sev_discr_nodes,
        sev_discr_step: c.sev_discr_step,
        n_sim: c.n_sim.unwrap_or(defaults.n_sim),
        random_state: seed.or(c.random_state).unwrap_or(defaults.random_state),
    };
    if engine.n_aggr_dist_nodes < 2 {
        return Err(Error::param("n_aggr_dist_nodes", "must be ≥ 2"));
    }
    if engine.aggr_loss_dist_method == Some(AggregateMethod::Fft) && !engine.n_aggr_dist_nodes.is_power_of_two() {
        return Err(Error::param(
            "n_aggr_dist_nodes",
            format!("must be a power of two for FFT, got {}", engine.n_aggr_dist_nodes),
        ));
    }
    if let Some(h) = engine.sev_discr_step {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::param("sev_discr_step", format!("must be > 0, got {h}")));
        }
    }
    if engine.aggr_loss_dist_method == Some(AggregateMethod::Mc) && engine.n_sim == 0 {
        return Err(Error::param("n_sim", "must be ≥ 1"));
    }
    check_levels("quantiles", &c.quantiles)?;
    let lattices = match engine.aggr_loss_dist_method {
        Some(AggregateMethod::Fft) | Some(AggregateMethod::Recursive) => policystructure
            .layers
            .iter()
            .map(|l| severity_lattice(&severity, l, &engine).map(Some))
            .collect::<Result<Vec<_>>>()?,
        _ => vec![None; policystructure.length()],
    };
    Ok(CostPlan {
        frequency,
        frequency_spec: c.frequency,
        severity,
        severity_spec: c.severity,
        policystructure,
        engine,
        lattices,
        quantiles: c.quantiles,
    })
}

fn check_levels(field: &str, q: &[f64]) -> Result<()> {
    match q.iter().find(|q| !(**q > 0.0 && **q < 1.0)) {
        Some(bad) => Err(Error::config(
            field,
            format!("quantile levels must lie in (0, 1), got {bad}"),
        )),
        None => Ok(()),
    }
}

fn aggregate_plan(c: AggregateConfig, seed: Option<u64>) -> Result<AggregatePlan> {
    let margins = Margins::from_names(&c.margins.dist, &c.margins.par)?;
    let copula = Copula::from_name(&c.copula.dist, &c.copula.par)?;
    let n_iter = c.n_iter.unwrap_or(7);
    let model = LossAggregation::new(margins, copula, n_iter)?;
    let method = AggregationMethod::from_name(c.method.as_deref().unwrap_or("aep"))?;
    match method {
        AggregationMethod::Aep => model.check_aep(n_iter)?,
        AggregationMethod::Mc => match c.n_sim {
            None => return Err(Error::config("n_sim", "required when method is `mc`")),
            Some(0) => return Err(Error::param("n_sim", "must be ≥ 1")),
            Some(_) => {}
        },
    }
    if let Some(x) = c.x.iter().find(|x| x.is_nan()) {
        return Err(Error::config(
            "x",
            format!("evaluation points must be numbers, got {x}"),
        ));
    }
    check_levels("q", &c.q)?;
    Ok(AggregatePlan {
        model,
        method,
        n_sim: c.n_sim,
        random_state: seed.or(c.random_state).unwrap_or(0),
        x: c.x.clone(),
        q: c.q.clone(),
        plot_points: c.plot_points.unwrap_or(50),
        spec: c,
    })
}

fn reserve_plan(c: ReserveConfig, base: &Path, seed: Option<u64>) -> Result<ReservePlan> {
    let path = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
    let d = &c.data;
    let data = TriangleSet::new(
        Triangle::read_csv(path(&d.incremental_payments))?,
        Triangle::read_csv(path(&d.payments_number))?,
        Triangle::read_csv(path(&d.cased_payments))?,
        Triangle::read_csv(path(&d.open_claims_number))?,
        read_vector_csv(path(&d.reported_claims))?,
    )?;
    let m = &c.reservingmodel;
    let czj = match &m.czj {
        None => Vec::new(),
        Some(VectorSpec::Values(v)) => v.clone(),
        Some(VectorSpec::File(p)) => read_vector_csv(path(p))?,
    };
    let method = ReservingMethod::from_name(&m.reserving_method)?;
    let model = ReservingModel::new(
        m.tail,
        method,
        m.claims_inflation.clone(),
        m.mixing_fq_par,
        m.mixing_sev_par,
        czj,
    )?;
    let ntr_sim = c.ntr_sim.unwrap_or(1000);
    if method == ReservingMethod::Crm {
        if ntr_sim < 2 {
            return Err(Error::param(
                "ntr_sim",
                format!("at least 2 simulations are needed, got {ntr_sim}"),
            ));
        }
        if model.czj.len() < data.horizon() + 1 {
            return Err(Error::config(
                "reservingmodel.czj",
                format!(
                    "needs one value per development period ({}), got {}",
                    data.horizon() + 1,
                    model.czj.len()
                ),
            ));
        }
    }
    check_levels("q", &c.q)?;
    Ok(ReservePlan {
        data,
        model,
        ntr_sim,
        random_state: seed.or(c.random_state).unwrap_or(0),
        q: c.q,
    })
}

fn discretize_plan(c: DiscretizeConfig) -> Result<DiscretizePlan> {
    let severity = Continuous::from_name(&c.severity.dist, &c.severity.par)?;
    let method = DiscretizationMethod::from_name(&c.discr_method)?;
    if c.n_discr_nodes < 2 {
        return Err(Error::param(
            "n_discr_nodes",
            format!("must be ≥ 2, got {}", c.n_discr_nodes),
        ));
    }
    if !(c.discr_step > 0.0 && c.discr_step.is_finite()) {
        return Err(Error::param("discr_step", format!("must be > 0, got {}", c.discr_step)));
    }
    let deductible = c.deductible.unwrap_or(0.0);
    if !(deductible >= 0.0 && deductible.is_finite()) {
        return Err(Error::param("deductible", format!("must be ≥ 0, got {deductible}")));
    }
    let cover = bound("cover", &c.cover, f64::INFINITY)?;
    if !(cover > 0.0) {
        return Err(Error::param("cover", format!("must be > 0, got {cover}")));
    }
    Ok(DiscretizePlan {
        severity,
        method,
        n_discr_nodes: c.n_discr_nodes,
        discr_step: c.discr_step,
        deductible,
        cover,
        severity_spec: c.severity,
    })
}
