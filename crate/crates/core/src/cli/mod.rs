//! Command-line front end: resolves a JSON configuration, runs it and writes the
//! summary, results (CSV and JSON) and plot data.

pub mod config;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::aggregate_engine::AggregateMethod;
use crate::discretize::discretize;
use crate::error::{Error, Result};
use crate::lossaggregation::AggregationMethod;
use crate::lossmodel::{fmt_num, table, LossModel};
use crate::lossreserve::LossReserve;
use config::{AggregatePlan, CommandKind, CostPlan, DiscretizePlan, Plan, ReservePlan};

#[derive(Debug, Parser)]
#[command(
    name = "riskkit",
    version,
    about = "Aggregate losses, reinsurance costing, dependent sums and claims reserving"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Aggregate loss distribution and layer costing
    Cost(RunArgs),
    /// Distribution of a sum of dependent losses
    Aggregate(RunArgs),
    /// Claims reserve from run-off triangles
    Reserve(RunArgs),
    /// Severity discretisation
    Discretize(RunArgs),
    /// Check a configuration without running it
    Validate(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// JSON configuration file
    #[arg(long)]
    pub config: PathBuf,
    /// Directory receiving summary.txt, results.csv, results.json and plot_data.csv
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// What to print on stdout
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Overrides the configured random state
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Table,
}

/// Rendered artifacts of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub summary: String,
    pub csv: String,
    pub json: String,
    pub plot: Option<String>,
}

impl Artifacts {
    pub fn stdout(&self, format: Format) -> &str {
        match format {
            Format::Table => &self.summary,
            Format::Csv => &self.csv,
            Format::Json => &self.json,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        let put = |name: &str, body: &str| {
            std::fs::write(dir.join(name), body).map_err(|e| Error::Io(format!("{}: {e}", dir.join(name).display())))
        };
        put("summary.txt", &self.summary)?;
        put("results.csv", &self.csv)?;
        put("results.json", &self.json)?;
        if let Some(p) = &self.plot {
            put("plot_data.csv", p)?;
        }
        Ok(())
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable results");
    s.push('\n');
    s
}

/// Shortest round-trip representation, scientific outside [1e-5, 1e16).
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Runs a resolved plan.
pub fn execute(plan: &Plan) -> Result<Artifacts> {
    match plan {
        Plan::Cost(p) => run_cost(p),
        Plan::Aggregate(p) => run_aggregate(p),
        Plan::Reserve(p) => run_reserve(p),
        Plan::Discretize(p) => run_discretize(p),
    }
}

#[derive(Serialize)]
struct LayerRow {
    layer: usize,
    deductible: f64,
    cover: Option<f64>,
    aggr_deductible: f64,
    aggr_cover: Option<f64>,
    n_reinst: Option<u32>,
    share: f64,
    pure_premium: Option<f64>,
    pure_premium_dist: Option<f64>,
    mean: Option<f64>,
    std: Option<f64>,
    skewness: Option<f64>,
    mean_dist: Option<f64>,
    std_dist: Option<f64>,
    skewness_dist: Option<f64>,
    sev_discr_step: Option<f64>,
    n_sev_discr_nodes: Option<usize>,
    quantiles: Vec<(f64, f64)>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn run_cost(p: &CostPlan) -> Result<Artifacts> {
    let lm = LossModel::new(
        p.frequency.clone(),
        p.severity.clone(),
        p.policystructure.clone(),
        p.engine.clone(),
    )?;
    let mut summary = String::new();
    let mut rows = Vec::new();
    for (idx, layer) in lm.policystructure.layers.iter().enumerate() {
        summary.push_str(&lm.policy_layer_summary(idx)?);
        summary.push('\n');
        if lm.engine.aggr_loss_dist_method.is_some() {
            summary.push_str(&lm.aggr_loss_specs(idx)?);
            summary.push('\n');
        }
        summary.push_str(&lm.costing_summary(idx)?);
        summary.push('\n');
        let closed = lm.moments(idx, false).ok();
        let dist = lm.moments(idx, true).ok();
        let r = &lm.results[idx];
        let quantiles = match &r.dist {
            Some(_) => p
                .quantiles
                .iter()
                .map(|&q| lm.ppf(idx, q).map(|v| (q, v)))
                .collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
        };
        rows.push(LayerRow {
            layer: idx + 1,
            deductible: layer.deductible,
            cover: finite(layer.cover),
            aggr_deductible: layer.aggr_deductible,
            aggr_cover: finite(layer.aggr_cover),
            n_reinst: layer.n_reinst,
            share: layer.share,
            pure_premium: r.pure_premium,
            pure_premium_dist: r.pure_premium_dist,
            mean: closed.map(|m| m.mean),
            std: closed.map(|m| m.std),
            skewness: closed.map(|m| m.skewness),
            mean_dist: dist.map(|m| m.mean),
            std_dist: dist.map(|m| m.std),
            skewness_dist: dist.map(|m| m.skewness),
            sev_discr_step: r.lattice.map(|l| l.h),
            n_sev_discr_nodes: r.lattice.map(|l| l.m),
            quantiles,
        });
    }
    let mut csv = String::from(
        "layer,deductible,cover,aggr_deductible,aggr_cover,n_reinst,share,pure_premium,pure_premium_dist,\
         mean,std,skewness,mean_dist,std_dist,skewness_dist,sev_discr_step,n_sev_discr_nodes\n",
    );
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.layer,
            num(r.deductible),
            r.cover.map_or("inf".into(), num),
            num(r.aggr_deductible),
            r.aggr_cover.map_or("inf".into(), num),
            r.n_reinst.map(|k| k.to_string()).unwrap_or_default(),
            num(r.share),
            opt(r.pure_premium),
            opt(r.pure_premium_dist),
            opt(r.mean),
            opt(r.std),
            opt(r.skewness),
            opt(r.mean_dist),
            opt(r.std_dist),
            opt(r.skewness_dist),
            opt(r.sev_discr_step),
            r.n_sev_discr_nodes.map(|m| m.to_string()).unwrap_or_default(),
        ));
    }
    let json = to_json(&json!({
        "command": "cost",
        "aggr_loss_dist_method": lm.engine.aggr_loss_dist_method.map(|m| m.name()),
        "layers": rows,
        "warnings": lm.all_warnings(),
    }));
    Ok(Artifacts {
        summary,
        csv,
        json,
        plot: None,
    })
}

#[derive(Serialize)]
struct CdfRow {
    x: f64,
    cdf: f64,
    error: Option<f64>,
}

fn run_aggregate(p: &AggregatePlan) -> Result<Artifacts> {
    let mut la = p.model.clone();
    if let Some(n) = p.n_sim {
        la.dist_calculate(n, p.random_state)?;
    }
    let cdf = |x: f64| -> Result<CdfRow> {
        match p.method {
            AggregationMethod::Aep => {
                let e = la.aep_cdf_with_error(x, la.n_iter)?;
                Ok(CdfRow {
                    x,
                    cdf: e.value,
                    error: Some(e.error),
                })
            }
            AggregationMethod::Mc => Ok(CdfRow {
                x,
                cdf: la.mc_cdf(x)?,
                error: None,
            }),
        }
    };
    let cdfs = p.x.iter().map(|&x| cdf(x)).collect::<Result<Vec<_>>>()?;
    let ppfs =
        p.q.iter()
            .map(|&q| la.ppf(q, p.method).map(|v| (q, v)))
            .collect::<Result<Vec<_>>>()?;

    let method = p.method.name();
    let mut rows: Vec<(String, String)> = vec![
        ("Copula".into(), la.copula.name().into()),
        ("Dimension".into(), la.dim().to_string()),
    ];
    rows.extend(
        p.spec
            .margins
            .dist
            .iter()
            .enumerate()
            .map(|(i, d)| (format!("Margin {}", i + 1), d.clone())),
    );
    rows.push(("Method".into(), method.into()));
    match p.method {
        AggregationMethod::Aep => rows.push(("AEP iterations".into(), la.n_iter.to_string())),
        AggregationMethod::Mc => {
            rows.push(("Number of simulation".into(), p.n_sim.unwrap_or(0).to_string()));
            rows.push(("Random state".into(), p.random_state.to_string()));
        }
    }
    for r in &cdfs {
        rows.push((format!("P(S <= {})", fmt_num(r.x)), format!("{:.10}", r.cdf)));
    }
    for (q, v) in &ppfs {
        rows.push((format!("Quantile at {}", fmt_num(*q)), format!("{v:.6}")));
    }
    let summary = table("Loss Aggregation Summary", "Quantity", 30, &rows);

    let mut csv = String::from("kind,arg,value,error\n");
    for r in &cdfs {
        csv.push_str(&format!("cdf,{},{},{}\n", num(r.x), num(r.cdf), opt(r.error)));
    }
    for (q, v) in &ppfs {
        csv.push_str(&format!("ppf,{},{},\n", num(*q), num(*v)));
    }

    let plot = if p.plot_points >= 2 {
        let upper = match p.method {
            AggregationMethod::Mc => la.ppf(0.999, AggregationMethod::Mc)?,
            AggregationMethod::Aep => la
                .margins
                .dists
                .iter()
                .map(|m| m.ppf(0.99))
                .collect::<Result<Vec<_>>>()?
                .iter()
                .sum(),
        };
        let mut out = String::from("x,cdf\n");
        for k in 0..p.plot_points {
            let x = upper * k as f64 / (p.plot_points - 1) as f64;
            out.push_str(&format!("{},{}\n", num(x), num(cdf(x)?.cdf)));
        }
        Some(out)
    } else {
        None
    };
    let moments = match la.mc_sample() {
        Ok(_) => Some(json!({"mean": la.mean()?, "std": la.std()?, "skewness": la.skewness()?})),
        Err(_) => None,
    };
    let json = to_json(&json!({
        "command": "aggregate",
        "method": method,
        "copula": la.copula.name(),
        "margins": p.spec.margins.dist,
        "n_iter": la.n_iter,
        "n_sim": p.n_sim,
        "random_state": p.random_state,
        "cdf": cdfs,
        "ppf": ppfs,
        "mc_moments": moments,
    }));
    Ok(Artifacts {
        summary,
        csv,
        json,
        plot,
    })
}

fn run_reserve(p: &ReservePlan) -> Result<Artifacts> {
    let lr = LossReserve::new(p.data.clone(), p.model.clone(), p.ntr_sim, p.random_state)?;
    let mut summary = lr.summary();
    let quantiles = if lr.crm.is_some() {
        p.q.iter()
            .map(|&q| lr.ppf(q).map(|v| (q, v)))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    if !quantiles.is_empty() {
        let rows: Vec<(String, String)> = quantiles
            .iter()
            .map(|(q, v)| (format!("Quantile at {}", fmt_num(*q)), format!("{v:.2}")))
            .collect();
        summary.push('\n');
        summary.push_str(&table("Reserve Quantiles", "Quantity", 30, &rows));
    }
    let json = to_json(&json!({
        "command": "reserve",
        "reserving_method": p.model.reserving_method.name(),
        "ntr_sim": lr.crm.as_ref().map(|c| c.ntr_sim),
        "random_state": lr.crm.as_ref().map(|c| c.seed),
        "reserve": lr.reserve(),
        "std": lr.std(),
        "coeff_variation": lr.coeff_variation(),
        "fisher_lange_reserve": lr.fl.reserve,
        "by_period": lr.report(),
        "quantiles": quantiles,
        "alpha": lr.fl.alpha,
        "settlement_speed": lr.fl.settlement_speed,
        "warnings": lr.warnings(),
    }));
    Ok(Artifacts {
        summary,
        csv: lr.report_csv(),
        json,
        plot: None,
    })
}

fn run_discretize(p: &DiscretizePlan) -> Result<Artifacts> {
    let sev = discretize(
        &p.severity,
        p.method,
        p.n_discr_nodes,
        p.discr_step,
        p.deductible,
        p.cover,
    )?;
    let nodes = sev.nodes();
    let cdf = sev.cdf();
    let mut rows: Vec<(String, String)> = vec![
        ("Severity".into(), p.severity.name().into()),
        ("Discretisation method".into(), p.method.name().into()),
        ("Discretisation step".into(), fmt_num(sev.h)),
        ("Number of nodes".into(), sev.m().to_string()),
        ("Deductible".into(), fmt_num(p.deductible)),
        ("Cover".into(), fmt_num(p.cover)),
        ("Discretised mean".into(), format!("{:.10}", sev.mean())),
    ];
    if p.deductible == 0.0 && p.cover.is_infinite() {
        if let Ok(m) = p.severity.mean() {
            rows.push(("Severity mean".into(), format!("{m:.10}")));
        }
    }
    rows.push(("Mass beyond last node".into(), format!("{:.3e}", sev.tail_mass)));
    let summary = table("Severity Discretisation", "Quantity", 30, &rows);
    let mut csv = String::from("x,fj\n");
    let mut plot = String::from("x,cdf\n");
    for ((x, f), c) in nodes.iter().zip(&sev.fj).zip(&cdf) {
        csv.push_str(&format!("{},{}\n", num(*x), num(*f)));
        plot.push_str(&format!("{},{}\n", num(*x), num(*c)));
    }
    let json = to_json(&json!({
        "command": "discretize",
        "discr_method": p.method.name(),
        "h": sev.h,
        "m": sev.m(),
        "mean": sev.mean(),
        "tail_mass": sev.tail_mass,
        "fj": sev.fj,
        "warnings": sev.warnings,
    }));
    Ok(Artifacts {
        summary,
        csv,
        json,
        plot: Some(plot),
    })
}

fn par_list(par: &crate::distributions::ParamMap) -> String {
    par.iter()
        .map(|(k, v)| format!("{k}={}", fmt_num(*v)))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Human-readable description of a resolved plan, without computing anything.
pub fn describe(plan: &Plan) -> String {
    let mut out = format!("configuration OK: {}\n", plan.kind().name());
    match plan {
        Plan::Cost(p) => {
            let f = &p.frequency_spec;
            out.push_str(&format!(
                "frequency: {} ({}), threshold {}, pgf available\n",
                p.frequency.dist.name(),
                par_list(&f.par),
                fmt_num(f.threshold)
            ));
            out.push_str(&format!(
                "severity: {} ({})\n",
                p.severity.name(),
                par_list(&p.severity_spec.par)
            ));
            for (i, l) in p.policystructure.layers.iter().enumerate() {
                out.push_str(&format!(
                    "layer {}: deductible {}, cover {}, aggr_deductible {}, aggr_cover {}, share {}",
                    i + 1,
                    fmt_num(l.deductible),
                    fmt_num(l.cover),
                    fmt_num(l.aggr_deductible),
                    fmt_num(l.aggr_cover),
                    fmt_num(l.share)
                ));
                if let Some(k) = l.n_reinst {
                    let pct: Vec<String> = l.reinst_percentage.iter().map(|x| fmt_num(*x)).collect();
                    out.push_str(&format!(", n_reinst {k}, reinst_percentage [{}]", pct.join(", ")));
                }
                out.push('\n');
                if let Some(lat) = p.lattices[i] {
                    out.push_str(&format!(
                        "  sev_discr_step {} (n_sev_discr_nodes {})\n",
                        fmt_num(lat.h),
                        lat.m
                    ));
                }
            }
            let e = &p.engine;
            match e.aggr_loss_dist_method {
                None => out.push_str("aggr_loss_dist_method: none (aggregate distribution omitted)\n"),
                Some(AggregateMethod::Mc) => out.push_str(&format!(
                    "aggr_loss_dist_method: mc, n_sim {}, random_state {}\n",
                    e.n_sim, e.random_state
                )),
                Some(m) => out.push_str(&format!(
                    "aggr_loss_dist_method: {}, n_aggr_dist_nodes {}, sev_discr_method {}\n",
                    m.name(),
                    e.n_aggr_dist_nodes,
                    e.sev_discr_method.name()
                )),
            }
        }
        Plan::Aggregate(p) => {
            for (name, par) in p.spec.margins.dist.iter().zip(&p.spec.margins.par) {
                out.push_str(&format!("margin: {name} ({})\n", par_list(par)));
            }
            out.push_str(&format!("copula: {} (dim {})\n", p.model.copula.name(), p.model.dim()));
            match p.method {
                AggregationMethod::Aep => out.push_str(&format!("method: aep, n_iter {}\n", p.model.n_iter)),
                AggregationMethod::Mc => out.push_str(&format!(
                    "method: mc, n_sim {}, random_state {}\n",
                    p.n_sim.unwrap_or(0),
                    p.random_state
                )),
            }
            out.push_str(&format!(
                "evaluation points: {}, quantile levels: {}\n",
                p.x.len(),
                p.q.len()
            ));
        }
        Plan::Reserve(p) => {
            out.push_str(&format!(
                "triangles: horizon {} ({} accident periods)\n",
                p.data.horizon(),
                p.data.horizon() + 1
            ));
            let m = &p.model;
            out.push_str(&format!(
                "reserving_method: {}, tail {}\n",
                m.reserving_method.name(),
                m.tail
            ));
            if m.reserving_method == crate::lossreserve::ReservingMethod::Crm {
                out.push_str(&format!(
                    "mixing_fq_par {}, mixing_sev_par {}, ntr_sim {}, random_state {}\n",
                    fmt_num(m.mixing_fq_par.unwrap_or(0.0)),
                    fmt_num(m.mixing_sev_par.unwrap_or(0.0)),
                    p.ntr_sim,
                    p.random_state
                ));
            }
        }
        Plan::Discretize(p) => {
            out.push_str(&format!(
                "severity: {} ({})\n",
                p.severity.name(),
                par_list(&p.severity_spec.par)
            ));
            let (m, h) = crate::discretize::lattice_for_cover(p.n_discr_nodes, p.discr_step, p.cover);
            out.push_str(&format!(
                "discr_method: {}, n_discr_nodes {m}, discr_step {}, deductible {}, cover {}\n",
                p.method.name(),
                fmt_num(h),
                fmt_num(p.deductible),
                fmt_num(p.cover)
            ));
        }
    }
    out
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("RISKKIT_LOG", "warn");
    let _ = env_logger::Builder::from_env(env)
        .format(|buf, record| {
            let level = match record.level() {
                log::Level::Warn => "WARNING",
                log::Level::Error => "ERROR",
                log::Level::Info => "INFO",
                log::Level::Debug => "DEBUG",
                log::Level::Trace => "TRACE",
            };
            writeln!(buf, "{level}|{}|{}", record.target(), record.args())
        })
        .target(env_logger::Target::Stderr)
        .try_init();
}

fn report_error(e: &Error) {
    let body = json!({"error": {"kind": e.kind(), "message": e.to_string()}});
    eprintln!("{body}");
}

fn run_command(cli: &Cli) -> Result<()> {
    let (args, kind) = match &cli.command {
        Command::Cost(a) => (a, Some(CommandKind::Cost)),
        Command::Aggregate(a) => (a, Some(CommandKind::Aggregate)),
        Command::Reserve(a) => (a, Some(CommandKind::Reserve)),
        Command::Discretize(a) => (a, Some(CommandKind::Discretize)),
        Command::Validate(a) => (a, None),
    };
    let plan = config::load(&args.config, kind, args.seed)?;
    let mut stdout = std::io::stdout().lock();
    if kind.is_none() {
        let report = describe(&plan);
        if let Some(dir) = &args.out {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join("validate.txt"), &report)?;
        }
        return emit(&mut stdout, &report);
    }
    let artifacts = execute(&plan)?;
    if let Some(dir) = &args.out {
        artifacts.write(dir)?;
    }
    emit(&mut stdout, artifacts.stdout(args.format))
}

/// Writes to stdout, treating a closed pipe (e.g. `| head`) as success.
fn emit(out: &mut impl Write, text: &str) -> Result<()> {
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn main() -> i32 {
    init_logging();
    let cli = Cli::parse();
    match run_command(&cli) {
        Ok(()) => 0,
        Err(e) => {
            report_error(&e);
            1
        }
    }
}
