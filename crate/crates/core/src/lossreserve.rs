//! Claims reserving on run-off triangles: the Fisher-Lange average-cost method and
//! the collective risk model with gamma structure variables on counts and severities.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use rand_distr::{Distribution, Gamma, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result, Warning};
use crate::rng::stream;

const MODULE: &str = "lossreserve";

/// Upper run-off triangle: row `i` holds development periods `0..=J-i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Triangle {
    rows: Vec<Vec<f64>>,
}

impl Triangle {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::Data(format!(
                "a triangle needs at least two accident periods, got {}",
                rows.len()
            )));
        }
        let horizon = rows.len() - 1;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != horizon + 1 - i {
                return Err(Error::Data(format!(
                    "accident period {i} has {} cells, expected {}",
                    row.len(),
                    horizon + 1 - i
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Data(format!("cell ({i}, {j}) is not a finite number")));
            }
        }
        Ok(Triangle { rows })
    }

    pub fn from_fn(horizon: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        Triangle::new(
            (0..=horizon)
                .map(|i| (0..=horizon - i).map(|j| f(i, j)).collect())
                .collect(),
        )
    }

    /// The horizon J (number of accident periods minus one).
    pub fn horizon(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// The latest diagonal value of accident period `i`.
    pub fn latest(&self, i: usize) -> f64 {
        self.rows[i][self.horizon() - i]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn scaled(&self, k: f64) -> Triangle {
        Triangle {
            rows: self.rows.iter().map(|r| r.iter().map(|v| v * k).collect()).collect(),
        }
    }

    fn cells(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, &v)| (i, j, v)))
    }

    /// Parses CSV in long format (header `i,j,value`) or wide format
    /// (one line per accident period, lower cells absent or empty).
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let records = read_records(reader)?;
        let is_long = records
            .first()
            .is_some_and(|r| r.len() == 3 && r[0] == "i" && r[1] == "j" && r[2] == "value");
        if is_long {
            from_long(&records[1..])
        } else {
            from_wide(&records)
        }
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Triangle::from_csv_reader(file).map_err(|e| match e {
            Error::Data(m) => Error::Data(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    pub fn to_long_csv(&self) -> String {
        let mut out = String::from("i,j,value\n");
        for (i, j, v) in self.cells() {
            out.push_str(&format!("{i},{j},{v}\n"));
        }
        out
    }
}

fn read_records<R: Read>(reader: R) -> Result<Vec<Vec<String>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Data(format!("malformed CSV: {e}")))?;
        let mut fields: Vec<String> = rec.iter().map(str::to_string).collect();
        while fields.last().is_some_and(|f| f.is_empty()) {
            fields.pop();
        }
        if !fields.is_empty() {
            out.push(fields);
        }
    }
    Ok(out)
}

fn parse_num(s: &str, line: usize) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::Data(format!("line {line}: `{s}` is not a number")))
}

fn parse_index(s: &str, line: usize) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|_| Error::Data(format!("line {line}: `{s}` is not a non-negative index")))
}

fn from_long(records: &[Vec<String>]) -> Result<Triangle> {
    let mut cells = BTreeMap::new();
    for (k, r) in records.iter().enumerate() {
        let line = k + 2;
        if r.len() != 3 {
            return Err(Error::Data(format!(
                "line {line}: expected `i,j,value`, got {} fields",
                r.len()
            )));
        }
        let (i, j, v) = (
            parse_index(&r[0], line)?,
            parse_index(&r[1], line)?,
            parse_num(&r[2], line)?,
        );
        if cells.insert((i, j), v).is_some() {
            return Err(Error::Data(format!("line {line}: duplicate cell ({i}, {j})")));
        }
    }
    let horizon = cells
        .keys()
        .map(|&(i, j)| i.max(j))
        .max()
        .ok_or_else(|| Error::Data("empty triangle".into()))?;
    if let Some(&(i, j)) = cells.keys().find(|&&(i, j)| i + j > horizon) {
        return Err(Error::Data(format!(
            "cell ({i}, {j}) lies below the latest diagonal (horizon {horizon}); lower cells must be absent"
        )));
    }
    let mut rows = Vec::with_capacity(horizon + 1);
    for i in 0..=horizon {
        let mut row = Vec::with_capacity(horizon + 1 - i);
        for j in 0..=horizon - i {
            row.push(
                *cells
                    .get(&(i, j))
                    .ok_or_else(|| Error::Data(format!("missing cell ({i}, {j})")))?,
            );
        }
        rows.push(row);
    }
    Triangle::new(rows)
}

fn from_wide(records: &[Vec<String>]) -> Result<Triangle> {
    let rows = records
        .iter()
        .enumerate()
        .map(|(k, r)| {
            r.iter()
                .map(|f| {
                    if f.is_empty() {
                        Err(Error::Data(format!("line {}: empty cell inside a row", k + 1)))
                    } else {
                        parse_num(f, k + 1)
                    }
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Triangle::new(rows)
}

/// Reads a per-period vector: lines of `value` or `index,value` with an optional header.
pub fn read_vector_csv(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let records = read_records(file)?;
    let body = match records.first() {
        Some(r) if r.iter().any(|f| f.parse::<f64>().is_err()) => &records[1..],
        _ => &records[..],
    };
    body.iter()
        .enumerate()
        .map(|(k, r)| match r.len() {
            1 => parse_num(&r[0], k + 1),
            2 => {
                let idx = parse_index(&r[0], k + 1)?;
                if idx != k {
                    return Err(Error::Data(format!(
                        "{}: index {idx} out of order at row {k}",
                        path.display()
                    )));
                }
                parse_num(&r[1], k + 1)
            }
            n => Err(Error::Data(format!("{}: row {k} has {n} fields", path.display()))),
        })
        .collect()
}

/// The run-off data of one portfolio, all triangles on the same index set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriangleSet {
    pub incremental_payments: Triangle,
    pub payments_number: Triangle,
    pub cased_payments: Triangle,
    pub open_claims_number: Triangle,
    /// Reported claims per accident period.
    pub reported_claims: Vec<f64>,
}

impl TriangleSet {
    pub fn new(
        incremental_payments: Triangle,
        payments_number: Triangle,
        cased_payments: Triangle,
        open_claims_number: Triangle,
        reported_claims: Vec<f64>,
    ) -> Result<Self> {
        let horizon = incremental_payments.horizon();
        for (name, t) in [
            ("payments_number", &payments_number),
            ("cased_payments", &cased_payments),
            ("open_claims_number", &open_claims_number),
        ] {
            if t.horizon() != horizon {
                return Err(Error::Data(format!(
                    "{name} has horizon {}, incremental_payments has {horizon}",
                    t.horizon()
                )));
            }
        }
        for (name, t) in [
            ("payments_number", &payments_number),
            ("open_claims_number", &open_claims_number),
        ] {
            if let Some((i, j, v)) = t.cells().find(|c| c.2 < 0.0) {
                return Err(Error::Data(format!("{name} cell ({i}, {j}) is negative ({v})")));
            }
        }
        if reported_claims.len() != horizon + 1 {
            return Err(Error::Dimension {
                expected: horizon + 1,
                got: reported_claims.len(),
            });
        }
        if let Some(i) = reported_claims.iter().position(|&d| !(d >= 0.0 && d.is_finite())) {
            return Err(Error::Data(format!(
                "reported_claims for accident period {i} must be finite and non-negative"
            )));
        }
        Ok(TriangleSet {
            incremental_payments,
            payments_number,
            cased_payments,
            open_claims_number,
            reported_claims,
        })
    }

    /// Builds the set from a triangle of reported counts, aggregated by accident period.
    pub fn with_reported_triangle(
        incremental_payments: Triangle,
        payments_number: Triangle,
        cased_payments: Triangle,
        open_claims_number: Triangle,
        reported: &Triangle,
    ) -> Result<Self> {
        TriangleSet::new(
            incremental_payments,
            payments_number,
            cased_payments,
            open_claims_number,
            reported.row_sums(),
        )
    }

    /// Loads a directory holding `incremental_payments.csv`, `payments_number.csv`,
    /// `cased_payments.csv`, `open_claims_number.csv` and `reported_claims.csv`.
    pub fn read_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        TriangleSet::new(
            Triangle::read_csv(dir.join("incremental_payments.csv"))?,
            Triangle::read_csv(dir.join("payments_number.csv"))?,
            Triangle::read_csv(dir.join("cased_payments.csv"))?,
            Triangle::read_csv(dir.join("open_claims_number.csv"))?,
            read_vector_csv(dir.join("reported_claims.csv"))?,
        )
    }

    pub fn horizon(&self) -> usize {
        self.incremental_payments.horizon()
    }

    /// Average payment m_{i,j} = x_{i,j}/n_{i,j}, defined where n_{i,j} > 0.
    pub fn average_cost(&self, i: usize, j: usize) -> Option<f64> {
        let n = self.payments_number.get(i, j);
        (n > 0.0).then(|| self.incremental_payments.get(i, j) / n)
    }

    /// Scales payment amounts and case reserves by `k`, leaving counts unchanged.
    pub fn scaled_amounts(&self, k: f64) -> TriangleSet {
        TriangleSet {
            incremental_payments: self.incremental_payments.scaled(k),
            cased_payments: self.cased_payments.scaled(k),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReservingMethod {
    FisherLange,
    Crm,
}

impl ReservingMethod {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "fisher_lange" | "fisher-lange" => Ok(ReservingMethod::FisherLange),
            "crm" => Ok(ReservingMethod::Crm),
            _ => Err(Error::UnknownName {
                kind: "reserving method",
                name: name.into(),
            }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ReservingMethod::FisherLange => "fisher_lange",
            ReservingMethod::Crm => "crm",
        }
    }
}

/// Model assumptions. `claims_inflation` holds multiplicative factors 1 + δ_h for the
/// future calendar periods J+1, J+2, …; the last factor repeats and an empty vector
/// means no inflation. The mixing parameters are the standard deviations of the
/// unit-mean gamma structure variables on counts (q) and severities (ψ).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReservingModel {
    pub tail: bool,
    pub reserving_method: ReservingMethod,
    pub claims_inflation: Vec<f64>,
    pub mixing_fq_par: Option<f64>,
    pub mixing_sev_par: Option<f64>,
    pub czj: Vec<f64>,
}

impl ReservingModel {
    pub fn new(
        tail: bool,
        reserving_method: ReservingMethod,
        claims_inflation: Vec<f64>,
        mixing_fq_par: Option<f64>,
        mixing_sev_par: Option<f64>,
        czj: Vec<f64>,
    ) -> Result<Self> {
        if let Some(f) = claims_inflation.iter().find(|f| !(f.is_finite() && **f > 0.0)) {
            return Err(Error::param(
                "claims_inflation",
                format!("factors 1 + δ must be positive, got {f}"),
            ));
        }
        if let Some(c) = czj.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
            return Err(Error::param(
                "czj",
                format!("coefficients of variation must be non-negative, got {c}"),
            ));
        }
        if reserving_method == ReservingMethod::Crm {
            for (name, p) in [("mixing_fq_par", mixing_fq_par), ("mixing_sev_par", mixing_sev_par)] {
                match p {
                    Some(s) if s.is_finite() && s > 0.0 => {}
                    Some(s) => return Err(Error::param(name, format!("must be positive, got {s}"))),
                    None => return Err(Error::param(name, "required by the crm method")),
                }
            }
            if czj.is_empty() {
                return Err(Error::param("czj", "required by the crm method"));
            }
        }
        Ok(ReservingModel {
            tail,
            reserving_method,
            claims_inflation,
            mixing_fq_par,
            mixing_sev_par,
            czj,
        })
    }

    pub fn fisher_lange(tail: bool, claims_inflation: Vec<f64>) -> Result<Self> {
        ReservingModel::new(
            tail,
            ReservingMethod::FisherLange,
            claims_inflation,
            None,
            None,
            Vec::new(),
        )
    }

    pub fn crm(
        tail: bool,
        claims_inflation: Vec<f64>,
        mixing_fq_par: f64,
        mixing_sev_par: f64,
        czj: Vec<f64>,
    ) -> Result<Self> {
        ReservingModel::new(
            tail,
            ReservingMethod::Crm,
            claims_inflation,
            Some(mixing_fq_par),
            Some(mixing_sev_par),
            czj,
        )
    }

    /// Cumulative inflation from the evaluation date to calendar period `h` (> J).
    fn inflation(&self, horizon: usize, h: usize) -> f64 {
        (horizon + 1..=h)
            .map(|c| match self.claims_inflation.len() {
                0 => 1.0,
                n => self.claims_inflation[(c - horizon - 1).min(n - 1)],
            })
            .product()
    }
}

/// Fisher-Lange projections. Lower-triangle grids are `(J+1) × ncols` with zeros
/// on the observed cells; `ncols = J+2` when the tail is modelled.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FisherLange {
    pub horizon: usize,
    pub tail: bool,
    /// α_0, …, α_J with α_J = 1.
    pub alpha: Vec<f64>,
    /// Per accident period, the settlement speeds over its future development periods.
    pub settlement_speed: Vec<Vec<f64>>,
    pub average_cost: Vec<Vec<f64>>,
    pub payments_number: Vec<Vec<f64>>,
    pub reserve_by_period: Vec<f64>,
    pub reserve: f64,
    pub warnings: Vec<Warning>,
}

impl FisherLange {
    pub fn ncols(&self) -> usize {
        self.horizon + 1 + usize::from(self.tail)
    }

    /// Future development periods of accident period `i`.
    pub fn future(&self, i: usize) -> std::ops::Range<usize> {
        (self.horizon + 1 - i)..self.ncols()
    }

    pub fn future_cells(&self) -> Vec<(usize, usize)> {
        (0..=self.horizon)
            .flat_map(|i| self.future(i).map(move |j| (i, j)))
            .collect()
    }
}

/// τ_{i,j}: later payments plus claims still open, relative to claims open at (i, j).
fn alpha_vector(data: &TriangleSet, warnings: &mut Vec<Warning>) -> Result<Vec<f64>> {
    let jj = data.horizon();
    let n = &data.payments_number;
    let o = &data.open_claims_number;
    let mut alpha = vec![1.0; jj + 1];
    for (j, a) in alpha.iter_mut().enumerate().take(jj) {
        let mut taus = Vec::new();
        for i in 0..jj - j {
            let later: f64 = (j + 1..=jj - i).map(|h| n.get(i, h)).sum();
            let num = later + o.latest(i);
            let den = o.get(i, j);
            if den > 0.0 {
                taus.push(num / den);
            } else if num > 0.0 {
                return Err(Error::Data(format!(
                    "open_claims_number cell ({i}, {j}) is zero while {num} later payments or open claims exist"
                )));
            }
        }
        if taus.is_empty() {
            warnings.push(Warning::new(
                MODULE,
                "alpha_default",
                format!("no open claims in development period {j}; alpha set to 1"),
            ));
        } else {
            *a = taus.iter().sum::<f64>() / taus.len() as f64;
        }
    }
    Ok(alpha)
}

/// Settlement-speed weights from the latest diagonal, with counts rescaled to the
/// claim volume of the latest accident period: w_j = n_{J-j,j}·d_J/d_{J-j}.
fn settlement_weights(data: &TriangleSet, tail: bool) -> Result<Vec<f64>> {
    let jj = data.horizon();
    let d = &data.reported_claims;
    let mut w = Vec::with_capacity(jj + 2);
    for j in 0..=jj {
        let dj = d[jj - j];
        if dj <= 0.0 {
            return Err(Error::Data(format!(
                "reported_claims for accident period {} is zero",
                jj - j
            )));
        }
        w.push(data.payments_number.get(jj - j, j) * d[jj] / dj);
    }
    if tail {
        let (prev, last) = (w[jj - 1], w[jj]);
        let decay = if prev > 0.0 { (last / prev).min(1.0) } else { 1.0 };
        w.push(last * decay);
    }
    Ok(w)
}

/// Latest observed average cost in development period `j`, falling back to older
/// accident periods when the diagonal cell has no payments.
fn base_cost(data: &TriangleSet, j: usize, warnings: &mut Vec<Warning>) -> f64 {
    let jj = data.horizon();
    if let Some(m) = data.average_cost(jj - j, j) {
        return m;
    }
    for i in (0..jj - j).rev() {
        if let Some(m) = data.average_cost(i, j) {
            warnings.push(Warning::new(
                MODULE,
                "average_cost_fallback",
                format!(
                    "no payments in cell ({}, {j}); using the average cost of accident period {i}",
                    jj - j
                ),
            ));
            return m;
        }
    }
    warnings.push(Warning::new(
        MODULE,
        "average_cost_missing",
        format!("no payments observed in development period {j}; its future average cost is set to 0"),
    ));
    0.0
}

/// Fisher-Lange reserve. Settlement speeds of earlier accident periods renormalise
/// the latest-diagonal pattern over their remaining development periods
/// (Savelli and Clemente, 2014, p. 141).
pub fn fisher_lange(data: &TriangleSet, model: &ReservingModel) -> Result<FisherLange> {
    let jj = data.horizon();
    let mut warnings = Vec::new();
    if let Some((i, j, v)) = data.incremental_payments.cells().find(|c| c.2 < 0.0) {
        warnings.push(Warning::new(
            MODULE,
            "negative_increment",
            format!("incremental payment ({i}, {j}) is negative ({v})"),
        ));
    }
    let alpha = alpha_vector(data, &mut warnings)?;
    let w = settlement_weights(data, model.tail)?;
    let ncols = jj + 1 + usize::from(model.tail);

    let mut base: Vec<f64> = (0..=jj).map(|j| base_cost(data, j, &mut warnings)).collect();
    if model.tail {
        base.push(base[jj]);
    }

    let mut speed = Vec::with_capacity(jj + 1);
    let mut m_hat = vec![vec![0.0; ncols]; jj + 1];
    let mut n_hat = vec![vec![0.0; ncols]; jj + 1];
    let mut by_period = vec![0.0; jj + 1];
    for i in 0..=jj {
        let future = (jj + 1 - i)..ncols;
        let total: f64 = w[future.clone()].iter().sum();
        let v: Vec<f64> = if future.is_empty() {
            Vec::new()
        } else if total > 0.0 {
            w[future.clone()].iter().map(|x| x / total).collect()
        } else {
            let k = future.len();
            if data.open_claims_number.latest(i) > 0.0 {
                warnings.push(Warning::new(
                    MODULE,
                    "uniform_settlement",
                    format!("no payments on the settlement pattern for accident period {i}; spreading open claims uniformly"),
                ));
            }
            vec![1.0 / k as f64; k]
        };
        let expected = data.open_claims_number.latest(i) * alpha[jj - i];
        for (k, j) in future.enumerate() {
            n_hat[i][j] = expected * v[k];
            m_hat[i][j] = base[j] * model.inflation(jj, i + j);
            by_period[i] += n_hat[i][j] * m_hat[i][j];
        }
        speed.push(v);
    }
    Ok(FisherLange {
        horizon: jj,
        tail: model.tail,
        alpha,
        settlement_speed: speed,
        average_cost: m_hat,
        payments_number: n_hat,
        reserve: by_period.iter().sum(),
        reserve_by_period: by_period,
        warnings,
    })
}

/// Simulated reserves of the collective risk model.
#[derive(Debug, Clone, PartialEq)]
pub struct CrmSimulation {
    pub ntr_sim: usize,
    pub seed: u64,
    /// Total reserve per replication, in replication order.
    pub totals: Vec<f64>,
    /// Reserve per accident period: `by_period[i][k]` for replication k.
    pub by_period: Vec<Vec<f64>>,
    sorted: Vec<f64>,
}

fn gamma_unit_mean(sd: f64) -> Result<Gamma<f64>> {
    Gamma::new(sd.powi(-2), sd * sd).map_err(|e| Error::Numerical(format!("structure variable: {e}")))
}

/// Draws `ntr_sim` reserves: q, ψ ~ gamma with mean 1; per future cell
/// N ~ Poisson(n̂·q) and X = ψ·Σ Z with Z ~ gamma(shape ĉ⁻², scale ĉ²·m̂).
pub fn crm_reserve(fl: &FisherLange, model: &ReservingModel, ntr_sim: usize, seed: u64) -> Result<CrmSimulation> {
    if ntr_sim < 2 {
        return Err(Error::param(
            "ntr_sim",
            format!("at least 2 simulations are needed, got {ntr_sim}"),
        ));
    }
    let sd_q = model
        .mixing_fq_par
        .ok_or_else(|| Error::param("mixing_fq_par", "required by the crm method"))?;
    let sd_psi = model
        .mixing_sev_par
        .ok_or_else(|| Error::param("mixing_sev_par", "required by the crm method"))?;
    if model.czj.len() < fl.horizon + 1 {
        return Err(Error::Dimension {
            expected: fl.horizon + 1,
            got: model.czj.len(),
        });
    }
    let q_dist = gamma_unit_mean(sd_q)?;
    let psi_dist = gamma_unit_mean(sd_psi)?;
    let cells = fl.future_cells();
    let czj = |j: usize| model.czj[j.min(model.czj.len() - 1)];
    let periods = fl.horizon + 1;

    let draws: Vec<Vec<f64>> = (0..ntr_sim)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, k as u64);
            let q = q_dist.sample(&mut rng);
            let psi = psi_dist.sample(&mut rng);
            let mut out = vec![0.0; periods];
            for &(i, j) in &cells {
                let (n, m) = (fl.payments_number[i][j], fl.average_cost[i][j]);
                let lambda = n * q;
                if !(lambda > 0.0) || m == 0.0 {
                    continue;
                }
                let count = Poisson::new(lambda).map(|p| p.sample(&mut rng)).unwrap_or(0.0);
                if count == 0.0 {
                    continue;
                }
                let c = czj(j);
                let severity = if c == 0.0 {
                    count * m
                } else {
                    Gamma::new(count / (c * c), c * c * m)
                        .map(|g| g.sample(&mut rng))
                        .unwrap_or(count * m)
                };
                out[i] += psi * severity;
            }
            out
        })
        .collect();

    let mut by_period = vec![Vec::with_capacity(ntr_sim); periods];
    let mut totals = Vec::with_capacity(ntr_sim);
    for d in &draws {
        for (i, v) in d.iter().enumerate() {
            by_period[i].push(*v);
        }
        totals.push(d.iter().sum());
    }
    let mut sorted = totals.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(CrmSimulation {
        ntr_sim,
        seed,
        totals,
        by_period,
        sorted,
    })
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn sample_std(x: &[f64]) -> f64 {
    let m = mean(x);
    (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64).sqrt()
}

impl CrmSimulation {
    pub fn mean(&self) -> f64 {
        mean(&self.totals)
    }

    pub fn std(&self) -> f64 {
        sample_std(&self.totals)
    }

    pub fn period_means(&self) -> Vec<f64> {
        self.by_period.iter().map(|v| mean(v)).collect()
    }

    pub fn period_std(&self) -> Vec<f64> {
        self.by_period.iter().map(|v| sample_std(v)).collect()
    }

    /// Empirical quantile: the ⌈q·n⌉-th smallest simulated reserve.
    pub fn ppf(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::param("q", format!("must lie in [0, 1], got {q}")));
        }
        let n = self.sorted.len();
        let idx = ((q * n as f64).ceil() as usize).clamp(1, n) - 1;
        Ok(self.sorted[idx])
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }
}

/// One line of the reserve report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub accident_period: String,
    pub reserve: f64,
    /// Simulation dispersion (standard deviation across replications); 0 for Fisher-Lange.
    pub std: f64,
    pub cov: Option<f64>,
}

/// A reserving run: Fisher-Lange projections plus, for the crm method, the simulation.
#[derive(Debug, Clone)]
pub struct LossReserve {
    pub data: TriangleSet,
    pub model: ReservingModel,
    pub ntr_sim: usize,
    pub random_state: u64,
    pub fl: FisherLange,
    pub crm: Option<CrmSimulation>,
}

impl LossReserve {
    pub fn new(data: TriangleSet, model: ReservingModel, ntr_sim: usize, random_state: u64) -> Result<Self> {
        let fl = fisher_lange(&data, &model)?;
        let crm = match model.reserving_method {
            ReservingMethod::Crm => Some(crm_reserve(&fl, &model, ntr_sim, random_state)?),
            ReservingMethod::FisherLange => None,
        };
        Ok(LossReserve {
            data,
            model,
            ntr_sim,
            random_state,
            fl,
            crm,
        })
    }

    /// Mean reserve: the simulated mean for crm, the point estimate for Fisher-Lange.
    pub fn reserve(&self) -> f64 {
        self.crm.as_ref().map_or(self.fl.reserve, CrmSimulation::mean)
    }

    pub fn reserve_by_period(&self) -> Vec<f64> {
        self.crm
            .as_ref()
            .map_or_else(|| self.fl.reserve_by_period.clone(), CrmSimulation::period_means)
    }

    pub fn std_by_period(&self) -> Vec<f64> {
        self.crm
            .as_ref()
            .map_or_else(|| vec![0.0; self.fl.horizon + 1], CrmSimulation::period_std)
    }

    pub fn std(&self) -> f64 {
        self.crm.as_ref().map_or(0.0, CrmSimulation::std)
    }

    pub fn coeff_variation(&self) -> Option<f64> {
        let r = self.reserve();
        (r != 0.0).then(|| self.std() / r)
    }

    pub fn ppf(&self, q: f64) -> Result<f64> {
        self.dist()?.ppf(q)
    }

    pub fn dist(&self) -> Result<&CrmSimulation> {
        self.crm
            .as_ref()
            .ok_or_else(|| Error::NotComputed("the reserve distribution requires reserving_method `crm`".into()))
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.fl.warnings
    }

    pub fn report(&self) -> Vec<ReportRow> {
        let cov = |r: f64, s: f64| (r != 0.0).then(|| s / r);
        let mut rows: Vec<ReportRow> = self
            .reserve_by_period()
            .into_iter()
            .zip(self.std_by_period())
            .enumerate()
            .map(|(i, (r, s))| ReportRow {
                accident_period: i.to_string(),
                reserve: r,
                std: s,
                cov: cov(r, s),
            })
            .collect();
        let (r, s) = (self.reserve(), self.std());
        rows.push(ReportRow {
            accident_period: "Total".into(),
            reserve: r,
            std: s,
            cov: cov(r, s),
        });
        rows
    }

    /// Fixed-width reserve summary by accident period.
    pub fn summary(&self) -> String {
        let header = format!(
            "{:>16}{:>20}{:>18}{:>10}",
            "Accident period", "Reserve", "Sim. std", "CoV"
        );
        let rule = "=".repeat(header.len());
        let title = "Loss Reserve Summary";
        let mut out = format!(
            "{}{title}\n{rule}\n{header}\n{rule}\n",
            " ".repeat((rule.len() - title.len()) / 2)
        );
        for row in self.report() {
            if row.accident_period == "Total" {
                out.push_str(&"-".repeat(rule.len()));
                out.push('\n');
            }
            let cov = row
                .cov
                .map_or_else(|| "-".to_string(), |c| format!("{:.2}%", 100.0 * c));
            out.push_str(&format!(
                "{:>16}{:>20.2}{:>18.2}{:>10}\n",
                row.accident_period, row.reserve, row.std, cov
            ));
        }
        out
    }

    pub fn report_csv(&self) -> String {
        let mut out = String::from("accident_period,reserve,std,cov\n");
        for row in self.report() {
            let cov = row.cov.map_or_else(String::new, |c| format!("{c:?}"));
            out.push_str(&format!(
                "{},{:?},{:?},{cov}\n",
                row.accident_period, row.reserve, row.std
            ));
        }
        out
    }
}
