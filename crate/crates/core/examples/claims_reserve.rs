//! Claims reserving on the fixture triangles: Fisher-Lange point estimate, the
//! collective risk model simulation around it, and a back-test against the payments
//! that actually emerged in the lower triangle.

use std::path::Path;

use riskkit::lossreserve::{read_vector_csv, LossReserve, ReservingModel, TriangleSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/fixture");
    let data = TriangleSet::read_dir(&dir)?;
    let czj = read_vector_csv(dir.join("czj.csv"))?;

    let fl = LossReserve::new(data.clone(), ReservingModel::fisher_lange(false, vec![1.0])?, 0, 0)?;
    let crm = LossReserve::new(
        data.clone(),
        ReservingModel::crm(false, vec![1.0], 0.01, 0.01, czj)?,
        1000,
        42,
    )?;
    println!("{}", crm.summary());
    for q in [0.5, 0.75, 0.995] {
        println!("reserve quantile {q}: {:.2}", crm.ppf(q)?);
    }

    let mut actual = vec![0.0; data.horizon() + 1];
    let mut rdr = csv::Reader::from_path(dir.join("actual_payments.csv"))?;
    for rec in rdr.records() {
        let rec = rec?;
        let i: usize = rec[0].parse()?;
        actual[i] += rec[2].parse::<f64>()?;
    }
    println!(
        "\n{:>16}{:>18}{:>18}{:>18}",
        "Accident period", "Fisher-Lange", "CRM mean", "Actual"
    );
    let (fl_p, crm_p) = (fl.reserve_by_period(), crm.reserve_by_period());
    for i in 0..actual.len() {
        println!("{i:>16}{:>18.0}{:>18.0}{:>18.0}", fl_p[i], crm_p[i], actual[i]);
    }
    let total: f64 = actual.iter().sum();
    println!(
        "{:>16}{:>18.0}{:>18.0}{:>18.0}",
        "Total",
        fl.reserve(),
        crm.reserve(),
        total
    );
    println!(
        "actual payments sit at the {:.1}% point of the simulated reserve distribution",
        100.0 * crm.dist()?.cdf(total)
    );
    Ok(())
}
