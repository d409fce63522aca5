//! What happens to the empirical likelihood as the parameter approaches the
//! edge of the convex hull of the data.
//!
//! cargo run --example boundary_divergence

use elhmc::cli::load_csv;
use elhmc::el::{grad_log_el, log_el, SolverSettings};
use elhmc::models::MeanModel;

fn main() -> elhmc::Result<()> {
    let data = load_csv(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/square.csv"))?;
    let model = MeanModel::new(2);
    let settings = SolverSettings::default();

    println!("{:>3} {:>14} {:>12} {:>12}", "k", "theta_1", "log L", "|grad|");
    for k in 1..=20 {
        let theta = [1.0 - 0.5f64.powi(k), 0.0];
        let sol = log_el(&model, &theta, &data, &settings)?;
        let grad = grad_log_el(&model, &theta, &data, &sol)?;
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        println!("{k:>3} {:>14.10} {:>12.4} {norm:>12.4e}", theta[0], sol.log_el);
    }

    let outside = log_el(&model, &[1.0, 0.0], &data, &settings)?;
    println!("on the edge: feasible = {}, log L = {}", outside.feasible, outside.log_el);
    Ok(())
}
