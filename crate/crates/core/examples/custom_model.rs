//! A user-defined estimating equation built from closures: mean and variance
//! of a sample jointly, checked against finite differences before sampling.
//!
//! cargo run --example custom_model

use elhmc::diagnostics::summarize;
use elhmc::el::{Dataset, SolverSettings};
use elhmc::hmc::{chain_rng, run_chain, HmcConfig};
use elhmc::models::{check_jacobian, FnModel};
use elhmc::posterior::{NormalPrior, Posterior};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::Normal;

fn main() -> elhmc::Result<()> {
    // g(μ, σ², x) = (x − μ, (x − μ)² − σ²)
    let model = FnModel::new(
        2,
        2,
        |t: &[f64], x: &[f64]| {
            let r = x[0] - t[0];
            vec![r, r * r - t[1]]
        },
        |t: &[f64], x: &[f64]| {
            let r = x[0] - t[0];
            DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, -2.0 * r, -1.0])
        },
    );
    let error = check_jacobian(&model, &[0.3, 2.0], &[1.7], 1e-6)?;
    println!("Jacobian check, relative error {error:.2e}");

    let mut rng = chain_rng(12, 0);
    let normal = Normal::new(1.0, 2.0).expect("valid parameters");
    let rows: Vec<[f64; 1]> = (0..60).map(|_| [rng.sample(normal)]).collect();
    let data = Dataset::from_rows(&rows)?;
    let mean = data.column_means()[0];
    let var = rows.iter().map(|r| (r[0] - mean).powi(2)).sum::<f64>() / rows.len() as f64;
    println!("sample mean {mean:.3}, sample variance {var:.3}");

    let prior = NormalPrior::shared(2, 0.0, 100.0)?;
    let posterior = Posterior::new(model, prior, data, SolverSettings::default())?;
    let config = HmcConfig::new(3000, 10, vec![0.05, 0.15]).with_seed(4);
    let chain = run_chain(&posterior, &[mean, var], &config)?;
    let summary = summarize(&chain, 300)?;
    println!("acceptance {:.3}", chain.acceptance_rate);
    for (name, c) in ["mu", "sigma^2"].iter().zip(&summary.coordinates) {
        println!(
            "{name}: posterior mean {:.3}, 95% interval [{:.3}, {:.3}]",
            c.mean, c.quantiles[0], c.quantiles[4]
        );
    }
    Ok(())
}
