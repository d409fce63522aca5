//! Posterior of a bivariate mean from eight points on the boundary of the
//! square `[−1, 1]²`, with a standard normal prior.
//!
//! cargo run --example mean_square

use elhmc::cli::load_csv;
use elhmc::diagnostics::summarize;
use elhmc::el::SolverSettings;
use elhmc::hmc::{run_chain, HmcConfig};
use elhmc::models::MeanModel;
use elhmc::posterior::{NormalPrior, Posterior};

fn main() -> elhmc::Result<()> {
    let data = load_csv(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/square.csv"))?;
    let posterior = Posterior::new(
        MeanModel::new(2),
        NormalPrior::standard(2),
        data,
        SolverSettings::default(),
    )?;

    let config = HmcConfig::new(1000, 15, 0.06).with_seed(1);
    let chain = run_chain(&posterior, &[0.9, 0.95], &config)?;
    let summary = summarize(&chain, 200)?;

    println!("acceptance rate {:.3}", chain.acceptance_rate);
    for (k, c) in summary.coordinates.iter().enumerate() {
        println!(
            "theta_{}: mean {:+.4}  sd {:.4}  95% interval [{:+.3}, {:+.3}]  ESS {:.0}",
            k + 1,
            c.mean,
            c.sd,
            c.quantiles[0],
            c.quantiles[4],
            c.ess.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
