//! Logistic regression whose marginal event rate is known from an external
//! source, fitted on synthetic data in two stages: a short run with a tiny
//! step size to settle, then the main run.
//!
//! cargo run --example fertility_two_stage

use elhmc::diagnostics::summarize;
use elhmc::el::SolverSettings;
use elhmc::hmc::{chain_rng, run_chain_with_rng, HmcConfig};
use elhmc::models::{intercept_for_marginal_rate, sigmoid, synthetic_fertility_data, ConstrainedLogisticModel};
use elhmc::posterior::{NormalPrior, Posterior};

fn main() -> elhmc::Result<()> {
    let rate = ConstrainedLogisticModel::DEFAULT_RATE;
    let (slope, x_rate) = (1.5, 0.35);
    let intercept = intercept_for_marginal_rate(slope, x_rate, rate)?;
    let data = synthetic_fertility_data(1000, [intercept, slope], x_rate, 11)?;
    println!("true coefficients ({intercept:.3}, {slope:.3})");

    let posterior = Posterior::new(
        ConstrainedLogisticModel::new(rate)?,
        NormalPrior::shared(2, 0.0, 1e4)?,
        data,
        SolverSettings::default(),
    )?;

    let mut rng = chain_rng(77, 0);
    let settle = HmcConfig::new(50, 15, 0.001).with_p_variance(0.2);
    let first = run_chain_with_rng(&posterior, &[-3.2, 0.55], &settle, &mut rng)?;
    println!("stage 1 acceptance {:.3}, ends at {:?}", first.acceptance_rate, first.last());

    let main_run = HmcConfig::new(2000, 30, 0.004).with_p_variance(0.02);
    let second = run_chain_with_rng(&posterior, first.last(), &main_run, &mut rng)?;
    let summary = summarize(&second, 500)?;
    println!("stage 2 acceptance {:.3}", second.acceptance_rate);
    for (name, c) in ["beta_0", "beta_1"].iter().zip(&summary.coordinates) {
        let acf10 = c.acf.as_ref().map_or(f64::NAN, |a| a[10]);
        println!("{name}: mean {:+.3}  sd {:.3}  lag-10 ACF {acf10:+.3}", c.mean, c.sd);
    }

    let xs: Vec<f64> = posterior.data().rows().map(|r| r[0]).collect();
    let kept = &second.samples[500..];
    let implied = kept
        .iter()
        .map(|b| xs.iter().map(|x| sigmoid(b[0] + b[1] * x)).sum::<f64>() / xs.len() as f64)
        .sum::<f64>()
        / kept.len() as f64;
    println!("implied rate {implied:.5} (constraint {rate})");
    Ok(())
}
