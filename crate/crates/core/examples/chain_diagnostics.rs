//! Summaries for a chain: autocorrelation, effective sample size and
//! quantiles, plus the same run through the file-writing driver.
//!
//! cargo run --example chain_diagnostics

use elhmc::cli::{run, RunConfig, StageSettings};
use elhmc::diagnostics::{autocorrelation, effective_sample_size};
use elhmc::hmc::StepSize;
use elhmc::models::ModelSpec;
use elhmc::posterior::PriorSpec;

fn main() -> elhmc::Result<()> {
    let out_dir = std::env::temp_dir().join("elhmc-chain-diagnostics");
    let config = RunConfig {
        data_path: concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/square.csv").into(),
        model: ModelSpec::Mean,
        prior: PriorSpec::Normal {
            mean: vec![0.0],
            variance: vec![1.0],
        },
        initial: vec![0.9, 0.95],
        stages: vec![StageSettings {
            n_samples: 2000,
            lf_steps: 3,
            epsilon: StepSize::Scalar(0.06),
            p_variance: 1.0,
        }],
        tol: 1e-8,
        seed: 8,
        detailed: false,
        burn_in: 200,
        max_lag: 20,
        chains: 2,
        out_dir: out_dir.clone(),
    };
    let output = run(&config)?;

    for (c, stages) in output.chains.iter().enumerate() {
        let stage = &stages[0];
        let series: Vec<f64> = stage.chain.samples[200..].iter().map(|r| r[0]).collect();
        let acf = autocorrelation(&series, 5)?;
        let ess = effective_sample_size(&series, series.len() - 1)?;
        println!(
            "chain {}: acceptance {:.3}, theta_1 ACF(1..5) {:.2?}, ESS {ess:.0} of {}",
            c + 1,
            stage.chain.acceptance_rate,
            &acf[1..],
            series.len()
        );
        let q = &stage.summary.coordinates[0].quantiles;
        println!("  theta_1 quantiles (2.5, 25, 50, 75, 97.5%): {q:.3?}");
    }
    println!("files written under {}", out_dir.display());
    Ok(())
}
