use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use elhmc::cli::{self, RunConfig, StageSettings, DEFAULT_OUT_DIR, OUT_DIR_ENV};
use elhmc::models::ConstrainedLogisticModel;

/// Sample a Bayesian empirical likelihood posterior with Hamiltonian Monte Carlo.
///
/// Exit status: 0 success, 2 configuration error, 3 infeasible initial value,
/// 4 data error.
#[derive(Debug, Parser)]
#[command(name = "elhmc", version)]
struct Args {
    /// CSV file with one observation per row (a non-numeric first line is a header).
    #[arg(long)]
    data: PathBuf,

    /// Estimating equations: `mean` or `logistic-constrained`.
    #[arg(long, default_value = "mean")]
    model: String,

    /// Known population rate for `logistic-constrained`.
    #[arg(long, default_value_t = ConstrainedLogisticModel::DEFAULT_RATE)]
    rate: f64,

    /// `flat`, `normal:MEAN,VAR` or `normal:MEAN1,VAR1;MEAN2,VAR2;...`.
    #[arg(long, default_value = "normal:0,1")]
    prior: String,

    /// Starting value, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    initial: String,

    #[arg(long, default_value_t = 1000)]
    n_samples: usize,

    #[arg(long, default_value_t = 10)]
    lf_steps: usize,

    /// Leapfrog step size, one value or one per coordinate.
    #[arg(long, default_value = "0.05")]
    epsilon: String,

    #[arg(long, default_value_t = 1.0)]
    p_variance: f64,

    /// Empirical likelihood tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Also write proposals, acceptance flags and trajectories.
    #[arg(long)]
    detailed: bool,

    /// Rows of the final stage excluded from samples.csv and the summary.
    #[arg(long, default_value_t = 0)]
    burn_in: usize,

    /// Largest lag in the autocorrelation table.
    #[arg(long, default_value_t = elhmc::diagnostics::DEFAULT_MAX_LAG)]
    max_lag: usize,

    /// Independent chains, run concurrently.
    #[arg(long, default_value_t = 1)]
    chains: usize,

    /// Run stages in sequence, each starting where the previous one ended,
    /// e.g. `--stage n-samples=50,epsilon=0.001 --stage n-samples=2000`.
    /// Unset keys default to the top-level flags.
    #[arg(long = "stage")]
    stages: Vec<String>,

    #[arg(long, env = OUT_DIR_ENV, default_value = DEFAULT_OUT_DIR)]
    out: PathBuf,
}

fn build(args: Args) -> elhmc::Result<RunConfig> {
    let base = StageSettings {
        n_samples: args.n_samples,
        lf_steps: args.lf_steps,
        epsilon: cli::parse_step_size(&args.epsilon)?,
        p_variance: args.p_variance,
    };
    let stages = if args.stages.is_empty() {
        vec![base]
    } else {
        args.stages
            .iter()
            .map(|s| cli::parse_stage(s, &base))
            .collect::<elhmc::Result<_>>()?
    };
    Ok(RunConfig {
        data_path: args.data,
        model: cli::parse_model(&args.model, args.rate)?,
        prior: cli::parse_prior(&args.prior)?,
        initial: cli::parse_vector(&args.initial)?,
        stages,
        tol: args.tol,
        seed: args.seed,
        detailed: args.detailed,
        burn_in: args.burn_in,
        max_lag: args.max_lag,
        chains: args.chains,
        out_dir: args.out,
    })
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = build(args).and_then(|config| cli::run(&config).map(|out| (config, out)));
    match result {
        Ok((config, output)) => {
            for (c, stages) in output.chains.iter().enumerate() {
                for (s, stage) in stages.iter().enumerate() {
                    let means: Vec<String> =
                        stage.summary.coordinates.iter().map(|c| format!("{:.4}", c.mean)).collect();
                    println!(
                        "chain {} stage {}: acceptance {:.3}, means [{}] -> {}",
                        c + 1,
                        s + 1,
                        stage.chain.acceptance_rate,
                        means.join(", "),
                        stage.dir.display()
                    );
                }
            }
            if config.chains > 1 {
                println!("wrote {} chains under {}", config.chains, config.out_dir.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("elhmc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
