//! File-based runner behind the `elhmc` binary.
//!
//! Numbers in CSV output are written with 17 significant digits in
//! scientific notation (`{:.16e}`), which round-trips every `f64` and is
//! identical across runs and platforms. The summary report is JSON.
//!
//! Layout of an output directory for one chain and one stage:
//!
//! ```text
//! samples.csv        theta_1,...,theta_d; rows after burn-in
//! summary.json       moments, quantiles, ESS, ACF, acceptance rate, echo of the run config
//! acf.csv            lag,theta_1,...,theta_d
//! proposed.csv       (detailed) end point of each update
//! acceptance.csv     (detailed) update,accepted
//! trajectory_q.csv   (detailed) update,step,theta_1,...   positions along each trajectory
//! trajectory_p.csv   (detailed) update,step,p_1,...       momenta along each trajectory
//! ```
//!
//! Updates are numbered from 1 and trajectory steps from 0 (the starting
//! point). With several stages each stage writes to `stage-<s>/`; with
//! several chains each chain writes to `chain-<c>/`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::{self, ChainSummary};
use crate::el::{Dataset, SolverSettings};
use crate::hmc::{self, ChainResult, HmcConfig, StepSize};
use crate::models::{EstimatingModel, ModelSpec};
use crate::posterior::{Posterior, Prior, PriorSpec};
use crate::{Error, Result};

/// Environment variable consulted for the default output directory.
pub const OUT_DIR_ENV: &str = "ELHMC_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "elhmc-out";

/// Reads a rectangular numeric CSV file. A first line with any non-numeric
/// cell is taken as a header and skipped.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path)
        .map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
    read_csv(file)
}

/// [`load_csv`] on any reader.
pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut values = Vec::new();
    let mut width = None;
    let mut n = 0;
    for (index, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Data(e.to_string()))?;
        let line = record.position().map_or(index as u64 + 1, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let row = match parsed {
            Ok(row) => row,
            Err(_) if index == 0 => continue,
            Err(_) => {
                let cell = record.iter().find(|c| c.parse::<f64>().is_err()).unwrap_or("");
                return Err(Error::DataLine {
                    line,
                    message: format!("non-numeric cell {cell:?}"),
                });
            }
        };
        if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
            return Err(Error::DataLine {
                line,
                message: format!("non-finite value {bad}"),
            });
        }
        match width {
            None => width = Some(row.len()),
            Some(p) if p != row.len() => {
                return Err(Error::DataLine {
                    line,
                    message: format!("expected {p} fields, found {}", row.len()),
                })
            }
            Some(_) => {}
        }
        values.extend(row);
        n += 1;
    }
    match width {
        Some(p) => Dataset::new(values, n, p),
        None => Err(Error::Data("no numeric rows found".into())),
    }
}

/// Sampler settings for one stage of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSettings {
    pub n_samples: usize,
    pub lf_steps: usize,
    pub epsilon: StepSize,
    pub p_variance: f64,
}

impl StageSettings {
    fn hmc_config(&self, seed: u64, detailed: bool) -> HmcConfig {
        HmcConfig {
            n_samples: self.n_samples,
            lf_steps: self.lf_steps,
            epsilon: self.epsilon.clone(),
            p_variance: self.p_variance,
            seed,
            detailed,
        }
    }
}

/// Everything needed for a run. Serialized verbatim into each report as its
/// `call`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub data_path: PathBuf,
    pub model: ModelSpec,
    pub prior: PriorSpec,
    pub initial: Vec<f64>,
    /// Run in order; each stage starts from the last sample of the previous one.
    pub stages: Vec<StageSettings>,
    pub tol: f64,
    pub seed: u64,
    pub detailed: bool,
    /// Rows dropped from the final stage before writing and summarizing.
    pub burn_in: usize,
    pub max_lag: usize,
    pub chains: usize,
    pub out_dir: PathBuf,
}

impl RunConfig {
    fn validate(&self, d: usize) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::Config("at least one stage is required".into()));
        }
        if self.chains == 0 {
            return Err(Error::Config("chains must be at least 1".into()));
        }
        if self.initial.len() != d {
            return Err(Error::Config(format!(
                "initial value has {} components, parameter has {d}",
                self.initial.len()
            )));
        }
        for stage in &self.stages {
            stage.hmc_config(self.seed, self.detailed).validate(d)?;
        }
        let last = self.stages.last().expect("non-empty");
        if self.burn_in >= last.n_samples {
            return Err(Error::Config(format!(
                "burn-in {} must be smaller than n-samples {}",
                self.burn_in, last.n_samples
            )));
        }
        self.solver_settings().validate()
    }

    fn solver_settings(&self) -> SolverSettings {
        SolverSettings {
            tol: self.tol,
            ..SolverSettings::default()
        }
    }
}

/// Comma-separated reals.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("{s:?} is not a number")))
        })
        .collect()
}

/// Step size: one number, or one per coordinate separated by commas.
pub fn parse_step_size(text: &str) -> Result<StepSize> {
    let v = parse_vector(text)?;
    Ok(if v.len() == 1 {
        StepSize::Scalar(v[0])
    } else {
        StepSize::PerCoordinate(v)
    })
}

/// `flat`, `normal:MEAN,VAR` (shared by all coordinates) or
/// `normal:MEAN1,VAR1;MEAN2,VAR2;...` (one pair per coordinate).
pub fn parse_prior(text: &str) -> Result<PriorSpec> {
    let text = text.trim();
    if text == "flat" {
        return Ok(PriorSpec::Flat);
    }
    let Some(args) = text.strip_prefix("normal:") else {
        return Err(Error::Config(format!(
            "unknown prior {text:?}; expected `flat` or `normal:MEAN,VAR`"
        )));
    };
    let (mut mean, mut variance) = (Vec::new(), Vec::new());
    for pair in args.split(';') {
        match parse_vector(pair)?.as_slice() {
            [m, v] => {
                mean.push(*m);
                variance.push(*v);
            }
            _ => {
                return Err(Error::Config(format!(
                    "normal prior component {pair:?} must be MEAN,VAR"
                )))
            }
        }
    }
    Ok(PriorSpec::Normal { mean, variance })
}

/// Built-in model by name.
pub fn parse_model(name: &str, rate: f64) -> Result<ModelSpec> {
    match name {
        "mean" => Ok(ModelSpec::Mean),
        "logistic-constrained" => Ok(ModelSpec::LogisticConstrained { rate }),
        other => Err(Error::Config(format!(
            "unknown model {other:?}; expected `mean` or `logistic-constrained`"
        ))),
    }
}

/// A stage override such as `n-samples=50,lf-steps=15,epsilon=0.001,p-variance=0.2`.
/// Unset keys come from `base`. Per-coordinate step sizes separate their
/// components with `:`.
pub fn parse_stage(text: &str, base: &StageSettings) -> Result<StageSettings> {
    let mut stage = base.clone();
    for item in text.split(',').filter(|s| !s.trim().is_empty()) {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("stage setting {item:?} is not KEY=VALUE")))?;
        let value = value.trim();
        let bad = || Error::Config(format!("invalid value {value:?} for {key}"));
        match key.trim() {
            "n-samples" => stage.n_samples = value.parse().map_err(|_| bad())?,
            "lf-steps" => stage.lf_steps = value.parse().map_err(|_| bad())?,
            "p-variance" => stage.p_variance = value.parse().map_err(|_| bad())?,
            "epsilon" => stage.epsilon = parse_step_size(&value.replace(':', ","))?,
            other => return Err(Error::Config(format!("unknown stage setting {other:?}"))),
        }
    }
    Ok(stage)
}

/// Result of one stage of one chain.
#[derive(Debug, Clone)]
pub struct StageOutput {
    pub dir: PathBuf,
    pub chain: ChainResult,
    pub summary: ChainSummary,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Indexed by chain, then stage.
    pub chains: Vec<Vec<StageOutput>>,
}

#[derive(Serialize)]
struct Call<'a> {
    #[serde(flatten)]
    config: &'a RunConfig,
    chain: usize,
    stage: usize,
    hmc: &'a HmcConfig,
}

#[derive(Serialize)]
struct Report<'a> {
    call: Call<'a>,
    n_samples: usize,
    quantile_probs: [f64; 5],
    #[serde(flatten)]
    summary: &'a ChainSummary,
}

/// Loads the data, runs every chain through every stage and writes the
/// output files.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    let data = load_csv(&config.data_path)?;
    let model = config.model.build(data.p())?;
    let d = model.dim();
    config.validate(d)?;
    let prior = config.prior.build(d)?;
    let posterior = Posterior::new(model, prior, data, config.solver_settings())?;

    let chains = if config.chains == 1 {
        vec![run_one_chain(config, &posterior, 0)?]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..config.chains)
                .map(|c| {
                    let posterior = &posterior;
                    scope.spawn(move || run_one_chain(config, posterior, c))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("chain thread panicked"))
                .collect::<Result<Vec<_>>>()
        })?
    };
    Ok(RunOutput { chains })
}

fn run_one_chain<M, P>(
    config: &RunConfig,
    posterior: &Posterior<M, P>,
    chain_index: usize,
) -> Result<Vec<StageOutput>>
where
    M: EstimatingModel,
    P: Prior,
{
    let mut rng = hmc::chain_rng(config.seed, chain_index as u64);
    let mut chain_dir = config.out_dir.clone();
    if config.chains > 1 {
        chain_dir.push(format!("chain-{}", chain_index + 1));
    }
    let mut initial = config.initial.clone();
    let mut outputs = Vec::with_capacity(config.stages.len());
    for (s, stage) in config.stages.iter().enumerate() {
        let hmc_config = stage.hmc_config(config.seed, config.detailed);
        let chain = hmc::run_chain_with_rng(posterior, &initial, &hmc_config, &mut rng)?;
        let last_stage = s + 1 == config.stages.len();
        let burn_in = if last_stage { config.burn_in } else { 0 };
        let summary = diagnostics::summarize_with_lags(&chain, burn_in, config.max_lag)?;
        let dir = if config.stages.len() > 1 {
            chain_dir.join(format!("stage-{}", s + 1))
        } else {
            chain_dir.clone()
        };
        let report = Report {
            call: Call {
                config,
                chain: chain_index + 1,
                stage: s + 1,
                hmc: &hmc_config,
            },
            n_samples: chain.samples.len(),
            quantile_probs: diagnostics::QUANTILE_PROBS,
            summary: &summary,
        };
        write_outputs(&dir, &chain, &summary, burn_in, &report)?;
        initial = chain.last().to_vec();
        outputs.push(StageOutput { dir, chain, summary });
    }
    Ok(outputs)
}

/// Decimal rendering used for every number in CSV output.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_row<W: Write>(out: &mut W, prefix: &[String], values: &[f64]) -> std::io::Result<()> {
    let cells: Vec<String> = prefix
        .iter()
        .cloned()
        .chain(values.iter().map(|v| format_number(*v)))
        .collect();
    writeln!(out, "{}", cells.join(","))
}

fn header(prefix: &[&str], name: &str, d: usize) -> String {
    prefix
        .iter()
        .map(|s| s.to_string())
        .chain((1..=d).map(|k| format!("{name}_{k}")))
        .collect::<Vec<_>>()
        .join(",")
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_outputs(
    dir: &Path,
    chain: &ChainResult,
    summary: &ChainSummary,
    burn_in: usize,
    report: &Report<'_>,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    let d = chain.dim();

    let mut out = create(dir, "samples.csv")?;
    writeln!(out, "{}", header(&[], "theta", d))?;
    for row in &chain.samples[burn_in..] {
        write_row(&mut out, &[], row)?;
    }
    out.flush()?;

    let mut out = create(dir, "acf.csv")?;
    writeln!(out, "{}", header(&["lag"], "theta", d))?;
    for lag in 0..=summary.max_lag {
        let cells: Vec<String> = std::iter::once(lag.to_string())
            .chain(summary.coordinates.iter().map(|c| match &c.acf {
                Some(acf) => format_number(acf[lag]),
                None => "NA".to_string(),
            }))
            .collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    out.flush()?;

    let mut out = create(dir, "summary.json")?;
    serde_json::to_writer_pretty(&mut out, report)?;
    writeln!(out)?;
    out.flush()?;

    if let Some(trajectories) = &chain.trajectories {
        let mut out = create(dir, "proposed.csv")?;
        writeln!(out, "{}", header(&[], "theta", d))?;
        for row in &chain.proposed {
            write_row(&mut out, &[], row)?;
        }
        out.flush()?;

        let mut out = create(dir, "acceptance.csv")?;
        writeln!(out, "update,accepted")?;
        for (k, a) in chain.acceptance.iter().enumerate() {
            writeln!(out, "{},{a}", k + 1)?;
        }
        out.flush()?;

        let mut q_out = create(dir, "trajectory_q.csv")?;
        let mut p_out = create(dir, "trajectory_p.csv")?;
        writeln!(q_out, "{}", header(&["update", "step"], "theta", d))?;
        writeln!(p_out, "{}", header(&["update", "step"], "p", d))?;
        for (k, t) in trajectories.iter().enumerate() {
            for (step, (q, p)) in t.positions.iter().zip(&t.momenta).enumerate() {
                let prefix = [(k + 1).to_string(), step.to_string()];
                write_row(&mut q_out, &prefix, q)?;
                write_row(&mut p_out, &prefix, p)?;
            }
        }
        q_out.flush()?;
        p_out.flush()?;
    }
    Ok(())
}
