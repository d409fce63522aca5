//! Hamiltonian Monte Carlo with a leapfrog integrator.
//!
//! The Hamiltonian is `H(θ, p) = U(θ) + K(p)` with `K(p) = ½ pᵀM⁻¹p` and mass
//! matrix `M = p_variance · I`. Each update draws `p ~ N(0, M)`, integrates
//! `lf_steps` leapfrog steps, negates the final momentum and accepts the end
//! point with probability `min{1, exp(H(θ, p) − H(θ*, p*))}`.
//!
//! A trajectory that reaches a position outside the support (`U = +∞`), or
//! produces a non-finite position or momentum, is aborted and its proposal
//! rejected. The target density is zero there, so this keeps the chain
//! reversible with respect to the posterior.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Potential energy and gradient at a point. Outside the support the value
/// is `+∞` and the gradient is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Energy {
    pub value: f64,
    pub grad: Vec<f64>,
}

impl Energy {
    pub fn feasible(value: f64, grad: Vec<f64>) -> Self {
        Self { value, grad }
    }

    pub fn infeasible() -> Self {
        Self {
            value: f64::INFINITY,
            grad: Vec::new(),
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.value.is_finite()
    }
}

/// A target for the sampler, described by its potential `U = −log density`.
pub trait Potential {
    fn dim(&self) -> usize;

    fn energy(&self, theta: &[f64]) -> Result<Energy>;
}

impl<P: Potential + ?Sized> Potential for &P {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn energy(&self, theta: &[f64]) -> Result<Energy> {
        (**self).energy(theta)
    }
}

/// Leapfrog step size, shared or per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepSize {
    Scalar(f64),
    PerCoordinate(Vec<f64>),
}

impl StepSize {
    pub fn get(&self, k: usize) -> f64 {
        match self {
            StepSize::Scalar(e) => *e,
            StepSize::PerCoordinate(e) => e[k],
        }
    }

    /// The same step sizes multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            StepSize::Scalar(e) => StepSize::Scalar(e * factor),
            StepSize::PerCoordinate(e) => StepSize::PerCoordinate(e.iter().map(|v| v * factor).collect()),
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        let values: &[f64] = match self {
            StepSize::Scalar(e) => std::slice::from_ref(e),
            StepSize::PerCoordinate(e) => {
                if e.len() != d {
                    return Err(Error::Config(format!(
                        "epsilon has {} components, parameter has {d}",
                        e.len()
                    )));
                }
                e
            }
        };
        if values.iter().all(|e| *e > 0.0 && e.is_finite()) {
            Ok(())
        } else {
            Err(Error::Config("epsilon must be positive and finite".into()))
        }
    }
}

impl From<f64> for StepSize {
    fn from(e: f64) -> Self {
        StepSize::Scalar(e)
    }
}

impl From<Vec<f64>> for StepSize {
    fn from(e: Vec<f64>) -> Self {
        StepSize::PerCoordinate(e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HmcConfig {
    /// Rows in the returned sample matrix, counting the initial value.
    pub n_samples: usize,
    pub lf_steps: usize,
    pub epsilon: StepSize,
    /// Momentum variance; the mass matrix is `p_variance · I`.
    pub p_variance: f64,
    pub seed: u64,
    /// Record every trajectory.
    pub detailed: bool,
}

impl HmcConfig {
    pub fn new(n_samples: usize, lf_steps: usize, epsilon: impl Into<StepSize>) -> Self {
        Self {
            n_samples,
            lf_steps,
            epsilon: epsilon.into(),
            p_variance: 1.0,
            seed: 0,
            detailed: false,
        }
    }

    pub fn with_p_variance(mut self, p_variance: f64) -> Self {
        self.p_variance = p_variance;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_detailed(mut self, detailed: bool) -> Self {
        self.detailed = detailed;
        self
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if self.n_samples < 2 {
            return Err(Error::Config(format!(
                "n_samples must be at least 2, got {}",
                self.n_samples
            )));
        }
        if self.lf_steps == 0 {
            return Err(Error::Config("lf_steps must be at least 1".into()));
        }
        if !(self.p_variance > 0.0 && self.p_variance.is_finite()) {
            return Err(Error::Config(format!(
                "p_variance must be positive, got {}",
                self.p_variance
            )));
        }
        self.epsilon.validate(d)
    }
}

/// Position and momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub theta: Vec<f64>,
    pub p: Vec<f64>,
}

/// `½ ‖p‖² / p_variance`.
pub fn kinetic_energy(p: &[f64], p_variance: f64) -> f64 {
    0.5 * p.iter().map(|v| v * v).sum::<f64>() / p_variance
}

/// Positions and momenta visited by one leapfrog trajectory, starting point
/// included. A completed trajectory has `lf_steps + 1` entries; an aborted
/// one ends at the position where it was abandoned.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub positions: Vec<Vec<f64>>,
    pub momenta: Vec<Vec<f64>>,
    pub aborted: bool,
}

impl Trajectory {
    fn push(&mut self, theta: &[f64], p: &[f64]) {
        self.positions.push(theta.to_vec());
        self.momenta.push(p.to_vec());
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LeapfrogOutcome {
    Completed { end: PhasePoint, energy: Energy },
    /// The trajectory left the support or overflowed at `at`.
    Aborted { at: PhasePoint },
}

impl LeapfrogOutcome {
    pub fn point(&self) -> &PhasePoint {
        match self {
            LeapfrogOutcome::Completed { end, .. } => end,
            LeapfrogOutcome::Aborted { at } => at,
        }
    }

    pub fn is_aborted(&self) -> bool {
        matches!(self, LeapfrogOutcome::Aborted { .. })
    }
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Integrates `lf_steps` leapfrog steps from `start`, where `start_grad` is
/// `∇U` at `start.theta`.
///
/// Each step is a half step in momentum, a full step in position and another
/// half step in momentum, so momenta are available at every full step for
/// recording.
pub fn leapfrog<P: Potential + ?Sized>(
    potential: &P,
    start: &PhasePoint,
    start_grad: &[f64],
    epsilon: &StepSize,
    p_variance: f64,
    lf_steps: usize,
    mut trajectory: Option<&mut Trajectory>,
) -> Result<LeapfrogOutcome> {
    let d = start.theta.len();
    if start.p.len() != d || start_grad.len() != d {
        return Err(Error::Dimension(format!(
            "phase point has position length {d}, momentum length {} and gradient length {}",
            start.p.len(),
            start_grad.len()
        )));
    }
    let mut theta = start.theta.clone();
    let mut p = start.p.clone();
    let mut grad = start_grad.to_vec();
    let mut energy = None;
    if let Some(t) = trajectory.as_deref_mut() {
        t.push(&theta, &p);
    }

    for _ in 0..lf_steps {
        for k in 0..d {
            p[k] -= 0.5 * epsilon.get(k) * grad[k];
            theta[k] += epsilon.get(k) * p[k] / p_variance;
        }
        let here = if all_finite(&theta) && all_finite(&p) {
            potential.energy(&theta)?
        } else {
            Energy::infeasible()
        };
        if !here.is_feasible() || !all_finite(&here.grad) {
            if let Some(t) = trajectory.as_deref_mut() {
                t.push(&theta, &p);
                t.aborted = true;
            }
            return Ok(LeapfrogOutcome::Aborted {
                at: PhasePoint { theta, p },
            });
        }
        grad.clone_from(&here.grad);
        for k in 0..d {
            p[k] -= 0.5 * epsilon.get(k) * grad[k];
        }
        if let Some(t) = trajectory.as_deref_mut() {
            t.push(&theta, &p);
        }
        if !all_finite(&p) {
            if let Some(t) = trajectory.as_deref_mut() {
                t.aborted = true;
            }
            return Ok(LeapfrogOutcome::Aborted {
                at: PhasePoint { theta, p },
            });
        }
        energy = Some(here);
    }

    let energy = match energy {
        Some(e) => e,
        // zero steps: the end point is the start
        None => potential.energy(&theta)?,
    };
    Ok(LeapfrogOutcome::Completed {
        end: PhasePoint { theta, p },
        energy,
    })
}

/// Current position of a chain together with its potential.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub theta: Vec<f64>,
    pub energy: Energy,
}

impl ChainState {
    pub fn new<P: Potential + ?Sized>(potential: &P, theta: Vec<f64>) -> Result<Self> {
        let energy = potential.energy(&theta)?;
        Ok(Self { theta, energy })
    }
}

#[derive(Debug, Clone)]
pub struct Update {
    pub next: ChainState,
    pub proposed: Vec<f64>,
    pub accepted: bool,
    /// `min{1, exp(−ΔH)}`, zero for aborted trajectories.
    pub accept_prob: f64,
    /// `H(θ*, p*) − H(θ, p)`, `+∞` for aborted trajectories.
    pub delta_h: f64,
    pub trajectory: Option<Trajectory>,
}

/// One HMC transition from a feasible state.
pub fn hmc_update<P: Potential + ?Sized, R: Rng + ?Sized>(
    current: &ChainState,
    potential: &P,
    config: &HmcConfig,
    rng: &mut R,
) -> Result<Update> {
    if !current.energy.is_feasible() {
        return Err(Error::InfeasibleInitial {
            theta: current.theta.clone(),
            hint: "an update must start inside the support".into(),
        });
    }
    let scale = config.p_variance.sqrt();
    let p: Vec<f64> = (0..current.theta.len())
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let h_current = current.energy.value + kinetic_energy(&p, config.p_variance);
    let start = PhasePoint {
        theta: current.theta.clone(),
        p,
    };

    let mut trajectory = config.detailed.then(Trajectory::default);
    let outcome = leapfrog(
        potential,
        &start,
        &current.energy.grad,
        &config.epsilon,
        config.p_variance,
        config.lf_steps,
        trajectory.as_mut(),
    )?;
    // drawn unconditionally so the random stream does not depend on aborts
    let u: f64 = rng.random();

    let (mut end, energy) = match outcome {
        LeapfrogOutcome::Completed { end, energy } => (end, energy),
        LeapfrogOutcome::Aborted { at } => {
            return Ok(Update {
                next: current.clone(),
                proposed: at.theta,
                accepted: false,
                accept_prob: 0.0,
                delta_h: f64::INFINITY,
                trajectory,
            });
        }
    };
    // Momentum flip makes the proposal an involution; K is unchanged.
    end.p.iter_mut().for_each(|v| *v = -*v);
    let h_proposed = energy.value + kinetic_energy(&end.p, config.p_variance);
    let delta_h = h_proposed - h_current;
    let accept_prob = if delta_h.is_nan() { 0.0 } else { (-delta_h).exp().min(1.0) };
    let theta = end.theta;
    let accepted = u < accept_prob;
    let next = if accepted {
        ChainState {
            theta: theta.clone(),
            energy,
        }
    } else {
        current.clone()
    };
    Ok(Update {
        next,
        proposed: theta,
        accepted,
        accept_prob,
        delta_h,
        trajectory,
    })
}

/// Everything recorded by [`run_chain`].
#[derive(Debug, Clone, PartialEq)]
pub struct ChainResult {
    /// `n_samples` rows; row 0 is the initial value.
    pub samples: Vec<Vec<f64>>,
    /// Potential `U` at each sample row.
    pub potentials: Vec<f64>,
    pub acceptance_rate: f64,
    /// End point of each of the `n_samples − 1` trajectories.
    pub proposed: Vec<Vec<f64>>,
    pub acceptance: Vec<bool>,
    /// Present when `config.detailed` is set.
    pub trajectories: Option<Vec<Trajectory>>,
    /// The configuration the chain was run with.
    pub call: HmcConfig,
}

impl ChainResult {
    pub fn dim(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn last(&self) -> &[f64] {
        self.samples.last().expect("a chain has at least one row")
    }
}

/// The generator behind every chain: ChaCha8 keyed by `seed`, with
/// independent streams for concurrent chains.
pub fn chain_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs `n_samples − 1` updates from `initial` with `chain_rng(config.seed, 0)`.
pub fn run_chain<P: Potential + ?Sized>(
    potential: &P,
    initial: &[f64],
    config: &HmcConfig,
) -> Result<ChainResult> {
    let mut rng = chain_rng(config.seed, 0);
    run_chain_with_rng(potential, initial, config, &mut rng)
}

pub fn run_chain_with_rng<P: Potential + ?Sized, R: Rng + ?Sized>(
    potential: &P,
    initial: &[f64],
    config: &HmcConfig,
    rng: &mut R,
) -> Result<ChainResult> {
    let d = potential.dim();
    if initial.len() != d {
        return Err(Error::Dimension(format!(
            "initial value has length {}, parameter has {d}",
            initial.len()
        )));
    }
    config.validate(d)?;
    if !all_finite(initial) {
        return Err(Error::NonFinite("initial value".into()));
    }
    let mut state = ChainState::new(potential, initial.to_vec())?;
    if !state.energy.is_feasible() {
        return Err(Error::InfeasibleInitial {
            theta: initial.to_vec(),
            hint: "the posterior is zero there; choose a starting point inside the support, \
                   where the origin is interior to the convex hull of g(theta, x_i) \
                   (for the mean model, any point near the sample mean)"
                .into(),
        });
    }

    let updates = config.n_samples - 1;
    let mut samples = Vec::with_capacity(config.n_samples);
    let mut potentials = Vec::with_capacity(config.n_samples);
    let mut proposed = Vec::with_capacity(updates);
    let mut acceptance = Vec::with_capacity(updates);
    let mut trajectories = config.detailed.then(|| Vec::with_capacity(updates));
    samples.push(state.theta.clone());
    potentials.push(state.energy.value);

    for _ in 0..updates {
        let update = hmc_update(&state, potential, config, rng)?;
        proposed.push(update.proposed);
        acceptance.push(update.accepted);
        if let (Some(all), Some(t)) = (trajectories.as_mut(), update.trajectory) {
            all.push(t);
        }
        state = update.next;
        samples.push(state.theta.clone());
        potentials.push(state.energy.value);
    }

    let accepted = acceptance.iter().filter(|a| **a).count();
    Ok(ChainResult {
        samples,
        potentials,
        acceptance_rate: accepted as f64 / updates as f64,
        proposed,
        acceptance,
        trajectories,
        call: config.clone(),
    })
}
