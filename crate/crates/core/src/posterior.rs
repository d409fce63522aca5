//! Priors and the empirical-likelihood posterior as a potential energy.
//!
//! Priors are given on the log scale, as `log π(θ)` and `∇ log π(θ)`.
//! Additive constants in `log π` may be dropped since only differences enter
//! the Metropolis ratio.
//!
//! For the sampler to be reflected at the edge of the support the prior
//! gradient must not cancel the diverging likelihood gradient there. Priors
//! whose log-density gradient is bounded on the support (normal, flat)
//! satisfy this; it is not checked at runtime.

use serde::{Deserialize, Serialize};

use crate::el::{self, Dataset, ElSolution, SolverSettings};
use crate::hmc::{Energy, Potential};
use crate::models::EstimatingModel;
use crate::{Error, Result};

pub trait Prior {
    /// `log π(θ)` up to an additive constant; `−∞` outside the prior support.
    fn log_density(&self, theta: &[f64]) -> f64;

    fn grad_log_density(&self, theta: &[f64]) -> Vec<f64>;

    /// Dimension the prior is defined on, if fixed.
    fn dim(&self) -> Option<usize> {
        None
    }
}

impl<P: Prior + ?Sized> Prior for &P {
    fn log_density(&self, theta: &[f64]) -> f64 {
        (**self).log_density(theta)
    }
    fn grad_log_density(&self, theta: &[f64]) -> Vec<f64> {
        (**self).grad_log_density(theta)
    }
    fn dim(&self) -> Option<usize> {
        (**self).dim()
    }
}

impl<P: Prior + ?Sized> Prior for Box<P> {
    fn log_density(&self, theta: &[f64]) -> f64 {
        (**self).log_density(theta)
    }
    fn grad_log_density(&self, theta: &[f64]) -> Vec<f64> {
        (**self).grad_log_density(theta)
    }
    fn dim(&self) -> Option<usize> {
        (**self).dim()
    }
}

/// Improper uniform prior, `log π ≡ 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FlatPrior;

impl Prior for FlatPrior {
    fn log_density(&self, _theta: &[f64]) -> f64 {
        0.0
    }

    fn grad_log_density(&self, theta: &[f64]) -> Vec<f64> {
        vec![0.0; theta.len()]
    }
}

/// Independent normal priors, `log π(θ) = −Σ (θ_k − μ_k)² / (2σ²_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalPrior {
    mean: Vec<f64>,
    variance: Vec<f64>,
}

impl NormalPrior {
    pub fn new(mean: Vec<f64>, variance: Vec<f64>) -> Result<Self> {
        if mean.len() != variance.len() || mean.is_empty() {
            return Err(Error::Dimension(format!(
                "prior has {} means and {} variances",
                mean.len(),
                variance.len()
            )));
        }
        if !mean.iter().all(|m| m.is_finite()) {
            return Err(Error::Config("prior means must be finite".into()));
        }
        if !variance.iter().all(|v| *v > 0.0 && v.is_finite()) {
            return Err(Error::Config("prior variances must be positive".into()));
        }
        Ok(Self { mean, variance })
    }

    /// Same mean and variance in each of `d` coordinates.
    pub fn shared(d: usize, mean: f64, variance: f64) -> Result<Self> {
        Self::new(vec![mean; d], vec![variance; d])
    }

    pub fn standard(d: usize) -> Self {
        Self::shared(d, 0.0, 1.0).expect("unit variance is valid")
    }
}

impl Prior for NormalPrior {
    fn log_density(&self, theta: &[f64]) -> f64 {
        theta
            .iter()
            .zip(self.mean.iter().zip(&self.variance))
            .map(|(t, (m, v))| -0.5 * (t - m) * (t - m) / v)
            .sum()
    }

    fn grad_log_density(&self, theta: &[f64]) -> Vec<f64> {
        theta
            .iter()
            .zip(self.mean.iter().zip(&self.variance))
            .map(|(t, (m, v))| -(t - m) / v)
            .collect()
    }

    fn dim(&self) -> Option<usize> {
        Some(self.mean.len())
    }
}

type LogDensityFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A prior from a log-density closure and its gradient.
pub struct FnPrior {
    log_density: Box<LogDensityFn>,
    grad: Box<GradFn>,
}

impl FnPrior {
    pub fn new<L, G>(log_density: L, grad: G) -> Self
    where
        L: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            log_density: Box::new(log_density),
            grad: Box::new(grad),
        }
    }
}

impl Prior for FnPrior {
    fn log_density(&self, theta: &[f64]) -> f64 {
        (self.log_density)(theta)
    }

    fn grad_log_density(&self, theta: &[f64]) -> Vec<f64> {
        (self.grad)(theta)
    }
}

/// Built-in priors by their command-line description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum PriorSpec {
    Flat,
    /// One `(mean, variance)` pair shared by every coordinate, or one per
    /// coordinate.
    Normal { mean: Vec<f64>, variance: Vec<f64> },
}

impl PriorSpec {
    pub fn build(&self, d: usize) -> Result<Box<dyn Prior + Send + Sync>> {
        match self {
            PriorSpec::Flat => Ok(Box::new(FlatPrior)),
            PriorSpec::Normal { mean, variance } => {
                let prior = match (mean.len(), variance.len()) {
                    (1, 1) => NormalPrior::shared(d, mean[0], variance[0])?,
                    (m, v) if m == d && v == d => NormalPrior::new(mean.clone(), variance.clone())?,
                    (m, _) => {
                        return Err(Error::Dimension(format!(
                            "normal prior has {m} components, parameter has {d}"
                        )))
                    }
                };
                Ok(Box::new(prior))
            }
        }
    }
}

/// Potential energy and its gradient at one parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorEval {
    /// `U(θ) = −log L(θ) − log π(θ)`, `+∞` outside the support.
    pub potential: f64,
    /// `∇U(θ)`; `None` when infeasible.
    pub grad_potential: Option<Vec<f64>>,
    pub feasible: bool,
    pub el_solution: ElSolution,
}

/// The unnormalized posterior `L(θ) π(θ)` for a model, prior and dataset.
pub struct Posterior<M, P> {
    model: M,
    prior: P,
    data: Dataset,
    settings: SolverSettings,
}

impl<M: EstimatingModel, P: Prior> Posterior<M, P> {
    pub fn new(model: M, prior: P, data: Dataset, settings: SolverSettings) -> Result<Self> {
        settings.validate()?;
        if let Some(d) = prior.dim() {
            if d != model.dim() {
                return Err(Error::Dimension(format!(
                    "prior is {d}-dimensional, model parameter is {}-dimensional",
                    model.dim()
                )));
            }
        }
        if let Some(p) = model.observation_dim() {
            if p != data.p() {
                return Err(Error::Dimension(format!(
                    "observations have {} columns, model expects {p}",
                    data.p()
                )));
            }
        }
        Ok(Self {
            model,
            prior,
            data,
            settings,
        })
    }

    pub fn model(&self) -> &M {
        &self.model
    }

    pub fn prior(&self) -> &P {
        &self.prior
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn settings(&self) -> &SolverSettings {
        &self.settings
    }

    pub fn evaluate_potential(&self, theta: &[f64]) -> Result<PosteriorEval> {
        if theta.len() != self.model.dim() {
            return Err(Error::Dimension(format!(
                "parameter has length {}, model expects {}",
                theta.len(),
                self.model.dim()
            )));
        }
        let log_prior = self.prior.log_density(theta);
        if log_prior == f64::NEG_INFINITY {
            return Ok(PosteriorEval {
                potential: f64::INFINITY,
                grad_potential: None,
                feasible: false,
                el_solution: ElSolution::infeasible(
                    vec![0.0; self.model.n_equations()],
                    0,
                    f64::INFINITY,
                ),
            });
        }
        let solution = el::log_el(&self.model, theta, &self.data, &self.settings)?;
        if !solution.feasible {
            return Ok(PosteriorEval {
                potential: f64::INFINITY,
                grad_potential: None,
                feasible: false,
                el_solution: solution,
            });
        }
        let grad_el = el::grad_log_el(&self.model, theta, &self.data, &solution)?;
        let grad_prior = self.prior.grad_log_density(theta);
        if grad_prior.len() != grad_el.len() {
            return Err(Error::Dimension(format!(
                "prior gradient has length {}, expected {}",
                grad_prior.len(),
                grad_el.len()
            )));
        }
        let grad = grad_el
            .iter()
            .zip(&grad_prior)
            .map(|(a, b)| -(a + b))
            .collect();
        Ok(PosteriorEval {
            potential: -(solution.log_el + log_prior),
            grad_potential: Some(grad),
            feasible: true,
            el_solution: solution,
        })
    }
}

impl<M: EstimatingModel, P: Prior> Potential for Posterior<M, P> {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn energy(&self, theta: &[f64]) -> Result<Energy> {
        let eval = self.evaluate_potential(theta)?;
        Ok(match eval.grad_potential {
            Some(grad) if eval.potential.is_finite() && grad.iter().all(|g| g.is_finite()) => {
                Energy::feasible(eval.potential, grad)
            }
            _ => Energy::infeasible(),
        })
    }
}
