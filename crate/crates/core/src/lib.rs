//! Hamiltonian Monte Carlo sampling from Bayesian empirical likelihood posteriors.
//!
//! A model is described by estimating equations `g(θ, x)` with `E[g(θ⁰, x)] = 0`
//! together with their Jacobian in `θ`. For a fixed `θ` the empirical
//! likelihood is the largest `∏ ωᵢ` over probability weights on the observed
//! rows satisfying `Σ ωᵢ g(θ, xᵢ) = 0`. That inner problem is solved through
//! its Lagrange dual ([`el::solve_lambda`]), and the gradient of
//! `log L(θ)` follows in closed form from the multiplier ([`el::grad_log_el`]).
//!
//! The posterior `L(θ)π(θ)` is supported only where the origin is interior to
//! the convex hull of `{g(θ, xᵢ)}`. Near the edge of that set the gradient of
//! the log empirical likelihood diverges, which pushes leapfrog trajectories
//! back inside. [`hmc::run_chain`] exploits this: proposals whose trajectory
//! leaves the support are simply rejected.
//!
//! Modules:
//!
//! - [`el`]: datasets, the multiplier solver, `log L(θ)` and its gradient.
//! - [`models`]: the [`models::EstimatingModel`] trait, built-in models and a
//!   synthetic data generator.
//! - [`posterior`]: priors and the potential energy `U(θ) = −log L(θ) − log π(θ)`.
//! - [`hmc`]: leapfrog integration, Metropolis correction, chain driver.
//! - [`diagnostics`]: autocorrelation, effective sample size and chain summaries.
//! - [`cli`]: CSV ingestion and the file-writing runner behind the `elhmc` binary.
//!
//! Runnable walkthroughs for each of these live in the crate's `examples/`
//! directory.

pub mod cli;
pub mod diagnostics;
pub mod el;
mod error;
pub mod hmc;
pub mod models;
pub mod numdiff;
pub mod posterior;

pub use error::{Error, Result};
