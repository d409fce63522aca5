//! Empirical likelihood at a fixed parameter value.
//!
//! For fixed `θ` the optimal weights are
//! `ω̂ᵢ(θ) = 1 / (n (1 + λ̂ᵀ g(θ, xᵢ)))` where the multiplier `λ̂` solves
//! `Σᵢ gᵢ / (1 + λ̂ᵀ gᵢ) = 0`. [`solve_lambda`] finds `λ̂` by minimizing the
//! convex dual (see [`dual`]); [`log_el`] composes it with the model, and
//! [`grad_log_el`] evaluates
//!
//! ```text
//! ∇ log L(θ) = −n Σᵢ ω̂ᵢ(θ) λ̂(θ)ᵀ ∇g(θ, xᵢ)
//! ```
//!
//! which needs `λ̂` itself but never its derivative.
//!
//! `log L(θ)` is reported as `Σ log ω̂ᵢ` without any `n log n` offset, so its
//! largest possible value is `−n log n`. Outside the support it is `−∞`.

mod dual;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::models::EstimatingModel;
use crate::{Error, Result};

pub use dual::solve_lambda;

/// `n` observations of dimension `p`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    n: usize,
    p: usize,
}

impl Dataset {
    pub fn new(values: Vec<f64>, n: usize, p: usize) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::Data("a dataset needs at least one row and one column".into()));
        }
        if values.len() != n * p {
            return Err(Error::Dimension(format!(
                "{} values cannot fill {n} rows of length {p}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("data row {} column {}", i / p, i % p)));
        }
        Ok(Self { values, n, p })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let p = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * p);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != p {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {p}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::new(values, rows.len(), p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.p)
    }

    /// Mean of every column.
    pub fn column_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.p];
        for row in self.rows() {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= self.n as f64);
        means
    }
}

/// The `n × q` matrix whose row `i` is `g(θ, xᵢ)`. All entries are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct GMatrix {
    values: Vec<f64>,
    n: usize,
    q: usize,
}

impl GMatrix {
    pub fn new(values: Vec<f64>, n: usize, q: usize) -> Result<Self> {
        if n == 0 || q == 0 {
            return Err(Error::Dimension("G needs at least one row and one equation".into()));
        }
        if values.len() != n * q {
            return Err(Error::Dimension(format!(
                "{} values cannot fill an {n} x {q} matrix",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "estimating function row {} equation {}",
                i / q,
                i % q
            )));
        }
        Ok(Self { values, n, q })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let q = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * q);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != q {
                return Err(Error::Dimension(format!(
                    "row {i} of G has {} entries, expected {q}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::new(values, rows.len(), q)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.q..(i + 1) * self.q]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.q)
    }

    /// Multiplies every entry by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v * c).collect(), self.n, self.q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Convergence threshold on the norm of the dual gradient, which bounds the
    /// constraint residual `‖Σ ω̂ᵢ gᵢ‖`.
    pub tol: f64,
    pub max_iter: usize,
    /// Multipliers larger than this are taken as divergence to infinity, i.e.
    /// the origin is not interior to the hull of the rows of G.
    pub lambda_cap: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 100,
            lambda_cap: 1e10,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        if !(self.lambda_cap > 0.0) {
            return Err(Error::Config(format!(
                "lambda_cap must be positive, got {}",
                self.lambda_cap
            )));
        }
        Ok(())
    }
}

/// Outcome of the inner optimization at one parameter value.
///
/// When `feasible` is true every weight is strictly positive, the weights
/// sum to one, and `ω̂ᵢ = 1 / (n (1 + λ̂ᵀ gᵢ))`. When it is false `log_el` is
/// `−∞` and `weights` is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct ElSolution {
    pub weights: Vec<f64>,
    pub lambda: Vec<f64>,
    pub log_el: f64,
    pub feasible: bool,
    pub iterations: usize,
    /// `‖Σ ω̂ᵢ gᵢ‖` for feasible solutions, the dual gradient norm otherwise.
    pub residual_norm: f64,
}

impl ElSolution {
    pub(crate) fn infeasible(lambda: Vec<f64>, iterations: usize, residual_norm: f64) -> Self {
        Self {
            weights: Vec::new(),
            lambda,
            log_el: f64::NEG_INFINITY,
            feasible: false,
            iterations,
            residual_norm,
        }
    }
}

fn check_dimensions<M: EstimatingModel + ?Sized>(
    model: &M,
    theta: &[f64],
    data: &Dataset,
) -> Result<()> {
    if theta.len() != model.dim() {
        return Err(Error::Dimension(format!(
            "parameter has length {}, model expects {}",
            theta.len(),
            model.dim()
        )));
    }
    if let Some(p) = model.observation_dim() {
        if p != data.p() {
            return Err(Error::Dimension(format!(
                "observations have {} columns, model expects {p}",
                data.p()
            )));
        }
    }
    if let Some(i) = theta.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("parameter component {i}")));
    }
    Ok(())
}

/// Evaluates `g(θ, xᵢ)` for every observation.
pub fn evaluate_g<M: EstimatingModel + ?Sized>(
    model: &M,
    theta: &[f64],
    data: &Dataset,
) -> Result<GMatrix> {
    check_dimensions(model, theta, data)?;
    let q = model.n_equations();
    let mut values = Vec::with_capacity(data.n() * q);
    for (i, x) in data.rows().enumerate() {
        let gi = model.g(theta, x);
        if gi.len() != q {
            return Err(Error::Dimension(format!(
                "estimating function returned {} values for row {i}, model declares {q}",
                gi.len()
            )));
        }
        values.extend(gi);
    }
    GMatrix::new(values, data.n(), q)
}

/// `log L(θ)` together with the solution it came from.
pub fn log_el<M: EstimatingModel + ?Sized>(
    model: &M,
    theta: &[f64],
    data: &Dataset,
    settings: &SolverSettings,
) -> Result<ElSolution> {
    let g = evaluate_g(model, theta, data)?;
    solve_lambda(&g, settings)
}

/// Gradient of `log L(θ)` from a feasible solution at the same `θ`.
pub fn grad_log_el<M: EstimatingModel + ?Sized>(
    model: &M,
    theta: &[f64],
    data: &Dataset,
    solution: &ElSolution,
) -> Result<Vec<f64>> {
    if !solution.feasible {
        return Err(Error::InfeasibleGradient);
    }
    check_dimensions(model, theta, data)?;
    let (d, q) = (model.dim(), model.n_equations());
    if solution.lambda.len() != q || solution.weights.len() != data.n() {
        return Err(Error::Dimension(
            "solution does not belong to this model and dataset".into(),
        ));
    }
    let lambda = DVector::from_column_slice(&solution.lambda);
    let mut grad = DVector::<f64>::zeros(d);
    for (x, &w) in data.rows().zip(&solution.weights) {
        let jac = model.grad_g(theta, x);
        if jac.shape() != (q, d) {
            return Err(Error::Dimension(format!(
                "Jacobian has shape {:?}, expected ({q}, {d})",
                jac.shape()
            )));
        }
        grad += jac.tr_mul(&lambda) * w;
    }
    let n = data.n() as f64;
    Ok(grad.iter().map(|v| -n * v).collect())
}
