//! Estimating-equation models.
//!
//! A model supplies `g(θ, x) ∈ ℝ^q` and its `q × d` Jacobian in `θ`. The
//! Jacobian is always analytic: nothing here differentiates numerically on
//! the sampling path. [`check_jacobian`] compares a model's Jacobian with
//! central differences and is meant for validating user models up front.
//!
//! The divergence results that make the sampler work are proved under
//! `q ≤ d`, `n > q` and full-rank conditions on `G` and `Σ wᵢ∇gᵢ`. None of
//! this is enforced; the constrained logistic model has `q = 3 > d = 2` and
//! samples fine in practice.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::el::Dataset;
use crate::numdiff;
use crate::{Error, Result};

pub trait EstimatingModel {
    /// Parameter dimension `d`.
    fn dim(&self) -> usize;

    /// Number of estimating equations `q`.
    fn n_equations(&self) -> usize;

    /// Required observation length, if the model fixes one.
    fn observation_dim(&self) -> Option<usize> {
        None
    }

    fn g(&self, theta: &[f64], x: &[f64]) -> Vec<f64>;

    /// `q × d` Jacobian with entry `(j, k) = ∂g_j / ∂θ_k`.
    fn grad_g(&self, theta: &[f64], x: &[f64]) -> DMatrix<f64>;
}

impl<M: EstimatingModel + ?Sized> EstimatingModel for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn n_equations(&self) -> usize {
        (**self).n_equations()
    }
    fn observation_dim(&self) -> Option<usize> {
        (**self).observation_dim()
    }
    fn g(&self, theta: &[f64], x: &[f64]) -> Vec<f64> {
        (**self).g(theta, x)
    }
    fn grad_g(&self, theta: &[f64], x: &[f64]) -> DMatrix<f64> {
        (**self).grad_g(theta, x)
    }
}

impl<M: EstimatingModel + ?Sized> EstimatingModel for Box<M> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn n_equations(&self) -> usize {
        (**self).n_equations()
    }
    fn observation_dim(&self) -> Option<usize> {
        (**self).observation_dim()
    }
    fn g(&self, theta: &[f64], x: &[f64]) -> Vec<f64> {
        (**self).g(theta, x)
    }
    fn grad_g(&self, theta: &[f64], x: &[f64]) -> DMatrix<f64> {
        (**self).grad_g(theta, x)
    }
}

/// Population mean: `g(θ, x) = θ − x`, Jacobian the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeanModel {
    p: usize,
}

impl MeanModel {
    pub fn new(p: usize) -> Self {
        assert!(p >= 1, "mean model needs a positive dimension");
        Self { p }
    }
}

impl EstimatingModel for MeanModel {
    fn dim(&self) -> usize {
        self.p
    }

    fn n_equations(&self) -> usize {
        self.p
    }

    fn observation_dim(&self) -> Option<usize> {
        Some(self.p)
    }

    fn g(&self, theta: &[f64], x: &[f64]) -> Vec<f64> {
        theta.iter().zip(x).map(|(t, v)| t - v).collect()
    }

    fn grad_g(&self, _theta: &[f64], _x: &[f64]) -> DMatrix<f64> {
        DMatrix::identity(self.p, self.p)
    }
}

/// Overflow-safe logistic function.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Logit-link regression of a binary `y` on a binary `x`, with the marginal
/// mean of `y` pinned to a known population rate.
///
/// Observations are rows `(x, y)`. With `a = sigmoid(β₀ + β₁x)`:
///
/// ```text
/// g(β, (x, y)) = ( y − a,  x (y − a),  y − rate )
/// ```
///
/// The Jacobian rows are `−a(1−a)·(1, x)`, `−a(1−a)·(x, x²)` and `(0, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstrainedLogisticModel {
    rate: f64,
}

impl ConstrainedLogisticModel {
    /// General fertility rate used in the original application.
    pub const DEFAULT_RATE: f64 = 0.06179;

    pub fn new(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate < 1.0) {
            return Err(Error::Config(format!("rate must lie in (0, 1), got {rate}")));
        }
        Ok(Self { rate })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

impl Default for ConstrainedLogisticModel {
    fn default() -> Self {
        Self {
            rate: Self::DEFAULT_RATE,
        }
    }
}

impl EstimatingModel for ConstrainedLogisticModel {
    fn dim(&self) -> usize {
        2
    }

    fn n_equations(&self) -> usize {
        3
    }

    fn observation_dim(&self) -> Option<usize> {
        Some(2)
    }

    fn g(&self, beta: &[f64], obs: &[f64]) -> Vec<f64> {
        let (x, y) = (obs[0], obs[1]);
        let resid = y - sigmoid(beta[0] + beta[1] * x);
        vec![resid, x * resid, y - self.rate]
    }

    fn grad_g(&self, beta: &[f64], obs: &[f64]) -> DMatrix<f64> {
        let x = obs[0];
        let a = sigmoid(beta[0] + beta[1] * x);
        let s = -a * (1.0 - a);
        DMatrix::from_row_slice(3, 2, &[s, s * x, s * x, s * x * x, 0.0, 0.0])
    }
}

type GFn = dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync;
type JacFn = dyn Fn(&[f64], &[f64]) -> DMatrix<f64> + Send + Sync;

/// A model assembled from two closures with declared dimensions.
pub struct FnModel {
    d: usize,
    q: usize,
    g: Box<GFn>,
    grad_g: Box<JacFn>,
}

impl FnModel {
    pub fn new<G, J>(d: usize, q: usize, g: G, grad_g: J) -> Self
    where
        G: Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
        J: Fn(&[f64], &[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        Self {
            d,
            q,
            g: Box::new(g),
            grad_g: Box::new(grad_g),
        }
    }
}

impl std::fmt::Debug for FnModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnModel")
            .field("d", &self.d)
            .field("q", &self.q)
            .finish_non_exhaustive()
    }
}

impl EstimatingModel for FnModel {
    fn dim(&self) -> usize {
        self.d
    }
    fn n_equations(&self) -> usize {
        self.q
    }
    fn g(&self, theta: &[f64], x: &[f64]) -> Vec<f64> {
        (self.g)(theta, x)
    }
    fn grad_g(&self, theta: &[f64], x: &[f64]) -> DMatrix<f64> {
        (self.grad_g)(theta, x)
    }
}

/// Largest mixed relative error between the model's Jacobian at `(θ, x)` and
/// a central-difference Jacobian with step `step`.
///
/// See [`numdiff::relative_error`] for the error measure.
pub fn check_jacobian<M: EstimatingModel + ?Sized>(
    model: &M,
    theta: &[f64],
    x: &[f64],
    step: f64,
) -> Result<f64> {
    let analytic = model.grad_g(theta, x);
    let (q, d) = (model.n_equations(), model.dim());
    if analytic.shape() != (q, d) || theta.len() != d {
        return Err(Error::Dimension(format!(
            "Jacobian has shape {:?}, expected ({q}, {d})",
            analytic.shape()
        )));
    }
    let numeric = numdiff::central_jacobian(|t| model.g(t, x), theta, step);
    Ok(numdiff::relative_error(analytic.as_slice(), numeric.as_slice()))
}

/// Binary `(x, y)` pairs from `x ~ Bernoulli(x_rate)` and
/// `y | x ~ Bernoulli(sigmoid(β₀ + β₁x))`, deterministic in `seed`.
pub fn synthetic_fertility_data(n: usize, beta: [f64; 2], x_rate: f64, seed: u64) -> Result<Dataset> {
    if n < 10 {
        return Err(Error::Config(format!("need at least 10 observations, got {n}")));
    }
    if !(x_rate > 0.0 && x_rate < 1.0) {
        return Err(Error::Config(format!("x_rate must lie in (0, 1), got {x_rate}")));
    }
    if !beta.iter().all(|b| b.is_finite()) {
        return Err(Error::NonFinite("regression coefficients".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let x = if rng.random::<f64>() < x_rate { 1.0 } else { 0.0 };
        let y = if rng.random::<f64>() < sigmoid(beta[0] + beta[1] * x) {
            1.0
        } else {
            0.0
        };
        values.extend([x, y]);
    }
    Dataset::new(values, n, 2)
}

/// Intercept `β₀` for which `(1 − x_rate)·sigmoid(β₀) + x_rate·sigmoid(β₀ + β₁)`
/// equals `target`, found by bisection.
pub fn intercept_for_marginal_rate(slope: f64, x_rate: f64, target: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) || !(x_rate > 0.0 && x_rate < 1.0) {
        return Err(Error::Config("rates must lie in (0, 1)".into()));
    }
    let marginal = |b0: f64| (1.0 - x_rate) * sigmoid(b0) + x_rate * sigmoid(b0 + slope);
    let (mut lo, mut hi) = (-50.0 - slope.abs(), 50.0 + slope.abs());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if marginal(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Built-in models by their command-line names.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum ModelSpec {
    Mean,
    LogisticConstrained { rate: f64 },
}

impl ModelSpec {
    /// Instantiates the model for observations with `p` columns.
    pub fn build(&self, p: usize) -> Result<Box<dyn EstimatingModel + Send + Sync>> {
        match *self {
            ModelSpec::Mean => Ok(Box::new(MeanModel::new(p))),
            ModelSpec::LogisticConstrained { rate } => {
                if p != 2 {
                    return Err(Error::Dimension(format!(
                        "logistic-constrained expects (x, y) rows, data has {p} columns"
                    )));
                }
                Ok(Box::new(ConstrainedLogisticModel::new(rate)?))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn mean_model_values() {
        let m = MeanModel::new(2);
        assert_eq!(m.g(&[1.0, 1.0], &[1.0, 1.0]), vec![0.0, 0.0]);
        let g = m.g(&[0.9, 0.95], &[1.0, -1.0]);
        assert_relative_eq!(g[0], -0.1, epsilon = 1e-15);
        assert_relative_eq!(g[1], 1.95, epsilon = 1e-15);
        assert_eq!(m.grad_g(&[3.0, -2.0], &[0.0, 7.0]), DMatrix::identity(2, 2));
    }

    #[test]
    fn logistic_at_zero() {
        let m = ConstrainedLogisticModel::default();
        let g = m.g(&[0.0, 0.0], &[1.0, 1.0]);
        assert_relative_eq!(g[0], 0.5);
        assert_relative_eq!(g[1], 0.5);
        assert_relative_eq!(g[2], 0.93821, epsilon = 1e-15);

        let g = m.g(&[0.0, 0.0], &[0.0, 0.0]);
        assert_eq!(g[0], -0.5);
        assert_eq!(g[1], 0.0);
        assert_relative_eq!(g[2], -0.06179, epsilon = 1e-15);
        let jac = m.grad_g(&[0.0, 0.0], &[0.0, 0.0]);
        assert_eq!(jac, DMatrix::from_row_slice(3, 2, &[-0.25, 0.0, 0.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn logistic_rate_row_is_zero() {
        let m = ConstrainedLogisticModel::new(0.3).unwrap();
        for (b, x) in [([1.0, -2.0], [1.0, 0.0]), ([-40.0, 3.0], [0.0, 1.0])] {
            let jac = m.grad_g(&b, &x);
            assert_eq!(jac.row(2).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0]);
        }
    }

    #[test]
    fn logistic_rejects_bad_rate() {
        assert!(ConstrainedLogisticModel::new(0.0).is_err());
        assert!(ConstrainedLogisticModel::new(1.0).is_err());
        assert!(ConstrainedLogisticModel::new(f64::NAN).is_err());
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert_eq!(sigmoid(1000.0), 1.0);
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert!(!sigmoid(-800.0).is_nan());
        assert_relative_eq!(sigmoid(2.0) + sigmoid(-2.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn jacobians_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mean = MeanModel::new(3);
        let logistic = ConstrainedLogisticModel::default();
        for _ in 0..100 {
            let theta: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
            assert!(check_jacobian(&mean, &theta, &x, 1e-6).unwrap() <= 1e-4);

            let beta = [rng.random_range(-6.0..2.0), rng.random_range(-3.0..3.0)];
            let obs = [
                f64::from(rng.random_bool(0.5) as u8),
                f64::from(rng.random_bool(0.5) as u8),
            ];
            assert!(check_jacobian(&logistic, &beta, &obs, 1e-6).unwrap() <= 1e-4);
        }
    }

    #[test]
    fn check_jacobian_catches_a_wrong_model() {
        let wrong = FnModel::new(
            1,
            1,
            |t, x| vec![t[0] * t[0] - x[0]],
            |_, _| DMatrix::from_element(1, 1, 1.0),
        );
        assert!(check_jacobian(&wrong, &[2.0], &[0.0], 1e-6).unwrap() > 0.1);
    }

    #[test]
    fn synthetic_data_is_reproducible_and_calibrated() {
        let slope = 0.55;
        let b0 = intercept_for_marginal_rate(slope, 0.5, 0.06179).unwrap();
        let marginal = 0.5 * sigmoid(b0) + 0.5 * sigmoid(b0 + slope);
        assert_relative_eq!(marginal, 0.06179, epsilon = 1e-12);

        let a = synthetic_fertility_data(1000, [b0, slope], 0.5, 3).unwrap();
        let b = synthetic_fertility_data(1000, [b0, slope], 0.5, 3).unwrap();
        assert_eq!(a, b);
        let ybar = a.column_means()[1];
        assert!((ybar - 0.06179).abs() < 0.02, "ybar = {ybar}");
        assert!(a.rows().all(|r| (r[0] == 0.0 || r[0] == 1.0) && (r[1] == 0.0 || r[1] == 1.0)));
    }

    #[test]
    fn small_synthetic_data_is_legal() {
        let d = synthetic_fertility_data(10, [-6.0, 0.0], 0.5, 1).unwrap();
        assert_eq!(d.n(), 10);
        assert!(synthetic_fertility_data(9, [-6.0, 0.0], 0.5, 1).is_err());
        assert!(synthetic_fertility_data(10, [-6.0, 0.0], 1.0, 1).is_err());
    }

    proptest! {
        #[test]
        fn logistic_g_is_bounded(b0 in -1e6f64..1e6, b1 in -1e6f64..1e6, x in 0u8..2, y in 0u8..2) {
            let m = ConstrainedLogisticModel::default();
            for v in m.g(&[b0, b1], &[f64::from(x), f64::from(y)]) {
                prop_assert!(v.is_finite() && (-1.0..=1.0).contains(&v));
            }
        }
    }
}
