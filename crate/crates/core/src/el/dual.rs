//! Damped Newton on the convex dual of the weight problem.
//!
//! The multiplier minimizes `f(λ) = −Σᵢ log*(1 + λᵀgᵢ)`, where `log*` is
//! the logarithm continued below `1/n` by the quadratic
//!
//! ```text
//! log*(z) = log(1/n) − 3/2 + 2nz − (nz)²/2,     z < 1/n
//! ```
//!
//! which matches `log` in value, slope and curvature at `1/n`. The dual is
//! then finite and convex on all of `ℝ^q`. When the origin is interior to the
//! hull of the rows it has a unique minimizer at which every `1 + λᵀgᵢ ≥ 1/n`,
//! so `log*` coincides with `log` there. Otherwise `f` is unbounded below
//! along some ray and the iterates run off to infinity.

use nalgebra::{DMatrix, DVector};

use super::{ElSolution, GMatrix, SolverSettings};
use crate::Result;

/// Armijo sufficient-decrease constant.
const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-12;
/// Target for `|Σ ω̂ᵢ − 1|`, which equals `|λᵀ∇f| / n` at a stationary point.
const SUM_DEFECT: f64 = 1e-12;
const RIDGE: f64 = 1e-10;

/// Returns `(log*(z), log*'(z), log*''(z))` with the switch at `threshold = 1/n`.
fn pseudo_log(z: f64, threshold: f64) -> (f64, f64, f64) {
    if z >= threshold {
        (z.ln(), 1.0 / z, -1.0 / (z * z))
    } else {
        let r = z / threshold;
        (
            threshold.ln() - 1.5 + 2.0 * r - 0.5 * r * r,
            (2.0 - r) / threshold,
            -1.0 / (threshold * threshold),
        )
    }
}

struct Dual<'a> {
    g: &'a GMatrix,
    threshold: f64,
}

struct DualPoint {
    value: f64,
    grad: DVector<f64>,
    hess: DMatrix<f64>,
}

impl Dual<'_> {
    fn margin(&self, lambda: &DVector<f64>, row: &[f64]) -> f64 {
        1.0 + row.iter().zip(lambda.iter()).map(|(a, b)| a * b).sum::<f64>()
    }

    fn value(&self, lambda: &DVector<f64>) -> f64 {
        -self
            .g
            .rows()
            .map(|row| pseudo_log(self.margin(lambda, row), self.threshold).0)
            .sum::<f64>()
    }

    fn point(&self, lambda: &DVector<f64>) -> DualPoint {
        let q = self.g.q();
        let mut value = 0.0;
        let mut grad = DVector::zeros(q);
        let mut hess = DMatrix::zeros(q, q);
        for row in self.g.rows() {
            let (v, d1, d2) = pseudo_log(self.margin(lambda, row), self.threshold);
            value -= v;
            for j in 0..q {
                grad[j] -= d1 * row[j];
                for k in 0..=j {
                    hess[(j, k)] -= d2 * row[j] * row[k];
                }
            }
        }
        hess.fill_upper_triangle_with_lower_triangle();
        DualPoint { value, grad, hess }
    }
}

/// Newton direction `−H⁻¹∇f`, with a small ridge if `H` is numerically singular.
fn newton_direction(hess: &DMatrix<f64>, grad: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(chol) = hess.clone().cholesky() {
        return Some(-chol.solve(grad));
    }
    let q = hess.nrows();
    let scale = hess.trace() / q as f64;
    let ridge = RIDGE * if scale > 0.0 { scale } else { 1.0 };
    let regularized = hess + DMatrix::identity(q, q) * ridge;
    regularized.cholesky().map(|chol| -chol.solve(grad))
}

/// Solves `Σᵢ gᵢ / (1 + λᵀgᵢ) = 0` for the Lagrange multiplier.
///
/// Feasibility is decided by the solve itself: the result is infeasible if
/// `‖λ‖` passes `lambda_cap`, if the iteration budget runs out with the dual
/// gradient above `tol`, or if the final weights cannot be certified strictly
/// positive. With `n ≤ q` the hull of the rows has no interior and the answer
/// is always infeasible.
pub fn solve_lambda(g: &GMatrix, settings: &SolverSettings) -> Result<ElSolution> {
    settings.validate()?;
    let (n, q) = (g.n(), g.q());
    if n <= q {
        return Ok(ElSolution::infeasible(vec![0.0; q], 0, f64::INFINITY));
    }
    let nf = n as f64;
    let dual = Dual {
        g,
        threshold: 1.0 / nf,
    };

    let mut lambda = DVector::<f64>::zeros(q);
    let mut point = dual.point(&lambda);
    let mut iterations = 0;
    while iterations < settings.max_iter {
        let grad_norm = point.grad.norm();
        if grad_norm <= settings.tol && lambda.dot(&point.grad).abs() <= SUM_DEFECT * nf {
            break;
        }
        let Some(direction) = newton_direction(&point.hess, &point.grad) else {
            break;
        };
        let slope = point.grad.dot(&direction);
        if !(slope < 0.0) {
            break;
        }

        let mut t = 1.0;
        let mut accepted = None;
        while t >= MIN_STEP {
            let candidate = &lambda + &direction * t;
            let value = dual.value(&candidate);
            if value <= point.value + ARMIJO * t * slope {
                accepted = Some(candidate);
                break;
            }
            // Close to the optimum the predicted decrease can fall below the
            // resolution of f; fall back to progress in the gradient norm.
            if t == 1.0 && value <= point.value + 1e-13 * (1.0 + point.value.abs()) {
                let trial = dual.point(&candidate);
                if trial.grad.norm() < grad_norm {
                    accepted = Some(candidate);
                    break;
                }
            }
            t *= 0.5;
        }
        let Some(next) = accepted else {
            break;
        };
        iterations += 1;
        lambda = next;
        if !(lambda.norm() <= settings.lambda_cap) {
            return Ok(ElSolution::infeasible(
                lambda.iter().copied().collect(),
                iterations,
                f64::INFINITY,
            ));
        }
        point = dual.point(&lambda);
    }

    let lambda_vec: Vec<f64> = lambda.iter().copied().collect();
    let grad_norm = point.grad.norm();
    if !(grad_norm <= settings.tol) {
        return Ok(ElSolution::infeasible(lambda_vec, iterations, grad_norm));
    }

    let mut weights = Vec::with_capacity(n);
    for row in g.rows() {
        let z = dual.margin(&lambda, row);
        // Below 1/n the quadratic branch is active and the multiplier
        // equation is not the one that was solved.
        if !(z >= dual.threshold * (1.0 - 1e-9)) {
            return Ok(ElSolution::infeasible(lambda_vec, iterations, grad_norm));
        }
        weights.push(1.0 / (nf * z));
    }
    let mut residual = vec![0.0; q];
    for (row, w) in g.rows().zip(&weights) {
        for (r, v) in residual.iter_mut().zip(row) {
            *r += w * v;
        }
    }
    let residual_norm = residual.iter().map(|r| r * r).sum::<f64>().sqrt();
    let log_el = weights.iter().map(|w| w.ln()).sum();

    Ok(ElSolution {
        weights,
        lambda: lambda_vec,
        log_el,
        feasible: true,
        iterations,
        residual_norm,
    })
}
