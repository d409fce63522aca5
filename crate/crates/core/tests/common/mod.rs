//! Oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use elhmc::el::{Dataset, GMatrix};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// The eight boundary points of the square `[−1, 1]²`.
pub fn square_data() -> Dataset {
    Dataset::from_rows(&[
        [1.0, 1.0],
        [1.0, 0.0],
        [1.0, -1.0],
        [0.0, -1.0],
        [-1.0, -1.0],
        [-1.0, 0.0],
        [-1.0, 1.0],
        [0.0, 1.0],
    ])
    .unwrap()
}

/// A random instance whose rows are centred on a strictly positive mixture,
/// returned with that mixture, which is a feasible point of the primal.
pub fn feasible_instance<R: Rng>(rng: &mut R, n: usize, q: usize) -> (GMatrix, Vec<f64>) {
    let raw: Vec<f64> = (0..n * q).map(|_| rng.random_range(-3.0..3.0)).collect();
    let mix: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = mix.iter().sum();
    let mix: Vec<f64> = mix.iter().map(|m| m / total).collect();
    let mut centre = vec![0.0; q];
    for i in 0..n {
        for j in 0..q {
            centre[j] += mix[i] * raw[i * q + j];
        }
    }
    let values = (0..n * q).map(|k| raw[k] - centre[k % q]).collect();
    (GMatrix::new(values, n, q).unwrap(), mix)
}

/// A random instance whose first coordinate is strictly positive in every
/// row, so no probability vector can average the rows to zero.
pub fn infeasible_instance<R: Rng>(rng: &mut R, n: usize, q: usize) -> GMatrix {
    let values = (0..n * q)
        .map(|k| {
            if k % q == 0 {
                rng.random_range(0.1..3.0)
            } else {
                rng.random_range(-3.0..3.0)
            }
        })
        .collect();
    GMatrix::new(values, n, q).unwrap()
}

/// Maximizes `Σ log ωᵢ` subject to `Σ ωᵢ = 1` and `Σ ωᵢ gᵢ = 0` directly over
/// the weights, by feasible-start Newton on the KKT system
///
/// ```text
/// [ H  Aᵀ ] [ Δ ]   [ −∇ ]
/// [ A  0  ] [ ν ] = [  0 ]
/// ```
///
/// with `A = [1ᵀ; Gᵀ]` and `H = diag(−1/ω²)`. `start` must satisfy the
/// constraints with positive entries.
pub fn primal_log_el(g: &GMatrix, start: &[f64]) -> f64 {
    let (n, q) = (g.n(), g.q());
    let m = q + 1;
    let mut a = DMatrix::<f64>::zeros(m, n);
    for i in 0..n {
        a[(0, i)] = 1.0;
        for j in 0..q {
            a[(j + 1, i)] = g.row(i)[j];
        }
    }
    let objective = |w: &DVector<f64>| w.iter().map(|v| v.ln()).sum::<f64>();
    let mut w = DVector::from_column_slice(start);
    for _ in 0..200 {
        let mut kkt = DMatrix::<f64>::zeros(n + m, n + m);
        let mut rhs = DVector::<f64>::zeros(n + m);
        for i in 0..n {
            kkt[(i, i)] = -1.0 / (w[i] * w[i]);
            rhs[i] = -1.0 / w[i];
        }
        kkt.view_mut((0, n), (n, m)).copy_from(&a.transpose());
        kkt.view_mut((n, 0), (m, n)).copy_from(&a);
        let Some(sol) = kkt.lu().solve(&rhs) else {
            break;
        };
        let step = sol.rows(0, n).into_owned();
        // Newton decrement
        let decrement: f64 = (0..n).map(|i| (step[i] / w[i]).powi(2)).sum();
        if decrement < 1e-26 {
            break;
        }
        let base = objective(&w);
        let slope: f64 = (0..n).map(|i| step[i] / w[i]).sum();
        let mut t = 1.0;
        loop {
            let trial = &w + &step * t;
            if trial.iter().all(|v| *v > 0.0) && objective(&trial) >= base + 0.25 * t * slope {
                w = trial;
                break;
            }
            t *= 0.5;
            if t < 1e-14 {
                return objective(&w);
            }
        }
    }
    objective(&w)
}
