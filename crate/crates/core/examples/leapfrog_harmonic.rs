//! The integrator on its own, on a potential whose exact flow is known:
//! energy error scaling, reversibility and a recorded trajectory.
//!
//! cargo run --example leapfrog_harmonic

use elhmc::hmc::{kinetic_energy, leapfrog, Energy, PhasePoint, Potential, StepSize, Trajectory};

/// `U(θ) = ½‖θ‖²`.
struct Harmonic;

impl Potential for Harmonic {
    fn dim(&self) -> usize {
        2
    }

    fn energy(&self, theta: &[f64]) -> elhmc::Result<Energy> {
        Ok(Energy::feasible(
            0.5 * theta.iter().map(|t| t * t).sum::<f64>(),
            theta.to_vec(),
        ))
    }
}

fn hamiltonian(q: &[f64], p: &[f64]) -> f64 {
    0.5 * q.iter().map(|t| t * t).sum::<f64>() + kinetic_energy(p, 1.0)
}

fn main() -> elhmc::Result<()> {
    let start = PhasePoint {
        theta: vec![1.0, 0.0],
        p: vec![0.3, 0.5],
    };
    let h0 = hamiltonian(&start.theta, &start.p);

    // largest energy error along a trajectory of length 1
    println!("{:>8} {:>6} {:>14}", "epsilon", "steps", "max |H − H0|");
    for eps in [0.2f64, 0.1, 0.05, 0.025] {
        let steps = (1.0 / eps).round() as usize;
        let mut path = Trajectory::default();
        leapfrog(&Harmonic, &start, &start.theta, &StepSize::Scalar(eps), 1.0, steps, Some(&mut path))?;
        let worst = path
            .positions
            .iter()
            .zip(&path.momenta)
            .map(|(q, p)| (hamiltonian(q, p) - h0).abs())
            .fold(0.0, f64::max);
        println!("{eps:>8} {steps:>6} {worst:>14.3e}");
    }

    let mut trajectory = Trajectory::default();
    let out = leapfrog(&Harmonic, &start, &start.theta, &StepSize::Scalar(0.1), 1.0, 63, Some(&mut trajectory))?;
    let end = out.point();
    let back = PhasePoint {
        theta: end.theta.clone(),
        p: end.p.iter().map(|v| -v).collect(),
    };
    let grad = Harmonic.energy(&back.theta)?.grad;
    let returned = leapfrog(&Harmonic, &back, &grad, &StepSize::Scalar(0.1), 1.0, 63, None)?;
    let drift: f64 = returned
        .point()
        .theta
        .iter()
        .zip(&start.theta)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("{} recorded positions; round trip returns within {drift:.1e}", trajectory.positions.len());
    Ok(())
}
