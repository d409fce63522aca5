//! The inner optimization directly: multipliers and weights for a matrix of
//! estimating-function values.
//!
//! cargo run --example lambda_solver

use elhmc::el::{solve_lambda, GMatrix, SolverSettings};

fn show(label: &str, rows: &[[f64; 2]]) -> elhmc::Result<()> {
    let g = GMatrix::from_rows(rows)?;
    let sol = solve_lambda(&g, &SolverSettings::default())?;
    println!("{label}");
    if sol.feasible {
        println!("  lambda  {:?}", sol.lambda);
        println!("  weights {:?}", sol.weights);
        println!("  log L   {:.6} after {} Newton steps", sol.log_el, sol.iterations);
    } else {
        println!("  origin outside the convex hull: log L = {}", sol.log_el);
    }
    Ok(())
}

fn main() -> elhmc::Result<()> {
    show("balanced rows", &[[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])?;
    show("tilted rows", &[[2.0, 0.5], [-1.0, 0.3], [0.2, -1.5], [-0.4, 0.9]])?;
    show("all rows to one side", &[[1.0, 0.2], [0.5, -1.0], [2.0, 3.0]])?;
    Ok(())
}
