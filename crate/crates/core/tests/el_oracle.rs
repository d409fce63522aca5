mod common;

use elhmc::el::{self, Dataset, GMatrix, SolverSettings};
use elhmc::hmc::chain_rng;
use elhmc::models::{ConstrainedLogisticModel, EstimatingModel, FnModel, MeanModel};
use elhmc::numdiff::{central_gradient, relative_error};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn settings() -> SolverSettings {
    SolverSettings::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn dual_matches_primal(seed in any::<u64>(), n in 3usize..12, q in 1usize..=3) {
        prop_assume!(n > q);
        let mut rng = chain_rng(seed, 0);
        let (g, mix) = common::feasible_instance(&mut rng, n, q);
        let sol = el::solve_lambda(&g, &settings()).unwrap();
        prop_assert!(sol.feasible);
        let oracle = common::primal_log_el(&g, &mix);
        prop_assert!((sol.log_el - oracle).abs() <= 1e-7, "dual {} primal {}", sol.log_el, oracle);
        // the optimum is never below the feasible point it started from
        let start: f64 = mix.iter().map(|w| w.ln()).sum();
        prop_assert!(sol.log_el >= start - 1e-9);
    }

    #[test]
    fn certified_infeasible_instances_are_rejected(seed in any::<u64>(), n in 2usize..12, q in 1usize..=3) {
        let mut rng = chain_rng(seed, 0);
        let g = common::infeasible_instance(&mut rng, n, q);
        let sol = el::solve_lambda(&g, &settings()).unwrap();
        prop_assert!(!sol.feasible);
        prop_assert_eq!(sol.log_el, f64::NEG_INFINITY);
    }

    #[test]
    fn permuting_rows_permutes_weights(seed in any::<u64>(), n in 4usize..10) {
        let mut rng = chain_rng(seed, 0);
        let (g, _) = common::feasible_instance(&mut rng, n, 2);
        let rows: Vec<Vec<f64>> = g.rows().map(<[f64]>::to_vec).collect();
        let reversed: Vec<Vec<f64>> = rows.iter().rev().cloned().collect();
        let a = el::solve_lambda(&g, &settings()).unwrap();
        let b = el::solve_lambda(&GMatrix::from_rows(&reversed).unwrap(), &settings()).unwrap();
        prop_assert!((a.log_el - b.log_el).abs() <= 1e-9);
        for (x, y) in a.weights.iter().zip(b.weights.iter().rev()) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn mean_model_gradient_matches_differences(t0 in -0.95f64..0.95, t1 in -0.95f64..0.95) {
        let data = common::square_data();
        let model = MeanModel::new(2);
        let theta = [t0, t1];
        let sol = el::log_el(&model, &theta, &data, &settings()).unwrap();
        prop_assert!(sol.feasible);
        let analytic = el::grad_log_el(&model, &theta, &data, &sol).unwrap();
        let numeric = central_gradient(
            |t| el::log_el(&model, t, &data, &settings()).unwrap().log_el,
            &theta,
            1e-6,
        );
        prop_assert!(relative_error(&analytic, &numeric) <= 1e-4);
    }
}

#[test]
fn log_el_is_maximal_at_the_sample_mean() {
    let data = common::square_data();
    let model = MeanModel::new(2);
    let best = el::log_el(&model, &[0.0, 0.0], &data, &settings()).unwrap().log_el;
    assert!((best + 8.0 * 8f64.ln()).abs() < 1e-12);
    for theta in [[0.3, 0.0], [-0.2, 0.5], [0.9, -0.9]] {
        assert!(el::log_el(&model, &theta, &data, &settings()).unwrap().log_el < best);
    }
}

#[test]
fn logistic_gradient_on_synthetic_data() {
    let data = elhmc::models::synthetic_fertility_data(400, [-3.0, 1.5], 0.35, 5).unwrap();
    let model = ConstrainedLogisticModel::default();
    let theta = [-3.1, 1.2];
    let sol = el::log_el(&model, &theta, &data, &settings()).unwrap();
    assert!(sol.feasible);
    let analytic = el::grad_log_el(&model, &theta, &data, &sol).unwrap();
    let numeric = central_gradient(
        |t| el::log_el(&model, t, &data, &settings()).unwrap().log_el,
        &theta,
        1e-6,
    );
    assert!(relative_error(&analytic, &numeric) <= 1e-4);
}

#[test]
fn custom_model_quantile_equation() {
    // median of a 1-D sample through a smoothed indicator
    let model = FnModel::new(
        1,
        1,
        |t: &[f64], x: &[f64]| vec![(x[0] - t[0]).tanh()],
        |t: &[f64], x: &[f64]| {
            let c = (x[0] - t[0]).cosh();
            DMatrix::from_element(1, 1, -1.0 / (c * c))
        },
    );
    assert_eq!(model.dim(), 1);
    let data = Dataset::from_rows(&[[-2.0], [-0.5], [0.1], [0.7], [3.0]]).unwrap();
    let sol = el::log_el(&model, &[0.1], &data, &settings()).unwrap();
    assert!(sol.feasible);
    let analytic = el::grad_log_el(&model, &[0.1], &data, &sol).unwrap();
    let numeric = central_gradient(
        |t| el::log_el(&model, t, &data, &settings()).unwrap().log_el,
        &[0.1],
        1e-6,
    );
    assert!(relative_error(&analytic, &numeric) <= 1e-4);
    assert!(!el::log_el(&model, &[3.5], &data, &settings()).unwrap().feasible);
}
