mod common;

use common::Lcg;
use hidetify::downstream::{
    coefficient_metrics, cross_validation_errors, fit_lasso, kkt_violation, lambda_max,
    log_lambda_grid, objective_trace, select_lambda_cv, soft_threshold, LassoFit, LassoOptions,
    KKT_TOLERANCE,
};
use hidetify::{DataMatrix, HidetifyError};
use nalgebra::{DMatrix, DVector};

fn random_data(g: &mut Lcg, n: usize, p: usize, beta: &[f64]) -> DataMatrix {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..p).map(|_| g.normal()).collect())
        .collect();
    let y = rows
        .iter()
        .map(|r| 1.5 + r.iter().zip(beta).map(|(x, b)| x * b).sum::<f64>() + 0.5 * g.normal())
        .collect();
    DataMatrix::from_rows(&rows, y).unwrap()
}

/// Least squares with intercept through the normal equations.
fn ols(data: &DataMatrix) -> (f64, Vec<f64>) {
    let (n, p) = (data.n(), data.p());
    let x = DMatrix::from_fn(
        n,
        p + 1,
        |i, j| if j == 0 { 1.0 } else { data.get(i, j - 1) },
    );
    let y = DVector::from_column_slice(data.response());
    let xt = x.transpose();
    let coef = (&xt * &x).lu().solve(&(&xt * y)).unwrap();
    (coef[0], coef.iter().skip(1).copied().collect())
}

#[test]
fn zero_penalty_matches_least_squares() {
    let mut g = Lcg(41);
    let data = random_data(&mut g, 50, 5, &[1.0, -2.0, 0.5, 0.0, 3.0]);
    let fit = fit_lasso(&data, 0.0).unwrap();
    let (b0, b) = ols(&data);
    assert!((fit.intercept - b0).abs() < 1e-5);
    for (a, c) in fit.coefficients.iter().zip(&b) {
        assert!((a - c).abs() < 1e-5, "{a} vs {c}");
    }
}

#[test]
fn penalty_above_lambda_max_zeroes_everything() {
    let mut g = Lcg(43);
    let data = random_data(&mut g, 40, 8, &[1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0]);
    let lmax = lambda_max(&data);
    for lambda in [lmax, 1.5 * lmax] {
        let fit = fit_lasso(&data, lambda).unwrap();
        assert!(fit.coefficients.iter().all(|&c| c == 0.0));
        let mean = data.response().iter().sum::<f64>() / 40.0;
        assert!((fit.intercept - mean).abs() < 1e-12);
    }
    let fit = fit_lasso(&data, 0.99 * lmax).unwrap();
    assert!(fit.coefficients.iter().any(|&c| c != 0.0));
}

#[test]
fn orthonormal_design_soft_thresholds_least_squares() {
    // Columns of an 8×8 Hadamard matrix other than the constant one: zero
    // mean, unit 1/n variance, mutually orthogonal.
    let h = |i: usize, j: usize| {
        if (i & j).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    };
    let cols = [1usize, 2, 3, 5];
    let rows: Vec<Vec<f64>> = (0..8)
        .map(|i| cols.iter().map(|&j| h(i, j)).collect())
        .collect();
    let y = vec![3.0, -1.0, 2.5, 0.5, -2.0, 4.0, 1.0, -0.5];
    let data = DataMatrix::from_rows(&rows, y.clone()).unwrap();
    for lambda in [0.0, 0.2, 0.6, 1.1] {
        let fit = fit_lasso(&data, lambda).unwrap();
        for (j, row_j) in cols.iter().enumerate() {
            let ols_j = (0..8).map(|i| h(i, *row_j) * y[i]).sum::<f64>() / 8.0;
            assert!((fit.coefficients[j] - soft_threshold(ols_j, lambda)).abs() < 1e-9);
        }
    }
}

#[test]
fn fits_pass_kkt_and_objective_never_rises() {
    let mut g = Lcg(47);
    let mut beta = vec![0.0; 60];
    beta[..5].copy_from_slice(&[2.0, -1.5, 1.0, 0.5, 3.0]);
    let data = random_data(&mut g, 40, 60, &beta);
    let lmax = lambda_max(&data);
    for lambda in log_lambda_grid(lmax, 0.01, 10) {
        let fit = fit_lasso(&data, lambda).unwrap();
        assert!(kkt_violation(&data, &fit).unwrap() <= KKT_TOLERANCE);
        let trace = objective_trace(&data, lambda, &LassoOptions::default()).unwrap();
        for w in trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].abs());
        }
    }
}

#[test]
fn single_grid_value_is_selected() {
    let mut g = Lcg(53);
    let data = random_data(&mut g, 30, 4, &[1.0, 0.0, 0.0, 1.0]);
    assert_eq!(select_lambda_cv(&data, 5, &[0.37], 1).unwrap(), 0.37);
}

#[test]
fn pure_noise_selects_large_penalties() {
    let mut upper = 0;
    for seed in 0..50u64 {
        let mut g = Lcg(1000 + seed);
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|_| (0..20).map(|_| g.normal()).collect())
            .collect();
        let y: Vec<f64> = (0..60).map(|_| g.normal()).collect();
        let data = DataMatrix::from_rows(&rows, y).unwrap();
        let grid = log_lambda_grid(lambda_max(&data), 0.01, 20);
        let chosen = select_lambda_cv(&data, 5, &grid, seed).unwrap();
        if grid.iter().position(|&l| l == chosen).unwrap() < 10 {
            upper += 1;
        }
    }
    assert!(upper >= 40, "{upper} of 50 in the upper half");
}

#[test]
fn duplicated_halves_give_identical_fold_errors() {
    let mut g = Lcg(59);
    let half = random_data(&mut g, 20, 3, &[1.0, -1.0, 0.5]);
    let mut values = Vec::new();
    for j in 0..3 {
        values.extend_from_slice(half.column(j));
        values.extend_from_slice(half.column(j));
    }
    let mut y = half.response().to_vec();
    y.extend_from_slice(half.response());
    let data = DataMatrix::new(40, 3, values, y).unwrap();
    let fold_of: Vec<usize> = (0..40).map(|i| i / 20).collect();
    let grid = log_lambda_grid(lambda_max(&data), 0.05, 6);
    let errors = cross_validation_errors(&data, &fold_of, &grid, &LassoOptions::default()).unwrap();
    for (a, b) in errors[0].iter().zip(&errors[1]) {
        assert!((a - b).abs() < 1e-10);
    }
}

fn fit_with(coefficients: Vec<f64>) -> LassoFit {
    LassoFit {
        coefficients,
        intercept: 0.0,
        lambda: 0.1,
        iterations: 1,
    }
}

#[test]
fn coefficient_metric_examples() {
    let beta = hidetify::simgen::true_beta(20);
    let m = coefficient_metrics(&fit_with(beta.clone()), &beta).unwrap();
    assert_eq!((m.err, m.tpr, m.fpr), (0.0, 1.0, 0.0));

    let m = coefficient_metrics(&fit_with(vec![0.0; 20]), &beta).unwrap();
    let norm = beta.iter().map(|b| b * b).sum::<f64>().sqrt();
    assert_eq!((m.tpr, m.fpr), (0.0, 0.0));
    assert!((m.err - norm.sqrt()).abs() < 1e-12);

    let m = coefficient_metrics(&fit_with(vec![0.0, 1.0]), &[1.0, 0.0]).unwrap();
    assert_eq!((m.tpr, m.fpr), (0.0, 1.0));
    assert!((m.err - 2f64.sqrt().sqrt()).abs() < 1e-12);
    assert!((m.err - 1.189).abs() < 1e-3);
    // The error is the square root of the norm, so its square is the norm.
    assert!((m.err * m.err - 2f64.sqrt()).abs() < 1e-12);

    assert!(matches!(
        coefficient_metrics(&fit_with(vec![0.0; 3]), &[1.0, 0.0]),
        Err(HidetifyError::LengthMismatch { .. })
    ));
}
