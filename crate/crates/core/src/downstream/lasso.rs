//! Lasso by cyclic coordinate descent.
//!
//! Columns are standardised internally (zero mean, unit `1/n` variance) and
//! the response is centred, so the problem solved is
//! `min (1/2n) ‖y_c − Z b‖² + λ ‖b‖₁` on the standardised design `Z`.
//! Reported coefficients are mapped back to the original predictor scale.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{HidetifyError, Result};
use crate::seed;

/// Tolerance of the stationarity check on the standardised scale.
pub const KKT_TOLERANCE: f64 = 1e-6;

/// Convergence controls for coordinate descent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LassoOptions {
    pub max_sweeps: usize,
    /// Stop once no standardised coefficient moves more than this in a sweep
    /// and the stationarity check holds.
    pub tolerance: f64,
}

impl Default for LassoOptions {
    fn default() -> Self {
        Self {
            max_sweeps: 10_000,
            tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoFit {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
    /// Coordinate-descent sweeps used.
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientMetrics {
    /// `sqrt(‖β̂ − β‖₂)`: the square root of the Euclidean norm itself.
    pub err: f64,
    pub tpr: f64,
    pub fpr: f64,
}

/// Standardised copy of a design.
struct Standardized {
    n: usize,
    /// Column-major standardised predictors; constant columns are all zero.
    z: Vec<f64>,
    means: Vec<f64>,
    /// `1/n` standard deviations; zero marks a constant column.
    scales: Vec<f64>,
    y_mean: f64,
    y_centered: Vec<f64>,
}

impl Standardized {
    fn new(data: &DataMatrix) -> Self {
        let n = data.n();
        let nf = n as f64;
        let mut z = Vec::with_capacity(n * data.p());
        let mut means = Vec::with_capacity(data.p());
        let mut scales = Vec::with_capacity(data.p());
        for col in data.columns() {
            let mean = col.iter().sum::<f64>() / nf;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf;
            let sd = var.sqrt();
            let scale_ref = col.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if sd <= 1e-12 * scale_ref || sd == 0.0 {
                z.extend(std::iter::repeat_n(0.0, n));
                scales.push(0.0);
            } else {
                z.extend(col.iter().map(|v| (v - mean) / sd));
                scales.push(sd);
            }
            means.push(mean);
        }
        let y = data.response();
        let y_mean = y.iter().sum::<f64>() / nf;
        Self {
            n,
            z,
            means,
            scales,
            y_mean,
            y_centered: y.iter().map(|v| v - y_mean).collect(),
        }
    }

    fn col(&self, j: usize) -> &[f64] {
        &self.z[j * self.n..(j + 1) * self.n]
    }

    fn p(&self) -> usize {
        self.scales.len()
    }

    /// `max_j |(1/n) z_jᵀ y_c|`.
    fn lambda_max(&self) -> f64 {
        (0..self.p())
            .map(|j| dot(self.col(j), &self.y_centered).abs() / self.n as f64)
            .fold(0.0, f64::max)
    }

    fn residual(&self, b: &[f64]) -> Vec<f64> {
        let mut r = self.y_centered.clone();
        for (j, &bj) in b.iter().enumerate() {
            if bj != 0.0 {
                for (ri, zi) in r.iter_mut().zip(self.col(j)) {
                    *ri -= zi * bj;
                }
            }
        }
        r
    }

    fn kkt_violation(&self, b: &[f64], r: &[f64], lambda: f64) -> f64 {
        let nf = self.n as f64;
        (0..self.p())
            .filter(|&j| self.scales[j] > 0.0)
            .map(|j| {
                let g = dot(self.col(j), r) / nf;
                if b[j] == 0.0 {
                    (g.abs() - lambda).max(0.0)
                } else {
                    (g - lambda * b[j].signum()).abs()
                }
            })
            .fold(0.0, f64::max)
    }

    fn objective(&self, r: &[f64], b: &[f64], lambda: f64) -> f64 {
        dot(r, r) / (2.0 * self.n as f64) + lambda * b.iter().map(|v| v.abs()).sum::<f64>()
    }

    /// Coordinate descent from `b` (updated in place). Returns sweeps used.
    fn descend(
        &self,
        b: &mut [f64],
        lambda: f64,
        opts: &LassoOptions,
        mut on_sweep: impl FnMut(f64),
    ) -> Result<usize> {
        let nf = self.n as f64;
        let mut r = self.residual(b);
        for sweep in 1..=opts.max_sweeps {
            let mut max_change = 0.0_f64;
            for j in 0..self.p() {
                if self.scales[j] == 0.0 {
                    continue;
                }
                let zj = self.col(j);
                let old = b[j];
                let rho = dot(zj, &r) / nf + old;
                let new = soft_threshold(rho, lambda);
                if new != old {
                    let delta = new - old;
                    for (ri, zi) in r.iter_mut().zip(zj) {
                        *ri -= zi * delta;
                    }
                    b[j] = new;
                    max_change = max_change.max(delta.abs());
                }
            }
            on_sweep(self.objective(&r, b, lambda));
            if max_change < opts.tolerance {
                // Recompute the residual to shed accumulated drift before certifying.
                r = self.residual(b);
                if self.kkt_violation(b, &r, lambda) <= 0.1 * KKT_TOLERANCE {
                    return Ok(sweep);
                }
            }
        }
        Err(HidetifyError::NoConvergence {
            what: "lasso coordinate descent",
            iterations: opts.max_sweeps,
        })
    }

    fn to_fit(&self, b: &[f64], lambda: f64, iterations: usize) -> LassoFit {
        let coefficients: Vec<f64> = b
            .iter()
            .zip(&self.scales)
            .map(|(&bj, &s)| if s > 0.0 { bj / s } else { 0.0 })
            .collect();
        let intercept = self.y_mean
            - coefficients
                .iter()
                .zip(&self.means)
                .map(|(c, m)| c * m)
                .sum::<f64>();
        LassoFit {
            coefficients,
            intercept,
            lambda,
            iterations,
        }
    }

    fn standardized_coefficients(&self, fit: &LassoFit) -> Vec<f64> {
        fit.coefficients
            .iter()
            .zip(&self.scales)
            .map(|(c, s)| c * s)
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn soft_threshold(value: f64, lambda: f64) -> f64 {
    if value > lambda {
        value - lambda
    } else if value < -lambda {
        value + lambda
    } else {
        0.0
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(HidetifyError::InvalidParameter(format!(
            "lambda {lambda} must be finite and non-negative"
        )))
    }
}

/// Smallest `λ` at which every slope is zero: `max_j |(1/n) z_jᵀ (y − ȳ)|`.
pub fn lambda_max(data: &DataMatrix) -> f64 {
    Standardized::new(data).lambda_max()
}

/// `count` log-spaced values from `max` down to `max · ratio`.
pub fn log_lambda_grid(max: f64, ratio: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![max];
    }
    let (hi, lo) = (max.ln(), (max * ratio).ln());
    (0..count)
        .map(|i| (hi + (lo - hi) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

pub fn fit_lasso(data: &DataMatrix, lambda: f64) -> Result<LassoFit> {
    fit_lasso_with(data, lambda, &LassoOptions::default())
}

pub fn fit_lasso_with(data: &DataMatrix, lambda: f64, opts: &LassoOptions) -> Result<LassoFit> {
    check_lambda(lambda)?;
    let s = Standardized::new(data);
    let mut b = vec![0.0; s.p()];
    let sweeps = s.descend(&mut b, lambda, opts, |_| {})?;
    Ok(s.to_fit(&b, lambda, sweeps))
}

/// Fits along `lambdas` (any order; solved from largest to smallest with
/// warm starts). Results are returned in the input order.
pub fn fit_lasso_path(
    data: &DataMatrix,
    lambdas: &[f64],
    opts: &LassoOptions,
) -> Result<Vec<LassoFit>> {
    for &l in lambdas {
        check_lambda(l)?;
    }
    let s = Standardized::new(data);
    let mut order: Vec<usize> = (0..lambdas.len()).collect();
    order.sort_by(|&a, &b| lambdas[b].total_cmp(&lambdas[a]));
    let mut b = vec![0.0; s.p()];
    let mut fits: Vec<Option<LassoFit>> = vec![None; lambdas.len()];
    for idx in order {
        let sweeps = s.descend(&mut b, lambdas[idx], opts, |_| {})?;
        fits[idx] = Some(s.to_fit(&b, lambdas[idx], sweeps));
    }
    Ok(fits
        .into_iter()
        .map(|f| f.expect("every index visited"))
        .collect())
}

/// Penalised objective after each sweep, for checking monotone descent.
pub fn objective_trace(data: &DataMatrix, lambda: f64, opts: &LassoOptions) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    let s = Standardized::new(data);
    let mut b = vec![0.0; s.p()];
    let mut trace = vec![s.objective(&s.y_centered, &b, lambda)];
    s.descend(&mut b, lambda, opts, |obj| trace.push(obj))?;
    Ok(trace)
}

/// Largest stationarity violation of `fit` on `data`, measured on the
/// standardised scale: `max(0, |g_j| − λ)` for zero coefficients and
/// `|g_j − λ sign(b_j)|` otherwise, with `g_j = (1/n) z_jᵀ r`.
pub fn kkt_violation(data: &DataMatrix, fit: &LassoFit) -> Result<f64> {
    if fit.coefficients.len() != data.p() {
        return Err(HidetifyError::LengthMismatch {
            expected: data.p(),
            actual: fit.coefficients.len(),
        });
    }
    let s = Standardized::new(data);
    let b = s.standardized_coefficients(fit);
    let r = s.residual(&b);
    Ok(s.kkt_violation(&b, &r, fit.lambda))
}

pub fn predict(fit: &LassoFit, data: &DataMatrix) -> Vec<f64> {
    let mut out = vec![fit.intercept; data.n()];
    for (col, &c) in data.columns().zip(&fit.coefficients) {
        if c != 0.0 {
            for (o, x) in out.iter_mut().zip(col) {
                *o += c * x;
            }
        }
    }
    out
}

/// Held-out mean squared error per fold (rows) and grid value (columns).
/// `fold_of[i]` is the fold of row `i`.
pub fn cross_validation_errors(
    data: &DataMatrix,
    fold_of: &[usize],
    grid: &[f64],
    opts: &LassoOptions,
) -> Result<Vec<Vec<f64>>> {
    if fold_of.len() != data.n() {
        return Err(HidetifyError::LengthMismatch {
            expected: data.n(),
            actual: fold_of.len(),
        });
    }
    let folds = fold_of.iter().copied().max().map_or(0, |m| m + 1);
    (0..folds)
        .map(|f| {
            let test: Vec<usize> = (0..data.n()).filter(|&i| fold_of[i] == f).collect();
            let train: Vec<usize> = (0..data.n()).filter(|&i| fold_of[i] != f).collect();
            let train_data = data.select_rows(&train)?;
            let fits = fit_lasso_path(&train_data, grid, opts)?;
            let y = data.response();
            Ok(fits
                .iter()
                .map(|fit| {
                    test.iter()
                        .map(|&i| {
                            let pred = fit.intercept
                                + fit
                                    .coefficients
                                    .iter()
                                    .enumerate()
                                    .map(|(j, c)| c * data.get(i, j))
                                    .sum::<f64>();
                            (y[i] - pred) * (y[i] - pred)
                        })
                        .sum::<f64>()
                        / test.len() as f64
                })
                .collect())
        })
        .collect()
}

/// Random balanced fold labels for `n` rows.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng_for(seed, &[0xF01D]));
    let mut fold_of = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        fold_of[i] = pos % folds;
    }
    fold_of
}

/// Grid value with the smallest mean held-out error over `folds` random
/// folds; ties go to the larger `λ`.
pub fn select_lambda_cv(data: &DataMatrix, folds: usize, grid: &[f64], seed: u64) -> Result<f64> {
    select_lambda_cv_with(data, folds, grid, seed, &LassoOptions::default())
}

pub fn select_lambda_cv_with(
    data: &DataMatrix,
    folds: usize,
    grid: &[f64],
    seed: u64,
    opts: &LassoOptions,
) -> Result<f64> {
    if grid.is_empty() {
        return Err(HidetifyError::InvalidParameter(
            "lambda grid is empty".into(),
        ));
    }
    if folds < 2 || folds > data.n() {
        return Err(HidetifyError::InvalidParameter(format!(
            "folds = {folds} must lie in [2, n = {}]",
            data.n()
        )));
    }
    if grid.len() == 1 {
        check_lambda(grid[0])?;
        return Ok(grid[0]);
    }
    let errors =
        cross_validation_errors(data, &fold_assignment(data.n(), folds, seed), grid, opts)?;
    let mean_error = |g: usize| errors.iter().map(|row| row[g]).sum::<f64>() / errors.len() as f64;
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| grid[b].total_cmp(&grid[a]));
    let best = order
        .into_iter()
        .map(|g| (g, mean_error(g)))
        .reduce(|best, cand| if cand.1 < best.1 { cand } else { best })
        .expect("grid is non-empty");
    Ok(grid[best.0])
}

pub fn coefficient_metrics(fit: &LassoFit, true_beta: &[f64]) -> Result<CoefficientMetrics> {
    if fit.coefficients.len() != true_beta.len() {
        return Err(HidetifyError::LengthMismatch {
            expected: true_beta.len(),
            actual: fit.coefficients.len(),
        });
    }
    let norm = fit
        .coefficients
        .iter()
        .zip(true_beta)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let (mut support, mut null, mut hits, mut false_hits) = (0, 0, 0, 0);
    for (&est, &truth) in fit.coefficients.iter().zip(true_beta) {
        if truth != 0.0 {
            support += 1;
            hits += usize::from(est != 0.0);
        } else {
            null += 1;
            false_hits += usize::from(est != 0.0);
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Ok(CoefficientMetrics {
        err: norm.sqrt(),
        tpr: ratio(hits, support),
        fpr: ratio(false_hits, null),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fit_with(coefficients: Vec<f64>) -> LassoFit {
        LassoFit {
            coefficients,
            intercept: 0.0,
            lambda: 0.0,
            iterations: 0,
        }
    }

    #[test]
    fn coefficient_metric_examples() {
        let beta = crate::simgen::true_beta(20);
        let exact = coefficient_metrics(&fit_with(beta.clone()), &beta).unwrap();
        assert_eq!((exact.err, exact.tpr, exact.fpr), (0.0, 1.0, 0.0));

        let zero = coefficient_metrics(&fit_with(vec![0.0; 20]), &beta).unwrap();
        let norm = beta.iter().map(|b| b * b).sum::<f64>().sqrt();
        assert_eq!((zero.tpr, zero.fpr), (0.0, 0.0));
        assert!((zero.err - norm.sqrt()).abs() < 1e-15);

        let swapped = coefficient_metrics(&fit_with(vec![0.0, 1.0]), &[1.0, 0.0]).unwrap();
        assert_eq!((swapped.tpr, swapped.fpr), (0.0, 1.0));
        assert!((swapped.err - 2f64.sqrt().sqrt()).abs() < 1e-15);
        assert!((swapped.err - 1.189).abs() < 1e-3);

        assert!(coefficient_metrics(&fit_with(vec![0.0]), &[1.0, 0.0]).is_err());
    }

    #[test]
    fn soft_threshold_kills_small_values() {
        assert_eq!(soft_threshold(0.3, 0.5), 0.0);
        assert_eq!(soft_threshold(-0.3, 0.5), 0.0);
        assert_eq!(soft_threshold(2.0, 0.5), 1.5);
        assert_eq!(soft_threshold(-2.0, 0.5), -1.5);
    }

    #[test]
    fn grid_is_log_spaced() {
        let g = log_lambda_grid(2.0, 0.01, 3);
        assert!((g[0] - 2.0).abs() < 1e-12);
        assert!((g[1] - 0.2).abs() < 1e-12);
        assert!((g[2] - 0.02).abs() < 1e-12);
        assert_eq!(log_lambda_grid(2.0, 0.01, 1), vec![2.0]);
    }

    #[test]
    fn single_grid_value_is_returned() {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, (i % 3) as f64]).collect();
        let data = DataMatrix::from_rows(&rows, vec![1.0, 2.0, 1.5, 3.0, 2.5, 4.0]).unwrap();
        assert_eq!(select_lambda_cv(&data, 2, &[0.7], 0).unwrap(), 0.7);
        assert!(select_lambda_cv(&data, 1, &[0.7, 0.1], 0).is_err());
        assert!(select_lambda_cv(&data, 2, &[], 0).is_err());
        assert!(fit_lasso(&data, -1.0).is_err());
    }

    #[test]
    fn fold_assignment_is_balanced_and_seeded() {
        let f = fold_assignment(10, 3, 5);
        assert_eq!(f, fold_assignment(10, 3, 5));
        let counts: Vec<usize> = (0..3)
            .map(|k| f.iter().filter(|&&x| x == k).count())
            .collect();
        assert_eq!(counts.iter().sum::<usize>(), 10);
        assert!(counts.iter().all(|&c| c == 3 || c == 4));
    }
}
