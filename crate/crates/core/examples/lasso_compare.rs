//! Cross-validated lasso on raw data versus data cleaned by a detector.

use hidetify::downstream::{
    coefficient_metrics, fit_lasso_with, kkt_violation, lambda_max, log_lambda_grid,
    select_lambda_cv_with, LassoOptions, CV_MAX_SWEEPS,
};
use hidetify::simgen::{contaminate, generate_clean, ContaminationModel, ContaminationSpec};
use hidetify::{DataMatrix, Detector, RammParams};

fn fit_and_score(label: &str, data: &DataMatrix, beta: &[f64]) -> hidetify::Result<()> {
    let grid = log_lambda_grid(lambda_max(data), 0.01, 30);
    let opts = LassoOptions {
        max_sweeps: CV_MAX_SWEEPS,
        ..LassoOptions::default()
    };
    let lambda = select_lambda_cv_with(data, 5, &grid, 9, &opts)?;
    let fit = fit_lasso_with(data, lambda, &opts)?;
    let m = coefficient_metrics(&fit, beta)?;
    println!(
        "{label:>8}: n = {:>3}, lambda = {lambda:.4}, ERR = {:.4}, TPR = {:.2}, FPR = {:.3}, kkt = {:.1e}",
        data.n(),
        m.err,
        m.tpr,
        m.fpr,
        kkt_violation(data, &fit)?
    );
    Ok(())
}

fn main() -> hidetify::Result<()> {
    let clean = generate_clean(100, 200, 5)?;
    let sample = contaminate(
        &clean,
        &ContaminationSpec::new(ContaminationModel::Swamping, 10.0, 5),
    )?;

    let flagged = Detector::AsymMip
        .run(&sample.data, &RammParams::default().with_seed(5))?
        .influential;
    println!("planted {}, removed {}", sample.truth.len(), flagged.len());

    fit_and_score("raw", &sample.data, &sample.beta)?;
    fit_and_score(
        "cleaned",
        &sample.data.without_rows(&flagged)?,
        &sample.beta,
    )?;
    Ok(())
}
