//! Monte Carlo benchmarks: detection quality, and lasso fits on raw versus
//! cleaned data.
//!
//! Every replication draws its own seeds from `(seed, replication, purpose)`
//! so results do not depend on how replications are scheduled across threads.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lasso::{
    coefficient_metrics, fit_lasso_with, kkt_violation, lambda_max, log_lambda_grid,
    select_lambda_cv_with, LassoOptions,
};
use crate::detector::Detector;
use crate::error::{HidetifyError, Result};
use crate::ramm::RammParams;
use crate::seed::derive_seed;
use crate::simgen::{
    contaminate, detection_metrics, false_positive_rate, generate_clean, ContaminatedSample,
    ContaminationSpec,
};

const KEY_SAMPLE: u64 = 1;
const KEY_CONTAMINATION: u64 = 2;
const KEY_DETECTOR: u64 = 3;
const KEY_FOLDS: u64 = 4;

/// A detector, or `RawData` for fitting on the uncleaned sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    RawData,
    Detector(Detector),
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::RawData => "RawData",
            Method::Detector(d) => d.name(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = HidetifyError;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("rawdata") || s.eq_ignore_ascii_case("raw") {
            Ok(Method::RawData)
        } else {
            s.parse().map(Method::Detector)
        }
    }
}

/// One value in long format: `(method, model, mu, replication, metric, value)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub method: String,
    pub model: String,
    pub mu: f64,
    pub replication: usize,
    pub metric: String,
    pub value: f64,
}

pub fn write_records<W: Write>(writer: W, records: &[ResultRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: std::io::Read>(reader: R) -> Result<Vec<ResultRecord>> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .map(|r| r.map_err(HidetifyError::from))
        .collect()
}

/// Mean and quartiles of one metric for one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub method: String,
    pub metric: String,
    pub count: usize,
    pub mean: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
}

/// Summaries grouped by `(method, metric)`, in first-appearance order of
/// methods and metrics. Values are sorted before reduction.
pub fn summarize(records: &[ResultRecord]) -> Vec<MetricSummary> {
    let mut keys: Vec<(String, String)> = Vec::new();
    for r in records {
        let key = (r.method.clone(), r.metric.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(method, metric)| {
            let mut values: Vec<f64> = records
                .iter()
                .filter(|r| r.method == method && r.metric == metric)
                .map(|r| r.value)
                .collect();
            values.sort_by(f64::total_cmp);
            MetricSummary {
                count: values.len(),
                mean: values.iter().sum::<f64>() / values.len() as f64,
                q25: quantile_sorted(&values, 0.25),
                median: quantile_sorted(&values, 0.5),
                q75: quantile_sorted(&values, 0.75),
                method,
                metric,
            }
        })
        .collect()
}

/// Linear-interpolation quantile of sorted values.
fn quantile_sorted(values: &[f64], prob: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let pos = prob * (values.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    values[lo] + (values[hi] - values[lo]) * (pos - lo as f64)
}

pub fn write_summary<W: Write>(writer: W, summary: &[MetricSummary]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for s in summary {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}

/// Shared settings for simulated benchmarks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub n: usize,
    pub p: usize,
    /// Model, `μ` and fraction; its `seed` is ignored in favour of per-replication seeds.
    pub contamination: ContaminationSpec,
    pub replications: usize,
    pub seed: u64,
    pub params: RammParams,
}

impl SimulationConfig {
    fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(HidetifyError::InvalidParameter(
                "replications must be at least 1".into(),
            ));
        }
        self.contamination.validate()
    }

    /// The contaminated sample for replication `r`.
    pub fn sample(&self, r: usize) -> Result<ContaminatedSample> {
        let clean = generate_clean(
            self.n,
            self.p,
            derive_seed(self.seed, &[r as u64, KEY_SAMPLE]),
        )?;
        let spec = ContaminationSpec {
            seed: derive_seed(self.seed, &[r as u64, KEY_CONTAMINATION]),
            ..self.contamination
        };
        contaminate(&clean, &spec)
    }

    /// Detector parameters for replication `r`.
    pub fn detector_params(&self, r: usize) -> RammParams {
        self.params
            .clone()
            .with_seed(derive_seed(self.seed, &[r as u64, KEY_DETECTOR]))
    }

    fn record(&self, method: Method, r: usize, metric: &str, value: f64) -> ResultRecord {
        ResultRecord {
            method: method.name().to_string(),
            model: self.contamination.model.label().to_string(),
            mu: self.contamination.mu,
            replication: r,
            metric: metric.to_string(),
            value,
        }
    }
}

fn detection_records(
    config: &SimulationConfig,
    method: Method,
    r: usize,
    truth: &[usize],
    flagged: &[usize],
    n: usize,
) -> Result<Vec<ResultRecord>> {
    let mut out = Vec::with_capacity(2);
    if truth.is_empty() {
        out.push(config.record(method, r, "fpr_inf", false_positive_rate(truth, flagged, n)));
    } else {
        let m = detection_metrics(truth, flagged, n)?;
        out.push(config.record(method, r, "tpr_inf", m.tpr_inf));
        out.push(config.record(method, r, "fpr_inf", m.fpr_inf));
    }
    Ok(out)
}

/// Detection-only benchmark: `tpr_inf` and `fpr_inf` per detector and
/// replication (only `fpr_inf` when nothing is contaminated).
pub fn simulate_detection(
    config: &SimulationConfig,
    detectors: &[Detector],
) -> Result<Vec<ResultRecord>> {
    config.validate()?;
    let per_rep = (0..config.replications)
        .into_par_iter()
        .map(|r| {
            let sample = config.sample(r)?;
            let params = config.detector_params(r);
            let mut records = Vec::new();
            for &d in detectors {
                let result = d.run(&sample.data, &params)?;
                records.extend(detection_records(
                    config,
                    Method::Detector(d),
                    r,
                    &sample.truth,
                    &result.influential,
                    sample.data.n(),
                )?);
            }
            Ok(records)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_rep.into_iter().flatten().collect())
}

/// Settings for the lasso comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    pub simulation: SimulationConfig,
    pub methods: Vec<Method>,
    pub folds: usize,
    pub n_lambda: usize,
    /// Smallest grid value as a fraction of `λ_max`.
    pub lambda_ratio: f64,
    pub lasso: LassoOptions,
}

/// Sweep cap for cross-validated fits. Folds with fewer rows than active
/// slopes sit in a flat valley where coordinate descent needs more than the
/// single-fit default.
pub const CV_MAX_SWEEPS: usize = 100_000;

impl CompareConfig {
    pub fn new(simulation: SimulationConfig, methods: Vec<Method>) -> Self {
        Self {
            simulation,
            methods,
            folds: 5,
            n_lambda: 30,
            lambda_ratio: 0.01,
            lasso: LassoOptions {
                max_sweeps: CV_MAX_SWEEPS,
                ..LassoOptions::default()
            },
        }
    }
}

/// Generate, contaminate, clean with each method, fit a cross-validated lasso
/// on what remains and score it against the true slopes.
///
/// Metrics per `(method, replication)`: `err`, `coef_tpr`, `coef_fpr`,
/// `lambda`, `kkt_violation`, `n_removed`, plus `tpr_inf`/`fpr_inf` for
/// detectors.
pub fn compare_pipelines(config: &CompareConfig) -> Result<Vec<ResultRecord>> {
    let sim = &config.simulation;
    sim.validate()?;
    if config.methods.is_empty() {
        return Err(HidetifyError::InvalidParameter("no methods given".into()));
    }
    let per_rep = (0..sim.replications)
        .into_par_iter()
        .map(|r| {
            let sample = sim.sample(r)?;
            let params = sim.detector_params(r);
            let fold_seed = derive_seed(sim.seed, &[r as u64, KEY_FOLDS]);
            let mut records = Vec::new();
            for &method in &config.methods {
                let flagged = match method {
                    Method::RawData => Vec::new(),
                    Method::Detector(d) => d.run(&sample.data, &params)?.influential,
                };
                let cleaned = if flagged.is_empty() {
                    sample.data.clone()
                } else {
                    sample.data.without_rows(&flagged)?
                };
                let grid =
                    log_lambda_grid(lambda_max(&cleaned), config.lambda_ratio, config.n_lambda);
                let lambda =
                    select_lambda_cv_with(&cleaned, config.folds, &grid, fold_seed, &config.lasso)?;
                let fit = fit_lasso_with(&cleaned, lambda, &config.lasso)?;
                let metrics = coefficient_metrics(&fit, &sample.beta)?;
                for (name, value) in [
                    ("err", metrics.err),
                    ("coef_tpr", metrics.tpr),
                    ("coef_fpr", metrics.fpr),
                    ("lambda", lambda),
                    ("kkt_violation", kkt_violation(&cleaned, &fit)?),
                    ("n_removed", flagged.len() as f64),
                ] {
                    records.push(sim.record(method, r, name, value));
                }
                if method != Method::RawData {
                    records.extend(detection_records(
                        sim,
                        method,
                        r,
                        &sample.truth,
                        &flagged,
                        sample.data.n(),
                    )?);
                }
            }
            Ok(records)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_rep.into_iter().flatten().collect())
}
