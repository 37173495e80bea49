//! Synthetic benchmark data.
//!
//! Clean rows follow `y = xᵀβ + ε` with `x ~ N(0, Σ)`, `Σ_jj' = 0.5^|j−j'|`,
//! `ε ~ N(0, 1)` and the sparse slope vector [`TRUE_SLOPES`] padded with
//! zeros. The first `⌊fraction · n⌋` rows can then be replaced by influential
//! rows from one of three schemes:
//!
//! * **Model I (masking):** rows clustered around the row with the largest
//!   `|y|`, each nudging 10 random predictors by `i/p` and shifting the
//!   response by `μ` plus `N(0, 0.5)` noise scaled by `i/p`.
//! * **Model II (swamping):** predictors `N(γ, I)` with the last tenth of the
//!   coordinates shifted by `0.5μ`, and a random-sign response built from a
//!   slope vector whose last 20 entries are increased by `j · 0.005μ`.
//! * **Model III:** the first half of the influential rows from Model I, the
//!   rest from Model II.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{HidetifyError, Result};
use crate::seed;

/// Leading slopes of the clean model; all later slopes are zero.
pub const TRUE_SLOPES: [f64; 10] = [0.3, 0.1, 0.2, 0.3, 0.9, 0.3, 1.1, 2.2, 0.0, 0.4];

/// AR(1) correlation between neighbouring predictors.
pub const PREDICTOR_CORRELATION: f64 = 0.5;

const MODEL_I_NUDGED_COLUMNS: usize = 10;
const MODEL_I_NOISE_VARIANCE: f64 = 0.5;
const MODEL_II_PERTURBED_SLOPES: usize = 20;

const KEY_CLEAN: u64 = 0xC1EA;
const KEY_CONTAMINATE: u64 = 0xC0DE;

/// The length-`p` true slope vector.
pub fn true_beta(p: usize) -> Vec<f64> {
    (0..p)
        .map(|j| TRUE_SLOPES.get(j).copied().unwrap_or(0.0))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ContaminationModel {
    #[serde(rename = "I")]
    Masking,
    #[serde(rename = "II")]
    Swamping,
    #[serde(rename = "III")]
    Mixed,
}

impl ContaminationModel {
    pub const ALL: [ContaminationModel; 3] = [
        ContaminationModel::Masking,
        ContaminationModel::Swamping,
        ContaminationModel::Mixed,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ContaminationModel::Masking => "I",
            ContaminationModel::Swamping => "II",
            ContaminationModel::Mixed => "III",
        }
    }
}

impl fmt::Display for ContaminationModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ContaminationModel {
    type Err = HidetifyError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "i" | "1" | "masking" => Ok(ContaminationModel::Masking),
            "ii" | "2" | "swamping" => Ok(ContaminationModel::Swamping),
            "iii" | "3" | "mixed" => Ok(ContaminationModel::Mixed),
            _ => Err(HidetifyError::InvalidParameter(format!(
                "unknown contamination model {s:?} (expected I, II or III)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContaminationSpec {
    pub model: ContaminationModel,
    /// Contamination degree `μ`.
    pub mu: f64,
    /// Share of rows replaced, in `[0, 0.5)`.
    pub fraction: f64,
    pub seed: u64,
}

impl ContaminationSpec {
    pub fn new(model: ContaminationModel, mu: f64, seed: u64) -> Self {
        Self {
            model,
            mu,
            fraction: 0.15,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fraction >= 0.0 && self.fraction < 0.5) {
            return Err(HidetifyError::InvalidParameter(format!(
                "fraction {} must lie in [0, 0.5)",
                self.fraction
            )));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(HidetifyError::InvalidParameter(format!(
                "mu {} must be positive",
                self.mu
            )));
        }
        Ok(())
    }

    /// Number of contaminated rows in a sample of size `n`.
    pub fn contaminated_rows(&self, n: usize) -> usize {
        (self.fraction * n as f64).floor() as usize
    }
}

/// A dataset with its generating slopes and the indices of influential rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ContaminatedSample {
    pub data: DataMatrix,
    /// Sorted 0-based indices of contaminated rows.
    pub truth: Vec<usize>,
    pub intercept: f64,
    pub beta: Vec<f64>,
}

/// Draw a clean sample of `n` rows and `p` predictors.
pub fn generate_clean(n: usize, p: usize, seed: u64) -> Result<ContaminatedSample> {
    if n < crate::data::MIN_ROWS {
        return Err(HidetifyError::InvalidParameter(format!(
            "n = {n} must be at least 4"
        )));
    }
    if p < TRUE_SLOPES.len() {
        return Err(HidetifyError::InvalidParameter(format!(
            "p = {p} must be at least 10"
        )));
    }
    let beta = true_beta(p);
    let mut rng = seed::rng_for(seed, &[KEY_CLEAN]);
    let innovation_scale = (1.0 - PREDICTOR_CORRELATION * PREDICTOR_CORRELATION).sqrt();
    let mut values = vec![0.0; n * p];
    let mut response = Vec::with_capacity(n);
    let mut row = vec![0.0; p];
    for i in 0..n {
        // AR(1) recursion gives exactly the 0.5^|j−j'| covariance.
        row[0] = rng.sample::<f64, _>(StandardNormal);
        for j in 1..p {
            let z: f64 = rng.sample(StandardNormal);
            row[j] = PREDICTOR_CORRELATION * row[j - 1] + innovation_scale * z;
        }
        let noise: f64 = rng.sample(StandardNormal);
        let signal: f64 = row.iter().zip(&beta).map(|(x, b)| x * b).sum();
        response.push(signal + noise);
        for (j, &v) in row.iter().enumerate() {
            values[j * n + i] = v;
        }
    }
    Ok(ContaminatedSample {
        data: DataMatrix::new(n, p, values, response)?,
        truth: Vec::new(),
        intercept: 0.0,
        beta,
    })
}

/// Replace the first `⌊fraction · n⌋` rows of a clean sample with
/// influential rows drawn according to `spec`.
pub fn contaminate(
    clean: &ContaminatedSample,
    spec: &ContaminationSpec,
) -> Result<ContaminatedSample> {
    spec.validate()?;
    if !clean.truth.is_empty() {
        return Err(HidetifyError::InvalidParameter(
            "sample is already contaminated".into(),
        ));
    }
    let data = &clean.data;
    let (n, p) = (data.n(), data.p());
    let n_inf = spec.contaminated_rows(n);
    if n_inf == 0 {
        return Ok(clean.clone());
    }
    if spec.model != ContaminationModel::Masking && p < MODEL_II_PERTURBED_SLOPES {
        return Err(HidetifyError::ModelIIRequiresP20(p));
    }
    let n_model_i = match spec.model {
        ContaminationModel::Masking => n_inf,
        ContaminationModel::Swamping => 0,
        ContaminationModel::Mixed => n_inf.div_ceil(2),
    };

    let mut rng = seed::rng_for(spec.seed, &[KEY_CONTAMINATE]);
    let mut out = data.clone();

    let seed_row = argmax_abs(data.response());
    let seed_x = data.row(seed_row);
    let seed_y = data.response()[seed_row];
    let model_i_noise = Normal::new(0.0, MODEL_I_NOISE_VARIANCE.sqrt()).expect("valid sd");
    for i in 0..n_model_i {
        let step = (i + 1) as f64 / p as f64;
        let mut x = seed_x.clone();
        for j in index::sample(&mut rng, p, MODEL_I_NUDGED_COLUMNS.min(p)) {
            x[j] += step;
        }
        let y = seed_y + spec.mu + model_i_noise.sample(&mut rng) * step;
        out.set_row(i, &x, y);
    }

    let shifted_from = (0.9 * p as f64).floor() as usize;
    let tilted_beta = tilted_slopes(&clean.beta, spec.mu);
    for i in n_model_i..n_inf {
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let x: Vec<f64> = (0..p)
            .map(|j| {
                let shift = if j >= shifted_from {
                    0.5 * spec.mu
                } else {
                    0.0
                };
                shift + rng.sample::<f64, _>(StandardNormal)
            })
            .collect();
        let noise: f64 = rng.sample(StandardNormal);
        let signal: f64 = x.iter().zip(&tilted_beta).map(|(a, b)| a * b).sum();
        out.set_row(i, &x, sign * (signal + noise));
    }

    Ok(ContaminatedSample {
        data: out,
        truth: (0..n_inf).collect(),
        intercept: clean.intercept,
        beta: clean.beta.clone(),
    })
}

/// Slopes used for swamping rows: the last 20 entries gain `w_j = j · 0.005 μ`
/// for `j = 1..=20`.
pub fn tilted_slopes(beta: &[f64], mu: f64) -> Vec<f64> {
    let mut out = beta.to_vec();
    let start = beta.len().saturating_sub(MODEL_II_PERTURBED_SLOPES);
    for (w, b) in out[start..].iter_mut().enumerate() {
        *b += (w + 1) as f64 * 0.005 * mu;
    }
    out
}

fn argmax_abs(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
            if v.abs() > bv {
                (i, v.abs())
            } else {
                (bi, bv)
            }
        })
        .0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionMetrics {
    /// Share of truly influential rows that were flagged.
    pub tpr_inf: f64,
    /// Share of good rows that were flagged.
    pub fpr_inf: f64,
}

pub fn detection_metrics(truth: &[usize], flagged: &[usize], n: usize) -> Result<DetectionMetrics> {
    if truth.is_empty() {
        return Err(HidetifyError::EmptyTruth);
    }
    let hits = flagged.iter().filter(|i| truth.contains(i)).count();
    Ok(DetectionMetrics {
        tpr_inf: hits as f64 / truth.len() as f64,
        fpr_inf: false_positive_rate(truth, flagged, n),
    })
}

/// `|flagged \ truth| / (n − |truth|)`; zero when every row is influential.
pub fn false_positive_rate(truth: &[usize], flagged: &[usize], n: usize) -> f64 {
    let good = n.saturating_sub(truth.len());
    if good == 0 {
        return 0.0;
    }
    let false_hits = flagged.iter().filter(|i| !truth.contains(i)).count();
    false_hits as f64 / good as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_vector_matches_design() {
        let b = true_beta(30);
        assert_eq!(b[7], 2.2);
        assert_eq!(b[8], 0.0);
        assert_eq!(b[9], 0.4);
        assert!(b[10..].iter().all(|&v| v == 0.0));
        assert_eq!(b.iter().filter(|&&v| v != 0.0).count(), 9);
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let a = generate_clean(20, 25, 3).unwrap();
        let b = generate_clean(20, 25, 3).unwrap();
        let c = generate_clean(20, 25, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.data, c.data);
        let spec = ContaminationSpec::new(ContaminationModel::Mixed, 6.0, 11);
        assert_eq!(
            contaminate(&a, &spec).unwrap(),
            contaminate(&b, &spec).unwrap()
        );
    }

    #[test]
    fn zero_fraction_is_identity() {
        let clean = generate_clean(30, 25, 1).unwrap();
        let spec = ContaminationSpec {
            fraction: 0.0,
            ..ContaminationSpec::new(ContaminationModel::Swamping, 5.0, 2)
        };
        assert_eq!(contaminate(&clean, &spec).unwrap(), clean);
    }

    #[test]
    fn model_ii_needs_twenty_predictors() {
        let clean = generate_clean(20, 12, 1).unwrap();
        let spec = ContaminationSpec::new(ContaminationModel::Swamping, 5.0, 2);
        assert!(matches!(
            contaminate(&clean, &spec),
            Err(HidetifyError::ModelIIRequiresP20(12))
        ));
        let masking = ContaminationSpec::new(ContaminationModel::Masking, 5.0, 2);
        assert!(contaminate(&clean, &masking).is_ok());
    }

    #[test]
    fn model_i_rows_nudge_ten_coordinates() {
        let clean = generate_clean(40, 50, 8).unwrap();
        let spec = ContaminationSpec::new(ContaminationModel::Masking, 10.0, 9);
        let out = contaminate(&clean, &spec).unwrap();
        assert_eq!(out.truth, (0..6).collect::<Vec<_>>());
        let i0 = argmax_abs(clean.data.response());
        let seed_x = clean.data.row(i0);
        for i in 0..6 {
            let row = out.data.row(i);
            let diffs: Vec<f64> = row
                .iter()
                .zip(&seed_x)
                .map(|(a, b)| a - b)
                .filter(|d| *d != 0.0)
                .collect();
            assert_eq!(diffs.len(), 10);
            let step = (i + 1) as f64 / 50.0;
            assert!(diffs.iter().all(|d| (d - step).abs() < 1e-12));
        }
        // Untouched rows are unchanged.
        assert_eq!(out.data.row(20), clean.data.row(20));
    }

    #[test]
    fn metrics_examples() {
        let m = detection_metrics(&[1, 2], &[1, 2], 10).unwrap();
        assert_eq!((m.tpr_inf, m.fpr_inf), (1.0, 0.0));
        let m = detection_metrics(&[1, 2], &[], 10).unwrap();
        assert_eq!((m.tpr_inf, m.fpr_inf), (0.0, 0.0));
        let m = detection_metrics(&[1, 2], &[2, 3], 10).unwrap();
        assert_eq!((m.tpr_inf, m.fpr_inf), (0.5, 0.125));
        assert!(matches!(
            detection_metrics(&[], &[1], 10),
            Err(HidetifyError::EmptyTruth)
        ));
    }

    #[test]
    fn validation_of_spec() {
        let mut s = ContaminationSpec::new(ContaminationModel::Masking, 4.0, 0);
        s.fraction = 0.5;
        assert!(s.validate().is_err());
        s.fraction = 0.1;
        s.mu = 0.0;
        assert!(s.validate().is_err());
        assert!(generate_clean(3, 10, 0).is_err());
        assert!(generate_clean(10, 9, 0).is_err());
    }
}
