//! Random min-max multiple deletion (RaMM).
//!
//! Each outer iteration runs a conservative Min step (subset minimum
//! statistic, guards against swamping) followed by an aggressive Max step
//! (subset maximum statistic, guards against masking) on whatever remains
//! active. Flagged rows leave the active set for good. A final Validation
//! step re-tests every flagged row against the surviving active set, and only
//! confirmed rows are reported as influential.
//!
//! Thresholds:
//!
//! * Min: `P(χ²(1) > asymT_min) < α_min / n_k`, keeping at most `⌊ω n⌋` rows
//!   with the smallest p-values.
//! * Max: `P(χ²(q) > asymT_max) < α_max / |active|`.
//! * Validation: `P(χ²(q) > (|clean| + 1)² asymD_k) < α_valid / |candidates|`,
//!   where `asymD_k` is the level-summed influence of adding `k` to the clean set.
//!
//! Another iteration runs only when the active set has shrunk to at most
//! `n / 2` and the previous iteration flagged something, up to
//! `max_outer_iters`.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{HidetifyError, Result};
use crate::influence::{
    augmentation_influence, subset_scores, InfluenceScore, ScoreKind, SubsetFamily,
};
use crate::seed::derive_seed;
use crate::stats::ExpectileSequence;

/// Smallest active set on which a Min or Max step can run (subsets of at
/// least two rows plus the tested row and one spare).
pub const MIN_ACTIVE: usize = 4;

const STEP_KEY_MIN: u64 = 1;
const STEP_KEY_MAX: u64 = 2;

/// Denominator of the Bonferroni-corrected Min-step threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinStepDenominator {
    /// `α / n_k`.
    #[default]
    SubsetSize,
    /// `α / |active|`.
    ActiveSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RammParams {
    /// Number of random subsets per tested observation.
    pub m: usize,
    /// Subset size; `None` means `⌊n / 2⌋`.
    pub n_k: Option<usize>,
    /// Cap on the Min-step flagged set as a fraction of `n`.
    pub omega: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub alpha_valid: f64,
    pub taus: ExpectileSequence,
    pub max_outer_iters: usize,
    pub seed: u64,
    pub min_step_denominator: MinStepDenominator,
}

impl Default for RammParams {
    fn default() -> Self {
        Self {
            m: 5,
            n_k: None,
            omega: 0.2,
            alpha_min: 0.05,
            alpha_max: 0.001,
            alpha_valid: 0.05,
            taus: ExpectileSequence::default(),
            max_outer_iters: 10,
            seed: 0,
            min_step_denominator: MinStepDenominator::default(),
        }
    }
}

impl RammParams {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_taus(mut self, taus: ExpectileSequence) -> Self {
        self.taus = taus;
        self
    }

    /// Configured subset size for a dataset with `n` rows.
    pub fn subset_size(&self, n: usize) -> usize {
        self.n_k.unwrap_or(n / 2)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |msg: String| Err(HidetifyError::InvalidParameter(msg));
        if self.m == 0 {
            return bad("m must be at least 1".into());
        }
        let n_k = self.subset_size(n);
        if n_k < 1 || n_k + 2 > n {
            return bad(format!("n_k = {n_k} must lie in [1, n - 2] for n = {n}"));
        }
        for (name, v) in [
            ("omega", self.omega),
            ("alpha_min", self.alpha_min),
            ("alpha_max", self.alpha_max),
            ("alpha_valid", self.alpha_valid),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return bad(format!("{name} = {v} must lie in (0, 1)"));
            }
        }
        if self.max_outer_iters == 0 {
            return bad("max_outer_iters must be at least 1".into());
        }
        Ok(())
    }

    /// Subset size used on an active set of the given size: the configured
    /// size, shrunk so that at least two active rows stay outside each subset.
    fn effective_subset_size(&self, n: usize, active: usize) -> usize {
        self.subset_size(n).min(active.saturating_sub(2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Min,
    Max,
    Validation,
    /// One-shot leave-one-out test on the full sample.
    Single,
}

impl StepKind {
    pub fn label(self) -> &'static str {
        match self {
            StepKind::Min => "min",
            StepKind::Max => "max",
            StepKind::Validation => "validation",
            StepKind::Single => "single",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub step: StepKind,
    pub iteration: usize,
    /// Size of the set the step operated on (active set, or candidate count
    /// for validation).
    pub tested: usize,
    pub flagged: Vec<usize>,
    /// One score per tested observation, ordered by observation index.
    pub scores: Vec<InfluenceScore>,
}

/// Flagged rows and the scores of every tested row from one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub flagged: Vec<usize>,
    pub scores: Vec<InfluenceScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub influential: Vec<usize>,
    pub clean: Vec<usize>,
    pub trace: Vec<TraceEntry>,
    pub iterations_used: usize,
}

impl DetectionResult {
    /// The Min/Max/Single step that first flagged `row`, if any.
    pub fn flagged_by(&self, row: usize) -> Option<(StepKind, usize)> {
        self.trace
            .iter()
            .filter(|t| t.step != StepKind::Validation)
            .find(|t| t.flagged.contains(&row))
            .map(|t| (t.step, t.iteration))
    }

    /// Every row flagged by a Min, Max or Single step.
    pub fn candidates(&self) -> BTreeSet<usize> {
        self.trace
            .iter()
            .filter(|t| t.step != StepKind::Validation)
            .flat_map(|t| t.flagged.iter().copied())
            .collect()
    }

    /// The most recent score of the given kind recorded for `row`.
    pub fn latest_score(&self, row: usize, kind: ScoreKind) -> Option<InfluenceScore> {
        self.trace
            .iter()
            .rev()
            .flat_map(|t| t.scores.iter())
            .find(|s| s.observation == row && s.kind == kind)
            .copied()
    }

    pub fn validation_score(&self, row: usize) -> Option<InfluenceScore> {
        self.trace
            .iter()
            .filter(|t| matches!(t.step, StepKind::Validation | StepKind::Single))
            .flat_map(|t| t.scores.iter())
            .find(|s| s.observation == row)
            .copied()
    }
}

fn too_few(active: usize, trace: &[TraceEntry]) -> HidetifyError {
    HidetifyError::TooFewActive {
        active,
        required: MIN_ACTIVE,
        trace: Box::new(trace.to_vec()),
    }
}

/// Score every active row with both subset statistics, using a fresh family
/// per row keyed by `(seed, step, iteration, row)`.
fn score_active(
    data: &DataMatrix,
    active: &[usize],
    params: &RammParams,
    iteration: usize,
    step_key: u64,
) -> Result<Vec<(InfluenceScore, InfluenceScore)>> {
    if active.len() < MIN_ACTIVE {
        return Err(too_few(active.len(), &[]));
    }
    let n_k = params.effective_subset_size(data.n(), active.len());
    active
        .par_iter()
        .map(|&k| {
            let seed = derive_seed(params.seed, &[step_key, iteration as u64, k as u64]);
            let family = SubsetFamily::draw(active, k, params.m, n_k, seed)?;
            subset_scores(data, &family, &params.taus)
        })
        .collect()
}

fn sorted_active(active: &[usize]) -> Vec<usize> {
    let mut a = active.to_vec();
    a.sort_unstable();
    a.dedup();
    a
}

/// Min step: conservative subset-minimum test with an `⌊ω n⌋` cap.
pub fn min_step(
    data: &DataMatrix,
    active: &[usize],
    params: &RammParams,
    iteration: usize,
) -> Result<StepOutcome> {
    params.validate(data.n())?;
    let active = sorted_active(active);
    let scores: Vec<InfluenceScore> = score_active(data, &active, params, iteration, STEP_KEY_MIN)?
        .into_iter()
        .map(|(min, _)| min)
        .collect();
    let denom = match params.min_step_denominator {
        MinStepDenominator::SubsetSize => params.effective_subset_size(data.n(), active.len()),
        MinStepDenominator::ActiveSet => active.len(),
    } as f64;
    let cap = (params.omega * data.n() as f64).floor() as usize;
    Ok(StepOutcome {
        flagged: select_min_candidates(&scores, params.alpha_min / denom, cap),
        scores,
    })
}

/// Rows with p-value below `threshold`, smallest p-values first (larger
/// statistic, then smaller index, on ties), truncated to `cap`, returned sorted.
fn select_min_candidates(scores: &[InfluenceScore], threshold: f64, cap: usize) -> Vec<usize> {
    let mut candidates: Vec<&InfluenceScore> =
        scores.iter().filter(|s| s.p_value < threshold).collect();
    candidates.sort_by(|a, b| {
        a.p_value
            .total_cmp(&b.p_value)
            .then(b.statistic.total_cmp(&a.statistic))
            .then(a.observation.cmp(&b.observation))
    });
    let mut flagged: Vec<usize> = candidates
        .into_iter()
        .take(cap)
        .map(|s| s.observation)
        .collect();
    flagged.sort_unstable();
    flagged
}

/// Max step: aggressive subset-maximum test, Bonferroni over the active set.
pub fn max_step(
    data: &DataMatrix,
    active: &[usize],
    params: &RammParams,
    iteration: usize,
) -> Result<StepOutcome> {
    params.validate(data.n())?;
    let active = sorted_active(active);
    let scores: Vec<InfluenceScore> = score_active(data, &active, params, iteration, STEP_KEY_MAX)?
        .into_iter()
        .map(|(_, max)| max)
        .collect();
    let threshold = params.alpha_max / active.len() as f64;
    let flagged = scores
        .iter()
        .filter(|s| s.p_value < threshold)
        .map(|s| s.observation)
        .collect();
    Ok(StepOutcome { flagged, scores })
}

/// Validation step: confirm each candidate against the clean set.
pub fn validation_step(
    data: &DataMatrix,
    clean: &[usize],
    candidates: &[usize],
    params: &RammParams,
) -> Result<StepOutcome> {
    let clean = sorted_active(clean);
    let candidates = sorted_active(candidates);
    if candidates.is_empty() {
        return Ok(StepOutcome {
            flagged: Vec::new(),
            scores: Vec::new(),
        });
    }
    if let Some(k) = candidates.iter().find(|k| clean.binary_search(k).is_ok()) {
        return Err(HidetifyError::InvalidParameter(format!(
            "candidate {k} is also in the clean set"
        )));
    }
    if clean.len() < MIN_ACTIVE {
        return Err(too_few(clean.len(), &[]));
    }
    let q = params.taus.len();
    let scale = ((clean.len() + 1) as f64).powi(2);
    let scores = candidates
        .par_iter()
        .map(|&k| {
            let d: f64 = augmentation_influence(data, &clean, k, params.taus.levels())?
                .iter()
                .sum();
            Ok(InfluenceScore::new(
                k,
                scale * d,
                ScoreKind::SingleAsymHim,
                q,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let threshold = params.alpha_valid / candidates.len() as f64;
    let flagged = scores
        .iter()
        .filter(|s| s.p_value < threshold)
        .map(|s| s.observation)
        .collect();
    Ok(StepOutcome { flagged, scores })
}

fn remove_all(active: &mut Vec<usize>, flagged: &[usize]) {
    active.retain(|i| flagged.binary_search(i).is_err());
}

/// Run the full Min/Max/Validation procedure on `data`.
pub fn detect(data: &DataMatrix, params: &RammParams) -> Result<DetectionResult> {
    let n = data.n();
    params.validate(n)?;
    let mut active: Vec<usize> = (0..n).collect();
    let mut trace: Vec<TraceEntry> = Vec::new();
    let mut iteration = 0;

    loop {
        iteration += 1;
        for (kind, step) in [
            (StepKind::Min, min_step as StepFn),
            (StepKind::Max, max_step as StepFn),
        ] {
            if active.len() < MIN_ACTIVE {
                return Err(too_few(active.len(), &trace));
            }
            let tested = active.len();
            let outcome = step(data, &active, params, iteration).map_err(|e| match e {
                HidetifyError::TooFewActive { active, .. } => too_few(active, &trace),
                other => other,
            })?;
            remove_all(&mut active, &outcome.flagged);
            trace.push(TraceEntry {
                step: kind,
                iteration,
                tested,
                flagged: outcome.flagged,
                scores: outcome.scores,
            });
        }
        let flagged_now = trace
            .iter()
            .rev()
            .take(2)
            .map(|t| t.flagged.len())
            .sum::<usize>();
        let clean_is_small = 2 * active.len() <= n;
        if flagged_now == 0 || !clean_is_small || iteration >= params.max_outer_iters {
            break;
        }
    }

    let candidates: Vec<usize> = trace
        .iter()
        .flat_map(|t| t.flagged.iter().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if !candidates.is_empty() && active.len() < MIN_ACTIVE {
        return Err(too_few(active.len(), &trace));
    }
    let validation = validation_step(data, &active, &candidates, params)?;
    trace.push(TraceEntry {
        step: StepKind::Validation,
        iteration,
        tested: candidates.len(),
        flagged: validation.flagged.clone(),
        scores: validation.scores,
    });

    let influential = validation.flagged;
    let clean = (0..n)
        .filter(|i| influential.binary_search(i).is_err())
        .collect();
    Ok(DetectionResult {
        influential,
        clean,
        trace,
        iterations_used: iteration,
    })
}

type StepFn = fn(&DataMatrix, &[usize], &RammParams, usize) -> Result<StepOutcome>;

/// One-shot leave-one-out detection: `n² asymD_k` against `χ²(q)` with a
/// Bonferroni threshold `α_valid / n`.
pub fn single_detection(data: &DataMatrix, params: &RammParams) -> Result<DetectionResult> {
    let n = data.n();
    let q = params.taus.len();
    let scale = (n as f64).powi(2);
    let scores = (0..n)
        .into_par_iter()
        .map(|k| {
            let rest: Vec<usize> = (0..n).filter(|&i| i != k).collect();
            let d: f64 = augmentation_influence(data, &rest, k, params.taus.levels())?
                .iter()
                .sum();
            Ok(InfluenceScore::new(
                k,
                scale * d,
                ScoreKind::SingleAsymHim,
                q,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let threshold = params.alpha_valid / n as f64;
    let influential: Vec<usize> = scores
        .iter()
        .filter(|s| s.p_value < threshold)
        .map(|s| s.observation)
        .collect();
    let clean = (0..n)
        .filter(|i| influential.binary_search(i).is_err())
        .collect();
    Ok(DetectionResult {
        trace: vec![TraceEntry {
            step: StepKind::Single,
            iteration: 1,
            tested: n,
            flagged: influential.clone(),
            scores,
        }],
        influential,
        clean,
        iterations_used: 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn score(k: usize, p: f64, stat: f64) -> InfluenceScore {
        InfluenceScore {
            observation: k,
            statistic: stat,
            p_value: p,
            kind: ScoreKind::SubsetMin,
        }
    }

    #[test]
    fn min_selection_respects_threshold_and_cap() {
        let scores = vec![
            score(0, 0.5, 1.0),
            score(1, 1e-5, 20.0),
            score(2, 1e-4, 15.0),
            score(3, 1e-6, 24.0),
            score(4, 0.2, 2.0),
        ];
        assert!(select_min_candidates(&scores, 1e-7, 10).is_empty());
        assert_eq!(select_min_candidates(&scores, 1e-3, 10), vec![1, 2, 3]);
        // Three candidates, cap two: the two smallest p-values.
        assert_eq!(select_min_candidates(&scores, 1e-3, 2), vec![1, 3]);
    }

    #[test]
    fn min_selection_breaks_ties_by_index() {
        let scores = vec![
            score(5, 0.0, 50.0),
            score(2, 0.0, 50.0),
            score(9, 0.0, 50.0),
        ];
        assert_eq!(select_min_candidates(&scores, 0.01, 2), vec![2, 5]);
    }

    #[test]
    fn params_validation() {
        let p = RammParams::default();
        assert!(p.validate(10).is_ok());
        assert_eq!(p.subset_size(11), 5);
        assert!(RammParams { m: 0, ..p.clone() }.validate(10).is_err());
        assert!(RammParams {
            omega: 1.0,
            ..p.clone()
        }
        .validate(10)
        .is_err());
        assert!(RammParams {
            alpha_max: 0.0,
            ..p.clone()
        }
        .validate(10)
        .is_err());
        assert!(RammParams {
            n_k: Some(9),
            ..p.clone()
        }
        .validate(10)
        .is_err());
        assert!(RammParams {
            max_outer_iters: 0,
            ..p.clone()
        }
        .validate(10)
        .is_err());
        assert_eq!(p.effective_subset_size(100, 40), 38);
        assert_eq!(p.effective_subset_size(100, 90), 50);
    }

    #[test]
    fn params_json_uses_field_names() {
        let p: RammParams =
            serde_json::from_str(r#"{"m": 7, "omega": 0.1, "taus": [0.3, 0.5, 0.7]}"#).unwrap();
        assert_eq!(p.m, 7);
        assert_eq!(p.taus.levels(), &[0.3, 0.5, 0.7]);
        assert_eq!(p.alpha_max, 0.001);
        assert!(serde_json::from_str::<RammParams>(r#"{"mm": 7}"#).is_err());
    }

    #[test]
    fn empty_candidates_validate_to_nothing() {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let data = DataMatrix::from_rows(&rows, vec![1.0, 0.0, 2.0, 1.5, 3.0, 2.0]).unwrap();
        let out = validation_step(&data, &[0, 1, 2, 3, 4, 5], &[], &RammParams::default()).unwrap();
        assert!(out.flagged.is_empty());
        assert!(validation_step(&data, &[0, 1, 2, 3, 4], &[4, 5], &RammParams::default()).is_err());
    }
}
