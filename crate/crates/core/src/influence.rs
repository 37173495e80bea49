//! Leave-one-out and subset-based asymmetric influence statistics.
//!
//! For an observation `k` and a level `τ`, the leave-one-out influence is the
//! mean squared change of the predictor/response asymmetric correlations when
//! row `k` is removed. The subset variant compares a random reference subset
//! `A_r` with `A_r ∪ {k}`. Each correlation profile is recomputed from scratch
//! on the indicated rows (expectiles, standard deviations and all).
//!
//! Scaled by the squared augmented-subset size `n_sub = n_k + 1`:
//!
//! * `asym_t_min` takes the minimum over subsets and levels and is referred to
//!   `χ²(1)`;
//! * `asym_t_max` takes the maximum over subsets of the level-summed influence
//!   and is referred to `χ²(q)`.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::chisq;
use crate::data::DataMatrix;
use crate::error::{HidetifyError, Result};
use crate::seed;
use crate::stats::{correlation_profile, profile_distances, ExpectileSequence};

/// `m` reference subsets drawn for one tested observation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetFamily {
    target: usize,
    subsets: Vec<Vec<usize>>,
    subset_size: usize,
    seed: Option<u64>,
}

impl SubsetFamily {
    /// Draw `m` subsets of `subset_size` distinct indices from `pool \ {target}`.
    ///
    /// Subsets are drawn independently of each other, so the same subset can
    /// appear twice in a family. Indices within a subset are sorted.
    pub fn draw(
        pool: &[usize],
        target: usize,
        m: usize,
        subset_size: usize,
        seed: u64,
    ) -> Result<Self> {
        let candidates: Vec<usize> = pool.iter().copied().filter(|&i| i != target).collect();
        if m == 0 {
            return Err(HidetifyError::InvalidSubsets("m must be at least 1".into()));
        }
        if subset_size < 2 || subset_size > candidates.len() {
            return Err(HidetifyError::InvalidSubsets(format!(
                "subset size {subset_size} not in [2, {}]",
                candidates.len()
            )));
        }
        let mut rng = seed::rng_for(seed, &[]);
        let subsets = (0..m)
            .map(|_| {
                let mut s: Vec<usize> = index::sample(&mut rng, candidates.len(), subset_size)
                    .into_iter()
                    .map(|i| candidates[i])
                    .collect();
                s.sort_unstable();
                s
            })
            .collect();
        Ok(Self {
            target,
            subsets,
            subset_size,
            seed: Some(seed),
        })
    }

    /// A family from explicit subsets. All subsets must share one size,
    /// contain distinct indices, and exclude `target`.
    pub fn from_subsets(target: usize, subsets: Vec<Vec<usize>>) -> Result<Self> {
        let subset_size = subsets
            .first()
            .map(Vec::len)
            .ok_or_else(|| HidetifyError::InvalidSubsets("no subsets given".into()))?;
        if subset_size < 2 {
            return Err(HidetifyError::InvalidSubsets(
                "subsets need at least 2 rows".into(),
            ));
        }
        for (r, s) in subsets.iter().enumerate() {
            if s.len() != subset_size {
                return Err(HidetifyError::InvalidSubsets(format!(
                    "subset {r} has {} rows, expected {subset_size}",
                    s.len()
                )));
            }
            if s.contains(&target) {
                return Err(HidetifyError::InvalidSubsets(format!(
                    "subset {r} contains the target {target}"
                )));
            }
            let mut sorted = s.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(HidetifyError::InvalidSubsets(format!(
                    "subset {r} repeats an index"
                )));
            }
        }
        Ok(Self {
            target,
            subsets,
            subset_size,
            seed: None,
        })
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn m(&self) -> usize {
        self.subsets.len()
    }

    pub fn subset_size(&self) -> usize {
        self.subset_size
    }

    /// `n_sub = n_k + 1`, the size of each augmented subset.
    pub fn augmented_size(&self) -> usize {
        self.subset_size + 1
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    fn check_against(&self, data: &DataMatrix) -> Result<()> {
        let n = data.n();
        if self.target >= n {
            return Err(HidetifyError::InvalidSubsets(format!(
                "target {} out of range for n = {n}",
                self.target
            )));
        }
        if let Some(bad) = self.subsets.iter().flatten().find(|&&i| i >= n) {
            return Err(HidetifyError::InvalidSubsets(format!(
                "index {bad} out of range for n = {n}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    /// Scaled leave-one-out influence summed over levels.
    SingleAsymHim,
    SubsetMin,
    SubsetMax,
}

impl ScoreKind {
    /// Degrees of freedom of the reference chi-square law for `q` levels.
    pub fn dof(self, q: usize) -> usize {
        match self {
            ScoreKind::SubsetMin => 1,
            ScoreKind::SubsetMax | ScoreKind::SingleAsymHim => q,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfluenceScore {
    pub observation: usize,
    pub statistic: f64,
    pub p_value: f64,
    pub kind: ScoreKind,
}

impl InfluenceScore {
    pub(crate) fn new(observation: usize, statistic: f64, kind: ScoreKind, q: usize) -> Self {
        Self {
            observation,
            statistic,
            p_value: chisq::upper_tail(statistic, kind.dof(q)),
            kind,
        }
    }
}

fn check_index(data: &DataMatrix, k: usize) -> Result<()> {
    if k >= data.n() {
        return Err(HidetifyError::InvalidParameter(format!(
            "observation {k} out of range for n = {}",
            data.n()
        )));
    }
    Ok(())
}

/// Per-level influence of adding `k` to the reference `rows`:
/// `p⁻¹ ‖ρ̂(rows ∪ {k}) − ρ̂(rows)‖²` for each level.
///
/// `rows` must not contain `k`. The augmented profile uses `rows` followed by
/// `k`; the order does not change the statistics.
pub fn augmentation_influence(
    data: &DataMatrix,
    rows: &[usize],
    k: usize,
    taus: &[f64],
) -> Result<Vec<f64>> {
    augmentation_influence_with(data, rows, k, taus, false)
}

fn augmentation_influence_with(
    data: &DataMatrix,
    rows: &[usize],
    k: usize,
    taus: &[f64],
    parallel: bool,
) -> Result<Vec<f64>> {
    let base = correlation_profile(data, rows, taus, parallel)?;
    let mut augmented_rows = Vec::with_capacity(rows.len() + 1);
    augmented_rows.extend_from_slice(rows);
    augmented_rows.push(k);
    let augmented = correlation_profile(data, &augmented_rows, taus, parallel)?;
    Ok(profile_distances(&augmented, &base, data.p()))
}

/// Leave-one-out influence `D_τk` of observation `k` at level `tau`.
pub fn loo_influence(data: &DataMatrix, k: usize, tau: f64) -> Result<f64> {
    check_index(data, k)?;
    let rest: Vec<usize> = (0..data.n()).filter(|&i| i != k).collect();
    Ok(augmentation_influence_with(data, &rest, k, &[tau], true)?[0])
}

/// `asymD_k`: leave-one-out influence summed over all levels.
pub fn asym_him(data: &DataMatrix, k: usize, taus: &ExpectileSequence) -> Result<f64> {
    check_index(data, k)?;
    let rest: Vec<usize> = (0..data.n()).filter(|&i| i != k).collect();
    Ok(
        augmentation_influence_with(data, &rest, k, taus.levels(), true)?
            .iter()
            .sum(),
    )
}

/// Per-subset influence `D_τrk` for every subset in `family` at one level.
pub fn subset_influence(data: &DataMatrix, family: &SubsetFamily, tau: f64) -> Result<Vec<f64>> {
    Ok(subset_influence_table(data, family, &[tau])?
        .into_iter()
        .map(|row| row[0])
        .collect())
}

/// `m × q` table of `D_{τ_l r k}` (rows are subsets, columns are levels).
pub fn subset_influence_table(
    data: &DataMatrix,
    family: &SubsetFamily,
    taus: &[f64],
) -> Result<Vec<Vec<f64>>> {
    family.check_against(data)?;
    family
        .subsets
        .iter()
        .enumerate()
        .map(|(r, rows)| {
            augmentation_influence_with(data, rows, family.target, taus, false)
                .map_err(|e| e.in_subset(r))
        })
        .collect()
}

fn min_score(table: &[Vec<f64>], family: &SubsetFamily, q: usize) -> InfluenceScore {
    let scale = (family.augmented_size() as f64).powi(2);
    let min = table
        .iter()
        .flatten()
        .fold(f64::INFINITY, |acc, &d| acc.min(d));
    InfluenceScore::new(family.target, scale * min, ScoreKind::SubsetMin, q)
}

fn max_score(table: &[Vec<f64>], family: &SubsetFamily, q: usize) -> InfluenceScore {
    let scale = (family.augmented_size() as f64).powi(2);
    let max = table
        .iter()
        .map(|row| row.iter().sum::<f64>())
        .fold(0.0_f64, f64::max);
    InfluenceScore::new(family.target, scale * max, ScoreKind::SubsetMax, q)
}

/// `asymT_min = min_r min_l n_sub² D_{τ_l r k}`, with a `χ²(1)` p-value.
pub fn asym_t_min(
    data: &DataMatrix,
    family: &SubsetFamily,
    taus: &ExpectileSequence,
) -> Result<InfluenceScore> {
    let table = subset_influence_table(data, family, taus.levels())?;
    Ok(min_score(&table, family, taus.len()))
}

/// `asymT_max = max_r n_sub² Σ_l D_{τ_l r k}`, with a `χ²(q)` p-value.
pub fn asym_t_max(
    data: &DataMatrix,
    family: &SubsetFamily,
    taus: &ExpectileSequence,
) -> Result<InfluenceScore> {
    let table = subset_influence_table(data, family, taus.levels())?;
    Ok(max_score(&table, family, taus.len()))
}

/// Both subset statistics from a single pass over the family.
pub fn subset_scores(
    data: &DataMatrix,
    family: &SubsetFamily,
    taus: &ExpectileSequence,
) -> Result<(InfluenceScore, InfluenceScore)> {
    let table = subset_influence_table(data, family, taus.levels())?;
    let q = taus.len();
    Ok((min_score(&table, family, q), max_score(&table, family, q)))
}
