//! Expectiles and expectile-centred second moments.
//!
//! The `τ`-expectile of a sample minimises `Σ |τ − 1(yᵢ ≤ θ)| (yᵢ − θ)²`. It is
//! computed by iteratively reweighted least squares (IRLS) starting from the
//! arithmetic mean. All second moments use `1/n` normalisation, and the
//! asymmetric correlation centres both variables at their own `τ`-expectile.
//! At `τ = 0.5` everything reduces to the ordinary mean, variance and Pearson
//! correlation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{HidetifyError, Result};

/// IRLS stops once `|θₜ₊₁ − θₜ| ≤ IRLS_TOLERANCE · (1 + |θₜ|)`.
pub const IRLS_TOLERANCE: f64 = 1e-10;
pub const IRLS_MAX_ITERATIONS: usize = 200;

/// A standard deviation at or below this fraction of the largest absolute
/// value in the sample is treated as zero.
const DEGENERACY_RTOL: f64 = 1e-12;

/// Strictly increasing expectile levels in `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ExpectileSequence(Vec<f64>);

impl ExpectileSequence {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(HidetifyError::InvalidSequence("no levels given".into()));
        }
        for &tau in &levels {
            check_level(tau)?;
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HidetifyError::InvalidSequence(format!(
                "levels must be strictly increasing, got {levels:?}"
            )));
        }
        Ok(Self(levels))
    }

    /// The single level `τ = 0.5`, under which every statistic is symmetric.
    pub fn symmetric() -> Self {
        Self(vec![0.5])
    }

    pub fn levels(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for ExpectileSequence {
    fn default() -> Self {
        Self(vec![0.25, 0.5, 0.75])
    }
}

impl TryFrom<Vec<f64>> for ExpectileSequence {
    type Error = HidetifyError;

    fn try_from(levels: Vec<f64>) -> Result<Self> {
        Self::new(levels)
    }
}

impl From<ExpectileSequence> for Vec<f64> {
    fn from(seq: ExpectileSequence) -> Self {
        seq.0
    }
}

impl std::str::FromStr for ExpectileSequence {
    type Err = HidetifyError;

    /// Parses a comma-separated list such as `0.25,0.5,0.75`.
    fn from_str(s: &str) -> Result<Self> {
        let levels = s
            .split(',')
            .map(|t| {
                t.trim().parse::<f64>().map_err(|_| {
                    HidetifyError::InvalidSequence(format!("cannot parse level {t:?}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(levels)
    }
}

/// Expectile and expectile-centred standard deviation of one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymmetricMoments {
    pub mu_tau: f64,
    pub sigma_tau: f64,
}

fn check_level(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(HidetifyError::InvalidLevel(tau))
    }
}

fn check_sample(values: &[f64], min_len: usize) -> Result<()> {
    if values.len() < min_len {
        return Err(HidetifyError::InvalidSample(format!(
            "need at least {min_len} values, got {}",
            values.len()
        )));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(HidetifyError::InvalidSample(format!(
            "non-finite value at position {i}"
        )));
    }
    Ok(())
}

/// Empirical `τ`-expectile of `values`.
pub fn empirical_expectile(values: &[f64], tau: f64) -> Result<f64> {
    check_sample(values, 1)?;
    check_level(tau)?;
    expectile_irls(values, tau)
}

/// `n⁻¹ Σ (yᵢ − μ̂_τ)²`.
pub fn asymmetric_variance(values: &[f64], tau: f64) -> Result<f64> {
    let m = asymmetric_moments(values, tau)?;
    Ok(m.sigma_tau * m.sigma_tau)
}

pub fn asymmetric_moments(values: &[f64], tau: f64) -> Result<AsymmetricMoments> {
    check_sample(values, 2)?;
    check_level(tau)?;
    let mu_tau = expectile_irls(values, tau)?;
    let ss: f64 = values.iter().map(|&v| (v - mu_tau) * (v - mu_tau)).sum();
    Ok(AsymmetricMoments {
        mu_tau,
        sigma_tau: (ss / values.len() as f64).sqrt(),
    })
}

/// `Ĉov_τ(x, y) / (σ̂_τ(x) σ̂_τ(y))`.
///
/// Fails with [`HidetifyError::DegenerateColumn`] when either input has zero
/// asymmetric variance (`column: Some(0)` for `x`, `None` for `y`).
pub fn asymmetric_correlation(x: &[f64], y: &[f64], tau: f64) -> Result<f64> {
    check_sample(x, 2)?;
    check_sample(y, 2)?;
    check_level(tau)?;
    if x.len() != y.len() {
        return Err(HidetifyError::LengthMismatch {
            expected: y.len(),
            actual: x.len(),
        });
    }
    let yc = Centered::new(y, tau)?.ok_or(HidetifyError::DegenerateColumn {
        column: None,
        subset: None,
    })?;
    let xc = Centered::new(x, tau)?.ok_or(HidetifyError::DegenerateColumn {
        column: Some(0),
        subset: None,
    })?;
    Ok(xc.correlation(&yc))
}

/// Asymmetric correlation of every predictor with the response at every
/// level, as a `q × p` table (`result[l][j]`).
pub fn columnwise_asymmetric_correlations(
    data: &DataMatrix,
    taus: &ExpectileSequence,
) -> Result<Vec<Vec<f64>>> {
    let rows: Vec<usize> = (0..data.n()).collect();
    let flat = correlation_profile(data, &rows, taus.levels(), true)?;
    let p = data.p();
    Ok(flat.chunks_exact(p).map(<[f64]>::to_vec).collect())
}

/// A sample centred at its `τ`-expectile, with its asymmetric standard deviation.
struct Centered {
    deviations: Vec<f64>,
    sigma: f64,
}

impl Centered {
    /// `None` when the asymmetric standard deviation is numerically zero.
    fn new(values: &[f64], tau: f64) -> Result<Option<Self>> {
        let mu = expectile_irls(values, tau)?;
        let deviations: Vec<f64> = values.iter().map(|&v| v - mu).collect();
        let ss: f64 = deviations.iter().map(|d| d * d).sum();
        let sigma = (ss / values.len() as f64).sqrt();
        if is_degenerate(sigma, values) {
            return Ok(None);
        }
        Ok(Some(Self { deviations, sigma }))
    }

    /// Correlation with a raw sample, centring it without allocating.
    /// `None` when `x` is degenerate.
    fn correlation_with(&self, x: &[f64], tau: f64) -> Result<Option<f64>> {
        let mu = expectile_irls(x, tau)?;
        let (mut ss, mut cross, mut scale) = (0.0, 0.0, 0.0_f64);
        for (&v, &dy) in x.iter().zip(&self.deviations) {
            let d = v - mu;
            ss += d * d;
            cross += d * dy;
            scale = scale.max(v.abs());
        }
        let n = x.len() as f64;
        let sigma = (ss / n).sqrt();
        if sigma <= DEGENERACY_RTOL * scale {
            return Ok(None);
        }
        Ok(Some((cross / n) / (sigma * self.sigma)))
    }

    fn correlation(&self, other: &Centered) -> f64 {
        let n = self.deviations.len() as f64;
        let cross: f64 = self
            .deviations
            .iter()
            .zip(&other.deviations)
            .map(|(a, b)| a * b)
            .sum();
        (cross / n) / (self.sigma * other.sigma)
    }
}

fn is_degenerate(sigma: f64, values: &[f64]) -> bool {
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    sigma <= DEGENERACY_RTOL * scale
}

/// IRLS for the `τ`-expectile. Inputs are assumed finite and non-empty.
pub(crate) fn expectile_irls(values: &[f64], tau: f64) -> Result<f64> {
    let n = values.len() as f64;
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    if lo == hi {
        return Ok(lo);
    }
    let mean = (values.iter().sum::<f64>() / n).clamp(lo, hi);
    if tau == 0.5 {
        return Ok(mean);
    }
    let (lo_w, hi_w) = (1.0 - tau, tau);
    let mut theta = mean;
    #[cfg(debug_assertions)]
    let mut prev_loss = f64::INFINITY;
    for _ in 0..IRLS_MAX_ITERATIONS {
        let (mut sw, mut swy) = (0.0, 0.0);
        #[cfg(debug_assertions)]
        let mut loss = 0.0;
        for &y in values {
            let w = if y <= theta { lo_w } else { hi_w };
            sw += w;
            swy += w * y;
            #[cfg(debug_assertions)]
            {
                loss += w * (y - theta) * (y - theta);
            }
        }
        #[cfg(debug_assertions)]
        {
            debug_assert!(
                loss <= prev_loss * (1.0 + 1e-12) + 1e-300,
                "IRLS loss increased: {prev_loss} -> {loss}"
            );
            prev_loss = loss;
        }
        let next = swy / sw;
        if (next - theta).abs() <= IRLS_TOLERANCE * (1.0 + theta.abs()) {
            return Ok(next);
        }
        theta = next;
    }
    Err(HidetifyError::NoConvergence {
        what: "expectile IRLS",
        iterations: IRLS_MAX_ITERATIONS,
    })
}

/// Asymmetric correlations between every predictor and the response,
/// restricted to `rows`, flattened as `out[l * p + j]`.
///
/// Columns are processed in parallel when `parallel` is set; each column's
/// reduction order is fixed, so the result does not depend on scheduling.
pub(crate) fn correlation_profile(
    data: &DataMatrix,
    rows: &[usize],
    taus: &[f64],
    parallel: bool,
) -> Result<Vec<f64>> {
    let p = data.p();
    let y: Vec<f64> = rows.iter().map(|&i| data.response()[i]).collect();
    let centered_y = taus
        .iter()
        .map(|&tau| {
            Centered::new(&y, tau)?.ok_or(HidetifyError::DegenerateColumn {
                column: None,
                subset: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let column_corrs = |j: usize| -> Result<Vec<f64>> {
        let col = data.column(j);
        let x: Vec<f64> = rows.iter().map(|&i| col[i]).collect();
        taus.iter()
            .zip(&centered_y)
            .map(|(&tau, yc)| {
                yc.correlation_with(&x, tau)?
                    .ok_or(HidetifyError::DegenerateColumn {
                        column: Some(j),
                        subset: None,
                    })
            })
            .collect()
    };

    let per_column: Vec<Vec<f64>> = if parallel {
        (0..p)
            .into_par_iter()
            .map(column_corrs)
            .collect::<Result<_>>()?
    } else {
        (0..p).map(column_corrs).collect::<Result<_>>()?
    };

    let q = taus.len();
    let mut out = vec![0.0; q * p];
    for (j, corrs) in per_column.into_iter().enumerate() {
        for (l, c) in corrs.into_iter().enumerate() {
            out[l * p + j] = c;
        }
    }
    Ok(out)
}

/// `p⁻¹ ‖a − b‖²` for each of the `q` length-`p` blocks of two flattened profiles.
pub(crate) fn profile_distances(a: &[f64], b: &[f64], p: usize) -> Vec<f64> {
    a.chunks_exact(p)
        .zip(b.chunks_exact(p))
        .map(|(ra, rb)| {
            ra.iter()
                .zip(rb)
                .map(|(u, v)| (u - v) * (u - v))
                .sum::<f64>()
                / p as f64
        })
        .collect()
}
