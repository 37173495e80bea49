//! Chi-square tail probabilities via the regularized incomplete gamma function.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// `P(χ²(dof) > x)`. Returns 1 for `x ≤ 0`.
pub fn upper_tail(x: f64, dof: usize) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    let dist = ChiSquared::new(dof as f64).expect("degrees of freedom are positive");
    dist.sf(x).clamp(0.0, 1.0)
}

/// `P(χ²(dof) ≤ x)`.
pub fn cdf(x: f64, dof: usize) -> f64 {
    1.0 - upper_tail(x, dof)
}

/// The `x` with `P(χ²(dof) ≤ x) = prob`.
pub fn quantile(prob: f64, dof: usize) -> f64 {
    ChiSquared::new(dof as f64)
        .expect("degrees of freedom are positive")
        .inverse_cdf(prob)
}
