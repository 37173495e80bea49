//! Independent reference implementations used by the integration tests.
//!
//! Nothing here calls into the library's statistics code: expectiles are
//! found exactly by enumerating sorted partitions or by bisection on the
//! loss derivative, and every correlation is recomputed from its definition.

#![allow(dead_code)]

pub mod fixtures;

use hidetify::DataMatrix;

/// Asymmetric squared loss `(1/n) Σ |τ − 1(y ≤ θ)| (y − θ)²`.
pub fn asymmetric_loss(y: &[f64], tau: f64, theta: f64) -> f64 {
    y.iter()
        .map(|&v| {
            let w = if v <= theta { 1.0 - tau } else { tau };
            w * (v - theta) * (v - theta)
        })
        .sum::<f64>()
        / y.len() as f64
}

/// Exact expectile: the stationary point is a weighted mean for exactly one
/// split of the sorted sample into "at or below θ" and "above θ".
pub fn exact_expectile(y: &[f64], tau: f64) -> f64 {
    let mut s = y.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let total: f64 = s.iter().sum();
    let mut below = 0.0;
    for split in 0..=n {
        if split > 0 {
            below += s[split - 1];
        }
        let above = total - below;
        let w_lo = (1.0 - tau) * split as f64;
        let w_hi = tau * (n - split) as f64;
        let theta = ((1.0 - tau) * below + tau * above) / (w_lo + w_hi);
        let lo_ok = split == 0 || s[split - 1] <= theta;
        let hi_ok = split == n || theta < s[split];
        if lo_ok && hi_ok {
            return theta;
        }
    }
    unreachable!("no consistent split")
}

/// Minimize the asymmetric loss over `[min y, max y]` by bisection on the
/// sign of its derivative.
pub fn bisection_expectile(y: &[f64], tau: f64) -> f64 {
    let mut lo = y.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slope = |theta: f64| -> f64 {
        y.iter()
            .map(|&v| {
                let w = if v <= theta { 1.0 - tau } else { tau };
                w * (v - theta)
            })
            .sum()
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section search of the asymmetric loss over `[min y, max y]`.
pub fn golden_expectile(y: &[f64], tau: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = y.iter().copied().fold(f64::INFINITY, f64::min);
    let mut b = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    for _ in 0..300 {
        if asymmetric_loss(y, tau, c) < asymmetric_loss(y, tau, d) {
            b = d;
        } else {
            a = c;
        }
        c = b - inv_phi * (b - a);
        d = a + inv_phi * (b - a);
    }
    0.5 * (a + b)
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Pearson correlation with `1/n` moments.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let n = x.len() as f64;
    let sxy: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - mx) * (b - my))
        .sum::<f64>()
        / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum::<f64>() / n;
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum::<f64>() / n;
    sxy / (sxx.sqrt() * syy.sqrt())
}

/// Asymmetric correlation straight from its definition.
pub fn direct_correlation(x: &[f64], y: &[f64], tau: f64) -> f64 {
    let (mx, my) = (exact_expectile(x, tau), exact_expectile(y, tau));
    let n = x.len() as f64;
    let cov: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - mx) * (b - my))
        .sum::<f64>()
        / n;
    let vx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum::<f64>() / n;
    let vy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum::<f64>() / n;
    cov / (vx.sqrt() * vy.sqrt())
}

/// Row-major dataset for the brute-force influence oracles.
#[derive(Debug, Clone)]
pub struct Rows {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

impl Rows {
    pub fn p(&self) -> usize {
        self.x[0].len()
    }

    pub fn to_matrix(&self) -> DataMatrix {
        DataMatrix::from_rows(&self.x, self.y.clone()).unwrap()
    }

    /// Correlation of every column with the response, on the listed rows.
    pub fn correlations(&self, rows: &[usize], tau: f64) -> Vec<f64> {
        let y: Vec<f64> = rows.iter().map(|&i| self.y[i]).collect();
        (0..self.p())
            .map(|j| {
                let x: Vec<f64> = rows.iter().map(|&i| self.x[i][j]).collect();
                direct_correlation(&x, &y, tau)
            })
            .collect()
    }
}

fn mean_square_difference(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>() / a.len() as f64
}

/// `p⁻¹ ‖ρ(all rows) − ρ(all rows but k)‖²`.
pub fn brute_loo(d: &Rows, k: usize, tau: f64) -> f64 {
    let all: Vec<usize> = (0..d.y.len()).collect();
    let rest: Vec<usize> = all.iter().copied().filter(|&i| i != k).collect();
    mean_square_difference(&d.correlations(&all, tau), &d.correlations(&rest, tau))
}

pub fn brute_asym_him(d: &Rows, k: usize, taus: &[f64]) -> f64 {
    taus.iter().map(|&t| brute_loo(d, k, t)).sum()
}

/// `p⁻¹ ‖ρ(A ∪ {k}) − ρ(A)‖²`.
pub fn brute_subset(d: &Rows, subset: &[usize], k: usize, tau: f64) -> f64 {
    let mut plus = subset.to_vec();
    plus.push(k);
    plus.sort_unstable();
    mean_square_difference(&d.correlations(&plus, tau), &d.correlations(subset, tau))
}

/// Enumerate `(r, l)` and return `(T_min, T_max)`.
pub fn brute_t_min_max(d: &Rows, subsets: &[Vec<usize>], k: usize, taus: &[f64]) -> (f64, f64) {
    let n_sub = (subsets[0].len() + 1) as f64;
    let mut t_min = f64::INFINITY;
    let mut t_max = f64::NEG_INFINITY;
    for a in subsets {
        let mut sum = 0.0;
        for &t in taus {
            let v = n_sub * n_sub * brute_subset(d, a, k, t);
            t_min = t_min.min(v);
            sum += v;
        }
        t_max = t_max.max(sum);
    }
    (t_min, t_max)
}

/// Small deterministic generator so datasets do not depend on the library's
/// random streams.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform().max(1e-300);
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.uniform() * n as f64) as usize
    }

    pub fn rows(&mut self, n: usize, p: usize) -> Rows {
        let x = (0..n)
            .map(|_| (0..p).map(|_| self.normal()).collect())
            .collect();
        let y = (0..n).map(|_| self.normal()).collect();
        Rows { x, y }
    }

    /// `size` distinct indices from `0..n` excluding `skip`, sorted.
    pub fn subset(&mut self, n: usize, skip: usize, size: usize) -> Vec<usize> {
        let mut pool: Vec<usize> = (0..n).filter(|&i| i != skip).collect();
        for i in 0..size {
            let j = i + self.below(pool.len() - i);
            pool.swap(i, j);
        }
        let mut out = pool[..size].to_vec();
        out.sort_unstable();
        out
    }
}

/// Two-sided Kolmogorov–Smirnov distance between a sample and a CDF.
pub fn ks_distance(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}
