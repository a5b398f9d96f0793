//! Small statistical helpers shared by the estimators and the harness.

use serde::{Deserialize, Serialize};

/// Asymptotic 1% critical value of the one-sample Kolmogorov–Smirnov distance.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

/// `sup_x |F_n(x) - F(x)|` for a continuous reference cdf.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Two-sample KS distance `sup_x |F_a(x) - F_b(x)|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Bias/dispersion summary of replicated estimates of a known target.
///
/// `sd` uses the `reps - 1` denominator; `rmse` is computed from the raw
/// squared errors, so `rmse^2 = bias^2 + sd^2 (reps - 1) / reps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mean: f64,
    pub bias: f64,
    pub sd: f64,
    pub rmse: f64,
    pub reps: usize,
}

impl SummaryStats {
    /// Summarises `estimates` in index order (the order matters for bitwise
    /// reproducibility of the floating-point sums).
    pub fn from_estimates(estimates: &[f64], target: f64) -> Self {
        let reps = estimates.len();
        assert!(reps > 0, "no estimates to summarise");
        let n = reps as f64;
        let mean = estimates.iter().sum::<f64>() / n;
        let ss = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>();
        let sd = if reps > 1 { (ss / (n - 1.0)).sqrt() } else { 0.0 };
        let mse = estimates.iter().map(|e| (e - target).powi(2)).sum::<f64>() / n;
        Self {
            mean,
            bias: mean - target,
            sd,
            rmse: mse.sqrt(),
            reps,
        }
    }
}
