//! The periodically controlled sequence with imputed values.
//!
//! Observations at multiples of the period `T` are always available. Any
//! other `X_n` is available with probability `p`; a missing one is replaced
//! by the largest available value since the last control index:
//!
//! ```text
//! Y_n = U_n X_n + (1 - U_n) max{ U_i X_i : floor((n-1)/T) T <= i <= n-1 },  n >= 1
//! ```

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::processes::{ProcessConfig, ProcessPath};
use crate::rng::{mix_seed, rng_from_seed, stream};

/// Availability indicators `U_0..=U_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlMask {
    pub u: Vec<bool>,
    pub period: usize,
    pub p: f64,
    pub seed: u64,
}

impl ControlMask {
    pub fn n(&self) -> usize {
        self.u.len() - 1
    }

    pub fn is_control(&self, i: usize) -> bool {
        i % self.period == 0
    }
}

pub(crate) fn validate_period_and_p(period: usize, p: f64) -> Result<()> {
    if period < 2 {
        return Err(Error::config(format!(
            "period T must be at least 2 (T = 1 means no missing data), got {period}"
        )));
    }
    // p = 1 is accepted as the degenerate no-missing-data case
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::config(format!("availability p must lie in (0, 1], got {p}")));
    }
    Ok(())
}

pub(crate) fn fill_mask<R: Rng + ?Sized>(
    rng: &mut R,
    len: usize,
    period: usize,
    p: f64,
    out: &mut Vec<bool>,
) {
    out.clear();
    out.extend((0..=len).map(|i| i % period == 0 || rng.random::<f64>() < p));
}

pub fn generate_mask(n: usize, period: usize, p: f64, seed: u64) -> Result<ControlMask> {
    validate_period_and_p(period, p)?;
    if n == 0 {
        return Err(Error::config("mask length n must be at least 1"));
    }
    let mut rng = rng_from_seed(seed);
    let mut u = Vec::with_capacity(n + 1);
    fill_mask(&mut rng, n, period, p, &mut u);
    Ok(ControlMask { u, period, p, seed })
}

/// Writes `Y_0..=Y_n` into `y` (`y[0]` is a NaN placeholder).
pub(crate) fn impute_into(x: &[f64], u: &[bool], period: usize, y: &mut Vec<f64>) {
    debug_assert_eq!(x.len(), u.len());
    y.clear();
    y.push(f64::NAN);
    // largest available value in [block start, n - 1]
    let mut available_max = x[0];
    for n in 1..x.len() {
        if n % period == 0 {
            available_max = x[n];
            y.push(x[n]);
        } else if u[n] {
            available_max = available_max.max(x[n]);
            y.push(x[n]);
        } else {
            y.push(available_max);
        }
    }
}

/// Aligned `X`, `U` and `Y`; `Y` and the imputed flags are indexed from 1.
#[derive(Clone, Debug)]
pub struct ImputedSeries {
    pub x: ProcessPath,
    pub mask: ControlMask,
    y: Vec<f64>,
}

impl PartialEq for ImputedSeries {
    fn eq(&self, other: &Self) -> bool {
        self.x == other.x
            && self.mask == other.mask
            && self.y_values().len() == other.y_values().len()
            && self
                .y_values()
                .iter()
                .zip(other.y_values())
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl ImputedSeries {
    pub fn n(&self) -> usize {
        self.y.len() - 1
    }

    pub fn period(&self) -> usize {
        self.mask.period
    }

    /// `Y_k` for `1 <= k <= n`.
    pub fn y(&self, k: usize) -> f64 {
        assert!(k >= 1 && k <= self.n(), "Y index {k} outside 1..={}", self.n());
        self.y[k]
    }

    /// `Y_1..=Y_n` as a slice (position `k - 1` holds `Y_k`).
    pub fn y_values(&self) -> &[f64] {
        &self.y[1..]
    }

    /// `1 - U_k`, i.e. whether `Y_k` is an imputed value.
    pub fn imputed(&self, k: usize) -> bool {
        assert!(k >= 1 && k <= self.n());
        !self.mask.u[k]
    }

    pub fn imputed_count(&self) -> usize {
        self.mask.u[1..].iter().filter(|&&a| !a).count()
    }

    /// Rebuilds a series from stored columns, checking that `y` is exactly
    /// what the model produces from `x` and `u`.
    pub fn from_parts(x: ProcessPath, mask: ControlMask, y: Vec<f64>) -> Result<Self> {
        let series = impute(&x, &mask)?;
        if y.len() != series.n() {
            return Err(Error::Structural(format!(
                "{} Y values for n = {}",
                y.len(),
                series.n()
            )));
        }
        if let Some(k) = (1..=series.n()).find(|&k| series.y[k].to_bits() != y[k - 1].to_bits()) {
            return Err(Error::Structural(format!(
                "stored Y_{k} = {} disagrees with imputation {}",
                y[k - 1],
                series.y[k]
            )));
        }
        Ok(series)
    }
}

pub fn impute(x: &ProcessPath, mask: &ControlMask) -> Result<ImputedSeries> {
    if x.values.len() != mask.u.len() {
        return Err(Error::Structural(format!(
            "path has {} values but mask has {}",
            x.values.len(),
            mask.u.len()
        )));
    }
    if let Some(i) = (0..mask.u.len()).step_by(mask.period).find(|&i| !mask.u[i]) {
        return Err(Error::Structural(format!("control index {i} marked unavailable")));
    }
    let mut y = Vec::with_capacity(x.values.len());
    impute_into(&x.values, &mask.u, mask.period, &mut y);
    Ok(ImputedSeries {
        x: x.clone(),
        mask: mask.clone(),
        y,
    })
}

/// Indicator of `A_s`: all `T - 1` values after control index `sT` repeat `Y_{sT}`.
pub fn stagnation_indicator(series: &ImputedSeries, s: usize) -> Result<bool> {
    let t = series.period();
    if s == 0 || s * t + t - 1 > series.n() {
        return Err(Error::Index(format!(
            "block s = {s} needs indices {}..={} within 1..={}",
            s * t,
            s * t + t - 1,
            series.n()
        )));
    }
    let anchor = series.y[s * t];
    // imputed values are bitwise copies, so exact equality is the right test
    Ok((1..t).all(|j| series.y[s * t + j] == anchor))
}

/// Underlying process, period and availability probability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub process: ProcessConfig,
    pub period: usize,
    pub p: f64,
}

impl ModelConfig {
    pub fn new(process: ProcessConfig, period: usize, p: f64) -> Result<Self> {
        let cfg = Self { process, period, p };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.process.validate()?;
        validate_period_and_p(self.period, self.p)
    }

    /// Simulates `X_0..=X_n`, the mask and `Y_1..=Y_n`. The path and the mask
    /// use independent sub-streams of `seed`.
    pub fn simulate(&self, n: usize, seed: u64) -> Result<ImputedSeries> {
        self.validate()?;
        let x = self
            .process
            .generate(n, mix_seed(seed, stream::PROCESS, 0))?;
        let mask = generate_mask(n, self.period, self.p, mix_seed(seed, stream::MASK, 0))?;
        impute(&x, &mask)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(values: Vec<f64>) -> ProcessPath {
        ProcessPath {
            values,
            config: ProcessConfig::unit_iid(),
            seed: 0,
        }
    }

    fn mask(bits: &[u8], period: usize) -> ControlMask {
        ControlMask {
            u: bits.iter().map(|&b| b == 1).collect(),
            period,
            p: 0.5,
            seed: 0,
        }
    }

    #[test]
    fn controls_are_always_available() {
        for seed in 0..20 {
            let m = generate_mask(6, 2, 0.3, seed).unwrap();
            for i in [0, 2, 4, 6] {
                assert!(m.u[i]);
            }
        }
    }

    #[test]
    fn mask_validation() {
        assert!(matches!(generate_mask(10, 1, 0.5, 0), Err(Error::Config(_))));
        assert!(generate_mask(10, 2, 0.0, 0).is_err());
        assert!(generate_mask(10, 2, 1.2, 0).is_err());
        assert!(generate_mask(0, 2, 0.5, 0).is_err());
        assert_eq!(generate_mask(50, 3, 0.5, 9).unwrap(), generate_mask(50, 3, 0.5, 9).unwrap());
    }

    #[test]
    fn near_one_p_keeps_almost_everything() {
        let m = generate_mask(10_000, 3, 0.999, 4).unwrap();
        let ones = m.u.iter().filter(|&&b| b).count();
        assert!(ones > 9_950, "{ones}");
    }

    #[test]
    fn hand_worked_period_three() {
        let x = path(vec![10.0, 11.0, 12.0, 13.0, 14.0, 15.0]);
        let s = impute(&x, &mask(&[1, 0, 1, 1, 0, 0], 3)).unwrap();
        let y: Vec<f64> = (1..=5).map(|k| s.y(k)).collect();
        assert_eq!(y, vec![10.0, 12.0, 13.0, 13.0, 13.0]);
        assert!(s.imputed(1) && !s.imputed(2) && s.imputed(4) && s.imputed(5));
        assert_eq!(s.imputed_count(), 3);
    }

    #[test]
    fn imputation_takes_the_largest_available_value() {
        // window for n = 5 is {3, 4}; x_4 is available and larger
        let x = path(vec![1.0, 2.0, 3.0, 4.0, 9.0, 0.5]);
        let s = impute(&x, &mask(&[1, 1, 1, 1, 1, 0], 3)).unwrap();
        assert_eq!(s.y(5), 9.0);
    }

    #[test]
    fn all_available_reproduces_x() {
        let x = path(vec![3.0, 1.0, 4.0, 1.0, 5.0]);
        let s = impute(&x, &mask(&[1; 5], 2)).unwrap();
        assert_eq!(s.y_values(), &x.values[1..]);
    }

    #[test]
    fn period_two_copies_previous_value() {
        let x = path(vec![7.0, 2.0, 5.0]);
        let s = impute(&x, &mask(&[1, 0, 1], 2)).unwrap();
        assert_eq!(s.y(1), 7.0);
        assert_eq!(s.y(2), 5.0);
    }

    #[test]
    fn impute_rejects_mismatched_lengths() {
        let x = path(vec![1.0, 2.0, 3.0]);
        assert!(matches!(
            impute(&x, &mask(&[1, 1], 2)),
            Err(Error::Structural(_))
        ));
        assert!(matches!(
            impute(&x, &mask(&[0, 1, 1], 2)),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn stagnation_indicator_cases() {
        let x = path(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        let s = impute(&x, &mask(&[1, 1, 1, 0, 1, 1, 1], 2)).unwrap();
        assert!(stagnation_indicator(&s, 1).unwrap());
        assert!(!stagnation_indicator(&s, 2).unwrap());
        assert!(matches!(stagnation_indicator(&s, 0), Err(Error::Index(_))));
        assert!(matches!(stagnation_indicator(&s, 3), Err(Error::Index(_))));

        let s3 = impute(&x, &mask(&[1, 1, 1, 1, 0, 1, 1], 3)).unwrap();
        // Y_4 = Y_3 but Y_5 = x_5 differs
        assert!(!stagnation_indicator(&s3, 1).unwrap());
    }

    #[test]
    fn from_parts_checks_consistency() {
        let cfg = ModelConfig::new(ProcessConfig::moving_maxima(), 2, 0.5).unwrap();
        let s = cfg.simulate(40, 3).unwrap();
        let y = s.y_values().to_vec();
        let back = ImputedSeries::from_parts(s.x.clone(), s.mask.clone(), y.clone()).unwrap();
        assert_eq!(back, s);
        let mut bad = y;
        bad[4] *= 1.5;
        assert!(ImputedSeries::from_parts(s.x.clone(), s.mask.clone(), bad).is_err());
    }
}
