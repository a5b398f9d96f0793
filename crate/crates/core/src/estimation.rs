//! Estimators of `p`, of the marginal law `F` and of the extremal index.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imputation::{fill_mask, impute_into, stagnation_indicator, ImputedSeries, ModelConfig};
use crate::processes::normalized_level;
use crate::window::{tally_reps, ConditionedWindow};

/// Point estimate of `p` from the stagnation indicators of blocks `1..=m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PHatResult {
    pub block_count: usize,
    pub indicator_sum: usize,
    pub p_hat: f64,
}

fn block_count(series: &ImputedSeries) -> Result<usize> {
    let t = series.period();
    let m = ((series.n() + 1) / t).saturating_sub(1);
    if m < 1 {
        return Err(Error::SampleTooShort(format!(
            "n = {} gives no complete block for T = {t}; need n >= {}",
            series.n(),
            2 * t - 1
        )));
    }
    Ok(m)
}

/// How a stagnant block is recognised.
///
/// `ValueEquality` is the observable definition: all `T - 1` values after
/// the control repeat it exactly. It also fires on genuine ties of the
/// underlying sequence, which the moving maxima produces with positive
/// probability. `ImputationFlags` counts only blocks whose `T - 1` values
/// were all imputed, which requires the availability mask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StagnationRule {
    #[default]
    ValueEquality,
    ImputationFlags,
}

impl StagnationRule {
    pub fn name(&self) -> &'static str {
        match self {
            StagnationRule::ValueEquality => "value_equality",
            StagnationRule::ImputationFlags => "imputation_flags",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "value_equality" | "equality" => Ok(StagnationRule::ValueEquality),
            "imputation_flags" | "flags" => Ok(StagnationRule::ImputationFlags),
            other => Err(Error::config(format!(
                "unknown stagnation rule {other:?}; expected equality or flags"
            ))),
        }
    }
}

fn indicator_sum(series: &ImputedSeries, m: usize, rule: StagnationRule) -> Result<usize> {
    let t = series.period();
    let mut sum = 0;
    for s in 1..=m {
        let hit = match rule {
            StagnationRule::ValueEquality => stagnation_indicator(series, s)?,
            StagnationRule::ImputationFlags => (1..t).all(|j| series.imputed(s * t + j)),
        };
        sum += hit as usize;
    }
    Ok(sum)
}

/// `p_hat = 1 - (sum_s 1{A_s} / m)^(1/(T-1))` with `m = floor((n+1)/T) - 1`.
pub fn estimate_p(series: &ImputedSeries) -> Result<PHatResult> {
    estimate_p_with(series, StagnationRule::ValueEquality)
}

pub fn estimate_p_with(series: &ImputedSeries, rule: StagnationRule) -> Result<PHatResult> {
    let m = block_count(series)?;
    let sum = indicator_sum(series, m, rule)?;
    let freq = sum as f64 / m as f64;
    Ok(PHatResult {
        block_count: m,
        indicator_sum: sum,
        p_hat: 1.0 - freq.powf(1.0 / (series.period() - 1) as f64),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StagnationFrequency {
    pub frequency: f64,
    pub std_error: f64,
    pub blocks: usize,
}

/// Fraction of stagnant blocks with its binomial standard error.
pub fn stagnation_frequency(series: &ImputedSeries) -> Result<StagnationFrequency> {
    stagnation_frequency_with(series, StagnationRule::ValueEquality)
}

pub fn stagnation_frequency_with(
    series: &ImputedSeries,
    rule: StagnationRule,
) -> Result<StagnationFrequency> {
    let m = block_count(series)?;
    let f = indicator_sum(series, m, rule)? as f64 / m as f64;
    Ok(StagnationFrequency {
        frequency: f,
        std_error: (f * (1.0 - f) / m as f64).sqrt(),
        blocks: m,
    })
}

/// Right-continuous empirical distribution function.
#[derive(Clone, Debug, PartialEq)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::SampleTooShort("empirical cdf of no values".into()));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { sorted: values })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }
}

/// Empirical cdf of the control observations `Y_T, Y_2T, ...`.
pub fn ecdf_from_controls(series: &ImputedSeries) -> Result<Ecdf> {
    let t = series.period();
    let controls: Vec<f64> = (1..=series.n() / t).map(|s| series.y(s * t)).collect();
    if controls.is_empty() {
        return Err(Error::SampleTooShort(format!(
            "n = {} has no control index >= T = {t}",
            series.n()
        )));
    }
    Ecdf::new(controls)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaMethod {
    Runs,
    Plugin,
    ClosedForm,
}

impl ThetaMethod {
    pub fn name(&self) -> &'static str {
        match self {
            ThetaMethod::Runs => "runs",
            ThetaMethod::Plugin => "plugin",
            ThetaMethod::ClosedForm => "closed_form",
        }
    }
}

/// An extremal-index value with the counts behind it.
///
/// For the plug-in estimator the counts are summed over replicated windows:
/// `exceedance_count` counts `Y_i > u` and `cluster_count` counts the
/// anchored events `Y_i > u >= max(Y_{i+1}, ..., Y_{i+s-1})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaEstimate {
    pub method: ThetaMethod,
    pub level: f64,
    /// Run length `r` (runs) or anchor length `s` (plug-in).
    pub run_length: usize,
    pub value: f64,
    pub exceedance_count: u64,
    pub cluster_count: u64,
    pub std_error: Option<f64>,
}

/// Exceedance and cluster counts of the runs scheme.
pub(crate) fn runs_counts(y: &[f64], u: f64, r: usize) -> (u64, u64) {
    let (mut exceed, mut clusters) = (0u64, 0u64);
    // non-exceedances since the last exceedance; starts "infinite"
    let mut gap = usize::MAX;
    for &v in y {
        if v > u {
            exceed += 1;
            if gap >= r {
                clusters += 1;
            }
            gap = 0;
        } else {
            gap = gap.saturating_add(1);
        }
    }
    (exceed, clusters)
}

/// Runs declustering: an exceedance opens a new cluster when at least `r`
/// non-exceedances precede it; the estimate is clusters over exceedances.
pub fn runs_extremal_index(y: &[f64], u: f64, r: usize) -> Result<ThetaEstimate> {
    if r == 0 {
        return Err(Error::config("run length r must be at least 1"));
    }
    let (exceed, clusters) = runs_counts(y, u, r);
    runs_estimate(u, r, exceed, clusters)
}

pub(crate) fn runs_estimate(u: f64, r: usize, exceed: u64, clusters: u64) -> Result<ThetaEstimate> {
    if exceed == 0 {
        return Err(Error::UndefinedEstimate(format!(
            "no exceedances of u = {u}; lower the level or lengthen the series"
        )));
    }
    Ok(ThetaEstimate {
        method: ThetaMethod::Runs,
        level: u,
        run_length: r,
        value: clusters as f64 / exceed as f64,
        exceedance_count: exceed,
        cluster_count: clusters,
        std_error: None,
    })
}

/// Plug-in extremal index at a fixed `n`:
/// `(n / tau_n) (1/T) sum_{i=1}^T P(Y_i > u_n >= max(Y_{i+1}, ..., Y_{i+s-1}))`,
/// where `u_n` is the level with `n (1 - F(u_n)) = tau_x` and
/// `tau_n = (n/T) sum_i P(Y_i > u_n)` is the finite-`n` tail constant of `Y`.
///
/// Both probabilities are estimated from the same replicated windows
/// `X_0..=X_{T+s-1}`, drawn conditionally on an exceedance among
/// `X_0..=X_T` (which every counted event implies). The estimate is the
/// ratio of the two counts with a delta-method standard error.
pub fn plugin_theta(
    model: &ModelConfig,
    n: usize,
    tau_x: f64,
    s: usize,
    reps: usize,
    seed: u64,
) -> Result<ThetaEstimate> {
    model.validate()?;
    if s == 0 {
        return Err(Error::config("anchor length s must be at least 1"));
    }
    if reps == 0 {
        return Err(Error::config("reps must be at least 1"));
    }
    let t = model.period;
    let u = normalized_level(&model.process, n, tau_x)?;
    let len = t + s - 1;
    let window = ConditionedWindow::new(&model.process, len, t, u);

    let tally = tally_reps(reps, seed, 0, |rng, buf| {
        window.sample(rng, &mut buf.innov, &mut buf.x);
        fill_mask(rng, len, t, model.p, &mut buf.u);
        impute_into(&buf.x, &buf.u, t, &mut buf.y);
        let y = &buf.y;
        let (mut anchored, mut exceed) = (0, 0);
        for i in 1..=t {
            if y[i] > u {
                exceed += 1;
                anchored += y[i + 1..i + s].iter().all(|&v| v <= u) as u64;
            }
        }
        (anchored, exceed)
    });

    if tally.b == 0 {
        return Err(Error::UndefinedEstimate(format!(
            "no exceedance in {reps} replications; raise reps or tau"
        )));
    }
    let (value, se) = tally.ratio();
    Ok(ThetaEstimate {
        method: ThetaMethod::Plugin,
        level: u,
        run_length: s,
        value,
        exceedance_count: tally.b,
        cluster_count: tally.a,
        std_error: Some(se),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imputation::{impute, ControlMask};
    use crate::processes::{ProcessConfig, ProcessPath};

    fn series(x: Vec<f64>, bits: &[u8], period: usize) -> ImputedSeries {
        let path = ProcessPath {
            values: x,
            config: ProcessConfig::unit_iid(),
            seed: 0,
        };
        let mask = ControlMask {
            u: bits.iter().map(|&b| b == 1).collect(),
            period,
            p: 0.5,
            seed: 0,
        };
        impute(&path, &mask).unwrap()
    }

    #[test]
    fn p_hat_boundaries_and_hand_value() {
        let x: Vec<f64> = (1..=20).map(f64::from).collect();
        // T = 3, n = 19: m = floor(20/3) - 1 = 5
        let none = series(x.clone(), &[1; 20], 3);
        let r = estimate_p(&none).unwrap();
        assert_eq!((r.block_count, r.indicator_sum, r.p_hat), (5, 0, 1.0));

        let mut bits = [1u8; 20];
        for i in 0..20 {
            if i % 3 != 0 {
                bits[i] = 0;
            }
        }
        let all = series(x, &bits, 3);
        let r = estimate_p(&all).unwrap();
        assert_eq!((r.indicator_sum, r.p_hat), (5, 0.0));
    }

    #[test]
    fn p_hat_formula_t3() {
        // T = 3, m = 6, indicator sum 2
        let x: Vec<f64> = (1..=21).map(f64::from).collect();
        let mut bits = [1u8; 21];
        for i in [4, 5, 7, 8] {
            bits[i] = 0;
        }
        let s = series(x, &bits, 3);
        let r = estimate_p(&s).unwrap();
        assert_eq!((r.block_count, r.indicator_sum), (6, 2));
        assert!((r.p_hat - (1.0 - (1.0f64 / 3.0).sqrt())).abs() < 1e-15);
    }

    #[test]
    fn flag_rule_ignores_genuine_ties() {
        // x_2 = x_3 is a tie of the underlying values, not an imputation
        let x = vec![1.0, 2.0, 4.0, 4.0, 5.0, 6.0];
        let s = series(x, &[1; 6], 2);
        assert_eq!(estimate_p(&s).unwrap().indicator_sum, 1);
        let r = estimate_p_with(&s, StagnationRule::ImputationFlags).unwrap();
        assert_eq!((r.indicator_sum, r.p_hat), (0, 1.0));
    }

    #[test]
    fn short_series_is_rejected() {
        let s = series(vec![1.0, 2.0, 3.0], &[1, 1, 1], 3);
        assert!(matches!(estimate_p(&s), Err(Error::SampleTooShort(_))));
        assert!(matches!(stagnation_frequency(&s), Err(Error::SampleTooShort(_))));
    }

    #[test]
    fn ecdf_uses_controls_only() {
        let s = series(vec![9.0, 5.0, 1.0, 7.0, 2.0, 0.5, 3.0], &[1; 7], 2);
        let e = ecdf_from_controls(&s).unwrap();
        assert_eq!(e.values(), &[1.0, 2.0, 3.0]);
        assert!((e.eval(2.0) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(e.eval(0.9), 0.0);
        assert_eq!(e.eval(3.0), 1.0);
        let short = series(vec![1.0, 2.0], &[1, 1], 2);
        assert!(ecdf_from_controls(&short).is_err());
    }

    #[test]
    fn runs_hand_patterns() {
        let e = runs_extremal_index(&[2.0, 0.0, 0.0, 0.0, 2.0], 1.0, 2).unwrap();
        assert_eq!((e.cluster_count, e.exceedance_count, e.value), (2, 2, 1.0));
        let e = runs_extremal_index(&[2.0, 2.0, 0.0, 2.0], 1.0, 2).unwrap();
        assert_eq!((e.cluster_count, e.exceedance_count), (1, 3));
        assert!((e.value - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            runs_extremal_index(&[0.0, 0.5], 1.0, 2),
            Err(Error::UndefinedEstimate(_))
        ));
    }

    #[test]
    fn plugin_with_unit_anchor_is_one() {
        let model = ModelConfig::new(ProcessConfig::moving_maxima(), 3, 0.4).unwrap();
        let e = plugin_theta(&model, 10_000, 5.0, 1, 2_000, 3).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.cluster_count, e.exceedance_count);
    }

    #[test]
    fn plugin_iid_t3_near_closed_form() {
        let model = ModelConfig::new(ProcessConfig::unit_iid(), 3, 0.5).unwrap();
        let e = plugin_theta(&model, 1_000_000, 20.0, 4, 200_000, 8).unwrap();
        let want = 2.0 / 3.25;
        let se = e.std_error.unwrap();
        assert!((e.value - want).abs() < 4.0 * se, "{} vs {want} (se {se})", e.value);
    }
}
