//! Closed-form quantities of the imputed model.
//!
//! Marginal laws of `Y`, the tail-constant bookkeeping that turns `tau_X`
//! into the `tau` of the periodic sequence, the stagnation probability and
//! the extremal indices of the worked examples. Where the extremal index is
//! assembled from tail limits, both the assembled route and the simplified
//! closed form are exposed so they can be checked against each other.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imputation::ModelConfig;
use crate::processes::{normalized_level, ProcessConfig, ProcessKind};

/// Enumeration of `G_j` walks all subsets of `j - 1` indices.
const MAX_ENUMERATED_OFFSET: usize = 25;

/// `P(A_s) = (1 - p)^(T - 1)`.
pub fn stagnation_probability(p: f64, period: usize) -> f64 {
    (1.0 - p).powi(period as i32 - 1)
}

/// Probability that a block of the moving maxima stagnates under exact value
/// equality: `(1-p)^(T-1) + p (1-p)^(T-2) / 3`. The extra term comes from
/// the tie `X_{sT+1} = X_{sT}`, which happens when `Z_{sT}` exceeds both
/// neighbours (probability 1/3), followed by `T - 2` imputations.
pub fn moving_maxima_stagnation_probability(p: f64, period: usize) -> f64 {
    let q = 1.0 - p;
    q.powi(period as i32 - 1) + p * q.powi(period as i32 - 2) / 3.0
}

/// `G_j(x)`: the law of `max{ U_i X_i : kT <= i <= kT + j - 1 }`, by
/// enumeration over the available subset `S` of the non-control offsets.
pub fn g_j(x: f64, j: usize, process: &ProcessConfig, p: f64) -> Result<f64> {
    if j == 0 {
        return Err(Error::Arity("G_j needs an offset j >= 1".into()));
    }
    if j - 1 > MAX_ENUMERATED_OFFSET {
        return Err(Error::Unsupported(format!(
            "G_j enumeration beyond offset {} (got {j})",
            MAX_ENUMERATED_OFFSET + 1
        )));
    }
    let free = j - 1;
    let mut total = 0.0;
    let mut indices = Vec::with_capacity(j);
    for set in 0u64..(1u64 << free) {
        indices.clear();
        indices.push(0);
        indices.extend((0..free).filter(|b| set >> b & 1 == 1).map(|b| b + 1));
        let k = indices.len() as i32 - 1;
        let weight = p.powi(k) * (1.0 - p).powi(free as i32 - k);
        total += weight * process.joint_cdf_common_level(&indices, x);
    }
    Ok(total)
}

/// Marginal cdf `F_j` of `Y_{kT + j}`: `F` for `j` in {0, 1}, otherwise
/// `p F + (1 - p) G_j`.
pub fn marginal_cdf_fj(x: f64, j: usize, model: &ModelConfig) -> Result<f64> {
    if j >= model.period {
        return Err(Error::Arity(format!(
            "offset j = {j} outside 0..{}",
            model.period
        )));
    }
    let f = model.process.marginal().cdf(x);
    if j <= 1 {
        return Ok(f);
    }
    Ok(model.p * f + (1.0 - model.p) * g_j(x, j, &model.process, model.p)?)
}

/// Tail constants `tau_X`, `tau_j` (`j = 2..T-1`) and the combined `tau`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauDecomposition {
    pub tau_x: f64,
    /// `tau_j` for `j = 2, ..., T - 1`, in order.
    pub tau_j: Vec<f64>,
    pub tau: f64,
    pub period: usize,
    pub p: f64,
}

/// `tau = [((T-2)p + 2) tau_X + (1-p) sum_j tau_j] / T`.
pub fn tau_combined(p: f64, period: usize, tau_x: f64, tau_j: &[f64]) -> Result<TauDecomposition> {
    if period < 2 {
        return Err(Error::config(format!("period must be at least 2, got {period}")));
    }
    if tau_j.len() != period - 2 {
        return Err(Error::Arity(format!(
            "period {period} needs {} tau_j values, got {}",
            period - 2,
            tau_j.len()
        )));
    }
    let t = period as f64;
    let tau = (((t - 2.0) * p + 2.0) * tau_x + (1.0 - p) * tau_j.iter().sum::<f64>()) / t;
    Ok(TauDecomposition {
        tau_x,
        tau_j: tau_j.to_vec(),
        tau,
        period,
        p,
    })
}

/// Finite-`n` decomposition at the level `u_n` with `n (1 - F(u_n)) = tau_x`:
/// `tau_j = n (1 - G_j(u_n))`. The resulting `tau` equals
/// `n (1 - (1/T) sum_j F_j(u_n))` exactly.
pub fn tau_at_level(model: &ModelConfig, n: usize, tau_x: f64) -> Result<TauDecomposition> {
    let u = normalized_level(&model.process, n, tau_x)?;
    let nf = n as f64;
    let tau_j = (2..model.period)
        .map(|j| g_j(u, j, &model.process, model.p).map(|g| nf * (1.0 - g)))
        .collect::<Result<Vec<_>>>()?;
    tau_combined(model.p, model.period, tau_x, &tau_j)
}

/// Limits `tau_j` derived for the worked examples: ARMAX and i.i.d. with
/// `T = 3`; empty for `T = 2`.
pub fn example_tau_j(model: &ModelConfig, tau_x: f64) -> Option<Vec<f64>> {
    let p = model.p;
    match (model.process.kind, model.period) {
        (_, 2) => Some(Vec::new()),
        (ProcessKind::Armax, 3) => {
            let theta_x = crate::processes::theoretical_theta_x(&model.process);
            Some(vec![tau_x * (1.0 + p * theta_x)])
        }
        (ProcessKind::Iid, 3) => Some(vec![tau_x * (1.0 + p)]),
        _ => None,
    }
}

/// Inputs of the extremal-index closed forms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormRequest {
    pub kind: ProcessKind,
    pub p: f64,
    pub period: usize,
    pub theta_x: f64,
}

impl ClosedFormRequest {
    pub fn for_model(model: &ModelConfig) -> Self {
        Self {
            kind: model.process.kind,
            p: model.p,
            period: model.period,
            theta_x: crate::processes::theoretical_theta_x(&model.process),
        }
    }
}

/// `theta_Y` for the supported `(process, T)` pairs:
///
/// * moving maxima, `T = 2`: `1/2`;
/// * ARMAX, `T = 2`: `theta_X + theta_X^2 (p - 1) / 2`;
/// * ARMAX, `T = 3`: `[3 th + th^2 (-3 + 4p - p^2) + th^3 (1-p)^2] / [3 + p (1-p) th]`;
/// * i.i.d., `T = 3`: `(1 + 2p) / (3 + p (1 - p))`.
pub fn theta_y_closed_form(req: &ClosedFormRequest) -> Result<f64> {
    let (p, th) = (req.p, req.theta_x);
    match (req.kind, req.period) {
        (ProcessKind::MovingMaxima, 2) => Ok(0.5),
        (ProcessKind::Armax, 2) => Ok(th + th * th * (p - 1.0) / 2.0),
        (ProcessKind::Armax, 3) => {
            let q = 1.0 - p;
            let num = 3.0 * th + th * th * (-3.0 + 4.0 * p - p * p) + th.powi(3) * q * q;
            Ok(num / (3.0 + p * q * th))
        }
        (ProcessKind::Iid, 3) => Ok((1.0 + 2.0 * p) / (3.0 + p * (1.0 - p))),
        (kind, t) => Err(Error::Unsupported(format!(
            "no closed form for {} with T = {t}; use the plug-in Monte Carlo estimate",
            kind.name()
        ))),
    }
}

/// Extremal index assembled from tail limits when the underlying sequence
/// satisfies the `T + 1` anti-clustering condition:
/// `tau_X / (tau T) * theta_X ((T-1) p^T + p^(T-1)) + sum_i P_{i,T} / (tau T)`.
pub fn theta_from_limits(
    tau_x: f64,
    tau: f64,
    theta_x: f64,
    p: f64,
    period: usize,
    sum_p_limits: f64,
) -> f64 {
    let t = period as f64;
    let lead = (t - 1.0) * p.powi(period as i32) + p.powi(period as i32 - 1);
    tau_x / (tau * t) * theta_x * lead + sum_p_limits / (tau * t)
}

/// Variant under the stronger `T` anti-clustering condition:
/// `tau_X / tau * theta_X p^(T-1) + sum_i P*_{i,T} / (tau T)`.
pub fn theta_from_limits_strong(
    tau_x: f64,
    tau: f64,
    theta_x: f64,
    p: f64,
    period: usize,
    sum_p_star_limits: f64,
) -> f64 {
    tau_x / tau * theta_x * p.powi(period as i32 - 1) + sum_p_star_limits / (tau * period as f64)
}

/// `P_{1,2}` for the moving maxima from its three limits
/// `tau/2`, `tau`, `tau` with weights `p(1-p)`, `(1-p)^2`, `p(1-p)`.
pub fn moving_maxima_p12(p: f64, tau: f64) -> f64 {
    let q = 1.0 - p;
    (tau / 2.0) * p * q + tau * q * q + tau * p * q
}

/// `sum_i P_{i,T}` for the ARMAX examples (`T` in {2, 3}) from the tail
/// limits returned by [`armax_tail_limit`].
pub fn armax_sum_p_limits(p: f64, period: usize, tau_x: f64, t: f64, alpha: f64) -> Result<f64> {
    let theta_x = 1.0 - t.powf(alpha);
    let lim = |kind, j| armax_tail_limit(kind, j, tau_x, theta_x, alpha, t);
    let q = 1.0 - p;
    match period {
        2 => Ok(lim(TailLimit::LPower, 1)? * p * q
            + lim(TailLimit::HGap, 1)? * q * q
            + lim(TailLimit::HGap, 1)? * p * q),
        3 => Ok(lim(TailLimit::HGap, 0)? * (p + p * p - 2.0 * p.powi(3))
            + lim(TailLimit::HGap, 1)? * p * q
            + lim(TailLimit::HGap, 2)? * q * q
            + lim(TailLimit::LMixed, 2)? * p * q),
        _ => Err(Error::Unsupported(format!("ARMAX limits only assembled for T in {{2, 3}}, got {period}"))),
    }
}

/// `sum_i P*_{i,3}` for an i.i.d. underlying sequence: `tau_X (1 + 2p - 3p^2)`.
pub fn iid_sum_p_star_t3(p: f64, tau_x: f64) -> f64 {
    tau_x * (1.0 - p * p) + tau_x * 2.0 * (p - p * p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailLimit {
    /// `lim n (H(u_n / t^(j+1)) - H(u_n))`
    HGap,
    /// `lim n (1 - L(u_n / t^j))`
    LPower,
    /// `lim n (1 - L^j(u_n / t) L(u_n / t^2))`
    LMixed,
}

/// Tail limits of the ARMAX process at normalized levels.
pub fn armax_tail_limit(
    kind: TailLimit,
    j: usize,
    tau_x: f64,
    theta_x: f64,
    alpha: f64,
    t: f64,
) -> Result<f64> {
    let ta = t.powf(alpha);
    match kind {
        TailLimit::HGap => Ok(tau_x * theta_x * (0..=j).map(|k| ta.powi(k as i32)).sum::<f64>()),
        TailLimit::LPower if j >= 1 => Ok(ta.powi(j as i32 - 1) * tau_x * theta_x),
        TailLimit::LMixed if j >= 1 => Ok(tau_x * theta_x * (j as f64 + ta)),
        _ => Err(Error::Arity(format!("{kind:?} needs j >= 1, got {j}"))),
    }
}
