//! Monte Carlo evidence for the local dependence conditions.
//!
//! Each anti-clustering sum has the form `n P(E and B)` where `E` is an
//! exceedance in the first period and `B` a later exceedance inside the
//! block horizon `h = floor(n / (k_n T)) T`. Replications draw the window
//! `X_0..=X_{h+T}` conditionally on `E` (see the `window` module), so the
//! sums are estimated as `n P(E) P(B | E)` with `P(E)` exact.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imputation::{fill_mask, impute_into, ModelConfig};
use crate::processes::{normalized_level, ProcessConfig};
use crate::window::{tally_reps, ConditionedWindow, Scratch, Tally};

/// Default `tau_X` of the level `u_n` used by the diagnostics.
pub const DEFAULT_TAU: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// Local condition on `Y` with anchor length `s`.
    DtsLocal,
    /// Sufficient condition on `X` with a non-exceedance at `T + 1`.
    C36,
    /// Sufficient condition on `X` without the middle constraint.
    C312,
    /// `DtsLocal` with `s = 2`.
    D22Counter,
}

impl Condition {
    pub fn name(&self) -> &'static str {
        match self {
            Condition::DtsLocal => "dts_local",
            Condition::C36 => "c36",
            Condition::C312 => "c312",
            Condition::D22Counter => "d22_counter",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "dts_local" | "dts" => Ok(Condition::DtsLocal),
            "c36" => Ok(Condition::C36),
            "c312" => Ok(Condition::C312),
            "d22_counter" | "d22" => Ok(Condition::D22Counter),
            other => Err(Error::config(format!(
                "unknown condition {other:?}; expected dts_local, c36, c312 or d22_counter"
            ))),
        }
    }
}

/// `k_n = floor(n^exponent)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnRule {
    pub exponent: f64,
}

impl Default for KnRule {
    fn default() -> Self {
        Self { exponent: 2.0 / 3.0 }
    }
}

impl KnRule {
    pub fn new(exponent: f64) -> Result<Self> {
        if !(exponent > 0.0 && exponent < 1.0) {
            return Err(Error::config(format!(
                "k_n exponent must lie in (0, 1), got {exponent}"
            )));
        }
        Ok(Self { exponent })
    }

    pub fn k_n(&self, n: usize) -> usize {
        // the small offset keeps exact powers such as 10^(6 * 2/3) from flooring down
        ((n as f64).powf(self.exponent) + 1e-9).floor().max(1.0) as usize
    }

    pub fn describe(&self) -> String {
        format!("k_n = floor(n^{})", self.exponent)
    }
}

/// `floor(n / (k_n T)) T`.
pub fn block_horizon(n: usize, k_n: usize, period: usize) -> usize {
    n / (k_n * period) * period
}

/// Level and block-size conventions shared by all sums.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRule {
    pub tau_x: f64,
    pub kn: KnRule,
}

impl Default for LevelRule {
    fn default() -> Self {
        Self {
            tau_x: DEFAULT_TAU,
            kn: KnRule::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionEstimate {
    pub estimate: f64,
    pub std_error: f64,
    /// Rule-of-three upper bound, set when no event was observed.
    pub upper_bound: Option<f64>,
    pub events: u64,
    pub reps: usize,
    pub n: usize,
    pub k_n: usize,
    pub horizon: usize,
    pub level: f64,
}

struct Setup {
    u: f64,
    k_n: usize,
    horizon: usize,
}

fn setup(process: &ProcessConfig, period: usize, n: usize, reps: usize, rule: &LevelRule) -> Result<Setup> {
    process.validate()?;
    if reps == 0 {
        return Err(Error::config("reps must be at least 1"));
    }
    let u = normalized_level(process, n, rule.tau_x)?;
    let k_n = rule.kn.k_n(n);
    let horizon = block_horizon(n, k_n, period);
    if horizon < period {
        return Err(Error::config(format!(
            "n = {n} is too small for k_n = {k_n} and T = {period}: empty block"
        )));
    }
    Ok(Setup { u, k_n, horizon })
}

fn finish(tally: Tally, scale: f64, per_rep: f64, setup: &Setup, n: usize) -> ConditionEstimate {
    let (mean, se) = tally.mean_a();
    let reps = tally.reps as usize;
    ConditionEstimate {
        estimate: scale * mean / per_rep,
        std_error: scale * se / per_rep,
        upper_bound: (tally.a == 0).then(|| scale * 3.0 / reps as f64),
        events: tally.a,
        reps,
        n,
        k_n: setup.k_n,
        horizon: setup.horizon,
        level: setup.u,
    }
}

fn exceeds(values: &[f64], u: f64) -> bool {
    values.iter().any(|&v| v > u)
}

fn dts_local_stream(
    model: &ModelConfig,
    s: usize,
    n: usize,
    reps: usize,
    seed: u64,
    stream: u64,
    rule: &LevelRule,
) -> Result<ConditionEstimate> {
    model.validate()?;
    if s == 0 {
        return Err(Error::config("anchor length s must be at least 1"));
    }
    let t = model.period;
    let st = setup(&model.process, t, n, reps, rule)?;
    let (u, h) = (st.u, st.horizon);
    let window = ConditionedWindow::new(&model.process, h, t, u);
    let tally = tally_reps(reps, seed, stream, |rng, buf: &mut Scratch| {
        window.sample(rng, &mut buf.innov, &mut buf.x);
        fill_mask(rng, h, t, model.p, &mut buf.u);
        impute_into(&buf.x, &buf.u, t, &mut buf.y);
        let y = &buf.y;
        let mut hits = 0;
        for i in 1..=t {
            if i + s > h || y[i] <= u {
                continue;
            }
            let quiet = y[i + 1..i + s].iter().all(|&v| v <= u);
            hits += (quiet && exceeds(&y[i + s..=h], u)) as u64;
        }
        (hits, 0)
    });
    let scale = n as f64 * window.probability();
    Ok(finish(tally, scale, t as f64, &st, n))
}

/// `n (1/T) sum_{i=1}^T P(Y_i > u_n >= max(Y_{i+1..i+s-1}), max(Y_{i+s..h}) > u_n)`.
pub fn dts_local_sum(
    model: &ModelConfig,
    s: usize,
    n: usize,
    reps: usize,
    seed: u64,
    rule: &LevelRule,
) -> Result<ConditionEstimate> {
    dts_local_stream(model, s, n, reps, seed, 0, rule)
}

fn x_condition_stream(
    process: &ProcessConfig,
    period: usize,
    middle_quiet: bool,
    n: usize,
    reps: usize,
    seed: u64,
    stream: u64,
    rule: &LevelRule,
) -> Result<ConditionEstimate> {
    if period < 2 {
        return Err(Error::config(format!("period must be at least 2, got {period}")));
    }
    let t = period;
    let st = setup(process, t, n, reps, rule)?;
    let (u, h) = (st.u, st.horizon);
    let len = h + t;
    let window = ConditionedWindow::new(process, len, t, u);
    let tally = tally_reps(reps, seed, stream, |rng, buf: &mut Scratch| {
        window.sample(rng, &mut buf.innov, &mut buf.x);
        let x = &buf.x;
        let hit = if middle_quiet {
            x[t + 1] <= u && exceeds(&x[t + 2..=len], u)
        } else {
            exceeds(&x[t + 1..=len], u)
        };
        (hit as u64, 0)
    });
    let scale = n as f64 * window.probability();
    Ok(finish(tally, scale, 1.0, &st, n))
}

/// `n P(max(X_0..X_T) > u_n >= X_{T+1}, max(X_{T+2..h+T}) > u_n)`.
pub fn condition36_sum(
    process: &ProcessConfig,
    period: usize,
    n: usize,
    reps: usize,
    seed: u64,
    rule: &LevelRule,
) -> Result<ConditionEstimate> {
    x_condition_stream(process, period, true, n, reps, seed, 0, rule)
}

/// `n P(max(X_0..X_T) > u_n, max(X_{T+1..h+T}) > u_n)`.
pub fn condition312_sum(
    process: &ProcessConfig,
    period: usize,
    n: usize,
    reps: usize,
    seed: u64,
    rule: &LevelRule,
) -> Result<ConditionEstimate> {
    x_condition_stream(process, period, false, n, reps, seed, 0, rule)
}

/// Estimates of one condition along an `n` grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionTrace {
    pub condition: Condition,
    pub n_grid: Vec<usize>,
    pub estimates: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub upper_bounds: Vec<Option<f64>>,
    pub k_n: Vec<usize>,
    pub kn_rule: String,
    /// `tau_X` of the level; the verdict thresholds are relative to it.
    pub tau: f64,
    pub s: Option<usize>,
    pub reps: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRequest {
    pub condition: Condition,
    pub model: ModelConfig,
    /// Anchor length for `DtsLocal`; ignored otherwise.
    pub s: usize,
    pub n_grid: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub rule: LevelRule,
}

impl TraceRequest {
    pub fn new(condition: Condition, model: ModelConfig, n_grid: Vec<usize>, reps: usize, seed: u64) -> Self {
        Self {
            condition,
            model,
            s: model.period + 1,
            n_grid,
            reps,
            seed,
            rule: LevelRule::default(),
        }
    }
}

/// Grid point `g` draws its replications from stream `g` of the seed.
pub fn condition_trace(req: &TraceRequest) -> Result<ConditionTrace> {
    if req.n_grid.is_empty() {
        return Err(Error::config("n grid is empty"));
    }
    if req.n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("n grid must be strictly increasing"));
    }
    let s = match req.condition {
        Condition::DtsLocal => Some(req.s),
        Condition::D22Counter => Some(2),
        _ => None,
    };
    let mut trace = ConditionTrace {
        condition: req.condition,
        n_grid: req.n_grid.clone(),
        estimates: Vec::new(),
        std_errors: Vec::new(),
        upper_bounds: Vec::new(),
        k_n: Vec::new(),
        kn_rule: req.rule.kn.describe(),
        tau: req.rule.tau_x,
        s,
        reps: req.reps,
        seed: req.seed,
    };
    for (g, &n) in req.n_grid.iter().enumerate() {
        let g = g as u64;
        let est = match req.condition {
            Condition::DtsLocal | Condition::D22Counter => {
                dts_local_stream(&req.model, s.expect("anchor"), n, req.reps, req.seed, g, &req.rule)?
            }
            Condition::C36 | Condition::C312 => x_condition_stream(
                &req.model.process,
                req.model.period,
                req.condition == Condition::C36,
                n,
                req.reps,
                req.seed,
                g,
                &req.rule,
            )?,
        };
        trace.estimates.push(est.estimate);
        trace.std_errors.push(est.std_error);
        trace.upper_bounds.push(est.upper_bound);
        trace.k_n.push(est.k_n);
    }
    Ok(trace)
}

impl ConditionTrace {
    /// CSV with columns `n, estimate, std_error, k_n, tau, condition, s`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "estimate", "std_error", "k_n", "tau", "condition", "s"])?;
        let s = self.s.map(|s| s.to_string()).unwrap_or_default();
        for i in 0..self.n_grid.len() {
            w.write_record([
                self.n_grid[i].to_string(),
                self.estimates[i].to_string(),
                self.std_errors[i].to_string(),
                self.k_n[i].to_string(),
                self.tau.to_string(),
                self.condition.name().to_string(),
                s.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv is utf-8"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Vanishing,
    NonVanishing,
    Inconclusive,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Vanishing => "vanishing",
            Verdict::NonVanishing => "non-vanishing",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Heuristic reading of a trace (thresholds are conventions of this crate):
/// vanishing when the last estimate is below a tenth of the first and the
/// trace never rises by more than two combined standard errors;
/// non-vanishing when the last estimate exceeds `tau / 2` with standard
/// error below `tau / 10`; inconclusive otherwise or with fewer than three
/// grid points.
pub fn trend_report(trace: &ConditionTrace) -> Verdict {
    let e = &trace.estimates;
    let se = &trace.std_errors;
    if e.len() < 3 || se.len() != e.len() {
        return Verdict::Inconclusive;
    }
    let last = e.len() - 1;
    let monotone = (0..last).all(|k| e[k + 1] <= e[k] + 2.0 * se[k].hypot(se[k + 1]));
    if e[last] < 0.1 * e[0] && monotone {
        Verdict::Vanishing
    } else if e[last] > 0.5 * trace.tau && se[last] < 0.1 * trace.tau {
        Verdict::NonVanishing
    } else {
        Verdict::Inconclusive
    }
}

/// Both sides of `P(Y_T > u, max(Y_{T+1..2T}) <= u) = p^(T-1) P(X_T > u, max(X_{T+1..2T}) <= u)`
/// estimated on the same replications.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1bCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub std_error: f64,
    /// `|lhs - rhs| / std_error`; zero when both the gap and its error vanish.
    pub studentized_gap: f64,
    pub reps: usize,
}

pub fn lemma1b_check(model: &ModelConfig, u: f64, reps: usize, seed: u64) -> Result<Lemma1bCheck> {
    model.validate()?;
    if reps == 0 {
        return Err(Error::config("reps must be at least 1"));
    }
    let tail = model.process.marginal().survival(u);
    if tail.is_nan() || tail > 0.1 {
        return Err(Error::config(format!(
            "level u = {u} is not in the upper tail (exceedance probability {tail} > 0.1)"
        )));
    }
    let t = model.period;
    let len = 2 * t;
    let tally = tally_reps(reps, seed, 0, |rng, buf: &mut Scratch| {
        model.process.sample_innovations(len, rng, &mut buf.innov);
        model.process.build_path(&buf.innov, &mut buf.x);
        fill_mask(rng, len, t, model.p, &mut buf.u);
        impute_into(&buf.x, &buf.u, t, &mut buf.y);
        let (x, y) = (&buf.x, &buf.y);
        let left = y[t] > u && !exceeds(&y[t + 1..=len], u);
        let right = x[t] > u && !exceeds(&x[t + 1..=len], u);
        (left as u64, right as u64)
    });
    if tally.a == 0 && tally.b == 0 {
        return Err(Error::UndefinedEstimate(format!(
            "no qualifying event in {reps} replications"
        )));
    }
    let r = reps as f64;
    let c = model.p.powi(t as i32 - 1);
    let lhs = tally.a as f64 / r;
    let rhs = c * tally.b as f64 / r;
    // indicators: E[L^2] = E[L], E[R^2] = E[R]
    let mean_sq = (tally.a as f64 + c * c * tally.b as f64 - 2.0 * c * tally.ab as f64) / r;
    let diff = lhs - rhs;
    let std_error = ((mean_sq - diff * diff).max(0.0) / r).sqrt();
    let studentized_gap = if diff == 0.0 {
        0.0
    } else if std_error == 0.0 {
        f64::INFINITY
    } else {
        diff.abs() / std_error
    };
    Ok(Lemma1bCheck {
        lhs,
        rhs,
        std_error,
        studentized_gap,
        reps,
    })
}
