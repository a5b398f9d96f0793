//! Replication harness: the p-estimation table, extremal-index comparisons,
//! the closed-form surface and marginal-law checks.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{
    estimate_p_with, plugin_theta, runs_counts, runs_estimate, stagnation_frequency_with,
    StagnationRule, ThetaEstimate, ThetaMethod,
};
use crate::imputation::{fill_mask, impute_into, ModelConfig};
use crate::processes::{normalized_level, ProcessConfig, ProcessKind};
use crate::rng::{mix_seed, rng_from_seed};
use crate::stats::{ks_critical_1pct, ks_statistic, SummaryStats};
use crate::theory::{
    example_tau_j, marginal_cdf_fj, tau_at_level, tau_combined, theta_y_closed_form,
    ClosedFormRequest, TauDecomposition,
};
use crate::window::Tally;

const TABLE1_STREAM: u64 = 0x7AB1;
const RUNS_STREAM: u64 = 0x2B5;
const MARGINAL_STREAM: u64 = 0x3A6;

/// A model, sample sizes and replication count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub model: ModelConfig,
    pub n_values: Vec<usize>,
    pub reps: usize,
    pub master_seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.reps == 0 {
            return Err(Error::config("reps must be at least 1"));
        }
        if self.n_values.is_empty() {
            return Err(Error::config("no sample sizes given"));
        }
        let min_n = 2 * self.model.period - 1;
        if let Some(&n) = self.n_values.iter().find(|&&n| n < min_n) {
            return Err(Error::config(format!(
                "n = {n} is below 2T - 1 = {min_n}"
            )));
        }
        Ok(())
    }

    /// Seed of replication `rep` at sample-size index `k`.
    pub fn rep_seed(&self, k: usize, rep: usize) -> u64 {
        mix_seed(self.master_seed, k as u64, rep as u64)
    }
}

/// Per-replication statistic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    PHat { rule: StagnationRule },
    StagnationFrequency { rule: StagnationRule },
    /// Runs estimate at level `u_n` with `n (1 - F(u_n)) = tau_x`.
    Runs { tau_x: f64, run_length: usize },
}

/// Evaluates one replication.
pub fn run_single(spec: &ExperimentSpec, estimator: Estimator, k: usize, rep: usize) -> Result<f64> {
    let n = spec.n_values[k];
    let series = spec.model.simulate(n, spec.rep_seed(k, rep))?;
    match estimator {
        Estimator::PHat { rule } => Ok(estimate_p_with(&series, rule)?.p_hat),
        Estimator::StagnationFrequency { rule } => {
            Ok(stagnation_frequency_with(&series, rule)?.frequency)
        }
        Estimator::Runs { tau_x, run_length } => {
            let u = normalized_level(&spec.model.process, n, tau_x)?;
            let (e, c) = runs_counts(series.y_values(), u, run_length);
            Ok(runs_estimate(u, run_length, e, c)?.value)
        }
    }
}

/// `results[k][rep]` for every sample size `k`; replication `rep` at size
/// index `k` uses the seed `mix_seed(master_seed, k, rep)`, so the output
/// does not depend on scheduling or worker count.
pub fn run_replications(spec: &ExperimentSpec, estimator: Estimator) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    (0..spec.n_values.len())
        .map(|k| {
            (0..spec.reps)
                .into_par_iter()
                .map(|rep| run_single(spec, estimator, k, rep))
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1Config {
    pub p_values: Vec<f64>,
    pub n_values: Vec<usize>,
    pub reps: usize,
    pub period: usize,
    pub process: ProcessConfig,
    #[serde(default)]
    pub rule: StagnationRule,
    pub master_seed: u64,
}

impl Default for Table1Config {
    fn default() -> Self {
        Self {
            p_values: vec![0.1, 0.25, 0.5, 0.75, 0.9],
            n_values: vec![250, 1000, 5000],
            reps: 1000,
            period: 2,
            process: ProcessConfig::moving_maxima(),
            rule: StagnationRule::ValueEquality,
            master_seed: 42,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub p: f64,
    pub n: usize,
    pub stats: SummaryStats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1 {
    pub config: Table1Config,
    pub rows: Vec<Table1Row>,
}

/// Bias, dispersion and RMSE of `p_hat` over a `(p, n)` grid. The row for
/// `p_values[i]` draws from the master seed `mix_seed(master_seed, TABLE1, i)`.
pub fn table1(config: &Table1Config) -> Result<Table1> {
    let mut rows = Vec::with_capacity(config.p_values.len() * config.n_values.len());
    for (i, &p) in config.p_values.iter().enumerate() {
        let spec = ExperimentSpec {
            model: ModelConfig::new(config.process, config.period, p)?,
            n_values: config.n_values.clone(),
            reps: config.reps,
            master_seed: mix_seed(config.master_seed, TABLE1_STREAM, i as u64),
        };
        let results = run_replications(&spec, Estimator::PHat { rule: config.rule })?;
        for (k, est) in results.iter().enumerate() {
            rows.push(Table1Row {
                p,
                n: config.n_values[k],
                stats: SummaryStats::from_estimates(est, p),
            });
        }
    }
    Ok(Table1 {
        config: config.clone(),
        rows,
    })
}

impl Table1 {
    /// CSV with columns `p, n, mean, bias, sd, rmse`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["p", "n", "mean", "bias", "sd", "rmse"])?;
        for r in &self.rows {
            w.write_record([
                r.p.to_string(),
                r.n.to_string(),
                r.stats.mean.to_string(),
                r.stats.bias.to_string(),
                r.stats.sd.to_string(),
                r.stats.rmse.to_string(),
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

    pub fn cell(&self, p: f64, n: usize) -> Option<&Table1Row> {
        self.rows.iter().find(|r| r.p == p && r.n == n)
    }
}

/// Runs estimate pooled over independent paths: cluster and exceedance
/// counts are summed before taking the ratio. The standard error treats
/// paths as replications of a ratio estimator.
pub fn runs_pooled(
    model: &ModelConfig,
    n: usize,
    tau_x: f64,
    run_length: usize,
    paths: usize,
    seed: u64,
) -> Result<ThetaEstimate> {
    model.validate()?;
    if paths == 0 || run_length == 0 {
        return Err(Error::config("paths and run length must be at least 1"));
    }
    let u = normalized_level(&model.process, n, tau_x)?;
    let tally = (0..paths as u64)
        .into_par_iter()
        .map(|k| {
            let series = model.simulate(n, mix_seed(seed, RUNS_STREAM, k))?;
            let (e, c) = runs_counts(series.y_values(), u, run_length);
            Ok::<_, Error>(Tally::single(c, e))
        })
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
    let mut est = runs_estimate(u, run_length, tally.b, tally.a)?;
    if paths > 1 {
        est.std_error = Some(tally.ratio().1);
    }
    Ok(est)
}

/// Which estimators to run and their Monte Carlo budgets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaOptions {
    pub methods: Vec<ThetaMethod>,
    /// Conditioned windows for the plug-in estimate.
    pub plugin_reps: usize,
    /// Anchor length `s`; `None` means `T + 1`.
    pub plugin_s: Option<usize>,
    /// Independent length-`n` paths pooled by the runs estimate.
    pub runs_paths: usize,
    /// Run length `r`; `None` means `T + 1`.
    pub run_length: Option<usize>,
    pub seed: u64,
}

impl Default for ThetaOptions {
    fn default() -> Self {
        Self {
            methods: vec![ThetaMethod::ClosedForm, ThetaMethod::Plugin, ThetaMethod::Runs],
            plugin_reps: 1_000_000,
            plugin_s: None,
            runs_paths: 50,
            run_length: None,
            seed: 42,
        }
    }
}

/// Side-by-side extremal-index values for one model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaReport {
    pub model: ModelConfig,
    pub n: usize,
    pub tau_x: f64,
    pub level: f64,
    pub closed_form: Option<f64>,
    pub plugin: Option<ThetaEstimate>,
    pub runs: Option<ThetaEstimate>,
    /// Tail constants at the finite level `u_n`.
    pub tau_at_level: TauDecomposition,
    /// Limiting tail constants, where the worked examples provide them.
    pub tau_limit: Option<TauDecomposition>,
}

pub fn theta_compare(model: &ModelConfig, tau_x: f64, n: usize, opts: &ThetaOptions) -> Result<ThetaReport> {
    model.validate()?;
    let level = normalized_level(&model.process, n, tau_x)?;
    let want = |m| opts.methods.contains(&m);
    let closed_form = if want(ThetaMethod::ClosedForm) {
        match theta_y_closed_form(&ClosedFormRequest::for_model(model)) {
            Ok(v) => Some(v),
            Err(Error::Unsupported(_)) if want(ThetaMethod::Plugin) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let plugin = if want(ThetaMethod::Plugin) {
        let s = opts.plugin_s.unwrap_or(model.period + 1);
        Some(plugin_theta(model, n, tau_x, s, opts.plugin_reps, opts.seed)?)
    } else {
        None
    };
    let runs = if want(ThetaMethod::Runs) {
        let r = opts.run_length.unwrap_or(model.period + 1);
        Some(runs_pooled(model, n, tau_x, r, opts.runs_paths, opts.seed)?)
    } else {
        None
    };
    let tau_limit = example_tau_j(model, tau_x)
        .map(|tj| tau_combined(model.p, model.period, tau_x, &tj))
        .transpose()?;
    Ok(ThetaReport {
        model: *model,
        n,
        tau_x,
        level,
        closed_form,
        plugin,
        runs,
        tau_at_level: tau_at_level(model, n, tau_x)?,
        tau_limit,
    })
}

/// Closed-form `theta_Y` of the ARMAX model with `T = 3` over a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaSurface {
    pub theta_x: Vec<f64>,
    pub p: Vec<f64>,
    /// `values[i][j]` at `p[i]`, `theta_x[j]`.
    pub values: Vec<Vec<f64>>,
}

pub fn theta_surface(theta_x: &[f64], p: &[f64]) -> Result<ThetaSurface> {
    if let Some(&bad) = theta_x.iter().find(|&&v| !(0.0..=1.0).contains(&v)) {
        return Err(Error::config(format!("theta_X = {bad} outside [0, 1]")));
    }
    if let Some(&bad) = p.iter().find(|&&v| !(v > 0.0 && v <= 1.0)) {
        return Err(Error::config(format!("p = {bad} outside (0, 1]")));
    }
    let values = p
        .iter()
        .map(|&p| {
            theta_x
                .iter()
                .map(|&th| {
                    theta_y_closed_form(&ClosedFormRequest {
                        kind: ProcessKind::Armax,
                        p,
                        period: 3,
                        theta_x: th,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ThetaSurface {
        theta_x: theta_x.to_vec(),
        p: p.to_vec(),
        values,
    })
}

/// Surface over ARMAX coefficients: `theta_X = 1 - t^alpha`.
pub fn theta_surface_from_t(t: &[f64], alpha: f64, p: &[f64]) -> Result<ThetaSurface> {
    let th: Vec<f64> = t.iter().map(|&t| 1.0 - t.powf(alpha)).collect();
    theta_surface(&th, p)
}

/// `k / (points - 1)` for `k = 0..points`, with the ends optionally pulled
/// in by `margin`.
pub fn unit_grid(points: usize, margin: f64) -> Vec<f64> {
    let last = (points.max(2) - 1) as f64;
    (0..points.max(2))
        .map(|k| margin + (1.0 - 2.0 * margin) * k as f64 / last)
        .collect()
}

impl ThetaSurface {
    /// Long-format CSV with columns `theta_x, p, theta_y`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["theta_x", "p", "theta_y"])?;
        for (i, &p) in self.p.iter().enumerate() {
            for (j, &th) in self.theta_x.iter().enumerate() {
                w.write_record([th.to_string(), p.to_string(), self.values[i][j].to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalCheck {
    pub j: usize,
    pub samples: usize,
    pub ks: f64,
    pub critical_1pct: f64,
}

impl MarginalCheck {
    pub fn passes(&self) -> bool {
        self.ks <= self.critical_1pct
    }
}

/// KS distance between `samples` independent draws of `Y_{T+j}` and `F_j`.
/// Each draw comes from its own short path, so the sample is i.i.d.
pub fn marginal_check(model: &ModelConfig, j: usize, samples: usize, seed: u64) -> Result<MarginalCheck> {
    model.validate()?;
    if j >= model.period {
        return Err(Error::Arity(format!("offset j = {j} outside 0..{}", model.period)));
    }
    if samples == 0 {
        return Err(Error::config("samples must be at least 1"));
    }
    // probe support before sampling
    marginal_cdf_fj(1.0, j, model)?;
    let t = model.period;
    let len = t + j;
    let draws: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map_init(
            || (Vec::new(), Vec::new(), Vec::new(), Vec::new()),
            |(innov, x, u, y), k| {
                let mut rng = rng_from_seed(mix_seed(seed, MARGINAL_STREAM, k));
                model.process.sample_innovations(len, &mut rng, innov);
                model.process.build_path(innov, x);
                fill_mask(&mut rng, len, t, model.p, u);
                impute_into(x, u, t, y);
                y[t + j]
            },
        )
        .collect();
    let ks = ks_statistic(&draws, |x| marginal_cdf_fj(x, j, model).expect("supported"));
    Ok(MarginalCheck {
        j,
        samples,
        ks,
        critical_1pct: ks_critical_1pct(samples),
    })
}

/// Provenance record written next to experiment outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub threads: usize,
    pub spec: serde_json::Value,
    pub wall_time_seconds: f64,
}

impl RunManifest {
    pub fn new<S: Serialize>(command: &str, seed: u64, spec: &S, started: Instant) -> Result<Self> {
        Ok(Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed,
            threads: rayon::current_num_threads(),
            spec: serde_json::to_value(spec)?,
            wall_time_seconds: started.elapsed().as_secs_f64(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
