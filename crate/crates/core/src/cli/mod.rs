//! Command-line front end. [`run`] parses arguments, executes one command
//! and returns the process exit code:
//! 0 success, 1 usage or configuration error, 2 inconclusive diagnostic,
//! 3 numeric failure (no events to estimate from).

pub mod series_file;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::diagnostics::{
    condition_trace, lemma1b_check, trend_report, Condition, KnRule, LevelRule, TraceRequest,
    Verdict,
};
use crate::error::{Error, Result};
use crate::estimation::{estimate_p_with, stagnation_frequency_with, StagnationRule, ThetaMethod};
use crate::imputation::ModelConfig;
use crate::montecarlo::{
    marginal_check, table1, theta_compare, theta_surface, theta_surface_from_t, unit_grid,
    RunManifest, Table1Config, ThetaOptions,
};
use crate::processes::ProcessConfig;
use crate::theory::stagnation_probability;

use series_file::{read_series, write_atomic, write_series};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "imputed-extremes",
    version,
    about = "Simulate periodically controlled sequences with imputed values and study their extremes"
)]
pub struct Cli {
    /// Worker threads for Monte Carlo work (results do not depend on it).
    #[arg(long, global = true, env = "IMPUTED_EXTREMES_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulate X, the availability mask and Y; write a series CSV and sidecar.
    Simulate(SimulateArgs),
    /// Estimate p from a series file or a fresh simulation.
    EstimateP(EstimatePArgs),
    /// Bias, sd and RMSE of p_hat over a (p, n) grid.
    Table1(Table1Args),
    /// Closed-form, plug-in and runs extremal indices side by side.
    Theta(ThetaArgs),
    /// Trace an anti-clustering sum along an n grid and classify its trend.
    Diagnose(DiagnoseArgs),
    /// Closed-form theta_Y of the ARMAX model with T = 3 over a grid.
    Surface(SurfaceArgs),
    /// Monte Carlo check that an isolated control exceedance of Y has p^(T-1) times the probability for X.
    Lemma1b(Lemma1bArgs),
    /// KS distance between simulated Y_{T+j} and its closed-form law.
    Marginal(MarginalArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProcessName {
    Iid,
    Mm,
    Armax,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub process: ProcessName,
    /// Period T of the control indices.
    #[arg(long = "T", id = "period")]
    pub period: usize,
    /// Availability probability of non-control observations.
    #[arg(long)]
    pub p: f64,
    /// ARMAX coefficient t in (0, 1).
    #[arg(long)]
    pub t: Option<f64>,
    /// Fréchet shape of the marginal.
    #[arg(long)]
    pub alpha: Option<f64>,
}

impl ModelArgs {
    pub fn process(&self) -> Result<ProcessConfig> {
        build_process(self.process, self.t, self.alpha)
    }

    pub fn model(&self) -> Result<ModelConfig> {
        ModelConfig::new(self.process()?, self.period, self.p)
    }
}

fn build_process(name: ProcessName, t: Option<f64>, alpha: Option<f64>) -> Result<ProcessConfig> {
    match name {
        ProcessName::Armax => {
            let t = t.ok_or_else(|| Error::config("--t is required for --process armax"))?;
            ProcessConfig::armax(t, alpha.unwrap_or(1.0))
        }
        _ if t.is_some() => Err(Error::config("--t only applies to --process armax")),
        ProcessName::Iid => match alpha {
            Some(a) => ProcessConfig::iid(crate::processes::DistributionSpec::frechet(a, 1.0)?),
            None => Ok(ProcessConfig::unit_iid()),
        },
        ProcessName::Mm if alpha.is_some_and(|a| a != 1.0) => Err(Error::config(
            "the moving maxima uses unit Fréchet innovations; --alpha must be 1",
        )),
        ProcessName::Mm => Ok(ProcessConfig::moving_maxima()),
    }
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EstimatePArgs {
    /// Series CSV written by `simulate` (its sidecar must sit beside it).
    #[arg(long = "in", conflicts_with_all = ["process", "n", "p"])]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub process: Option<ProcessName>,
    /// Period; with --in it must match the file header.
    #[arg(long = "T", id = "period")]
    pub period: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// How stagnant blocks are recognised: equality of values or imputation flags.
    #[arg(long, default_value = "equality")]
    pub rule: String,
}

#[derive(Args, Debug)]
pub struct Table1Args {
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long = "p-values", value_delimiter = ',', default_values_t = [0.1, 0.25, 0.5, 0.75, 0.9])]
    pub p_values: Vec<f64>,
    #[arg(long = "n-values", value_delimiter = ',', default_values_t = [250, 1000, 5000])]
    pub n_values: Vec<usize>,
    #[arg(long = "T", id = "period", default_value_t = 2)]
    pub period: usize,
    #[arg(long, value_enum, default_value = "mm")]
    pub process: ProcessName,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value = "equality")]
    pub rule: String,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON run manifest destination.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ThetaArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 200_000)]
    pub n: usize,
    #[arg(long, default_value_t = 20.0)]
    pub tau: f64,
    /// Comma-separated subset of closed, plugin, runs.
    #[arg(long, value_delimiter = ',', default_value = "closed,plugin,runs")]
    pub methods: Vec<String>,
    #[arg(long = "plugin-reps", default_value_t = 1_000_000)]
    pub plugin_reps: usize,
    /// Anchor length of the plug-in estimator (default T + 1).
    #[arg(long)]
    pub s: Option<usize>,
    /// Paths pooled by the runs estimator.
    #[arg(long, default_value_t = 50)]
    pub paths: usize,
    /// Run length of the runs estimator (default T + 1).
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DiagnoseArgs {
    /// dts_local, c36, c312 or d22_counter.
    #[arg(long)]
    pub condition: String,
    #[arg(long, value_enum)]
    pub process: ProcessName,
    #[arg(long = "T", id = "period")]
    pub period: usize,
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Anchor length for dts_local (default T + 1).
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long = "n-grid", value_delimiter = ',', default_values_t = [1_000, 10_000, 100_000])]
    pub n_grid: Vec<usize>,
    #[arg(long, default_value_t = 200_000)]
    pub reps: usize,
    #[arg(long, default_value_t = crate::diagnostics::DEFAULT_TAU)]
    pub tau: f64,
    /// k_n = floor(n^exponent).
    #[arg(long = "kn-exponent", default_value_t = 2.0 / 3.0)]
    pub kn_exponent: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SurfaceArgs {
    /// Grid points in theta_X over [0, 1].
    #[arg(long = "theta-points", default_value_t = 21)]
    pub theta_points: usize,
    /// ARMAX coefficients t; overrides the theta_X grid when given.
    #[arg(long = "t-grid", value_delimiter = ',')]
    pub t_grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Grid points in p over [0.001, 0.999].
    #[arg(long = "p-points", default_value_t = 21)]
    pub p_points: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct Lemma1bArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Marginal quantile defining the level u.
    #[arg(long, default_value_t = 0.95)]
    pub quantile: f64,
    #[arg(long, default_value_t = 200_000)]
    pub reps: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct MarginalArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub j: usize,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.threads {
        Some(0) => Err(Error::config("--threads must be at least 1")),
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::config(e.to_string()))
            .and_then(|pool| {
                let (result, buf) = pool.install(|| {
                    let mut buf = Vec::new();
                    (dispatch(cli.command, &mut buf), buf)
                });
                out.write_all(&buf)?;
                result
            }),
        None => dispatch(cli.command, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::UndefinedEstimate(_) => EXIT_NUMERIC,
        _ => EXIT_USAGE,
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Simulate(a) => simulate(a, out),
        Command::EstimateP(a) => estimate(a, out),
        Command::Table1(a) => run_table1(a, out),
        Command::Theta(a) => theta(a, out),
        Command::Diagnose(a) => diagnose(a, out),
        Command::Surface(a) => surface(a, out),
        Command::Lemma1b(a) => lemma1b(a, out),
        Command::Marginal(a) => marginal(a, out),
    }
}

fn emit(out: &mut dyn Write, path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, bytes),
        None => Ok(out.write_all(bytes)?),
    }
}

fn write_manifest<S: Serialize>(
    path: Option<&Path>,
    command: &str,
    seed: u64,
    spec: &S,
    started: Instant,
) -> Result<()> {
    if let Some(p) = path {
        let manifest = RunManifest::new(command, seed, spec, started)?;
        write_atomic(p, format!("{}\n", manifest.to_json()?).as_bytes())?;
    }
    Ok(())
}

fn json_line<S: Serialize>(value: &S) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

fn simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<i32> {
    let model = a.model.model()?;
    let series = model.simulate(a.n, a.seed)?;
    write_series(&a.out, &series, Some(a.seed))?;
    writeln!(
        out,
        "n = {}, T = {}, p = {}: {} imputed of {} non-control values; wrote {}",
        series.n(),
        model.period,
        model.p,
        series.imputed_count(),
        series.n() - series.n() / model.period,
        a.out.display()
    )?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct PReport {
    p_hat: f64,
    m: usize,
    indicator_sum: usize,
    stagnation_freq: f64,
    stagnation_std_error: f64,
    theorem1_value: f64,
    rule: &'static str,
    period: usize,
    n: usize,
}

fn estimate(a: EstimatePArgs, out: &mut dyn Write) -> Result<i32> {
    let rule = StagnationRule::parse(&a.rule)?;
    let (series, p_ref) = match &a.input {
        Some(path) => {
            let (series, header) = read_series(path)?;
            if let Some(t) = a.period.filter(|&t| t != header.period) {
                return Err(Error::config(format!(
                    "--T {t} does not match the file header (T = {})",
                    header.period
                )));
            }
            (series, header.p)
        }
        None => {
            let missing = |flag: &str| Error::config(format!("{flag} is required without --in"));
            let process = a.process.ok_or_else(|| missing("--process"))?;
            let model = ModelConfig::new(
                build_process(process, a.t, a.alpha)?,
                a.period.ok_or_else(|| missing("--T"))?,
                a.p.ok_or_else(|| missing("--p"))?,
            )?;
            let n = a.n.ok_or_else(|| missing("--n"))?;
            (model.simulate(n, a.seed)?, model.p)
        }
    };
    let est = estimate_p_with(&series, rule)?;
    let freq = stagnation_frequency_with(&series, rule)?;
    let report = PReport {
        p_hat: est.p_hat,
        m: est.block_count,
        indicator_sum: est.indicator_sum,
        stagnation_freq: freq.frequency,
        stagnation_std_error: freq.std_error,
        theorem1_value: stagnation_probability(p_ref, series.period()),
        rule: rule.name(),
        period: series.period(),
        n: series.n(),
    };
    out.write_all(&json_line(&report)?)?;
    Ok(EXIT_OK)
}

fn run_table1(a: Table1Args, out: &mut dyn Write) -> Result<i32> {
    let started = Instant::now();
    let config = Table1Config {
        p_values: a.p_values,
        n_values: a.n_values,
        reps: a.reps,
        period: a.period,
        process: build_process(a.process, a.t, a.alpha)?,
        rule: StagnationRule::parse(&a.rule)?,
        master_seed: a.seed,
    };
    let table = table1(&config)?;
    emit(out, a.out.as_deref(), table.to_csv_string()?.as_bytes())?;
    write_manifest(a.manifest.as_deref(), "table1", a.seed, &config, started)?;
    Ok(EXIT_OK)
}

fn parse_methods(names: &[String]) -> Result<Vec<ThetaMethod>> {
    names
        .iter()
        .map(|m| match m.trim() {
            "closed" | "closed_form" => Ok(ThetaMethod::ClosedForm),
            "plugin" => Ok(ThetaMethod::Plugin),
            "runs" => Ok(ThetaMethod::Runs),
            other => Err(Error::config(format!(
                "unknown method {other:?}; expected closed, plugin or runs"
            ))),
        })
        .collect()
}

fn theta(a: ThetaArgs, out: &mut dyn Write) -> Result<i32> {
    let started = Instant::now();
    let model = a.model.model()?;
    let opts = ThetaOptions {
        methods: parse_methods(&a.methods)?,
        plugin_reps: a.plugin_reps,
        plugin_s: a.s,
        runs_paths: a.paths,
        run_length: a.r,
        seed: a.seed,
    };
    let report = theta_compare(&model, a.tau, a.n, &opts)?;
    emit(out, a.out.as_deref(), &json_line(&report)?)?;
    write_manifest(a.manifest.as_deref(), "theta", a.seed, &(&model, &opts), started)?;
    Ok(EXIT_OK)
}

fn diagnose(a: DiagnoseArgs, out: &mut dyn Write) -> Result<i32> {
    let started = Instant::now();
    let condition = Condition::parse(&a.condition)?;
    let model = ModelConfig::new(build_process(a.process, a.t, a.alpha)?, a.period, a.p)?;
    let mut req = TraceRequest::new(condition, model, a.n_grid, a.reps, a.seed);
    if let Some(s) = a.s {
        req.s = s;
    }
    req.rule = LevelRule {
        tau_x: a.tau,
        kn: KnRule::new(a.kn_exponent)?,
    };
    let trace = condition_trace(&req)?;
    let verdict = trend_report(&trace);
    match &a.out {
        Some(path) => {
            write_atomic(path, trace.to_csv_string()?.as_bytes())?;
            writeln!(out, "{} verdict: {}", condition.name(), verdict.name())?;
        }
        None => {
            out.write_all(trace.to_csv_string()?.as_bytes())?;
            writeln!(out, "# verdict: {}", verdict.name())?;
        }
    }
    write_manifest(a.manifest.as_deref(), "diagnose", a.seed, &req, started)?;
    Ok(if verdict == Verdict::Inconclusive {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    })
}

fn surface(a: SurfaceArgs, out: &mut dyn Write) -> Result<i32> {
    let p = unit_grid(a.p_points, 0.001);
    let s = match &a.t_grid {
        Some(t) => theta_surface_from_t(t, a.alpha, &p)?,
        None => theta_surface(&unit_grid(a.theta_points, 0.0), &p)?,
    };
    let mut buf = Vec::new();
    s.write_csv(&mut buf)?;
    emit(out, a.out.as_deref(), &buf)?;
    Ok(EXIT_OK)
}

fn lemma1b(a: Lemma1bArgs, out: &mut dyn Write) -> Result<i32> {
    let model = a.model.model()?;
    let u = model.process.marginal().quantile(a.quantile)?;
    let check = lemma1b_check(&model, u, a.reps, a.seed)?;
    out.write_all(&json_line(&check)?)?;
    Ok(EXIT_OK)
}

fn marginal(a: MarginalArgs, out: &mut dyn Write) -> Result<i32> {
    let model = a.model.model()?;
    let check = marginal_check(&model, a.j, a.samples, a.seed)?;
    out.write_all(&json_line(&check)?)?;
    Ok(EXIT_OK)
}
