//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Failures are reported but the process exits 0 unless
//! `ACCEPTANCE_STRICT=1` is set.

use std::time::Instant;

use imputed_extremes::diagnostics::{
    condition_trace, lemma1b_check, trend_report, Condition, TraceRequest, Verdict,
};
use imputed_extremes::montecarlo::{marginal_check, runs_pooled, table1, Table1Config};
use imputed_extremes::theory::{
    moving_maxima_p12, theta_from_limits, theta_y_closed_form, ClosedFormRequest,
};
use imputed_extremes::{
    estimate_p, plugin_theta, stagnation_frequency, ModelConfig, ProcessConfig, StagnationRule,
};

const THETA_N: usize = 200_000;
const THETA_TAU: f64 = 20.0;
const PLUGIN_REPS: usize = 1_000_000;
const RUNS_PATHS: usize = 50;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// `(p, n, mean, sd)` as published.
const TABLE1: [(f64, usize, f64, f64); 15] = [
    (0.10, 250, 0.0989, 0.0267),
    (0.10, 1000, 0.1008, 0.0137),
    (0.10, 5000, 0.1001, 0.0059),
    (0.25, 250, 0.2492, 0.0395),
    (0.25, 1000, 0.2494, 0.0198),
    (0.25, 5000, 0.2495, 0.0083),
    (0.50, 250, 0.5025, 0.0461),
    (0.50, 1000, 0.4997, 0.0222),
    (0.50, 5000, 0.4999, 0.0096),
    (0.75, 250, 0.7510, 0.0373),
    (0.75, 1000, 0.7506, 0.0188),
    (0.75, 5000, 0.7498, 0.0085),
    (0.90, 250, 0.9000, 0.0263),
    (0.90, 1000, 0.9001, 0.0129),
    (0.90, 5000, 0.9001, 0.0060),
];

fn ac1() -> Outcome {
    let t = table1(&Table1Config::default()).expect("table1");
    let flags = table1(&Table1Config {
        rule: StagnationRule::ImputationFlags,
        ..Table1Config::default()
    })
    .expect("table1");
    let (ok, detail) = compare_table1(&t);
    let (flags_ok, _) = compare_table1(&flags);
    let flag_cell = flags.cell(0.5, 1000).unwrap().stats;
    outcome(
        ok,
        format!(
            "value equality: {detail} | imputation flags: {} (p=0.5 n=1000 mean {:.4} sd {:.4})",
            if flags_ok { "15/15 cells" } else { "mismatch" },
            flag_cell.mean,
            flag_cell.sd
        ),
    )
}

fn compare_table1(t: &imputed_extremes::montecarlo::Table1) -> (bool, String) {
    let mut bad = Vec::new();
    for &(p, n, mean, sd) in &TABLE1 {
        let row = t.cell(p, n).expect("cell");
        let tol = 3.0 * sd / 1000f64.sqrt() + 0.002;
        let mean_ok = (row.stats.mean - mean).abs() <= tol;
        let sd_ok = (row.stats.sd - sd).abs() <= 0.2 * sd;
        if !(mean_ok && sd_ok) {
            bad.push(format!(
                "p={p} n={n}: mean {:.4} (reference {mean}), sd {:.4} (reference {sd})",
                row.stats.mean, row.stats.sd
            ));
        }
    }
    let cell = t.cell(0.5, 1000).unwrap().stats;
    let summary = format!(
        "{}/15 cells; p=0.5 n=1000 mean {:.4} sd {:.4}",
        15 - bad.len(),
        cell.mean,
        cell.sd
    );
    (bad.is_empty(), summary)
}

/// Underlying sequences without ties between distinct indices.
fn ac2() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    let processes = [
        ("iid", ProcessConfig::unit_iid()),
        ("armax", ProcessConfig::armax(0.5, 1.0).unwrap()),
    ];
    for (name, proc) in processes {
        for (i, &p) in [0.3, 0.5, 0.7].iter().enumerate() {
            for &t in &[2usize, 3, 4] {
                let model = ModelConfig::new(proc, t, p).unwrap();
                let n = 20_000 * t;
                let s = model.simulate(n, 100 + i as u64 * 10 + t as u64).unwrap();
                let f = stagnation_frequency(&s).unwrap();
                let q = (1.0 - p).powi(t as i32 - 1);
                let z = (f.frequency - q).abs() / (q * (1.0 - q) / f.blocks as f64).sqrt();
                worst = worst.max(z);
                if z > 3.0 || f.blocks < 10_000 {
                    bad.push(format!(
                        "{name} p={p} T={t}: freq {:.4} vs {q:.4} (z {z:.2})",
                        f.frequency
                    ));
                }
            }
        }
    }
    let mut detail = format!("iid and armax, 18 cells, m >= 10000, max |z| = {worst:.2}");
    if !bad.is_empty() {
        detail = format!("{detail}; {}", bad.join("; "));
    }
    outcome(bad.is_empty(), detail)
}

fn plugin_vs(model: &ModelConfig, target: f64, seed: u64) -> (bool, String) {
    let e = plugin_theta(model, THETA_N, THETA_TAU, model.period + 1, PLUGIN_REPS, seed).unwrap();
    let se = e.std_error.unwrap();
    let z = (e.value - target).abs() / se;
    (z <= 3.0, format!("plugin {:.4} (se {:.4}, z {z:.2})", e.value, se))
}

fn runs_vs(model: &ModelConfig, target: f64, seed: u64) -> (bool, String) {
    let e = runs_pooled(model, THETA_N, THETA_TAU, model.period + 1, RUNS_PATHS, seed).unwrap();
    ((e.value - target).abs() <= 0.05, format!("runs {:.4}", e.value))
}

fn ac3() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, &p) in [0.2, 0.5, 0.8].iter().enumerate() {
        let model = ModelConfig::new(ProcessConfig::moving_maxima(), 2, p).unwrap();
        let e = runs_pooled(&model, THETA_N, THETA_TAU, 3, RUNS_PATHS, 300 + i as u64).unwrap();
        let runs_ok = (0.45..=0.55).contains(&e.value);
        let (plug_ok, plug) = plugin_vs(&model, 0.5, 310 + i as u64);
        pass &= runs_ok && plug_ok;
        parts.push(format!("p={p}: runs {:.4}, {plug}", e.value));
    }
    outcome(pass, parts.join("; "))
}

fn ac4() -> Outcome {
    let armax = ProcessConfig::armax(0.5, 1.0).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (t, want) in [(2usize, 0.4375), (3, 0.39)] {
        let model = ModelConfig::new(armax, t, 0.5).unwrap();
        let closed = theta_y_closed_form(&ClosedFormRequest::for_model(&model)).unwrap();
        let closed_ok = (closed - want).abs() < 1e-12;
        let (plug_ok, plug) = plugin_vs(&model, closed, 400 + t as u64);
        let (runs_ok, runs) = runs_vs(&model, closed, 410 + t as u64);
        pass &= closed_ok && plug_ok && runs_ok;
        parts.push(format!("T={t}: closed {closed:.4}, {plug}, {runs}"));
    }
    outcome(pass, parts.join("; "))
}

fn ac5() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, &p) in [0.25, 0.5, 0.75].iter().enumerate() {
        let model = ModelConfig::new(ProcessConfig::unit_iid(), 3, p).unwrap();
        let closed = (1.0 + 2.0 * p) / (3.0 + p * (1.0 - p));
        let (ok, plug) = plugin_vs(&model, closed, 500 + i as u64);
        pass &= ok;
        parts.push(format!("p={p}: closed {closed:.4}, {plug}"));
    }
    outcome(pass, parts.join("; "))
}

fn ac6() -> Outcome {
    let model = ModelConfig::new(ProcessConfig::moving_maxima(), 2, 0.5).unwrap();
    let grid = vec![1_000, 10_000, 100_000];
    let c312 = condition_trace(&TraceRequest::new(Condition::C312, model, grid.clone(), 1_000_000, 61)).unwrap();
    let c36 = condition_trace(&TraceRequest::new(Condition::C36, model, grid, 1_000_000, 62)).unwrap();
    let v312 = trend_report(&c312);
    let v36 = trend_report(&c36);
    let last = *c312.estimates.last().unwrap();
    let near_tau = (last - c312.tau).abs() <= 0.15 * c312.tau;
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ");
    outcome(
        v312 == Verdict::NonVanishing && near_tau && v36 == Verdict::Vanishing,
        format!(
            "c312 [{}] {} (final within 15% of tau={}: {near_tau}); c36 [{}] {}",
            fmt(&c312.estimates),
            v312.name(),
            c312.tau,
            fmt(&c36.estimates),
            v36.name()
        ),
    )
}

fn ac7() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (proc, t, label) in [
        (ProcessConfig::moving_maxima(), 2usize, "mm T=2"),
        (ProcessConfig::unit_iid(), 3, "iid T=3"),
    ] {
        let model = ModelConfig::new(proc, t, 0.5).unwrap();
        let u = proc.marginal().quantile(0.95).unwrap();
        let c = lemma1b_check(&model, u, 200_000, 70 + t as u64).unwrap();
        pass &= c.studentized_gap <= 3.0;
        parts.push(format!(
            "{label}: lhs {:.5} rhs {:.5} gap {:.2}",
            c.lhs, c.rhs, c.studentized_gap
        ));
    }
    outcome(pass, parts.join("; "))
}

fn ac8() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, &p) in [0.3, 0.7].iter().enumerate() {
        let model = ModelConfig::new(ProcessConfig::unit_iid(), 3, p).unwrap();
        let c = marginal_check(&model, 2, 10_000, 80 + i as u64).unwrap();
        pass &= c.passes();
        parts.push(format!("p={p}: KS {:.4} (critical {:.4})", c.ks, c.critical_1pct));
    }
    outcome(pass, parts.join("; "))
}

fn ac9() -> Outcome {
    let tau = 1.0;
    let worst = (1..=99)
        .map(|k| {
            let p = k as f64 / 100.0;
            let theta = theta_from_limits(tau, tau, 0.5, p, 2, moving_maxima_p12(p, tau));
            (theta - 0.5).abs()
        })
        .fold(0.0, f64::max);
    outcome(worst <= 1e-12, format!("99 grid points, max |theta - 1/2| = {worst:.2e}"))
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

fn determinism_snapshot() -> String {
    let mut out = table1(&Table1Config::default()).unwrap().to_csv_string().unwrap();
    let mm = ModelConfig::new(ProcessConfig::moving_maxima(), 2, 0.5).unwrap();
    let armax = ModelConfig::new(ProcessConfig::armax(0.5, 1.0).unwrap(), 3, 0.5).unwrap();
    for (cond, model) in [
        (Condition::DtsLocal, armax),
        (Condition::D22Counter, mm),
        (Condition::C36, mm),
        (Condition::C312, mm),
    ] {
        let req = TraceRequest::new(cond, model, vec![1_000, 10_000, 100_000], 100_000, 90);
        out.push_str(&condition_trace(&req).unwrap().to_csv_string().unwrap());
    }
    let u = mm.process.marginal().quantile(0.95).unwrap();
    let c = lemma1b_check(&mm, u, 100_000, 91).unwrap();
    out.push_str(&serde_json::to_string(&c).unwrap());
    let s = mm.simulate(5_000, 92).unwrap();
    out.push_str(&serde_json::to_string(&estimate_p(&s).unwrap()).unwrap());
    out
}

fn ac10() -> Outcome {
    let reference = with_threads(1, determinism_snapshot);
    let mut pass = reference == with_threads(1, determinism_snapshot);
    for threads in [4, 8] {
        pass &= reference == with_threads(threads, determinism_snapshot);
    }
    outcome(pass, format!("{} bytes compared across 1, 1, 4, 8 threads", reference.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("p_hat table reproduction", ac1),
        ("stagnation frequency", ac2),
        ("moving maxima theta_Y = 1/2", ac3),
        ("ARMAX closed forms", ac4),
        ("i.i.d. T=3 closed form", ac5),
        ("condition counterexample", ac6),
        ("one-block identity", ac7),
        ("marginal law F_2", ac8),
        ("P_{1,2} self-check", ac9),
        ("determinism", ac10),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        failed += !o.pass as usize;
        println!(
            "AC{} {} {name} [{:.1}s]: {}",
            k + 1,
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
