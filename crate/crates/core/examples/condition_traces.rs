//! Traces the anti-clustering sums along an `n` grid and classifies each
//! trend as vanishing, non-vanishing or inconclusive.
//!
//! `cargo run --release --example condition_traces -- [reps]`

use imputed_extremes::diagnostics::{condition_trace, trend_report, Condition, TraceRequest};
use imputed_extremes::{ModelConfig, ProcessConfig, Result};

fn main() -> Result<()> {
    let reps: usize = std::env::args()
        .nth(1)
        .map_or(200_000, |a| a.parse().expect("reps"));
    let grid = vec![1_000, 10_000, 100_000];
    let mm = ModelConfig::new(ProcessConfig::moving_maxima(), 2, 0.5)?;
    let armax = ModelConfig::new(ProcessConfig::armax(0.5, 1.0)?, 2, 0.5)?;

    let cases = [
        (Condition::DtsLocal, armax),
        (Condition::C36, mm),
        (Condition::C312, mm),
        (Condition::D22Counter, mm),
    ];
    for (condition, model) in cases {
        let trace = condition_trace(&TraceRequest::new(condition, model, grid.clone(), reps, 42))?;
        let values: Vec<String> = trace
            .estimates
            .iter()
            .zip(&trace.std_errors)
            .map(|(e, s)| format!("{e:.4}+-{s:.4}"))
            .collect();
        println!(
            "{:>12} {:>14}: [{}] -> {}",
            condition.name(),
            model.process.kind.name(),
            values.join(", "),
            trend_report(&trace).name()
        );
    }
    Ok(())
}
