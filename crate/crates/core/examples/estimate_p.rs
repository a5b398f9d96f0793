//! Estimates the availability probability from one long path, under both
//! stagnation rules, and compares with the target `p`.
//!
//! `cargo run --release --example estimate_p -- [n] [p] [T]`

use imputed_extremes::{
    estimate_p_with, stagnation_frequency_with, theory, ModelConfig, ProcessConfig, Result,
    StagnationRule,
};

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(100_000, |a| a.parse().expect("n"));
    let p: f64 = args.next().map_or(0.5, |a| a.parse().expect("p"));
    let period: usize = args.next().map_or(2, |a| a.parse().expect("T"));

    for (name, process) in [
        ("iid", ProcessConfig::unit_iid()),
        ("moving maxima", ProcessConfig::moving_maxima()),
        ("armax t=0.5", ProcessConfig::armax(0.5, 1.0)?),
    ] {
        let series = ModelConfig::new(process, period, p)?.simulate(n, 1)?;
        for rule in [StagnationRule::ValueEquality, StagnationRule::ImputationFlags] {
            let est = estimate_p_with(&series, rule)?;
            let freq = stagnation_frequency_with(&series, rule)?;
            println!(
                "{name:>14} {:>16}: p_hat = {:.4} (stagnant blocks {:.4} +- {:.4}, target {:.4})",
                rule.name(),
                est.p_hat,
                freq.frequency,
                freq.std_error,
                theory::stagnation_probability(p, period),
            );
        }
    }
    println!(
        "moving maxima equality-rule stagnation probability: {:.4}",
        theory::moving_maxima_stagnation_probability(p, period)
    );
    Ok(())
}
