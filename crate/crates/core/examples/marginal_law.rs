//! Compares the simulated law of `Y_{T+j}` with its closed form by a
//! one-sample Kolmogorov-Smirnov distance.
//!
//! `cargo run --release --example marginal_law -- [samples]`

use imputed_extremes::montecarlo::marginal_check;
use imputed_extremes::{ModelConfig, ProcessConfig, Result};

fn main() -> Result<()> {
    let samples: usize = std::env::args()
        .nth(1)
        .map_or(10_000, |a| a.parse().expect("samples"));
    for (name, process) in [
        ("iid", ProcessConfig::unit_iid()),
        ("moving maxima", ProcessConfig::moving_maxima()),
        ("armax t=0.5", ProcessConfig::armax(0.5, 1.0)?),
    ] {
        let model = ModelConfig::new(process, 4, 0.4)?;
        for j in 1..4 {
            let c = marginal_check(&model, j, samples, 42)?;
            println!(
                "{name:>14} j={j}: ks {:.4} (1% critical {:.4}) {}",
                c.ks,
                c.critical_1pct,
                if c.passes() { "ok" } else { "REJECT" }
            );
        }
    }
    Ok(())
}
