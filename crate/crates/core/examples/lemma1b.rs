//! Checks the identity `P(Y_T > u, max Y_{T+1..2T} <= u) = p^(T-1) P(X_T > u,
//! max X_{T+1..2T} <= u)` by coupled Monte Carlo at a high quantile.
//!
//! `cargo run --release --example lemma1b -- [reps]`

use imputed_extremes::diagnostics::lemma1b_check;
use imputed_extremes::{ModelConfig, ProcessConfig, Result};

fn main() -> Result<()> {
    let reps: usize = std::env::args()
        .nth(1)
        .map_or(200_000, |a| a.parse().expect("reps"));
    for (name, process) in [
        ("iid", ProcessConfig::unit_iid()),
        ("moving maxima", ProcessConfig::moving_maxima()),
        ("armax t=0.5", ProcessConfig::armax(0.5, 1.0)?),
    ] {
        for period in [2, 3] {
            let model = ModelConfig::new(process, period, 0.5)?;
            let u = process.marginal().quantile(0.95)?;
            let c = lemma1b_check(&model, u, reps, 42)?;
            println!(
                "{name:>14} T={period}: lhs {:.5} rhs {:.5} gap/se {:.2}",
                c.lhs, c.rhs, c.studentized_gap
            );
        }
    }
    Ok(())
}
