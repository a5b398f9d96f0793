//! Closed-form, plug-in and runs extremal indices of `Y` for the worked
//! examples.
//!
//! `cargo run --release --example theta_compare -- [plugin_reps] [paths]`

use imputed_extremes::montecarlo::{theta_compare, ThetaOptions};
use imputed_extremes::{ModelConfig, ProcessConfig, Result};

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let plugin_reps: usize = args.next().map_or(200_000, |a| a.parse().expect("plugin_reps"));
    let runs_paths: usize = args.next().map_or(20, |a| a.parse().expect("paths"));
    let opts = ThetaOptions {
        plugin_reps,
        runs_paths,
        ..ThetaOptions::default()
    };

    let models = [
        ("moving maxima T=2", ModelConfig::new(ProcessConfig::moving_maxima(), 2, 0.5)?),
        ("armax t=0.5 T=2", ModelConfig::new(ProcessConfig::armax(0.5, 1.0)?, 2, 0.5)?),
        ("armax t=0.5 T=3", ModelConfig::new(ProcessConfig::armax(0.5, 1.0)?, 3, 0.5)?),
        ("iid T=3", ModelConfig::new(ProcessConfig::unit_iid(), 3, 0.5)?),
    ];
    println!("{:>18} {:>8} {:>16} {:>16}", "model", "closed", "plugin", "runs");
    for (name, model) in models {
        let r = theta_compare(&model, 20.0, 200_000, &opts)?;
        let fmt = |e: &Option<imputed_extremes::ThetaEstimate>| match e {
            Some(e) => format!("{:.4} ({:.4})", e.value, e.std_error.unwrap_or(f64::NAN)),
            None => "-".into(),
        };
        println!(
            "{name:>18} {:>8} {:>16} {:>16}",
            r.closed_form.map_or("-".into(), |v| format!("{v:.4}")),
            fmt(&r.plugin),
            fmt(&r.runs)
        );
    }
    Ok(())
}
