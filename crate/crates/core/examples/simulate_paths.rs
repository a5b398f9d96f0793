//! Simulates the three underlying processes with periodic controls and
//! prints the first few rows of each `X`, `U`, `Y` triple.
//!
//! `cargo run --example simulate_paths -- [n] [p]`

use imputed_extremes::{ModelConfig, ProcessConfig, Result};

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(12, |a| a.parse().expect("n"));
    let p: f64 = args.next().map_or(0.5, |a| a.parse().expect("p"));

    let processes = [
        ("iid", ProcessConfig::unit_iid()),
        ("moving maxima", ProcessConfig::moving_maxima()),
        ("armax t=0.5", ProcessConfig::armax(0.5, 1.0)?),
    ];
    for (name, process) in processes {
        let model = ModelConfig::new(process, 3, p)?;
        let series = model.simulate(n, 7)?;
        println!("{name}: {} of {n} values imputed", series.imputed_count());
        println!("{:>4} {:>10} {:>2} {:>10}", "k", "x", "u", "y");
        for k in 1..=n.min(12) {
            println!(
                "{k:>4} {:>10.4} {:>2} {:>10.4}{}",
                series.x.values[k],
                u8::from(series.mask.u[k]),
                series.y(k),
                if series.imputed(k) { "  *" } else { "" }
            );
        }
        println!();
    }
    Ok(())
}
