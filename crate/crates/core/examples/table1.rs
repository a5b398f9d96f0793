//! Bias, standard deviation and RMSE of `p_hat` over the default grid of
//! availability probabilities and sample sizes.
//!
//! `cargo run --release --example table1 -- [reps] [flags|equality]`

use imputed_extremes::montecarlo::{table1, Table1Config};
use imputed_extremes::{Result, StagnationRule};

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let reps: usize = args.next().map_or(1000, |a| a.parse().expect("reps"));
    let rule = match args.next() {
        Some(r) => StagnationRule::parse(&r)?,
        None => StagnationRule::ValueEquality,
    };
    let config = Table1Config {
        reps,
        rule,
        ..Table1Config::default()
    };
    let table = table1(&config)?;
    println!("{:>5} {:>6} {:>9} {:>8} {:>8}", "p", "n", "bias", "sd", "rmse");
    for row in &table.rows {
        println!(
            "{:>5} {:>6} {:>9.4} {:>8.4} {:>8.4}",
            row.p, row.n, row.stats.bias, row.stats.sd, row.stats.rmse
        );
    }
    Ok(())
}
