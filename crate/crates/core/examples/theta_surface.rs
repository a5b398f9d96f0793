//! Closed-form extremal index of the ARMAX model with `T = 3` as a surface
//! over `(theta_X, p)`, written as CSV.
//!
//! `cargo run --example theta_surface -- [points] [out.csv]`

use imputed_extremes::montecarlo::{theta_surface, unit_grid};
use imputed_extremes::Result;

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let points: usize = args.next().map_or(11, |a| a.parse().expect("points"));
    let surface = theta_surface(&unit_grid(points, 0.0), &unit_grid(points, 0.001))?;
    match args.next() {
        Some(path) => {
            surface.write_csv(std::fs::File::create(&path)?)?;
            println!("wrote {path}");
        }
        None => surface.write_csv(std::io::stdout().lock())?,
    }
    Ok(())
}
