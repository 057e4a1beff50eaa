//! Fixed-demand uplift under convex hull prices and under dispatchable
//! prices across the whole capacity range.
//!
//!     cargo run --release --example uplift_comparison [gribik|scarf] [step_mw]

use chp_market::experiment::{uplift_curve, PriceRule};
use chp_market::fleet::{builtin_fleet, BuiltinFleet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let preset: BuiltinFleet = args.next().as_deref().unwrap_or("gribik").parse()?;
    let fleet = builtin_fleet(preset);
    let step: f64 = args
        .next()
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(fleet.total_capacity() / 24.0);

    let chp = uplift_curve(&fleet, PriceRule::Chp, step)?;
    let disp = uplift_curve(&fleet, PriceRule::Dispatchable, step)?;
    println!(
        "{:>8} {:>9} {:>10} {:>9} {:>10}",
        "y", "chp", "uplift", "disp", "uplift"
    );
    let (mut total_chp, mut total_disp) = (0.0, 0.0);
    for (c, d) in chp.iter().zip(&disp) {
        println!(
            "{:>8.2} {:>9.4} {:>10.3} {:>9.4} {:>10.3}",
            c.y, c.price, c.uplift, d.price, d.uplift
        );
        total_chp += c.uplift;
        total_disp += d.uplift;
    }
    println!("sum of uplift: chp {total_chp:.2}, dispatchable {total_disp:.2}");
    Ok(())
}
