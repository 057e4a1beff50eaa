//! Runs one day under every pricing method on both built-in fleets and
//! prints the daily totals side by side.
//!
//!     cargo run --release --example day_ahead_comparison [seed]

use chp_market::experiment::{simulate_day, ExperimentConfig};
use chp_market::fleet::BuiltinFleet;
use chp_market::pricing::Method;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(0);
    let methods = [
        Method::ChpSubgradient,
        Method::ChpExact,
        Method::Lmp,
        Method::Dispatchable,
    ];

    for preset in [BuiltinFleet::Gribik, BuiltinFleet::Scarf] {
        println!("== {} (seed {seed})", preset.name());
        println!(
            "{:<16} {:>9} {:>9} {:>9} {:>12} {:>10} {:>12} {:>14}",
            "method", "p_min", "p_mean", "p_max", "demand", "uplift", "profit", "welfare"
        );
        for method in methods {
            let mut config = ExperimentConfig::paper_defaults(preset, method);
            config.seed = seed;
            config.jobs = 4;
            let s = simulate_day(&config)?.summary;
            println!(
                "{:<16} {:>9.4} {:>9.4} {:>9.4} {:>12.3} {:>10.3} {:>12.3} {:>14.3}",
                method.as_str(),
                s.price_min,
                s.price_mean,
                s.price_max,
                s.total_demand,
                s.total_uplift,
                s.total_profit,
                s.total_welfare
            );
        }
        println!();
    }
    Ok(())
}
