//! Traces the subgradient price iteration for one hour and compares each
//! iterate's uplift with the uplift at the exact dual price.
//!
//!     cargo run --release --example subgradient_pricing [gribik|scarf] [d1]

use chp_market::experiment::{paper_demand_model, paper_initial_price, paper_step_rule};
use chp_market::fleet::{builtin_fleet, BuiltinFleet};
use chp_market::hull;
use chp_market::market::DayProfile;
use chp_market::pricing::HourMarket;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let preset: BuiltinFleet = args.next().as_deref().unwrap_or("gribik").parse()?;
    let d1: f64 = args
        .next()
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(41086.7);

    let fleet = builtin_fleet(preset);
    let model = paper_demand_model(preset);
    let profile = DayProfile::constant(d1)?;
    let hour = HourMarket::new(&fleet, &model, &profile, 0)?;

    let exact = hour.exact_dual()?;
    let exact_uplift = hull::uplift(&fleet, exact.price, exact.demand)?;
    println!(
        "exact dual: price {:.6}  demand {:.4}  uplift {:.4}",
        exact.price, exact.demand, exact_uplift
    );

    let trace = hour.run_subgradient(paper_initial_price(preset), 100, paper_step_rule(preset))?;
    println!(
        "{:>4} {:>12} {:>10} {:>8} {:>12}",
        "k", "price", "demand", "supply", "uplift"
    );
    for r in trace.records.iter().filter(|r| r.k <= 10 || r.k % 10 == 0) {
        let uplift = r.uplift.map_or("-".to_string(), |u| format!("{u:.4}"));
        println!(
            "{:>4} {:>12.6} {:>10.4} {:>8.2} {:>12}",
            r.k, r.price, r.demand, r.supply, uplift
        );
    }
    Ok(())
}
