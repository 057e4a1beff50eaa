//! Convex hull prices at fixed demands, with the uplift each leaves and the
//! uplift of nearby prices for comparison.
//!
//!     cargo run --example hull_prices [gribik|scarf] [demand ...]

use chp_market::fleet::{builtin_fleet, BuiltinFleet};
use chp_market::hull::{self, default_price_ceiling};
use chp_market::ucp;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let preset: BuiltinFleet = args.next().as_deref().unwrap_or("gribik").parse()?;
    let fleet = builtin_fleet(preset);
    let mut demands: Vec<f64> = args.map(|a| a.parse()).collect::<Result<_, _>>()?;
    if demands.is_empty() {
        let cap = fleet.total_capacity();
        demands = (1..=8).map(|i| cap * i as f64 / 9.0).collect();
    }

    let ceiling = default_price_ceiling(&fleet);
    for y in demands {
        let point = hull::hull_value(&fleet, y, ceiling)?;
        let v = ucp::ucp_value(&fleet, y)?.total_cost;
        let (lo, hi) = point.price_interval;
        let chp = hull::chp_fixed_demand(&fleet, y)?;
        let u = hull::uplift(&fleet, chp, y)?;
        println!(
            "y {y:>7.2}  v {v:>10.2}  v^h {:>10.2}  prices [{lo:.4}, {hi:.4}]  chp {chp:.4}  uplift {u:.3}",
            point.hull_value
        );
        // any other price leaves at least as much uplift
        for p in [chp * 0.9, chp * 1.1] {
            println!(
                "      at {p:>9.4}: uplift {:.3}",
                hull::uplift(&fleet, p, y)?
            );
        }
    }
    Ok(())
}
