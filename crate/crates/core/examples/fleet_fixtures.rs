//! Prints the built-in fleets, their JSON form, and the commitment cost at a
//! few demands.
//!
//!     cargo run --example fleet_fixtures [path/to/fleet.json]

use chp_market::fleet::{builtin_fleet, load_fleet, BuiltinFleet, Fleet};
use chp_market::ucp;

fn show(label: &str, fleet: &Fleet) -> Result<(), Box<dyn std::error::Error>> {
    println!(
        "== {label}: {} MW in {} units",
        fleet.total_capacity(),
        fleet.unit_total()
    );
    for t in &fleet.types {
        let segs: Vec<String> = t
            .segments
            .iter()
            .map(|s| format!("{} MW @ {}", s.capacity, s.marginal_cost))
            .collect();
        println!(
            "  {:<11} x{}  startup {:>6}  min {:>3} MW  [{}]",
            t.name,
            t.unit_count,
            t.startup_cost,
            t.min_output,
            segs.join(", ")
        );
    }
    for frac in [0.1, 0.25, 0.5, 0.75, 1.0] {
        let y = frac * fleet.total_capacity();
        let d = ucp::ucp_value(fleet, y)?;
        println!(
            "  v({y:>6.1}) = {:>10.2}   units on {:?}",
            d.total_cost, d.commitment.counts
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    if let Some(path) = std::env::args().nth(1) {
        let fleet = load_fleet(&std::fs::read_to_string(&path)?)?;
        return show(&path, &fleet);
    }
    for preset in [BuiltinFleet::Gribik, BuiltinFleet::Scarf] {
        show(preset.name(), &builtin_fleet(preset))?;
    }
    println!("\n{}", builtin_fleet(BuiltinFleet::Scarf).to_json());
    Ok(())
}
