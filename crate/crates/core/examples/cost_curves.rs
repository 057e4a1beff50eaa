//! Tabulates the commitment cost next to its relaxed, startup-free,
//! quadratic and convex-hull counterparts, and optionally writes curves.csv.
//!
//!     cargo run --release --example cost_curves [gribik|scarf] [out_dir]

use chp_market::experiment::{cost_curves, cost_curves_csv, paper_demand_model};
use chp_market::fleet::{builtin_fleet, BuiltinFleet};
use chp_market::market::DayProfile;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let preset: BuiltinFleet = args.next().as_deref().unwrap_or("gribik").parse()?;
    let out = args.next();

    let fleet = builtin_fleet(preset);
    let step = fleet.total_capacity() / 20.0;
    let rows = cost_curves(
        &fleet,
        &paper_demand_model(preset),
        &DayProfile::default_synthetic(),
        step,
    )?;

    println!(
        "{:>7} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "y", "v", "relaxed", "no-start", "quadratic", "hull"
    );
    for r in &rows {
        let free = r.v_no_startup.map_or("-".into(), |v| format!("{v:.1}"));
        println!(
            "{:>7.1} {:>10.1} {:>10.1} {:>10} {:>10.1} {:>10.1}",
            r.y, r.v, r.v_relaxed, free, r.v_quadratic, r.v_hull
        );
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(&dir)?;
        let path = std::path::Path::new(&dir).join("curves.csv");
        std::fs::write(&path, cost_curves_csv(&rows))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
