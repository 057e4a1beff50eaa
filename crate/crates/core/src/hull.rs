//! Convex hull of the commitment cost function, convex hull prices, and
//! uplift payments.
//!
//! Nothing here builds the graph of `v^h` explicitly. The hull value at `y`
//! is the biconjugate `max_λ { λ y − v^c(λ) }`, where `v^c` comes in closed
//! form from the supplier best response. The maximand is concave with
//! derivative `y − supply(λ)`, so the maximizing prices are found by bisecting
//! on the sign of that derivative.

use crate::fleet::Fleet;
use crate::search::{bisect, snap_to_breakpoint, PRICE_TOL};
use crate::ucp::{self, UcpError};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HullError {
    #[error(transparent)]
    Ucp(#[from] UcpError),
    #[error("price ceiling {ceiling} too low: supply {supply} MW < demand {demand} MW")]
    CeilingTooLow {
        ceiling: f64,
        supply: f64,
        demand: f64,
    },
}

/// `v^h(y)` and the subdifferential `∂v^h(y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HullPoint {
    pub demand: f64,
    pub hull_value: f64,
    /// `[λ_lo, λ_hi]`, the convex hull prices at `demand`.
    pub price_interval: (f64, f64),
}

impl HullPoint {
    pub fn is_degenerate(&self) -> bool {
        self.price_interval.0 == self.price_interval.1
    }
}

/// A price at which every unit of the fleet runs flat out:
/// `max_τ (top segment cost + S_τ / smallest segment capacity) + 1`.
pub fn default_price_ceiling(fleet: &Fleet) -> f64 {
    fleet
        .types
        .iter()
        .map(|t| {
            let top = t
                .segments
                .iter()
                .map(|s| s.marginal_cost)
                .fold(0.0, f64::max);
            let smallest = t
                .segments
                .iter()
                .map(|s| s.capacity)
                .fold(f64::INFINITY, f64::min);
            top + t.startup_cost / smallest
        })
        .fold(0.0, f64::max)
        + 1.0
}

fn demand_tolerance(fleet: &Fleet) -> f64 {
    1e-9 * fleet.total_capacity().max(1.0)
}

/// Hull value and hull prices at `y`, searching prices in `[0, price_ceiling]`.
pub fn hull_value(fleet: &Fleet, y: f64, price_ceiling: f64) -> Result<HullPoint, HullError> {
    let y = ucp::check_demand(fleet, y)?;
    let tol = demand_tolerance(fleet);
    let supply = |price: f64| ucp::best_response(fleet, price).supply;

    let top_supply = supply(price_ceiling);
    if top_supply < y - tol {
        return Err(HullError::CeilingTooLow {
            ceiling: price_ceiling,
            supply: top_supply,
            demand: y,
        });
    }
    let breakpoints = ucp::supply_breakpoints(fleet);

    // λ_lo = inf { λ : supply(λ) ≥ y }
    let lo = if supply(0.0) >= y - tol {
        0.0
    } else {
        let bracket = bisect(0.0, price_ceiling, PRICE_TOL, |p| supply(p) >= y - tol);
        snap_to_breakpoint(bracket, &breakpoints)
    };
    // λ_hi = inf { λ : supply(λ) > y }
    let hi = if top_supply <= y + tol {
        price_ceiling
    } else if supply(lo) > y + tol {
        lo
    } else {
        let bracket = bisect(lo, price_ceiling, PRICE_TOL, |p| supply(p) > y + tol);
        snap_to_breakpoint(bracket, &breakpoints)
    };
    let hi = if hi - lo <= 2.0 * PRICE_TOL { lo } else { hi };

    let objective = |price: f64| price * y - ucp::conjugate(fleet, price);
    let hull_value = objective(lo).max(objective(hi));
    Ok(HullPoint {
        demand: y,
        hull_value,
        price_interval: (lo, hi),
    })
}

/// Convex hull price for a fixed demand: the midpoint of `∂v^h(y)`, or its
/// only element when the interval is a single price.
pub fn chp_fixed_demand(fleet: &Fleet, y: f64) -> Result<f64, HullError> {
    let point = hull_value(fleet, y, default_price_ceiling(fleet))?;
    let (lo, hi) = point.price_interval;
    Ok(0.5 * (lo + hi))
}

/// Uplift payment `Π(p; y) = v^c(p) − (p y − v(y))`: the profit the supplier
/// forgoes by serving `y` instead of its own best response at `p`.
pub fn uplift(fleet: &Fleet, price: f64, y: f64) -> Result<f64, UcpError> {
    let cost = ucp::ucp_value(fleet, y)?.total_cost;
    Ok(ucp::conjugate(fleet, price) - (price * y - cost))
}
