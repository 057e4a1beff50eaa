//! Convex hull pricing for electricity markets whose generators carry
//! startup costs and minimum outputs.
//!
//! The crate evaluates the exact unit-commitment cost `v(y)` of a small
//! fleet, its convex conjugate and convex hull, and the uplift payment any
//! price leaves the supplier. On top of that it runs a day-ahead market in
//! which an operator posts hourly prices, consumers and the supplier
//! best-respond, and the price moves along the subgradient
//! `supply − demand` of the dual function. Baselines are the marginal price
//! of a quadratic cost fit (LMP) and the marginal price of the continuous
//! commitment relaxation (dispatchable pricing).
//!
//! Modules, bottom up:
//!
//! - [`fleet`]: generator types, the two built-in fixtures, JSON loading
//! - [`ucp`]: `v(y)`, best responses, `v^c`, relaxed/no-startup/quadratic costs
//! - [`hull`]: `v^h`, hull prices at fixed demand, uplift
//! - [`market`]: demand function, utility, profiles, noise
//! - [`pricing`]: dual function, subgradient iteration, exact and baseline prices
//! - [`welfare`]: hourly settlement and daily summaries
//! - [`experiment`]: 24-hour runs and CSV outputs
//!
//! ```
//! use chp_market::fleet::{builtin_fleet, BuiltinFleet};
//! use chp_market::hull;
//!
//! let fleet = builtin_fleet(BuiltinFleet::Scarf);
//! let price = hull::chp_fixed_demand(&fleet, 96.6).unwrap();
//! assert_eq!(price, 6.3125);
//! let uplift = hull::uplift(&fleet, price, 96.6).unwrap();
//! assert!((uplift - 2.35).abs() < 1e-9);
//! ```

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod experiment;
pub mod fleet;
pub mod hull;
pub mod market;
pub mod pricing;
pub mod search;
pub mod ucp;
pub mod welfare;

pub use fleet::{builtin_fleet, BuiltinFleet, CostSegment, Fleet, GeneratorType};
pub use market::{DayProfile, DemandModel};
pub use pricing::{HourMarket, Method, PricingTrace, StepRule};
