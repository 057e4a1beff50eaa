//! Settlement accounting for an hour and a day.
//!
//! Supply cost is `v` at the realized demand: the supplier must serve what
//! consumers take at the posted price. Gross utility includes the constant
//! `C` of `U_t`, so welfare levels are only comparable across runs that share
//! the same demand model.

use crate::fleet::Fleet;
use crate::hull;
use crate::market::{self, DayProfile, DemandModel, MarketError, HOURS};
use crate::ucp;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WelfareError {
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error("expected {HOURS} hourly results, got {0}")]
    WrongCount(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SettlementStatus {
    Ok,
    /// Demand exceeded fleet capacity; cost-dependent fields are NaN.
    Infeasible,
    /// The pricing method produced no price for this hour.
    NoPrice,
}

impl SettlementStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SettlementStatus::Ok => "ok",
            SettlementStatus::Infeasible => "infeasible",
            SettlementStatus::NoPrice => "no-price",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HourResult {
    pub t: usize,
    pub price: f64,
    pub demand: f64,
    pub supply_cost: f64,
    pub uplift: f64,
    pub consumer_utility_gross: f64,
    pub consumer_utility_net: f64,
    pub supplier_profit: f64,
    pub social_welfare: f64,
    pub status: SettlementStatus,
}

impl HourResult {
    /// Books an hour at a given price, demand, and gross utility.
    pub fn at_demand(fleet: &Fleet, t: usize, price: f64, demand: f64, utility_gross: f64) -> Self {
        let revenue = price * demand;
        match ucp::ucp_value(fleet, demand) {
            Ok(dispatch) => {
                let cost = dispatch.total_cost;
                let uplift = ucp::conjugate(fleet, price) - (revenue - cost);
                HourResult {
                    t,
                    price,
                    demand,
                    supply_cost: cost,
                    uplift,
                    consumer_utility_gross: utility_gross,
                    consumer_utility_net: utility_gross - revenue,
                    supplier_profit: revenue - cost,
                    social_welfare: utility_gross - cost,
                    status: SettlementStatus::Ok,
                }
            }
            Err(_) => HourResult {
                t,
                price,
                demand,
                supply_cost: f64::NAN,
                uplift: f64::NAN,
                consumer_utility_gross: utility_gross,
                consumer_utility_net: utility_gross - revenue,
                supplier_profit: f64::NAN,
                social_welfare: f64::NAN,
                status: SettlementStatus::Infeasible,
            },
        }
    }

    /// Placeholder row for an hour the pricing method could not clear.
    pub fn unpriced(t: usize) -> Self {
        HourResult {
            t,
            price: f64::NAN,
            demand: f64::NAN,
            supply_cost: f64::NAN,
            uplift: f64::NAN,
            consumer_utility_gross: f64::NAN,
            consumer_utility_net: f64::NAN,
            supplier_profit: f64::NAN,
            social_welfare: f64::NAN,
            status: SettlementStatus::NoPrice,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.status == SettlementStatus::Ok
    }
}

/// Settles hour `t` at `price`: consumers take `D_t(price)` and the
/// supplier serves it at cost `v(D_t(price))`.
pub fn settle_hour(
    fleet: &Fleet,
    model: &DemandModel,
    profile: &DayProfile,
    t: usize,
    price: f64,
) -> Result<HourResult, WelfareError> {
    let demand = market::hourly_demand(model, profile, t, price)?;
    let utility = if model.mu2 > 0.0 {
        market::hourly_utility(model, profile, t, demand)?
    } else {
        model.utility_constant
    };
    Ok(HourResult::at_demand(fleet, t, price, demand, utility))
}

/// Cross-check the uplift column with the hull module's definition.
pub fn uplift_matches_hull(fleet: &Fleet, result: &HourResult) -> bool {
    match hull::uplift(fleet, result.price, result.demand) {
        Ok(u) => (u - result.uplift).abs() <= 1e-9 * fleet.cost_scale(),
        Err(_) => !result.is_feasible(),
    }
}

/// Daily price statistics and totals. Price statistics cover priced hours;
/// totals cover feasible hours only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DaySummary {
    pub price_min: f64,
    pub price_mean: f64,
    pub price_max: f64,
    pub total_demand: f64,
    pub total_cost: f64,
    pub total_uplift: f64,
    pub total_utility_gross: f64,
    pub total_utility_net: f64,
    pub total_profit: f64,
    pub total_welfare: f64,
    pub infeasible_hours: usize,
}

pub fn summarize_day(results: &[HourResult]) -> Result<DaySummary, WelfareError> {
    if results.len() != HOURS {
        return Err(WelfareError::WrongCount(results.len()));
    }
    let prices = results.iter().map(|r| r.price).filter(|p| p.is_finite());
    let priced = prices.clone().count();
    let price_min = prices.clone().fold(f64::INFINITY, f64::min);
    let price_max = prices.clone().fold(f64::NEG_INFINITY, f64::max);
    let price_mean = prices.sum::<f64>() / priced as f64;
    let feasible = || results.iter().filter(|r| r.is_feasible());
    let total = |f: fn(&HourResult) -> f64| feasible().map(f).sum::<f64>();
    Ok(DaySummary {
        price_min,
        price_mean,
        price_max,
        total_demand: total(|r| r.demand),
        total_cost: total(|r| r.supply_cost),
        total_uplift: total(|r| r.uplift),
        total_utility_gross: total(|r| r.consumer_utility_gross),
        total_utility_net: total(|r| r.consumer_utility_net),
        total_profit: total(|r| r.supplier_profit),
        total_welfare: total(|r| r.social_welfare),
        infeasible_hours: results.len() - feasible().count(),
    })
}
