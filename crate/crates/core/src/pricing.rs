//! Price formation for one market hour.
//!
//! The dual function `φ(λ)` adds the consumer's best-response surplus to the
//! supplier's maximal profit `v^c(λ)`. It is convex, and `supply(λ) − D_t(λ)`
//! is a subgradient, so:
//!
//! * [`HourMarket::run_subgradient`] iterates `λ ← λ − γ_k (supply − demand)`
//!   for a fixed number of rounds;
//! * [`HourMarket::exact_dual`] bisects on the sign of the subgradient, which
//!   is nondecreasing in `λ`;
//! * [`HourMarket::run_lmp`] runs the same iteration against a smooth convex
//!   cost (the marginal-cost baseline);
//! * [`HourMarket::dispatchable_equilibrium`] clears against the relaxed
//!   commitment cost.

use crate::fleet::Fleet;
use crate::hull::{default_price_ceiling, HullError};
use crate::market::{self, DayProfile, DemandModel, MarketError};
use crate::search::{bisect, snap_to_breakpoint, PRICE_TOL};
use crate::ucp::{self, QuadraticCost, UcpError};
use serde::{Deserialize, Serialize};
use std::time::Instant;
use thiserror::Error;

/// Lowest price any iterative method may post, $/MWh.
pub const PRICE_FLOOR: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum PricingError {
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Ucp(#[from] UcpError),
    #[error(transparent)]
    Hull(#[from] HullError),
    #[error("price {0} $/MWh below the floor {PRICE_FLOOR}")]
    BelowFloor(f64),
    #[error("iteration count must be at least 1")]
    NoIterations,
    #[error("supply never meets demand for prices up to {ceiling} $/MWh (demand {demand} MW, supply {supply} MW)")]
    NoCrossing {
        ceiling: f64,
        demand: f64,
        supply: f64,
    },
}

/// Diminishing or constant step sizes `γ_k`, `k = 1, 2, ...`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StepRule {
    /// `γ_k = c / k`
    Harmonic(f64),
    /// `γ_k = c`
    Constant(f64),
}

impl StepRule {
    pub fn step(&self, k: usize) -> f64 {
        match *self {
            StepRule::Harmonic(c) => c / k as f64,
            StepRule::Constant(c) => c,
        }
    }
}

/// Which pricing method produced a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ChpSubgradient,
    ChpExact,
    Lmp,
    Dispatchable,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ChpSubgradient => "chp-subgradient",
            Method::ChpExact => "chp-exact",
            Method::Lmp => "lmp",
            Method::Dispatchable => "dispatchable",
        }
    }

    pub fn is_iterative(self) -> bool {
        matches!(self, Method::ChpSubgradient | Method::Lmp)
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('_', "-").as_str() {
            "chp-subgradient" => Ok(Method::ChpSubgradient),
            "chp-exact" => Ok(Method::ChpExact),
            "lmp" => Ok(Method::Lmp),
            "dispatchable" => Ok(Method::Dispatchable),
            other => Err(format!("unknown pricing method `{other}`")),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One posted price and the market's reaction to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterateRecord {
    pub k: usize,
    pub price: f64,
    pub demand: f64,
    pub supply: f64,
    /// Step size that produced this price (0 for non-iterative methods).
    pub step: f64,
    pub dual_value: f64,
    /// Uplift under the true commitment cost; `None` if demand exceeds capacity.
    pub uplift: Option<f64>,
    /// Wall-clock seconds since the run started.
    pub elapsed_secs: f64,
}

impl IterateRecord {
    pub fn subgradient(&self) -> f64 {
        self.supply - self.demand
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricingTrace {
    pub method: Method,
    pub records: Vec<IterateRecord>,
    pub final_price: f64,
    pub final_demand: f64,
}

/// `φ(λ)` with its subgradient and the responses behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualValue {
    pub value: f64,
    pub subgradient: f64,
    pub supply: f64,
    pub demand: f64,
}

/// Crossing price and demand of the exact dual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub price: f64,
    pub demand: f64,
}

/// Dispatchable price: right-derivative of the relaxed fleet cost at `y`.
pub fn dispatchable_price(fleet: &Fleet, y: f64) -> Result<f64, UcpError> {
    ucp::relaxed_value(fleet, y).map(|r| r.marginal_price)
}

/// A fleet facing one hour of the demand model.
#[derive(Debug, Clone, Copy)]
pub struct HourMarket<'a> {
    pub fleet: &'a Fleet,
    pub model: &'a DemandModel,
    pub profile: &'a DayProfile,
    pub t: usize,
}

impl<'a> HourMarket<'a> {
    pub fn new(
        fleet: &'a Fleet,
        model: &'a DemandModel,
        profile: &'a DayProfile,
        t: usize,
    ) -> Result<Self, PricingError> {
        profile.floor(model, t)?;
        Ok(Self {
            fleet,
            model,
            profile,
            t,
        })
    }

    pub fn demand(&self, price: f64) -> Result<f64, MarketError> {
        market::hourly_demand(self.model, self.profile, self.t, price)
    }

    /// `max_D U_t(D) − λ D`, evaluated at `D = D_t(λ)`. With no elastic part
    /// the utility is the constant `C`.
    pub fn consumer_surplus(&self, price: f64) -> Result<f64, MarketError> {
        let demand = self.demand(price)?;
        let utility = if self.model.mu2 > 0.0 {
            market::hourly_utility(self.model, self.profile, self.t, demand)?
        } else {
            self.model.utility_constant
        };
        Ok(utility - price * demand)
    }

    fn check_price(price: f64) -> Result<(), PricingError> {
        if !(price >= PRICE_FLOOR) {
            return Err(PricingError::BelowFloor(price));
        }
        Ok(())
    }

    pub fn dual_value(&self, price: f64) -> Result<DualValue, PricingError> {
        Self::check_price(price)?;
        let demand = self.demand(price)?;
        let response = ucp::best_response(self.fleet, price);
        let value = self.consumer_surplus(price)? + response.profit;
        Ok(DualValue {
            value,
            subgradient: response.supply - demand,
            supply: response.supply,
            demand,
        })
    }

    fn uplift_at(&self, price: f64, demand: f64) -> Option<f64> {
        crate::hull::uplift(self.fleet, price, demand).ok()
    }

    /// Iterates `λ_k = max(floor, λ_{k−1} − γ_k (supply(λ_{k−1}) − D_t(λ_{k−1})))`
    /// for `k = 1..=iterations` and records the market's response at each
    /// `λ_k`. The accepted price is `λ_N`.
    pub fn run_subgradient(
        &self,
        initial_price: f64,
        iterations: usize,
        rule: StepRule,
    ) -> Result<PricingTrace, PricingError> {
        self.iterate(
            Method::ChpSubgradient,
            initial_price,
            iterations,
            rule,
            |p| self.dual_value(p),
        )
    }

    /// The same iteration as [`run_subgradient`](Self::run_subgradient) with
    /// the supplier replaced by a quadratic cost on `[0, capacity]`. Uplift is
    /// still measured against the true commitment cost.
    pub fn run_lmp(
        &self,
        quad: &QuadraticCost,
        initial_price: f64,
        iterations: usize,
        rule: StepRule,
    ) -> Result<PricingTrace, PricingError> {
        self.iterate(Method::Lmp, initial_price, iterations, rule, |p| {
            self.quadratic_dual_value(quad, p)
        })
    }

    /// Dual function of the smooth convex-cost market.
    pub fn quadratic_dual_value(
        &self,
        quad: &QuadraticCost,
        price: f64,
    ) -> Result<DualValue, PricingError> {
        Self::check_price(price)?;
        let cap = self.fleet.total_capacity();
        let demand = self.demand(price)?;
        let supply = quad.supply(price, cap);
        Ok(DualValue {
            value: self.consumer_surplus(price)? + quad.conjugate(price, cap),
            subgradient: supply - demand,
            supply,
            demand,
        })
    }

    fn iterate<F>(
        &self,
        method: Method,
        initial_price: f64,
        iterations: usize,
        rule: StepRule,
        mut evaluate: F,
    ) -> Result<PricingTrace, PricingError>
    where
        F: FnMut(f64) -> Result<DualValue, PricingError>,
    {
        Self::check_price(initial_price)?;
        if iterations == 0 {
            return Err(PricingError::NoIterations);
        }
        let start = Instant::now();
        let mut price = initial_price;
        let mut current = evaluate(price)?;
        let mut records = Vec::with_capacity(iterations);
        for k in 1..=iterations {
            let step = rule.step(k);
            price = (price - step * current.subgradient).max(PRICE_FLOOR);
            current = evaluate(price)?;
            records.push(IterateRecord {
                k,
                price,
                demand: current.demand,
                supply: current.supply,
                step,
                dual_value: current.value,
                uplift: self.uplift_at(price, current.demand),
                elapsed_secs: start.elapsed().as_secs_f64(),
            });
        }
        Ok(PricingTrace {
            method,
            records,
            final_price: price,
            final_demand: current.demand,
        })
    }

    /// Bisects `[floor, ceiling]` for the least price at which `supply`
    /// covers demand, then snaps to a supply breakpoint inside the final
    /// bracket when there is one.
    fn crossing<S>(
        &self,
        ceiling: f64,
        breakpoints: &[f64],
        supply: S,
    ) -> Result<Equilibrium, PricingError>
    where
        S: Fn(f64) -> f64,
    {
        let covered = |p: f64| -> Result<bool, MarketError> { Ok(supply(p) >= self.demand(p)?) };
        let price = if covered(PRICE_FLOOR)? {
            PRICE_FLOOR
        } else {
            if !covered(ceiling)? {
                return Err(PricingError::NoCrossing {
                    ceiling,
                    demand: self.demand(ceiling)?,
                    supply: supply(ceiling),
                });
            }
            // demand is positive for every positive price, so errors cannot occur
            let bracket = bisect(PRICE_FLOOR, ceiling, PRICE_TOL, |p| {
                covered(p).unwrap_or(false)
            });
            snap_to_breakpoint(bracket, breakpoints)
        };
        Ok(Equilibrium {
            price,
            demand: self.demand(price)?,
        })
    }

    /// Minimizer of `φ`: the least price where best-response supply covers
    /// demand. Accurate to 1e-9 $/MWh, exact at supply breakpoints.
    pub fn exact_dual(&self) -> Result<Equilibrium, PricingError> {
        let breakpoints = ucp::supply_breakpoints(self.fleet);
        self.crossing(default_price_ceiling(self.fleet), &breakpoints, |p| {
            ucp::best_response(self.fleet, p).supply
        })
    }

    /// Market-clearing price of the quadratic-cost model, where marginal
    /// cost meets marginal utility.
    pub fn lmp_equilibrium(&self, quad: &QuadraticCost) -> Result<Equilibrium, PricingError> {
        let cap = self.fleet.total_capacity();
        let ceiling = default_price_ceiling(self.fleet).max(quad.marginal(cap));
        self.crossing(ceiling, &[], |p| quad.supply(p, cap))
    }

    /// Clearing price against the relaxed commitment cost.
    pub fn dispatchable_equilibrium(&self) -> Result<Equilibrium, PricingError> {
        let mut breakpoints: Vec<f64> = self
            .fleet
            .types
            .iter()
            .flat_map(|t| {
                ucp::relaxed_unit_blocks(t)
                    .into_iter()
                    .map(|b| b.marginal_cost)
            })
            .collect();
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        self.crossing(default_price_ceiling(self.fleet), &breakpoints, |p| {
            ucp::relaxed_supply(self.fleet, p)
        })
    }

    /// Single-record trace for a directly computed price.
    pub fn point_trace(
        &self,
        method: Method,
        eq: Equilibrium,
    ) -> Result<PricingTrace, PricingError> {
        let start = Instant::now();
        let dual = self.dual_value(eq.price)?;
        let record = IterateRecord {
            k: 0,
            price: eq.price,
            demand: eq.demand,
            supply: dual.supply,
            step: 0.0,
            dual_value: dual.value,
            uplift: self.uplift_at(eq.price, eq.demand),
            elapsed_secs: start.elapsed().as_secs_f64(),
        };
        Ok(PricingTrace {
            method,
            records: vec![record],
            final_price: eq.price,
            final_demand: eq.demand,
        })
    }
}
