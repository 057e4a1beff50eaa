//! Unit-commitment economics.
//!
//! Exact evaluation of the commitment cost function `v(y)`, the supplier's
//! profit-maximizing best response at a price (whose optimal value is the
//! convex conjugate `v^c`), and the three baseline cost models: the
//! continuous relaxation ("dispatchable"), the startup-free model, and a
//! quadratic fit to the startup-free model.
//!
//! Commitments are enumerated by per-type unit counts. Units of one type are
//! interchangeable, so `Π (unit_count + 1)` cases cover every on/off pattern.

use crate::fleet::{CostSegment, Fleet, GeneratorType};
use thiserror::Error;

/// Relative slack used when checking that a demand fits a commitment.
const FEASIBILITY_TOL: f64 = 1e-9;
/// Relative size of a unit profit treated as exactly zero.
const TIE_TOL: f64 = 1e-12;

/// Smallest quadratic coefficient a fitted cost may have.
pub const ALPHA_FLOOR: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UcpError {
    /// Demand cannot be met by the fleet (or by the given commitment).
    #[error("demand {demand} MW is infeasible; serviceable range is [{min}, {max}] MW")]
    Infeasible { demand: f64, min: f64, max: f64 },
    #[error("output {output} MW outside [0, {max}] MW for generator type `{name}`")]
    OutputOutOfRange { name: String, output: f64, max: f64 },
    #[error("commitment does not match the fleet: {0}")]
    InvalidCommitment(String),
    #[error("quadratic fit is degenerate: {0}")]
    DegenerateFit(String),
}

/// Number of committed units of each generator type.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Commitment {
    pub counts: Vec<u32>,
}

impl Commitment {
    pub fn none(fleet: &Fleet) -> Self {
        Self {
            counts: vec![0; fleet.types.len()],
        }
    }

    pub fn all(fleet: &Fleet) -> Self {
        Self {
            counts: fleet.types.iter().map(|t| t.unit_count).collect(),
        }
    }

    fn check(&self, fleet: &Fleet) -> Result<(), UcpError> {
        if self.counts.len() != fleet.types.len() {
            return Err(UcpError::InvalidCommitment(format!(
                "{} counts for {} generator types",
                self.counts.len(),
                fleet.types.len()
            )));
        }
        for (n, gtype) in self.counts.iter().zip(&fleet.types) {
            if *n > gtype.unit_count {
                return Err(UcpError::InvalidCommitment(format!(
                    "{n} units of `{}` committed, only {} exist",
                    gtype.name, gtype.unit_count
                )));
            }
        }
        Ok(())
    }

    /// Iterates over every commitment of the fleet in odometer order.
    pub fn enumerate(fleet: &Fleet) -> impl Iterator<Item = Commitment> + '_ {
        let limits: Vec<u32> = fleet.types.iter().map(|t| t.unit_count).collect();
        let mut next = Some(vec![0u32; limits.len()]);
        std::iter::from_fn(move || {
            let current = next.take()?;
            let mut bumped = current.clone();
            let mut carried = true;
            for (c, lim) in bumped.iter_mut().zip(&limits) {
                if *c < *lim {
                    *c += 1;
                    carried = false;
                    break;
                }
                *c = 0;
            }
            if !carried {
                next = Some(bumped);
            }
            Some(Commitment { counts: current })
        })
    }
}

/// A commitment together with the per-unit outputs of each type.
#[derive(Debug, Clone, PartialEq)]
pub struct Dispatch {
    pub commitment: Commitment,
    /// Output of each committed unit, per type (0 for types with no units on).
    pub unit_output: Vec<f64>,
    pub total_output: f64,
    /// Startup plus variable cost.
    pub total_cost: f64,
}

/// Variable cost of one unit producing `g` MW, filling segments in order.
pub fn unit_variable_cost(gtype: &GeneratorType, g: f64) -> Result<f64, UcpError> {
    let max = gtype.max_output();
    if !(g >= -FEASIBILITY_TOL * max.max(1.0) && g <= max * (1.0 + FEASIBILITY_TOL)) {
        return Err(UcpError::OutputOutOfRange {
            name: gtype.name.clone(),
            output: g,
            max,
        });
    }
    Ok(variable_cost(&gtype.segments, g.clamp(0.0, max)))
}

fn variable_cost(segments: &[CostSegment], g: f64) -> f64 {
    let mut remaining = g;
    let mut cost = 0.0;
    for seg in segments {
        if remaining <= 0.0 {
            break;
        }
        let take = remaining.min(seg.capacity);
        cost += seg.marginal_cost * take;
        remaining -= take;
    }
    cost
}

/// The pieces of a unit's segments that lie above `floor` MW.
fn segments_above(segments: &[CostSegment], floor: f64) -> impl Iterator<Item = CostSegment> + '_ {
    let mut start = 0.0;
    segments.iter().filter_map(move |seg| {
        let end = start + seg.capacity;
        let piece = end - start.max(floor);
        start = end;
        (piece > 0.0).then(|| CostSegment::new(seg.marginal_cost, piece))
    })
}

/// Cost-minimal dispatch of a fixed commitment serving `y` MW.
///
/// Committed units start at their minimum output; the residual is met by the
/// cheapest remaining segment capacity across all committed units.
pub fn dispatch_committed(
    fleet: &Fleet,
    commitment: &Commitment,
    y: f64,
) -> Result<Dispatch, UcpError> {
    commitment.check(fleet)?;
    let (lo, hi) = commitment_range(fleet, commitment);
    let slack = FEASIBILITY_TOL * fleet.total_capacity().max(1.0);
    if !(y >= lo - slack && y <= hi + slack) {
        return Err(UcpError::Infeasible {
            demand: y,
            min: lo,
            max: hi,
        });
    }
    Ok(dispatch_unchecked(fleet, commitment, y.clamp(lo, hi)))
}

fn commitment_range(fleet: &Fleet, commitment: &Commitment) -> (f64, f64) {
    commitment
        .counts
        .iter()
        .zip(&fleet.types)
        .fold((0.0, 0.0), |(lo, hi), (&n, t)| {
            let n = f64::from(n);
            (lo + n * t.min_output, hi + n * t.max_output())
        })
}

fn dispatch_unchecked(fleet: &Fleet, commitment: &Commitment, y: f64) -> Dispatch {
    let mut cost = 0.0;
    let mut floor_output = 0.0;
    // (marginal cost, aggregate capacity, type index)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::new();
    for (idx, (&n, gtype)) in commitment.counts.iter().zip(&fleet.types).enumerate() {
        if n == 0 {
            continue;
        }
        let units = f64::from(n);
        cost += units * (gtype.startup_cost + variable_cost(&gtype.segments, gtype.min_output));
        floor_output += units * gtype.min_output;
        blocks.extend(
            segments_above(&gtype.segments, gtype.min_output)
                .map(|s| (s.marginal_cost, units * s.capacity, idx)),
        );
    }
    blocks.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut residual = (y - floor_output).max(0.0);
    let mut extra = vec![0.0; fleet.types.len()];
    for (marginal_cost, capacity, idx) in blocks {
        if residual <= 0.0 {
            break;
        }
        let take = residual.min(capacity);
        cost += marginal_cost * take;
        extra[idx] += take;
        residual -= take;
    }

    let unit_output = commitment
        .counts
        .iter()
        .zip(&fleet.types)
        .zip(&extra)
        .map(|((&n, t), e)| {
            if n == 0 {
                0.0
            } else {
                t.min_output + e / f64::from(n)
            }
        })
        .collect();
    Dispatch {
        commitment: commitment.clone(),
        unit_output,
        total_output: y,
        total_cost: cost,
    }
}

pub(crate) fn check_demand(fleet: &Fleet, y: f64) -> Result<f64, UcpError> {
    let cap = fleet.total_capacity();
    let slack = FEASIBILITY_TOL * cap.max(1.0);
    if !(y >= -slack && y <= cap + slack) {
        return Err(UcpError::Infeasible {
            demand: y,
            min: 0.0,
            max: cap,
        });
    }
    Ok(y.clamp(0.0, cap))
}

/// Exact `v(y)`: the cheapest dispatch over all feasible commitments.
///
/// The returned dispatch carries the optimal value in `total_cost`.
pub fn ucp_value(fleet: &Fleet, y: f64) -> Result<Dispatch, UcpError> {
    let y = check_demand(fleet, y)?;
    let slack = FEASIBILITY_TOL * fleet.total_capacity().max(1.0);
    let mut best: Option<Dispatch> = None;
    for commitment in Commitment::enumerate(fleet) {
        let (lo, hi) = commitment_range(fleet, &commitment);
        if y < lo - slack || y > hi + slack {
            continue;
        }
        let candidate = dispatch_unchecked(fleet, &commitment, y.clamp(lo, hi));
        if best
            .as_ref()
            .is_none_or(|b| candidate.total_cost < b.total_cost)
        {
            best = Some(candidate);
        }
    }
    // The all-on commitment always covers [0, capacity] when min outputs are
    // zero; otherwise some commitment covers y since we checked the range.
    best.ok_or(UcpError::Infeasible {
        demand: y,
        min: 0.0,
        max: fleet.total_capacity(),
    })
}

/// The supplier's profit-maximizing reaction to a price.
#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse {
    pub supply: f64,
    /// Maximal profit, equal to `v^c(price)`.
    pub profit: f64,
    pub dispatch: Dispatch,
}

impl BestResponse {
    pub fn commitment(&self) -> &Commitment {
        &self.dispatch.commitment
    }
}

/// Best output of one committed unit at `price` and the profit it earns
/// after paying its startup cost. Profit-neutral segments are produced.
fn unit_best_response(gtype: &GeneratorType, price: f64) -> (f64, f64) {
    let m = gtype.min_output;
    let mut output = m;
    let mut margin = price * m - variable_cost(&gtype.segments, m);
    for seg in segments_above(&gtype.segments, m) {
        if price < seg.marginal_cost {
            break;
        }
        output += seg.capacity;
        margin += (price - seg.marginal_cost) * seg.capacity;
    }
    (output, margin - gtype.startup_cost)
}

/// Profit-maximizing commitment and dispatch at `price`.
///
/// Decomposes per unit: a unit runs at its best output on `[m, M]` and commits
/// iff that earns nonnegative profit. Ties resolve to the larger supply; a
/// profit within rounding of zero counts as a tie, so a break-even price
/// computed in floating point still commits the unit.
pub fn best_response(fleet: &Fleet, price: f64) -> BestResponse {
    let mut counts = Vec::with_capacity(fleet.types.len());
    let mut unit_output = Vec::with_capacity(fleet.types.len());
    let mut supply = 0.0;
    let mut profit = 0.0;
    let mut cost = 0.0;
    for gtype in &fleet.types {
        let (g, unit_profit) = unit_best_response(gtype, price);
        let tie = TIE_TOL * (gtype.startup_cost + price.abs() * g).max(1.0);
        let commit = unit_profit > tie || (unit_profit.abs() <= tie && g > 0.0);
        if commit {
            let unit_profit = unit_profit.max(0.0);
            let units = f64::from(gtype.unit_count);
            counts.push(gtype.unit_count);
            unit_output.push(g);
            supply += units * g;
            profit += units * unit_profit;
            cost += units * (gtype.startup_cost + variable_cost(&gtype.segments, g));
        } else {
            counts.push(0);
            unit_output.push(0.0);
        }
    }
    BestResponse {
        supply,
        profit,
        dispatch: Dispatch {
            commitment: Commitment { counts },
            unit_output,
            total_output: supply,
            total_cost: cost,
        },
    }
}

/// Convex conjugate `v^c(price) = max_y { price·y − v(y) }`.
pub fn conjugate(fleet: &Fleet, price: f64) -> f64 {
    best_response(fleet, price).profit
}

/// Optimal value of one unit's continuous relaxation (commitment in `[0, 1]`).
///
/// For a fixed commitment level `z` the cost is `S z + z C(g / z)`, which is
/// piecewise linear and convex in `z` with breakpoints where `g / z` hits a
/// segment boundary. The minimum is therefore at one of those breakpoints or
/// at an end of the feasible range `[g / M, min(1, g / m)]`.
pub fn relaxed_unit_cost(gtype: &GeneratorType, g: f64) -> Result<f64, UcpError> {
    let max = gtype.max_output();
    unit_variable_cost(gtype, g)?;
    let g = g.clamp(0.0, max);
    if g == 0.0 {
        return Ok(0.0);
    }
    let z_lo = g / max;
    let z_hi = if gtype.min_output > 0.0 {
        (g / gtype.min_output).min(1.0)
    } else {
        1.0
    };
    let cost_at = |z: f64| {
        let per_unit = (g / z).min(max);
        gtype.startup_cost * z + z * variable_cost(&gtype.segments, per_unit)
    };
    let mut prefix = 0.0;
    let breakpoints = gtype.segments.iter().map(|s| {
        prefix += s.capacity;
        g / prefix
    });
    let best = [z_lo, z_hi]
        .into_iter()
        .chain(breakpoints)
        .filter(|z| *z >= z_lo && *z <= z_hi)
        .map(cost_at)
        .fold(f64::INFINITY, f64::min);
    Ok(best)
}

/// Marginal blocks of one unit's relaxed cost curve, in merit order.
///
/// The relaxed cost is the convex envelope of `{0 at 0} ∪ {S + C(x) on [m, M]}`:
/// a first block at the lowest average cost `(S + C(x)) / x`, then whatever
/// segment capacity remains above that output.
pub fn relaxed_unit_blocks(gtype: &GeneratorType) -> Vec<CostSegment> {
    let mut candidates: Vec<f64> = Vec::new();
    if gtype.min_output > 0.0 {
        candidates.push(gtype.min_output);
    }
    let mut prefix = 0.0;
    for seg in &gtype.segments {
        prefix += seg.capacity;
        if prefix > gtype.min_output {
            candidates.push(prefix);
        }
    }
    let (mut best_x, mut best_avg) = (f64::NAN, f64::INFINITY);
    for x in candidates {
        let avg = (gtype.startup_cost + variable_cost(&gtype.segments, x)) / x;
        // prefer the larger output on ties so blocks merge
        if avg <= best_avg {
            best_x = x;
            best_avg = avg;
        }
    }
    std::iter::once(CostSegment::new(best_avg, best_x))
        .chain(segments_above(&gtype.segments, best_x))
        .collect()
}

/// Fleet-wide relaxed blocks sorted by marginal cost.
fn relaxed_fleet_blocks(fleet: &Fleet) -> Vec<CostSegment> {
    let mut blocks: Vec<CostSegment> = fleet
        .types
        .iter()
        .flat_map(|t| {
            let units = f64::from(t.unit_count);
            relaxed_unit_blocks(t)
                .into_iter()
                .map(move |b| CostSegment::new(b.marginal_cost, units * b.capacity))
        })
        .collect();
    blocks.sort_by(|a, b| a.marginal_cost.total_cmp(&b.marginal_cost));
    blocks
}

/// Value and right-derivative of the relaxed fleet cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxedValue {
    pub value: f64,
    /// Right-derivative at `y`; at full capacity, the last block's cost.
    pub marginal_price: f64,
}

/// Relaxed ("dispatchable") fleet cost at `y`, by merit order over the
/// relaxed unit blocks.
pub fn relaxed_value(fleet: &Fleet, y: f64) -> Result<RelaxedValue, UcpError> {
    let y = check_demand(fleet, y)?;
    let blocks = relaxed_fleet_blocks(fleet);
    let mut value = 0.0;
    let mut filled = 0.0;
    let mut marginal_price = None;
    for block in &blocks {
        let end = filled + block.capacity;
        if end > y {
            value += block.marginal_cost * (y - filled).max(0.0);
            marginal_price = Some(block.marginal_cost);
            break;
        }
        value += block.marginal_cost * block.capacity;
        filled = end;
    }
    let marginal_price =
        marginal_price.unwrap_or_else(|| blocks.last().map_or(0.0, |b| b.marginal_cost));
    Ok(RelaxedValue {
        value,
        marginal_price,
    })
}

/// Supply that maximizes `price·y − relaxed cost(y)`; ties go to the
/// larger output.
pub fn relaxed_supply(fleet: &Fleet, price: f64) -> f64 {
    relaxed_fleet_blocks(fleet)
        .iter()
        .take_while(|b| b.marginal_cost <= price)
        .map(|b| b.capacity)
        .sum()
}

/// Prices at which the best-response supply can change: every segment cost
/// above a unit's minimum output and every unit's commit threshold (its
/// lowest average cost, startup included). Sorted and deduplicated.
pub fn supply_breakpoints(fleet: &Fleet) -> Vec<f64> {
    let mut prices: Vec<f64> = fleet
        .types
        .iter()
        .flat_map(|t| {
            relaxed_unit_blocks(t)
                .into_iter()
                .map(|b| b.marginal_cost)
                .chain(segments_above(&t.segments, t.min_output).map(|s| s.marginal_cost))
                .collect::<Vec<_>>()
        })
        .collect();
    prices.sort_by(f64::total_cmp);
    prices.dedup();
    prices
}

/// `v(y)` with every startup cost ignored.
pub fn no_startup_value(fleet: &Fleet, y: f64) -> Result<f64, UcpError> {
    ucp_value(&fleet.without_startup_costs(), y).map(|d| d.total_cost)
}

/// Strictly convex cost `alpha·y² + beta·y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticCost {
    pub alpha: f64,
    pub beta: f64,
}

impl QuadraticCost {
    pub fn value(&self, y: f64) -> f64 {
        self.alpha * y * y + self.beta * y
    }

    pub fn marginal(&self, y: f64) -> f64 {
        2.0 * self.alpha * y + self.beta
    }

    /// Profit-maximizing supply at `price`, limited to `[0, capacity]`.
    pub fn supply(&self, price: f64, capacity: f64) -> f64 {
        ((price - self.beta) / (2.0 * self.alpha)).clamp(0.0, capacity)
    }

    /// `max_{y in [0, capacity]} price·y − value(y)`.
    pub fn conjugate(&self, price: f64, capacity: f64) -> f64 {
        let y = self.supply(price, capacity);
        price * y - self.value(y)
    }
}

/// Zero-intercept least-squares fit of `alpha·y² + beta·y` to the
/// startup-free cost sampled on a uniform grid over `[0, capacity]`.
pub fn quadratic_fit(fleet: &Fleet, sample_count: usize) -> Result<QuadraticCost, UcpError> {
    if sample_count < 3 {
        return Err(UcpError::DegenerateFit(format!(
            "need at least 3 samples, got {sample_count}"
        )));
    }
    let cap = fleet.total_capacity();
    let samples = (0..sample_count)
        .map(|i| {
            let y = cap * i as f64 / (sample_count - 1) as f64;
            no_startup_value(fleet, y).map(|v| (y, v))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if samples.iter().all(|&(_, v)| v == 0.0) {
        return Err(UcpError::DegenerateFit("all sampled costs are zero".into()));
    }
    let (mut s2, mut s3, mut s4, mut sv1, mut sv2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(y, v) in &samples {
        let y2 = y * y;
        s2 += y2;
        s3 += y2 * y;
        s4 += y2 * y2;
        sv1 += y * v;
        sv2 += y2 * v;
    }
    let det = s4 * s2 - s3 * s3;
    let alpha = (sv2 * s2 - sv1 * s3) / det;
    if alpha.is_finite() && alpha > ALPHA_FLOOR {
        let beta = (s4 * sv1 - s3 * sv2) / det;
        return Ok(QuadraticCost { alpha, beta });
    }
    // Clamp and refit the linear term with alpha held at the floor.
    let alpha = ALPHA_FLOOR;
    let beta = (sv1 - alpha * s3) / s2;
    Ok(QuadraticCost { alpha, beta })
}
