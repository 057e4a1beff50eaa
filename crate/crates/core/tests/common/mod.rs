//! Brute-force reference computations shared by the integration tests.
//! Nothing here calls into the solver being checked.

#![allow(dead_code)]

use chp_market::fleet::{builtin_fleet, BuiltinFleet, Fleet, GeneratorType};

pub const MEAN_D1: f64 = 41086.7;

pub fn gribik() -> Fleet {
    builtin_fleet(BuiltinFleet::Gribik)
}

pub fn scarf() -> Fleet {
    builtin_fleet(BuiltinFleet::Scarf)
}

/// Scarf with two units of every type (58 MW).
pub fn reduced_scarf() -> Fleet {
    let mut f = scarf();
    for t in &mut f.types {
        t.unit_count = 2;
    }
    f
}

/// Piecewise-linear variable cost, filling segments in the listed order.
pub fn plain_cost(t: &GeneratorType, g: f64) -> f64 {
    let mut left = g;
    let mut cost = 0.0;
    for s in &t.segments {
        let take = left.min(s.capacity);
        cost += take * s.marginal_cost;
        left -= take;
    }
    cost
}

/// Cost of a running unit at each grid output `i · step`, `None` below the
/// minimum output.
fn running_unit_grid(t: &GeneratorType, step: f64) -> Vec<Option<f64>> {
    let max: f64 = t.segments.iter().map(|s| s.capacity).sum();
    let n = (max / step).round() as usize;
    (0..=n)
        .map(|i| {
            let g = i as f64 * step;
            (g >= t.min_output - 1e-12).then(|| t.startup_cost + plain_cost(t, g))
        })
        .collect()
}

pub fn min_plus(a: &[Option<f64>], b: &[Option<f64>]) -> Vec<Option<f64>> {
    let mut out = vec![None; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        let Some(x) = x else { continue };
        for (j, y) in b.iter().enumerate() {
            let Some(y) = y else { continue };
            let slot = &mut out[i + j];
            let c = x + y;
            if slot.is_none_or(|s| c < s) {
                *slot = Some(c);
            }
        }
    }
    out
}

/// Commitment × dispatch brute force on a grid: for every vector of running
/// unit counts, convolve the running costs of those units, and keep the
/// cheapest commitment at every grid demand. Index `i` is demand `i · step`.
pub fn brute_ucp_grid(fleet: &Fleet, step: f64) -> Vec<Option<f64>> {
    let cap: f64 = fleet
        .types
        .iter()
        .map(|t| f64::from(t.unit_count) * t.segments.iter().map(|s| s.capacity).sum::<f64>())
        .sum();
    let n = (cap / step).round() as usize;
    let mut best: Vec<Option<f64>> = vec![None; n + 1];
    let mut counts = vec![0u32; fleet.types.len()];
    loop {
        let mut acc = vec![Some(0.0)];
        for (t, &k) in fleet.types.iter().zip(&counts) {
            let unit = running_unit_grid(t, step);
            for _ in 0..k {
                acc = min_plus(&acc, &unit);
            }
        }
        for (i, c) in acc.into_iter().enumerate() {
            if let Some(c) = c {
                if best[i].is_none_or(|b| c < b) {
                    best[i] = Some(c);
                }
            }
        }
        // odometer over 0..=unit_count per type
        let mut pos = 0;
        loop {
            if pos == counts.len() {
                return best;
            }
            if counts[pos] < fleet.types[pos].unit_count {
                counts[pos] += 1;
                break;
            }
            counts[pos] = 0;
            pos += 1;
        }
    }
}

/// Lower convex envelope of `(x, y)` points sorted by `x`.
pub fn lower_envelope(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &p in points {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Evaluates a piecewise-linear envelope at `x`.
pub fn envelope_at(hull: &[(f64, f64)], x: f64) -> f64 {
    let i = hull.partition_point(|p| p.0 < x);
    if i == 0 {
        return hull[0].1;
    }
    if i == hull.len() {
        return hull[hull.len() - 1].1;
    }
    let (a, b) = (hull[i - 1], hull[i]);
    a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
}

/// `max_i (λ x_i − y_i)` over grid points.
pub fn grid_conjugate(points: &[(f64, f64)], price: f64) -> f64 {
    points
        .iter()
        .map(|&(x, y)| price * x - y)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Relaxed cost of one unit by scanning the commitment fraction `z` on a
/// fine grid: `min_z S z + z C(g / z)` over `g / M ≤ z ≤ min(1, g / m)`.
pub fn relaxed_unit_scan(t: &GeneratorType, g: f64, steps: usize) -> f64 {
    if g <= 0.0 {
        return 0.0;
    }
    let max: f64 = t.segments.iter().map(|s| s.capacity).sum();
    let lo = g / max;
    let hi = if t.min_output > 0.0 {
        (g / t.min_output).min(1.0)
    } else {
        1.0
    };
    (0..=steps)
        .map(|i| {
            let z = lo + (hi - lo) * i as f64 / steps as f64;
            let out = (g / z).min(max);
            t.startup_cost * z + z * plain_cost(t, out)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Best achievable profit of one unit at `price`, scanning outputs on a grid.
pub fn unit_profit_scan(t: &GeneratorType, price: f64, step: f64) -> f64 {
    running_unit_grid(t, step)
        .into_iter()
        .enumerate()
        .filter_map(|(i, c)| c.map(|c| price * i as f64 * step - c))
        .fold(0.0, f64::max)
}
