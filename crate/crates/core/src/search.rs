//! Bisection on monotone predicates.

/// Absolute price tolerance for every bisection in the crate, $/MWh.
pub const PRICE_TOL: f64 = 1e-9;

/// Narrows `[lo, hi]` around the point where a monotone predicate switches
/// from `false` to `true`. Expects `!pred(lo)` and `pred(hi)`; returns the
/// final bracket, whose upper end still satisfies the predicate.
pub fn bisect<F>(mut lo: f64, mut hi: f64, tol: f64, mut pred: F) -> (f64, f64)
where
    F: FnMut(f64) -> bool,
{
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

/// Replaces the bracket's upper end by the nearest known breakpoint within
/// [`PRICE_TOL`] of the bracket, so thresholds that sit on a breakpoint come
/// out exact. The slack absorbs predicates that flip a rounding error early.
pub fn snap_to_breakpoint(bracket: (f64, f64), breakpoints: &[f64]) -> f64 {
    let (lo, hi) = bracket;
    breakpoints
        .iter()
        .copied()
        .filter(|b| *b > lo - PRICE_TOL && *b <= hi + PRICE_TOL)
        .min_by(|a, b| (a - hi).abs().total_cmp(&(b - hi).abs()))
        .unwrap_or(hi)
}
