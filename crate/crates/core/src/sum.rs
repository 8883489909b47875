//! Order-fixed pairwise summation.
//!
//! Every reduction in the crate goes through [`pairwise_sum`] over a slice in
//! a fixed order, so results do not depend on how work was split across
//! threads.

const BLOCK: usize = 8;

/// Sums `values` by recursive halving, with a short sequential loop at the
/// leaves. The error grows as `O(ε log n)` instead of `O(ε n)`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= BLOCK {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}
