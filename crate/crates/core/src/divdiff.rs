//! Divided differences of truncated powers `x ↦ (x - t)₊^p` over a sorted,
//! possibly repeated, knot sequence.
//!
//! Entries are built bottom-up in the degree. Blocks of equal knots use the
//! Taylor coefficient, blocks entirely above `t` use the Leibniz rule with the
//! linear factor `x - t`, and blocks straddling `t` use the Cox–de Boor
//! convex combination. Every combination has nonnegative weights, so there is
//! no cancellation however closely the knots cluster.

use crate::simplex::binomial;

/// Which one-sided limit in `t` to take when `t` coincides with a knot.
///
/// Only matters for the Heaviside factor `(x - t)₊⁰`, which makes the result
/// jump when an end knot has multiplicity equal to the degree plus one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Limit from below (`(0)₊⁰ = 1`).
    Left,
    /// Limit from above (`(0)₊⁰ = 0`).
    Right,
}

fn heaviside(d: f64, side: Side) -> f64 {
    match side {
        Side::Left if d >= 0.0 => 1.0,
        Side::Right if d > 0.0 => 1.0,
        _ => 0.0,
    }
}

fn truncated_power(d: f64, p: usize, side: Side) -> f64 {
    if p == 0 {
        heaviside(d, side)
    } else if d > 0.0 {
        d.powi(p as i32)
    } else {
        0.0
    }
}

/// `[x₀, …, x_m] (· - t)₊^degree` for ascending `knots` (repeats allowed).
pub fn truncated_power_divdiff(knots: &[f64], t: f64, degree: usize, side: Side) -> f64 {
    let len = knots.len();
    assert!(len >= 1, "empty knot sequence");
    debug_assert!(knots.windows(2).all(|w| w[0] <= w[1]), "knots must ascend");
    let m = len - 1;

    // Polynomial region of a block: every knot lies on the live side of t.
    let above = |x: f64| match side {
        Side::Left => t <= x,
        Side::Right => t < x,
    };
    // Dead region: the truncated power vanishes at every knot of the block.
    let below = |x: f64| match side {
        Side::Left => t > x,
        Side::Right => t >= x,
    };

    let idx = |i: usize, j: usize| i * len + j;
    let mut prev = vec![0.0; len * len];
    let mut cur = vec![0.0; len * len];

    for p in 0..=degree {
        for span in 0..=m {
            for i in 0..len - span {
                let j = i + span;
                let (xi, xj) = (knots[i], knots[j]);
                let value = if xi == xj {
                    if span > p {
                        0.0
                    } else {
                        binomial(p, span) * truncated_power(xi - t, p - span, side)
                    }
                } else if below(xj) {
                    0.0
                } else if above(xi) {
                    if p == 0 {
                        0.0
                    } else {
                        (xi - t) * prev[idx(i, j)] + prev[idx(i + 1, j)]
                    }
                } else if p == 0 {
                    // Plain recursion on the span; shorter spans of this degree are done.
                    (cur[idx(i + 1, j)] - cur[idx(i, j - 1)]) / (xj - xi)
                } else {
                    ((xj - t) * prev[idx(i + 1, j)] + (t - xi) * prev[idx(i, j - 1)]) / (xj - xi)
                };
                cur[idx(i, j)] = value;
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[idx(0, m)]
}

/// The same divided difference through its defining alternating sum; only
/// valid for pairwise distinct knots. Kept as an independent reference.
pub fn truncated_power_divdiff_distinct(knots: &[f64], t: f64, degree: usize) -> f64 {
    knots
        .iter()
        .enumerate()
        .map(|(j, &xj)| {
            let denom: f64 = knots
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, &xk)| xj - xk)
                .product();
            truncated_power(xj - t, degree, Side::Right) / denom
        })
        .sum()
}
