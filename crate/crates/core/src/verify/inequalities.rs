//! Sampled checks of the auxiliary inequalities behind the large-dimension
//! maximality argument.
//!
//! Configurations are drawn by rejection from the unit sphere of the
//! sum-zero hyperplane, restricted to vectors with the coordinate pattern
//! `(a₁, a₂, γ×p, δ×r, ε×s)`; the pattern's multiplicities are enumerated,
//! not sampled.

use std::ops::RangeInclusive;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{sample_rng, ClaimRecord, VerificationReport};
use crate::error::{Error, Result};
use crate::simplex::{psi_bound, Dimension};

/// Rejection attempts allowed per accepted sample.
const MAX_ATTEMPTS: usize = 1_000_000;

/// Points of the `x` grid on `(0, 5/2]`.
const PHI_GRID: usize = 1000;

/// Points of the `a₂` grid for the monotonicity check.
const F_GRID: usize = 64;

/// `φₙ(x) = (1+x)^{n-1} - (1+x/5)^{n-1} (1+x/(3+x))² (1 + (n-1)(4/5)x - 2x/(3+x))`.
///
/// Positive on `(0, 5/2]` for `n ≥ 5`; negative somewhere there for `n = 4`,
/// where [`phi4_tilde`] takes its place.
pub fn phi(n: usize, x: f64) -> f64 {
    let m = (n - 1) as i32;
    let q = 1.0 + x / (3.0 + x);
    (1.0 + x).powi(m) - (1.0 + x / 5.0).powi(m) * q * q * (1.0 + (n - 1) as f64 * 0.8 * x - 2.0 * x / (3.0 + x))
}

/// The `n = 4` replacement for [`phi`].
pub fn phi4_tilde(x: f64) -> f64 {
    let u = x / (5.0 + x / 3.0);
    let q = 1.0 + x / (3.0 + x);
    (1.0 + x).powi(3) - (1.0 + u).powi(3) * q * q * (1.0 + 3.0 * x - 3.0 * u - 2.0 * x / (3.0 + x))
}

/// `Φₙ(x) = ((2/3)(1+x))^{n-1} - (1+x/(3+x))² (1 + (n-1)(x - 1/2) - 2x/(3+x))`,
/// positive for `x ≥ 5/2` and `n ≥ 5`.
pub fn phi_large(n: usize, x: f64) -> f64 {
    let q = 1.0 + x / (3.0 + x);
    (2.0 / 3.0 * (1.0 + x)).powi((n - 1) as i32) - q * q * (1.0 + (n - 1) as f64 * (x - 0.5) - 2.0 * x / (3.0 + x))
}

fn threshold(n: usize) -> f64 {
    let nf = n as f64;
    ((nf - 2.0) / (3.0 * (nf + 1.0))).sqrt()
}

/// `g(n) = 2√((n-2)/(3(n+1))) - √((n-1)/(2(n+1)))`.
fn g(n: usize) -> f64 {
    let nf = n as f64;
    2.0 * threshold(n) - ((nf - 1.0) / (2.0 * (nf + 1.0))).sqrt()
}

/// Ordered triples of positive integers summing to `n - 1`.
fn triples(n: usize) -> Vec<[usize; 3]> {
    let m = n - 1;
    let mut out = Vec::new();
    for p in 1..m {
        for r in 1..m - p {
            out.push([p, r, m - p - r]);
        }
    }
    out
}

/// A sorted unit sum-zero vector with at most five distinct values whose
/// two largest coordinates exceed the threshold.
#[derive(Debug, Clone, Copy)]
struct Pattern {
    a1: f64,
    a2: f64,
    values: [f64; 3],
    mult: [usize; 3],
}

impl Pattern {
    fn describe(&self) -> String {
        format!(
            "a1={:.15e} a2={:.15e} values={:?} mult={:?}",
            self.a1, self.a2, self.values, self.mult
        )
    }
}

/// Draws `(a₁, a₂, γ, δ, ε)` as group means of a standard Gaussian vector
/// in `R^{n+1}`, projects to sum zero, normalizes and keeps it if
/// `a₁ > a₂ > threshold` and `a₂` exceeds the other three values.
fn sample_pattern(n: usize, mult: [usize; 3], rng: &mut ChaCha8Rng, claim: &'static str) -> Result<Pattern> {
    let thr = threshold(n);
    let w = [1.0, 1.0, mult[0] as f64, mult[1] as f64, mult[2] as f64];
    for _ in 0..MAX_ATTEMPTS {
        let mut z = [0.0; 5];
        for (zi, wi) in z.iter_mut().zip(&w) {
            let g: f64 = StandardNormal.sample(rng);
            *zi = g / wi.sqrt();
        }
        let mean = z.iter().zip(&w).map(|(x, m)| x * m).sum::<f64>() / (n + 1) as f64;
        z.iter_mut().for_each(|x| *x -= mean);
        let norm = z.iter().zip(&w).map(|(x, m)| m * x * x).sum::<f64>().sqrt();
        z.iter_mut().for_each(|x| *x /= norm);
        let [a1, a2, c, d, e] = z;
        if a1 > a2 && a2 > thr && a2 > c && a2 > d && a2 > e {
            return Ok(Pattern {
                a1,
                a2,
                values: [c, d, e],
                mult,
            });
        }
    }
    Err(Error::InfeasibleSampler {
        claim,
        n,
        attempts: MAX_ATTEMPTS,
    })
}

/// Uniform in `[lo, hi)`.
fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}

/// `ln((a₁ - x)/(a₂ - x))` for `x < a₂ < a₁`, without cancellation.
fn log_ratio(a1: f64, a2: f64, x: f64) -> f64 {
    ((a1 - a2) / (a2 - x)).ln_1p()
}

type Check = fn(usize, &mut ChaCha8Rng, u64, &[[usize; 3]]) -> Result<Option<String>>;

struct Claim {
    name: &'static str,
    anchor: &'static str,
    check: Check,
}

fn pattern_for(n: usize, rng: &mut ChaCha8Rng, index: u64, shapes: &[[usize; 3]], claim: &'static str) -> Result<Pattern> {
    let mult = shapes[index as usize % shapes.len()];
    sample_pattern(n, mult, rng, claim)
}

/// `((a₁-t)/(a₂-t))^{n-1} > Π ((a₁-γ)/(a₂-γ))^{m+1}` over the three groups.
fn check_reduction(n: usize, rng: &mut ChaCha8Rng, index: u64, shapes: &[[usize; 3]]) -> Result<Option<String>> {
    let p = pattern_for(n, rng, index, shapes, "reduction")?;
    let t = uniform(rng, threshold(n), p.a2);
    if t <= threshold(n) {
        return Ok(None);
    }
    let lhs = (n - 1) as f64 * log_ratio(p.a1, p.a2, t);
    let rhs: f64 = p
        .values
        .iter()
        .zip(&p.mult)
        .map(|(&v, &m)| (m + 1) as f64 * log_ratio(p.a1, p.a2, v))
        .sum();
    Ok((lhs <= rhs).then(|| format!("{} t={t:.15e}: lhs {lhs:e} <= rhs {rhs:e}", p.describe())))
}

/// Every eighth sample sits on the worst case `c = top`.
fn c_below(rng: &mut ChaCha8Rng, index: u64, top: f64) -> f64 {
    if index.is_multiple_of(8) {
        top
    } else {
        uniform(rng, -1.0, top)
    }
}

fn power_check(
    n: usize,
    rng: &mut ChaCha8Rng,
    index: u64,
    shapes: &[[usize; 3]],
    claim: &'static str,
    top: f64,
    power: f64,
) -> Result<Option<String>> {
    let p = pattern_for(n, rng, index, shapes, claim)?;
    let t = uniform(rng, threshold(n), p.a2);
    if t <= threshold(n) {
        return Ok(None);
    }
    let c = c_below(rng, index, top);
    let lhs = log_ratio(p.a1, p.a2, t);
    let rhs = power * log_ratio(p.a1, p.a2, c);
    Ok((lhs <= rhs).then(|| format!("{} t={t:.15e} c={c:.15e}: lhs {lhs:e} <= rhs {rhs:e}", p.describe())))
}

/// `c ≤ 0 ⇒ (a₁-t)/(a₂-t) > ((a₁-c)/(a₂-c))³`.
fn check_power_cube(n: usize, rng: &mut ChaCha8Rng, index: u64, shapes: &[[usize; 3]]) -> Result<Option<String>> {
    power_check(n, rng, index, shapes, "power-cube", 0.0, 3.0)
}

/// `c ≤ g(n) ⇒ (a₁-t)/(a₂-t) > ((a₁-c)/(a₂-c))²`.
fn check_power_square(n: usize, rng: &mut ChaCha8Rng, index: u64, shapes: &[[usize; 3]]) -> Result<Option<String>> {
    power_check(n, rng, index, shapes, "power-square", g(n), 2.0)
}

/// The two distinct trailing values `c` (multiplicity `n-2`) and `d` of the
/// configuration completing `(a₁, a₂)`.
fn trailing_values(n: usize, a1: f64, a2: f64) -> (f64, f64) {
    let nf = n as f64;
    let w2 = (nf - 1.0) * (1.0 - a1 * a1 - a2 * a2) - (a1 + a2).powi(2);
    let w = w2.max(0.0).sqrt();
    let mean = -(a1 + a2) / (nf - 1.0);
    let c = mean - w / ((nf - 2.0).sqrt() * (nf - 1.0));
    let d = mean + (nf - 2.0).sqrt() * w / (nf - 1.0);
    (c, d)
}

/// `t` in `[threshold, a₂)` with the left end hit exactly every eighth sample.
fn t_from_threshold(rng: &mut ChaCha8Rng, index: u64, n: usize, a2: f64) -> f64 {
    if index.is_multiple_of(8) {
        threshold(n)
    } else {
        uniform(rng, threshold(n), a2)
    }
}

fn gap_check(
    n: usize,
    rng: &mut ChaCha8Rng,
    index: u64,
    shapes: &[[usize; 3]],
    claim: &'static str,
    test: fn(usize, f64, f64, f64, f64, f64) -> Option<String>,
) -> Result<Option<String>> {
    let p = pattern_for(n, rng, index, shapes, claim)?;
    let t = t_from_threshold(rng, index, n, p.a2);
    let (c, d) = trailing_values(n, p.a1, p.a2);
    Ok(test(n, p.a1, p.a2, t, c, d).map(|why| format!("a1={:.15e} a2={:.15e} t={t:.15e}: {why}", p.a1, p.a2)))
}

/// `a₂ - d ≥ 3(a₂ - t) + (a₁ - a₂)`.
fn check_gap_d(n: usize, rng: &mut ChaCha8Rng, index: u64, shapes: &[[usize; 3]]) -> Result<Option<String>> {
    gap_check(n, rng, index, shapes, "gap-d", |_, a1, a2, t, _, d| {
        let (lhs, rhs) = (a2 - d, 3.0 * (a2 - t) + (a1 - a2));
        (lhs < rhs).then(|| format!("{lhs:e} < {rhs:e}"))
    })
}

/// `a₂ - c ≥ 5(a₂ - t) + (a₁ - a₂)/(n-1)`.
fn check_gap_c(n: usize, rng: &mut ChaCha8Rng, index: u64, shapes: &[[usize; 3]]) -> Result<Option<String>> {
    gap_check(n, rng, index, shapes, "gap-c", |n, a1, a2, t, c, _| {
        let (lhs, rhs) = (a2 - c, 5.0 * (a2 - t) + (a1 - a2) / (n - 1) as f64);
        (lhs < rhs).then(|| format!("{lhs:e} < {rhs:e}"))
    })
}

/// `(a₁ - c)/(a₂ - c) < 3/2`.
fn check_ratio(n: usize, rng: &mut ChaCha8Rng, index: u64, shapes: &[[usize; 3]]) -> Result<Option<String>> {
    gap_check(n, rng, index, shapes, "ratio-three-halves", |_, a1, a2, _, c, _| {
        let ratio = (a1 - c) / (a2 - c);
        (ratio >= 1.5).then(|| format!("ratio {ratio}"))
    })
}

/// `f(a₁, a₂) = (F - G)/(a₁ - a₂)` with `F`, `G` the two pyramid terms
/// of the configuration `(a₁, a₂, c×(n-2), d)`.
fn monotone_f(n: usize, a1: f64, a2: f64, t: f64) -> f64 {
    let (c, d) = trailing_values(n, a1, a2);
    let m = (n - 1) as i32;
    let term = |x: f64| (x - t).powi(m) / ((x - c).powi(m - 1) * (x - d));
    (term(a1) - term(a2)) / (a1 - a2)
}

/// For fixed `a₁` and `t`, `f` is strictly increasing along a grid of `a₂`
/// in `(t, min(a₁, ψ(a₁)))`.
fn check_monotone(n: usize, rng: &mut ChaCha8Rng, index: u64, shapes: &[[usize; 3]]) -> Result<Option<String>> {
    let dim = Dimension::new(n)?;
    let thr = threshold(n);
    // Each try already rejection-samples a pattern; this bounds the extra
    // rejections for a too narrow a₂ range.
    for _ in 0..1000 {
        let p = pattern_for(n, rng, index, shapes, "monotone-f")?;
        let a1 = p.a1;
        let top = psi_bound(dim, a1).map_or(a1, |psi| psi.min(a1 - 1e-4));
        if top - thr < 1e-3 {
            continue;
        }
        let t = uniform(rng, thr, top - 1e-3);
        let grid: Vec<f64> = (1..=F_GRID).map(|j| t + (top - t) * j as f64 / F_GRID as f64).collect();
        let f: Vec<f64> = grid.iter().map(|&a2| monotone_f(n, a1, a2, t)).collect();
        for j in 1..F_GRID {
            if !(f[j] > f[j - 1]) {
                return Ok(Some(format!(
                    "a1={a1:.15e} t={t:.15e}: f({:.15e}) = {:e} >= f({:.15e}) = {:e}",
                    grid[j - 1],
                    f[j - 1],
                    grid[j],
                    f[j]
                )));
            }
        }
        return Ok(None);
    }
    Err(Error::InfeasibleSampler {
        claim: "monotone-f",
        n,
        attempts: 1000,
    })
}

const CLAIMS: [Claim; 7] = [
    Claim {
        name: "reduction",
        anchor: "at most three trailing values: the distance ratio dominates the product of group ratios",
        check: check_reduction,
    },
    Claim {
        name: "power-cube",
        anchor: "c <= 0 implies (a1-t)/(a2-t) > ((a1-c)/(a2-c))^3",
        check: check_power_cube,
    },
    Claim {
        name: "power-square",
        anchor: "c <= g(n) implies (a1-t)/(a2-t) > ((a1-c)/(a2-c))^2",
        check: check_power_square,
    },
    Claim {
        name: "ratio-three-halves",
        anchor: "(a1-c)/(a2-c) < 3/2 for the trailing value c",
        check: check_ratio,
    },
    Claim {
        name: "gap-d",
        anchor: "a2-d >= 3(a2-t) + (a1-a2)",
        check: check_gap_d,
    },
    Claim {
        name: "gap-c",
        anchor: "a2-c >= 5(a2-t) + (a1-a2)/(n-1)",
        check: check_gap_c,
    },
    Claim {
        name: "monotone-f",
        anchor: "f = (F-G)/(a1-a2) is strictly increasing in a2",
        check: check_monotone,
    },
];

fn violation_record(id: String, anchor: &str, tested: usize, found: Vec<String>, what: &str) -> ClaimRecord {
    let note = match found.first() {
        None => format!("no counterexample among {tested} {what}"),
        Some(first) => format!("{} violations among {tested} {what}; first: {first}", found.len()),
    };
    ClaimRecord::scalar(id, anchor, found.len() as f64, 0.0, 0.0).with_note(note)
}

fn x_grid() -> impl Iterator<Item = f64> {
    (1..=PHI_GRID).map(|i| 2.5 * i as f64 / PHI_GRID as f64)
}

fn grid_record(id: String, anchor: &str, points: &[f64], fails: impl Fn(f64) -> Option<String>) -> ClaimRecord {
    let found: Vec<String> = points.iter().filter_map(|&x| fails(x)).collect();
    violation_record(id, anchor, points.len(), found, "grid points")
}

/// Samples each inequality `samples` times per `n` and records the number
/// of violations (expected zero) with the first offending configuration.
pub fn sample_inequalities(n_range: RangeInclusive<usize>, samples: usize, seed: u64) -> Result<VerificationReport> {
    if samples < 1000 {
        return Err(Error::OutOfRange {
            what: "samples",
            value: samples as f64,
        });
    }
    let mut report = VerificationReport::new("inequalities", seed);
    for n in n_range {
        if !(4..=10).contains(&n) {
            return Err(Error::InvalidDimension { n, min: 4, max: 10 });
        }
        let shapes = triples(n);
        for (ci, claim) in CLAIMS.iter().enumerate() {
            let stream = (n * CLAIMS.len() + ci) as u64;
            let outcomes: Vec<Result<Option<String>>> = (0..samples as u64)
                .into_par_iter()
                .map(|i| {
                    let mut rng = sample_rng(seed, stream, i);
                    (claim.check)(n, &mut rng, i, &shapes)
                })
                .collect();
            let mut found = Vec::new();
            for o in outcomes {
                if let Some(v) = o? {
                    found.push(v);
                }
            }
            report.records.push(violation_record(
                format!("inequalities/n{n}/{}", claim.name),
                claim.anchor,
                samples,
                found,
                "samples",
            ));
        }

        let xs: Vec<f64> = x_grid().collect();
        if n == 4 {
            report.records.push(grid_record(
                "inequalities/n4/phi-positive".into(),
                "the n = 4 form of phi is positive on (0, 5/2]",
                &xs,
                |x| (phi4_tilde(x) <= 0.0).then(|| format!("phi4_tilde({x}) = {:e}", phi4_tilde(x))),
            ));
            report.records.push(grid_record(
                "inequalities/n4/phi-lower-bound".into(),
                "phi4_tilde(x) > x^2 / (6 (1+x/3)^3 (1+x/15)^4)",
                &xs,
                |x| {
                    let bound = x * x / (6.0 * (1.0 + x / 3.0).powi(3) * (1.0 + x / 15.0).powi(4));
                    (phi4_tilde(x) <= bound).then(|| format!("x = {x}: {:e} <= {bound:e}", phi4_tilde(x)))
                },
            ));
        } else {
            report.records.push(grid_record(
                format!("inequalities/n{n}/phi-positive"),
                "phi_n is positive on (0, 5/2]",
                &xs,
                |x| (phi(n, x) <= 0.0).then(|| format!("phi({x}) = {:e}", phi(n, x))),
            ));
            let large: Vec<f64> = (0..PHI_GRID).map(|i| 2.5 + 97.5 * i as f64 / PHI_GRID as f64).collect();
            report.records.push(grid_record(
                format!("inequalities/n{n}/phi-large-x"),
                "the large-x companion of phi_n is positive on [5/2, 100)",
                &large,
                |x| (phi_large(n, x) <= 0.0).then(|| format!("Phi({x}) = {:e}", phi_large(n, x))),
            ));
        }
        if n == 5 {
            report.records.push(grid_record(
                "inequalities/n5/phi-lower-bound".into(),
                "phi_5(x) > (6/5) x^2 / (1+x/3)^3",
                &xs,
                |x| {
                    let bound = 1.2 * x * x / (1.0 + x / 3.0).powi(3);
                    (phi(5, x) <= bound).then(|| format!("x = {x}: {:e} <= {bound:e}", phi(5, x)))
                },
            ));
        }
    }
    Ok(report)
}
