//! Section volumes `A(a, t) = vol_{n-1}(Δⁿ ∩ {⟨a, x⟩ = t})`.
//!
//! For a unit sum-zero direction with coordinates `a_j`,
//!
//! ```text
//! A(a, t) = √(n+1)/(n-1)! · Σ_j (a_j - t)₊^{n-1} / Π_{k≠j} (a_j - a_k),
//! ```
//!
//! i.e. `√(n+1)/(n-1)!` times the divided difference of `(· - t)₊^{n-1}` over
//! the coordinates. The literal sum ([`dirksen_sum`]) has removable
//! singularities at repeated coordinates; [`confluent_eval`] evaluates the
//! divided difference through a recurrence that handles repeats exactly.

use serde::{Deserialize, Serialize};

use crate::divdiff::{truncated_power_divdiff, truncated_power_divdiff_distinct, Side};
use crate::error::{Error, Result};
use crate::simplex::{binomial, factorial, CanonicalDirection, Dimension, SectionQuery};

/// Minimal coordinate gap for which the raw alternating sum is used.
pub const GAP_TOL: f64 = 1e-6;

/// Coordinates closer than this are merged into one repeated knot.
pub const MERGE_TOL: f64 = 1e-12;

/// A hyperplane within this distance of an extreme coordinate is treated as
/// passing through the corresponding face.
pub const TOUCH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    RawSum,
    Confluent,
    ClosedFormAxis,
    Zero,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Branch::RawSum => "raw-sum",
            Branch::Confluent => "confluent",
            Branch::ClosedFormAxis => "closed-form-axis",
            Branch::Zero => "zero",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionValue {
    pub value: f64,
    pub branch: Branch,
    /// Smallest gap between consecutive sorted coordinates.
    pub min_gap: f64,
}

/// Coordinates re-sorted ascending, with near-coincident runs merged.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotConfiguration {
    knots: Vec<f64>,
    multiplicities: Vec<usize>,
}

impl KnotConfiguration {
    pub fn new(coords: &[f64], merge_tol: f64) -> Self {
        let mut sorted = coords.to_vec();
        sorted.sort_by(f64::total_cmp);

        let mut knots = Vec::with_capacity(sorted.len());
        let mut multiplicities = Vec::new();
        let mut start = 0;
        for i in 1..=sorted.len() {
            if i == sorted.len() || sorted[i] - sorted[i - 1] > merge_tol {
                let run = &sorted[start..i];
                let value = if run.len() == 1 {
                    run[0]
                } else {
                    run.iter().sum::<f64>() / run.len() as f64
                };
                knots.extend(std::iter::repeat_n(value, run.len()));
                multiplicities.push(run.len());
                start = i;
            }
        }
        Self {
            knots,
            multiplicities,
        }
    }

    pub fn from_direction(direction: &CanonicalDirection) -> Self {
        Self::new(direction.coords(), MERGE_TOL)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Run lengths of equal knots, in ascending knot order.
    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    /// Simplex dimension implied by the knot count.
    pub fn n(&self) -> usize {
        self.knots.len() - 1
    }

    /// Divided difference of `(· - t)₊^degree`. A `t` within [`TOUCH_TOL`] of
    /// a knot is snapped onto it; at the lowest knot the limit from above is
    /// taken, elsewhere the limit from below, so a face lying in the
    /// hyperplane is counted.
    pub(crate) fn divdiff(&self, t: f64, degree: usize) -> f64 {
        let mut t = t;
        if let Some(&k) = self.knots.iter().find(|&&k| (k - t).abs() <= TOUCH_TOL) {
            t = k;
        }
        let side = if t == self.knots[0] { Side::Right } else { Side::Left };
        truncated_power_divdiff(&self.knots, t, degree, side)
    }
}

fn min_gap(coords: &[f64]) -> f64 {
    coords
        .windows(2)
        .map(|w| (w[0] - w[1]).abs())
        .fold(f64::INFINITY, f64::min)
}

fn section_scale(n: usize) -> f64 {
    ((n + 1) as f64).sqrt() / factorial(n - 1)
}

/// `A(a, t)` with default tolerances.
pub fn section_volume(q: &SectionQuery) -> SectionValue {
    section_volume_with(q, GAP_TOL)
}

/// `A(a, t)`: zero outside the support, otherwise the raw sum when all
/// coordinates are at least `gap_tol` apart and the confluent evaluation
/// when some are closer.
pub fn section_volume_with(q: &SectionQuery, gap_tol: f64) -> SectionValue {
    let dir = &q.direction;
    let n = dir.dimension().get();
    let gap = min_gap(dir.coords());
    let zero = SectionValue {
        value: 0.0,
        branch: Branch::Zero,
        min_gap: gap,
    };
    if !q.t.is_finite() || q.t > dir.first() + TOUCH_TOL || q.t < dir.last() - TOUCH_TOL {
        return zero;
    }

    // A(a, t) = A(-a, -t): keep at most ⌊(n+1)/2⌋ live terms.
    let live = dir.coords().iter().filter(|&&c| c > q.t).count();
    let mirrored;
    let q = if live > (n + 1) / 2 {
        mirrored = q.mirrored();
        &mirrored
    } else {
        q
    };
    let dir = &q.direction;

    let touches_top = (q.t - dir.first()).abs() <= TOUCH_TOL;
    let touches_bottom = (q.t - dir.last()).abs() <= TOUCH_TOL;
    if touches_top || touches_bottom {
        // The hyperplane supports the simplex; only a whole facet has
        // positive (n-1)-volume.
        let knots = KnotConfiguration::from_direction(dir);
        let mult = knots.multiplicities();
        let facet = (touches_top && mult[mult.len() - 1] == n) || (touches_bottom && mult[0] == n);
        if !facet {
            return zero;
        }
        return SectionValue {
            value: confluent_eval(&knots, q.t),
            branch: Branch::Confluent,
            min_gap: gap,
        };
    }

    if gap > gap_tol {
        let value = dirksen_sum(dir.coords(), q.t, gap_tol)
            .expect("gaps were checked against gap_tol")
            .max(0.0);
        SectionValue {
            value,
            branch: Branch::RawSum,
            min_gap: gap,
        }
    } else {
        SectionValue {
            value: confluent_eval(&KnotConfiguration::from_direction(dir), q.t),
            branch: Branch::Confluent,
            min_gap: gap,
        }
    }
}

/// The literal alternating sum over coordinates `a_j > t`.
pub fn dirksen_sum(coords: &[f64], t: f64, gap_tol: f64) -> Result<f64> {
    let n = coords.len().checked_sub(1).filter(|&n| n >= 2).ok_or(Error::DimensionMismatch {
        expected: 3,
        got: coords.len(),
    })?;
    let mut sorted = coords.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let gap = min_gap(&sorted);
    if gap <= gap_tol {
        return Err(Error::NearCoincidentKnots { gap });
    }
    Ok(section_scale(n) * truncated_power_divdiff_distinct(&sorted, t, n - 1))
}

/// `A(a, t)` via the divided-difference recurrence; exact for repeated
/// coordinates.
pub fn confluent_eval(knots: &KnotConfiguration, t: f64) -> f64 {
    let n = knots.n();
    section_scale(n) * knots.divdiff(t, n - 1).max(0.0)
}

/// Closed form of `A(a^(k), t)`.
///
/// Zero for `t` outside `[-√(k/((n-k+1)(n+1))), √((n-k+1)/(k(n+1)))]`. At
/// an end point the formula gives the volume of the facet lying in the
/// hyperplane when there is one (`k = n` at the top, `k = 1` at the bottom)
/// and zero otherwise.
pub fn axis_section_volume(n: Dimension, k: usize, t: f64) -> Result<f64> {
    let m = n.get();
    if !(1..=m).contains(&k) {
        return Err(Error::OutOfRange {
            what: "k",
            value: k as f64,
        });
    }
    let (nf, kf) = (m as f64, k as f64);
    let upper = ((nf - kf + 1.0) / (kf * (nf + 1.0))).sqrt();
    let lower = (kf / ((nf - kf + 1.0) * (nf + 1.0))).sqrt();
    if !(t >= -lower - TOUCH_TOL && t <= upper + TOUCH_TOL) {
        return Ok(0.0);
    }
    let t = t.clamp(-lower, upper);
    let inv_gap = (kf * (nf - kf + 1.0) / (nf + 1.0)).sqrt();
    Ok(section_scale(m)
        * binomial(m - 1, k - 1)
        * inv_gap.powi(m as i32)
        * (t + lower).powi(k as i32 - 1)
        * (upper - t).powi((m - k) as i32))
}
