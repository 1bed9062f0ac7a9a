//! Known extremal directions in dimensions 2 and 3 and the critical family
//! used to derive them.
//!
//! Regimes for the maximum of `A(·, t)`, `t ≥ 0`:
//!
//! * `n = 2`: `a^[t]` on `[0, 1/√6]`, `a^{t}` on `(1/√6, 5/(4√6)]`, `a^(1)`
//!   beyond.
//! * `n = 3`: `a^[t]` on `[0, 1/(2√3)]`, `a^{t}` on `(1/(2√3), t₁]`, `a^(2)`
//!   on `(t₁, t₀]`, `a^(1)` beyond.

use serde::{Serialize, Serializer};

use super::roots::brent;
use crate::error::{Error, Result};
use crate::section::{axis_section_volume, section_volume};
use crate::simplex::{axis_direction, canonicalize, CanonicalDirection, Dimension, SectionQuery};

/// Distance within which `t` is considered to sit exactly on a regime
/// boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyLabel {
    /// `a^(k)`, towards the centroid of a `(k-1)`-face.
    Axis(usize),
    /// `a^[t]`, the family through Webb's central maximizer.
    Bracket,
    /// `a^{t}`, the family after the first discontinuity.
    Brace,
    Other,
}

impl std::fmt::Display for FamilyLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FamilyLabel::Axis(k) => write!(f, "a^({k})"),
            FamilyLabel::Bracket => f.write_str("a^[t]"),
            FamilyLabel::Brace => f.write_str("a^{t}"),
            FamilyLabel::Other => f.write_str("other"),
        }
    }
}

impl Serialize for FamilyLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyPrediction {
    pub direction: CanonicalDirection,
    pub value: f64,
    pub label: FamilyLabel,
    /// Set when `t` is on a regime boundary; names the right-hand regime,
    /// whose direction ties with this one.
    pub tie_with: Option<FamilyLabel>,
}

pub fn n2_first_boundary() -> f64 {
    1.0 / 6f64.sqrt()
}

pub fn n2_second_boundary() -> f64 {
    1.25 / 6f64.sqrt()
}

pub fn n3_first_boundary() -> f64 {
    1.0 / (2.0 * 3f64.sqrt())
}

/// `t₁ = (√6 + 1)/10`.
pub fn t1_n3() -> f64 {
    (6f64.sqrt() + 1.0) / 10.0
}

/// `t₀ = (9 + 4√(16 - 6√3)) / (2(3√3 + 16))`.
pub fn t0_n3() -> f64 {
    let s3 = 3f64.sqrt();
    (9.0 + 4.0 * (16.0 - 6.0 * s3).sqrt()) / (2.0 * (3.0 * s3 + 16.0))
}

fn dim(n: usize) -> Dimension {
    Dimension::new(n).expect("dimension 2 or 3")
}

fn direction(n: usize, raw: &[f64]) -> CanonicalDirection {
    canonicalize(dim(n), raw).expect("family directions are nonzero")
}

fn axis_prediction(n: usize, k: usize, t: f64) -> FamilyPrediction {
    FamilyPrediction {
        direction: axis_direction(dim(n), k).expect("valid k"),
        value: axis_section_volume(dim(n), k, t).expect("valid k"),
        label: FamilyLabel::Axis(k),
        tie_with: None,
    }
}

fn bracket_n2(t: f64) -> FamilyPrediction {
    let r = (2.0 - 3.0 * t * t).sqrt();
    FamilyPrediction {
        direction: direction(2, &[0.5 * (r - t), t, -0.5 * (t + r)]),
        value: 3f64.sqrt() / r,
        label: FamilyLabel::Bracket,
        tie_with: None,
    }
}

fn brace_n2(t: f64) -> FamilyPrediction {
    let a1 = t + (t * t - 1.0 / 6.0).max(0.0).sqrt();
    let w = 0.5 * (2.0 - 3.0 * a1 * a1).max(0.0).sqrt();
    FamilyPrediction {
        direction: direction(2, &[a1, -0.5 * a1 + w, -0.5 * a1 - w]),
        value: 1.0 / (2.0 * 3f64.sqrt() * a1),
        label: FamilyLabel::Brace,
        tie_with: None,
    }
}

fn bracket_n3(t: f64) -> FamilyPrediction {
    let r = 0.5 * (2.0 - 8.0 * t * t).sqrt();
    FamilyPrediction {
        direction: direction(3, &[r - t, t, t, -(r + t)]),
        value: 1.0 / (2.0 - 8.0 * t * t).sqrt(),
        label: FamilyLabel::Bracket,
        tie_with: None,
    }
}

/// The critical family in `n = 3` with two equal leading coordinates `a₁`:
/// `a = (a₁, a₁, b₊, b₋)`, `b± = -a₁ ± ½√(2 - 8a₁²)`.
pub fn brace_direction_n3(a1: f64) -> CanonicalDirection {
    let w = 0.5 * (2.0 - 8.0 * a1 * a1).max(0.0).sqrt();
    direction(3, &[a1, a1, -a1 + w, -a1 - w])
}

fn brace_n3(t: f64) -> Result<FamilyPrediction> {
    let a1 = phi_inverse_n3(t)?;
    Ok(FamilyPrediction {
        direction: brace_direction_n3(a1),
        value: psi_volume_n3(a1),
        label: FamilyLabel::Brace,
        tie_with: None,
    })
}

fn check_t(t: f64, top: f64) -> Result<()> {
    if (0.0..top).contains(&t) {
        Ok(())
    } else {
        Err(Error::OutOfRange { what: "t", value: t })
    }
}

/// Every regime prediction that applies at `t`: one, or two on a boundary
/// (left regime first).
pub(crate) fn regimes_n2(t: f64) -> Result<Vec<FamilyPrediction>> {
    check_t(t, (2.0f64 / 3.0).sqrt())?;
    let (b1, b2) = (n2_first_boundary(), n2_second_boundary());
    let mut out = Vec::with_capacity(2);
    if t <= b1 + BOUNDARY_TOL {
        out.push(bracket_n2(t));
    }
    if t >= b1 - BOUNDARY_TOL && t <= b2 + BOUNDARY_TOL {
        out.push(brace_n2(t));
    }
    if t >= b2 - BOUNDARY_TOL {
        out.push(axis_prediction(2, 1, t));
    }
    link_ties(&mut out);
    Ok(out)
}

pub(crate) fn regimes_n3(t: f64) -> Result<Vec<FamilyPrediction>> {
    check_t(t, 3f64.sqrt() / 2.0)?;
    let (b1, t1, t0) = (n3_first_boundary(), t1_n3(), t0_n3());
    let mut out = Vec::with_capacity(2);
    if t <= b1 + BOUNDARY_TOL {
        out.push(bracket_n3(t));
    }
    if t >= b1 - BOUNDARY_TOL && t <= t1 + BOUNDARY_TOL {
        out.push(brace_n3(t.clamp(b1, t1))?);
    }
    if t >= t1 - BOUNDARY_TOL && t <= t0 + BOUNDARY_TOL {
        out.push(axis_prediction(3, 2, t));
    }
    if t >= t0 - BOUNDARY_TOL {
        out.push(axis_prediction(3, 1, t));
    }
    link_ties(&mut out);
    Ok(out)
}

fn link_ties(out: &mut [FamilyPrediction]) {
    if out.len() == 2 {
        out[0].tie_with = Some(out[1].label);
    }
}

/// Predicted maximizer of `A(·, t)` for `n = 2`. On a regime boundary the
/// left regime is returned with `tie_with` set.
pub fn maximizer_family_n2(t: f64) -> Result<FamilyPrediction> {
    Ok(regimes_n2(t)?.swap_remove(0))
}

/// Predicted maximizer of `A(·, t)` for `n = 3`.
pub fn maximizer_family_n3(t: f64) -> Result<FamilyPrediction> {
    Ok(regimes_n3(t)?.swap_remove(0))
}

/// `t₊(a₁)`, the distance at which `(a₁, a₁, b₊, b₋)` is critical; increasing
/// from `1/(2√3)` to `t₁` on `[1/(2√3), ½]`.
pub fn t_plus_n3(a1: f64) -> f64 {
    let q = a1 * a1;
    (a1 * (5.0 - 12.0 * q) + 0.5 * (12.0 * q - 1.0) * (28.0 * q - 1.0).max(0.0).sqrt()) / (1.0 + 36.0 * q)
}

/// `t₋(a₁)`, the companion root; decreasing on `[1/(2√3), ½]`.
pub fn t_minus_n3(a1: f64) -> f64 {
    let q = a1 * a1;
    (a1 * (5.0 - 12.0 * q) - 0.5 * (12.0 * q - 1.0) * (28.0 * q - 1.0).max(0.0).sqrt()) / (1.0 + 36.0 * q)
}

/// `F(a₁, t) = 4[a₁(8a₁² - 1) + t(1 - 4a₁²) - 4t²a₁] / (12a₁² - 1)²`, the
/// section volume of `(a₁, a₁, b₊, b₋)` at distance `t`. Singular at
/// `a₁ = 1/(2√3)`.
pub fn critical_f_n3(a1: f64, t: f64) -> f64 {
    let q = a1 * a1;
    4.0 * (a1 * (8.0 * q - 1.0) + t * (1.0 - 4.0 * q) - 4.0 * t * t * a1) / (12.0 * q - 1.0).powi(2)
}

/// `F(a₁, t₊(a₁)) = 4[a₁(5 + 52a₁²) - (2a₁² + ½)√(28a₁² - 1)] / (1 + 36a₁²)²`,
/// regular on the whole interval.
pub fn psi_volume_n3(a1: f64) -> f64 {
    let q = a1 * a1;
    4.0 * (a1 * (5.0 + 52.0 * q) - (2.0 * q + 0.5) * (28.0 * q - 1.0).max(0.0).sqrt())
        / (1.0 + 36.0 * q).powi(2)
}

/// Solves `t₊(a₁) = t` on `[1/(2√3), ½]`.
pub fn phi_inverse_n3(t: f64) -> Result<f64> {
    let (lo, hi) = (n3_first_boundary(), 0.5);
    if (t - t_plus_n3(lo)).abs() <= BOUNDARY_TOL {
        return Ok(lo);
    }
    if (t - t_plus_n3(hi)).abs() <= BOUNDARY_TOL {
        return Ok(hi);
    }
    brent(|a| t_plus_n3(a) - t, lo, hi, 1e-15, "t_plus(a1) = t")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalFamilyN3 {
    pub a1: f64,
    pub t_plus: f64,
    pub t_minus: f64,
    /// `F(a₁, t₊(a₁))`.
    pub f_value: f64,
}

pub fn critical_family_n3(a1: f64) -> Result<CriticalFamilyN3> {
    let lo = n3_first_boundary();
    if !(a1 >= lo - BOUNDARY_TOL && a1 <= 0.5 + BOUNDARY_TOL) {
        return Err(Error::OutOfRange { what: "a1", value: a1 });
    }
    let t_plus = t_plus_n3(a1);
    // F is 0/0 at the left end; the closed form is exact there.
    let f_value = if (12.0 * a1 * a1 - 1.0).abs() > 1e-3 {
        critical_f_n3(a1, t_plus)
    } else {
        psi_volume_n3(a1)
    };
    Ok(CriticalFamilyN3 {
        a1,
        t_plus,
        t_minus: t_minus_n3(a1),
        f_value,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscontinuityLimits {
    pub n: usize,
    pub boundary: f64,
    /// `A` at the boundary along the left regime's direction.
    pub value_at: f64,
    /// `lim_{t↓boundary}` of the right regime's section volume.
    pub right_limit: f64,
    /// `(t, A)` samples the limit was extrapolated from.
    pub samples: Vec<(f64, f64)>,
}

/// The jump of the maximal section volume at the first regime boundary.
///
/// The right regime is evaluated geometrically at `boundary + 10⁻ᵏ`,
/// `k = 4, …, 8`, and extrapolated to the boundary by a polynomial in
/// `√(t - boundary)`, since the family direction moves like a square root.
pub fn discontinuity_limits(n: usize) -> Result<DiscontinuityLimits> {
    let (boundary, left, right): (f64, usize, fn(f64) -> Result<FamilyPrediction>) = match n {
        2 => (n2_first_boundary(), 2, |t| Ok(brace_n2(t))),
        3 => (n3_first_boundary(), 3, brace_n3),
        _ => {
            return Err(Error::InvalidDimension { n, min: 2, max: 3 });
        }
    };
    let value_at = section_volume(&SectionQuery::new(axis_direction(dim(n), left)?, boundary)).value;
    let mut samples = Vec::new();
    for k in 4..=8 {
        let t = boundary + 10f64.powi(-k);
        let dir = right(t)?.direction;
        samples.push((t, section_volume(&SectionQuery::new(dir, t)).value));
    }
    let xs: Vec<f64> = samples.iter().map(|(t, _)| (t - boundary).sqrt()).collect();
    let ys: Vec<f64> = samples.iter().map(|&(_, v)| v).collect();
    Ok(DiscontinuityLimits {
        n,
        boundary,
        value_at,
        right_limit: neville_at_zero(&xs, &ys),
        samples,
    })
}

fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let m = p.len();
    for level in 1..m {
        for i in 0..m - level {
            let (xi, xj) = (xs[i], xs[i + level]);
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    }
    p[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slice::{slice_polytope, slice_volume_exact};

    fn geometric(p: &FamilyPrediction, t: f64) -> f64 {
        slice_volume_exact(&slice_polytope(&SectionQuery::new(p.direction.clone(), t))).unwrap()
    }

    #[test]
    fn n2_webb_endpoint() {
        let p = maximizer_family_n2(0.0).unwrap();
        let s = 0.5f64.sqrt();
        assert!((p.direction.coords()[0] - s).abs() < 1e-15);
        assert!(p.direction.coords()[1].abs() < 1e-15);
        assert!((p.value - 1.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(p.label, FamilyLabel::Bracket);
        assert_eq!(p.tie_with, None);
    }

    #[test]
    fn n2_brace_regime() {
        let p = maximizer_family_n2(0.45).unwrap();
        assert_eq!(p.label, FamilyLabel::Brace);
        let a1 = 0.45 + (0.2025f64 - 1.0 / 6.0).sqrt();
        assert!((a1 - 0.63930).abs() < 1e-5);
        assert!((p.direction.first() - a1).abs() < 1e-14);
        assert!((p.value - 1.0 / (2.0 * 3f64.sqrt() * a1)).abs() < 1e-15);
        assert!((geometric(&p, 0.45) - p.value).abs() < 1e-12);
    }

    #[test]
    fn n2_vertex_regime() {
        let p = maximizer_family_n2(0.52).unwrap();
        assert_eq!(p.label, FamilyLabel::Axis(1));
        let expected = 2.0 * 2f64.sqrt() / 3.0 - 2.0 * 0.52 / 3f64.sqrt();
        assert!((p.value - expected).abs() < 1e-14);
        assert!(maximizer_family_n2(-0.1).is_err());
        assert!(maximizer_family_n2(0.9).is_err());
    }

    #[test]
    fn n2_boundaries_flag_ties() {
        let p = maximizer_family_n2(n2_first_boundary()).unwrap();
        assert_eq!(p.label, FamilyLabel::Bracket);
        assert_eq!(p.tie_with, Some(FamilyLabel::Brace));
        assert!((p.value - 2f64.sqrt()).abs() < 1e-12);
        let p = maximizer_family_n2(n2_second_boundary()).unwrap();
        assert_eq!(p.label, FamilyLabel::Brace);
        assert_eq!(p.tie_with, Some(FamilyLabel::Axis(1)));
        // The family runs into a^(1) continuously.
        let a1 = axis_direction(dim(2), 1).unwrap();
        assert!(p.direction.distance(&a1) < 1e-6);
    }

    #[test]
    fn n2_family_values_are_geometric() {
        for i in 0..80 {
            let t = i as f64 * 0.01;
            let p = maximizer_family_n2(t).unwrap();
            assert!((geometric(&p, t) - p.value).abs() < 1e-11, "t={t}");
        }
    }

    #[test]
    fn n3_constants() {
        assert!((t1_n3() - 0.344_949).abs() < 1e-6);
        assert!((t0_n3() - 0.435_744_861_721_723).abs() < 1e-14);
    }

    #[test]
    fn n3_regimes() {
        let p = maximizer_family_n3(0.30).unwrap();
        assert_eq!(p.label, FamilyLabel::Brace);
        let a1 = phi_inverse_n3(0.30).unwrap();
        assert!((p.value - psi_volume_n3(a1)).abs() < 1e-15);

        let p = maximizer_family_n3(0.40).unwrap();
        assert_eq!(p.label, FamilyLabel::Axis(2));
        assert!((p.value - 0.18).abs() < 1e-14);

        let p = maximizer_family_n3(0.50).unwrap();
        assert_eq!(p.label, FamilyLabel::Axis(1));
        let expected = 3.0 * 3f64.sqrt() / 8.0 * (3f64.sqrt() / 2.0 - 0.5).powi(2);
        assert!((p.value - expected).abs() < 1e-14);

        let p = maximizer_family_n3(0.0).unwrap();
        assert!((p.value - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(maximizer_family_n3(t1_n3()).unwrap().tie_with, Some(FamilyLabel::Axis(2)));
        assert_eq!(maximizer_family_n3(t0_n3()).unwrap().tie_with, Some(FamilyLabel::Axis(1)));
    }

    #[test]
    fn n3_family_values_are_geometric() {
        for i in 0..86 {
            let t = i as f64 * 0.01;
            let p = maximizer_family_n3(t).unwrap();
            assert!((geometric(&p, t) - p.value).abs() < 1e-11, "t={t}: {} vs {}", geometric(&p, t), p.value);
        }
    }

    #[test]
    fn critical_family_endpoints() {
        let lo = n3_first_boundary();
        let c = critical_family_n3(lo).unwrap();
        assert!((c.t_plus - lo).abs() < 1e-15);
        assert!((c.t_minus - lo).abs() < 1e-15);
        assert!((c.f_value - 5.0 * 3f64.sqrt() / 18.0).abs() < 1e-14);

        let c = critical_family_n3(0.5).unwrap();
        assert!((c.t_plus - t1_n3()).abs() < 1e-15);
        assert!((c.t_minus + (6f64.sqrt() - 1.0) / 10.0).abs() < 1e-15);
        assert!((c.f_value - (0.5 - 2.0 * c.t_plus * c.t_plus)).abs() < 1e-14);
        assert!(critical_family_n3(0.6).is_err());
        assert!(critical_family_n3(0.2).is_err());
    }

    #[test]
    fn f_at_half_is_a2_section() {
        for i in 0..20 {
            let t = -0.4 + 0.04 * i as f64;
            assert!((critical_f_n3(0.5, t) - (0.5 - 2.0 * t * t)).abs() < 1e-14);
        }
    }

    #[test]
    fn psi_volume_sign_matches_t_plus_branch() {
        // The minus-sign closed form is F on the t₊ branch; the plus-sign
        // variant is F on the t₋ branch.
        let lo = n3_first_boundary();
        for i in 1..=40 {
            let a1 = lo + (0.5 - lo) * i as f64 / 40.0;
            let q = a1 * a1;
            let plus = 4.0 * (a1 * (5.0 + 52.0 * q) + (2.0 * q + 0.5) * (28.0 * q - 1.0).sqrt())
                / (1.0 + 36.0 * q).powi(2);
            assert!((psi_volume_n3(a1) - critical_f_n3(a1, t_plus_n3(a1))).abs() < 1e-9, "a1={a1}");
            assert!((plus - critical_f_n3(a1, t_minus_n3(a1))).abs() < 1e-9, "a1={a1}");
            let t = t_plus_n3(a1);
            let geo = slice_volume_exact(&slice_polytope(&SectionQuery::new(brace_direction_n3(a1), t))).unwrap();
            assert!((geo - psi_volume_n3(a1)).abs() < 1e-10, "a1={a1}");
        }
    }

    #[test]
    fn t_plus_increasing_t_minus_decreasing() {
        let lo = n3_first_boundary();
        let m = 2000;
        let grid: Vec<f64> = (0..=m).map(|i| lo + (0.5 - lo) * i as f64 / m as f64).collect();
        for w in grid.windows(2) {
            assert!(t_plus_n3(w[1]) >= t_plus_n3(w[0]));
            assert!(t_minus_n3(w[1]) <= t_minus_n3(w[0]));
        }
    }

    #[test]
    fn discontinuities() {
        let d2 = discontinuity_limits(2).unwrap();
        assert!((d2.value_at - 2f64.sqrt()).abs() < 1e-10);
        assert!((d2.right_limit - 0.5f64.sqrt()).abs() < 1e-4, "{}", d2.right_limit);
        let d3 = discontinuity_limits(3).unwrap();
        assert!((d3.value_at - 3f64.sqrt() / 2.0).abs() < 1e-10);
        assert!((d3.right_limit - 5.0 * 3f64.sqrt() / 18.0).abs() < 1e-4, "{}", d3.right_limit);
        assert!((d3.right_limit / d3.value_at - 5.0 / 9.0).abs() < 1e-4);
        assert!(discontinuity_limits(4).is_err());
    }
}
