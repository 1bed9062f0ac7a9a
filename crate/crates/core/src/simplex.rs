//! The regular simplex `Δⁿ = conv(e₁, …, e_{n+1}) ⊂ R^{n+1}` and normalized
//! slicing directions.
//!
//! A slicing direction is a unit vector orthogonal to `(1, …, 1)`, so the
//! hyperplane `⟨a, x⟩ = t` lies at signed distance `t` from the centroid.
//! Section volumes are invariant under coordinate permutations, which is why
//! every direction is stored sorted in descending order together with the
//! permutation that produced that order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest dimension accepted by [`Dimension::new`].
pub const MAX_DIMENSION: usize = 20;

/// Tolerance for the unit-norm and sum-zero invariants.
pub const INVARIANT_TOL: f64 = 1e-12;

/// Sum drift beyond which a direction is marked as repaired.
pub const SUM_REPAIR_TOL: f64 = 1e-9;

/// Norm below which a direction is treated as the zero vector.
pub const ZERO_NORM_TOL: f64 = 1e-12;

/// Rounding slack below which sum and norm are not re-normalized.
const CANONICAL_SLACK: f64 = 1e-14;

/// Simplex dimension `n`; the ambient space is `R^{n+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Dimension(usize);

impl Dimension {
    pub fn new(n: usize) -> Result<Self> {
        if (2..=MAX_DIMENSION).contains(&n) {
            Ok(Self(n))
        } else {
            Err(Error::InvalidDimension {
                n,
                min: 2,
                max: MAX_DIMENSION,
            })
        }
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// Number of ambient coordinates, `n + 1`.
    pub fn ambient(self) -> usize {
        self.0 + 1
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// A unit, sum-zero direction with coordinates sorted in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalDirection {
    n: Dimension,
    coords: Vec<f64>,
    /// `perm[i]` is the (0-based) input position that ended up at position `i`.
    perm: Vec<usize>,
    negated: bool,
    sum_repaired: bool,
}

impl CanonicalDirection {
    pub fn dimension(&self) -> Dimension {
        self.n
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// True when this value was produced by [`CanonicalDirection::negate`].
    pub fn negated(&self) -> bool {
        self.negated
    }

    /// True when the raw input was further than [`SUM_REPAIR_TOL`] from the
    /// sum-zero hyperplane and had to be projected onto it.
    pub fn sum_repaired(&self) -> bool {
        self.sum_repaired
    }

    pub fn first(&self) -> f64 {
        self.coords[0]
    }

    pub fn last(&self) -> f64 {
        self.coords[self.coords.len() - 1]
    }

    /// The canonical form of `-a`: coordinates reversed and negated, which keeps
    /// them sorted. The permutation is carried along.
    pub fn negate(&self) -> Self {
        Self {
            n: self.n,
            coords: self.coords.iter().rev().map(|c| -c).collect(),
            perm: self.perm.iter().rev().copied().collect(),
            negated: !self.negated,
            sum_repaired: self.sum_repaired,
        }
    }

    /// Euclidean distance between the sorted coordinate vectors, i.e. the
    /// distance between the two directions modulo coordinate permutations.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n, "directions of different dimensions");
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Builds a direction from coordinates that already satisfy every
    /// invariant, without renormalizing. Used for closed-form directions.
    pub(crate) fn from_sorted_unchecked(n: Dimension, coords: Vec<f64>) -> Self {
        debug_assert_eq!(coords.len(), n.ambient());
        debug_assert!(coords.windows(2).all(|w| w[0] >= w[1]));
        let perm = (0..coords.len()).collect();
        Self {
            n,
            coords,
            perm,
            negated: false,
            sum_repaired: false,
        }
    }
}

impl Serialize for CanonicalDirection {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CanonicalDirection {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<f64>::deserialize(d)?;
        let n = Dimension::new(raw.len().saturating_sub(1)).map_err(serde::de::Error::custom)?;
        canonicalize(n, &raw).map_err(serde::de::Error::custom)
    }
}

/// A hyperplane `{⟨a, x⟩ = t}` at signed distance `t` from the centroid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionQuery {
    pub direction: CanonicalDirection,
    pub t: f64,
}

impl SectionQuery {
    pub fn new(direction: CanonicalDirection, t: f64) -> Self {
        Self { direction, t }
    }

    pub fn dimension(&self) -> Dimension {
        self.direction.dimension()
    }

    /// The same hyperplane described by `(-a, -t)`.
    pub fn mirrored(&self) -> Self {
        Self {
            direction: self.direction.negate(),
            t: -self.t,
        }
    }
}

/// Metric constants of `Δⁿ` (side length `√2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimplexConstants {
    pub n: Dimension,
    pub side_length: f64,
    pub height: f64,
    pub volume: f64,
    /// Distance from the centroid to a vertex.
    pub vertex_distance: f64,
    /// `(n-1)`-volume of a facet.
    pub facet_volume: f64,
}

impl SimplexConstants {
    /// Distance from the centroid to the centroid of a `(k-1)`-face,
    /// `√((n-k+1) / (k(n+1)))`.
    pub fn k_face_distance(&self, k: usize) -> Result<f64> {
        let n = self.n.get();
        if !(1..=n).contains(&k) {
            return Err(Error::OutOfRange {
                what: "k",
                value: k as f64,
            });
        }
        Ok(k_face_distance(n, k))
    }
}

pub(crate) fn k_face_distance(n: usize, k: usize) -> f64 {
    let (n, k) = (n as f64, k as f64);
    ((n - k + 1.0) / (k * (n + 1.0))).sqrt()
}

pub(crate) fn factorial(m: usize) -> f64 {
    (1..=m).map(|i| i as f64).product()
}

pub(crate) fn binomial(m: usize, k: usize) -> f64 {
    if k > m {
        return 0.0;
    }
    let k = k.min(m - k);
    (0..k).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

pub fn simplex_constants(n: Dimension) -> SimplexConstants {
    let m = n.get();
    let nf = m as f64;
    SimplexConstants {
        n,
        side_length: std::f64::consts::SQRT_2,
        height: ((nf + 1.0) / nf).sqrt(),
        volume: (nf + 1.0).sqrt() / factorial(m),
        vertex_distance: (nf / (nf + 1.0)).sqrt(),
        facet_volume: nf.sqrt() / factorial(m - 1),
    }
}

/// Projects `raw` onto the sum-zero hyperplane, normalizes it and sorts it in
/// descending order. Never flips the sign.
pub fn canonicalize(n: Dimension, raw: &[f64]) -> Result<CanonicalDirection> {
    let len = n.ambient();
    if raw.len() != len {
        return Err(Error::DimensionMismatch {
            expected: len,
            got: raw.len(),
        });
    }
    if raw.iter().any(|x| !x.is_finite()) {
        return Err(Error::OutOfRange {
            what: "direction coordinate",
            value: raw.iter().copied().find(|x| !x.is_finite()).unwrap_or(f64::NAN),
        });
    }

    let raw_norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    let sum: f64 = raw.iter().sum();
    let sum_repaired = sum.abs() > SUM_REPAIR_TOL * raw_norm.max(1.0);

    let mut v = raw.to_vec();
    // Vectors that already satisfy the invariants to within rounding are left
    // bit-for-bit alone so that canonicalization is idempotent.
    if sum.abs() > CANONICAL_SLACK * raw_norm.max(1.0) {
        let mean = sum / len as f64;
        v.iter_mut().for_each(|x| *x -= mean);
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm <= ZERO_NORM_TOL {
        return Err(Error::ZeroVector);
    }
    if (norm - 1.0).abs() > CANONICAL_SLACK {
        v.iter_mut().for_each(|x| *x /= norm);
    }

    let mut perm: Vec<usize> = (0..len).collect();
    perm.sort_by(|&i, &j| v[j].total_cmp(&v[i]).then(i.cmp(&j)));
    let coords = perm.iter().map(|&i| v[i]).collect();

    Ok(CanonicalDirection {
        n,
        coords,
        perm,
        negated: false,
        sum_repaired,
    })
}

/// The unit vector `a^(k)` from the centroid towards the centroid of the face
/// `conv(e₁, …, e_k)`: `k` equal positive coordinates followed by `n-k+1`
/// equal negative ones.
pub fn axis_direction(n: Dimension, k: usize) -> Result<CanonicalDirection> {
    let m = n.get();
    if !(1..=m).contains(&k) {
        return Err(Error::OutOfRange {
            what: "k",
            value: k as f64,
        });
    }
    let upper = k_face_distance(m, k);
    let lower = -((k as f64) / ((m - k + 1) as f64 * (m + 1) as f64)).sqrt();
    let coords = (0..=m).map(|j| if j < k { upper } else { lower }).collect();
    Ok(CanonicalDirection::from_sorted_unchecked(n, coords))
}

/// Largest first coordinate compatible with a given second coordinate `a₂ ≥ 0`
/// of a sorted unit sum-zero vector:
/// `ψ(a₂) = √((n-1)/n) · √(1 - (n+1)/n · a₂²) - a₂/n`.
///
/// `ψ` is decreasing and an involution on `[0, √((n-1)/n)]`.
pub fn psi_bound(n: Dimension, a2: f64) -> Result<f64> {
    let nf = n.get() as f64;
    let s = 1.0 - (nf + 1.0) / nf * a2 * a2;
    if !a2.is_finite() || s < -INVARIANT_TOL {
        return Err(Error::OutOfRange {
            what: "a2",
            value: a2,
        });
    }
    Ok(((nf - 1.0) / nf).sqrt() * s.max(0.0).sqrt() - a2 / nf)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(n: usize) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn rejects_small_and_large_dimensions() {
        assert!(Dimension::new(1).is_err());
        assert!(Dimension::new(0).is_err());
        assert!(Dimension::new(MAX_DIMENSION + 1).is_err());
        assert_eq!(Dimension::new(2).unwrap().ambient(), 3);
    }

    #[test]
    fn canonical_input_is_kept() {
        let s = 0.5f64.sqrt();
        let d = canonicalize(dim(2), &[s, 0.0, -s]).unwrap();
        assert!((d.coords()[0] - 0.70711).abs() < 1e-5);
        assert_eq!(d.coords()[1], 0.0);
        assert_eq!(d.perm(), &[0, 1, 2]);
        assert!(!d.negated());
    }

    #[test]
    fn permutation_is_recorded() {
        let d = canonicalize(dim(2), &[-1.0, 1.0, 0.0]).unwrap();
        let s = 0.5f64.sqrt();
        assert!((d.coords()[0] - s).abs() < 1e-15);
        assert!(d.coords()[1].abs() < 1e-15);
        assert!((d.coords()[2] + s).abs() < 1e-15);
        // 1-based (2, 3, 1)
        assert_eq!(d.perm(), &[1, 2, 0]);
    }

    #[test]
    fn unnormalized_input_matches_axis_direction() {
        let d = canonicalize(dim(3), &[2.0, 2.0, 2.0, -6.0]).unwrap();
        let axis = axis_direction(dim(3), 3).unwrap();
        assert!(d.distance(&axis) < 1e-15);
        let expected = 1.0 / (2.0 * 3f64.sqrt());
        assert!((d.coords()[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn zero_and_mismatched_inputs_fail() {
        assert_eq!(canonicalize(dim(2), &[1.0, 1.0, 1.0]), Err(Error::ZeroVector));
        assert!(matches!(
            canonicalize(dim(2), &[1.0, -1.0]),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn sum_drift_is_flagged() {
        assert!(!canonicalize(dim(2), &[1.0, 0.0, -1.0 + 1e-12]).unwrap().sum_repaired());
        assert!(canonicalize(dim(2), &[1.0, 0.0, -0.5]).unwrap().sum_repaired());
    }

    #[test]
    fn axis_directions_match_known_vectors() {
        let a = axis_direction(dim(2), 1).unwrap();
        let s6 = 6f64.sqrt();
        for (x, y) in a.coords().iter().zip([2.0 / s6, -1.0 / s6, -1.0 / s6]) {
            assert!((x - y).abs() < 1e-15);
        }
        let b = axis_direction(dim(3), 2).unwrap();
        for (x, y) in b.coords().iter().zip([0.5, 0.5, -0.5, -0.5]) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!(axis_direction(dim(3), 0).is_err());
        assert!(axis_direction(dim(3), 4).is_err());
    }

    #[test]
    fn axis_direction_mirror_family() {
        for n in 2..=10 {
            for k in 1..=n {
                let a = axis_direction(dim(n), k).unwrap();
                let b = axis_direction(dim(n), n - k + 1).unwrap().negate();
                assert!(a.distance(&b) < 1e-14, "n={n} k={k}");
                let sum: f64 = a.coords().iter().sum();
                let norm: f64 = a.coords().iter().map(|x| x * x).sum();
                assert!(sum.abs() < INVARIANT_TOL);
                assert!((norm - 1.0).abs() < INVARIANT_TOL);
            }
        }
    }

    #[test]
    fn constants() {
        let c2 = simplex_constants(dim(2));
        assert!((c2.volume - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((c2.facet_volume - 2f64.sqrt()).abs() < 1e-15);
        let c3 = simplex_constants(dim(3));
        assert!((c3.vertex_distance - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((c3.facet_volume - 3f64.sqrt() / 2.0).abs() < 1e-15);
        let c4 = simplex_constants(dim(4));
        let d3 = c4.k_face_distance(3).unwrap();
        assert!((d3 - (2.0f64 / 15.0).sqrt()).abs() < 1e-15);
        assert!((d3 - 0.36515).abs() < 1e-5);
        assert!(c4.k_face_distance(5).is_err());
    }

    #[test]
    fn face_distances_are_decreasing() {
        for n in 2..=MAX_DIMENSION {
            let c = simplex_constants(dim(n));
            assert_eq!(c.k_face_distance(1).unwrap(), c.vertex_distance);
            let expected2 = ((n as f64 - 1.0) / (2.0 * (n as f64 + 1.0))).sqrt();
            assert!((c.k_face_distance(2).unwrap() - expected2).abs() < 1e-15);
            for k in 1..n {
                assert!(c.k_face_distance(k).unwrap() > c.k_face_distance(k + 1).unwrap());
            }
        }
    }

    #[test]
    fn psi_fixed_point_and_involution() {
        for n in 2..=12 {
            let d = dim(n);
            let nf = n as f64;
            let fixed = ((nf - 1.0) / (2.0 * (nf + 1.0))).sqrt();
            assert!((psi_bound(d, fixed).unwrap() - fixed).abs() < 1e-14);
            let top = ((nf - 1.0) / nf).sqrt();
            for i in 0..=50 {
                let a2 = top * i as f64 / 50.0;
                let back = psi_bound(d, psi_bound(d, a2).unwrap()).unwrap();
                assert!((back - a2).abs() < 1e-12, "n={n} a2={a2}");
            }
        }
        let p = psi_bound(dim(3), 0.0).unwrap();
        assert!((p - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((p - 0.81650).abs() < 1e-5);
        assert!(psi_bound(dim(3), 0.9).is_err());
    }

    #[test]
    fn direction_serializes_as_array() {
        let a = axis_direction(dim(2), 2).unwrap();
        let json = serde_json::to_string(&a).unwrap();
        assert!(json.starts_with('[') && json.ends_with(']'));
        let back: CanonicalDirection = serde_json::from_str(&json).unwrap();
        assert_eq!(back.coords(), a.coords());
    }
}
