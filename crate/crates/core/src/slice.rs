//! Exact geometric slicing of `Δⁿ`, used as an oracle independent of the
//! divided-difference formula.
//!
//! The slice `Δⁿ ∩ {⟨a, x⟩ = t}` is the polytope `{x ≥ 0, Σx = 1, ⟨a, x⟩ = t}`,
//! so every face of it is cut out by some coordinate hyperplanes `x_j = 0`.
//! Its volume is computed by recursive pyramid decomposition over those
//! faces, which needs no general convex hull.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::search::SumZeroFrame;
use crate::section::{section_volume, KnotConfiguration, MERGE_TOL, TOUCH_TOL};
use crate::simplex::{factorial, SectionQuery};

/// Largest `n` accepted by [`slice_volume_exact`].
pub const MAX_SLICE_DIMENSION: usize = 8;

/// Vertices closer than this are merged.
pub const VERTEX_MERGE_TOL: f64 = 1e-10;

/// Residual norm below which a direction counts as linearly dependent.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlicePolytope {
    pub n: usize,
    pub base_point: Vec<f64>,
    /// `n - 1` orthonormal vectors spanning `{Σx = 0, ⟨a, x⟩ = 0}`.
    pub frame: Vec<Vec<f64>>,
    pub vertices_ambient: Vec<Vec<f64>>,
    pub vertices_local: Vec<Vec<f64>>,
}

impl SlicePolytope {
    /// Affine dimension of the vertex set, or `None` when it is empty.
    pub fn hull_dimension(&self) -> Option<usize> {
        if self.vertices_ambient.is_empty() {
            return None;
        }
        let refs: Vec<&[f64]> = self.vertices_ambient.iter().map(Vec::as_slice).collect();
        Some(affine_basis(&refs).len())
    }

    /// True when the hyperplane touches the simplex in a set of dimension
    /// below `n - 1`.
    pub fn is_degenerate(&self) -> bool {
        self.hull_dimension().is_some_and(|d| d + 1 < self.n)
    }
}

/// Vertices of the slice: simplex vertices lying on the hyperplane and the
/// crossing points of edges whose end points lie on opposite sides.
pub fn slice_polytope(q: &SectionQuery) -> SlicePolytope {
    let a = q.direction.coords();
    let t = q.t;
    let len = a.len();
    let n = len - 1;

    let unit = |i: usize| {
        let mut v = vec![0.0; len];
        v[i] = 1.0;
        v
    };
    let mut verts: Vec<Vec<f64>> = Vec::new();
    let push = |v: Vec<f64>, verts: &mut Vec<Vec<f64>>| {
        if !verts.iter().any(|w| dist(w, &v) <= VERTEX_MERGE_TOL) {
            verts.push(v);
        }
    };
    let on_plane = |i: usize| (a[i] - t).abs() <= TOUCH_TOL;
    for i in 0..len {
        if on_plane(i) {
            push(unit(i), &mut verts);
        }
    }
    for i in 0..len {
        for j in i + 1..len {
            if on_plane(i) || on_plane(j) || (a[i] - t) * (a[j] - t) >= 0.0 {
                continue;
            }
            let lambda = (t - a[j]) / (a[i] - a[j]);
            let mut v = vec![0.0; len];
            v[i] = lambda;
            v[j] = 1.0 - lambda;
            push(v, &mut verts);
        }
    }

    let frame = slice_frame(a);
    let base_point = if verts.is_empty() {
        let c = 1.0 / len as f64;
        a.iter().map(|&ai| c + t * ai).collect()
    } else {
        centroid(verts.iter().map(Vec::as_slice))
    };
    let vertices_local = verts
        .iter()
        .map(|v| {
            let d: Vec<f64> = v.iter().zip(&base_point).map(|(x, b)| x - b).collect();
            frame.iter().map(|f| dot(f, &d)).collect()
        })
        .collect();

    SlicePolytope {
        n,
        base_point,
        frame,
        vertices_ambient: verts,
        vertices_local,
    }
}

fn slice_frame(a: &[f64]) -> Vec<Vec<f64>> {
    let n = a.len() - 1;
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for h in SumZeroFrame::new(n).basis() {
        let mut v = h.clone();
        let p = dot(&v, a);
        v.iter_mut().zip(a).for_each(|(x, ai)| *x -= p * ai);
        if let Some(u) = orthonormalize(v, &frame) {
            frame.push(u);
        }
        if frame.len() == n - 1 {
            break;
        }
    }
    frame
}

/// `(n-1)`-volume of the slice. Zero for an empty or lower-dimensional slice.
pub fn slice_volume_exact(p: &SlicePolytope) -> Result<f64> {
    if p.n > MAX_SLICE_DIMENSION {
        return Err(Error::UnsupportedDimension {
            n: p.n,
            max: MAX_SLICE_DIMENSION,
        });
    }
    let d = p.n - 1;
    match p.hull_dimension() {
        Some(dim) if dim == d => {}
        _ => return Ok(0.0),
    }
    let all = (1u64 << p.vertices_ambient.len()) - 1;
    let mut memo = HashMap::new();
    Ok(face_volume(&p.vertices_ambient, all, d, &mut memo))
}

fn members(mask: u64, verts: &[Vec<f64>]) -> Vec<&[f64]> {
    (0..verts.len())
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| verts[i].as_slice())
        .collect()
}

/// Volume of the `d`-dimensional face spanned by the vertices in `mask`, as a
/// sum of pyramids over its facets with apex at the face centroid.
fn face_volume(verts: &[Vec<f64>], mask: u64, d: usize, memo: &mut HashMap<u64, f64>) -> f64 {
    if d == 0 {
        return 1.0;
    }
    if let Some(&v) = memo.get(&mask) {
        return v;
    }
    let pts = members(mask, verts);
    let c = centroid(pts.iter().copied());
    let mut seen = Vec::new();
    let mut total = 0.0;
    for j in 0..verts[0].len() {
        let sub = (0..verts.len())
            .filter(|&i| mask >> i & 1 == 1 && verts[i][j].abs() <= TOUCH_TOL)
            .fold(0u64, |m, i| m | 1 << i);
        if sub == 0 || sub == mask || seen.contains(&sub) {
            continue;
        }
        seen.push(sub);
        let fpts = members(sub, verts);
        let basis = affine_basis(&fpts);
        if basis.len() + 1 != d {
            continue;
        }
        let mut r: Vec<f64> = c.iter().zip(fpts[0]).map(|(x, y)| x - y).collect();
        for b in &basis {
            let p = dot(&r, b);
            r.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
        }
        let h = norm(&r);
        total += h * face_volume(verts, sub, d - 1, memo) / d as f64;
    }
    memo.insert(mask, total);
    total
}

/// Volume from elementary formulas in local coordinates, available for
/// slices of dimension at most 3: segment length, shoelace area, or a
/// tetrahedral fan over facets found by brute-force supporting planes.
pub fn slice_volume_direct(p: &SlicePolytope) -> Option<f64> {
    let d = p.n - 1;
    if d > 3 {
        return None;
    }
    if p.hull_dimension() != Some(d) {
        return Some(0.0);
    }
    let pts = &p.vertices_local;
    Some(match d {
        1 => {
            let (lo, hi) = pts
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v[0]), hi.max(v[0])));
            hi - lo
        }
        2 => polygon_area(pts),
        _ => polyhedron_volume(pts),
    })
}

fn angular_order(pts: &[[f64; 2]]) -> Vec<usize> {
    let cx = pts.iter().map(|p| p[0]).sum::<f64>() / pts.len() as f64;
    let cy = pts.iter().map(|p| p[1]).sum::<f64>() / pts.len() as f64;
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&i, &j| {
        let ai = (pts[i][1] - cy).atan2(pts[i][0] - cx);
        let aj = (pts[j][1] - cy).atan2(pts[j][0] - cx);
        ai.total_cmp(&aj)
    });
    idx
}

fn polygon_area(pts: &[Vec<f64>]) -> f64 {
    let p2: Vec<[f64; 2]> = pts.iter().map(|v| [v[0], v[1]]).collect();
    let order = angular_order(&p2);
    let m = order.len();
    let twice: f64 = (0..m)
        .map(|k| {
            let (a, b) = (p2[order[k]], p2[order[(k + 1) % m]]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum();
    0.5 * twice.abs()
}

fn cross(u: [f64; 3], v: [f64; 3]) -> [f64; 3] {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

fn sub3(u: [f64; 3], v: [f64; 3]) -> [f64; 3] {
    [u[0] - v[0], u[1] - v[1], u[2] - v[2]]
}

fn dot3(u: [f64; 3], v: [f64; 3]) -> f64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

fn polyhedron_volume(pts: &[Vec<f64>]) -> f64 {
    let p: Vec<[f64; 3]> = pts.iter().map(|v| [v[0], v[1], v[2]]).collect();
    let m = p.len();
    let c = p.iter().fold([0.0; 3], |s, q| [s[0] + q[0], s[1] + q[1], s[2] + q[2]]);
    let c = [c[0] / m as f64, c[1] / m as f64, c[2] / m as f64];

    let mut facets: Vec<Vec<usize>> = Vec::new();
    let mut volume = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                let nrm = cross(sub3(p[j], p[i]), sub3(p[k], p[i]));
                let len = dot3(nrm, nrm).sqrt();
                if len <= RANK_TOL {
                    continue;
                }
                let nrm = [nrm[0] / len, nrm[1] / len, nrm[2] / len];
                let side: Vec<f64> = p.iter().map(|q| dot3(nrm, sub3(*q, p[i]))).collect();
                let pos = side.iter().any(|&s| s > RANK_TOL);
                let neg = side.iter().any(|&s| s < -RANK_TOL);
                if pos && neg {
                    continue;
                }
                let face: Vec<usize> = (0..m).filter(|&l| side[l].abs() <= RANK_TOL).collect();
                if facets.contains(&face) {
                    continue;
                }
                // Order the facet polygon in its own plane and fan it.
                let u = {
                    let e = sub3(p[j], p[i]);
                    let l = dot3(e, e).sqrt();
                    [e[0] / l, e[1] / l, e[2] / l]
                };
                let w = cross(nrm, u);
                let flat: Vec<[f64; 2]> = face
                    .iter()
                    .map(|&l| {
                        let d = sub3(p[l], p[i]);
                        [dot3(d, u), dot3(d, w)]
                    })
                    .collect();
                let order = angular_order(&flat);
                let f0 = p[face[order[0]]];
                for s in 1..order.len() - 1 {
                    let (f1, f2) = (p[face[order[s]]], p[face[order[s + 1]]]);
                    let det = dot3(sub3(f0, c), cross(sub3(f1, c), sub3(f2, c)));
                    volume += det.abs() / 6.0;
                }
                facets.push(face);
            }
        }
    }
    volume
}

/// Volumes of the two caps cut off by the hyperplane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapVolumes {
    /// `vol_n {x ∈ Δⁿ : ⟨a, x⟩ > t}`.
    pub upper: f64,
    /// `vol_n {x ∈ Δⁿ : ⟨a, x⟩ < t}`.
    pub lower: f64,
    pub total: f64,
}

/// Cap volumes from the divided difference of `(· - t)₊ⁿ`, the
/// antiderivative in `t` of the section formula.
pub fn cap_volume(q: &SectionQuery) -> CapVolumes {
    let dir = &q.direction;
    let n = dir.dimension().get();
    let total = ((n + 1) as f64).sqrt() / factorial(n);
    // Below every coordinate the divided difference is exactly one; it is
    // still evaluated so the identity is a real check of the recurrence.
    let upper = if q.t >= dir.first() {
        0.0
    } else {
        let knots = KnotConfiguration::new(dir.coords(), MERGE_TOL);
        (total * knots.divdiff(q.t, n)).clamp(0.0, total)
    };
    CapVolumes {
        upper,
        lower: total - upper,
        total,
    }
}

/// `|(upper(t-h) - upper(t+h)) / 2h - A(a, t)|`, which is small because the
/// section function is minus the derivative of the upper cap.
pub fn derivative_check(q: &SectionQuery, h: f64) -> Result<f64> {
    if !(1e-8..=1e-4).contains(&h) {
        return Err(Error::OutOfRange { what: "h", value: h });
    }
    let at = |t: f64| cap_volume(&SectionQuery::new(q.direction.clone(), t)).upper;
    let slope = (at(q.t - h) - at(q.t + h)) / (2.0 * h);
    Ok((slope - section_volume(q).value).abs())
}

/// Monte Carlo estimate of the upper cap from uniform samples of `Δⁿ`
/// (normalized exponentials). Returns the estimate and its standard error.
pub fn monte_carlo_cap(q: &SectionQuery, samples: usize, seed: u64) -> (f64, f64) {
    const CHUNK: usize = 1 << 16;
    let a = q.direction.coords();
    let n = a.len() - 1;
    let total = ((n + 1) as f64).sqrt() / factorial(n);
    let chunks = samples.div_ceil(CHUNK);
    let hits: usize = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut x = vec![0.0; n + 1];
            let mut hits = 0;
            for _ in 0..count {
                let mut s = 0.0;
                for xi in x.iter_mut() {
                    *xi = Exp1.sample(&mut rng);
                    s += *xi;
                }
                if dot(&x, a) > q.t * s {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let p = hits as f64 / samples as f64;
    (total * p, total * (p * (1.0 - p) / samples as f64).sqrt())
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(x, y)| x * y).sum()
}

fn norm(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

fn dist(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn centroid<'a>(pts: impl Iterator<Item = &'a [f64]>) -> Vec<f64> {
    let mut c: Vec<f64> = Vec::new();
    let mut m = 0usize;
    for p in pts {
        if c.is_empty() {
            c = vec![0.0; p.len()];
        }
        c.iter_mut().zip(p).for_each(|(s, x)| *s += x);
        m += 1;
    }
    c.iter_mut().for_each(|s| *s /= m as f64);
    c
}

/// Gram–Schmidt with one reorthogonalization pass; `None` if `v` is
/// dependent on `basis`.
fn orthonormalize(mut v: Vec<f64>, basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    for _ in 0..2 {
        for b in basis {
            let p = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
        }
    }
    let l = norm(&v);
    if l <= RANK_TOL {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= l);
    Some(v)
}

/// Orthonormal basis of the linear span of `p_i - p_0`.
fn affine_basis(pts: &[&[f64]]) -> Vec<Vec<f64>> {
    let mut basis = Vec::new();
    for p in &pts[1..] {
        let v = p.iter().zip(pts[0]).map(|(x, y)| x - y).collect();
        if let Some(u) = orthonormalize(v, &basis) {
            basis.push(u);
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::section::axis_section_volume;
    use crate::simplex::{axis_direction, canonicalize, Dimension};

    fn dim(n: usize) -> Dimension {
        Dimension::new(n).unwrap()
    }

    fn query(n: usize, raw: &[f64], t: f64) -> SectionQuery {
        SectionQuery::new(canonicalize(dim(n), raw).unwrap(), t)
    }

    #[test]
    fn segment_through_centre_n2() {
        let p = slice_polytope(&query(2, &[1.0, 0.0, -1.0], 0.0));
        assert_eq!(p.vertices_ambient.len(), 2);
        assert!(p.vertices_ambient.contains(&vec![0.0, 1.0, 0.0]));
        assert!(p.vertices_ambient.contains(&vec![0.5, 0.0, 0.5]));
        let v = slice_volume_exact(&p).unwrap();
        assert!((v - 1.5f64.sqrt()).abs() < 1e-14);
        assert!((slice_volume_direct(&p).unwrap() - v).abs() < 1e-14);
    }

    #[test]
    fn facet_parallel_triangle_n3() {
        let q = SectionQuery::new(axis_direction(dim(3), 1).unwrap(), 0.0);
        let p = slice_polytope(&q);
        assert_eq!(p.vertices_ambient.len(), 3);
        let v = slice_volume_exact(&p).unwrap();
        assert!((v - 9.0 * 3f64.sqrt() / 32.0).abs() < 1e-13);
        assert!((slice_volume_direct(&p).unwrap() - v).abs() < 1e-13);
    }

    #[test]
    fn empty_beyond_first_coordinate() {
        for n in 2..=6 {
            let a = axis_direction(dim(n), 2).unwrap();
            let p = slice_polytope(&SectionQuery::new(a.clone(), a.first() + 0.01));
            assert!(p.vertices_ambient.is_empty());
            assert_eq!(slice_volume_exact(&p).unwrap(), 0.0);
            assert_eq!(p.base_point.len(), n + 1);
        }
    }

    #[test]
    fn full_edge_and_square() {
        let q = SectionQuery::new(axis_direction(dim(2), 2).unwrap(), 1.0 / 6f64.sqrt());
        let v = slice_volume_exact(&slice_polytope(&q)).unwrap();
        assert!((v - 2f64.sqrt()).abs() < 1e-12);

        let q = SectionQuery::new(axis_direction(dim(3), 2).unwrap(), 0.0);
        let p = slice_polytope(&q);
        assert_eq!(p.vertices_ambient.len(), 4);
        let v = slice_volume_exact(&p).unwrap();
        assert!((v - 0.5).abs() < 1e-13);
        assert!((slice_volume_direct(&p).unwrap() - 0.5).abs() < 1e-13);
    }

    #[test]
    fn vertex_touch_is_degenerate() {
        let a = axis_direction(dim(4), 1).unwrap();
        let p = slice_polytope(&SectionQuery::new(a.clone(), a.first()));
        assert_eq!(p.vertices_ambient.len(), 1);
        assert!(p.is_degenerate());
        assert_eq!(slice_volume_exact(&p).unwrap(), 0.0);
    }

    #[test]
    fn matches_formula_n3_example() {
        let q = query(3, &[0.7, 0.1, -0.3, -0.5], 0.5);
        let exact = slice_volume_exact(&slice_polytope(&q)).unwrap();
        let formula = crate::section::dirksen_sum(q.direction.coords(), 0.5, 1e-6).unwrap();
        assert!((exact - formula).abs() < 1e-10);
    }

    #[test]
    fn axis_slices_match_closed_form() {
        for n in 2..=8 {
            for k in 1..=n {
                let a = axis_direction(dim(n), k).unwrap();
                for i in 1..10 {
                    let t = a.last() + (a.first() - a.last()) * i as f64 / 10.0;
                    let exact = slice_volume_exact(&slice_polytope(&SectionQuery::new(a.clone(), t))).unwrap();
                    let closed = axis_section_volume(dim(n), k, t).unwrap();
                    assert!((exact - closed).abs() <= 1e-10 * closed.max(1.0), "n={n} k={k} t={t}");
                }
            }
        }
    }

    #[test]
    fn refuses_large_dimension() {
        let a = axis_direction(dim(9), 1).unwrap();
        let p = slice_polytope(&SectionQuery::new(a, 0.0));
        assert!(matches!(
            slice_volume_exact(&p),
            Err(Error::UnsupportedDimension { n: 9, max: 8 })
        ));
    }

    #[test]
    fn vertices_lie_in_simplex_and_plane() {
        let q = query(5, &[0.3, 0.8, -0.1, 0.05, -0.6, -0.2], 0.1);
        let p = slice_polytope(&q);
        let a = q.direction.coords();
        for v in &p.vertices_ambient {
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            assert!((dot(v, a) - 0.1).abs() < 1e-10);
            assert!(v.iter().all(|&x| x >= -1e-12));
        }
        for (i, f) in p.frame.iter().enumerate() {
            assert!(f.iter().sum::<f64>().abs() < 1e-12);
            assert!(dot(f, a).abs() < 1e-12);
            for g in &p.frame[..i] {
                assert!(dot(f, g).abs() < 1e-12);
            }
        }
        assert_eq!(p.frame.len(), 4);
    }

    #[test]
    fn cap_limits() {
        for n in 2..=8 {
            let a = axis_direction(dim(n), 1).unwrap();
            let total = ((n + 1) as f64).sqrt() / factorial(n);
            let c = cap_volume(&SectionQuery::new(a.clone(), a.last() - 0.1));
            assert_eq!(c.upper, total);
            let c = cap_volume(&SectionQuery::new(a.clone(), a.first()));
            assert_eq!(c.upper, 0.0);
            assert!((c.lower - total).abs() < 1e-15);
        }
    }

    #[test]
    fn derivative_of_cap_is_section() {
        let q = SectionQuery::new(axis_direction(dim(4), 2).unwrap(), 0.2);
        assert!(derivative_check(&q, 1e-5).unwrap() <= 1e-6);
        // t = 0 is a knot of a^[0]: A(t) = √(3/2) - √3|t| has a corner there, so
        // the central difference is off by exactly √3·h/2 and no better.
        let q = query(2, &[1.0, 0.0, -1.0], 0.0);
        let h = 1e-6;
        let r = derivative_check(&q, h).unwrap();
        assert!((r - 3f64.sqrt() * h / 2.0).abs() < 1e-9, "residual {r}");
        let q = SectionQuery::new(axis_direction(dim(3), 1).unwrap(), 0.95);
        assert_eq!(derivative_check(&q, 1e-5).unwrap(), 0.0);
        assert!(derivative_check(&q, 1e-2).is_err());
    }

    #[test]
    fn monte_carlo_agrees_with_cap() {
        let q = SectionQuery::new(axis_direction(dim(3), 1).unwrap(), 0.0);
        let exact = cap_volume(&q).upper;
        // The cap is the simplex scaled by 3/4 towards the apex vertex.
        let total = 2.0 / 6.0;
        assert!((exact - total * 0.75f64.powi(3)).abs() < 1e-14);
        let (est, se) = monte_carlo_cap(&q, 1_000_000, 0);
        assert!((est - exact).abs() <= 3.0 * se, "{est} vs {exact} (se {se})");
    }
}
