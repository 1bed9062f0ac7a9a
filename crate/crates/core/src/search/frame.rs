use serde::Serialize;

use crate::simplex::Dimension;

/// Orthonormal basis of the sum-zero hyperplane `{x ∈ R^{n+1} : Σx = 0}`.
///
/// Helmert vectors `v_k = (1, …, 1, -k, 0, …, 0) / √(k(k+1))` with `k` ones,
/// `k = 1, …, n`. A unit `u ∈ Sⁿ⁻¹` maps to the unit sum-zero direction
/// `Σ u_k v_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumZeroFrame {
    n: usize,
    basis: Vec<Vec<f64>>,
}

impl SumZeroFrame {
    pub fn new(n: usize) -> Self {
        let basis = (1..=n)
            .map(|k| {
                let s = 1.0 / ((k * (k + 1)) as f64).sqrt();
                (0..=n)
                    .map(|j| match j.cmp(&k) {
                        std::cmp::Ordering::Less => s,
                        std::cmp::Ordering::Equal => -(k as f64) * s,
                        std::cmp::Ordering::Greater => 0.0,
                    })
                    .collect()
            })
            .collect();
        Self { n, basis }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// `Σ u_k v_k`, a vector in `R^{n+1}`.
    pub fn embed(&self, u: &[f64]) -> Vec<f64> {
        debug_assert_eq!(u.len(), self.n);
        let mut x = vec![0.0; self.n + 1];
        for (uk, v) in u.iter().zip(&self.basis) {
            x.iter_mut().zip(v).for_each(|(xi, vi)| *xi += uk * vi);
        }
        x
    }

    /// Frame coordinates of `x`; the inverse of [`embed`](Self::embed) on the
    /// sum-zero hyperplane.
    pub fn coordinates(&self, x: &[f64]) -> Vec<f64> {
        self.basis
            .iter()
            .map(|v| v.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

pub fn sumzero_frame(n: Dimension) -> SumZeroFrame {
    SumZeroFrame::new(n.get())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplex::{axis_direction, canonicalize, INVARIANT_TOL};

    #[test]
    fn gram_matrix_is_identity() {
        for n in [2, 3, 5, 8] {
            let f = SumZeroFrame::new(n);
            for (i, u) in f.basis().iter().enumerate() {
                assert!(u.iter().sum::<f64>().abs() < 1e-12);
                for (j, v) in f.basis().iter().enumerate() {
                    let d: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((d - e).abs() < 1e-12, "n={n} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn embedded_unit_vectors_are_valid_directions() {
        let n = Dimension::new(5).unwrap();
        let f = sumzero_frame(n);
        let u = [0.3, -0.5, 0.1, 0.7, -0.2];
        let l = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        let u: Vec<f64> = u.iter().map(|x| x / l).collect();
        let d = canonicalize(n, &f.embed(&u)).unwrap();
        assert!(d.coords().iter().sum::<f64>().abs() < INVARIANT_TOL);
        assert!((d.coords().iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < INVARIANT_TOL);
        assert!(d.coords().windows(2).all(|w| w[0] >= w[1]));
        assert!(d.last() < 0.0);
    }

    #[test]
    fn axis_direction_round_trip() {
        let n = Dimension::new(4).unwrap();
        let f = sumzero_frame(n);
        let a = axis_direction(n, 1).unwrap();
        let u = f.coordinates(a.coords());
        assert!((u.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        let back = f.embed(&u);
        for (x, y) in back.iter().zip(a.coords()) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
