use super::roots::{brent, bracket_and_solve};
use crate::error::{Error, Result};
use crate::section::axis_section_volume;
use crate::simplex::{k_face_distance, Dimension};

/// Argument tolerance for the crossover solvers.
pub const ROOT_XTOL: f64 = 1e-13;

/// `tₙ`: the distance where the facet-parallel section `a^(1)` and the
/// edge-direction section `a^(2)` have equal volume, `0 < tₙ < √((n-1)/(2(n+1)))`.
pub fn crossover_t(n: Dimension) -> Result<f64> {
    if n.get() < 3 {
        return Err(Error::InvalidDimension {
            n: n.get(),
            min: 3,
            max: crate::simplex::MAX_DIMENSION,
        });
    }
    let diff = |t: f64| {
        axis_section_volume(n, 1, t).expect("k = 1") - axis_section_volume(n, 2, t).expect("k = 2")
    };
    // a^(2) wins at the centre, and its section vanishes at the far end of
    // its support while a^(1) is still positive.
    let top = k_face_distance(n.get(), 2);
    brent(diff, 0.0, top * (1.0 - 1e-9), ROOT_XTOL, "crossover t_n")
}

/// `2(√2 + c) - exp(1 + (√2 - 1)c)`.
pub fn asymptotic_residual(c: f64) -> f64 {
    let s2 = std::f64::consts::SQRT_2;
    2.0 * (s2 + c) - (1.0 + (s2 - 1.0) * c).exp()
}

/// The positive root `c ≈ 2.6363` of `2(√2 + c) = exp(1 + (√2 - 1)c)`,
/// which governs `tₙ ~ c/√n`.
pub fn asymptotic_crossover_c() -> Result<f64> {
    bracket_and_solve(asymptotic_residual, 0.0, 10.0, (0.0, 10.0), ROOT_XTOL, "asymptotic c")
}
