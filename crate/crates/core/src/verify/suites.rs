use std::ops::RangeInclusive;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{sample_rng, ClaimRecord, Measured, VerificationReport};
use crate::error::{Error, Result};
use crate::search::families::{n2_first_boundary, n2_second_boundary, n3_first_boundary, t0_n3, t1_n3};
use crate::search::{
    crossover_t, detect_regime_boundaries, discontinuity_limits, search_extremum, FamilyLabel, Mode,
    RegimeBoundary, SearchConfig, SearchReport, DIR_TOL, MATCH_TOL,
};
use crate::section::{axis_section_volume, section_volume};
use crate::simplex::{axis_direction, canonicalize, simplex_constants, CanonicalDirection, Dimension, SectionQuery};
use crate::slice::{cap_volume, derivative_check, slice_polytope, slice_volume_exact, MAX_SLICE_DIMENSION};

const VERTEX_MAX: &str = "above the facet-parallel threshold the maximal section is orthogonal to a^(1)";
const N4_SPLIT: &str = "n = 4: a^(2) is maximal below the crossover and a^(1) above it";
const SMALL_MAX: &str = "known extremal families for n = 2, 3";
const SMALL_MIN: &str = "a^(1) gives the minimal section near the centre";
const JUMP: &str = "the maximal section volume jumps at the first regime boundary";
const ORACLE: &str = "the divided-difference formula equals the geometric section volume";

/// Bisection width used when locating regime boundaries.
const BOUNDARY_T_TOL: f64 = 1e-7;

fn check_range(n: usize, min: usize, max: usize) -> Result<Dimension> {
    if (min..=max).contains(&n) {
        Dimension::new(n)
    } else {
        Err(Error::InvalidDimension { n, min, max })
    }
}

fn outcome(r: &SearchReport) -> String {
    format!("found {} ({}), verdict {}", r.label, fmt_value(r.best_value), r.verdict)
}

fn fmt_value(x: f64) -> String {
    format!("{x:.12e}")
}

/// Compares the best value of a search with its prediction, and the best
/// direction with the nearest predicted direction.
fn search_records(id: &str, anchor: &str, r: &SearchReport, value_tol: f64) -> Vec<ClaimRecord> {
    let Some(expected) = r.predicted_value() else {
        return vec![ClaimRecord::skipped(id, anchor, "no prediction at this distance")];
    };
    let distance = r
        .predicted
        .iter()
        .map(|p| r.best_direction.distance(&p.direction))
        .fold(f64::INFINITY, f64::min);
    vec![
        ClaimRecord::scalar(format!("{id}/value"), anchor, r.best_value, expected, value_tol)
            .with_note(outcome(r)),
        ClaimRecord::scalar(format!("{id}/direction"), anchor, distance, 0.0, DIR_TOL)
            .with_note(format!("predicted {}", r.predicted[0].label)),
    ]
}

/// Searches the maximum on a grid of distances where the vertex direction is
/// expected to win (or, for `n = 4`, where `a^(2)` and `a^(1)` split).
///
/// Each grid point yields a value record (against the closed form, within
/// `1e-8`) and a direction record. For `n = 4` the location of the switch is
/// recovered from the searches and compared with the crossover.
pub fn verify_large_dims(n: usize, grid_size: usize, restarts: usize, seed: u64) -> Result<VerificationReport> {
    let dim = check_range(n, 4, 8)?;
    let nf = n as f64;
    let lo = ((nf - 2.0) / (3.0 * (nf + 1.0))).sqrt();
    let hi = simplex_constants(dim).vertex_distance;
    let grid: Vec<f64> = (1..=grid_size.max(1))
        .map(|i| lo + (hi - lo) * i as f64 / (grid_size.max(1) + 1) as f64)
        .collect();
    let cfg = SearchConfig {
        restarts,
        seed,
        ..Default::default()
    };
    let anchor = if n == 4 { N4_SPLIT } else { VERTEX_MAX };
    let mut report = VerificationReport::new("large-dims", seed);
    for &t in &grid {
        let r = search_extremum(dim, t, Mode::Max, &cfg);
        report
            .records
            .extend(search_records(&format!("large-dims/n{n}/t={t:.6}"), anchor, &r, 1e-8));
    }
    if n == 4 {
        let split = crossover_t(dim)?;
        report.records.push(ClaimRecord::scalar("large-dims/n4/crossover", N4_SPLIT, split, 0.3877, 5e-4));
        for t in [0.37, 0.40] {
            let r = search_extremum(dim, t, Mode::Max, &cfg);
            report
                .records
                .extend(search_records(&format!("large-dims/n4/t={t:.2}"), N4_SPLIT, &r, 1e-8));
        }
        // The a^(2) regime is closed on the left, so its end point joins the grid.
        let detect: Vec<f64> = std::iter::once(lo).chain(grid.iter().copied()).collect();
        let found = detect_regime_boundaries(dim, Mode::Max, &detect, &cfg, BOUNDARY_T_TOL);
        report.records.push(boundary_record(
            "large-dims/n4/switch",
            N4_SPLIT,
            &found,
            (FamilyLabel::Axis(2), FamilyLabel::Axis(1)),
            0.3877,
            5e-4,
        ));
        report.records.push(boundary_record(
            "large-dims/n4/switch-vs-crossover",
            N4_SPLIT,
            &found,
            (FamilyLabel::Axis(2), FamilyLabel::Axis(1)),
            split,
            1e-5,
        ));
    }
    Ok(report)
}

fn boundary_record(
    id: &str,
    anchor: &str,
    found: &[RegimeBoundary],
    labels: (FamilyLabel, FamilyLabel),
    expected: f64,
    tol: f64,
) -> ClaimRecord {
    match found.iter().find(|b| (b.left, b.right) == labels) {
        Some(b) => ClaimRecord::scalar(id, anchor, b.t, expected, tol)
            .with_note(format!("{} -> {}, bracket width {:.1e}", b.left, b.right, b.width)),
        None => ClaimRecord::scalar(id, anchor, f64::NAN, expected, tol).with_note(format!(
            "no {} -> {} change detected; found [{}]",
            labels.0,
            labels.1,
            found
                .iter()
                .map(|b| format!("{} -> {} at {:.6}", b.left, b.right, b.t))
                .collect::<Vec<_>>()
                .join(", ")
        )),
    }
}

/// Reproduces the extremal families in dimensions 2 and 3 on a grid over
/// `[0, vertex distance)`: maxima at every point, minima where predicted,
/// and the distances at which the maximizing family changes.
pub fn verify_small_dims(n: usize, grid_size: usize, seed: u64) -> Result<VerificationReport> {
    let dim = check_range(n, 2, 3)?;
    let top = simplex_constants(dim).vertex_distance;
    let steps = grid_size.max(2);
    let grid: Vec<f64> = (0..steps).map(|i| top * i as f64 / steps as f64).collect();
    let cfg = SearchConfig {
        seed,
        ..Default::default()
    };
    let mut report = VerificationReport::new("small-dims", seed);

    for &t in &grid {
        let r = search_extremum(dim, t, Mode::Max, &cfg);
        if let Some(expected) = r.predicted_value() {
            report.records.push(
                ClaimRecord::scalar(format!("small-dims/n{n}/max/t={t:.6}"), SMALL_MAX, r.best_value, expected, MATCH_TOL)
                    .with_note(outcome(&r)),
            );
        }
        let r = search_extremum(dim, t, Mode::Min, &cfg);
        if let Some(expected) = r.predicted_value() {
            report.records.push(
                ClaimRecord::scalar(format!("small-dims/n{n}/min/t={t:.6}"), SMALL_MIN, r.best_value, expected, MATCH_TOL)
                    .with_note(outcome(&r)),
            );
        }
    }

    let found = detect_regime_boundaries(dim, Mode::Max, &grid, &cfg, BOUNDARY_T_TOL);
    let expected: Vec<(&str, FamilyLabel, FamilyLabel, f64, f64)> = if n == 2 {
        vec![
            ("bracket-brace", FamilyLabel::Bracket, FamilyLabel::Brace, n2_first_boundary(), 1e-4),
            ("brace-vertex", FamilyLabel::Brace, FamilyLabel::Axis(1), n2_second_boundary(), 1e-4),
        ]
    } else {
        vec![
            ("bracket-brace", FamilyLabel::Bracket, FamilyLabel::Brace, n3_first_boundary(), 1e-4),
            ("t1", FamilyLabel::Brace, FamilyLabel::Axis(2), t1_n3(), 1e-6),
            ("t0", FamilyLabel::Axis(2), FamilyLabel::Axis(1), 0.43575, 1e-4),
        ]
    };
    report.records.push(
        ClaimRecord::scalar(
            format!("small-dims/n{n}/boundary-count"),
            SMALL_MAX,
            found.len() as f64,
            expected.len() as f64,
            0.0,
        )
        .with_note(
            found
                .iter()
                .map(|b| format!("{} -> {} at {:.9}", b.left, b.right, b.t))
                .collect::<Vec<_>>()
                .join(", "),
        ),
    );
    for (name, left, right, at, tol) in expected {
        report.records.push(boundary_record(
            &format!("small-dims/n{n}/boundary/{name}"),
            SMALL_MAX,
            &found,
            (left, right),
            at,
            tol,
        ));
    }

    if n == 2 {
        let r = search_extremum(dim, 0.1, Mode::Min, &cfg);
        let closed = 2.0 * 2f64.sqrt() / 3.0 - 0.2 / 3f64.sqrt();
        report.records.push(
            ClaimRecord::scalar("small-dims/n2/min/t=0.1/closed-form", SMALL_MIN, r.best_value, closed, MATCH_TOL)
                .with_note(outcome(&r)),
        );
    } else {
        report.records.push(ClaimRecord::scalar(
            "small-dims/n3/t0/closed-form-vs-crossover",
            "t0 is where a^(1) and a^(2) have equal sections",
            crossover_t(dim)?,
            t0_n3(),
            1e-12,
        ));
        report.records.push(ClaimRecord::scalar(
            "small-dims/n3/t0/printed",
            "t0 = 0.43575",
            t0_n3(),
            0.43575,
            1e-5,
        ));
    }
    Ok(report)
}

/// The jump of the maximal section at `1/√6` (`n = 2`) and `1/(2√3)`
/// (`n = 3`): the value on the boundary and the limit from the right.
pub fn verify_discontinuities(seed: u64) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("discontinuities", seed);
    let cases = [
        (2usize, 2f64.sqrt(), 0.5f64.sqrt()),
        (3, 3f64.sqrt() / 2.0, 5.0 * 3f64.sqrt() / 18.0),
    ];
    for (n, at, limit) in cases {
        let d = discontinuity_limits(n)?;
        report.records.push(
            ClaimRecord::scalar(format!("discontinuities/n{n}/value-at"), JUMP, d.value_at, at, 1e-10)
                .with_note(format!("boundary t = {:.12}", d.boundary)),
        );
        report.records.push(
            ClaimRecord::scalar(format!("discontinuities/n{n}/right-limit"), JUMP, d.right_limit, limit, 1e-4)
                .with_note(format!("extrapolated from {} samples", d.samples.len())),
        );
    }
    Ok(report)
}

fn random_direction<R: Rng>(dim: Dimension, rng: &mut R) -> CanonicalDirection {
    loop {
        let raw: Vec<f64> = (0..dim.ambient()).map(|_| StandardNormal.sample(rng)).collect();
        if let Ok(d) = canonicalize(dim, &raw) {
            return d;
        }
    }
}

/// A direction whose coordinates form tight clusters: some exactly
/// repeated, some a few ulps to `1e-7` apart.
fn clustered_direction<R: Rng>(dim: Dimension, rng: &mut R) -> CanonicalDirection {
    loop {
        let m = dim.ambient();
        let centres = rng.gen_range(2..=m.min(4));
        let base: Vec<f64> = (0..centres).map(|_| StandardNormal.sample(rng)).collect();
        let raw: Vec<f64> = (0..m)
            .map(|i| {
                let c = base[if i < centres { i } else { rng.gen_range(0..centres) }];
                match rng.gen_range(0..3) {
                    0 => c,
                    1 => c + 1e-7 * rng.gen_range(-1.0..1.0),
                    _ => c + 1e-13 * rng.gen_range(-1.0..1.0),
                }
            })
            .collect();
        if let Ok(d) = canonicalize(dim, &raw) {
            return d;
        }
    }
}

fn interior_t<R: Rng>(d: &CanonicalDirection, rng: &mut R) -> f64 {
    let (lo, hi) = (d.last(), d.first());
    lo + (hi - lo) * rng.gen_range(0.0..1.0)
}

/// `|formula - geometry| / geometry`, or the absolute difference when the
/// geometric volume vanishes.
fn oracle_deviation(q: &SectionQuery) -> Result<f64> {
    let exact = slice_volume_exact(&slice_polytope(q))?;
    let formula = section_volume(q).value;
    let diff = (formula - exact).abs();
    Ok(if exact > 0.0 { diff / exact } else { diff })
}

fn max_of(mut xs: impl Iterator<Item = Result<f64>>) -> Result<f64> {
    xs.try_fold(0.0f64, |m, x| Ok(m.max(x?)))
}

/// Fuzzes the section formula against exact slicing, including clustered
/// coordinates, and checks the cap identities behind the formula.
pub fn verify_formula_oracle(n_range: RangeInclusive<usize>, samples: usize, seed: u64) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("oracle", seed);
    for n in n_range {
        let dim = check_range(n, 2, MAX_SLICE_DIMENSION)?;
        let stream = n as u64 * 8;

        let random = max_of(
            (0..samples as u64)
                .into_par_iter()
                .map(|i| {
                    let mut rng = sample_rng(seed, stream, i);
                    let d = random_direction(dim, &mut rng);
                    let t = interior_t(&d, &mut rng);
                    oracle_deviation(&SectionQuery::new(d, t))
                })
                .collect::<Vec<_>>()
                .into_iter(),
        )?;
        report.records.push(
            ClaimRecord::scalar(format!("oracle/n{n}/random"), ORACLE, random, 0.0, 1e-9)
                .with_note(format!("max deviation over {samples} samples")),
        );

        let clustered_samples = samples.div_ceil(4);
        let clustered = max_of(
            (0..clustered_samples as u64)
                .into_par_iter()
                .map(|i| {
                    let mut rng = sample_rng(seed, stream + 1, i);
                    let d = clustered_direction(dim, &mut rng);
                    let t = interior_t(&d, &mut rng);
                    oracle_deviation(&SectionQuery::new(d, t))
                })
                .collect::<Vec<_>>()
                .into_iter(),
        )?;
        report.records.push(
            ClaimRecord::scalar(format!("oracle/n{n}/clustered"), ORACLE, clustered, 0.0, 1e-9)
                .with_note(format!("max deviation over {clustered_samples} clustered samples")),
        );

        let full = simplex_constants(dim).volume;
        let mut rng = sample_rng(seed, stream + 2, 0);
        let d = random_direction(dim, &mut rng);
        let below = d.last() - 0.1;
        report.records.push(ClaimRecord::scalar(
            format!("oracle/n{n}/cap-total"),
            "the upper cap below every coordinate is the whole simplex",
            cap_volume(&SectionQuery::new(d, below)).upper,
            full,
            1e-12,
        ));

        let residual = max_of((0..50u64).map(|i| {
            let mut rng = sample_rng(seed, stream + 3, i);
            let d = random_direction(dim, &mut rng);
            let t = interior_t(&d, &mut rng);
            derivative_check(&SectionQuery::new(d, t), 1e-5)
        }))?;
        report.records.push(
            ClaimRecord::scalar(
                format!("oracle/n{n}/derivative"),
                "the section is minus the derivative of the upper cap",
                residual,
                0.0,
                1e-6,
            )
            .with_note("max central-difference residual at 50 interior points, h = 1e-5"),
        );

        let k = 1 + (n - 1) / 2;
        let t = 0.1;
        report.records.push(ClaimRecord::new(
            format!("oracle/n{n}/axis"),
            "closed form for a^(k) agrees with the general evaluation",
            Measured::Scalar(section_volume(&SectionQuery::new(axis_direction(dim, k)?, t)).value),
            Measured::Scalar(axis_section_volume(dim, k, t)?),
            1e-10,
        ));
    }
    Ok(report)
}
