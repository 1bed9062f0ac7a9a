//! Extremal sections of `Δⁿ` by multistart local search on the unit sphere
//! of the sum-zero hyperplane, compared against the known extremal families.
//!
//! Directions are parametrized as `a = B u` with `B` a [`SumZeroFrame`] and
//! `u ∈ Sⁿ⁻¹`. Each start is polished by Nelder–Mead in a tangent chart
//! `v ↦ (u₀ + T v)/‖u₀ + T v‖` that is re-centred after every run.

pub mod crossover;
pub mod families;
pub mod frame;
pub mod nelder_mead;
pub mod roots;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use crossover::{asymptotic_crossover_c, crossover_t};
pub use families::{
    critical_family_n3, discontinuity_limits, maximizer_family_n2, maximizer_family_n3,
    psi_volume_n3, CriticalFamilyN3, DiscontinuityLimits, FamilyLabel, FamilyPrediction,
};
pub use frame::{sumzero_frame, SumZeroFrame};

use nelder_mead::{nelder_mead, NelderMeadOptions};

use crate::section::section_volume;
use crate::simplex::{axis_direction, canonicalize, simplex_constants, CanonicalDirection, Dimension, SectionQuery};

/// Value tolerance for agreement with a prediction.
pub const MATCH_TOL: f64 = 1e-6;

/// Direction tolerance (Euclidean distance of sorted coordinates).
pub const DIR_TOL: f64 = 1e-4;

/// A value-matching family further away than this is not used as a label.
const LABEL_DIR_TOL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Max,
    Min,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Max => "max",
            Mode::Min => "min",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Random starts, in addition to the seeded ones.
    pub restarts: usize,
    pub seed: u64,
    /// Evaluation budget of a single Nelder–Mead run.
    pub polish_iters: usize,
    /// How many of the best coarse results get the fine polish.
    pub full_polish: usize,
    /// Seed with the predicted families as well as the `a^(k)`.
    pub family_seeds: bool,
    pub match_tol: f64,
    pub dir_tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            seed: 0,
            polish_iters: 3000,
            full_polish: 4,
            family_seeds: true,
            match_tol: MATCH_TOL,
            dir_tol: DIR_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    MatchesPrediction,
    ExceedsPrediction,
    BelowPrediction,
    NoPrediction,
}

impl Verdict {
    /// True for the two outcomes that contradict a prediction.
    pub fn is_discrepancy(self) -> bool {
        matches!(self, Verdict::ExceedsPrediction | Verdict::BelowPrediction)
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RestartStats {
    pub count: usize,
    pub best: f64,
    pub worst: f64,
    pub mean: f64,
    pub median: f64,
    /// Starts that ended within `match_tol` of the best value.
    pub hits: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchReport {
    pub n: usize,
    pub t: f64,
    pub mode: Mode,
    pub best_direction: CanonicalDirection,
    pub best_value: f64,
    /// Family the best direction was recognised as.
    pub label: FamilyLabel,
    pub restart_values: RestartStats,
    /// Empty when nothing is predicted; two entries on a regime boundary.
    pub predicted: Vec<FamilyPrediction>,
    pub verdict: Verdict,
}

impl SearchReport {
    pub fn predicted_value(&self) -> Option<f64> {
        self.predicted.first().map(|p| p.value)
    }
}

struct Objective {
    n: Dimension,
    frame: SumZeroFrame,
    t: f64,
    mode: Mode,
}

impl Objective {
    fn direction(&self, u: &[f64]) -> CanonicalDirection {
        canonicalize(self.n, &self.frame.embed(u)).expect("unit frame vector")
    }

    /// Quantity to minimize. Outside the support the section is zero; in
    /// max mode the distance to the support is returned instead so that the
    /// optimizer is pulled back towards it.
    fn eval(&self, u: &[f64]) -> f64 {
        let dir = self.direction(u);
        let gap = (self.t - dir.first()).max(dir.last() - self.t);
        let value = section_volume(&SectionQuery::new(dir, self.t)).value;
        match self.mode {
            Mode::Max if value > 0.0 => -value,
            Mode::Max => gap.max(0.0),
            Mode::Min => value,
        }
    }
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let l = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= l);
    v
}

/// Orthonormal basis of the tangent space of the sphere at `u`.
fn tangent_basis(u: &[f64]) -> Vec<Vec<f64>> {
    let d = u.len();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| u[i].abs().total_cmp(&u[j].abs()));
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d.saturating_sub(1));
    for &i in &order {
        if basis.len() + 1 == d {
            break;
        }
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        for _ in 0..2 {
            for b in std::iter::once(u).chain(basis.iter().map(Vec::as_slice)) {
                let p: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
            }
        }
        let l = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if l > 0.1 {
            basis.push(v.into_iter().map(|x| x / l).collect());
        }
    }
    basis
}

struct Polished {
    u: Vec<f64>,
    obj: f64,
    evals: usize,
}

/// Runs Nelder–Mead in re-centred tangent charts, once per `(step, xtol)`
/// stage and repeated while a stage keeps improving.
fn polish(obj: &Objective, u0: Vec<f64>, stages: &[(f64, f64)], budget: usize) -> Polished {
    let mut u = u0;
    let mut fu = obj.eval(&u);
    let mut evals = 1;
    for &(step, xtol) in stages {
        for _ in 0..4 {
            let basis = tangent_basis(&u);
            let chart = |v: &[f64]| {
                let mut x = u.clone();
                for (vi, b) in v.iter().zip(&basis) {
                    x.iter_mut().zip(b).for_each(|(xj, bj)| *xj += vi * bj);
                }
                normalize(x)
            };
            let opts = NelderMeadOptions {
                step,
                xtol,
                ftol: 1e-15,
                max_evals: budget,
            };
            let r = nelder_mead(|v| obj.eval(&chart(v)), &vec![0.0; basis.len()], &opts);
            evals += r.evals;
            if r.fx >= fu {
                break;
            }
            let gain = fu - r.fx;
            u = chart(&r.x);
            fu = r.fx;
            if gain <= 1e-15 * fu.abs().max(1e-300) || r.x.iter().all(|x| x.abs() <= xtol) {
                break;
            }
        }
    }
    Polished { u, obj: fu, evals }
}

const COARSE: [(f64, f64); 2] = [(0.3, 1e-4), (0.05, 1e-7)];
const FINE: [(f64, f64); 3] = [(0.01, 1e-10), (1e-4, 1e-13), (1e-6, 1e-15)];

/// Families predicted to be extremal at `t`, mirrored through
/// `A(a, t) = A(-a, -t)` for negative `t`.
pub fn predictions(n: Dimension, t: f64, mode: Mode) -> Vec<FamilyPrediction> {
    let m = n.get();
    let tt = t.abs();
    let vertex = simplex_constants(n).vertex_distance;
    if tt >= vertex {
        return Vec::new();
    }
    let axis = |k: usize| families::FamilyPrediction {
        direction: axis_direction(n, k).expect("valid k"),
        value: crate::section::axis_section_volume(n, k, tt).expect("valid k"),
        label: FamilyLabel::Axis(k),
        tie_with: None,
    };
    let mut out = match (mode, m) {
        (Mode::Max, 2) => families::regimes_n2(tt).unwrap_or_default(),
        (Mode::Max, 3) => families::regimes_n3(tt).unwrap_or_default(),
        (Mode::Max, _) => {
            let mf = m as f64;
            let lower = ((mf - 2.0) / (3.0 * (mf + 1.0))).sqrt();
            if m >= 5 && tt > lower {
                vec![axis(1)]
            } else if m == 4 && tt >= lower {
                let split = crossover_t(n).expect("n = 4");
                if tt < split - families::BOUNDARY_TOL {
                    vec![axis(2)]
                } else if tt > split + families::BOUNDARY_TOL {
                    vec![axis(1)]
                } else {
                    let mut both = vec![axis(2), axis(1)];
                    both[0].tie_with = Some(FamilyLabel::Axis(1));
                    both
                }
            } else {
                Vec::new()
            }
        }
        (Mode::Min, 2) if tt <= families::n2_first_boundary() => vec![axis(1)],
        (Mode::Min, 3) if tt <= families::n3_first_boundary() => vec![axis(1)],
        (Mode::Min, _) => Vec::new(),
    };
    if t < 0.0 {
        for p in &mut out {
            mirror(m, p);
        }
    }
    out
}

fn mirror_label(n: usize, label: FamilyLabel) -> FamilyLabel {
    match label {
        FamilyLabel::Axis(k) => FamilyLabel::Axis(n + 1 - k),
        other => other,
    }
}

fn mirror(n: usize, p: &mut FamilyPrediction) {
    p.direction = p.direction.negate();
    p.label = mirror_label(n, p.label);
    p.tie_with = p.tie_with.map(|l| mirror_label(n, l));
}

/// Candidate families at `t ≥ 0` used to label a search result.
fn label_candidates(n: Dimension, t: f64) -> Vec<FamilyPrediction> {
    let m = n.get();
    let mut out = match m {
        2 => families::regimes_n2(t).unwrap_or_default(),
        3 => families::regimes_n3(t).unwrap_or_default(),
        _ => Vec::new(),
    };
    out.retain(|p| matches!(p.label, FamilyLabel::Bracket | FamilyLabel::Brace));
    for k in 1..=m {
        out.push(FamilyPrediction {
            direction: axis_direction(n, k).expect("valid k"),
            value: 0.0,
            label: FamilyLabel::Axis(k),
            tie_with: None,
        });
    }
    for p in &mut out {
        p.value = section_volume(&SectionQuery::new(p.direction.clone(), t)).value;
    }
    out
}

/// The family whose section at `t` matches `value` within `match_tol` and
/// whose direction is nearest to `dir`; [`FamilyLabel::Other`] if none is
/// close.
pub fn classify(dir: &CanonicalDirection, t: f64, value: f64, match_tol: f64) -> FamilyLabel {
    let n = dir.dimension();
    if t < 0.0 {
        return mirror_label(n.get(), classify(&dir.negate(), -t, value, match_tol));
    }
    label_candidates(n, t)
        .into_iter()
        .filter(|c| (c.value - value).abs() <= match_tol)
        .map(|c| (dir.distance(&c.direction), c.label))
        .filter(|&(d, _)| d <= LABEL_DIR_TOL)
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map_or(FamilyLabel::Other, |(_, l)| l)
}

fn verdict(mode: Mode, best: f64, dir: &CanonicalDirection, preds: &[FamilyPrediction], cfg: &SearchConfig) -> Verdict {
    if preds.is_empty() {
        return Verdict::NoPrediction;
    }
    if preds
        .iter()
        .any(|p| (best - p.value).abs() <= cfg.match_tol && dir.distance(&p.direction) <= cfg.dir_tol)
    {
        return Verdict::MatchesPrediction;
    }
    let reference = match mode {
        Mode::Max => preds.iter().map(|p| p.value).fold(f64::NEG_INFINITY, f64::max),
        Mode::Min => preds.iter().map(|p| p.value).fold(f64::INFINITY, f64::min),
    };
    if best >= reference {
        Verdict::ExceedsPrediction
    } else {
        Verdict::BelowPrediction
    }
}

fn lexicographic(a: &CanonicalDirection, b: &CanonicalDirection) -> std::cmp::Ordering {
    a.coords()
        .iter()
        .zip(b.coords())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Multistart search for the maximum or minimum of `A(·, t)`.
///
/// Starts are all `a^(k)`, the predicted families (unless disabled) and
/// `config.restarts` uniform random points. Every start gets a coarse
/// polish; the best `config.full_polish` get a fine one. The result is
/// deterministic for a given seed regardless of thread count.
pub fn search_extremum(n: Dimension, t: f64, mode: Mode, config: &SearchConfig) -> SearchReport {
    let m = n.get();
    let frame = SumZeroFrame::new(m);
    let preds = predictions(n, t, mode);

    if !t.is_finite() || t.abs() >= simplex_constants(n).vertex_distance {
        let dir = axis_direction(n, 1).expect("k = 1");
        return SearchReport {
            n: m,
            t,
            mode,
            best_value: 0.0,
            label: FamilyLabel::Other,
            best_direction: dir,
            restart_values: RestartStats {
                count: 0,
                best: 0.0,
                worst: 0.0,
                mean: 0.0,
                median: 0.0,
                hits: 0,
                evaluations: 0,
            },
            predicted: preds,
            verdict: Verdict::NoPrediction,
        };
    }

    let mut starts: Vec<Vec<f64>> = (1..=m)
        .map(|k| frame.coordinates(axis_direction(n, k).expect("valid k").coords()))
        .collect();
    if config.family_seeds {
        for p in &preds {
            starts.push(frame.coordinates(p.direction.coords()));
        }
    }
    let seeded = starts.len();
    starts.extend((0..config.restarts).map(|i| {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(i as u64);
        normalize((0..m).map(|_| StandardNormal.sample(&mut rng)).collect())
    }));
    debug_assert!(starts.len() >= seeded);

    let obj = Objective {
        n,
        frame: frame.clone(),
        t,
        mode,
    };
    let budget = config.polish_iters.max(50);
    let mut results: Vec<Polished> = starts
        .into_par_iter()
        .map(|u| polish(&obj, normalize(u), &COARSE, budget))
        .collect();

    let order_key = |r: &Polished| (r.obj, obj.direction(&r.u));
    let mut order: Vec<usize> = (0..results.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (order_key(&results[i]), order_key(&results[j]));
        a.0.total_cmp(&b.0).then_with(|| lexicographic(&a.1, &b.1))
    });
    let fine: Vec<(usize, Polished)> = order
        .iter()
        .take(config.full_polish)
        .copied()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|i| {
            let p = polish(&obj, results[i].u.clone(), &FINE, budget);
            (i, p)
        })
        .collect();
    for (i, p) in fine {
        let evals = results[i].evals + p.evals;
        results[i] = Polished { evals, ..p };
    }

    let best = results
        .iter()
        .min_by(|a, b| {
            let (da, db) = (obj.direction(&a.u), obj.direction(&b.u));
            a.obj.total_cmp(&b.obj).then_with(|| lexicographic(&da, &db))
        })
        .expect("at least one start");
    let best_direction = obj.direction(&best.u);
    let best_value = section_volume(&SectionQuery::new(best_direction.clone(), t)).value;

    let mut values: Vec<f64> = results
        .iter()
        .map(|r| section_volume(&SectionQuery::new(obj.direction(&r.u), t)).value)
        .collect();
    values.sort_by(f64::total_cmp);
    let count = values.len();
    let median = if count % 2 == 1 {
        values[count / 2]
    } else {
        0.5 * (values[count / 2 - 1] + values[count / 2])
    };
    let restart_values = RestartStats {
        count,
        best: best_value,
        worst: match mode {
            Mode::Max => values[0],
            Mode::Min => values[count - 1],
        },
        mean: values.iter().sum::<f64>() / count as f64,
        median,
        hits: values.iter().filter(|v| (*v - best_value).abs() <= config.match_tol).count(),
        evaluations: results.iter().map(|r| r.evals).sum(),
    };

    let verdict = verdict(mode, best_value, &best_direction, &preds, config);
    SearchReport {
        n: m,
        t,
        mode,
        label: classify(&best_direction, t, best_value, config.match_tol),
        best_direction,
        best_value,
        restart_values,
        predicted: preds,
        verdict,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeBoundary {
    pub left: FamilyLabel,
    pub right: FamilyLabel,
    /// Midpoint of the final bracket.
    pub t: f64,
    pub width: f64,
}

/// Locates the distances where the extremal family changes.
///
/// Every grid point is searched without family seeds and labelled with
/// [`classify`]; each label change is then refined by bisection until the
/// bracket is narrower than `t_tol`.
pub fn detect_regime_boundaries(
    n: Dimension,
    mode: Mode,
    grid: &[f64],
    config: &SearchConfig,
    t_tol: f64,
) -> Vec<RegimeBoundary> {
    let cfg = SearchConfig {
        family_seeds: false,
        ..config.clone()
    };
    let label_at = |t: f64| search_extremum(n, t, mode, &cfg).label;
    let labels: Vec<FamilyLabel> = grid.par_iter().map(|&t| label_at(t)).collect();
    let changes: Vec<usize> = (1..grid.len()).filter(|&i| labels[i] != labels[i - 1]).collect();
    changes
        .into_par_iter()
        .map(|i| {
            let (mut lo, mut hi) = (grid[i - 1], grid[i]);
            let (left, mut right) = (labels[i - 1], labels[i]);
            while hi - lo > t_tol {
                let mid = 0.5 * (lo + hi);
                let l = label_at(mid);
                if l == left {
                    lo = mid;
                } else {
                    hi = mid;
                    right = l;
                }
            }
            RegimeBoundary {
                left,
                right,
                t: 0.5 * (lo + hi),
                width: hi - lo,
            }
        })
        .collect()
}
