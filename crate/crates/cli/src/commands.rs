use std::ops::RangeInclusive;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use simplex_sections::search::crossover::asymptotic_residual;
use simplex_sections::search::{
    asymptotic_crossover_c, crossover_t, predictions, search_extremum, Mode, SearchConfig,
};
use simplex_sections::section::section_volume_with;
use simplex_sections::verify::{
    sample_inequalities, verify_discontinuities, verify_formula_oracle, verify_large_dims,
    verify_small_dims, Measured, Status, SuiteSizes, VerificationReport,
};
use simplex_sections::{
    axis_direction, axis_section_volume, canonicalize, Branch, CanonicalDirection, Dimension,
    SectionQuery, SectionValue,
};

use crate::config::{CliConfig, Format};
use crate::output::{emit, fixed, json, sci, table};
use crate::Suite;

enum DirectionArg {
    Axis(usize, CanonicalDirection),
    Coords(CanonicalDirection),
}

impl DirectionArg {
    fn parse(n: Dimension, s: &str) -> Result<Self> {
        if let Some(k) = s.strip_prefix("axis:") {
            let k: usize = k.trim().parse().with_context(|| format!("bad axis index in {s:?}"))?;
            return Ok(DirectionArg::Axis(k, axis_direction(n, k)?));
        }
        let raw = s
            .split(',')
            .map(|x| x.trim().parse::<f64>().with_context(|| format!("bad coordinate {x:?}")))
            .collect::<Result<Vec<_>>>()?;
        if raw.len() != n.ambient() {
            bail!("direction has {} coordinates, dimension {} needs {}", raw.len(), n.get(), n.ambient());
        }
        Ok(DirectionArg::Coords(canonicalize(n, &raw)?))
    }

    fn direction(&self) -> &CanonicalDirection {
        match self {
            DirectionArg::Axis(_, d) | DirectionArg::Coords(d) => d,
        }
    }

    fn value(&self, n: Dimension, t: f64, gap_tol: f64) -> Result<SectionValue> {
        let d = self.direction();
        match *self {
            DirectionArg::Axis(k, _) => {
                let value = axis_section_volume(n, k, t)?;
                Ok(SectionValue {
                    value,
                    branch: if value == 0.0 { Branch::Zero } else { Branch::ClosedFormAxis },
                    min_gap: min_gap(d),
                })
            }
            DirectionArg::Coords(_) => {
                Ok(section_volume_with(&SectionQuery::new(d.clone(), t), gap_tol))
            }
        }
    }
}

fn min_gap(d: &CanonicalDirection) -> f64 {
    d.coords().windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min)
}

fn finite(name: &str, x: f64) -> Result<f64> {
    if !x.is_finite() {
        bail!("{name} must be finite");
    }
    Ok(x)
}

#[derive(Serialize)]
struct SectionOut {
    n: usize,
    direction: CanonicalDirection,
    t: f64,
    value: f64,
    branch: Branch,
    min_gap: f64,
}

pub fn section(cfg: &CliConfig, n: usize, dir: &str, t: f64) -> Result<ExitCode> {
    let dim = Dimension::new(n)?;
    let t = finite("t", t)?;
    let arg = DirectionArg::parse(dim, dir)?;
    let v = arg.value(dim, t, cfg.tolerance("gap_tol"))?;
    let out = SectionOut {
        n,
        direction: arg.direction().clone(),
        t,
        value: v.value,
        branch: v.branch,
        min_gap: v.min_gap,
    };
    let text = match cfg.output_format {
        Format::Json => json(&out),
        Format::Csv => format!(
            "n,t,value,branch,min_gap\n{},{},{},{},{}\n",
            n,
            sci(t),
            sci(v.value),
            v.branch,
            sci(v.min_gap)
        ),
        Format::Table => {
            let coords: Vec<String> = out.direction.coords().iter().map(|&x| fixed(x)).collect();
            format!(
                "direction  [{}]\nt          {}\nvalue      {}\nbranch     {}\nmin_gap    {}\n",
                coords.join(", "),
                fixed(t),
                fixed(v.value),
                v.branch,
                sci(v.min_gap)
            )
        }
    };
    emit(&text, cfg.output_path.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

enum Family {
    Direction(DirectionArg),
    Predicted(Mode),
}

#[derive(Serialize)]
struct SweepRow {
    t: f64,
    /// NaN (JSON null) where nothing is predicted.
    value: f64,
    label: String,
}

/// `steps` equally spaced points from `t_min` to `t_max`; one step is `t_min` alone.
fn grid(t_min: f64, t_max: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![t_min];
    }
    let h = (t_max - t_min) / (steps - 1) as f64;
    (0..steps).map(|i| if i + 1 == steps { t_max } else { t_min + h * i as f64 }).collect()
}

pub fn sweep(
    cfg: &CliConfig,
    n: usize,
    family: &str,
    dir: Option<&str>,
    t_min: f64,
    t_max: f64,
    steps: usize,
) -> Result<ExitCode> {
    let dim = Dimension::new(n)?;
    let (t_min, t_max) = (finite("t-min", t_min)?, finite("t-max", t_max)?);
    if steps == 0 {
        bail!("steps must be at least 1");
    }
    if t_max < t_min {
        bail!("t-max is below t-min");
    }
    let family_name = family;
    let family = match family {
        "max-family" => Family::Predicted(Mode::Max),
        "min-family" => Family::Predicted(Mode::Min),
        "fixed-direction" | "fixed" => {
            let dir = dir.context("fixed-direction needs --dir")?;
            Family::Direction(DirectionArg::parse(dim, dir)?)
        }
        f if f.starts_with("axis:") => Family::Direction(DirectionArg::parse(dim, f)?),
        f => bail!("unknown family {f:?}; expected axis:k, max-family, min-family or fixed-direction"),
    };
    if dir.is_some() && !matches!(family_name, "fixed-direction" | "fixed") {
        bail!("--dir only applies to fixed-direction");
    }
    let gap_tol = cfg.tolerance("gap_tol");
    let label = match &family {
        Family::Direction(DirectionArg::Axis(k, _)) => format!("a^({k})"),
        _ => "fixed".to_string(),
    };
    let rows = grid(t_min, t_max, steps)
        .into_par_iter()
        .map(|t| -> Result<SweepRow> {
            Ok(match &family {
                Family::Direction(d) => SweepRow { t, value: d.value(dim, t, gap_tol)?.value, label: label.clone() },
                Family::Predicted(mode) => match predictions(dim, t, *mode).first() {
                    Some(p) => SweepRow { t, value: p.value, label: p.label.to_string() },
                    None => SweepRow { t, value: f64::NAN, label: "none".into() },
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let text = match cfg.output_format {
        Format::Json => json(&rows),
        Format::Csv => {
            let mut s = String::from("t,value,label\n");
            for r in &rows {
                s.push_str(&format!("{},{},{}\n", sci(r.t), sci(r.value), r.label));
            }
            s
        }
        Format::Table => {
            let cells: Vec<Vec<String>> =
                rows.iter().map(|r| vec![fixed(r.t), fixed(r.value), r.label.clone()]).collect();
            table(&["t", "value", "label"], &cells)
        }
    };
    emit(&text, cfg.output_path.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

pub fn search(cfg: &CliConfig, n: usize, t: f64, mode: Mode, restarts: usize) -> Result<ExitCode> {
    let dim = Dimension::new(n)?;
    let t = finite("t", t)?;
    let config = SearchConfig {
        restarts,
        seed: cfg.seed,
        match_tol: cfg.tolerance("match_tol"),
        dir_tol: cfg.tolerance("dir_tol"),
        ..SearchConfig::default()
    };
    let report = search_extremum(dim, t, mode, &config);
    let predicted = report.predicted.first();
    let text = match cfg.output_format {
        Format::Json => json(&report),
        Format::Csv => format!(
            "t,best_value,predicted_value,label,verdict\n{},{},{},{},{}\n",
            sci(t),
            sci(report.best_value),
            sci(report.predicted_value().unwrap_or(f64::NAN)),
            report.label,
            report.verdict
        ),
        Format::Table => {
            let coords: Vec<String> = report.best_direction.coords().iter().map(|&x| fixed(x)).collect();
            let s = &report.restart_values;
            let predicted = match predicted {
                Some(p) => format!("{} {}", p.label, fixed(p.value)),
                None => "none".to_string(),
            };
            format!(
                "n          {n}\nt          {}\nmode       {mode}\nbest       {}\nlabel      {}\ndirection  [{}]\npredicted  {predicted}\nverdict    {}\nrestarts   {} runs, {} within tolerance of best, median {}, worst {}\n",
                fixed(t),
                fixed(report.best_value),
                report.label,
                coords.join(", "),
                report.verdict,
                s.count,
                s.hits,
                fixed(s.median),
                fixed(s.worst),
            )
        }
    };
    emit(&text, cfg.output_path.as_deref())?;
    Ok(if report.verdict.is_discrepancy() { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn each_n(
    range: &RangeInclusive<usize>,
    f: impl Fn(usize) -> simplex_sections::Result<VerificationReport>,
) -> Result<Vec<VerificationReport>> {
    range.clone().map(|n| f(n).map_err(Into::into)).collect()
}

fn clamp(given: &Option<RangeInclusive<usize>>, lo: usize, hi: usize) -> Option<RangeInclusive<usize>> {
    match given {
        None => Some(lo..=hi),
        Some(r) => {
            let r = (*r.start()).max(lo)..=(*r.end()).min(hi);
            (!r.is_empty()).then_some(r)
        }
    }
}

fn timed(
    f: impl FnOnce() -> Result<Vec<VerificationReport>>,
) -> Result<Vec<VerificationReport>> {
    let start = std::time::Instant::now();
    let mut reports = f()?;
    let per = start.elapsed() / reports.len().max(1) as u32;
    for r in &mut reports {
        r.runtime = per;
    }
    Ok(reports)
}

fn measured_csv(m: &Measured) -> String {
    match m {
        Measured::Scalar(x) => sci(*x),
        Measured::Vector(v) => v.iter().map(|&x| sci(x)).collect::<Vec<_>>().join(";"),
    }
}

fn verify_table(reports: &[VerificationReport]) -> String {
    let rows: Vec<Vec<String>> = reports
        .iter()
        .flat_map(|r| &r.records)
        .map(|c| {
            vec![
                c.status.to_string(),
                c.claim_id.clone(),
                c.measured.to_string(),
                c.expected.to_string(),
                format!("{:.1e}", c.tolerance),
                c.note.clone().unwrap_or_default(),
            ]
        })
        .collect();
    let mut s = table(&["status", "claim", "measured", "expected", "tol", "note"], &rows);
    s.push('\n');
    for r in reports {
        s.push_str(&format!(
            "{}: {} pass, {} fail, {} skipped ({:.1?})\n",
            r.suite,
            r.count(Status::Pass),
            r.count(Status::Fail),
            r.count(Status::Skipped),
            r.runtime
        ));
    }
    let total: usize = reports.iter().map(|r| r.records.len()).sum();
    let failed: usize = reports.iter().map(|r| r.count(Status::Fail)).sum();
    s.push_str(&format!("{total} records, {failed} failed\n"));
    s
}

pub fn verify(
    cfg: &CliConfig,
    suite: Suite,
    range: Option<RangeInclusive<usize>>,
    grid: Option<usize>,
    samples: Option<usize>,
    restarts: Option<usize>,
) -> Result<ExitCode> {
    let d = SuiteSizes::default();
    let seed = cfg.seed;
    let all = suite == Suite::All;
    // A single suite gets the requested dimensions as given, so an invalid
    // one is reported; `all` clips the request to each suite's own range.
    let pick = |lo, hi| if all { clamp(&range, lo, hi) } else { Some(range.clone().unwrap_or(lo..=hi)) };
    let mut reports = Vec::new();
    if matches!(suite, Suite::LargeDims | Suite::All) {
        if let Some(r) = pick(4, 8) {
            let (g, k) = (grid.unwrap_or(d.large_dims_grid), restarts.unwrap_or(d.restarts));
            reports.extend(timed(|| each_n(&r, |n| verify_large_dims(n, g, k, seed)))?);
        }
    }
    if matches!(suite, Suite::SmallDims | Suite::All) {
        if let Some(r) = pick(2, 3) {
            let g = grid.unwrap_or(d.small_dims_grid);
            reports.extend(timed(|| each_n(&r, |n| verify_small_dims(n, g, seed)))?);
        }
    }
    if matches!(suite, Suite::Discontinuities | Suite::All) {
        reports.extend(timed(|| Ok(vec![verify_discontinuities(seed)?]))?);
    }
    if matches!(suite, Suite::Inequalities | Suite::All) {
        if let Some(r) = pick(4, 10) {
            let s = samples.unwrap_or(d.inequality_samples);
            reports.extend(timed(|| Ok(vec![sample_inequalities(r, s, seed)?]))?);
        }
    }
    if matches!(suite, Suite::Oracle | Suite::All) {
        if let Some(r) = pick(2, 6) {
            let s = samples.unwrap_or(d.oracle_samples);
            reports.extend(timed(|| Ok(vec![verify_formula_oracle(r, s, seed)?]))?);
        }
    }
    if reports.is_empty() {
        bail!("no suite covers the requested dimensions");
    }

    let summary = verify_table(&reports);
    let text = match cfg.output_format {
        Format::Table => summary.clone(),
        Format::Json => json(&reports),
        Format::Csv => {
            let mut s = String::from("suite,claim_id,status,measured,expected,tolerance\n");
            for r in &reports {
                for c in &r.records {
                    s.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        r.suite,
                        c.claim_id,
                        c.status,
                        measured_csv(&c.measured),
                        measured_csv(&c.expected),
                        sci(c.tolerance)
                    ));
                }
            }
            s
        }
    };
    emit(&text, cfg.output_path.as_deref())?;
    // Machine-readable output sent to a file still leaves a readable table.
    if cfg.output_path.is_some() && cfg.output_format != Format::Table {
        emit(&summary, None)?;
    }
    let ok = reports.iter().all(VerificationReport::all_pass);
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

#[derive(Serialize)]
struct CrossoverOut {
    quantity: String,
    n: Option<usize>,
    value: f64,
    residual: f64,
}

pub fn crossover(cfg: &CliConfig, n: Option<usize>, asymptotic: bool) -> Result<ExitCode> {
    let out = match (n, asymptotic) {
        (_, true) => {
            let c = asymptotic_crossover_c()?;
            CrossoverOut { quantity: "c".into(), n: None, value: c, residual: asymptotic_residual(c) }
        }
        (Some(n), false) => {
            let dim = Dimension::new(n)?;
            let t = crossover_t(dim)?;
            let residual = axis_section_volume(dim, 1, t)? - axis_section_volume(dim, 2, t)?;
            CrossoverOut { quantity: format!("t_{n}"), n: Some(n), value: t, residual }
        }
        (None, false) => bail!("give --n or --asymptotic"),
    };
    let text = match cfg.output_format {
        Format::Json => json(&out),
        Format::Csv => format!("quantity,value,residual\n{},{},{}\n", out.quantity, sci(out.value), sci(out.residual)),
        Format::Table => format!("{} = {}  (residual {})\n", out.quantity, fixed(out.value), sci(out.residual)),
    };
    emit(&text, cfg.output_path.as_deref())?;
    Ok(ExitCode::SUCCESS)
}
