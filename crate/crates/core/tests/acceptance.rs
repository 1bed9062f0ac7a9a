//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion does.

use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use simplex_sections::search::{asymptotic_crossover_c, crossover_t, search_extremum, Mode, SearchConfig};
use simplex_sections::verify::{
    sample_inequalities, verify_discontinuities, verify_formula_oracle, verify_large_dims, verify_small_dims,
    ClaimRecord, Measured, Status, VerificationReport,
};
use simplex_sections::{canonicalize, cap_volume, derivative_check, simplex_constants, Dimension, SectionQuery};

struct Outcome {
    pass: bool,
    detail: String,
}

fn dim(n: usize) -> Dimension {
    Dimension::new(n).unwrap()
}

fn scalar(r: &ClaimRecord) -> f64 {
    match &r.measured {
        Measured::Scalar(x) => *x,
        Measured::Vector(v) => v.first().copied().unwrap_or(f64::NAN),
    }
}

fn failures(reports: &[VerificationReport]) -> Vec<String> {
    reports
        .iter()
        .flat_map(|r| r.records.iter())
        .filter(|r| r.status == Status::Fail)
        .map(|r| format!("{} measured {} expected {} ({})", r.claim_id, r.measured, r.expected, r.note.as_deref().unwrap_or("")))
        .collect()
}

fn from_reports(reports: &[VerificationReport], summary: String) -> Outcome {
    let bad = failures(reports);
    let records: usize = reports.iter().map(|r| r.records.len()).sum();
    Outcome {
        pass: bad.is_empty() && records > 0,
        detail: if bad.is_empty() {
            format!("{records} records; {summary}")
        } else {
            format!("{} of {records} records fail; first: {}", bad.len(), bad[0])
        },
    }
}

fn find<'a>(r: &'a VerificationReport, id: &str) -> &'a ClaimRecord {
    r.records.iter().find(|x| x.claim_id == id).unwrap_or_else(|| panic!("missing record {id}"))
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let r = verify_formula_oracle(2..=6, 200, 0).unwrap();
    let elapsed = start.elapsed();
    let random: Vec<&ClaimRecord> = r.records.iter().filter(|x| x.claim_id.ends_with("/random")).collect();
    let worst = random.iter().map(|x| scalar(x)).fold(0.0, f64::max);
    Outcome {
        pass: random.len() == 5 && worst <= 1e-9 && elapsed <= Duration::from_secs(60),
        detail: format!("max relative deviation {worst:.3e} over n = 2..6, {:.1?}", elapsed),
    }
}

fn small_dims(n: usize) -> Outcome {
    let r = verify_small_dims(n, 200, 0).unwrap();
    let summary = r.records.iter().filter(|x| x.claim_id.contains("/boundary/")).map(|x| {
        format!("{} = {:.9}", x.claim_id.rsplit('/').next().unwrap(), scalar(x))
    });
    let summary = summary.collect::<Vec<_>>().join(", ");
    from_reports(std::slice::from_ref(&r), summary)
}

fn discontinuities() -> Outcome {
    let r = verify_discontinuities(0).unwrap();
    let summary = format!(
        "n=2 jump {:.12} -> {:.6}, n=3 jump {:.12} -> {:.6}",
        scalar(find(&r, "discontinuities/n2/value-at")),
        scalar(find(&r, "discontinuities/n2/right-limit")),
        scalar(find(&r, "discontinuities/n3/value-at")),
        scalar(find(&r, "discontinuities/n3/right-limit")),
    );
    from_reports(std::slice::from_ref(&r), summary)
}

fn large_dims() -> Outcome {
    let start = Instant::now();
    let reports: Vec<VerificationReport> = [5, 6, 7, 4].iter().map(|&n| verify_large_dims(n, 20, 64, 0).unwrap()).collect();
    let elapsed = start.elapsed();
    let switch = scalar(find(&reports[3], "large-dims/n4/switch"));
    let mut out = from_reports(&reports, format!("n = 4 switch at {switch:.6}, {elapsed:.1?}"));
    if elapsed > Duration::from_secs(180) {
        out.pass = false;
        out.detail = format!("took {elapsed:.1?}; {}", out.detail);
    }
    out
}

fn crossovers() -> Outcome {
    let t: Vec<f64> = [3, 4, 5].iter().map(|&n| crossover_t(dim(n)).unwrap()).collect();
    let c = asymptotic_crossover_c().unwrap();
    let pass = (t[0] - 0.4357).abs() <= 5e-4
        && (t[1] - 0.3877).abs() <= 5e-4
        && (t[2] - 0.3426).abs() <= 5e-4
        && (c - 2.6363).abs() <= 1e-3;
    Outcome {
        pass,
        detail: format!("t3 = {:.6}, t4 = {:.6}, t5 = {:.6}, c = {c:.6}", t[0], t[1], t[2]),
    }
}

fn random_query(n: usize, rng: &mut ChaCha8Rng) -> SectionQuery {
    loop {
        let raw: Vec<f64> = (0..=n).map(|_| StandardNormal.sample(rng)).collect();
        if let Ok(d) = canonicalize(dim(n), &raw) {
            let t = d.last() + (d.first() - d.last()) * rng.gen_range(0.0..1.0);
            return SectionQuery::new(d, t);
        }
    }
}

fn cap_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut worst_total = 0.0f64;
    for n in 2..=8 {
        let q = random_query(n, &mut rng);
        let below = SectionQuery::new(q.direction.clone(), q.direction.last() - 1e-3);
        let full = simplex_constants(dim(n)).volume;
        worst_total = worst_total.max((cap_volume(&below).upper - full).abs());
    }
    let mut worst_derivative = 0.0f64;
    for n in 2..=6 {
        for _ in 0..50 {
            let q = random_query(n, &mut rng);
            worst_derivative = worst_derivative.max(derivative_check(&q, 1e-5).unwrap());
        }
    }
    Outcome {
        pass: worst_total <= 1e-12 && worst_derivative <= 1e-6,
        detail: format!("whole-simplex cap error {worst_total:.2e} (n = 2..8), central difference residual {worst_derivative:.2e}"),
    }
}

fn inequalities() -> Outcome {
    let r = sample_inequalities(4..=10, 10_000, 0).unwrap();
    let violations: f64 = r.records.iter().map(scalar).sum();
    from_reports(std::slice::from_ref(&r), format!("{violations} violations"))
}

fn central_sections() -> Outcome {
    let cfg = SearchConfig::default();
    let v2 = search_extremum(dim(2), 0.0, Mode::Max, &cfg).best_value;
    let v3 = search_extremum(dim(3), 0.0, Mode::Max, &cfg).best_value;
    Outcome {
        pass: (v2 - 1.5f64.sqrt()).abs() <= 1e-6 && (v3 - 0.5f64.sqrt()).abs() <= 1e-6,
        detail: format!("n = 2: {v2:.12}, n = 3: {v3:.12}"),
    }
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("n = 2 extremal families", || small_dims(2)),
        ("n = 3 extremal families", || small_dims(3)),
        ("discontinuity constants", discontinuities),
        ("vertex-direction maximality, n = 4..7", large_dims),
        ("crossover values", crossovers),
        ("cap identities", cap_identities),
        ("sampled inequalities", inequalities),
        ("central sections", central_sections),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        // Written to the raw handle so the lines survive output capture.
        writeln!(
            std::io::stderr(),
            "{} [{}] {name}: {} ({:.1?})",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            start.elapsed()
        )
        .unwrap();
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
