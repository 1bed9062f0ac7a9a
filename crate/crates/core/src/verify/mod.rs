//! Runnable claim suites. Each suite measures a quantity, compares it with
//! the value it should have and emits one [`ClaimRecord`] per comparison.
//!
//! Sampled inequality checks can only fail to find a counterexample; a
//! `Pass` there means exactly that, and the record notes the sample size.

mod inequalities;
mod suites;

use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use inequalities::{phi, phi4_tilde, phi_large, sample_inequalities};
pub use suites::{
    verify_discontinuities, verify_formula_oracle, verify_large_dims, verify_small_dims,
};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        })
    }
}

/// A measured quantity: one number or a vector compared componentwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Measured {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl Measured {
    fn values(&self) -> &[f64] {
        match self {
            Measured::Scalar(x) => std::slice::from_ref(x),
            Measured::Vector(v) => v,
        }
    }
}

impl std::fmt::Display for Measured {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Measured::Scalar(x) => write!(f, "{x:.12e}"),
            Measured::Vector(v) => {
                f.write_str("[")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{x:.12e}")?;
                }
                f.write_str("]")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimRecord {
    pub claim_id: String,
    /// Short statement of the claim being checked.
    pub anchor: String,
    pub measured: Measured,
    pub expected: Measured,
    pub tolerance: f64,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn judge(measured: &Measured, expected: &Measured, tolerance: f64) -> Status {
    let (m, e) = (measured.values(), expected.values());
    // NaN never compares <=, so a missing measurement fails.
    if m.len() == e.len() && m.iter().zip(e).all(|(x, y)| (x - y).abs() <= tolerance) {
        Status::Pass
    } else {
        Status::Fail
    }
}

impl ClaimRecord {
    pub fn new(
        claim_id: impl Into<String>,
        anchor: impl Into<String>,
        measured: Measured,
        expected: Measured,
        tolerance: f64,
    ) -> Self {
        let status = judge(&measured, &expected, tolerance);
        ClaimRecord {
            claim_id: claim_id.into(),
            anchor: anchor.into(),
            measured,
            expected,
            tolerance,
            status,
            note: None,
        }
    }

    pub fn scalar(
        claim_id: impl Into<String>,
        anchor: impl Into<String>,
        measured: f64,
        expected: f64,
        tolerance: f64,
    ) -> Self {
        Self::new(
            claim_id,
            anchor,
            Measured::Scalar(measured),
            Measured::Scalar(expected),
            tolerance,
        )
    }

    /// A record for a claim that could not be evaluated.
    pub fn skipped(claim_id: impl Into<String>, anchor: impl Into<String>, why: impl Into<String>) -> Self {
        ClaimRecord {
            claim_id: claim_id.into(),
            anchor: anchor.into(),
            measured: Measured::Vector(Vec::new()),
            expected: Measured::Vector(Vec::new()),
            tolerance: 0.0,
            status: Status::Skipped,
            note: Some(why.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub records: Vec<ClaimRecord>,
    pub seed: u64,
    /// Wall time; excluded from serialized output so reports are reproducible.
    #[serde(skip)]
    pub runtime: Duration,
}

impl VerificationReport {
    fn new(suite: &str, seed: u64) -> Self {
        VerificationReport {
            suite: suite.to_string(),
            records: Vec::new(),
            seed,
            runtime: Duration::ZERO,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ClaimRecord> {
        self.records.iter().filter(|r| r.status == Status::Fail)
    }

    pub fn count(&self, status: Status) -> usize {
        self.records.iter().filter(|r| r.status == status).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports contain only plain data")
    }
}

/// Per-sample generator: one ChaCha stream per `(claim, index)` pair, so
/// results do not depend on how work is split across threads.
pub(crate) fn sample_rng(seed: u64, claim: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((claim << 40) | index);
    rng
}

fn timed(f: impl FnOnce() -> Result<VerificationReport>) -> Result<VerificationReport> {
    let start = std::time::Instant::now();
    let mut r = f()?;
    r.runtime = start.elapsed();
    Ok(r)
}

/// Default sizes used by [`run_all`].
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteSizes {
    pub large_dims_grid: usize,
    pub restarts: usize,
    pub small_dims_grid: usize,
    pub inequality_samples: usize,
    pub oracle_samples: usize,
}

impl Default for SuiteSizes {
    fn default() -> Self {
        SuiteSizes {
            large_dims_grid: 20,
            restarts: 64,
            small_dims_grid: 200,
            inequality_samples: 10_000,
            oracle_samples: 200,
        }
    }
}

/// Every suite at default sizes.
pub fn run_all(seed: u64) -> Result<Vec<VerificationReport>> {
    run_all_with(seed, &SuiteSizes::default())
}

pub fn run_all_with(seed: u64, sizes: &SuiteSizes) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    for n in 4..=8 {
        out.push(timed(|| verify_large_dims(n, sizes.large_dims_grid, sizes.restarts, seed))?);
    }
    for n in 2..=3 {
        out.push(timed(|| verify_small_dims(n, sizes.small_dims_grid, seed))?);
    }
    out.push(timed(|| verify_discontinuities(seed))?);
    out.push(timed(|| sample_inequalities(4..=10, sizes.inequality_samples, seed))?);
    out.push(timed(|| verify_formula_oracle(2..=6, sizes.oracle_samples, seed))?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_follows_tolerance() {
        assert!(ClaimRecord::scalar("a", "x", 1.0, 1.0 + 1e-9, 1e-8).passed());
        assert!(!ClaimRecord::scalar("a", "x", 1.0, 1.1, 1e-8).passed());
        assert!(!ClaimRecord::scalar("a", "x", f64::NAN, 1.0, 1e-8).passed());
        let v = ClaimRecord::new(
            "v",
            "x",
            Measured::Vector(vec![1.0, 2.0]),
            Measured::Vector(vec![1.0, 2.5]),
            0.1,
        );
        assert_eq!(v.status, Status::Fail);
        let v = ClaimRecord::new(
            "v",
            "x",
            Measured::Vector(vec![1.0]),
            Measured::Vector(vec![1.0, 2.0]),
            0.1,
        );
        assert_eq!(v.status, Status::Fail);
    }

    #[test]
    fn skipped_does_not_fail_report() {
        let mut r = VerificationReport::new("s", 0);
        r.records.push(ClaimRecord::skipped("a", "x", "not applicable"));
        assert!(r.all_pass());
        assert_eq!(r.count(Status::Skipped), 1);
    }

    #[test]
    fn json_omits_runtime_and_round_trips() {
        let mut r = VerificationReport::new("s", 3);
        r.runtime = Duration::from_secs(5);
        r.records.push(ClaimRecord::scalar("a", "x", 0.1, 0.1, 0.0));
        let json = r.to_json();
        assert!(!json.contains("runtime"));
        let back: VerificationReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.records, r.records);
        assert_eq!(back.runtime, Duration::ZERO);
    }
}
