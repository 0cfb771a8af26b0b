//! Check entries and the report they are collected into.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::verify::SampleConfig;

/// Relative slack used for inequality checks: `1e-9 * max(1, |rhs|)`.
pub const INEQUALITY_TOLERANCE: f64 = 1e-9;

pub fn default_tolerance(rhs: f64) -> f64 {
    INEQUALITY_TOLERANCE * rhs.abs().max(1.0)
}

/// One inequality `lhs <= rhs` evaluated at a sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub check: String,
    pub index: usize,
    pub radius: f64,
    /// sample point as `[re, im]` pairs
    pub point: Vec<[f64; 2]>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckEntry {
    /// `lhs <= rhs` with the default tolerance.
    pub fn le(check: impl Into<String>, index: usize, z: &[Complex64], lhs: f64, rhs: f64) -> Self {
        Self::with_tolerance(check, index, z, lhs, rhs, default_tolerance(rhs))
    }

    pub fn with_tolerance(
        check: impl Into<String>,
        index: usize,
        z: &[Complex64],
        lhs: f64,
        rhs: f64,
        tolerance: f64,
    ) -> Self {
        let margin = rhs - lhs;
        Self {
            check: check.into(),
            index,
            radius: crate::linalg::vec_norm(z),
            point: z.iter().map(|c| [c.re, c.im]).collect(),
            lhs,
            rhs,
            margin,
            tolerance,
            pass: margin >= -tolerance,
            note: None,
        }
    }

    /// Entry that fails unconditionally, e.g. when the quantity cannot be evaluated.
    pub fn failure(check: impl Into<String>, index: usize, z: &[Complex64], note: impl Into<String>) -> Self {
        let mut e = Self::with_tolerance(check, index, z, 0.0, 0.0, 0.0);
        e.margin = -1.0;
        e.pass = false;
        e.note = Some(note.into());
        e
    }

    pub fn noted(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Recomputes the pass flag from `lhs`, `rhs` and `tolerance`.
    pub fn recomputed_pass(&self) -> bool {
        self.rhs - self.lhs >= -self.tolerance
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub worst_margin: Option<f64>,
}

impl Summary {
    pub fn of(entries: &[CheckEntry]) -> Self {
        Self {
            total: entries.len(),
            passed: entries.iter().filter(|e| e.pass).count(),
            worst_margin: entries.iter().map(|e| e.margin).min_by(f64::total_cmp),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.passed == self.total
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub map: String,
    pub suite: String,
    /// hypothesis the results are conditional on, if any
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypothesis: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<SampleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub membership: Option<Summary>,
    pub entries: Vec<CheckEntry>,
    pub summary: Summary,
}

impl VerificationReport {
    pub fn new(map: impl Into<String>, suite: impl Into<String>, mut entries: Vec<CheckEntry>) -> Self {
        entries.sort_by(|a, b| a.check.cmp(&b.check).then(a.index.cmp(&b.index)));
        let summary = Summary::of(&entries);
        Self {
            map: map.into(),
            suite: suite.into(),
            hypothesis: None,
            config: None,
            membership: None,
            entries,
            summary,
        }
    }

    pub fn with_config(mut self, config: &SampleConfig) -> Self {
        self.config = Some(config.clone());
        self
    }

    pub fn with_hypothesis(mut self, hypothesis: impl Into<String>) -> Self {
        self.hypothesis = Some(hypothesis.into());
        self
    }

    pub fn with_membership(mut self, membership: Summary) -> Self {
        self.membership = Some(membership);
        self
    }

    pub fn all_passed(&self) -> bool {
        self.summary.all_passed()
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    /// Concatenates reports into one, suite names joined with `+`.
    pub fn combine(map: impl Into<String>, reports: Vec<VerificationReport>) -> Self {
        let suite = reports.iter().map(|r| r.suite.as_str()).collect::<Vec<_>>().join("+");
        let config = reports.iter().find_map(|r| r.config.clone());
        let hypothesis = {
            let hs: Vec<&str> = reports.iter().filter_map(|r| r.hypothesis.as_deref()).collect();
            (!hs.is_empty()).then(|| hs.join("; "))
        };
        let membership = reports.iter().find_map(|r| r.membership.clone());
        let entries = reports.into_iter().flat_map(|r| r.entries).collect();
        let mut out = Self::new(map, suite, entries);
        out.config = config;
        out.hypothesis = hypothesis;
        out.membership = membership;
        out
    }
}
