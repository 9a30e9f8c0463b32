//! Suite configuration and the structured report every suite returns.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::{HTypeAlgebra, OperatorParams};
use crate::error::{Error, Result};

/// Inputs shared by all suites. Unused fields are ignored by suites that do
/// not need them; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub group: String,
    pub k: f64,
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    /// Monte Carlo samples per region.
    pub samples: usize,
    /// Monte Carlo samples per shell inside Rayleigh-quotient integrals.
    pub hardy_samples: usize,
    /// Points for pointwise checks.
    pub points: usize,
    pub eps_list: Vec<f64>,
    pub p_list: Vec<f64>,
    pub alpha_list: Vec<f64>,
    pub corpus_size: usize,
    pub corpus_seed: u64,
    pub j_max: usize,
    /// Sigma multiple for Monte Carlo checks; 0 picks 3, or 5 when `m + q > 5`.
    pub n_sigma: f64,
    /// Per-check tolerance overrides keyed by check id.
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            group: "heisenberg:1".into(),
            k: 1.0,
            p: 2.0,
            alpha: 0.0,
            beta: 0.0,
            seed: 20_240_601,
            samples: 1_000_000,
            hardy_samples: 40_000,
            points: 500,
            eps_list: vec![1.0, 0.1, 0.01],
            p_list: vec![1.5, 2.0, 3.0],
            alpha_list: vec![-1.0, 0.0, 1.0],
            corpus_size: 50,
            corpus_seed: 7,
            j_max: 8,
            n_sigma: 0.0,
            tolerances: BTreeMap::new(),
        }
    }
}

impl SuiteConfig {
    pub fn algebra(&self) -> Result<HTypeAlgebra> {
        HTypeAlgebra::from_catalog(&self.group)
    }

    /// Group and unweighted parameters, validated.
    pub fn setup(&self) -> Result<(HTypeAlgebra, OperatorParams)> {
        let alg = self.algebra()?;
        let params = OperatorParams::new(&alg, self.k, self.p)?;
        if self.samples == 0 || self.points == 0 || self.hardy_samples == 0 {
            return Err(Error::InvalidArgument(
                "sample and point counts must be positive".into(),
            ));
        }
        Ok((alg, params))
    }

    /// Monte Carlo pass rule: `n_sigma` standard errors.
    pub fn mc_sigma(&self, alg: &HTypeAlgebra) -> f64 {
        if self.n_sigma > 0.0 {
            self.n_sigma
        } else if alg.m() + alg.q() > 5 {
            5.0
        } else {
            3.0
        }
    }

    pub fn tolerance(&self, id: &str, default: f64) -> f64 {
        self.tolerances.get(id).copied().unwrap_or(default)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// `error ≤ tolerance` for a deterministic quantity.
    Deterministic,
    /// `error ≤ tolerance` where `tolerance` is a multiple of `stderr`.
    MonteCarlo,
}

/// One claim confronted with its oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    pub claim: String,
    pub kind: CheckKind,
    /// Computed value (an estimate, or the worst error over a sample).
    pub value: f64,
    pub target: f64,
    pub error: f64,
    pub tolerance: f64,
    /// Standard error of `value`; 0 for deterministic checks.
    pub stderr: f64,
    pub samples: u64,
    pub passed: bool,
    pub note: String,
}

impl CheckRecord {
    /// A deterministic check passing iff `error ≤ tolerance`.
    pub fn deterministic(
        id: impl Into<String>,
        claim: impl Into<String>,
        value: f64,
        target: f64,
        error: f64,
        tolerance: f64,
        samples: u64,
    ) -> Self {
        Self {
            id: id.into(),
            claim: claim.into(),
            kind: CheckKind::Deterministic,
            value,
            target,
            error,
            tolerance,
            stderr: 0.0,
            samples,
            passed: error <= tolerance,
            note: String::new(),
        }
    }

    /// `|value - target| ≤ n_sigma · stderr`.
    pub fn monte_carlo(
        id: impl Into<String>,
        claim: impl Into<String>,
        value: f64,
        stderr: f64,
        target: f64,
        n_sigma: f64,
        samples: u64,
    ) -> Self {
        let error = (value - target).abs();
        let tolerance = n_sigma * stderr;
        Self {
            id: id.into(),
            claim: claim.into(),
            kind: CheckKind::MonteCarlo,
            value,
            target,
            error,
            tolerance,
            stderr,
            samples,
            passed: error <= tolerance,
            note: String::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn with_passed(mut self, passed: bool) -> Self {
        self.passed = passed;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub passed: bool,
    pub wall_time_s: f64,
    pub config: SuiteConfig,
    pub notes: Vec<String>,
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn new(suite: impl Into<String>, config: &SuiteConfig) -> Self {
        Self {
            suite: suite.into(),
            passed: true,
            wall_time_s: 0.0,
            config: config.clone(),
            notes: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, check: CheckRecord) {
        self.passed &= check.passed;
        self.checks.push(check);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn check(&self, id: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Bit-identical serialized content, ignoring wall time.
    pub fn same_results(&self, other: &Self) -> bool {
        let mut a = self.clone();
        let mut b = other.clone();
        a.wall_time_s = 0.0;
        b.wall_time_s = 0.0;
        matches!((a.to_toml(), b.to_toml()), (Ok(x), Ok(y)) if x == y)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}
