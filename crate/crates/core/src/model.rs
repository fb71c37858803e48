//! Domain types shared across the pipeline.
//!
//! Everything here is plain data plus validation; the numerical work lives in
//! the other modules. All types are immutable after validation and safe to
//! share read-only across worker threads.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One generation candidate with its quality scores.
///
/// `surrogate_score` is the cheap evaluator's score, available on every
/// record. `gold_score` is the expensive reference score, present only on
/// calibration data. `smoothed_surrogate` is populated by the surrogate
/// learner and, when present, replaces the raw surrogate wherever a surrogate
/// is consumed (see [`ScoredGeneration::effective_surrogate`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredGeneration {
    pub gen_id: String,
    #[serde(rename = "surrogate")]
    pub surrogate_score: f64,
    #[serde(rename = "gold", default, skip_serializing_if = "Option::is_none")]
    pub gold_score: Option<f64>,
    #[serde(rename = "smoothed", default, skip_serializing_if = "Option::is_none")]
    pub smoothed_surrogate: Option<f64>,
}

impl ScoredGeneration {
    pub fn new(gen_id: impl Into<String>, surrogate: f64, gold: Option<f64>) -> Self {
        ScoredGeneration {
            gen_id: gen_id.into(),
            surrogate_score: surrogate,
            gold_score: gold,
            smoothed_surrogate: None,
        }
    }

    /// Score used for filtering and scoring: the smoothed surrogate when the
    /// learner has produced one, otherwise the raw surrogate.
    pub fn effective_surrogate(&self) -> f64 {
        self.smoothed_surrogate.unwrap_or(self.surrogate_score)
    }
}

/// A source sample: its conditioning embedding, label, and `K` generations.
///
/// The embedding is ingested, never computed here; it is whatever
/// low-dimensional representation the caller conditions on. `K` may vary
/// across records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample_id: String,
    pub embedding: Vec<f64>,
    pub label: String,
    pub generations: Vec<ScoredGeneration>,
}

impl SampleRecord {
    /// Effective surrogate scores of all generations, in record order.
    pub fn surrogates(&self) -> Vec<f64> {
        self.generations
            .iter()
            .map(|g| g.effective_surrogate())
            .collect()
    }

    /// Gold scores of all generations, or `None` if any is missing.
    pub fn golds(&self) -> Option<Vec<f64>> {
        self.generations.iter().map(|g| g.gold_score).collect()
    }
}

/// Kernel bandwidth: a fixed value, or the median heuristic at fit time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    Auto,
    Fixed(f64),
}

/// Whether the conformal acceptance event is randomized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomizationMode {
    /// Compare the test dual coefficient against a uniform draw on
    /// `(−α, 1−α)`; exact coverage.
    Randomized,
    /// Strict comparison against `1−α`; conservative.
    Deterministic,
}

/// All risk-control hyperparameters for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    /// Gold quality threshold: a generation counts as low-quality when its
    /// gold score falls below this.
    pub lambda: f64,
    /// Contamination allowance: low-quality generations tolerated per sample.
    pub rho: u32,
    /// Miscoverage level.
    pub alpha: f64,
    /// RKHS regularization strength.
    pub gamma: f64,
    /// Kernel bandwidth.
    pub bandwidth: Bandwidth,
    pub randomization: RandomizationMode,
    /// Base seed; per-sample draws derive from it and the sample id.
    pub rng_seed: u64,
    /// Tolerance on the cutoff bisection over imputed scores.
    pub bisection_tol: f64,
    /// KKT / duality-gap tolerance for the quantile regression solver.
    pub solver_tol: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            lambda: 0.5,
            rho: 0,
            alpha: 0.1,
            gamma: 1.0,
            bandwidth: Bandwidth::Auto,
            randomization: RandomizationMode::Randomized,
            rng_seed: 0,
            bisection_tol: 1e-8,
            solver_tol: 1e-8,
        }
    }
}

impl FilterConfig {
    /// Check every field against its legal range.
    pub fn validate(&self) -> Result<(), crate::Error> {
        let err = |m: String| Err(crate::Error::Config(m));
        if !self.lambda.is_finite() || !(0.0..=1.0).contains(&self.lambda) {
            return err(format!("lambda must be in [0, 1], got {}", self.lambda));
        }
        if !self.alpha.is_finite() || self.alpha <= 0.0 || self.alpha >= 1.0 {
            return err(format!("alpha must be in (0, 1), got {}", self.alpha));
        }
        if !self.gamma.is_finite() || self.gamma <= 0.0 {
            return err(format!("gamma must be positive, got {}", self.gamma));
        }
        if let Bandwidth::Fixed(xi) = self.bandwidth {
            if !xi.is_finite() || xi <= 0.0 {
                return err(format!("bandwidth must be positive, got {xi}"));
            }
        }
        if !self.bisection_tol.is_finite() || self.bisection_tol <= 0.0 {
            return err(format!(
                "bisection_tol must be positive, got {}",
                self.bisection_tol
            ));
        }
        if !self.solver_tol.is_finite() || self.solver_tol <= 0.0 {
            return err(format!(
                "solver_tol must be positive, got {}",
                self.solver_tol
            ));
        }
        Ok(())
    }
}

/// Per-sample filtering outcome.
///
/// For cutoff-based strategies every kept generation has effective surrogate
/// `≥ cutoff` and every dropped one is `< cutoff`. A `+∞` cutoff keeps
/// nothing, `−∞` keeps everything. The one exception is the hybrid strategy
/// on records that carry gold scores, where the cutoff applies to the gold
/// score instead (selection by the designated score).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterDecision {
    pub sample_id: String,
    #[serde(with = "crate::io::maybe_infinite")]
    pub cutoff: f64,
    pub kept: Vec<String>,
    pub dropped: Vec<String>,
    #[serde(rename = "coverage_gap", skip_serializing_if = "Option::is_none", default)]
    pub coverage_gap_estimate: Option<f64>,
}

/// One violation found by [`validate_dataset`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    EmptyDataset,
    DuplicateSampleId { sample_id: String },
    EmptyGenerations { sample_id: String },
    DuplicateGenId { sample_id: String, gen_id: String },
    DimensionMismatch { sample_id: String, expected: usize, found: usize },
    NonFiniteEmbedding { sample_id: String },
    ScoreOutOfRange { sample_id: String, gen_id: String, field: &'static str, value: f64 },
    MissingGold { sample_id: String, gen_id: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyDataset => write!(f, "dataset contains no records"),
            Violation::DuplicateSampleId { sample_id } => {
                write!(f, "{sample_id}: duplicate sample id")
            }
            Violation::EmptyGenerations { sample_id } => {
                write!(f, "{sample_id}: record has no generations")
            }
            Violation::DuplicateGenId { sample_id, gen_id } => {
                write!(f, "{sample_id}/{gen_id}: duplicate gen id")
            }
            Violation::DimensionMismatch { sample_id, expected, found } => {
                write!(f, "{sample_id}: dimension mismatch, expected {expected}, found {found}")
            }
            Violation::NonFiniteEmbedding { sample_id } => {
                write!(f, "{sample_id}: embedding has non-finite entries")
            }
            Violation::ScoreOutOfRange { sample_id, gen_id, field, value } => {
                write!(f, "{sample_id}/{gen_id}: {field} score out of range [0, 1]: {value}")
            }
            Violation::MissingGold { sample_id, gen_id } => {
                write!(f, "{sample_id}/{gen_id}: missing gold score")
            }
        }
    }
}

/// Structured list of everything wrong with an ingested dataset.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dataset validation failed ({} violations):", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

/// A dataset that has passed [`validate_dataset`]: consistent embedding
/// dimension, scores in range, unique ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<SampleRecord>,
    dim: usize,
}

impl Dataset {
    pub fn records(&self) -> &[SampleRecord] {
        &self.records
    }

    /// Shared embedding dimension of every record.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn into_records(self) -> Vec<SampleRecord> {
        self.records
    }
}

fn score_in_range(v: f64) -> bool {
    v.is_finite() && (0.0..=1.0).contains(&v)
}

/// Validate an ingested dataset, collecting every violation rather than
/// stopping at the first. Scores outside `[0, 1]` are rejected, not clamped.
///
/// Validation is idempotent: re-validating the records of a [`Dataset`]
/// returns an equal dataset.
pub fn validate_dataset(
    records: Vec<SampleRecord>,
    require_gold: bool,
) -> Result<Dataset, ValidationReport> {
    let mut violations = Vec::new();
    if records.is_empty() {
        violations.push(Violation::EmptyDataset);
        return Err(ValidationReport { violations });
    }

    let dim = records[0].embedding.len();
    let mut seen_samples = BTreeSet::new();
    for rec in &records {
        if !seen_samples.insert(rec.sample_id.clone()) {
            violations.push(Violation::DuplicateSampleId { sample_id: rec.sample_id.clone() });
        }
        if rec.embedding.len() != dim {
            violations.push(Violation::DimensionMismatch {
                sample_id: rec.sample_id.clone(),
                expected: dim,
                found: rec.embedding.len(),
            });
        }
        if rec.embedding.iter().any(|v| !v.is_finite()) {
            violations.push(Violation::NonFiniteEmbedding { sample_id: rec.sample_id.clone() });
        }
        if rec.generations.is_empty() {
            violations.push(Violation::EmptyGenerations { sample_id: rec.sample_id.clone() });
        }
        let mut seen_gens = BTreeSet::new();
        for gen in &rec.generations {
            if !seen_gens.insert(gen.gen_id.clone()) {
                violations.push(Violation::DuplicateGenId {
                    sample_id: rec.sample_id.clone(),
                    gen_id: gen.gen_id.clone(),
                });
            }
            if !score_in_range(gen.surrogate_score) {
                violations.push(Violation::ScoreOutOfRange {
                    sample_id: rec.sample_id.clone(),
                    gen_id: gen.gen_id.clone(),
                    field: "surrogate",
                    value: gen.surrogate_score,
                });
            }
            match gen.gold_score {
                Some(g) if !score_in_range(g) => violations.push(Violation::ScoreOutOfRange {
                    sample_id: rec.sample_id.clone(),
                    gen_id: gen.gen_id.clone(),
                    field: "gold",
                    value: g,
                }),
                None if require_gold => violations.push(Violation::MissingGold {
                    sample_id: rec.sample_id.clone(),
                    gen_id: gen.gen_id.clone(),
                }),
                _ => {}
            }
            if let Some(s) = gen.smoothed_surrogate {
                if !s.is_finite() {
                    violations.push(Violation::ScoreOutOfRange {
                        sample_id: rec.sample_id.clone(),
                        gen_id: gen.gen_id.clone(),
                        field: "smoothed",
                        value: s,
                    });
                }
            }
        }
    }

    if violations.is_empty() {
        Ok(Dataset { records, dim })
    } else {
        Err(ValidationReport { violations })
    }
}
