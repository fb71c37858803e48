//! Conformal risk control for synthetic data augmentation.
//!
//! Generative augmentation pipelines produce `K` candidate generations per
//! source sample, each scored by a cheap surrogate evaluator; a small
//! calibration split additionally carries expensive gold-standard scores.
//! This crate calibrates per-sample surrogate cutoffs so that the number of
//! low-quality generations accepted per sample is controlled at a
//! user-specified level, in the distribution-free sense of conformal
//! prediction:
//!
//! ```text
//! P( #{kept generations with gold score < λ} ≤ ρ ) ≥ 1 − α
//! ```
//!
//! The pipeline is split into small modules:
//!
//! - [`model`]: domain types (records, generations, configuration) and
//!   dataset validation.
//! - [`risk`]: the false-inclusion loss and the per-sample nonconformity
//!   score built from it.
//! - [`kernel`]: RBF kernel on conditioning embeddings, Gram assembly and
//!   the median-heuristic bandwidth.
//! - [`pca`]: deterministic PCA used to produce low-dimensional conditioning
//!   embeddings from raw feature matrices.
//! - [`kqr`]: regularized kernel quantile regression solved in its dual via
//!   SMO-style pairwise ascent, with KKT certification.
//! - [`conformal`]: marginal split-conformal thresholds, conditional cutoffs
//!   driven by the KQR dual event, and the coverage-gap estimator.
//! - [`pipeline`]: end-to-end filtering orchestration and the filtering
//!   strategies (unaugmented / unfiltered / fixed threshold / hybrid /
//!   marginal CP / conditional CP), plus the surrogate smoother.
//! - [`evalsim`]: synthetic scenarios, empirical coverage measurement, and
//!   selection/diversity metrics for validating the guarantees at desk scale.
//! - [`io`]: JSONL/CSV dataset formats, decision output, and the calibration
//!   artifact, with reproducible float formatting.
//! - [`oracles`]: slow, independent reference implementations used by the
//!   test suites to cross-check the fast paths.

pub mod conformal;
pub mod error;
pub mod evalsim;
pub mod io;
pub mod kernel;
pub mod kqr;
pub mod model;
pub mod oracles;
pub mod pca;
pub mod pipeline;
pub mod risk;

pub use error::Error;
pub use model::{
    Dataset, FilterConfig, FilterDecision, SampleRecord, ScoredGeneration, ValidationReport,
};
pub use pipeline::Strategy;
