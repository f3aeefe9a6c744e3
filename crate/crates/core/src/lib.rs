//! Loop vulnerability detection for Python sources.
//!
//! Samples are parsed and their loops extracted. Findings then come either
//! from the rule engine or from a chat model prompted per loop block, and
//! are scored against annotated ground truth.

pub mod corpus;
pub mod detectors;
pub mod evaluation;
pub mod extractor;
pub mod llm_client;
pub mod prompt;
pub mod response_parser;

pub use corpus::{Category, CodeSample, GroundTruthAnnotation, PatternKind};
pub use detectors::{DetectorConfig, Finding, Origin};
pub use evaluation::{EvalCounts, EvalMetrics, MatchPolicy};

/// Metrics at the precision used throughout reports.
pub type Metrics = EvalMetrics<f64>;
/// Single-precision metrics, for callers storing many rows.
pub type MetricsF32 = EvalMetrics<f32>;
