//! Virtual-screening protocol: target sets, train/test splits, ranking,
//! ROC AUC and enrichment metrics, per-target training and reports.

mod data;
pub mod literature;
mod metrics;
mod protocol;
mod report;

pub use data::{
    build_split, describe_target, load_compounds, load_manifest, prepare, Compound, DescriptorTarget, ManifestEntry,
    Prepared, Split, SplitSpec, TargetSet,
};
pub use metrics::{
    auc, enrichment_factor, metrics, threshold_table, Aggregate, Metrics, RankedEntry, RankedList, ThresholdRow,
    EF_PERCENTS, THRESHOLD_LABELS,
};
pub use protocol::{evaluate_pairs, per_target_protocol, score_library, FnScorer, PerTargetResult, Scorer, PER_TARGET_TEST_FRACTION};
pub use report::{auc_deltas, AucDelta, CompareReport, FailedTarget, ScreeningReport, TargetMetrics};

use thiserror::Error;

use crate::mpe::MpeError;
use crate::nn::NnError;
use crate::sc::ScError;

#[derive(Debug, Error)]
pub enum ScreenError {
    #[error("target {target}: no {class} left after sampling")]
    EmptyClass { target: String, class: &'static str },
    #[error("target {target}: test set is empty")]
    EmptyTestSet { target: String },
    #[error("target {target}: {reason}")]
    InvalidTarget { target: String, reason: String },
    #[error("{name} must lie in (0, 1], got {value}")]
    InvalidFraction { name: &'static str, value: f64 },
    #[error("metric undefined: ranking holds a single class")]
    SingleClass,
    #[error("enrichment percentage must lie in (0, 100], got {0}")]
    InvalidPercent(f64),
    #[error("enrichment window is empty")]
    EmptyWindow,
    #[error("no targets")]
    NoTargets,
    #[error("model expects {expected} inputs, screening supplies {got}")]
    InputWidth { expected: usize, got: usize },
    #[error("manifest {path}: {reason}")]
    Manifest { path: String, reason: String },
    #[error(transparent)]
    Mpe(#[from] MpeError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Sc(#[from] ScError),
}
