//! Cross-validation and the metrics reported for each experiment.

mod cv;
mod folds;
mod metrics;
mod report;

pub use cv::{cross_validate, CvSettings, FoldStrategy, PcaScope, Pipeline};
pub use folds::{stratified_folds, unstratified_folds, FoldPlan};
pub use metrics::{
    accuracy, binary_prc_area, binary_roc_auc, prc_area, roc_area, weighted_f_measure,
    ConfusionMatrix,
};
pub use report::{EvalReport, FoldSummary};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("fold count must be at least 2, got {0}")]
    InvalidFoldCount(usize),
    #[error("{n} samples cannot fill {k} folds")]
    TooFewSamples { n: usize, k: usize },
    #[error("class {0} has no samples")]
    EmptyClass(usize),
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("no class has both positive and negative samples")]
    DegenerateLabels,
    #[error("{scores} score rows but {labels} labels")]
    LengthMismatch { scores: usize, labels: usize },
}
