//! Sample metadata, feature datasets and per-task label views.

mod format;
mod name;
mod synth;

pub use format::{load_features, read_features, save_features, write_features, LoadError};
pub use name::{format_sample_name, parse_sample_name, NameError, NameField};
pub use synth::{synth_dataset, synth_layer_pair, SynthSpec};

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;

use crate::fusion::MergeMethod;

/// Raw CNN layers are 4096 units wide.
pub const RAW_LAYER_DIM: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gender {
    Male,
    Female,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expression {
    Normal,
    Smile,
}

/// Metadata carried by a sample name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SampleMeta {
    pub session: u8,
    pub subject: u32,
    pub gender: Gender,
    pub age_years: u32,
    pub image_index: u8,
    pub expression: Expression,
}

impl SampleMeta {
    pub fn age_group(&self) -> AgeGroup {
        derive_age_group(self.age_years)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AgeGroup {
    Children,
    Youth,
    Adults,
    Elderly,
}

impl AgeGroup {
    pub const ALL: [AgeGroup; 4] = [
        AgeGroup::Children,
        AgeGroup::Youth,
        AgeGroup::Adults,
        AgeGroup::Elderly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AgeGroup::Children => "Children",
            AgeGroup::Youth => "Youth",
            AgeGroup::Adults => "Adults",
            AgeGroup::Elderly => "Elderly",
        }
    }
}

/// Maps an age to its bracket. 18 counts as a child so that the
/// brackets cover every positive age.
pub fn derive_age_group(age_years: u32) -> AgeGroup {
    match age_years {
        0..=18 => AgeGroup::Children,
        19..=30 => AgeGroup::Youth,
        31..=50 => AgeGroup::Adults,
        _ => AgeGroup::Elderly,
    }
}

/// Which layer (or derived representation) a feature matrix holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayerTag {
    Fc6,
    Fc7,
    Fused(MergeMethod),
    Reduced,
}

impl LayerTag {
    pub fn as_str(self) -> &'static str {
        match self {
            LayerTag::Fc6 => "fc6",
            LayerTag::Fc7 => "fc7",
            LayerTag::Fused(MergeMethod::Min) => "min",
            LayerTag::Fused(MergeMethod::Max) => "max",
            LayerTag::Fused(MergeMethod::Mean) => "mean",
            LayerTag::Reduced => "pca",
        }
    }
}

impl fmt::Display for LayerTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LayerTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "fc6" => LayerTag::Fc6,
            "fc7" => LayerTag::Fc7,
            "min" => LayerTag::Fused(MergeMethod::Min),
            "max" => LayerTag::Fused(MergeMethod::Max),
            "mean" => LayerTag::Fused(MergeMethod::Mean),
            "pca" => LayerTag::Reduced,
            other => return Err(format!("unknown layer tag {other:?}")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("dataset has no samples")]
    Empty,
    #[error("{rows} feature rows but {meta} metadata entries")]
    RowCount { rows: usize, meta: usize },
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("invalid synthetic spec: {0}")]
    InvalidSynth(String),
}

/// An n×d feature matrix with one [`SampleMeta`] per row.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDataset {
    features: Array2<f64>,
    meta: Vec<SampleMeta>,
    layer: LayerTag,
}

impl FeatureDataset {
    pub fn new(
        features: Array2<f64>,
        meta: Vec<SampleMeta>,
        layer: LayerTag,
    ) -> Result<Self, DatasetError> {
        if features.nrows() != meta.len() {
            return Err(DatasetError::RowCount {
                rows: features.nrows(),
                meta: meta.len(),
            });
        }
        if meta.is_empty() {
            return Err(DatasetError::Empty);
        }
        if let Some(((row, col), _)) = features.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(DatasetError::NonFinite { row, col });
        }
        Ok(FeatureDataset {
            features,
            meta,
            layer,
        })
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn meta(&self) -> &[SampleMeta] {
        &self.meta
    }

    pub fn layer(&self) -> LayerTag {
        self.layer
    }

    pub fn len(&self) -> usize {
        self.meta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.meta.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn names(&self) -> impl Iterator<Item = String> + '_ {
        self.meta.iter().map(format_sample_name)
    }

    pub fn label_view(&self, task: Task) -> TaskLabelView {
        label_view(&self.meta, task)
    }

    /// Same rows and metadata with a replacement feature matrix.
    pub(crate) fn with_features(&self, features: Array2<f64>, layer: LayerTag) -> Self {
        debug_assert_eq!(features.nrows(), self.meta.len());
        FeatureDataset {
            features,
            meta: self.meta.clone(),
            layer,
        }
    }
}

/// The four recognition tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    Identity,
    Gender,
    Age,
    Expression,
}

impl Task {
    pub const ALL: [Task; 4] = [Task::Identity, Task::Gender, Task::Age, Task::Expression];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Identity => "identity",
            Task::Gender => "gender",
            Task::Age => "age",
            Task::Expression => "smile",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "identity" => Ok(Task::Identity),
            "gender" => Ok(Task::Gender),
            "age" => Ok(Task::Age),
            "smile" | "expression" => Ok(Task::Expression),
            other => Err(format!("unknown task {other:?}")),
        }
    }
}

/// Class indices for one task, aligned with the rows of a dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskLabelView {
    pub task: Task,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
}

impl TaskLabelView {
    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    /// Number of samples per class, in class-index order.
    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.class_names.len()];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

/// Builds the label view of `meta` for `task`.
///
/// Class order: subjects ascending for identity, `Female, Male` for
/// gender, bracket order for age and `Normal, Smile` for expression.
/// Age and gender views keep every class even when it has no samples.
pub fn label_view(meta: &[SampleMeta], task: Task) -> TaskLabelView {
    match task {
        Task::Identity => {
            let subjects: Vec<u32> = meta
                .iter()
                .map(|m| m.subject)
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let labels = meta
                .iter()
                .map(|m| subjects.binary_search(&m.subject).unwrap())
                .collect();
            TaskLabelView {
                task,
                labels,
                class_names: subjects.iter().map(|s| format!("P{s}")).collect(),
            }
        }
        Task::Gender => TaskLabelView {
            task,
            labels: meta
                .iter()
                .map(|m| match m.gender {
                    Gender::Female => 0,
                    Gender::Male => 1,
                })
                .collect(),
            class_names: vec!["Female".into(), "Male".into()],
        },
        Task::Age => TaskLabelView {
            task,
            labels: meta.iter().map(|m| m.age_group() as usize).collect(),
            class_names: AgeGroup::ALL.iter().map(|g| g.name().to_string()).collect(),
        },
        Task::Expression => TaskLabelView {
            task,
            labels: meta
                .iter()
                .map(|m| match m.expression {
                    Expression::Normal => 0,
                    Expression::Smile => 1,
                })
                .collect(),
            class_names: vec!["Normal".into(), "Smile".into()],
        },
    }
}
