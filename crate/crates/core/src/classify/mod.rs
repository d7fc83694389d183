//! Classifier families: k-nearest neighbors, Gaussian naive Bayes, random
//! forest and a one-hidden-layer perceptron.
//!
//! Every trained model returns, per query row, a score vector over the
//! classes that sums to one, and a label equal to the argmax of those
//! scores with ties going to the lowest class index.

mod bayes;
mod forest;
mod knn;
mod mlp;
mod spec;
mod tree;

pub use bayes::GaussianNb;
pub use forest::{tree_rng, RandomForest};
pub use knn::{knn_search, KnnModel, Neighbor};
pub use mlp::{Mlp, MlpModel, Standardizer};
pub use spec::{ClassifierSpec, ClassifierSpecError, ForestParams, HiddenUnits, MaxFeatures, MlpParams};
pub use tree::DecisionTree;

use ndarray::{Array2, ArrayView2};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClassifyError {
    #[error("class {0} has no training samples")]
    EmptyClass(usize),
    #[error("expected {expected} features, got {found}")]
    DimError { expected: usize, found: usize },
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("k = {k} exceeds the {n} training samples")]
    KTooLarge { k: usize, n: usize },
    #[error("{rows} rows but {labels} labels")]
    LabelCount { rows: usize, labels: usize },
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("invalid classifier spec: {0}")]
    InvalidSpec(String),
}

/// Labels and per-class scores for a batch of queries.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub labels: Vec<usize>,
    /// One row per query, one column per class.
    pub scores: Array2<f64>,
}

impl Predictions {
    fn from_scores(scores: Array2<f64>) -> Self {
        let labels = scores
            .rows()
            .into_iter()
            .map(|r| argmax(r.as_slice().expect("standard layout")))
            .collect();
        Predictions { labels, scores }
    }
}

/// Index of the largest value; the first one wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone)]
pub enum TrainedClassifier {
    Knn(KnnModel),
    GaussianNb(GaussianNb),
    RandomForest(RandomForest),
    Mlp(MlpModel),
}

/// Trains the classifier described by `spec` on rows of `x` with labels
/// `y` in `0..class_count`. Every class needs at least one sample.
pub fn train(
    spec: &ClassifierSpec,
    x: ArrayView2<'_, f64>,
    y: &[usize],
    class_count: usize,
) -> Result<TrainedClassifier, ClassifyError> {
    spec.validate()?;
    check_training_set(x, y, class_count)?;
    Ok(match spec {
        ClassifierSpec::Knn { k } => TrainedClassifier::Knn(KnnModel::fit(x, y, class_count, *k)?),
        ClassifierSpec::GaussianNb => {
            TrainedClassifier::GaussianNb(GaussianNb::fit(x, y, class_count))
        }
        ClassifierSpec::RandomForest(p) => {
            TrainedClassifier::RandomForest(RandomForest::fit(x, y, class_count, p))
        }
        ClassifierSpec::Mlp(p) => TrainedClassifier::Mlp(MlpModel::fit(x, y, class_count, p)),
    })
}

impl TrainedClassifier {
    pub fn class_count(&self) -> usize {
        match self {
            TrainedClassifier::Knn(m) => m.class_count(),
            TrainedClassifier::GaussianNb(m) => m.class_count(),
            TrainedClassifier::RandomForest(m) => m.class_count(),
            TrainedClassifier::Mlp(m) => m.class_count(),
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            TrainedClassifier::Knn(m) => m.input_dim(),
            TrainedClassifier::GaussianNb(m) => m.input_dim(),
            TrainedClassifier::RandomForest(m) => m.input_dim(),
            TrainedClassifier::Mlp(m) => m.input_dim(),
        }
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Predictions, ClassifyError> {
        if x.ncols() != self.input_dim() {
            return Err(ClassifyError::DimError {
                expected: self.input_dim(),
                found: x.ncols(),
            });
        }
        check_finite(x)?;
        let scores = match self {
            TrainedClassifier::Knn(m) => m.scores(x),
            TrainedClassifier::GaussianNb(m) => m.scores(x),
            TrainedClassifier::RandomForest(m) => m.scores(x),
            TrainedClassifier::Mlp(m) => m.scores(x),
        };
        Ok(Predictions::from_scores(scores))
    }
}

fn check_finite(x: ArrayView2<'_, f64>) -> Result<(), ClassifyError> {
    match x.indexed_iter().find(|(_, v)| !v.is_finite()) {
        Some(((row, col), _)) => Err(ClassifyError::NonFinite { row, col }),
        None => Ok(()),
    }
}

fn check_training_set(
    x: ArrayView2<'_, f64>,
    y: &[usize],
    class_count: usize,
) -> Result<(), ClassifyError> {
    if x.nrows() != y.len() {
        return Err(ClassifyError::LabelCount {
            rows: x.nrows(),
            labels: y.len(),
        });
    }
    if x.ncols() == 0 {
        return Err(ClassifyError::DimError {
            expected: 1,
            found: 0,
        });
    }
    let mut seen = vec![false; class_count];
    for &label in y {
        if label >= class_count {
            return Err(ClassifyError::LabelOutOfRange {
                label,
                classes: class_count,
            });
        }
        seen[label] = true;
    }
    if let Some(c) = seen.iter().position(|s| !s) {
        return Err(ClassifyError::EmptyClass(c));
    }
    check_finite(x)
}
