use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;

use super::{
    prc_area, roc_area, stratified_folds, unstratified_folds, ConfusionMatrix, EvalError,
    EvalReport, FoldPlan, FoldSummary,
};
use crate::classify::{train, ClassifierSpec};
use crate::dataset::{FeatureDataset, TaskLabelView};
use crate::fusion::{merge, MergeMethod};
use crate::pca::{self, PcaError};
use crate::Error;

/// Where PCA is fitted during cross-validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PcaScope {
    /// On each training portion only; test rows never influence the axes.
    #[default]
    Fold,
    /// Once on all rows before folding.
    Global,
}

impl PcaScope {
    pub fn as_str(self) -> &'static str {
        match self {
            PcaScope::Fold => "fold",
            PcaScope::Global => "global",
        }
    }
}

impl fmt::Display for PcaScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PcaScope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fold" => Ok(PcaScope::Fold),
            "global" => Ok(PcaScope::Global),
            _ => Err(format!("unknown PCA scope '{s}' (expected fold or global)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FoldStrategy {
    #[default]
    Stratified,
    Unstratified,
}

impl FoldStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            FoldStrategy::Stratified => "stratified",
            FoldStrategy::Unstratified => "unstratified",
        }
    }
}

/// Feature processing and the classifier applied in every fold.
#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    /// Element-wise fusion of the primary and secondary layers.
    pub merge: Option<MergeMethod>,
    /// Retained-variance fraction, or `None` to skip PCA.
    pub pca: Option<f64>,
    pub pca_scope: PcaScope,
    pub classifier: ClassifierSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CvSettings {
    pub folds: usize,
    pub seed: u64,
    pub strategy: FoldStrategy,
}

impl Default for CvSettings {
    fn default() -> Self {
        CvSettings {
            folds: 10,
            seed: 42,
            strategy: FoldStrategy::Stratified,
        }
    }
}

struct FoldOutcome {
    test: Vec<usize>,
    predicted: Vec<usize>,
    scores: Array2<f64>,
    components: Option<usize>,
}

/// Runs k-fold cross-validation of `pipeline` on the task described by
/// `view`.
///
/// Classes of `view` with no samples are dropped before folding (and
/// listed under `dropped_classes`). Predictions and scores of all folds
/// are pooled into one confusion matrix and one score table before any
/// metric is computed. Folds run concurrently, but every result is placed
/// by sample index, so the report does not depend on scheduling.
pub fn cross_validate(
    primary: &FeatureDataset,
    secondary: Option<&FeatureDataset>,
    view: &TaskLabelView,
    pipeline: &Pipeline,
    settings: &CvSettings,
) -> Result<EvalReport, Error> {
    let started = Instant::now();
    if view.labels.len() != primary.len() {
        return Err(Error::Config(format!(
            "label view has {} entries for {} samples",
            view.labels.len(),
            primary.len()
        )));
    }
    pipeline.classifier.validate()?;
    if let Some(r) = pipeline.pca {
        if !(r > 0.0 && r <= 1.0) {
            return Err(PcaError::InvalidRetention(r).into());
        }
    }

    let fused;
    let input = match (pipeline.merge, secondary) {
        (Some(m), Some(second)) => {
            fused = merge(primary, second, m)?;
            &fused
        }
        (Some(m), None) => {
            return Err(Error::Config(format!("merge={m} needs a second layer")));
        }
        (None, Some(_)) => {
            return Err(Error::Config("a second layer was given without a merge method".into()));
        }
        (None, None) => primary,
    };

    // Compact away empty classes.
    let sizes = view.class_sizes();
    let kept: Vec<usize> = (0..sizes.len()).filter(|&c| sizes[c] > 0).collect();
    let mut remap = vec![usize::MAX; sizes.len()];
    for (new, &old) in kept.iter().enumerate() {
        remap[old] = new;
    }
    let labels: Vec<usize> = view.labels.iter().map(|&l| remap[l]).collect();
    let class_names: Vec<String> = kept.iter().map(|&c| view.class_names[c].clone()).collect();
    let class_count = kept.len();

    let plan = match settings.strategy {
        FoldStrategy::Stratified => {
            stratified_folds(&labels, class_count, settings.folds, settings.seed)?
        }
        FoldStrategy::Unstratified => {
            unstratified_folds(labels.len(), settings.folds, settings.seed)?
        }
    };

    let (global, global_components) = match (pipeline.pca, pipeline.pca_scope) {
        (Some(r), PcaScope::Global) => {
            let model = pca::fit(input.features().view(), r)?;
            let m = model.output_dim();
            (Some(model.transform(input.features().view())?), Some(m))
        }
        _ => (None, None),
    };
    let x = global.as_ref().unwrap_or(input.features()).view();

    let outcomes: Vec<FoldOutcome> = (0..plan.k())
        .into_par_iter()
        .map(|f| {
            run_fold(x, &labels, class_count, &plan, f, pipeline)
                .map(|mut o| {
                    o.components = o.components.or(global_components);
                    o
                })
                .map_err(|e| Error::Fold {
                    fold: f,
                    source: Box::new(e),
                })
        })
        .collect::<Result<_, _>>()?;

    let mut confusion = ConfusionMatrix::new(class_names.clone());
    let mut scores = Array2::zeros((labels.len(), class_count));
    let mut folds = Vec::with_capacity(outcomes.len());
    for o in &outcomes {
        let truth: Vec<usize> = o.test.iter().map(|&i| labels[i]).collect();
        let fold_cm = ConfusionMatrix::from_predictions(class_names.clone(), &truth, &o.predicted);
        confusion.merge(&fold_cm);
        for (row, &i) in o.scores.outer_iter().zip(&o.test) {
            scores.row_mut(i).assign(&row);
        }
        folds.push(FoldSummary {
            test_size: o.test.len(),
            components: o.components,
            confusion: fold_cm,
        });
    }

    let defined = |r: Result<f64, EvalError>| match r {
        Ok(v) => Ok(Some(v)),
        Err(EvalError::DegenerateLabels) => Ok(None),
        Err(e) => Err(e),
    };
    let roc = defined(roc_area(scores.view(), &labels))?;
    let prc = defined(prc_area(scores.view(), &labels))?;

    let mut config = vec![
        ("task".to_string(), view.task.to_string()),
        ("classes".to_string(), class_names.join(";")),
    ];
    if kept.len() < sizes.len() {
        let dropped: Vec<&str> = (0..sizes.len())
            .filter(|&c| sizes[c] == 0)
            .map(|c| view.class_names[c].as_str())
            .collect();
        config.push(("dropped_classes".into(), dropped.join(";")));
    }
    config.extend([
        ("input_layer".to_string(), primary.layer().to_string()),
        (
            "merge".to_string(),
            pipeline.merge.map_or("none".into(), |m| m.to_string()),
        ),
        (
            "pca".to_string(),
            pipeline.pca.map_or("none".into(), |r| r.to_string()),
        ),
        ("pca_scope".to_string(), pipeline.pca_scope.to_string()),
        ("classifier".to_string(), pipeline.classifier.to_string()),
        ("folds".to_string(), settings.folds.to_string()),
        ("fold_strategy".to_string(), settings.strategy.as_str().to_string()),
        ("seed".to_string(), settings.seed.to_string()),
        ("samples".to_string(), labels.len().to_string()),
        ("input_dim".to_string(), input.dim().to_string()),
    ]);

    Ok(EvalReport {
        echo: Vec::new(),
        config,
        folds,
        accuracy: confusion.accuracy()?,
        weighted_f_measure: confusion.weighted_f_measure()?,
        roc_area: roc,
        prc_area: prc,
        confusion,
        wall_time: started.elapsed(),
    })
}

fn run_fold(
    x: ArrayView2<'_, f64>,
    labels: &[usize],
    class_count: usize,
    plan: &FoldPlan,
    fold: usize,
    pipeline: &Pipeline,
) -> Result<FoldOutcome, Error> {
    let train_idx = plan.train_indices(fold);
    let test_idx = plan.test_indices(fold).to_vec();
    let mut x_train = x.select(Axis(0), &train_idx);
    let mut x_test = x.select(Axis(0), &test_idx);
    let mut components = None;
    if let (Some(r), PcaScope::Fold) = (pipeline.pca, pipeline.pca_scope) {
        let model = pca::fit(x_train.view(), r)?;
        x_train = model.transform(x_train.view())?;
        x_test = model.transform(x_test.view())?;
        components = Some(model.output_dim());
    }
    let y_train: Vec<usize> = train_idx.iter().map(|&i| labels[i]).collect();
    let model = train(&pipeline.classifier, x_train.view(), &y_train, class_count)?;
    let pred = model.predict(x_test.view())?;
    Ok(FoldOutcome {
        test: test_idx,
        predicted: pred.labels,
        scores: pred.scores,
        components,
    })
}
