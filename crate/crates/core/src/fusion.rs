//! Element-wise fusion of two aligned feature layers.

use std::fmt;
use std::str::FromStr;

use ndarray::Zip;

use crate::dataset::{format_sample_name, FeatureDataset, LayerTag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MergeMethod {
    Min,
    Max,
    Mean,
}

impl MergeMethod {
    pub const ALL: [MergeMethod; 3] = [MergeMethod::Min, MergeMethod::Max, MergeMethod::Mean];

    #[inline]
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            MergeMethod::Min => a.min(b),
            MergeMethod::Max => a.max(b),
            MergeMethod::Mean => (a + b) / 2.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        LayerTag::Fused(self).as_str()
    }
}

impl fmt::Display for MergeMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MergeMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "min" => Ok(MergeMethod::Min),
            "max" => Ok(MergeMethod::Max),
            "mean" => Ok(MergeMethod::Mean),
            other => Err(format!("unknown merge method {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FusionError {
    #[error("shape mismatch: {left:?} vs {right:?}")]
    DimMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("row {index}: sample {left} does not match {right}")]
    RowOrderMismatch {
        index: usize,
        left: String,
        right: String,
    },
}

/// Merges two layers extracted from the same images.
///
/// Rows must hold the same samples in the same order; nothing is
/// reordered. Metadata is taken from `a`.
pub fn merge(
    a: &FeatureDataset,
    b: &FeatureDataset,
    method: MergeMethod,
) -> Result<FeatureDataset, FusionError> {
    if a.features().dim() != b.features().dim() {
        return Err(FusionError::DimMismatch {
            left: a.features().dim(),
            right: b.features().dim(),
        });
    }
    if let Some(index) = a.meta().iter().zip(b.meta()).position(|(x, y)| x != y) {
        return Err(FusionError::RowOrderMismatch {
            index,
            left: format_sample_name(&a.meta()[index]),
            right: format_sample_name(&b.meta()[index]),
        });
    }
    let fused = Zip::from(a.features())
        .and(b.features())
        .par_map_collect(|&x, &y| method.apply(x, y));
    Ok(a.with_features(fused, LayerTag::Fused(method)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{synth_dataset, synth_layer_pair, SynthSpec};
    use ndarray::{array, Array2};

    fn pair(a: Array2<f64>, b: Array2<f64>) -> (FeatureDataset, FeatureDataset) {
        let (base, _) = synth_dataset(&SynthSpec {
            classes: 2,
            per_class: a.nrows() / 2,
            dim: a.ncols(),
            separation: 1.0,
            seed: 0,
        })
        .unwrap();
        (
            base.with_features(a, LayerTag::Fc6),
            base.with_features(b, LayerTag::Fc7),
        )
    }

    #[test]
    fn small_vectors() {
        let (a, b) = pair(array![[1.0, 4.0], [0.0, 0.0]], array![[3.0, 2.0], [0.0, 0.0]]);
        let row = |m| merge(&a, &b, m).unwrap().features().row(0).to_vec();
        assert_eq!(row(MergeMethod::Min), [1.0, 2.0]);
        assert_eq!(row(MergeMethod::Max), [3.0, 4.0]);
        assert_eq!(row(MergeMethod::Mean), [2.0, 3.0]);
        assert_eq!(
            merge(&a, &b, MergeMethod::Max).unwrap().layer(),
            LayerTag::Fused(MergeMethod::Max)
        );
    }

    #[test]
    fn equal_inputs_are_fixed_points() {
        let (a, _, _) = synth_layer_pair(&SynthSpec {
            classes: 3,
            per_class: 4,
            dim: 6,
            separation: 5.0,
            seed: 11,
        })
        .unwrap();
        for m in MergeMethod::ALL {
            let out = merge(&a, &a, m).unwrap();
            assert_eq!(out.features(), a.features());
            assert_eq!(out.meta(), a.meta());
        }
    }

    #[test]
    fn min_mean_max_ordering_on_random_pair() {
        let (a, b, _) = synth_layer_pair(&SynthSpec {
            classes: 5,
            per_class: 10,
            dim: 10,
            separation: 3.0,
            seed: 5,
        })
        .unwrap();
        let lo = merge(&a, &b, MergeMethod::Min).unwrap();
        let mid = merge(&a, &b, MergeMethod::Mean).unwrap();
        let hi = merge(&a, &b, MergeMethod::Max).unwrap();
        for i in 0..50 {
            for j in 0..10 {
                let (x, y) = (a.features()[[i, j]], b.features()[[i, j]]);
                assert_eq!(lo.features()[[i, j]], if x < y { x } else { y });
                assert_eq!(hi.features()[[i, j]], if x > y { x } else { y });
                assert_eq!(mid.features()[[i, j]], (x + y) / 2.0);
                assert!(lo.features()[[i, j]] <= mid.features()[[i, j]]);
                assert!(mid.features()[[i, j]] <= hi.features()[[i, j]]);
            }
        }
    }

    #[test]
    fn rejects_misaligned_inputs() {
        let (a, _) = pair(Array2::zeros((4, 3)), Array2::zeros((4, 3)));
        let (c, _) = pair(Array2::zeros((4, 2)), Array2::zeros((4, 2)));
        assert!(matches!(
            merge(&a, &c, MergeMethod::Min),
            Err(FusionError::DimMismatch { .. })
        ));

        let mut meta = a.meta().to_vec();
        meta.swap(1, 2);
        let shuffled = FeatureDataset::new(Array2::zeros((4, 3)), meta, LayerTag::Fc7).unwrap();
        match merge(&a, &shuffled, MergeMethod::Mean) {
            Err(FusionError::RowOrderMismatch { index, .. }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
    }
}
