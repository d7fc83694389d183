use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{DecisionTree, ForestParams};

/// The random stream used to grow tree `index` of a forest seeded with
/// `seed`: bootstrap draws first, then split-feature choices.
pub fn tree_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Bagged CART trees; scores are the fraction of trees voting for each
/// class.
#[derive(Debug, Clone)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
    class_count: usize,
    input_dim: usize,
}

impl RandomForest {
    pub(super) fn fit(
        x: ArrayView2<'_, f64>,
        y: &[usize],
        class_count: usize,
        params: &ForestParams,
    ) -> Self {
        let n = x.nrows();
        let max_features = params.max_features.resolve(x.ncols());
        let trees = (0..params.trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = tree_rng(params.seed, t);
                let samples: Vec<usize> = if params.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                DecisionTree::fit(x, y, &samples, class_count, max_features, &mut rng)
            })
            .collect();
        RandomForest {
            trees,
            class_count,
            input_dim: x.ncols(),
        }
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub(super) fn scores(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut votes = Array2::zeros((x.nrows(), self.class_count));
        for (i, row) in x.outer_iter().enumerate() {
            for tree in &self.trees {
                votes[[i, tree.predict_row(row)]] += 1.0;
            }
        }
        votes / self.trees.len() as f64
    }
}
