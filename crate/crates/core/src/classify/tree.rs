//! CART classification tree with Gini impurity and per-split feature
//! subsampling.

use ndarray::{ArrayView1, ArrayView2};
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf {
        class: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// A fully grown classification tree. Rows with `x[feature] <= threshold`
/// go left.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    input_dim: usize,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    /// Weighted Gini impurity times node size; lower is better.
    score: f64,
}

impl DecisionTree {
    /// Grows a tree on `samples` (indices into `x`, repeats allowed).
    ///
    /// Each split looks at up to `max_features` features that are not
    /// constant within the node, drawn in random order from `rng`. Growth
    /// stops at pure nodes and nodes whose features are all constant.
    pub fn fit<R: Rng>(
        x: ArrayView2<'_, f64>,
        y: &[usize],
        samples: &[usize],
        class_count: usize,
        max_features: usize,
        rng: &mut R,
    ) -> Self {
        let d = x.ncols();
        let mut tree = DecisionTree {
            nodes: Vec::new(),
            input_dim: d,
        };
        let mut order: Vec<usize> = (0..d).collect();
        let mut scratch = Scratch::new(class_count);
        // (node slot, samples at node)
        let mut stack: Vec<(usize, Vec<usize>)> = vec![(0, samples.to_vec())];
        tree.nodes.push(Node::Leaf { class: 0 });

        while let Some((slot, idx)) = stack.pop() {
            let counts = class_counts(&idx, y, class_count);
            let majority = majority(&counts);
            let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
            if pure || idx.len() < 2 {
                tree.nodes[slot] = Node::Leaf { class: majority };
                continue;
            }

            let mut best: Option<Candidate> = None;
            let mut examined = 0;
            for pos in 0..d {
                if examined == max_features {
                    break;
                }
                let pick = rng.random_range(pos..d);
                order.swap(pos, pick);
                let feature = order[pos];
                // Constant features don't count towards `max_features`.
                if let Some(c) = scratch.best_split(x, y, &idx, feature, &counts) {
                    examined += 1;
                    if best.as_ref().is_none_or(|b| c.score < b.score) {
                        best = Some(c);
                    }
                }
            }

            let Some(split) = best else {
                tree.nodes[slot] = Node::Leaf { class: majority };
                continue;
            };
            let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
                .iter()
                .partition(|&&i| x[[i, split.feature]] <= split.threshold);
            debug_assert!(!left_idx.is_empty() && !right_idx.is_empty());

            let left = tree.nodes.len();
            let right = left + 1;
            tree.nodes.push(Node::Leaf { class: majority });
            tree.nodes.push(Node::Leaf { class: majority });
            tree.nodes[slot] = Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left,
                right,
            };
            stack.push((right, right_idx));
            stack.push((left, left_idx));
        }
        tree
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn predict_row(&self, row: ArrayView1<'_, f64>) -> usize {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { class } => return class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[feature] <= threshold { left } else { right },
            }
        }
    }
}

fn class_counts(idx: &[usize], y: &[usize], class_count: usize) -> Vec<usize> {
    let mut counts = vec![0; class_count];
    for &i in idx {
        counts[y[i]] += 1;
    }
    counts
}

fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best
}

struct Scratch {
    pairs: Vec<(f64, usize)>,
    left: Vec<usize>,
}

impl Scratch {
    fn new(class_count: usize) -> Self {
        Scratch {
            pairs: Vec::new(),
            left: vec![0; class_count],
        }
    }

    /// Best threshold on `feature`, or `None` if the feature is constant
    /// within the node.
    fn best_split(
        &mut self,
        x: ArrayView2<'_, f64>,
        y: &[usize],
        idx: &[usize],
        feature: usize,
        counts: &[usize],
    ) -> Option<Candidate> {
        self.pairs.clear();
        self.pairs.extend(idx.iter().map(|&i| (x[[i, feature]], y[i])));
        self.pairs
            .sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let n = self.pairs.len();
        if self.pairs[0].0 == self.pairs[n - 1].0 {
            return None;
        }

        self.left.iter_mut().for_each(|c| *c = 0);
        // Sums of squared class counts on each side.
        let mut left_sq = 0.0f64;
        let mut right_sq: f64 = counts.iter().map(|&c| (c * c) as f64).sum();
        let mut best: Option<(f64, usize)> = None;

        for i in 1..n {
            let c = self.pairs[i - 1].1;
            let l = self.left[c] as f64;
            let r = (counts[c] - self.left[c]) as f64;
            left_sq += 2.0 * l + 1.0;
            right_sq -= 2.0 * r - 1.0;
            self.left[c] += 1;

            if self.pairs[i - 1].0 == self.pairs[i].0 {
                continue;
            }
            let nl = i as f64;
            let nr = (n - i) as f64;
            let score = (nl - left_sq / nl) + (nr - right_sq / nr);
            if best.is_none_or(|(s, _)| score < s) {
                best = Some((score, i));
            }
        }

        let (score, i) = best?;
        let (lo, hi) = (self.pairs[i - 1].0, self.pairs[i].0);
        let mut threshold = lo + (hi - lo) / 2.0;
        if threshold >= hi {
            threshold = lo;
        }
        Some(Candidate {
            feature,
            threshold,
            score,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grow(x: ArrayView2<'_, f64>, y: &[usize], classes: usize, mf: usize) -> DecisionTree {
        let all: Vec<usize> = (0..x.nrows()).collect();
        DecisionTree::fit(x, y, &all, classes, mf, &mut ChaCha8Rng::seed_from_u64(0))
    }

    #[test]
    fn fits_training_data_exactly() {
        // XOR needs two levels and a zero-gain first split.
        let x = array![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]];
        let y = [0, 1, 1, 0];
        let tree = grow(x.view(), &y, 2, 2);
        for (row, &label) in x.outer_iter().zip(&y) {
            assert_eq!(tree.predict_row(row), label);
        }
    }

    #[test]
    fn threshold_is_midpoint() {
        let x = array![[1.0], [2.0], [4.0], [8.0]];
        let tree = grow(x.view(), &[0, 0, 1, 1], 2, 1);
        assert_eq!(
            tree.nodes[0],
            Node::Split {
                feature: 0,
                threshold: 3.0,
                left: 1,
                right: 2
            }
        );
        assert_eq!(tree.predict_row(array![2.9].view()), 0);
        assert_eq!(tree.predict_row(array![3.1].view()), 1);
    }

    #[test]
    fn skips_constant_features() {
        // Feature 0 is constant; with max_features = 1 the tree must still
        // find feature 1.
        let x = array![[7.0, 0.0], [7.0, 1.0], [7.0, 2.0], [7.0, 3.0]];
        let tree = grow(x.view(), &[0, 0, 1, 1], 2, 1);
        assert!(matches!(tree.nodes[0], Node::Split { feature: 1, .. }));
    }

    #[test]
    fn identical_rows_become_majority_leaf() {
        let x = array![[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]];
        let tree = grow(x.view(), &[1, 0, 1], 2, 2);
        assert_eq!(tree.node_count(), 1);
        assert_eq!(tree.predict_row(x.row(0)), 1);
        let tie = grow(x.view(), &[1, 0, 2], 3, 2);
        assert_eq!(tie.predict_row(x.row(0)), 0);
    }

    #[test]
    fn adjacent_floats_split_cleanly() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let x = array![[a], [b]];
        let tree = grow(x.view(), &[0, 1], 2, 1);
        assert_eq!(tree.predict_row(x.row(0)), 0);
        assert_eq!(tree.predict_row(x.row(1)), 1);
    }
}
