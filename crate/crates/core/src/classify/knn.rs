//! Exact nearest-neighbor search by linear scan.

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;

use super::ClassifyError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

fn squared_distance(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// The `k` training rows closest to `query` in Euclidean distance,
/// nearest first. Equal distances are ordered by training index.
pub fn knn_search(
    train: ArrayView2<'_, f64>,
    query: ArrayView1<'_, f64>,
    k: usize,
) -> Result<Vec<Neighbor>, ClassifyError> {
    if k > train.nrows() {
        return Err(ClassifyError::KTooLarge {
            k,
            n: train.nrows(),
        });
    }
    if query.len() != train.ncols() {
        return Err(ClassifyError::DimError {
            expected: train.ncols(),
            found: query.len(),
        });
    }
    Ok(nearest(train, query, k))
}

fn nearest(train: ArrayView2<'_, f64>, query: ArrayView1<'_, f64>, k: usize) -> Vec<Neighbor> {
    if k == 0 {
        return Vec::new();
    }
    let mut dist: Vec<(f64, usize)> = train
        .outer_iter()
        .enumerate()
        .map(|(i, row)| (squared_distance(row, query), i))
        .collect();
    let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < dist.len() {
        dist.select_nth_unstable_by(k - 1, by_distance);
        dist.truncate(k);
    }
    dist.sort_unstable_by(by_distance);
    dist.into_iter()
        .map(|(d2, index)| Neighbor {
            index,
            distance: d2.sqrt(),
        })
        .collect()
}

/// Stores the training set; scores are unweighted neighbor-vote fractions.
#[derive(Debug, Clone)]
pub struct KnnModel {
    train: Array2<f64>,
    labels: Vec<usize>,
    class_count: usize,
    k: usize,
}

impl KnnModel {
    pub(super) fn fit(
        x: ArrayView2<'_, f64>,
        y: &[usize],
        class_count: usize,
        k: usize,
    ) -> Result<Self, ClassifyError> {
        if k > x.nrows() {
            return Err(ClassifyError::KTooLarge { k, n: x.nrows() });
        }
        Ok(KnnModel {
            train: x.to_owned(),
            labels: y.to_vec(),
            class_count,
            k,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn input_dim(&self) -> usize {
        self.train.ncols()
    }

    pub(super) fn scores(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let rows: Vec<Vec<f64>> = x
            .axis_iter(Axis(0))
            .into_par_iter()
            .map(|q| {
                let mut votes = vec![0.0; self.class_count];
                for nb in nearest(self.train.view(), q, self.k) {
                    votes[self.labels[nb.index]] += 1.0;
                }
                let k = self.k as f64;
                votes.iter_mut().for_each(|v| *v /= k);
                votes
            })
            .collect();
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        Array2::from_shape_vec((x.nrows(), self.class_count), flat).expect("row lengths")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{train, ClassifierSpec};
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn query_on_training_row_comes_first() {
        let t = array![[0.0, 0.0], [3.0, 4.0], [1.0, 1.0]];
        let nb = knn_search(t.view(), t.row(1), 2).unwrap();
        assert_eq!(nb[0], Neighbor { index: 1, distance: 0.0 });
        assert_eq!(nb[1].index, 2);
    }

    #[test]
    fn ties_go_to_lower_index() {
        let t = array![[2.0, 0.0], [-1.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let nb = knn_search(t.view(), array![0.0, 0.0].view(), 3).unwrap();
        assert_eq!(nb.iter().map(|n| n.index).collect::<Vec<_>>(), [1, 2, 3]);
        assert!(nb.iter().all(|n| n.distance == 1.0));
    }

    #[test]
    fn k_too_large() {
        let t = array![[0.0], [1.0]];
        assert_eq!(
            knn_search(t.view(), array![0.5].view(), 3).unwrap_err(),
            ClassifyError::KTooLarge { k: 3, n: 2 }
        );
    }

    #[test]
    fn one_neighbor_votes() {
        let t = array![[0.0, 0.0], [1.0, 1.0]];
        let m = train(&ClassifierSpec::Knn { k: 1 }, t.view(), &[0, 1], 2).unwrap();
        let p = m.predict(array![[0.1, 0.0]].view()).unwrap();
        assert_eq!(p.labels, [0]);
        assert_eq!(p.scores.row(0).to_vec(), [1.0, 0.0]);
    }

    #[test]
    fn three_neighbor_votes() {
        let t = array![[0.0, 0.0], [0.1, 0.0], [1.0, 1.0]];
        let m = train(&ClassifierSpec::Knn { k: 3 }, t.view(), &[0, 0, 1], 2).unwrap();
        let p = m.predict(array![[0.5, 0.5]].view()).unwrap();
        assert_eq!(p.labels, [0]);
        assert!((p.scores[[0, 0]] - 2.0 / 3.0).abs() < 1e-15);
        assert!((p.scores[[0, 1]] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn one_nn_reproduces_training_labels() {
        let t = array![[0.0, 0.0], [5.0, 1.0], [2.0, 2.0], [7.0, -3.0]];
        let y = [0, 1, 2, 1];
        let m = train(&ClassifierSpec::Knn { k: 1 }, t.view(), &y, 3).unwrap();
        assert_eq!(m.predict(t.view()).unwrap().labels, y);
    }

    proptest! {
        // Integer-valued coordinates with power-of-two scales and integer
        // shifts keep every distance exact, so the vote sets cannot move.
        #[test]
        fn predictions_invariant_under_shift_and_scale(
            pts in proptest::collection::vec((-20i32..20, -20i32..20, 0usize..3), 6..30),
            shift in (-50i32..50, -50i32..50),
            scale_pow in -3i32..4,
            k in prop_oneof![Just(1usize), Just(3), Just(5)],
        ) {
            let n = pts.len();
            let x = Array2::from_shape_fn((n, 2), |(i, j)| {
                f64::from(if j == 0 { pts[i].0 } else { pts[i].1 })
            });
            let mut y: Vec<usize> = pts.iter().map(|p| p.2).collect();
            y[0] = 0; y[1] = 1; y[2] = 2;
            let scale = 2f64.powi(scale_pow);
            let moved = x.mapv(|v| v * scale) + &array![f64::from(shift.0), f64::from(shift.1)];
            let spec = ClassifierSpec::Knn { k };
            let a = train(&spec, x.view(), &y, 3).unwrap().predict(x.view()).unwrap();
            let b = train(&spec, moved.view(), &y, 3).unwrap().predict(moved.view()).unwrap();
            prop_assert_eq!(a.labels, b.labels);
        }
    }
}
