//! Confusion matrices and the summary metrics derived from them and from
//! pooled class scores.

use ndarray::{Array2, ArrayView2};

use super::EvalError;

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    counts: Array2<u64>,
    class_names: Vec<String>,
}

impl ConfusionMatrix {
    pub fn new(class_names: Vec<String>) -> Self {
        let c = class_names.len();
        ConfusionMatrix {
            counts: Array2::zeros((c, c)),
            class_names,
        }
    }

    /// Builds a matrix from row-major counts; classes are named `0..c`.
    pub fn from_rows(rows: &[&[u64]]) -> Self {
        let c = rows.len();
        assert!(rows.iter().all(|r| r.len() == c), "confusion matrix must be square");
        let counts = Array2::from_shape_fn((c, c), |(i, j)| rows[i][j]);
        ConfusionMatrix {
            counts,
            class_names: (0..c).map(|i| i.to_string()).collect(),
        }
    }

    pub fn from_predictions(
        class_names: Vec<String>,
        truth: &[usize],
        predicted: &[usize],
    ) -> Self {
        let mut cm = ConfusionMatrix::new(class_names);
        for (&t, &p) in truth.iter().zip(predicted) {
            cm.record(t, p);
        }
        cm
    }

    pub fn record(&mut self, truth: usize, predicted: usize) {
        self.counts[[truth, predicted]] += 1;
    }

    /// Adds `other` element-wise. Both must describe the same classes.
    pub fn merge(&mut self, other: &ConfusionMatrix) {
        assert_eq!(self.class_names, other.class_names);
        self.counts += &other.counts;
    }

    pub fn counts(&self) -> &Array2<u64> {
        &self.counts
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.sum()
    }

    pub fn correct(&self) -> u64 {
        self.counts.diag().sum()
    }

    /// Row sums.
    pub fn support(&self) -> Vec<u64> {
        self.counts.rows().into_iter().map(|r| r.sum()).collect()
    }

    /// Column sums.
    pub fn predicted_totals(&self) -> Vec<u64> {
        self.counts.columns().into_iter().map(|c| c.sum()).collect()
    }

    pub fn accuracy(&self) -> Result<f64, EvalError> {
        accuracy(self)
    }

    pub fn weighted_f_measure(&self) -> Result<f64, EvalError> {
        weighted_f_measure(self)
    }
}

/// Correct predictions over all predictions.
pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64, EvalError> {
    match cm.total() {
        0 => Err(EvalError::EmptyMatrix),
        total => Ok(cm.correct() as f64 / total as f64),
    }
}

/// Support-weighted mean of per-class F1. A class whose precision or
/// recall has a zero denominator contributes an F1 of zero.
pub fn weighted_f_measure(cm: &ConfusionMatrix) -> Result<f64, EvalError> {
    let total = cm.total();
    if total == 0 {
        return Err(EvalError::EmptyMatrix);
    }
    let support = cm.support();
    let predicted = cm.predicted_totals();
    let mut sum = 0.0;
    for c in 0..cm.class_count() {
        let tp = cm.counts[[c, c]] as f64;
        if support[c] == 0 || predicted[c] == 0 {
            continue;
        }
        let precision = tp / predicted[c] as f64;
        let recall = tp / support[c] as f64;
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        sum += support[c] as f64 * f1;
    }
    Ok(sum / total as f64)
}

/// Area under the ROC curve of one score column against binary truth,
/// computed from the Mann–Whitney rank statistic with midranks for tied
/// scores. `None` when either side is empty.
pub fn binary_roc_auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    assert_eq!(scores.len(), positive.len());
    let n = scores.len();
    let pos = positive.iter().filter(|&&p| p).count();
    let neg = n - pos;
    if pos == 0 || neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // Ranks i+1 ..= j share their mean.
        let midrank = (i + 1 + j) as f64 / 2.0;
        let tied_pos = order[i..j].iter().filter(|&&k| positive[k]).count();
        rank_sum += midrank * tied_pos as f64;
        i = j;
    }
    let pos_f = pos as f64;
    Some((rank_sum - pos_f * (pos_f + 1.0) / 2.0) / (pos_f * neg as f64))
}

/// Area under the precision–recall curve: sweep thresholds from the
/// highest score down, one step per distinct score, and sum
/// `Δrecall × precision` without interpolation. `None` when there are no
/// positives or no negatives.
pub fn binary_prc_area(scores: &[f64], positive: &[bool]) -> Option<f64> {
    assert_eq!(scores.len(), positive.len());
    let n = scores.len();
    let pos = positive.iter().filter(|&&p| p).count();
    if pos == 0 || pos == n {
        return None;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let (mut tp, mut fp) = (0usize, 0usize);
    let mut prev_recall = 0.0;
    let mut area = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && scores[order[j]] == scores[order[i]] {
            if positive[order[j]] {
                tp += 1;
            } else {
                fp += 1;
            }
            j += 1;
        }
        let recall = tp as f64 / pos as f64;
        let precision = tp as f64 / (tp + fp) as f64;
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j;
    }
    Some(area)
}

fn one_vs_rest(
    scores: ArrayView2<'_, f64>,
    labels: &[usize],
    per_class: fn(&[f64], &[bool]) -> Option<f64>,
) -> Result<f64, EvalError> {
    if scores.nrows() != labels.len() {
        return Err(EvalError::LengthMismatch {
            scores: scores.nrows(),
            labels: labels.len(),
        });
    }
    if let Some(&l) = labels.iter().find(|&&l| l >= scores.ncols()) {
        return Err(EvalError::LabelOutOfRange {
            label: l,
            classes: scores.ncols(),
        });
    }
    let mut weighted = 0.0;
    let mut weight = 0usize;
    for c in 0..scores.ncols() {
        let column: Vec<f64> = scores.column(c).to_vec();
        let positive: Vec<bool> = labels.iter().map(|&l| l == c).collect();
        if let Some(area) = per_class(&column, &positive) {
            let support = positive.iter().filter(|&&p| p).count();
            weighted += support as f64 * area;
            weight += support;
        }
    }
    if weight == 0 {
        return Err(EvalError::DegenerateLabels);
    }
    Ok(weighted / weight as f64)
}

/// Support-weighted one-vs-rest ROC area over the score columns. Classes
/// without both positives and negatives are skipped.
pub fn roc_area(scores: ArrayView2<'_, f64>, labels: &[usize]) -> Result<f64, EvalError> {
    one_vs_rest(scores, labels, binary_roc_auc)
}

/// Support-weighted one-vs-rest precision–recall area.
pub fn prc_area(scores: ArrayView2<'_, f64>, labels: &[usize]) -> Result<f64, EvalError> {
    one_vs_rest(scores, labels, binary_prc_area)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn reference_accuracies() {
        let gender = ConfusionMatrix::from_rows(&[&[1539, 1], &[1, 559]]);
        assert!((accuracy(&gender).unwrap() - 0.999048).abs() < 1e-6);
        let age = ConfusionMatrix::from_rows(&[
            &[503, 0, 1, 0],
            &[0, 1050, 0, 0],
            &[0, 0, 462, 0],
            &[0, 0, 0, 84],
        ]);
        assert!((accuracy(&age).unwrap() - 0.999524).abs() < 1e-6);
        let smile = ConfusionMatrix::from_rows(&[&[1313, 187], &[215, 385]]);
        assert!((accuracy(&smile).unwrap() - 0.808571).abs() < 1e-6);
    }

    #[test]
    fn empty_matrix() {
        let cm = ConfusionMatrix::new(vec!["a".into(), "b".into()]);
        assert_eq!(accuracy(&cm), Err(EvalError::EmptyMatrix));
        assert_eq!(weighted_f_measure(&cm), Err(EvalError::EmptyMatrix));
    }

    #[test]
    fn f_measure_cases() {
        let diag = ConfusionMatrix::from_rows(&[&[5, 0, 0], &[0, 7, 0], &[0, 0, 1]]);
        assert_eq!(weighted_f_measure(&diag).unwrap(), 1.0);

        // Per-class by hand: class 0 P = R = 1539/1540, class 1 P = R = 559/560.
        let cm = ConfusionMatrix::from_rows(&[&[1539, 1], &[1, 559]]);
        let f0 = 1539.0 / 1540.0;
        let f1 = 559.0 / 560.0;
        let want = (1540.0 * f0 + 560.0 * f1) / 2100.0;
        assert!((weighted_f_measure(&cm).unwrap() - want).abs() < 1e-12);

        // Class 1 is never predicted: its F1 is 0 but its support still counts.
        let cm = ConfusionMatrix::from_rows(&[&[6, 0], &[4, 0]]);
        let p0 = 6.0 / 10.0;
        let f0 = 2.0 * p0 * 1.0 / (p0 + 1.0);
        assert!((weighted_f_measure(&cm).unwrap() - 0.6 * f0).abs() < 1e-12);
    }

    #[test]
    fn roc_cases() {
        assert_eq!(binary_roc_auc(&[0.9, 0.8, 0.1], &[true, true, false]), Some(1.0));
        assert_eq!(binary_roc_auc(&[0.3; 5], &[true, false, true, false, false]), Some(0.5));
        assert_eq!(binary_roc_auc(&[0.1, 0.2], &[true, true]), None);
        let scores = [0.9, 0.8, 0.7, 0.6, 0.55, 0.5];
        let pos = [true, true, false, true, false, false];
        // Concordant pairs: 3 + 3 + 2 of 9.
        assert!((binary_roc_auc(&scores, &pos).unwrap() - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn prc_cases() {
        assert_eq!(binary_prc_area(&[0.9, 0.8, 0.1], &[true, true, false]), Some(1.0));
        let p = binary_prc_area(&[0.4; 5], &[true, false, false, true, false]).unwrap();
        assert!((p - 0.4).abs() < 1e-15);
        let scores = [0.9, 0.8, 0.7, 0.6, 0.55, 0.5];
        let pos = [true, true, false, true, false, false];
        // Steps at 0.9, 0.8 (precision 1) and 0.6 (precision 3/4).
        let want = (1.0 / 3.0) + (1.0 / 3.0) + (1.0 / 3.0) * 0.75;
        assert!((binary_prc_area(&scores, &pos).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn multiclass_areas() {
        let scores = array![[0.8, 0.1, 0.1], [0.2, 0.7, 0.1], [0.1, 0.2, 0.7], [0.6, 0.3, 0.1]];
        let labels = [0, 1, 2, 0];
        assert_eq!(roc_area(scores.view(), &labels).unwrap(), 1.0);
        assert_eq!(prc_area(scores.view(), &labels).unwrap(), 1.0);
        assert_eq!(
            roc_area(scores.view(), &[1, 1, 1, 1]),
            Err(EvalError::DegenerateLabels)
        );
        // Class 2 absent: skipped, weights renormalized over classes 0 and 1.
        let labels = [0, 1, 1, 0];
        let got = roc_area(scores.view(), &labels).unwrap();
        let c0 = binary_roc_auc(&[0.8, 0.2, 0.1, 0.6], &[true, false, false, true]).unwrap();
        let c1 = binary_roc_auc(&[0.1, 0.7, 0.2, 0.3], &[false, true, true, false]).unwrap();
        assert!((got - (2.0 * c0 + 2.0 * c1) / 4.0).abs() < 1e-15);
    }

    fn arb_scored(max_classes: usize) -> impl Strategy<Value = (Array2<f64>, Vec<usize>)> {
        (2..=max_classes, 4usize..40).prop_flat_map(|(c, n)| {
            (
                proptest::collection::vec(0u8..6, n * c),
                proptest::collection::vec(0..c, n),
            )
                .prop_map(move |(raw, labels)| {
                    let scores = Array2::from_shape_fn((n, c), |(i, j)| f64::from(raw[i * c + j]) / 5.0);
                    (scores, labels)
                })
        })
    }

    proptest! {
        #[test]
        fn roc_reverses_under_negation((scores, labels) in arb_scored(4)) {
            let distinct = labels.iter().collect::<std::collections::BTreeSet<_>>().len();
            prop_assume!(distinct >= 2);
            let a = roc_area(scores.view(), &labels).unwrap();
            let b = roc_area((-&scores).view(), &labels).unwrap();
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert!((a + b - 1.0).abs() < 1e-12);
        }

        #[test]
        fn metrics_invariant_under_class_relabeling((scores, labels) in arb_scored(4), rot in 1usize..4) {
            let c = scores.ncols();
            let distinct = labels.iter().collect::<std::collections::BTreeSet<_>>().len();
            prop_assume!(distinct >= 2);
            let perm = |k: usize| (k + rot) % c;
            let moved_labels: Vec<usize> = labels.iter().map(|&l| perm(l)).collect();
            let mut moved = Array2::zeros(scores.dim());
            for j in 0..c {
                moved.column_mut(perm(j)).assign(&scores.column(j));
            }
            let roc = (roc_area(scores.view(), &labels).unwrap(), roc_area(moved.view(), &moved_labels).unwrap());
            let prc = (prc_area(scores.view(), &labels).unwrap(), prc_area(moved.view(), &moved_labels).unwrap());
            prop_assert!((roc.0 - roc.1).abs() < 1e-12);
            prop_assert!((prc.0 - prc.1).abs() < 1e-12);

            let predicted: Vec<usize> = scores.rows().into_iter()
                .map(|r| crate::classify::argmax(r.as_slice().unwrap())).collect();
            let names: Vec<String> = (0..c).map(|i| i.to_string()).collect();
            let cm = ConfusionMatrix::from_predictions(names.clone(), &labels, &predicted);
            let moved_pred: Vec<usize> = predicted.iter().map(|&p| perm(p)).collect();
            let cm2 = ConfusionMatrix::from_predictions(names, &moved_labels, &moved_pred);
            prop_assert_eq!(accuracy(&cm).unwrap(), accuracy(&cm2).unwrap());
            prop_assert!((weighted_f_measure(&cm).unwrap() - weighted_f_measure(&cm2).unwrap()).abs() < 1e-12);
        }
    }
}
