use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::EvalError;

/// Test-set indices for each of k folds. Fold f trains on every index
/// outside fold f.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    folds: Vec<Vec<usize>>,
    seed: u64,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.folds.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sample_count(&self) -> usize {
        self.folds.iter().map(Vec::len).sum()
    }

    /// Ascending test indices of `fold`.
    pub fn test_indices(&self, fold: usize) -> &[usize] {
        &self.folds[fold]
    }

    /// Ascending training indices of `fold`.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        let mut in_test = vec![false; self.sample_count()];
        for &i in &self.folds[fold] {
            in_test[i] = true;
        }
        (0..in_test.len()).filter(|&i| !in_test[i]).collect()
    }

    pub fn folds(&self) -> &[Vec<usize>] {
        &self.folds
    }
}

fn check_k(n: usize, k: usize) -> Result<(), EvalError> {
    if k < 2 {
        return Err(EvalError::InvalidFoldCount(k));
    }
    if n < k {
        return Err(EvalError::TooFewSamples { n, k });
    }
    Ok(())
}

fn deal(
    groups: impl IntoIterator<Item = Vec<usize>>,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<usize>> {
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for mut group in groups {
        group.shuffle(rng);
        for i in group {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    folds
}

/// Shuffles each class with a seeded generator and deals its members
/// round-robin into `k` folds. The dealing position carries over from one
/// class to the next, so fold sizes also differ by at most one.
pub fn stratified_folds(
    labels: &[usize],
    class_count: usize,
    k: usize,
    seed: u64,
) -> Result<FoldPlan, EvalError> {
    check_k(labels.len(), k)?;
    let mut by_class = vec![Vec::new(); class_count];
    for (i, &l) in labels.iter().enumerate() {
        if l >= class_count {
            return Err(EvalError::LabelOutOfRange {
                label: l,
                classes: class_count,
            });
        }
        by_class[l].push(i);
    }
    if let Some(c) = by_class.iter().position(Vec::is_empty) {
        return Err(EvalError::EmptyClass(c));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(FoldPlan {
        folds: deal(by_class, k, &mut rng),
        seed,
    })
}

/// Class-blind folding: one seeded shuffle of all indices dealt round-robin.
pub fn unstratified_folds(n: usize, k: usize, seed: u64) -> Result<FoldPlan, EvalError> {
    check_k(n, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(FoldPlan {
        folds: deal([(0..n).collect()], k, &mut rng),
        seed,
    })
}
