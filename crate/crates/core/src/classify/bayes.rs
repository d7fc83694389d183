use std::f64::consts::PI;

use ndarray::{Array1, Array2, ArrayView2, Axis};

/// Relative variance floor, scaled by the mean feature variance.
const VAR_SMOOTHING: f64 = 1e-9;

/// Gaussian naive Bayes with per-class, per-feature means and variances.
#[derive(Debug, Clone)]
pub struct GaussianNb {
    means: Array2<f64>,
    variances: Array2<f64>,
    log_priors: Array1<f64>,
}

impl GaussianNb {
    pub(super) fn fit(x: ArrayView2<'_, f64>, y: &[usize], class_count: usize) -> Self {
        let (n, d) = x.dim();
        let mut counts = vec![0usize; class_count];
        let mut means = Array2::<f64>::zeros((class_count, d));
        for (row, &c) in x.outer_iter().zip(y) {
            counts[c] += 1;
            let mut m = means.row_mut(c);
            m += &row;
        }
        for (mut m, &cnt) in means.outer_iter_mut().zip(&counts) {
            m /= cnt as f64;
        }
        let mut variances = Array2::<f64>::zeros((class_count, d));
        for (row, &c) in x.outer_iter().zip(y) {
            let diff = &row - &means.row(c);
            let mut v = variances.row_mut(c);
            v += &diff.mapv(|e| e * e);
        }
        for (mut v, &cnt) in variances.outer_iter_mut().zip(&counts) {
            v /= cnt as f64;
        }

        let overall = x.var_axis(Axis(0), 0.0);
        let mean_var = overall.sum() / d as f64;
        let floor = if mean_var > 0.0 {
            VAR_SMOOTHING * mean_var
        } else {
            VAR_SMOOTHING
        };
        variances.mapv_inplace(|v| v.max(floor));

        let log_priors = counts
            .iter()
            .map(|&c| (c as f64 / n as f64).ln())
            .collect();
        GaussianNb {
            means,
            variances,
            log_priors,
        }
    }

    pub fn class_count(&self) -> usize {
        self.means.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.means.ncols()
    }

    pub fn means(&self) -> &Array2<f64> {
        &self.means
    }

    pub fn variances(&self) -> &Array2<f64> {
        &self.variances
    }

    /// Unnormalized log joint likelihood of each row under each class.
    pub fn log_joint(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let c = self.class_count();
        let mut out = Array2::zeros((x.nrows(), c));
        for (i, row) in x.outer_iter().enumerate() {
            for k in 0..c {
                let mut ll = self.log_priors[k];
                for ((&v, &mu), &var) in row
                    .iter()
                    .zip(self.means.row(k).iter())
                    .zip(self.variances.row(k).iter())
                {
                    ll -= 0.5 * ((2.0 * PI * var).ln() + (v - mu) * (v - mu) / var);
                }
                out[[i, k]] = ll;
            }
        }
        out
    }

    pub(super) fn scores(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut joint = self.log_joint(x);
        for mut row in joint.outer_iter_mut() {
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            row.mapv_inplace(|v| (v - max).exp());
            let sum = row.sum();
            row /= sum;
        }
        joint
    }
}
