//! Principal component analysis with the component count picked by a
//! retained-variance threshold.
//!
//! Data is centered but not scaled. The sample covariance uses the n−1
//! divisor. When there are fewer samples than features the eigenproblem
//! is solved on the n×n Gram matrix of the centered rows and the axes are
//! mapped back into feature space, so 4096-wide inputs never need a
//! 4096×4096 decomposition.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::{self, Write};

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::dataset::{FeatureDataset, LayerTag};

/// Eigenvalues below this fraction of the largest one count as zero.
pub const RELATIVE_EIGEN_FLOOR: f64 = 1e-12;

/// Slack when comparing a cumulative variance fraction with the requested
/// retention, so that rounding in the partial sums cannot push the count
/// past the last nonzero eigenvalue.
const RETENTION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PcaError {
    #[error("retention must lie in (0, 1], got {0}")]
    InvalidRetention(f64),
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("all rows are identical (zero total variance)")]
    DegenerateData,
    #[error("eigenvalues sum to zero")]
    ZeroVariance,
    #[error("non-finite input at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("expected {expected} columns, got {found}")]
    DimMismatch { expected: usize, found: usize },
}

/// A fitted projection onto the leading principal axes.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    mean: Array1<f64>,
    /// d×m, one unit axis per column.
    components: Array2<f64>,
    /// Every eigenvalue considered during the fit (at most min(n−1, d)),
    /// descending, with negligible ones set to zero.
    spectrum: Vec<f64>,
    retention: f64,
    total_variance: f64,
}

impl PcaModel {
    pub fn mean(&self) -> &Array1<f64> {
        &self.mean
    }

    pub fn components(&self) -> &Array2<f64> {
        &self.components
    }

    /// Eigenvalues of the retained axes.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum[..self.output_dim()]
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn retention(&self) -> f64 {
        self.retention
    }

    /// Sum of the per-feature sample variances of the training data.
    pub fn total_variance(&self) -> f64 {
        self.total_variance
    }

    pub fn input_dim(&self) -> usize {
        self.components.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.components.ncols()
    }

    /// Fraction of the training variance carried by the retained axes.
    pub fn retained_fraction(&self) -> f64 {
        self.eigenvalues().iter().sum::<f64>() / self.spectrum.iter().sum::<f64>()
    }

    /// Projects rows of `x` onto the retained axes: `(x − mean)·components`.
    pub fn transform(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>, PcaError> {
        if x.ncols() != self.input_dim() {
            return Err(PcaError::DimMismatch {
                expected: self.input_dim(),
                found: x.ncols(),
            });
        }
        let centered = &x - &self.mean.view().insert_axis(Axis(0));
        Ok(centered.dot(&self.components))
    }

    pub fn inverse_transform(&self, z: ArrayView2<'_, f64>) -> Result<Array2<f64>, PcaError> {
        if z.ncols() != self.output_dim() {
            return Err(PcaError::DimMismatch {
                expected: self.output_dim(),
                found: z.ncols(),
            });
        }
        Ok(z.dot(&self.components.t()) + self.mean.view().insert_axis(Axis(0)))
    }

    pub fn transform_dataset(&self, ds: &FeatureDataset) -> Result<FeatureDataset, PcaError> {
        let z = self.transform(ds.features().view())?;
        Ok(ds.with_features(z, LayerTag::Reduced))
    }

    /// Writes the retention, the component count and one retained
    /// eigenvalue per line.
    pub fn write_summary<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "retention={}", self.retention)?;
        writeln!(out, "components={}", self.output_dim())?;
        for v in self.eigenvalues() {
            writeln!(out, "{v}")?;
        }
        out.flush()
    }
}

fn check_retention(retention: f64) -> Result<(), PcaError> {
    if retention > 0.0 && retention <= 1.0 {
        Ok(())
    } else {
        Err(PcaError::InvalidRetention(retention))
    }
}

/// Smallest count m ≥ 1 whose leading eigenvalues reach `retention` of
/// the total. `eigenvalues` must be non-negative and descending.
pub fn component_count(eigenvalues: &[f64], retention: f64) -> Result<usize, PcaError> {
    check_retention(retention)?;
    let total: f64 = eigenvalues.iter().sum();
    if !(total > 0.0) {
        return Err(PcaError::ZeroVariance);
    }
    let mut cumulative = 0.0;
    for (i, &v) in eigenvalues.iter().enumerate() {
        cumulative += v;
        if cumulative / total >= retention - RETENTION_SLACK {
            return Ok(i + 1);
        }
    }
    Ok(eigenvalues.len())
}

/// Fits a PCA model on the rows of `x`.
pub fn fit(x: ArrayView2<'_, f64>, retention: f64) -> Result<PcaModel, PcaError> {
    check_retention(retention)?;
    let (n, d) = x.dim();
    if n < 2 {
        return Err(PcaError::TooFewSamples(n));
    }
    if let Some(((row, col), _)) = x.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(PcaError::NonFinite { row, col });
    }

    let mean = x.mean_axis(Axis(0)).expect("n >= 2");
    let centered = &x - &mean.view().insert_axis(Axis(0));
    let divisor = (n - 1) as f64;
    let total_variance = centered.iter().map(|v| v * v).sum::<f64>() / divisor;
    if !(total_variance > 0.0) {
        return Err(PcaError::DegenerateData);
    }

    let use_gram = n < d;
    let scatter = if use_gram {
        centered.dot(&centered.t())
    } else {
        centered.t().dot(&centered)
    } / divisor;

    let (values, vectors) = sorted_eigen(scatter);
    let rank_limit = (n - 1).min(d);
    let lambda_max = values[0].max(0.0);
    if !(lambda_max > 0.0) {
        return Err(PcaError::DegenerateData);
    }
    let spectrum: Vec<f64> = values
        .iter()
        .take(rank_limit)
        .map(|&v| if v < RELATIVE_EIGEN_FLOOR * lambda_max { 0.0 } else { v })
        .collect();

    let m = component_count(&spectrum, retention)?;
    let mut components = Array2::zeros((d, m));
    for k in 0..m {
        let mut axis = if use_gram {
            // u is a unit eigenvector of Xc·Xcᵀ/(n−1); Xcᵀ·u points along the
            // matching covariance eigenvector.
            centered.t().dot(&vectors.column(k))
        } else {
            vectors.column(k).to_owned()
        };
        let norm = axis.dot(&axis).sqrt();
        axis /= norm;
        orient(&mut axis);
        components.column_mut(k).assign(&axis);
    }

    Ok(PcaModel {
        mean,
        components,
        spectrum,
        retention,
        total_variance,
    })
}

/// Full symmetric eigendecomposition, eigenvalues descending (stable on
/// ties), eigenvectors as columns in the same order.
fn sorted_eigen(sym: Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let size = sym.nrows();
    let matrix = DMatrix::from_fn(size, size, |i, j| sym[[i, j]]);
    let eig = SymmetricEigen::new(matrix);
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = Array2::from_shape_fn((size, size), |(i, j)| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Flips `axis` so its largest-magnitude entry (lowest index on ties) is
/// positive.
fn orient(axis: &mut Array1<f64>) {
    let mut best = 0;
    for (i, v) in axis.iter().enumerate() {
        if v.abs() > axis[best].abs() {
            best = i;
        }
    }
    if axis[best] < 0.0 {
        axis.mapv_inplace(|v| -v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, s};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(n: usize, d: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_simple_fn((n, d), || StandardNormal.sample(&mut rng))
    }

    fn sample_variance(col: ndarray::ArrayView1<'_, f64>) -> f64 {
        let n = col.len() as f64;
        let m = col.sum() / n;
        col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)
    }

    #[test]
    fn counts_components() {
        assert_eq!(component_count(&[9.0, 1.0], 0.9).unwrap(), 1);
        assert_eq!(component_count(&[9.0, 1.0], 0.91).unwrap(), 2);
        for r in [0.01, 0.5, 0.95, 1.0] {
            assert_eq!(component_count(&[5.0, 0.0, 0.0], r).unwrap(), 1);
        }
        assert_eq!(component_count(&[0.0, 0.0], 0.5), Err(PcaError::ZeroVariance));
        assert_eq!(component_count(&[1.0], 0.0), Err(PcaError::InvalidRetention(0.0)));
        assert_eq!(component_count(&[1.0], 1.5), Err(PcaError::InvalidRetention(1.5)));
    }

    #[test]
    fn single_varying_axis() {
        let x = array![[1.0, 5.0, -2.0], [3.0, 5.0, -2.0], [-4.0, 5.0, -2.0], [0.5, 5.0, -2.0]];
        let model = fit(x.view(), 0.95).unwrap();
        assert_eq!(model.output_dim(), 1);
        let axis = model.components().column(0);
        assert!((axis[0].abs() - 1.0).abs() < 1e-12);
        assert!(axis[1].abs() < 1e-12 && axis[2].abs() < 1e-12);
        let var0 = sample_variance(x.column(0));
        assert!((model.eigenvalues()[0] - var0).abs() < 1e-10);
    }

    #[test]
    fn perfectly_correlated_pair() {
        let x = array![[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]];
        let model = fit(x.view(), 0.99).unwrap();
        assert_eq!(model.output_dim(), 1);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let axis = model.components().column(0);
        assert!((axis[0] - h).abs() < 1e-12 && (axis[1] - h).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let same = Array2::from_elem((5, 3), 2.5);
        assert_eq!(fit(same.view(), 0.9), Err(PcaError::DegenerateData));
        assert_eq!(fit(gaussian(1, 3, 0).view(), 0.9), Err(PcaError::TooFewSamples(1)));
        assert_eq!(fit(gaussian(4, 3, 0).view(), 0.0), Err(PcaError::InvalidRetention(0.0)));
        let mut bad = gaussian(4, 3, 0);
        bad[[2, 1]] = f64::NAN;
        assert_eq!(fit(bad.view(), 0.9), Err(PcaError::NonFinite { row: 2, col: 1 }));
        let model = fit(gaussian(6, 3, 1).view(), 0.9).unwrap();
        assert!(matches!(
            model.transform(gaussian(2, 4, 0).view()),
            Err(PcaError::DimMismatch { expected: 3, found: 4 })
        ));
    }

    fn check_model_invariants(x: &Array2<f64>, model: &PcaModel) {
        let m = model.output_dim();
        let gram = model.components().t().dot(model.components());
        for i in 0..m {
            for j in 0..m {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((gram[[i, j]] - want).abs() < 1e-8, "gram[{i},{j}] = {}", gram[[i, j]]);
            }
        }
        assert!(model.spectrum().windows(2).all(|w| w[0] >= w[1]));
        assert!(model.spectrum().iter().all(|&v| v >= 0.0));
        let total: f64 = model.spectrum().iter().sum();
        assert!((total - model.total_variance()).abs() <= 1e-8 * model.total_variance().max(1.0));
        assert_eq!(m, component_count(model.spectrum(), model.retention()).unwrap());

        let z = model.transform(x.view()).unwrap();
        for k in 0..m {
            let v = sample_variance(z.column(k));
            assert!((v - model.eigenvalues()[k]).abs() < 1e-8 * model.eigenvalues()[0].max(1.0));
        }
    }

    #[test]
    fn invariants_on_both_routes() {
        for (n, d, seed) in [(30, 6, 1), (6, 30, 2), (10, 10, 3), (3, 50, 4), (40, 2, 5)] {
            let x = gaussian(n, d, seed);
            for r in [0.5, 0.95, 0.99, 1.0] {
                let model = fit(x.view(), r).unwrap();
                check_model_invariants(&x, &model);
                assert!(model.spectrum().len() <= (n - 1).min(d));
            }
        }
    }

    #[test]
    fn gram_and_covariance_routes_agree() {
        let x = gaussian(8, 12, 7);
        let wide = fit(x.view(), 1.0).unwrap();
        // Duplicating every row keeps the axes and pushes n past d.
        let mut tall = Array2::zeros((16, 12));
        tall.slice_mut(s![..8, ..]).assign(&x);
        tall.slice_mut(s![8.., ..]).assign(&x);
        let tall_model = fit(tall.view(), 1.0).unwrap();
        assert_eq!(wide.output_dim(), tall_model.output_dim());
        let scale = 7.0 / 15.0; // (n−1) divisors: 7 vs 15 on twice the scatter
        for k in 0..wide.output_dim() {
            let a = wide.eigenvalues()[k];
            let b = tall_model.eigenvalues()[k] / (2.0 * scale);
            assert!((a - b).abs() < 1e-9 * a.max(1.0), "{a} vs {b}");
            let dot = wide
                .components()
                .column(k)
                .dot(&tall_model.components().column(k));
            assert!((dot - 1.0).abs() < 1e-8, "axis {k}: {dot}");
        }
    }

    #[test]
    fn mean_row_maps_to_origin() {
        let x = gaussian(12, 5, 9);
        let model = fit(x.view(), 0.97).unwrap();
        let mean = model.mean().clone().insert_axis(Axis(0));
        let z = model.transform(mean.view()).unwrap();
        assert!(z.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn reconstruction_error_bounded_by_discarded_variance() {
        for seed in 0..10 {
            let x = gaussian(25, 8, 100 + seed);
            for r in [0.95, 0.97, 0.99] {
                let model = fit(x.view(), r).unwrap();
                let z = model.transform(x.view()).unwrap();
                let back = model.inverse_transform(z.view()).unwrap();
                let centered = &x - &model.mean().view().insert_axis(Axis(0));
                let err: f64 = (&back - &x).iter().map(|v| v * v).sum();
                let norm: f64 = centered.iter().map(|v| v * v).sum();
                // Relative squared error is exactly the discarded variance share.
                assert!(err / norm <= 1.0 - r + 1e-6, "seed {seed} r {r}: {}", err / norm);
            }
        }
    }

    #[test]
    fn full_rank_projection_is_an_isometry() {
        let x = gaussian(15, 6, 21);
        let model = fit(x.view(), 1.0).unwrap();
        assert_eq!(model.output_dim(), 6);
        let z = model.transform(x.view()).unwrap();
        for i in 0..15 {
            for j in 0..i {
                let dx = (&x.row(i) - &x.row(j)).mapv(|v| v * v).sum().sqrt();
                let dz = (&z.row(i) - &z.row(j)).mapv(|v| v * v).sum().sqrt();
                assert!((dx - dz).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn repeated_fits_match() {
        let x = gaussian(20, 40, 33);
        let a = fit(x.view(), 0.95).unwrap();
        let b = fit(x.view(), 0.95).unwrap();
        assert_eq!(a.output_dim(), b.output_dim());
        for (p, q) in a.components().iter().zip(b.components().iter()) {
            assert!((p - q).abs() <= 1e-12);
        }
    }

    #[test]
    fn summary_lists_retained_eigenvalues() {
        let model = fit(gaussian(10, 4, 2).view(), 0.97).unwrap();
        let mut buf = Vec::new();
        model.write_summary(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "retention=0.97");
        assert_eq!(lines[1], format!("components={}", model.output_dim()));
        assert_eq!(lines.len(), 2 + model.output_dim());
        assert_eq!(lines[2].parse::<f64>().unwrap(), model.eigenvalues()[0]);
    }
}
