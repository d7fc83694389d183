//! Synthetic Gaussian blobs standing in for real CNN features.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{label_view, DatasetError, Expression, FeatureDataset, Gender, LayerTag, SampleMeta, Task, TaskLabelView};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub classes: usize,
    pub per_class: usize,
    pub dim: usize,
    /// Expected distance between two class centroids. Noise is unit
    /// variance per coordinate.
    pub separation: f64,
    pub seed: u64,
}

impl SynthSpec {
    fn validate(&self) -> Result<(), DatasetError> {
        let bad = |m: &str| Err(DatasetError::InvalidSynth(m.to_string()));
        if self.classes < 2 {
            return bad("need at least 2 classes");
        }
        if self.per_class < 1 {
            return bad("need at least 1 sample per class");
        }
        if self.dim < 1 {
            return bad("dimension must be positive");
        }
        if !(self.separation >= 0.0 && self.separation.is_finite()) {
            return bad("separation must be finite and non-negative");
        }
        Ok(())
    }

    fn meta(&self) -> Vec<SampleMeta> {
        const AGES: [u32; 4] = [12, 25, 40, 60];
        let mut out = Vec::with_capacity(self.classes * self.per_class);
        for c in 0..self.classes {
            for j in 0..self.per_class {
                let image_index = (j % 7) as u8 + 1;
                out.push(SampleMeta {
                    session: ((j / 7) % 2) as u8 + 1,
                    subject: c as u32 + 1,
                    gender: if c % 2 == 0 { Gender::Female } else { Gender::Male },
                    age_years: AGES[c % 4],
                    image_index,
                    expression: if image_index >= 6 {
                        Expression::Smile
                    } else {
                        Expression::Normal
                    },
                });
            }
        }
        out
    }
}

/// One Gaussian blob per class, `per_class` rows each, grouped by class.
///
/// Each class is its own subject, so the identity view of the returned
/// metadata equals the returned labels. Gender alternates by class
/// (even classes female) and ages cycle through the four brackets.
pub fn synth_dataset(spec: &SynthSpec) -> Result<(FeatureDataset, TaskLabelView), DatasetError> {
    let (fc6, _, view) = synth_layer_pair(spec)?;
    Ok((fc6, view))
}

/// Two correlated layers drawn around shared class centroids with
/// independent noise, tagged `fc6` and `fc7`. The first equals
/// [`synth_dataset`] for the same spec.
pub fn synth_layer_pair(
    spec: &SynthSpec,
) -> Result<(FeatureDataset, FeatureDataset, TaskLabelView), DatasetError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    // E|a - b|^2 = separation^2 for two independent centroids.
    let scale = spec.separation / (2.0 * spec.dim as f64).sqrt();
    let centroids: Vec<f64> = (0..spec.classes * spec.dim)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            scale * z
        })
        .collect();

    let mut second_rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x9e37_79b9_7f4a_7c15);
    let n = spec.classes * spec.per_class;
    let mut first = Array2::zeros((n, spec.dim));
    let mut second = Array2::zeros((n, spec.dim));
    for i in 0..n {
        let c = i / spec.per_class;
        for j in 0..spec.dim {
            let mu = centroids[c * spec.dim + j];
            let e1: f64 = StandardNormal.sample(&mut rng);
            let e2: f64 = StandardNormal.sample(&mut second_rng);
            first[[i, j]] = mu + e1;
            second[[i, j]] = mu + e2;
        }
    }

    let meta = spec.meta();
    let view = label_view(&meta, Task::Identity);
    let fc6 = FeatureDataset::new(first, meta.clone(), LayerTag::Fc6)?;
    let fc7 = FeatureDataset::new(second, meta, LayerTag::Fc7)?;
    Ok((fc6, fc7, view))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(separation: f64, seed: u64) -> SynthSpec {
        SynthSpec {
            classes: 2,
            per_class: 5,
            dim: 3,
            separation,
            seed,
        }
    }

    fn centroid(ds: &FeatureDataset, rows: std::ops::Range<usize>) -> Vec<f64> {
        let n = rows.len() as f64;
        (0..ds.dim())
            .map(|j| rows.clone().map(|i| ds.features()[[i, j]]).sum::<f64>() / n)
            .collect()
    }

    #[test]
    fn small_two_class_blobs() {
        let (ds, view) = synth_dataset(&spec(10.0, 1)).unwrap();
        assert_eq!((ds.len(), ds.dim()), (10, 3));
        assert_eq!(view.labels, [0, 0, 0, 0, 0, 1, 1, 1, 1, 1]);
        let a = centroid(&ds, 0..5);
        let b = centroid(&ds, 5..10);
        let dist = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        assert!(dist > 5.0, "centroid distance {dist}");
    }

    #[test]
    fn zero_separation_shares_centroid() {
        let (a, _) = synth_dataset(&spec(0.0, 3)).unwrap();
        let (b, _) = synth_dataset(&spec(0.0, 4)).unwrap();
        // With zero separation every row is pure unit noise around the origin.
        assert_ne!(a.features(), b.features());
        let big = SynthSpec { per_class: 2000, ..spec(0.0, 5) };
        let (ds, _) = synth_dataset(&big).unwrap();
        for j in 0..3 {
            let m0 = centroid(&ds, 0..2000)[j];
            let m1 = centroid(&ds, 2000..4000)[j];
            assert!((m0 - m1).abs() < 0.15);
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let (a, va) = synth_dataset(&spec(10.0, 9)).unwrap();
        let (b, vb) = synth_dataset(&spec(10.0, 9)).unwrap();
        assert_eq!(va, vb);
        assert!(a
            .features()
            .iter()
            .zip(b.features().iter())
            .all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn pair_shares_metadata() {
        let (fc6, fc7, _) = synth_layer_pair(&spec(4.0, 2)).unwrap();
        assert_eq!(fc6.meta(), fc7.meta());
        assert_eq!(fc6.layer(), LayerTag::Fc6);
        assert_eq!(fc7.layer(), LayerTag::Fc7);
        assert_ne!(fc6.features(), fc7.features());
        assert_eq!(synth_dataset(&spec(4.0, 2)).unwrap().0, fc6);
    }

    #[test]
    fn rejects_invalid_spec() {
        assert!(synth_dataset(&SynthSpec { classes: 1, ..spec(1.0, 0) }).is_err());
        assert!(synth_dataset(&SynthSpec { per_class: 0, ..spec(1.0, 0) }).is_err());
        assert!(synth_dataset(&SynthSpec { dim: 0, ..spec(1.0, 0) }).is_err());
        assert!(synth_dataset(&spec(-1.0, 0)).is_err());
    }
}
