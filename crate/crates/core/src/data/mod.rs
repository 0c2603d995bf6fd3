//! Datasets, label noise and the randomly-labeled probe batch.

mod idx;
mod noise;
mod probe;
mod synth;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

pub use idx::{load_idx, read_idx_images, read_idx_labels, write_idx, IdxOptions, IMAGE_MAGIC, LABEL_MAGIC};
pub use noise::{corrupt_signs, inject_noise, noisy_binary_label_vector};
pub use probe::{make_probe_batch, DEFAULT_PROBE_SIZE};
pub use synth::{synth_blobs, synth_sphere_dataset, BlobGenerator};

/// Maps a binary class index to its signed label (0 ↦ −1, 1 ↦ +1).
#[inline]
pub fn class_to_sign<T: Scalar>(class: usize) -> T {
    if class == 0 {
        -T::one()
    } else {
        T::one()
    }
}

/// Inverse of [`class_to_sign`]; non-negative values map to class 1.
#[inline]
pub fn sign_to_class<T: Scalar>(value: T) -> usize {
    usize::from(value >= T::zero())
}

/// Labeled training data together with its ground truth and noise bookkeeping.
///
/// Labels are stored as class indices in `[0, num_classes)`. In binary (NTK)
/// mode `num_classes == 2` and class 0/1 stand for the signed labels −1/+1.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset<T> {
    pub inputs: Array2<T>,
    pub assigned_labels: Vec<usize>,
    pub true_labels: Vec<usize>,
    pub noisy_mask: Vec<bool>,
    pub num_classes: usize,
    /// Unit-norm inputs with ±1 labels.
    pub ntk_mode: bool,
    pub(crate) noise: Option<NoiseSpec>,
}

impl<T: Scalar> LabeledDataset<T> {
    /// A clean dataset; assigned labels equal the true labels.
    pub fn new(inputs: Array2<T>, labels: Vec<usize>, num_classes: usize, ntk_mode: bool) -> Result<Self> {
        if inputs.nrows() != labels.len() {
            return Err(invalid(format!(
                "{} input rows but {} labels",
                inputs.nrows(),
                labels.len()
            )));
        }
        if num_classes < 2 {
            return Err(invalid("at least two classes required"));
        }
        if let Some(bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(invalid(format!("label {bad} outside [0, {num_classes})")));
        }
        if ntk_mode && num_classes != 2 {
            return Err(invalid("NTK mode requires binary labels"));
        }
        let n = labels.len();
        Ok(Self {
            inputs,
            true_labels: labels.clone(),
            assigned_labels: labels,
            noisy_mask: vec![false; n],
            num_classes,
            ntk_mode,
            noise: None,
        })
    }

    pub fn len(&self) -> usize {
        self.assigned_labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assigned_labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs.ncols()
    }

    /// Number of relabeled samples (n₁).
    pub fn noisy_count(&self) -> usize {
        self.noisy_mask.iter().filter(|&&b| b).count()
    }

    /// The noise specification applied so far, if any.
    pub fn noise_spec(&self) -> Option<&NoiseSpec> {
        self.noise.as_ref()
    }

    /// Assigned labels as ±1 values (binary datasets only).
    pub fn signed_assigned(&self) -> Result<Vec<T>> {
        self.require_binary()?;
        Ok(self.assigned_labels.iter().map(|&c| class_to_sign(c)).collect())
    }

    /// Ground-truth labels as ±1 values (binary datasets only).
    pub fn signed_true(&self) -> Result<Vec<T>> {
        self.require_binary()?;
        Ok(self.true_labels.iter().map(|&c| class_to_sign(c)).collect())
    }

    /// Fraction of samples whose assigned label equals the true label.
    pub fn agreement(&self) -> f64 {
        let same = self
            .assigned_labels
            .iter()
            .zip(&self.true_labels)
            .filter(|(a, t)| a == t)
            .count();
        same as f64 / self.len().max(1) as f64
    }

    fn require_binary(&self) -> Result<()> {
        if self.num_classes != 2 {
            return Err(invalid("signed labels need a binary dataset"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// Relabel uniformly over all classes (the true class included).
    Symmetric,
    /// Relabel to the next class, `t ↦ (t + 1) mod c`.
    Asymmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    /// Label noise level, the fraction of relabeled samples.
    pub level: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn symmetric(level: f64, seed: u64) -> Self {
        Self { kind: NoiseKind::Symmetric, level, seed }
    }

    pub fn asymmetric(level: f64, seed: u64) -> Self {
        Self { kind: NoiseKind::Asymmetric, level, seed }
    }
}

/// A fixed mini-batch whose labels were drawn uniformly at random.
///
/// Built once before training and never resampled.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeBatch<T> {
    pub inputs: Array2<T>,
    pub random_labels: Vec<usize>,
    pub num_classes: usize,
    pub seed: u64,
}

impl<T: Scalar> ProbeBatch<T> {
    pub fn len(&self) -> usize {
        self.random_labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.random_labels.is_empty()
    }

    pub fn signed_labels(&self) -> Vec<T> {
        self.random_labels.iter().map(|&c| class_to_sign(c)).collect()
    }
}
