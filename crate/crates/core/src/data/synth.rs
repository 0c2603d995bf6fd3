use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::StandardNormal;

use super::LabeledDataset;
use crate::error::{invalid, Result};
use crate::rng;
use crate::scalar::Scalar;

fn gaussian<T: Scalar, R: Rng>(r: &mut R) -> T {
    T::of(r.sample::<f64, _>(StandardNormal))
}

/// Binary NTK-mode dataset: inputs uniform on the unit sphere in ℝᵈ, labels
/// given by the side of a random hyperplane through the origin.
pub fn synth_sphere_dataset<T: Scalar>(n: usize, d: usize, seed: u64) -> Result<LabeledDataset<T>> {
    if n < 2 || d < 2 {
        return Err(invalid(format!("sphere dataset needs n >= 2 and d >= 2, got n={n}, d={d}")));
    }
    let mut r = rng::stream(seed, rng::labels::DATA);
    let separator: Array1<T> = (0..d).map(|_| gaussian(&mut r)).collect();
    let mut inputs = Array2::<T>::zeros((n, d));
    for mut row in inputs.rows_mut() {
        // Rejection of (measure-zero) degenerate draws keeps the norm well defined.
        loop {
            row.iter_mut().for_each(|v| *v = gaussian(&mut r));
            let norm = row.dot(&row).sqrt();
            if norm > T::of(1e-12) {
                row.mapv_inplace(|v| v / norm);
                break;
            }
        }
    }
    let labels = inputs
        .rows()
        .into_iter()
        .map(|row| usize::from(row.dot(&separator) >= T::zero()))
        .collect();
    LabeledDataset::new(inputs, labels, 2, true)
}

/// Gaussian class clusters around `c` random means.
///
/// The means are fixed by the generator seed, so train and test samples drawn
/// through the same generator share the class geometry.
#[derive(Debug, Clone)]
pub struct BlobGenerator<T> {
    means: Array2<T>,
    spread: T,
    seed: u64,
}

impl<T: Scalar> BlobGenerator<T> {
    pub fn new(d: usize, c: usize, spread: f64, seed: u64) -> Result<Self> {
        if c < 2 {
            return Err(invalid(format!("blobs need at least 2 classes, got {c}")));
        }
        if d == 0 {
            return Err(invalid("blobs need d >= 1"));
        }
        if !(spread >= 0.0) {
            return Err(invalid(format!("spread must be non-negative, got {spread}")));
        }
        let mut r = rng::stream(seed, "blob-means");
        let means = Array2::from_shape_simple_fn((c, d), || gaussian(&mut r));
        Ok(Self { means, spread: T::of(spread), seed })
    }

    pub fn means(&self) -> &Array2<T> {
        &self.means
    }

    pub fn num_classes(&self) -> usize {
        self.means.nrows()
    }

    /// Draws `n` stratified samples (class of sample `i` is `i mod c`) from the
    /// stream named `split`.
    pub fn sample(&self, n: usize, split: &str) -> Result<LabeledDataset<T>> {
        let c = self.num_classes();
        if n < c {
            return Err(invalid(format!("need n >= c, got n={n}, c={c}")));
        }
        let d = self.means.ncols();
        let mut r = rng::stream(self.seed, split);
        let mut inputs = Array2::<T>::zeros((n, d));
        let mut labels = Vec::with_capacity(n);
        for (i, mut row) in inputs.rows_mut().into_iter().enumerate() {
            let class = i % c;
            for (x, &mu) in row.iter_mut().zip(self.means.row(class)) {
                let z: T = gaussian(&mut r);
                *x = mu + self.spread * z;
            }
            labels.push(class);
        }
        LabeledDataset::new(inputs, labels, c, false)
    }
}

/// Training split of [`BlobGenerator`].
pub fn synth_blobs<T: Scalar>(n: usize, d: usize, c: usize, spread: f64, seed: u64) -> Result<LabeledDataset<T>> {
    BlobGenerator::new(d, c, spread, seed)?.sample(n, rng::labels::DATA)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_rows_are_unit_norm() {
        let ds = synth_sphere_dataset::<f64>(4, 3, 7).unwrap();
        for row in ds.inputs.rows() {
            assert!((row.dot(&row).sqrt() - 1.0).abs() < 1e-9);
        }
        assert!(ds.ntk_mode);
        assert_eq!(ds.num_classes, 2);
    }

    #[test]
    fn sphere_is_deterministic() {
        let a = synth_sphere_dataset::<f64>(10, 5, 3).unwrap();
        let b = synth_sphere_dataset::<f64>(10, 5, 3).unwrap();
        assert_eq!(a, b);
        let c = synth_sphere_dataset::<f64>(10, 5, 4).unwrap();
        assert_ne!(a.inputs, c.inputs);
    }

    #[test]
    fn sphere_rejects_degenerate_sizes() {
        assert!(synth_sphere_dataset::<f64>(0, 3, 1).is_err());
        assert!(synth_sphere_dataset::<f64>(3, 0, 1).is_err());
        assert!(synth_sphere_dataset::<f64>(1, 3, 1).is_err());
    }

    #[test]
    fn sphere_labels_are_roughly_balanced() {
        let ds = synth_sphere_dataset::<f64>(2000, 8, 11).unwrap();
        let pos = ds.true_labels.iter().filter(|&&c| c == 1).count() as f64;
        // 4σ binomial band around n/2.
        assert!((pos - 1000.0).abs() < 4.0 * (2000.0f64 * 0.25).sqrt());
    }

    #[test]
    fn blobs_zero_spread_collapses_to_means() {
        let g = BlobGenerator::<f64>::new(3, 4, 0.0, 9).unwrap();
        let ds = g.sample(12, "train").unwrap();
        for (row, &c) in ds.inputs.rows().into_iter().zip(&ds.true_labels) {
            assert_eq!(row, g.means().row(c));
        }
    }

    #[test]
    fn blobs_are_stratified() {
        let ds = synth_blobs::<f64>(100, 5, 10, 1.0, 1).unwrap();
        for class in 0..10 {
            assert_eq!(ds.true_labels.iter().filter(|&&c| c == class).count(), 10);
        }
    }

    #[test]
    fn blobs_reject_bad_arguments() {
        assert!(synth_blobs::<f64>(100, 5, 10, -0.1, 1).is_err());
        assert!(synth_blobs::<f64>(5, 5, 10, 0.1, 1).is_err());
        assert!(synth_blobs::<f64>(5, 5, 1, 0.1, 1).is_err());
    }
}
