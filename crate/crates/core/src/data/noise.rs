use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;

use super::{class_to_sign, LabeledDataset, NoiseKind, NoiseSpec};
use crate::error::{invalid, Error, Result};
use crate::rng;
use crate::scalar::Scalar;

fn noisy_count(level: f64, n: usize) -> Result<usize> {
    if !(0.0..=1.0).contains(&level) {
        return Err(invalid(format!("label noise level must lie in [0, 1], got {level}")));
    }
    Ok((level * n as f64).round() as usize)
}

/// Relabels exactly `round(level · n)` samples chosen uniformly without replacement.
pub fn inject_noise<T: Scalar>(ds: &LabeledDataset<T>, spec: NoiseSpec) -> Result<LabeledDataset<T>> {
    if ds.noise.is_some() || ds.noisy_mask.iter().any(|&b| b) {
        return Err(Error::State("label noise was already injected into this dataset".into()));
    }
    let n = ds.len();
    let count = noisy_count(spec.level, n)?;
    let mut out = ds.clone();
    out.noise = Some(spec);
    let mut r = rng::rng_from_seed(spec.seed);
    let mut chosen = sample(&mut r, n, count).into_vec();
    chosen.sort_unstable();
    let c = ds.num_classes;
    for i in chosen {
        out.noisy_mask[i] = true;
        out.assigned_labels[i] = match spec.kind {
            NoiseKind::Symmetric => r.gen_range(0..c),
            NoiseKind::Asymmetric => (ds.true_labels[i] + 1) % c,
        };
    }
    Ok(out)
}

/// Signed label vector of a binary dataset where `round(lnl · n)` uniformly
/// chosen entries are replaced by independent uniform ±1 draws.
pub fn noisy_binary_label_vector<T: Scalar>(ds: &LabeledDataset<T>, lnl: f64, seed: u64) -> Result<Vec<T>> {
    if !ds.ntk_mode {
        return Err(invalid("noisy binary labels need an NTK-mode dataset"));
    }
    corrupt_signs(&ds.signed_true()?, lnl, seed)
}

/// Replaces `round(lnl · n)` uniformly chosen entries of a ±1 vector by
/// uniform ±1 draws.
///
/// The replaced positions are a prefix of one seeded permutation and each
/// position owns one seeded sign, so under a fixed seed the corruption at a
/// lower level is contained in the corruption at any higher level.
pub fn corrupt_signs<T: Scalar>(truth: &[T], lnl: f64, seed: u64) -> Result<Vec<T>> {
    let n = truth.len();
    let count = noisy_count(lnl, n)?;
    let mut r = rng::rng_from_seed(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut r);
    let signs: Vec<bool> = (0..n).map(|_| r.gen()).collect();
    let mut y = truth.to_vec();
    for &i in &order[..count] {
        y[i] = class_to_sign(usize::from(signs[i]));
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synth_blobs, synth_sphere_dataset};

    #[test]
    fn zero_level_is_identity_on_labels() {
        let ds = synth_blobs::<f64>(50, 3, 5, 1.0, 2).unwrap();
        let noisy = inject_noise(&ds, NoiseSpec::symmetric(0.0, 1)).unwrap();
        assert_eq!(noisy.assigned_labels, ds.assigned_labels);
        assert_eq!(noisy.noisy_mask, ds.noisy_mask);
        assert_eq!(noisy.inputs, ds.inputs);
    }

    #[test]
    fn exact_noisy_count_and_mask_invariant() {
        let ds = synth_blobs::<f64>(1001, 3, 7, 1.0, 2).unwrap();
        let noisy = inject_noise(&ds, NoiseSpec::symmetric(0.37, 9)).unwrap();
        assert_eq!(noisy.noisy_count(), (0.37f64 * 1001.0).round() as usize);
        for i in 0..noisy.len() {
            if !noisy.noisy_mask[i] {
                assert_eq!(noisy.assigned_labels[i], noisy.true_labels[i]);
            }
        }
    }

    #[test]
    fn asymmetric_full_flip_on_two_classes() {
        let ds = synth_blobs::<f64>(40, 3, 2, 1.0, 2).unwrap();
        let noisy = inject_noise(&ds, NoiseSpec::asymmetric(1.0, 3)).unwrap();
        for (a, t) in noisy.assigned_labels.iter().zip(&noisy.true_labels) {
            assert_eq!(*a, 1 - *t);
        }
    }

    #[test]
    fn double_injection_is_a_state_error() {
        let ds = synth_blobs::<f64>(40, 3, 2, 1.0, 2).unwrap();
        let once = inject_noise(&ds, NoiseSpec::symmetric(0.0, 3)).unwrap();
        assert!(matches!(inject_noise(&once, NoiseSpec::symmetric(0.2, 3)), Err(Error::State(_))));
    }

    #[test]
    fn injection_is_deterministic() {
        let ds = synth_blobs::<f64>(300, 3, 4, 1.0, 2).unwrap();
        let a = inject_noise(&ds, NoiseSpec::symmetric(0.5, 17)).unwrap();
        let b = inject_noise(&ds, NoiseSpec::symmetric(0.5, 17)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn binary_vector_rounding_and_extremes() {
        let ds = synth_sphere_dataset::<f64>(1000, 4, 1).unwrap();
        let truth = ds.signed_true().unwrap();
        assert_eq!(noisy_binary_label_vector(&ds, 0.0, 5).unwrap(), truth);
        let all = noisy_binary_label_vector(&ds, 1.0, 5).unwrap();
        let mean = all.iter().sum::<f64>() / 1000.0;
        assert!(mean.abs() <= 3.0 / 1000f64.sqrt());
        assert!(noisy_binary_label_vector(&ds, 1.5, 5).is_err());
        assert!(noisy_binary_label_vector(&ds, -0.1, 5).is_err());
    }

    #[test]
    fn corruption_is_nested_across_levels() {
        let truth: Vec<f64> = (0..200).map(|i| if i % 3 == 0 { 1.0 } else { -1.0 }).collect();
        let low = corrupt_signs(&truth, 0.25, 4).unwrap();
        let high = corrupt_signs(&truth, 0.75, 4).unwrap();
        for i in 0..truth.len() {
            if low[i] != truth[i] {
                assert_eq!(high[i], low[i]);
            }
        }
    }
}
