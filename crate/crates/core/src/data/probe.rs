use ndarray::Axis;
use rand::seq::index::sample;
use rand::Rng;

use super::{LabeledDataset, ProbeBatch};
use crate::error::{invalid, Result};
use crate::rng;
use crate::scalar::Scalar;

/// Probe batch size used throughout the experiments.
pub const DEFAULT_PROBE_SIZE: usize = 128;

/// Samples `b` inputs without replacement and gives them labels drawn
/// uniformly over the classes. The labels depend only on `seed`, never on the
/// dataset's own labels.
pub fn make_probe_batch<T: Scalar>(ds: &LabeledDataset<T>, b: usize, seed: u64) -> Result<ProbeBatch<T>> {
    if b == 0 {
        return Err(invalid("probe batch size must be positive"));
    }
    if b > ds.len() {
        return Err(invalid(format!("probe batch of {b} exceeds dataset size {}", ds.len())));
    }
    let mut pick = rng::stream(seed, "probe-inputs");
    let rows = sample(&mut pick, ds.len(), b).into_vec();
    let mut draw = rng::stream(seed, "probe-labels");
    let random_labels = (0..b).map(|_| draw.gen_range(0..ds.num_classes)).collect();
    Ok(ProbeBatch {
        inputs: ds.inputs.select(Axis(0), &rows),
        random_labels,
        num_classes: ds.num_classes,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synth_blobs;

    #[test]
    fn rejects_bad_sizes() {
        let ds = synth_blobs::<f64>(20, 2, 2, 1.0, 0).unwrap();
        assert!(make_probe_batch(&ds, 0, 1).is_err());
        assert!(make_probe_batch(&ds, 21, 1).is_err());
        assert_eq!(make_probe_batch(&ds, 20, 1).unwrap().len(), 20);
    }

    #[test]
    fn same_seed_same_batch() {
        let ds = synth_blobs::<f64>(300, 2, 3, 1.0, 0).unwrap();
        assert_eq!(make_probe_batch(&ds, DEFAULT_PROBE_SIZE, 4).unwrap(), make_probe_batch(&ds, DEFAULT_PROBE_SIZE, 4).unwrap());
    }

    #[test]
    fn labels_ignore_dataset_labels() {
        let ds = synth_blobs::<f64>(300, 2, 3, 1.0, 0).unwrap();
        let mut permuted = ds.clone();
        permuted.assigned_labels.reverse();
        assert_eq!(make_probe_batch(&ds, 64, 8).unwrap(), make_probe_batch(&permuted, 64, 8).unwrap());
    }

    #[test]
    fn rows_come_from_the_dataset_without_repeats() {
        let ds = synth_blobs::<f64>(50, 3, 5, 1.0, 0).unwrap();
        let probe = make_probe_batch(&ds, 50, 2).unwrap();
        let mut hits: Vec<usize> = probe
            .inputs
            .rows()
            .into_iter()
            .map(|r| ds.inputs.rows().into_iter().position(|x| x == r).unwrap())
            .collect();
        hits.sort_unstable();
        hits.dedup();
        assert_eq!(hits.len(), 50);
    }
}
