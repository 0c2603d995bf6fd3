use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use super::mlp::{argmax_rows, MlpClassifier, MlpGradient};
use super::optim::{lr_at, OptimizerConfig};
use super::two_layer::TwoLayerReluNet;
use crate::data::{class_to_sign, sign_to_class, LabeledDataset};
use crate::error::{shape, Error, Result};
use crate::record::CheckpointRecord;
use crate::rng;
use crate::scalar::Scalar;

/// Either network kind. The two-layer net trains on the squared loss with
/// ±1 targets; the MLP on mean softmax cross-entropy.
#[derive(Debug, Clone, PartialEq)]
pub enum Model<T> {
    TwoLayer(TwoLayerReluNet<T>),
    Mlp(MlpClassifier<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gradient<T> {
    TwoLayer(Array2<T>),
    Mlp(MlpGradient<T>),
}

impl<T: Scalar> Gradient<T> {
    /// `self ← momentum · self + other`.
    fn accumulate(&mut self, momentum: T, other: &Gradient<T>) -> Result<()> {
        match (self, other) {
            (Gradient::TwoLayer(v), Gradient::TwoLayer(g)) => {
                v.mapv_inplace(|x| x * momentum);
                *v += g;
            }
            (Gradient::Mlp(v), Gradient::Mlp(g)) => {
                for (vl, gl) in v.iter_mut().zip(g) {
                    vl.weights.mapv_inplace(|x| x * momentum);
                    vl.weights += &gl.weights;
                    vl.bias.mapv_inplace(|x| x * momentum);
                    vl.bias += &gl.bias;
                }
            }
            _ => return Err(Error::State("gradient kind does not match the model".into())),
        }
        Ok(())
    }
}

fn check_binary(labels: &[usize]) -> Result<()> {
    if labels.iter().any(|&c| c > 1) {
        return Err(shape("two-layer network needs binary labels"));
    }
    Ok(())
}

impl<T: Scalar> Model<T> {
    pub fn num_classes(&self) -> usize {
        match self {
            Model::TwoLayer(_) => 2,
            Model::Mlp(m) => m.num_classes(),
        }
    }

    /// Squared loss `½‖f − y‖²` for the two-layer net, mean cross-entropy for the MLP.
    pub fn loss(&self, x: ArrayView2<T>, labels: &[usize]) -> Result<T> {
        match self {
            Model::TwoLayer(net) => {
                check_binary(labels)?;
                let signs: Vec<T> = labels.iter().map(|&c| class_to_sign(c)).collect();
                super::loss::squared_loss(net.forward(x)?.as_slice().expect("contiguous"), &signs)
            }
            Model::Mlp(net) => net.loss(x, labels),
        }
    }

    pub fn loss_and_grad(&self, x: ArrayView2<T>, labels: &[usize]) -> Result<(T, Gradient<T>)> {
        match self {
            Model::TwoLayer(net) => {
                check_binary(labels)?;
                let signs: Vec<T> = labels.iter().map(|&c| class_to_sign(c)).collect();
                let (loss, grad, _) = net.loss_and_grad(x, &signs)?;
                Ok((loss, Gradient::TwoLayer(grad)))
            }
            Model::Mlp(net) => {
                let (loss, grad) = net.loss_and_grad(x, labels)?;
                Ok((loss, Gradient::Mlp(grad)))
            }
        }
    }

    /// Plain step `θ ← θ − lr · g`.
    pub fn apply(&mut self, grad: &Gradient<T>, lr: T) -> Result<()> {
        match (self, grad) {
            (Model::TwoLayer(net), Gradient::TwoLayer(g)) => net.apply_gradient(g, lr),
            (Model::Mlp(net), Gradient::Mlp(g)) => {
                for (layer, gl) in net.layers.iter_mut().zip(g) {
                    layer.weights.scaled_add(-lr, &gl.weights);
                    layer.bias.scaled_add(-lr, &gl.bias);
                }
            }
            _ => return Err(Error::State("gradient kind does not match the model".into())),
        }
        Ok(())
    }

    /// Predicted classes: sign for the two-layer net, argmax (lowest index on
    /// ties) for the MLP.
    pub fn predict(&self, x: ArrayView2<T>) -> Result<Vec<usize>> {
        match self {
            Model::TwoLayer(net) => Ok(net.forward(x)?.iter().map(|&v| sign_to_class(v)).collect()),
            Model::Mlp(net) => Ok(argmax_rows(net.logits(x)?.view())),
        }
    }
}

/// Fraction of (optionally masked) samples whose prediction equals the label.
pub fn accuracy<T: Scalar>(model: &Model<T>, x: ArrayView2<T>, labels: &[usize], mask: Option<&[bool]>) -> Result<f64> {
    let pred = model.predict(x)?;
    if pred.len() != labels.len() {
        return Err(shape(format!("{} inputs vs {} labels", pred.len(), labels.len())));
    }
    accuracy_of(&pred, labels, mask)
}

pub(crate) fn accuracy_of(pred: &[usize], labels: &[usize], mask: Option<&[bool]>) -> Result<f64> {
    if let Some(m) = mask {
        if m.len() != labels.len() {
            return Err(shape(format!("mask of {} entries vs {} labels", m.len(), labels.len())));
        }
    }
    let selected = |i: usize| mask.is_none_or(|m| m[i]);
    let (mut hits, mut total) = (0usize, 0usize);
    for (i, (p, y)) in pred.iter().zip(labels).enumerate() {
        if selected(i) {
            total += 1;
            hits += usize::from(p == y);
        }
    }
    if total == 0 {
        return Err(Error::UndefinedMetric("accuracy over an empty selection".into()));
    }
    Ok(hits as f64 / total as f64)
}

/// Loss and accuracies of a model on a labeled dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    pub loss: f64,
    pub acc: f64,
    /// NaN when the dataset has no clean samples.
    pub acc_clean: f64,
    /// Accuracy against the assigned (wrong) labels of the noisy subset; NaN
    /// when nothing was relabeled.
    pub acc_noisy: f64,
}

impl EpochMetrics {
    pub fn evaluate<T: Scalar>(model: &Model<T>, ds: &LabeledDataset<T>) -> Result<Self> {
        let x = ds.inputs.view();
        let pred = model.predict(x)?;
        let labels = &ds.assigned_labels;
        let clean: Vec<bool> = ds.noisy_mask.iter().map(|&b| !b).collect();
        let or_nan = |r: Result<f64>| match r {
            Ok(v) => Ok(v),
            Err(Error::UndefinedMetric(_)) => Ok(f64::NAN),
            Err(e) => Err(e),
        };
        Ok(Self {
            loss: model.loss(x, labels)?.to_f64_lossy(),
            acc: accuracy_of(&pred, labels, None)?,
            acc_clean: or_nan(accuracy_of(&pred, labels, Some(&clean)))?,
            acc_noisy: or_nan(accuracy_of(&pred, labels, Some(&ds.noisy_mask)))?,
        })
    }
}

/// Single-owner training state: the model, momentum buffer, shuffling stream
/// and one record per completed epoch.
#[derive(Debug, Clone)]
pub struct TrainState<T> {
    pub model: Model<T>,
    pub run_id: String,
    t: usize,
    records: Vec<CheckpointRecord>,
    velocity: Option<Gradient<T>>,
    shuffle: ChaCha8Rng,
}

impl<T: Scalar> TrainState<T> {
    pub fn new(model: Model<T>, run_id: impl Into<String>, seed: u64) -> Self {
        Self {
            model,
            run_id: run_id.into(),
            t: 0,
            records: Vec::new(),
            velocity: None,
            shuffle: rng::stream(seed, rng::labels::SHUFFLE),
        }
    }

    /// Completed epochs.
    pub fn step(&self) -> usize {
        self.t
    }

    pub fn records(&self) -> &[CheckpointRecord] {
        &self.records
    }

    pub fn last_record_mut(&mut self) -> Option<&mut CheckpointRecord> {
        self.records.last_mut()
    }

    pub fn into_records(self) -> Vec<CheckpointRecord> {
        self.records
    }

    /// One epoch of updates on `(x, labels)`; returns the learning rate used.
    fn run_epoch(&mut self, x: ArrayView2<T>, labels: &[usize], cfg: &OptimizerConfig) -> Result<f64> {
        let n = x.nrows();
        if n != labels.len() {
            return Err(shape(format!("{n} inputs vs {} labels", labels.len())));
        }
        let lr = lr_at(cfg, self.t)?;
        let lr_t = T::of(lr);
        let momentum = T::of(cfg.momentum);
        if cfg.batch_size == 0 || cfg.batch_size >= n {
            self.update(x, labels, lr_t, momentum)?;
        } else {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut self.shuffle);
            for chunk in order.chunks(cfg.batch_size) {
                let xb = x.select(Axis(0), chunk);
                let yb: Vec<usize> = chunk.iter().map(|&i| labels[i]).collect();
                self.update(xb.view(), &yb, lr_t, momentum)?;
            }
        }
        Ok(lr)
    }

    fn update(&mut self, x: ArrayView2<T>, labels: &[usize], lr: T, momentum: T) -> Result<()> {
        let (_, grad) = self.model.loss_and_grad(x, labels)?;
        if momentum == T::zero() {
            return self.model.apply(&grad, lr);
        }
        let v = match self.velocity.as_mut() {
            Some(v) => {
                v.accumulate(momentum, &grad)?;
                v
            }
            None => self.velocity.insert(grad),
        };
        self.model.apply(v, lr)
    }

    fn push_record(&mut self, lr: f64, m: EpochMetrics) {
        self.t += 1;
        self.records.push(CheckpointRecord {
            run_id: self.run_id.clone(),
            epoch: self.t,
            lr,
            train_loss: m.loss,
            train_acc: m.acc,
            train_acc_clean: m.acc_clean,
            train_acc_noisy: m.acc_noisy,
            test_acc: None,
            zeta_increment: 0.0,
            zeta: 0.0,
        });
    }

    /// One epoch on a labeled dataset (either model kind), recording loss and
    /// full/clean/noisy accuracies after the update.
    pub fn train_epoch(&mut self, ds: &LabeledDataset<T>, cfg: &OptimizerConfig) -> Result<&CheckpointRecord> {
        let lr = self.run_epoch(ds.inputs.view(), &ds.assigned_labels, cfg)?;
        let metrics = EpochMetrics::evaluate(&self.model, ds)?;
        self.push_record(lr, metrics);
        Ok(self.records.last().expect("record just pushed"))
    }
}

/// One gradient-descent epoch on raw `(x, labels)`: a single full-batch step
/// when `batch_size == 0`, otherwise a shuffled mini-batch pass. The appended
/// record treats every sample as clean (`train_acc_noisy` is NaN).
pub fn gd_step<T: Scalar>(state: &mut TrainState<T>, x: ArrayView2<T>, labels: &[usize], cfg: &OptimizerConfig) -> Result<()> {
    let lr = state.run_epoch(x, labels, cfg)?;
    let pred = state.model.predict(x)?;
    let acc = accuracy_of(&pred, labels, None)?;
    let loss = state.model.loss(x, labels)?.to_f64_lossy();
    state.push_record(lr, EpochMetrics { loss, acc, acc_clean: acc, acc_noisy: f64::NAN });
    Ok(())
}

/// One shuffled mini-batch cross-entropy pass of an MLP.
pub fn train_mlp_epoch<T: Scalar>(state: &mut TrainState<T>, ds: &LabeledDataset<T>, cfg: &OptimizerConfig) -> Result<()> {
    if !matches!(state.model, Model::Mlp(_)) {
        return Err(Error::State("train_mlp_epoch needs an MLP model".into()));
    }
    state.train_epoch(ds, cfg).map(|_| ())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{inject_noise, synth_blobs, synth_sphere_dataset, NoiseSpec};
    use crate::nn::{init_two_layer, Schedule};
    use ndarray::array;

    fn mlp_state(ds: &LabeledDataset<f64>, seed: u64) -> TrainState<f64> {
        let net = MlpClassifier::new(ds.dim(), &[16], ds.num_classes, seed).unwrap();
        TrainState::new(Model::Mlp(net), "t", seed)
    }

    #[test]
    fn accuracy_cases() {
        let net = MlpClassifier::<f64>::new(2, &[3], 3, 0).unwrap();
        let model = Model::Mlp(net);
        let x = array![[0.1, 0.2], [0.3, -0.4], [1.0, 1.0]];
        let pred = model.predict(x.view()).unwrap();
        assert_eq!(accuracy(&model, x.view(), &pred, None).unwrap(), 1.0);
        let all = vec![true; 3];
        let labels = vec![0, 1, 2];
        assert_eq!(
            accuracy(&model, x.view(), &labels, Some(&all)).unwrap(),
            accuracy(&model, x.view(), &labels, None).unwrap()
        );
        assert!(matches!(
            accuracy(&model, x.view(), &labels, Some(&[false; 3])),
            Err(Error::UndefinedMetric(_))
        ));
        assert!(accuracy(&model, x.view(), &labels, Some(&[true; 2])).is_err());
    }

    #[test]
    fn accuracy_matches_brute_force_count() {
        let pred = [0, 2, 1, 1, 0, 2, 2];
        let labels = [0, 1, 1, 2, 0, 2, 0];
        let mask = [true, true, false, true, true, false, true];
        let mut hit = 0;
        let mut tot = 0;
        for i in 0..7 {
            if mask[i] {
                tot += 1;
                if pred[i] == labels[i] {
                    hit += 1;
                }
            }
        }
        assert_eq!(accuracy_of(&pred, &labels, Some(&mask)).unwrap(), hit as f64 / tot as f64);
    }

    #[test]
    fn zero_learning_rate_leaves_weights_unchanged() {
        let ds = synth_sphere_dataset::<f64>(16, 4, 1).unwrap();
        let net = init_two_layer::<f64>(4, 32, 0.5, 2).unwrap();
        let mut state = TrainState::new(Model::TwoLayer(net.clone()), "z", 0);
        gd_step(&mut state, ds.inputs.view(), &ds.assigned_labels, &OptimizerConfig::full_batch(0.0, 1)).unwrap();
        assert_eq!(state.model, Model::TwoLayer(net));
        assert_eq!(state.step(), 1);
        assert_eq!(state.records().len(), 1);
    }

    #[test]
    fn small_step_reduces_single_sample_loss() {
        let x = array![[0.6, 0.8]];
        let net = init_two_layer::<f64>(2, 64, 0.5, 3).unwrap();
        let model = Model::TwoLayer(net);
        let before = model.loss(x.view(), &[1]).unwrap();
        let mut state = TrainState::new(model, "d", 0);
        gd_step(&mut state, x.view(), &[1], &OptimizerConfig::full_batch(1e-3, 1)).unwrap();
        assert!(state.model.loss(x.view(), &[1]).unwrap() < before);
    }

    #[test]
    fn output_signs_never_change() {
        let ds = synth_sphere_dataset::<f64>(16, 4, 1).unwrap();
        let net = init_two_layer::<f64>(4, 32, 0.5, 2).unwrap();
        let a0 = net.output_signs().clone();
        let mut state = TrainState::new(Model::TwoLayer(net), "a", 0);
        let cfg = OptimizerConfig { eta: 0.1, schedule: Schedule::None, momentum: 0.9, batch_size: 4, epochs: 5 };
        for _ in 0..5 {
            gd_step(&mut state, ds.inputs.view(), &ds.assigned_labels, &cfg).unwrap();
        }
        match &state.model {
            Model::TwoLayer(n) => assert_eq!(n.output_signs(), &a0),
            _ => unreachable!(),
        }
    }

    #[test]
    fn mlp_epochs_are_deterministic_and_learn_blobs() {
        let ds = synth_blobs::<f64>(400, 6, 4, 0.1, 5).unwrap();
        let ds = inject_noise(&ds, NoiseSpec::symmetric(0.0, 1)).unwrap();
        let cfg = OptimizerConfig { eta: 0.05, schedule: Schedule::None, momentum: 0.9, batch_size: 32, epochs: 5 };
        let run = || {
            let mut s = mlp_state(&ds, 9);
            for _ in 0..cfg.epochs {
                train_mlp_epoch(&mut s, &ds, &cfg).unwrap();
            }
            s
        };
        let (a, b) = (run(), run());
        let rows = |s: &TrainState<f64>| s.records().iter().map(CheckpointRecord::to_csv_row).collect::<Vec<_>>();
        assert_eq!(rows(&a), rows(&b));
        assert_eq!(a.model, b.model);
        let initial = Model::Mlp(MlpClassifier::new(6, &[16], 4, 9).unwrap()).loss(ds.inputs.view(), &ds.assigned_labels).unwrap();
        assert!(a.records().last().unwrap().train_loss < initial);
        assert_eq!(a.records().len(), 5);
        assert!(a.records()[4].train_acc_noisy.is_nan());
    }

    #[test]
    fn train_mlp_epoch_rejects_two_layer() {
        let ds = synth_sphere_dataset::<f64>(8, 3, 1).unwrap();
        let mut s = TrainState::new(Model::TwoLayer(init_two_layer(3, 4, 0.5, 1).unwrap()), "x", 0);
        assert!(train_mlp_epoch(&mut s, &ds, &OptimizerConfig::full_batch(0.1, 1)).is_err());
    }
}
