use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand_distr::{Distribution, Normal};

use super::loss::{cross_entropy, cross_entropy_with_grad};
use crate::error::{invalid, shape, Result};
use crate::rng;
use crate::scalar::Scalar;

/// One affine layer; `weights` is (fan_in × fan_out).
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<T> {
    pub weights: Array2<T>,
    pub bias: Array1<T>,
}

impl<T: Scalar> Dense<T> {
    fn zeros_like(&self) -> Self {
        Self { weights: Array2::zeros(self.weights.raw_dim()), bias: Array1::zeros(self.bias.len()) }
    }
}

/// Fully connected ReLU network with a linear `c`-way head.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpClassifier<T> {
    pub layers: Vec<Dense<T>>,
}

/// Gradient of an [`MlpClassifier`], laid out like its layers.
pub type MlpGradient<T> = Vec<Dense<T>>;

impl<T: Scalar> MlpClassifier<T> {
    /// He-scaled Gaussian weights, zero biases.
    pub fn new(input_dim: usize, hidden_sizes: &[usize], num_classes: usize, seed: u64) -> Result<Self> {
        if input_dim == 0 || num_classes < 2 || hidden_sizes.contains(&0) {
            return Err(invalid(format!(
                "invalid MLP shape: d={input_dim}, hidden={hidden_sizes:?}, c={num_classes}"
            )));
        }
        let mut r = rng::stream(seed, rng::labels::INIT);
        let sizes: Vec<usize> = std::iter::once(input_dim)
            .chain(hidden_sizes.iter().copied())
            .chain(std::iter::once(num_classes))
            .collect();
        let layers = sizes
            .windows(2)
            .map(|w| {
                let normal = Normal::new(0.0, (2.0 / w[0] as f64).sqrt()).expect("positive std");
                Dense {
                    weights: Array2::from_shape_simple_fn((w[0], w[1]), || T::of(normal.sample(&mut r))),
                    bias: Array1::zeros(w[1]),
                }
            })
            .collect();
        Ok(Self { layers })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weights.nrows()
    }

    pub fn num_classes(&self) -> usize {
        self.layers.last().expect("at least one layer").weights.ncols()
    }

    pub fn hidden_sizes(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1].iter().map(|l| l.weights.ncols()).collect()
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    fn check_input(&self, x: ArrayView2<T>) -> Result<()> {
        if x.ncols() != self.input_dim() {
            return Err(shape(format!("input has {} columns, network expects {}", x.ncols(), self.input_dim())));
        }
        Ok(())
    }

    pub fn logits(&self, x: ArrayView2<T>) -> Result<Array2<T>> {
        self.check_input(x)?;
        let last = self.layers.len() - 1;
        let mut h = x.to_owned();
        for (i, layer) in self.layers.iter().enumerate() {
            h = h.dot(&layer.weights) + &layer.bias;
            if i < last {
                h.mapv_inplace(|v| v.max(T::zero()));
            }
        }
        Ok(h)
    }

    pub fn loss(&self, x: ArrayView2<T>, labels: &[usize]) -> Result<T> {
        cross_entropy(self.logits(x)?.view(), labels)
    }

    /// Mean cross-entropy and its gradient by backpropagation.
    pub fn loss_and_grad(&self, x: ArrayView2<T>, labels: &[usize]) -> Result<(T, MlpGradient<T>)> {
        self.check_input(x)?;
        let last = self.layers.len() - 1;
        // activations[i] is the input of layer i; active[i] marks z ≥ 0 of hidden layer i.
        let mut activations = Vec::with_capacity(self.layers.len());
        let mut active = Vec::with_capacity(last);
        let mut h = x.to_owned();
        for (i, layer) in self.layers.iter().enumerate() {
            let z = h.dot(&layer.weights) + &layer.bias;
            activations.push(h);
            h = if i < last {
                active.push(z.mapv(|v| v >= T::zero()));
                z.mapv(|v| v.max(T::zero()))
            } else {
                z
            };
        }
        let (loss, mut delta) = cross_entropy_with_grad(h.view(), labels)?;
        let mut grads: MlpGradient<T> = self.layers.iter().map(Dense::zeros_like).collect();
        for i in (0..self.layers.len()).rev() {
            let input = &activations[i];
            grads[i].weights = input.t().dot(&delta);
            grads[i].bias = delta.sum_axis(Axis(0));
            if i > 0 {
                let mut back = delta.dot(&self.layers[i].weights.t());
                ndarray::Zip::from(&mut back).and(&active[i - 1]).for_each(|b, &on| {
                    if !on {
                        *b = T::zero();
                    }
                });
                delta = back;
            }
        }
        Ok((loss, grads))
    }

    /// Class predictions; ties go to the lowest class index.
    pub fn predict(&self, x: ArrayView2<T>) -> Result<Vec<usize>> {
        Ok(argmax_rows(self.logits(x)?.view()))
    }
}

pub(crate) fn argmax_rows<T: Scalar>(scores: ArrayView2<T>) -> Vec<usize> {
    scores
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (k, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = k;
                }
            }
            best
        })
        .collect()
}
