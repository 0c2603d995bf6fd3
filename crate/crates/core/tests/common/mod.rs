//! Oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use ndarray::{Array1, Array2};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use resistlab::nn::{init_two_layer, MlpClassifier, TwoLayerReluNet};
use resistlab::rng;

pub const FD_STEP: f64 = 1e-5;
pub const FD_REL_TOL: f64 = 1e-6;
pub const KINK_MARGIN: f64 = 1e-8;

#[derive(Debug, Default)]
pub struct FdSummary {
    pub checked: usize,
    pub skipped: usize,
    pub worst_relative: f64,
    /// Largest error as a fraction of its allowance; the check passes at ≤ 1.
    pub worst_ratio: f64,
    /// `(finite difference, analytic)` at the coordinate with the worst ratio.
    pub worst_pair: (f64, f64),
}

impl FdSummary {
    /// Allowance is `FD_REL_TOL` relative plus the rounding floor of the
    /// central difference itself, which dominates for tiny coordinates.
    fn record(&mut self, fd: f64, analytic: f64, loss_up: f64, loss_down: f64) {
        self.checked += 1;
        let floor = 16.0 * f64::EPSILON * (loss_up.abs() + loss_down.abs()) / (2.0 * FD_STEP);
        let allowed = FD_REL_TOL * fd.abs().max(analytic.abs()) + floor;
        let ratio = (fd - analytic).abs() / allowed;
        self.worst_relative = self.worst_relative.max(relative(fd, analytic));
        if ratio > self.worst_ratio {
            self.worst_ratio = ratio;
            self.worst_pair = (fd, analytic);
        }
    }

    pub fn passes(&self) -> bool {
        self.checked > 0 && self.worst_ratio <= 1.0
    }
}

fn relative(fd: f64, analytic: f64) -> f64 {
    let scale = fd.abs().max(analytic.abs());
    if scale == 0.0 {
        0.0
    } else {
        (fd - analytic).abs() / scale
    }
}

fn gaussian_matrix(rows: usize, cols: usize, seed: u64, label: &str) -> Array2<f64> {
    let mut r = rng::stream(seed, label);
    Array2::from_shape_simple_fn((rows, cols), || r.sample(StandardNormal))
}

/// Squared loss evaluated by explicit loops.
fn two_layer_loss(w: &Array2<f64>, a: &Array1<f64>, x: &Array2<f64>, y: &[f64]) -> f64 {
    let m = w.ncols();
    let mut loss = 0.0;
    for i in 0..x.nrows() {
        let mut f = 0.0;
        for r in 0..m {
            let z: f64 = (0..x.ncols()).map(|j| w[[j, r]] * x[[i, j]]).sum();
            f += a[r] * z.max(0.0);
        }
        f /= (m as f64).sqrt();
        loss += 0.5 * (f - y[i]) * (f - y[i]);
    }
    loss
}

/// Central differences on `coords` sampled weight coordinates of a random
/// two-layer network, skipping coordinates whose perturbation moves a unit
/// across (or to within the margin of) its ReLU kink.
pub fn fd_two_layer(seed: u64, coords: usize) -> FdSummary {
    let (n, d, m) = (20, 6, 50);
    let x = gaussian_matrix(n, d, seed, "fd-x");
    let mut r = rng::stream(seed, "fd-y");
    let y: Vec<f64> = (0..n).map(|_| if r.gen::<bool>() { 1.0 } else { -1.0 }).collect();
    let net: TwoLayerReluNet<f64> = init_two_layer(d, m, 1.0, seed).unwrap();
    let grad = net.grad(x.view(), &y).unwrap();
    let a = net.output_signs().clone();
    let mut summary = FdSummary::default();
    let mut pick = rng::stream(seed, "fd-coords");
    for flat in sample(&mut pick, d * m, coords) {
        let (j, col) = (flat / m, flat % m);
        let z_at = |w: &Array2<f64>| -> Vec<f64> { (0..n).map(|i| (0..d).map(|k| w[[k, col]] * x[[i, k]]).sum()).collect() };
        let mut up = net.w.clone();
        up[[j, col]] += FD_STEP;
        let mut down = net.w.clone();
        down[[j, col]] -= FD_STEP;
        let (z0, zu, zd) = (z_at(&net.w), z_at(&up), z_at(&down));
        let near_kink = (0..n).any(|i| z0[i].abs() < KINK_MARGIN || (zu[i] >= 0.0) != (zd[i] >= 0.0));
        if near_kink {
            summary.skipped += 1;
            continue;
        }
        let (lu, ld) = (two_layer_loss(&up, &a, &x, &y), two_layer_loss(&down, &a, &x, &y));
        summary.record((lu - ld) / (2.0 * FD_STEP), grad[[j, col]], lu, ld);
    }
    summary
}

/// Hidden pre-activations of every layer, by direct evaluation.
fn mlp_preactivations(net: &MlpClassifier<f64>, x: &Array2<f64>) -> Vec<Array2<f64>> {
    let mut out = Vec::new();
    let mut h = x.clone();
    for layer in &net.layers[..net.layers.len() - 1] {
        let z = h.dot(&layer.weights) + &layer.bias;
        h = z.mapv(|v| v.max(0.0));
        out.push(z);
    }
    out
}

/// Mean cross-entropy with a naive log-sum-exp.
fn mlp_loss(net: &MlpClassifier<f64>, x: &Array2<f64>, labels: &[usize]) -> f64 {
    let mut h = x.clone();
    let last = net.layers.len() - 1;
    for (i, layer) in net.layers.iter().enumerate() {
        h = h.dot(&layer.weights) + &layer.bias;
        if i < last {
            h.mapv_inplace(|v| v.max(0.0));
        }
    }
    let mut total = 0.0;
    for (row, &y) in h.rows().into_iter().zip(labels) {
        let peak = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = peak + row.iter().map(|v| (v - peak).exp()).sum::<f64>().ln();
        total += lse - row[y];
    }
    total / labels.len() as f64
}

/// Central differences on sampled MLP parameters (weights and biases of all
/// layers), skipping any coordinate whose ±h perturbation changes a ReLU
/// pattern anywhere in the network.
pub fn fd_mlp(seed: u64, coords: usize) -> FdSummary {
    let (n, d, c) = (16, 5, 3);
    let x = gaussian_matrix(n, d, seed, "fd-x");
    let labels: Vec<usize> = (0..n).map(|i| i % c).collect();
    let net = MlpClassifier::<f64>::new(d, &[8, 8], c, seed).unwrap();
    let (_, grads) = net.loss_and_grad(x.view(), &labels).unwrap();
    // Flat index over (layer, is_bias, row, col).
    let mut slots = Vec::new();
    for (l, layer) in net.layers.iter().enumerate() {
        for i in 0..layer.weights.nrows() {
            for j in 0..layer.weights.ncols() {
                slots.push((l, false, i, j));
            }
        }
        for j in 0..layer.bias.len() {
            slots.push((l, true, 0, j));
        }
    }
    let perturbed = |slot: (usize, bool, usize, usize), delta: f64| {
        let mut p = net.clone();
        let (l, is_bias, i, j) = slot;
        if is_bias {
            p.layers[l].bias[j] += delta;
        } else {
            p.layers[l].weights[[i, j]] += delta;
        }
        p
    };
    let base = mlp_preactivations(&net, &x);
    // A coordinate sits at a kink when ±h flips any ReLU, or when it moves a
    // pre-activation that is already within the margin of zero.
    let near_kink = |up: &MlpClassifier<f64>, down: &MlpClassifier<f64>| -> bool {
        let (zu, zd) = (mlp_preactivations(up, &x), mlp_preactivations(down, &x));
        base.iter().zip(zu.iter().zip(&zd)).any(|(z0, (a, b))| {
            z0.iter().zip(a.iter().zip(b)).any(|(&v0, (&va, &vb))| {
                (va >= 0.0) != (vb >= 0.0) || (v0.abs() < KINK_MARGIN && (va != v0 || vb != v0))
            })
        })
    };
    let mut summary = FdSummary::default();
    let mut pick = rng::stream(seed, "fd-coords");
    for idx in sample(&mut pick, slots.len(), coords.min(slots.len())) {
        let slot = slots[idx];
        let (up, down) = (perturbed(slot, FD_STEP), perturbed(slot, -FD_STEP));
        if near_kink(&up, &down) {
            summary.skipped += 1;
            continue;
        }
        let (lu, ld) = (mlp_loss(&up, &x, &labels), mlp_loss(&down, &x, &labels));
        let (l, is_bias, i, j) = slot;
        let analytic = if is_bias { grads[l].bias[j] } else { grads[l].weights[[i, j]] };
        summary.record((lu - ld) / (2.0 * FD_STEP), analytic, lu, ld);
    }
    summary
}
