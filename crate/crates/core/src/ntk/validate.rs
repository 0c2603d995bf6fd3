//! Two-phase gradient descent on a finite-width network compared with the
//! closed-form prediction.

use serde::{Deserialize, Serialize};

use super::theory::theorem1_norm;
use super::{eigendecompose, gram_infinity};
use crate::data::{noisy_binary_label_vector, synth_sphere_dataset};
use crate::error::{invalid, Error, Result};
use crate::nn::{init_two_layer, TwoLayerReluNet};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum StepSize {
    Absolute(f64),
    /// `η = factor / λ_max` of the run's own Gram matrix.
    RelativeToLambdaMax(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateParams {
    pub n: usize,
    pub d: usize,
    pub m: usize,
    pub kappa: f64,
    pub eta: StepSize,
    pub k: usize,
    pub k_tilde_grid: Vec<usize>,
    pub lnl: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub k_tilde: usize,
    pub predicted: f64,
    pub actual: f64,
    pub relative_error: f64,
    /// `½‖f − ỹ‖²` of the trained network.
    pub phi_tilde: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub m: usize,
    pub lnl: f64,
    pub eta: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub rows: Vec<ValidationRow>,
}

impl ValidationReport {
    pub fn max_relative_error(&self) -> f64 {
        self.rows.iter().map(|r| r.relative_error).fold(0.0, f64::max)
    }
}

fn descend(net: &mut TwoLayerReluNet<f64>, x: ndarray::ArrayView2<f64>, labels: &[f64], eta: f64, steps: usize, limit: &mut Option<f64>) -> Result<()> {
    let mut scratch = ndarray::Array2::zeros((0, 0));
    for _ in 0..steps {
        let loss = net.descent_step(x, labels, eta, &mut scratch)?;
        let ceiling = *limit.get_or_insert(10.0 * loss);
        if !loss.is_finite() || loss > ceiling {
            return Err(Error::Numeric(format!(
                "gradient descent diverged (loss {loss:.3e} exceeds 10x its initial value); use a smaller eta"
            )));
        }
    }
    Ok(())
}

/// Runs `k` full-batch steps on noisy labels `y`, then continues on random
/// probe labels `ỹ` and compares `‖f − ỹ‖₂` at each `k̃` with the prediction.
///
/// Inputs, label noise, probe labels and initialization come from separate
/// streams of `seed`; the noise is nested across LNL values and the probe
/// labels do not depend on LNL.
pub fn validate_against_gd(params: &ValidateParams) -> Result<ValidationReport> {
    let ds = synth_sphere_dataset::<f64>(params.n, params.d, params.seed)?;
    let x = ds.inputs.view();
    let y = noisy_binary_label_vector(&ds, params.lnl, rng::derive_seed(params.seed, rng::labels::NOISE))?;
    let y_tilde = super::bounds::probe_signs(params.n, params.seed, 0);
    let spec = eigendecompose(gram_infinity(x)?.view())?;
    let eta = match params.eta {
        StepSize::Absolute(eta) => eta,
        StepSize::RelativeToLambdaMax(f) => f / spec.lambda_max(),
    };
    if !(eta > 0.0) {
        return Err(invalid(format!("step size must be positive, got {eta}")));
    }
    let mut grid = params.k_tilde_grid.clone();
    grid.sort_unstable();
    grid.dedup();
    // Fails early in the divergent regime.
    theorem1_norm(&spec, &y, &y_tilde, eta, params.k, 0)?;

    let mut net = init_two_layer::<f64>(params.d, params.m, params.kappa, params.seed)?;
    descend(&mut net, x, &y, eta, params.k, &mut None)?;
    let mut rows = Vec::with_capacity(grid.len());
    let mut done = 0;
    let mut limit = None;
    for &kt in &grid {
        descend(&mut net, x, &y_tilde, eta, kt - done, &mut limit)?;
        done = kt;
        let f = net.forward(x)?;
        let actual = f.iter().zip(&y_tilde).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let predicted = theorem1_norm(&spec, &y, &y_tilde, eta, params.k, kt)?;
        rows.push(ValidationRow {
            k_tilde: kt,
            predicted,
            actual,
            relative_error: (predicted - actual).abs() / actual,
            phi_tilde: 0.5 * actual * actual,
        });
    }
    Ok(ValidationReport {
        seed: params.seed,
        m: params.m,
        lnl: params.lnl,
        eta,
        lambda_min: spec.lambda_min(),
        lambda_max: spec.lambda_max(),
        rows,
    })
}
