//! Monte Carlo evaluation of the Chebyshev band on the probe loss.

use std::io::Write;

use ndarray::Array1;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::theory::{base_term, mu, phi_tilde_approx, projections};
use super::GramSpectrum;
use crate::data::corrupt_signs;
use crate::error::{invalid, Result};
use crate::record::fmt_f64;
use crate::rng;

pub const BOUND_CSV_HEADER: &str = "lnl,k_tilde,mu_half,sigma,lower,upper,base";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub eta: f64,
    pub k: usize,
    pub k_tilde_grid: Vec<usize>,
    pub delta: f64,
    pub lnl_grid: Vec<f64>,
    pub draws: usize,
    pub seed: u64,
}

impl BoundParams {
    pub fn validate(&self, spec: &GramSpectrum<f64>) -> Result<()> {
        if self.draws < 2 {
            return Err(invalid(format!("need at least 2 draws to estimate a variance, got {}", self.draws)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if self.lnl_grid.is_empty() || self.k_tilde_grid.is_empty() {
            return Err(invalid("LNL and k-tilde grids must be non-empty"));
        }
        if let Some(l) = self.lnl_grid.iter().find(|l| !(0.0..=1.0).contains(*l)) {
            return Err(invalid(format!("LNL values must lie in [0, 1], got {l}")));
        }
        if !(self.eta > 0.0) || self.eta * spec.lambda_max() >= 1.0 {
            return Err(invalid(format!(
                "need 0 < eta * lambda_max < 1, got eta = {} with lambda_max = {}",
                self.eta,
                spec.lambda_max()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundPoint {
    pub lnl: f64,
    pub k_tilde: usize,
    pub mu_half: f64,
    pub sigma: f64,
    pub lower: f64,
    pub upper: f64,
    pub base: f64,
}

/// Band points in LNL-major order over the parameter grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub points: Vec<BoundPoint>,
    pub k_tilde_count: usize,
}

impl BoundCurve {
    pub fn at(&self, lnl_index: usize, k_tilde_index: usize) -> &BoundPoint {
        &self.points[lnl_index * self.k_tilde_count + k_tilde_index]
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{BOUND_CSV_HEADER}")?;
        for p in &self.points {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                fmt_f64(p.lnl),
                p.k_tilde,
                fmt_f64(p.mu_half),
                fmt_f64(p.sigma),
                fmt_f64(p.lower),
                fmt_f64(p.upper),
                fmt_f64(p.base)
            )?;
        }
        Ok(())
    }
}

/// Uniform ±1 probe labels for draw `j`.
pub(crate) fn probe_signs(n: usize, seed: u64, j: usize) -> Vec<f64> {
    let mut r = rng::stream(seed, &format!("bound-probe-{j}"));
    (0..n).map(|_| if r.gen::<bool>() { 1.0 } else { -1.0 }).collect()
}

fn noise_seed(seed: u64, j: usize) -> u64 {
    rng::derive_seed(seed, &format!("bound-noise-{j}"))
}

/// Projections of the noisy and probe label vectors for each draw.
fn draw_projections(
    spec: &GramSpectrum<f64>,
    truth: &[f64],
    lnl: f64,
    draws: usize,
    seed: u64,
) -> Result<Vec<(Array1<f64>, Array1<f64>)>> {
    (0..draws)
        .map(|j| {
            let y = corrupt_signs(truth, lnl, noise_seed(seed, j))?;
            let yt = probe_signs(truth.len(), seed, j);
            Ok((projections(spec, &y)?, projections(spec, &yt)?))
        })
        .collect()
}

fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
}

/// Chebyshev band `μ/2 ∓ √(Σ/δ)` around the label-dependent part of the
/// expected probe loss, for every `(LNL, k̃)` grid point.
///
/// `truth` holds the clean ±1 labels. `E[pᵢ²]` and `Σ` are estimated from the
/// same `draws` joint draws of `(y, ỹ)`; draw `j` is shared across the grid so
/// that neighbouring grid points differ only through their parameters.
pub fn bound_curves(spec: &GramSpectrum<f64>, truth: &[f64], params: &BoundParams) -> Result<BoundCurve> {
    params.validate(spec)?;
    let mut points = Vec::with_capacity(params.lnl_grid.len() * params.k_tilde_grid.len());
    for &lnl in &params.lnl_grid {
        let proj = draw_projections(spec, truth, lnl, params.draws, params.seed)?;
        let mut e_p2 = Array1::<f64>::zeros(spec.len());
        for (p, _) in &proj {
            e_p2 += &p.mapv(|v| v * v);
        }
        e_p2 /= params.draws as f64;
        for &kt in &params.k_tilde_grid {
            let mu_half = 0.5 * mu(spec, e_p2.view(), params.eta, params.k, kt)?;
            let values = proj
                .iter()
                .map(|(p, pt)| phi_tilde_approx(spec, p.view(), pt.view(), params.eta, params.k, kt))
                .collect::<Result<Vec<_>>>()?;
            let sigma = sample_variance(&values);
            let half_width = (sigma / params.delta).sqrt();
            points.push(BoundPoint {
                lnl,
                k_tilde: kt,
                mu_half,
                sigma,
                lower: mu_half - half_width,
                upper: mu_half + half_width,
                base: base_term(spec, params.eta, kt)?,
            });
        }
    }
    Ok(BoundCurve { points, k_tilde_count: params.k_tilde_grid.len() })
}

/// Fraction of `fresh_draws` new `(y, ỹ)` draws whose approximate probe loss
/// lies in `[base + lower, base + upper]` for a single grid point.
pub fn chebyshev_coverage(
    spec: &GramSpectrum<f64>,
    truth: &[f64],
    params: &BoundParams,
    fresh_draws: usize,
    fresh_seed: u64,
) -> Result<f64> {
    if params.lnl_grid.len() != 1 || params.k_tilde_grid.len() != 1 {
        return Err(invalid("coverage is evaluated at a single (LNL, k-tilde) point"));
    }
    if fresh_draws == 0 {
        return Err(invalid("need at least one fresh draw"));
    }
    let point = bound_curves(spec, truth, params)?.points[0];
    let (lo, hi) = (point.base + point.lower, point.base + point.upper);
    let proj = draw_projections(spec, truth, point.lnl, fresh_draws, fresh_seed)?;
    let mut inside = 0usize;
    for (p, pt) in &proj {
        let v = phi_tilde_approx(spec, p.view(), pt.view(), params.eta, params.k, point.k_tilde)?;
        if (lo..=hi).contains(&v) {
            inside += 1;
        }
    }
    Ok(inside as f64 / fresh_draws as f64)
}
