use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::rng;
use crate::scalar::Scalar;

const UNIT_TOLERANCE: f64 = 1e-6;

/// Closed-form kernel entry `ρ (π − arccos ρ) / (2π)` for `ρ = xᵢ·xⱼ`, with ρ
/// clamped to `[−1, 1]`.
#[inline]
pub fn kernel_entry<T: Scalar>(inner: T) -> T {
    let rho = inner.max(-T::one()).min(T::one());
    rho * (T::PI() - rho.acos()) / (T::of(2.0) * T::PI())
}

/// Infinite-width Gram matrix of the two-layer ReLU network on unit-norm rows.
pub fn gram_infinity<T: Scalar>(x: ArrayView2<T>) -> Result<Array2<T>> {
    for (i, row) in x.rows().into_iter().enumerate() {
        let norm = row.dot(&row).sqrt();
        if (norm - T::one()).abs() > T::of(UNIT_TOLERANCE) {
            return Err(invalid(format!("row {i} has norm {norm}, expected unit norm")));
        }
    }
    let inner = x.dot(&x.t());
    let n = inner.nrows();
    let mut h = inner.mapv(kernel_entry);
    for i in 0..n {
        // The angle of a row with itself is exactly zero; arccos of the rounded
        // self inner product would be off by O(√ε).
        h[[i, i]] = inner[[i, i]] * T::of(0.5);
        // Symmetrize so later consumers may assume exact symmetry.
        for j in (i + 1)..n {
            let avg = (h[[i, j]] + h[[j, i]]) * T::of(0.5);
            h[[i, j]] = avg;
            h[[j, i]] = avg;
        }
    }
    if has_duplicate_rows(x) {
        log::warn!("duplicate input rows: the Gram matrix is singular");
    }
    Ok(h)
}

fn has_duplicate_rows<T: Scalar>(x: ArrayView2<T>) -> bool {
    let rows: Vec<_> = x.rows().into_iter().collect();
    rows.iter().enumerate().any(|(i, a)| rows[i + 1..].iter().any(|b| a == b))
}

/// Monte Carlo estimate of `E_w[xᵢ·xⱼ 1{w·xᵢ ≥ 0, w·xⱼ ≥ 0}]` with
/// `w ~ N(0, I)`; returns `(mean, standard error)`.
pub fn gram_entry_monte_carlo<T: Scalar>(xi: ArrayView1<T>, xj: ArrayView1<T>, samples: usize, seed: u64) -> (f64, f64) {
    let inner = xi.dot(&xj).to_f64_lossy();
    let a: Vec<f64> = xi.iter().map(|v| v.to_f64_lossy()).collect();
    let b: Vec<f64> = xj.iter().map(|v| v.to_f64_lossy()).collect();
    let mut r = rng::stream(seed, "gram-mc");
    let mut hits = 0usize;
    for _ in 0..samples {
        let (mut sa, mut sb) = (0.0, 0.0);
        for (&ak, &bk) in a.iter().zip(&b) {
            let w: f64 = r.sample(StandardNormal);
            sa += w * ak;
            sb += w * bk;
        }
        if sa >= 0.0 && sb >= 0.0 {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    let se = inner.abs() * (p * (1.0 - p) / samples as f64).sqrt();
    (inner * p, se)
}
