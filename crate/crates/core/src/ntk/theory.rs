//! Closed-form predictions for two-phase gradient descent in the
//! infinite-width limit.

use ndarray::{Array1, ArrayView1};

use super::GramSpectrum;
use crate::error::{invalid, shape, Result};
use crate::scalar::Scalar;

/// `q^e` for large integer exponents.
pub(crate) fn power<T: Scalar>(q: T, e: usize) -> T {
    match i32::try_from(e) {
        Ok(e) => q.powi(e),
        Err(_) => q.powf(T::of_usize(e)),
    }
}

/// Per-direction contraction factors `1 − ηλᵢ`, rejecting the divergent
/// regime `η·λ_max ≥ 1`.
pub fn decay_factors<T: Scalar>(spec: &GramSpectrum<T>, eta: T) -> Result<Array1<T>> {
    if !(eta >= T::zero()) || !eta.is_finite() {
        return Err(invalid(format!("step size must be finite and non-negative, got {eta}")));
    }
    let top = eta * spec.lambda_max();
    if top >= T::one() {
        return Err(invalid(format!(
            "eta * lambda_max = {top} >= 1: gradient descent diverges, choose eta < {}",
            T::one() / spec.lambda_max()
        )));
    }
    Ok(spec.eigenvalues.mapv(|l| T::one() - eta * l))
}

/// Projections `pᵢ = vᵢᵀy` onto the eigenvectors.
pub fn projections<T: Scalar>(spec: &GramSpectrum<T>, y: &[T]) -> Result<Array1<T>> {
    if y.len() != spec.len() {
        return Err(shape(format!("label vector has length {}, spectrum has {}", y.len(), spec.len())));
    }
    Ok(spec.eigenvectors.t().dot(&ArrayView1::from(y)))
}

/// `½ Σ [pᵢ − p̃ᵢ − (1−ηλᵢ)^k pᵢ]² (1−ηλᵢ)^{2k̃}`: the approximate probe loss
/// after `k` steps on `y` followed by `k̃` steps on `ỹ`.
pub fn phi_tilde_approx<T: Scalar>(
    spec: &GramSpectrum<T>,
    p: ArrayView1<T>,
    p_tilde: ArrayView1<T>,
    eta: T,
    k: usize,
    k_tilde: usize,
) -> Result<T> {
    let q = decay_factors(spec, eta)?;
    if p.len() != q.len() || p_tilde.len() != q.len() {
        return Err(shape(format!(
            "projection lengths {} and {} do not match spectrum size {}",
            p.len(),
            p_tilde.len(),
            q.len()
        )));
    }
    let half = T::of(0.5);
    Ok(half
        * q.iter()
            .zip(p.iter().zip(p_tilde))
            .map(|(&qi, (&pi, &pti))| {
                let r = pi - pti - power(qi, k) * pi;
                r * r * power(qi, 2 * k_tilde)
            })
            .sum::<T>())
}

/// Main term of the probe residual norm `‖f(k+k̃) − ỹ‖₂`, without the ±ε
/// finite-width slack.
pub fn theorem1_norm<T: Scalar>(
    spec: &GramSpectrum<T>,
    y: &[T],
    y_tilde: &[T],
    eta: T,
    k: usize,
    k_tilde: usize,
) -> Result<T> {
    let p = projections(spec, y)?;
    let pt = projections(spec, y_tilde)?;
    let phi = phi_tilde_approx(spec, p.view(), pt.view(), eta, k, k_tilde)?;
    Ok((T::of(2.0) * phi).sqrt())
}

/// `μ = Σ E[pᵢ²] [1 − (1−ηλᵢ)^k]² (1−ηλᵢ)^{2k̃}`.
pub fn mu<T: Scalar>(spec: &GramSpectrum<T>, e_p2: ArrayView1<T>, eta: T, k: usize, k_tilde: usize) -> Result<T> {
    let q = decay_factors(spec, eta)?;
    if e_p2.len() != q.len() {
        return Err(shape(format!("E[p^2] has length {}, spectrum has {}", e_p2.len(), q.len())));
    }
    if let Some(i) = e_p2.iter().position(|&v| !(v >= T::zero())) {
        return Err(invalid(format!("E[p^2] must be non-negative, entry {i} is {}", e_p2[i])));
    }
    Ok(q.iter()
        .zip(e_p2)
        .map(|(&qi, &e)| {
            let g = T::one() - power(qi, k);
            e * g * g * power(qi, 2 * k_tilde)
        })
        .sum())
}

/// Label-independent part `½ Σ (1−ηλᵢ)^{2k̃}` of the expected probe loss.
pub fn base_term<T: Scalar>(spec: &GramSpectrum<T>, eta: T, k_tilde: usize) -> Result<T> {
    let q = decay_factors(spec, eta)?;
    Ok(T::of(0.5) * q.iter().map(|&qi| power(qi, 2 * k_tilde)).sum::<T>())
}
