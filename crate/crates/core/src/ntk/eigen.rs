//! Cyclic Jacobi eigensolver for dense symmetric matrices.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition `H = Σ λᵢ vᵢ vᵢᵀ` with eigenvalues ascending
/// (λ₀ = λ_min first) and orthonormal eigenvectors in the columns of
/// `eigenvectors`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramSpectrum<T> {
    pub eigenvalues: Array1<T>,
    pub eigenvectors: Array2<T>,
    pub sweeps: usize,
}

impl<T: Scalar> GramSpectrum<T> {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn lambda_min(&self) -> T {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> T {
        self.eigenvalues[self.len() - 1]
    }

    pub fn eigenvector(&self, i: usize) -> ArrayView1<'_, T> {
        self.eigenvectors.column(i)
    }

    /// `V Λ Vᵀ`.
    pub fn reconstruct(&self) -> Array2<T> {
        let scaled = &self.eigenvectors * &self.eigenvalues;
        scaled.dot(&self.eigenvectors.t())
    }
}

fn frobenius<T: Scalar>(a: &[T]) -> T {
    a.iter().map(|&v| v * v).sum::<T>().sqrt()
}

fn off_diagonal<T: Scalar>(a: &[T], n: usize) -> T {
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j] * a[i * n + j];
            }
        }
    }
    s.sqrt()
}

/// Full spectrum of a symmetric matrix by cyclic Jacobi rotations.
///
/// Sweeps visit `(p, q)` pairs in row order and stop once the off-diagonal
/// Frobenius mass falls below `1e-12 · ‖H‖_F`. Each eigenvector is signed so
/// that its first non-negligible component is positive.
pub fn eigendecompose<T: Scalar>(h: ArrayView2<T>) -> Result<GramSpectrum<T>> {
    let n = h.nrows();
    if n == 0 || h.ncols() != n {
        return Err(invalid(format!("expected a non-empty square matrix, got {:?}", h.dim())));
    }
    let scale = h.iter().fold(T::zero(), |m, &v| m.max(v.abs())).max(T::min_positive_value());
    for i in 0..n {
        for j in (i + 1)..n {
            if (h[[i, j]] - h[[j, i]]).abs() > T::of(1e-10) * scale {
                return Err(invalid(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    // Work on the symmetrized copy; `vt` holds eigenvectors as rows.
    let mut a: Vec<T> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            a.push((h[[i, j]] + h[[j, i]]) * T::of(0.5));
        }
    }
    let mut vt = vec![T::zero(); n * n];
    for i in 0..n {
        vt[i * n + i] = T::one();
    }
    let target = T::of(1e-12) * frobenius(&a);
    let mut sweeps = 0;
    while off_diagonal(&a, n) > target {
        if sweeps == MAX_SWEEPS {
            return Err(Error::Numeric(format!(
                "Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal mass {})",
                off_diagonal(&a, n)
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut vt, n, p, q);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].partial_cmp(&a[j * n + j]).unwrap_or(std::cmp::Ordering::Equal));
    let eigenvalues: Array1<T> = order.iter().map(|&i| a[i * n + i]).collect();
    let mut eigenvectors = Array2::zeros((n, n));
    for (col, &i) in order.iter().enumerate() {
        let v = &vt[i * n..(i + 1) * n];
        let peak = v.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
        let sign = v
            .iter()
            .find(|x| x.abs() > T::of(1e-8) * peak)
            .map_or(T::one(), |&x| if x < T::zero() { -T::one() } else { T::one() });
        for (k, &x) in v.iter().enumerate() {
            eigenvectors[[k, col]] = sign * x;
        }
    }
    Ok(GramSpectrum { eigenvalues, eigenvectors, sweeps })
}

/// Annihilates `a[p][q]` with a plane rotation and accumulates it into `vt`.
fn rotate<T: Scalar>(a: &mut [T], vt: &mut [T], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    if apq == T::zero() {
        return;
    }
    let app = a[p * n + p];
    let aqq = a[q * n + q];
    let theta = (aqq - app) / (T::of(2.0) * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        let new_kp = c * akp - s * akq;
        let new_kq = s * akp + c * akq;
        a[k * n + p] = new_kp;
        a[p * n + k] = new_kp;
        a[k * n + q] = new_kq;
        a[q * n + k] = new_kq;
    }
    a[p * n + p] = app - t * apq;
    a[q * n + q] = aqq + t * apq;
    a[p * n + q] = T::zero();
    a[q * n + p] = T::zero();
    let (head, tail) = vt.split_at_mut(q * n);
    let vp = &mut head[p * n..(p + 1) * n];
    let vq = &mut tail[..n];
    for (x, y) in vp.iter_mut().zip(vq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}
