use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, ArrayView2, Zip};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, shape, Result};
use crate::rng;
use crate::scalar::Scalar;

/// `f_W(x) = (1/√m) Σᵣ aᵣ · relu(wᵣ·x)`.
///
/// The first layer `W` (d × m, one column per hidden unit) is trained; the
/// output signs `a` are drawn once and stay frozen.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLayerReluNet<T> {
    pub w: Array2<T>,
    a: Array1<T>,
    kappa: T,
}

/// `W` entries i.i.d. N(0, κ²), `a` entries uniform ±1.
pub fn init_two_layer<T: Scalar>(d: usize, m: usize, kappa: f64, seed: u64) -> Result<TwoLayerReluNet<T>> {
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(invalid(format!("init scale must lie in (0, 1], got {kappa}")));
    }
    if m == 0 || d == 0 {
        return Err(invalid(format!("need d >= 1 and m >= 1, got d={d}, m={m}")));
    }
    let mut r = rng::stream(seed, rng::labels::INIT);
    let k = T::of(kappa);
    let w = Array2::from_shape_simple_fn((d, m), || T::of(r.sample::<f64, _>(StandardNormal)) * k);
    let a = (0..m).map(|_| if r.gen::<bool>() { T::one() } else { -T::one() }).collect();
    Ok(TwoLayerReluNet { w, a, kappa: k })
}

impl<T: Scalar> TwoLayerReluNet<T> {
    /// Builds a network from explicit weights; `a` must be a ±1 vector.
    pub fn from_parts(w: Array2<T>, a: Array1<T>, kappa: T) -> Result<Self> {
        if w.ncols() != a.len() {
            return Err(shape(format!("W has {} columns but a has {} entries", w.ncols(), a.len())));
        }
        if a.iter().any(|&v| v != T::one() && v != -T::one()) {
            return Err(invalid("output weights must be ±1"));
        }
        Ok(Self { w, a, kappa })
    }

    pub fn input_dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn width(&self) -> usize {
        self.w.ncols()
    }

    pub fn output_signs(&self) -> &Array1<T> {
        &self.a
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    fn check_input(&self, x: ArrayView2<T>) -> Result<()> {
        if x.ncols() != self.input_dim() {
            return Err(shape(format!("input has {} columns, network expects {}", x.ncols(), self.input_dim())));
        }
        Ok(())
    }

    fn inv_sqrt_m(&self) -> T {
        T::one() / T::of_usize(self.width()).sqrt()
    }

    pub fn forward(&self, x: ArrayView2<T>) -> Result<Array1<T>> {
        self.check_input(x)?;
        let mut z = x.dot(&self.w);
        z.mapv_inplace(|v| v.max(T::zero()));
        Ok(z.dot(&self.a) * self.inv_sqrt_m())
    }

    /// Squared loss, its gradient with respect to `W`, and the predictions.
    ///
    /// `∂Φ/∂wᵣ = (1/√m) aᵣ Σᵢ (f(xᵢ) − yᵢ) 1{wᵣ·xᵢ ≥ 0} xᵢ`
    pub fn loss_and_grad(&self, x: ArrayView2<T>, labels: &[T]) -> Result<(T, Array2<T>, Array1<T>)> {
        self.check_input(x)?;
        if x.nrows() != labels.len() {
            return Err(shape(format!("{} inputs vs {} labels", x.nrows(), labels.len())));
        }
        let scale = self.inv_sqrt_m();
        let mut z = x.dot(&self.w);
        let pred = z.mapv(|v| v.max(T::zero())).dot(&self.a) * scale;
        let resid: Array1<T> = pred.iter().zip(labels).map(|(&p, &y)| p - y).collect();
        // Reuse the pre-activation buffer for 1{z ≥ 0} · rᵢ · aᵣ / √m.
        Zip::from(z.rows_mut()).and(&resid).for_each(|mut row, &ri| {
            Zip::from(&mut row).and(&self.a).for_each(|zv, &ar| {
                *zv = if *zv >= T::zero() { ri * ar * scale } else { T::zero() };
            });
        });
        let grad = x.t().dot(&z);
        let loss = resid.iter().map(|&r| r * r).sum::<T>() * T::of(0.5);
        Ok((loss, grad, pred))
    }

    pub fn grad(&self, x: ArrayView2<T>, labels: &[T]) -> Result<Array2<T>> {
        Ok(self.loss_and_grad(x, labels)?.1)
    }

    /// `W ← W − lr · grad`.
    pub fn apply_gradient(&mut self, grad: &Array2<T>, lr: T) {
        self.w.scaled_add(-lr, grad);
    }

    /// One full-batch gradient step in place; returns the loss before the step.
    ///
    /// Same arithmetic as [`loss_and_grad`](Self::loss_and_grad) followed by
    /// [`apply_gradient`](Self::apply_gradient), but `scratch` (resized to
    /// n × m as needed) is the only buffer of network size, which matters
    /// for long runs at large width.
    pub fn descent_step(&mut self, x: ArrayView2<T>, labels: &[T], lr: T, scratch: &mut Array2<T>) -> Result<T> {
        self.check_input(x)?;
        if x.nrows() != labels.len() {
            return Err(shape(format!("{} inputs vs {} labels", x.nrows(), labels.len())));
        }
        if scratch.dim() != (x.nrows(), self.width()) {
            *scratch = Array2::zeros((x.nrows(), self.width()));
        }
        let scale = self.inv_sqrt_m();
        general_mat_mul(T::one(), &x, &self.w, T::zero(), scratch);
        let mut loss = T::zero();
        Zip::from(scratch.rows_mut()).and(labels).for_each(|mut row, &y| {
            let f = row.iter().zip(&self.a).map(|(&z, &a)| a * z.max(T::zero())).sum::<T>() * scale;
            let ri = f - y;
            loss += ri * ri;
            Zip::from(&mut row).and(&self.a).for_each(|zv, &ar| {
                *zv = if *zv >= T::zero() { ri * ar * scale } else { T::zero() };
            });
        });
        general_mat_mul(-lr, &x.t(), &*scratch, T::one(), &mut self.w);
        Ok(loss * T::of(0.5))
    }
}

/// Free-function forms matching the operation names used across the crate.
pub fn forward_two_layer<T: Scalar>(net: &TwoLayerReluNet<T>, x: ArrayView2<T>) -> Result<Array1<T>> {
    net.forward(x)
}

pub fn grad_two_layer<T: Scalar>(net: &TwoLayerReluNet<T>, x: ArrayView2<T>, labels: &[T]) -> Result<Array2<T>> {
    net.grad(x, labels)
}
