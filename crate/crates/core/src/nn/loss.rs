use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{shape, Result};
use crate::scalar::Scalar;

/// `½ Σ (predᵢ − labelᵢ)²`.
pub fn squared_loss<T: Scalar>(pred: &[T], labels: &[T]) -> Result<T> {
    if pred.len() != labels.len() {
        return Err(shape(format!("{} predictions vs {} labels", pred.len(), labels.len())));
    }
    let half = T::of(0.5);
    Ok(pred.iter().zip(labels).map(|(&p, &y)| (p - y) * (p - y)).sum::<T>() * half)
}

fn log_softmax_row<T: Scalar>(row: ArrayView1<'_, T>) -> impl Iterator<Item = T> + '_ {
    let max = row.iter().copied().fold(T::neg_infinity(), T::max);
    let lse = max + row.iter().map(|&v| (v - max).exp()).sum::<T>().ln();
    row.into_iter().map(move |&v| v - lse)
}

/// Mean softmax cross-entropy over the rows of `logits`.
pub fn cross_entropy<T: Scalar>(logits: ArrayView2<T>, labels: &[usize]) -> Result<T> {
    check_ce(logits, labels)?;
    let total: T = logits
        .rows()
        .into_iter()
        .zip(labels)
        .map(|(row, &y)| -log_softmax_row(row).nth(y).expect("label checked against class count"))
        .sum();
    Ok(total / T::of_usize(labels.len().max(1)))
}

/// Mean cross-entropy together with its gradient with respect to the logits.
pub fn cross_entropy_with_grad<T: Scalar>(logits: ArrayView2<T>, labels: &[usize]) -> Result<(T, Array2<T>)> {
    check_ce(logits, labels)?;
    let n = T::of_usize(labels.len().max(1));
    let mut grad = Array2::zeros(logits.raw_dim());
    let mut total = T::zero();
    for ((row, mut g), &y) in logits.rows().into_iter().zip(grad.rows_mut()).zip(labels) {
        for (k, (lp, gk)) in log_softmax_row(row).zip(g.iter_mut()).enumerate() {
            let p = lp.exp();
            *gk = (p - if k == y { T::one() } else { T::zero() }) / n;
            if k == y {
                total -= lp;
            }
        }
    }
    Ok((total / n, grad))
}

fn check_ce<T: Scalar>(logits: ArrayView2<T>, labels: &[usize]) -> Result<()> {
    if logits.len_of(Axis(0)) != labels.len() {
        return Err(shape(format!("{} logit rows vs {} labels", logits.nrows(), labels.len())));
    }
    if let Some(&bad) = labels.iter().find(|&&y| y >= logits.ncols()) {
        return Err(shape(format!("label {bad} outside {} classes", logits.ncols())));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn squared_loss_cases() {
        assert_eq!(squared_loss(&[1.0, -1.0], &[1.0, -1.0]).unwrap(), 0.0);
        assert_eq!(squared_loss(&[1.0, 0.0], &[0.0, 0.0]).unwrap(), 0.5);
        assert!(squared_loss(&[1.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn cross_entropy_uniform_logits() {
        let logits = array![[0.0, 0.0, 0.0, 0.0]];
        let ce: f64 = cross_entropy(logits.view(), &[2]).unwrap();
        assert!((ce - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_grad_matches_finite_difference() {
        let logits = array![[0.3, -1.2, 2.0], [0.0, 0.5, -0.5]];
        let labels = [2, 0];
        let (_, g) = cross_entropy_with_grad(logits.view(), &labels).unwrap();
        let h = 1e-6;
        for i in 0..2 {
            for k in 0..3 {
                let mut up = logits.clone();
                up[[i, k]] += h;
                let mut dn = logits.clone();
                dn[[i, k]] -= h;
                let fd: f64 = (cross_entropy(up.view(), &labels).unwrap() - cross_entropy(dn.view(), &labels).unwrap()) / (2.0 * h);
                assert!((fd - g[[i, k]]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn cross_entropy_is_stable_for_large_logits() {
        let logits = array![[1000.0, 0.0]];
        let ce: f64 = cross_entropy(logits.view(), &[0]).unwrap();
        assert!(ce.is_finite() && ce < 1e-12);
    }
}
