//! Susceptibility to noisy labels.
//!
//! After every training epoch the model takes one plain gradient step on a
//! fixed randomly-labeled probe batch. The drop in probe loss caused by that
//! step is the epoch's increment; ζ(t) is the running mean of the increments.
//! The step is taken on a copy, so the training trajectory is never touched.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::data::ProbeBatch;
use crate::error::{invalid, Error, Result};
use crate::nn::Model;
use crate::scalar::Scalar;

/// Where the probe step takes its learning rate from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", content = "eta", rename_all = "snake_case")]
pub enum ProbeEta {
    /// The scheduled learning rate of the epoch that was just trained.
    #[default]
    SameAsTraining,
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub struct SusceptibilityTracker<T> {
    pub probe: ProbeBatch<T>,
    pub eta_source: ProbeEta,
    t: usize,
    zeta: f64,
    increments: Vec<f64>,
}

impl<T: Scalar> SusceptibilityTracker<T> {
    pub fn new(probe: ProbeBatch<T>, eta_source: ProbeEta) -> Self {
        Self { probe, eta_source, t: 0, zeta: 0.0, increments: Vec::new() }
    }

    pub fn steps(&self) -> usize {
        self.t
    }

    /// ζ(t); zero before the first probe step.
    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    fn probe_lr(&self, training_lr: f64) -> f64 {
        match self.eta_source {
            ProbeEta::SameAsTraining => training_lr,
            ProbeEta::Fixed(eta) => eta,
        }
    }

    /// Records an externally computed increment with the running-mean recurrence
    /// `ζ(t) = ((t − 1) ζ(t − 1) + Δ) / t`.
    pub fn push_increment(&mut self, increment: f64) -> f64 {
        self.t += 1;
        let t = self.t as f64;
        self.zeta = ((t - 1.0) * self.zeta + increment) / t;
        self.increments.push(increment);
        self.zeta
    }

    /// Probe loss drop `Φ̃(W) − Φ̃(W̃)` after one plain step from `model`,
    /// without modifying `model`.
    pub fn increment_for(&self, model: &Model<T>, training_lr: f64) -> Result<f64> {
        if self.probe.is_empty() {
            return Err(Error::State("probe batch is empty".into()));
        }
        if model.num_classes() != self.probe.num_classes {
            return Err(Error::State(format!(
                "model has {} outputs but the probe batch has {} classes",
                model.num_classes(),
                self.probe.num_classes
            )));
        }
        let x = self.probe.inputs.view();
        let labels = &self.probe.random_labels;
        let (before, grad) = model.loss_and_grad(x, labels)?;
        let mut stepped = model.clone();
        stepped.apply(&grad, T::of(self.probe_lr(training_lr)))?;
        let after = stepped.loss(x, labels)?;
        Ok((before - after).to_f64_lossy())
    }

    /// One probe step; returns the increment and updates ζ.
    pub fn probe_step(&mut self, model: &Model<T>, training_lr: f64) -> Result<f64> {
        let inc = self.increment_for(model, training_lr)?;
        self.push_increment(inc);
        Ok(inc)
    }
}

/// `(t, ζ(t))` for `t = 1..`, computed as prefix means of the increments.
pub fn zeta_series<T>(tracker: &SusceptibilityTracker<T>) -> Vec<(usize, f64)> {
    let mut sum = 0.0;
    tracker
        .increments
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            sum += d;
            (i + 1, sum / (i + 1) as f64)
        })
        .collect()
}

/// Number of plain gradient steps on `(x, labels)` until the model predicts
/// every assigned label (or, when `fit_threshold` is set, until the loss is at
/// most the threshold). Returns `max_steps + 1` when the set is never fit.
pub fn multi_step_resistance<T: Scalar>(
    model: &Model<T>,
    x: ArrayView2<T>,
    labels: &[usize],
    lr: f64,
    max_steps: usize,
    fit_threshold: Option<f64>,
) -> Result<usize> {
    if max_steps == 0 {
        return Err(invalid("max_steps must be at least 1"));
    }
    let fitted = |m: &Model<T>| -> Result<bool> {
        Ok(match fit_threshold {
            Some(eps) => m.loss(x, labels)?.to_f64_lossy() <= eps,
            None => m.predict(x)?.iter().zip(labels).all(|(p, y)| p == y),
        })
    };
    let mut m = model.clone();
    let lr = T::of(lr);
    for step in 0..=max_steps {
        if fitted(&m)? {
            return Ok(step);
        }
        if step < max_steps {
            let (_, g) = m.loss_and_grad(x, labels)?;
            m.apply(&g, lr)?;
        }
    }
    Ok(max_steps + 1)
}
