use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Learning-rate schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    #[default]
    None,
    /// `η (1 + cos(π t / t_max)) / 2`
    CosineAnnealing { t_max: usize },
    /// `η γᵗ`
    Exponential { gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub eta: f64,
    #[serde(default)]
    pub schedule: Schedule,
    #[serde(default)]
    pub momentum: f64,
    /// 0 means full-batch gradient descent.
    #[serde(default)]
    pub batch_size: usize,
    pub epochs: usize,
}

impl OptimizerConfig {
    pub fn full_batch(eta: f64, epochs: usize) -> Self {
        Self { eta, schedule: Schedule::None, momentum: 0.0, batch_size: 0, epochs }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0) || !self.eta.is_finite() {
            return Err(invalid(format!("learning rate must be finite and non-negative, got {}", self.eta)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(invalid(format!("momentum must lie in [0, 1), got {}", self.momentum)));
        }
        match self.schedule {
            Schedule::None => {}
            Schedule::CosineAnnealing { t_max } => {
                if t_max == 0 {
                    return Err(invalid("cosine annealing needs t_max >= 1"));
                }
            }
            Schedule::Exponential { gamma } => {
                if !(gamma > 0.0 && gamma <= 1.0) {
                    return Err(invalid(format!("exponential decay needs gamma in (0, 1], got {gamma}")));
                }
            }
        }
        Ok(())
    }
}

/// Learning rate of the `t`-th epoch (0-based).
pub fn lr_at(cfg: &OptimizerConfig, t: usize) -> Result<f64> {
    cfg.validate()?;
    Ok(match cfg.schedule {
        Schedule::None => cfg.eta,
        Schedule::CosineAnnealing { t_max } => {
            cfg.eta * (1.0 + (std::f64::consts::PI * t as f64 / t_max as f64).cos()) / 2.0
        }
        Schedule::Exponential { gamma } => cfg.eta * gamma.powi(t as i32),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(schedule: Schedule) -> OptimizerConfig {
        OptimizerConfig { eta: 0.1, schedule, momentum: 0.0, batch_size: 0, epochs: 1 }
    }

    #[test]
    fn cosine_endpoints() {
        let c = cfg(Schedule::CosineAnnealing { t_max: 200 });
        assert_eq!(lr_at(&c, 0).unwrap(), 0.1);
        assert!(lr_at(&c, 200).unwrap().abs() < 1e-17);
        assert!((lr_at(&c, 100).unwrap() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn exponential_decay() {
        let c = cfg(Schedule::Exponential { gamma: 0.9 });
        assert!((lr_at(&c, 2).unwrap() - 0.081).abs() < 1e-15);
    }

    #[test]
    fn constant_schedule() {
        assert_eq!(lr_at(&cfg(Schedule::None), 57).unwrap(), 0.1);
    }

    #[test]
    fn invalid_schedules() {
        assert!(lr_at(&cfg(Schedule::CosineAnnealing { t_max: 0 }), 0).is_err());
        assert!(lr_at(&cfg(Schedule::Exponential { gamma: 0.0 }), 0).is_err());
        assert!(lr_at(&cfg(Schedule::Exponential { gamma: 1.5 }), 0).is_err());
        let mut c = cfg(Schedule::None);
        c.momentum = 1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn schedule_json_shape() {
        let s: Schedule = serde_json::from_str(r#"{"kind":"cosine_annealing","t_max":50}"#).unwrap();
        assert_eq!(s, Schedule::CosineAnnealing { t_max: 50 });
    }
}
