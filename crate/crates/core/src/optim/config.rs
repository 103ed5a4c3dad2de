use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Gd,
    Momentum,
    Adam,
}

/// Optimizer settings.
///
/// The learning rate follows `lr · lr_decay^(step / max_steps)`; the default
/// `lr_decay = 1` keeps it constant. On the toy landscape the gradient has unit
/// norm everywhere off the wedges, so a constant step size can only bring the
/// loss down to roughly the step size; a decay below one lets it shrink
/// further.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub method: Method,
    pub learning_rate: f64,
    pub momentum_coeff: f64,
    pub adam_betas: (f64, f64),
    pub adam_eps: f64,
    pub max_steps: usize,
    /// Runs stop as soon as the loss is at or below this value.
    pub loss_tolerance: f64,
    pub lr_decay: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            method: Method::Adam,
            learning_rate: 0.01,
            momentum_coeff: 0.9,
            adam_betas: (0.9, 0.999),
            adam_eps: 1e-8,
            max_steps: 10_000,
            loss_tolerance: 1e-6,
            lr_decay: 1.0,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn gd(learning_rate: f64) -> Self {
        OptimizerConfig {
            method: Method::Gd,
            learning_rate,
            ..Default::default()
        }
    }

    pub fn adam(learning_rate: f64) -> Self {
        OptimizerConfig {
            method: Method::Adam,
            learning_rate,
            ..Default::default()
        }
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn with_tolerance(mut self, loss_tolerance: f64) -> Self {
        self.loss_tolerance = loss_tolerance;
        self
    }

    pub fn with_decay(mut self, lr_decay: f64) -> Self {
        self.lr_decay = lr_decay;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(format!("optimizer: {msg}")));
        let unit = |x: f64| (0.0..1.0).contains(&x);
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be finite and >= 0");
        }
        if !unit(self.momentum_coeff) {
            return bad("momentum_coeff must lie in [0, 1)");
        }
        if !unit(self.adam_betas.0) || !unit(self.adam_betas.1) {
            return bad("adam_betas must lie in [0, 1)");
        }
        if !(self.adam_eps > 0.0) {
            return bad("adam_eps must be > 0");
        }
        if self.max_steps == 0 {
            return bad("max_steps must be >= 1");
        }
        if !(self.loss_tolerance >= 0.0) {
            return bad("loss_tolerance must be >= 0");
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return bad("lr_decay must lie in (0, 1]");
        }
        Ok(())
    }

    pub fn lr_at(&self, step: usize) -> f64 {
        if self.lr_decay == 1.0 {
            self.learning_rate
        } else {
            self.learning_rate * self.lr_decay.powf(step as f64 / self.max_steps as f64)
        }
    }
}
