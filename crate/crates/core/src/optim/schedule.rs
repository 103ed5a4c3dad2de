use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::oracle::LossOracle;
use crate::param::ParamVector;

use super::config::OptimizerConfig;
use super::engine::{eval_checked, Stepper};

/// Cosine-annealed learning rate restarting every `cycle_len` steps.
pub fn cyclical_lr(lr_max: f64, lr_min: f64, cycle_len: usize, step: usize) -> f64 {
    let phase = (step % cycle_len.max(1)) as f64 / cycle_len.max(1) as f64;
    lr_min + 0.5 * (lr_max - lr_min) * (1.0 + (PI * phase).cos())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CyclicalSchedule {
    pub lr_max: f64,
    pub lr_min: f64,
    pub cycle_len: usize,
    pub n_cycles: usize,
}

impl CyclicalSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr_min >= 0.0 && self.lr_min <= self.lr_max && self.lr_max.is_finite()) {
            return Err(Error::InvalidArgument("schedule needs 0 <= lr_min <= lr_max".into()));
        }
        if self.cycle_len == 0 || self.n_cycles == 0 {
            return Err(Error::InvalidArgument("cycle_len and n_cycles must be >= 1".into()));
        }
        Ok(())
    }

    pub fn lr(&self, step: usize) -> f64 {
        cyclical_lr(self.lr_max, self.lr_min, self.cycle_len, step)
    }
}

/// Runs `n_cycles` learning-rate cycles with `cfg`'s update rule and returns
/// the iterate at the end of every cycle. Optimizer state carries over between
/// cycles; `cfg`'s step limit, tolerance and decay are not used.
pub fn snapshot_train<O: LossOracle + ?Sized>(
    oracle: &O,
    p0: &[f64],
    cfg: &OptimizerConfig,
    schedule: &CyclicalSchedule,
) -> Result<Vec<ParamVector>> {
    cfg.validate()?;
    schedule.validate()?;
    check_dim(oracle.dim(), p0.len())?;
    let oracle = super::engine::AsDyn(oracle);
    let mut p = ParamVector::new(p0.to_vec())?.into_inner();
    let mut stepper = Stepper::new(cfg, p.len());
    let mut snapshots = Vec::with_capacity(schedule.n_cycles);
    let mut step = 0;
    for _ in 0..schedule.n_cycles {
        for k in 0..schedule.cycle_len {
            let (_, grad) = eval_checked(&oracle, &p, step)?;
            let delta = stepper.update(&grad, schedule.lr(k));
            for (x, d) in p.iter_mut().zip(&delta) {
                *x -= d;
            }
            step += 1;
        }
        snapshots.push(ParamVector::new(p.clone()).map_err(|_| Error::NonFiniteStep { step })?);
    }
    Ok(snapshots)
}
