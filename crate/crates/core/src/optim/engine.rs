use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, Projector};
use crate::oracle::LossOracle;
use crate::param::ParamVector;

use super::config::{Method, OptimizerConfig};
use super::trajectory::{Trajectory, TrajectoryPoint};

/// Update rule state for gd, heavy-ball momentum or Adam.
#[derive(Debug, Clone)]
pub struct Stepper {
    method: Method,
    momentum_coeff: f64,
    betas: (f64, f64),
    eps: f64,
    first: Vec<f64>,
    second: Vec<f64>,
    t: i32,
}

impl Stepper {
    pub fn new(cfg: &OptimizerConfig, dim: usize) -> Self {
        let needs_first = cfg.method != Method::Gd;
        let needs_second = cfg.method == Method::Adam;
        Stepper {
            method: cfg.method,
            momentum_coeff: cfg.momentum_coeff,
            betas: cfg.adam_betas,
            eps: cfg.adam_eps,
            first: if needs_first { vec![0.0; dim] } else { Vec::new() },
            second: if needs_second { vec![0.0; dim] } else { Vec::new() },
            t: 0,
        }
    }

    /// The displacement to subtract from the iterate.
    pub fn update(&mut self, grad: &[f64], lr: f64) -> Vec<f64> {
        self.t = self.t.saturating_add(1);
        match self.method {
            Method::Gd => grad.iter().map(|g| lr * g).collect(),
            Method::Momentum => {
                let mu = self.momentum_coeff;
                self.first
                    .iter_mut()
                    .zip(grad)
                    .map(|(v, g)| {
                        *v = mu * *v + g;
                        lr * *v
                    })
                    .collect()
            }
            Method::Adam => {
                let (b1, b2) = self.betas;
                let c1 = 1.0 - b1.powi(self.t);
                let c2 = 1.0 - b2.powi(self.t);
                let eps = self.eps;
                self.first
                    .iter_mut()
                    .zip(self.second.iter_mut())
                    .zip(grad)
                    .map(|((m, v), g)| {
                        *m = b1 * *m + (1.0 - b1) * g;
                        *v = b2 * *v + (1.0 - b2) * g * g;
                        lr * (*m / c1) / ((*v / c2).sqrt() + eps)
                    })
                    .collect()
            }
        }
    }
}

pub(crate) fn eval_checked(
    oracle: &dyn LossOracle,
    p: &[f64],
    step: usize,
) -> Result<(f64, Vec<f64>)> {
    let (loss, grad) = oracle.loss_and_grad(p)?;
    if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFiniteStep { step });
    }
    Ok((loss, grad))
}

/// Minimizes `oracle` from `p0`. Stops as soon as the loss reaches
/// `cfg.loss_tolerance` or after `cfg.max_steps` updates; the trajectory's
/// final point is the last iterate.
pub fn minimize<O: LossOracle + ?Sized>(
    oracle: &O,
    p0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<Trajectory> {
    run(&AsDyn(oracle), p0, cfg, None, &|p| linalg::norm(p))
}

/// Like [`minimize`], but every gradient and every update has its component
/// along `constraint`'s subspace removed, so iterates stay on the affine slice
/// through `p0`.
pub fn minimize_projected<O: LossOracle + ?Sized>(
    oracle: &O,
    p0: &[f64],
    cfg: &OptimizerConfig,
    constraint: &Projector,
) -> Result<Trajectory> {
    run(&AsDyn(oracle), p0, cfg, Some(constraint), &|p| linalg::norm(p))
}

pub(crate) fn run(
    oracle: &dyn LossOracle,
    p0: &[f64],
    cfg: &OptimizerConfig,
    constraint: Option<&Projector>,
    radius: &dyn Fn(&[f64]) -> f64,
) -> Result<Trajectory> {
    cfg.validate()?;
    check_dim(oracle.dim(), p0.len())?;
    ParamVector::new(p0.to_vec())?;
    let mut p = p0.to_vec();
    let mut stepper = Stepper::new(cfg, p.len());
    let mut points = Vec::new();
    let mut loss;
    let mut step = 0;
    loop {
        let (l, mut grad) = eval_checked(oracle, &p, step)?;
        loss = l;
        points.push(TrajectoryPoint {
            step,
            loss,
            radius: radius(&p),
        });
        if loss <= cfg.loss_tolerance || step == cfg.max_steps {
            break;
        }
        if let Some(c) = constraint {
            c.apply(&mut grad);
        }
        let mut delta = stepper.update(&grad, cfg.lr_at(step));
        if let Some(c) = constraint {
            c.apply(&mut delta);
        }
        for (x, d) in p.iter_mut().zip(&delta) {
            *x -= d;
        }
        step += 1;
    }
    Ok(Trajectory {
        points,
        final_point: ParamVector::new(p).map_err(|_| Error::NonFiniteStep { step })?,
        converged: loss <= cfg.loss_tolerance,
    })
}

/// Lets generic (possibly unsized) oracles flow into the `dyn` engine.
pub(crate) struct AsDyn<'a, O: ?Sized>(pub &'a O);

impl<O: LossOracle + ?Sized> LossOracle for AsDyn<'_, O> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn loss(&self, p: &[f64]) -> Result<f64> {
        self.0.loss(p)
    }
    fn grad(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.0.grad(p)
    }
    fn loss_and_grad(&self, p: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.0.loss_and_grad(p)
    }
    fn as_wedge(&self) -> Option<&crate::WedgeLandscape> {
        self.0.as_wedge()
    }
}
