use crate::error::{check_dim, Result};
use crate::wedge::WedgeLandscape;

/// A differentiable loss over `dim()`-dimensional parameter vectors.
///
/// Oracles are shared between concurrently running optimizations, hence the
/// `Sync` bound.
pub trait LossOracle: Sync {
    fn dim(&self) -> usize;

    fn loss(&self, p: &[f64]) -> Result<f64>;

    fn grad(&self, p: &[f64]) -> Result<Vec<f64>>;

    fn loss_and_grad(&self, p: &[f64]) -> Result<(f64, Vec<f64>)> {
        Ok((self.loss(p)?, self.grad(p)?))
    }

    /// The underlying toy landscape, for diagnostics that have an exact answer
    /// there.
    fn as_wedge(&self) -> Option<&WedgeLandscape> {
        None
    }
}

impl LossOracle for WedgeLandscape {
    fn dim(&self) -> usize {
        WedgeLandscape::dim(self)
    }

    fn loss(&self, p: &[f64]) -> Result<f64> {
        self.surrogate_loss(p)
    }

    fn grad(&self, p: &[f64]) -> Result<Vec<f64>> {
        Ok(WedgeLandscape::loss_and_grad(self, p)?.1)
    }

    fn loss_and_grad(&self, p: &[f64]) -> Result<(f64, Vec<f64>)> {
        WedgeLandscape::loss_and_grad(self, p)
    }

    fn as_wedge(&self) -> Option<&WedgeLandscape> {
        Some(self)
    }
}

impl<O: LossOracle + ?Sized> LossOracle for &O {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn loss(&self, p: &[f64]) -> Result<f64> {
        (**self).loss(p)
    }

    fn grad(&self, p: &[f64]) -> Result<Vec<f64>> {
        (**self).grad(p)
    }

    fn loss_and_grad(&self, p: &[f64]) -> Result<(f64, Vec<f64>)> {
        (**self).loss_and_grad(p)
    }

    fn as_wedge(&self) -> Option<&WedgeLandscape> {
        (**self).as_wedge()
    }
}

/// An oracle assembled from a loss closure and a gradient closure.
pub struct FnOracle<F, G> {
    dim: usize,
    loss: F,
    grad: G,
}

impl<F, G> FnOracle<F, G>
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Sync,
{
    pub fn new(dim: usize, loss: F, grad: G) -> Self {
        FnOracle { dim, loss, grad }
    }
}

impl<F, G> LossOracle for FnOracle<F, G>
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn loss(&self, p: &[f64]) -> Result<f64> {
        check_dim(self.dim, p.len())?;
        Ok((self.loss)(p))
    }

    fn grad(&self, p: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, p.len())?;
        Ok((self.grad)(p))
    }
}

/// `½ L²` of an inner oracle. Its Hessian is well defined on the toy
/// landscape, where `L` itself has a kink on every wedge.
pub struct HalfSquared<O>(pub O);

impl<O: LossOracle> LossOracle for HalfSquared<O> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn loss(&self, p: &[f64]) -> Result<f64> {
        let l = self.0.loss(p)?;
        Ok(0.5 * l * l)
    }

    fn grad(&self, p: &[f64]) -> Result<Vec<f64>> {
        Ok(self.loss_and_grad(p)?.1)
    }

    fn loss_and_grad(&self, p: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (l, mut g) = self.0.loss_and_grad(p)?;
        g.iter_mut().for_each(|x| *x *= l);
        Ok((0.5 * l * l, g))
    }
}
