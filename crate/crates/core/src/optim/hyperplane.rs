use crate::error::{check_dim, check_finite, Error, Result};
use crate::linalg;
use crate::oracle::LossOracle;
use crate::param::ParamVector;
use crate::rng;

use super::config::OptimizerConfig;
use super::engine;
use super::trajectory::Trajectory;

/// The affine plane `p = θM + P₀` with orthonormal rows `M` (`d × D`).
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    offset: ParamVector,
    basis: Vec<Vec<f64>>,
}

impl Hyperplane {
    pub fn new(offset: ParamVector, basis: Vec<Vec<f64>>) -> Result<Self> {
        let ambient = offset.len();
        if basis.is_empty() || basis.len() > ambient {
            return Err(Error::InvalidArgument(format!(
                "plane dimension must lie in [1, {ambient}], got {}",
                basis.len()
            )));
        }
        for row in &basis {
            check_dim(ambient, row.len())?;
            check_finite(row)?;
        }
        let deviation = linalg::orthonormality_defect(&basis);
        if deviation > 1e-10 {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(Hyperplane { offset, basis })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.offset.len()
    }

    pub fn offset(&self) -> &ParamVector {
        &self.offset
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// `θM + P₀`
    pub fn point(&self, theta: &[f64]) -> Vec<f64> {
        let mut p = self.offset.to_vec();
        for (t, row) in theta.iter().zip(&self.basis) {
            linalg::axpy(*t, row, &mut p);
        }
        p
    }

    /// Chain rule: the θ-gradient `M g` of a full-space gradient `g`.
    pub fn pull_back(&self, grad: &[f64]) -> Vec<f64> {
        self.basis.iter().map(|row| linalg::dot(row, grad)).collect()
    }
}

/// A plane whose basis is the Gram-Schmidt orthonormalization of a seeded
/// standard-normal `d × D` matrix.
pub fn random_hyperplane(ambient: usize, d: usize, offset: ParamVector, seed: u64) -> Result<Hyperplane> {
    check_dim(ambient, offset.len())?;
    if d == 0 || d > ambient {
        return Err(Error::InvalidArgument(format!(
            "plane dimension must lie in [1, {ambient}], got {d}"
        )));
    }
    let mut rng = rng::labeled(seed, "hyperplane", 0);
    let rows = (0..d).map(|_| rng::standard_normal_vec(&mut rng, ambient)).collect();
    Hyperplane::new(offset, linalg::orthonormalize_rows(rows)?)
}

struct PlaneOracle<'a, O: ?Sized> {
    inner: &'a O,
    plane: &'a Hyperplane,
}

impl<O: LossOracle + ?Sized> LossOracle for PlaneOracle<'_, O> {
    fn dim(&self) -> usize {
        self.plane.dim()
    }

    fn loss(&self, theta: &[f64]) -> Result<f64> {
        check_dim(self.plane.dim(), theta.len())?;
        self.inner.loss(&self.plane.point(theta))
    }

    fn grad(&self, theta: &[f64]) -> Result<Vec<f64>> {
        Ok(self.loss_and_grad(theta)?.1)
    }

    fn loss_and_grad(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        check_dim(self.plane.dim(), theta.len())?;
        let (l, g) = self.inner.loss_and_grad(&self.plane.point(theta))?;
        Ok((l, self.plane.pull_back(&g)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperplaneRun {
    pub theta: Vec<f64>,
    pub point: ParamVector,
    /// Recorded radii are those of the full-space point `θM + P₀`.
    pub trajectory: Trajectory,
}

/// Minimizes `θ ↦ oracle.loss(θM + P₀)` directly in plane coordinates.
pub fn hyperplane_minimize<O: LossOracle + ?Sized>(
    oracle: &O,
    plane: &Hyperplane,
    theta0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<HyperplaneRun> {
    check_dim(oracle.dim(), plane.ambient_dim())?;
    check_dim(plane.dim(), theta0.len())?;
    let deviation = linalg::orthonormality_defect(&plane.basis);
    if deviation > 1e-10 {
        return Err(Error::NotOrthonormal { deviation });
    }
    let adapter = PlaneOracle { inner: oracle, plane };
    let radius = |theta: &[f64]| linalg::norm(&plane.point(theta));
    let trajectory = engine::run(&adapter, theta0, cfg, None, &radius)?;
    let theta = trajectory.final_point.to_vec();
    let point = ParamVector::new(plane.point(&theta))?;
    Ok(HyperplaneRun {
        theta,
        point,
        trajectory,
    })
}
