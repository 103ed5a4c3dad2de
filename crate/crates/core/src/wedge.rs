//! The toy landscape: a union of axis-aligned `n`-dimensional wedges.
//!
//! The loss of a configuration is its Euclidean distance to the nearest
//! wedge. Wedges are never materialized; every query sorts the coordinates by
//! magnitude, keeps the `n` largest and measures the `D - n` dropped ones.
//!
//! When magnitudes tie at the selection boundary the lower axis index is
//! treated as the larger one and stays in the wedge.

use std::borrow::Cow;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, check_finite, Error, Result};
use crate::linalg;
use crate::param::ParamVector;
use crate::rng;

/// Serialized form of a [`WedgeLandscape`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandscapeConfig {
    #[serde(rename = "D")]
    pub dim: usize,
    #[serde(rename = "n")]
    pub wedge_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation_seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "LandscapeConfig", into = "LandscapeConfig")]
pub struct WedgeLandscape {
    dim: usize,
    wedge_dim: usize,
    rotation: Option<Rotation>,
}

#[derive(Debug, Clone)]
struct Rotation {
    seed: Option<u64>,
    // row-major D x D
    matrix: Vec<f64>,
}

/// Axes spanned by one wedge, strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WedgeId(Vec<usize>);

impl WedgeId {
    pub fn axes(&self) -> &[usize] {
        &self.0
    }
}

impl fmt::Display for WedgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let axes: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        write!(f, "{{{}}}", axes.join(","))
    }
}

impl WedgeLandscape {
    pub fn new(dim: usize, wedge_dim: usize) -> Result<Self> {
        if wedge_dim == 0 || wedge_dim >= dim {
            return Err(Error::InvalidArgument(format!(
                "wedge dimension must satisfy 0 < n < D, got D={dim}, n={wedge_dim}"
            )));
        }
        Ok(WedgeLandscape {
            dim,
            wedge_dim,
            rotation: None,
        })
    }

    /// Landscape rotated by the orthogonal factor of a QR decomposition of a
    /// seeded standard-normal matrix.
    pub fn with_rotation_seed(dim: usize, wedge_dim: usize, seed: u64) -> Result<Self> {
        let mut landscape = Self::new(dim, wedge_dim)?;
        let mut rng = rng::labeled(seed, "rotation", 0);
        let columns: Vec<Vec<f64>> = (0..dim)
            .map(|_| rng::standard_normal_vec(&mut rng, dim))
            .collect();
        // Gram-Schmidt on the columns is the Q of a QR factorization; store Q
        // row-major, so entry (i, j) is column j's i-th component.
        let q = linalg::orthonormalize_rows(columns)?;
        let mut matrix = vec![0.0; dim * dim];
        for (j, col) in q.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                matrix[i * dim + j] = *v;
            }
        }
        landscape.rotation = Some(Rotation {
            seed: Some(seed),
            matrix,
        });
        Ok(landscape)
    }

    /// Landscape rotated by an explicit row-major orthogonal matrix.
    pub fn with_rotation(dim: usize, wedge_dim: usize, matrix: Vec<f64>) -> Result<Self> {
        let mut landscape = Self::new(dim, wedge_dim)?;
        check_dim(dim * dim, matrix.len())?;
        check_finite(&matrix)?;
        let rows: Vec<Vec<f64>> = matrix.chunks(dim).map(|r| r.to_vec()).collect();
        let deviation = linalg::orthonormality_defect(&rows);
        if deviation > 1e-10 {
            return Err(Error::NotOrthonormal { deviation });
        }
        landscape.rotation = Some(Rotation { seed: None, matrix });
        Ok(landscape)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn wedge_dim(&self) -> usize {
        self.wedge_dim
    }

    /// Number of short directions `s = D - n` of a single wedge.
    pub fn short_dim(&self) -> usize {
        self.dim - self.wedge_dim
    }

    pub fn is_rotated(&self) -> bool {
        self.rotation.is_some()
    }

    pub fn config(&self) -> LandscapeConfig {
        LandscapeConfig {
            dim: self.dim,
            wedge_dim: self.wedge_dim,
            rotation_seed: self.rotation.as_ref().and_then(|r| r.seed),
        }
    }

    /// `Rᵀ p`, the coordinates in the wedge-aligned frame.
    fn to_local<'a>(&self, p: &'a [f64]) -> Cow<'a, [f64]> {
        match &self.rotation {
            None => Cow::Borrowed(p),
            Some(rot) => {
                let d = self.dim;
                let mut out = vec![0.0; d];
                for (i, pi) in p.iter().enumerate() {
                    linalg::axpy(*pi, &rot.matrix[i * d..(i + 1) * d], &mut out);
                }
                Cow::Owned(out)
            }
        }
    }

    /// `R v`, back from the wedge-aligned frame.
    fn to_ambient(&self, v: Vec<f64>) -> Vec<f64> {
        match &self.rotation {
            None => v,
            Some(rot) => {
                let d = self.dim;
                (0..d)
                    .map(|i| linalg::dot(&rot.matrix[i * d..(i + 1) * d], &v))
                    .collect()
            }
        }
    }

    /// Axis indices ordered from "largest" to "smallest": descending
    /// magnitude, lower index first on ties.
    fn ranked_axes(local: &[f64]) -> Vec<usize> {
        let mut order: Vec<usize> = (0..local.len()).collect();
        order.sort_by(|&a, &b| {
            local[b]
                .abs()
                .total_cmp(&local[a].abs())
                .then_with(|| a.cmp(&b))
        });
        order
    }

    fn validate(&self, p: &[f64]) -> Result<()> {
        check_dim(self.dim, p.len())?;
        check_finite(p)
    }

    fn loss_local(&self, local: &[f64], order: &[usize]) -> f64 {
        order[self.wedge_dim..]
            .iter()
            .map(|&i| local[i] * local[i])
            .sum::<f64>()
            .sqrt()
    }

    /// Euclidean distance from `p` to the nearest wedge.
    pub fn surrogate_loss(&self, p: &[f64]) -> Result<f64> {
        self.validate(p)?;
        let local = self.to_local(p);
        let order = Self::ranked_axes(&local);
        Ok(self.loss_local(&local, &order))
    }

    /// Gradient of [`surrogate_loss`](Self::surrogate_loss): `c_i / loss` on
    /// the dropped axes, zero on the kept ones, and the zero vector on a wedge.
    pub fn surrogate_grad(&self, p: &[f64]) -> Result<ParamVector> {
        Ok(ParamVector::from_raw(self.loss_and_grad(p)?.1))
    }

    pub(crate) fn loss_and_grad(&self, p: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.validate(p)?;
        let local = self.to_local(p);
        let order = Self::ranked_axes(&local);
        let loss = self.loss_local(&local, &order);
        let mut grad = vec![0.0; self.dim];
        if loss > 0.0 {
            for &i in &order[self.wedge_dim..] {
                grad[i] = local[i] / loss;
            }
        }
        Ok((loss, self.to_ambient(grad)))
    }

    /// The wedge realizing the surrogate loss: the `n` largest-magnitude axes.
    pub fn nearest_wedge(&self, p: &[f64]) -> Result<WedgeId> {
        self.validate(p)?;
        let local = self.to_local(p);
        let mut kept = Self::ranked_axes(&local);
        kept.truncate(self.wedge_dim);
        kept.sort_unstable();
        Ok(WedgeId(kept))
    }

    /// Closest point of the nearest wedge (the dropped coordinates zeroed).
    pub fn project_to_wedge(&self, p: &[f64]) -> Result<ParamVector> {
        self.validate(p)?;
        let local = self.to_local(p);
        let order = Self::ranked_axes(&local);
        let mut projected = local.into_owned();
        for &i in &order[self.wedge_dim..] {
            projected[i] = 0.0;
        }
        Ok(ParamVector::from_raw(self.to_ambient(projected)))
    }

    /// Number of short directions at `p`: the size of the union of dropped
    /// axes over every wedge containing `p` to within `tol`, i.e. the number of
    /// coordinates with magnitude at most `tol`, never less than `s`.
    pub fn exact_short_count(&self, p: &[f64], tol: f64) -> Result<usize> {
        self.validate(p)?;
        if !(tol >= 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be >= 0, got {tol}")));
        }
        let local = self.to_local(p);
        let small = local.iter().filter(|v| v.abs() <= tol).count();
        Ok(small.max(self.short_dim()))
    }
}

impl TryFrom<LandscapeConfig> for WedgeLandscape {
    type Error = Error;

    fn try_from(cfg: LandscapeConfig) -> Result<Self> {
        match cfg.rotation_seed {
            Some(seed) => WedgeLandscape::with_rotation_seed(cfg.dim, cfg.wedge_dim, seed),
            None => WedgeLandscape::new(cfg.dim, cfg.wedge_dim),
        }
    }
}

impl From<WedgeLandscape> for LandscapeConfig {
    fn from(l: WedgeLandscape) -> Self {
        l.config()
    }
}
