//! Local geometry at a point: how many short directions it has, and how far
//! one can move along random directions before the loss crosses a threshold.

use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::statistics::{Data, OrderStatistics};

use crate::error::{check_dim, Error, Result};
use crate::io::{csv_error, fmt_num};
use crate::linalg;
use crate::oracle::{HalfSquared, LossOracle};
use crate::param::ParamVector;
use crate::rng;

/// Largest dimension for which a finite-difference Hessian is built.
pub const HESSIAN_DIM_CAP: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShortDirectionMethod {
    /// Coordinates within `tol` of zero on the toy landscape.
    ExactToy { tol: f64 },
    /// Eigenvalues above κ of a central-difference Hessian built from
    /// gradient columns with step `h`.
    HessianFd { h: f64 },
}

impl ShortDirectionMethod {
    pub fn name(&self) -> &'static str {
        match self {
            ShortDirectionMethod::ExactToy { .. } => "exact_toy",
            ShortDirectionMethod::HessianFd { .. } => "hessian_fd",
        }
    }
}

impl Default for ShortDirectionMethod {
    fn default() -> Self {
        ShortDirectionMethod::HessianFd { h: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShortDirectionReport {
    pub count: usize,
    pub kappa: f64,
    pub method: ShortDirectionMethod,
    /// Sorted descending; only for the Hessian method.
    pub eigenvalues: Option<Vec<f64>>,
    /// Largest `|H - Hᵀ|` entry relative to the largest `|H|` entry before
    /// symmetrization.
    pub asymmetry: Option<f64>,
}

impl ShortDirectionReport {
    /// One eigenvalue per line, descending.
    pub fn write_eigenvalues<W: Write>(&self, mut out: W) -> Result<()> {
        for v in self.eigenvalues.iter().flatten() {
            writeln!(out, "{}", fmt_num(*v))?;
        }
        Ok(())
    }
}

/// Counts short directions at `p`.
///
/// On the toy landscape the Hessian method differentiates `½ L²` rather than
/// the distance itself, whose curvature blows up on the wedges; there every
/// short direction carries a unit eigenvalue.
pub fn short_direction_count<O: LossOracle + ?Sized>(
    oracle: &O,
    p: &[f64],
    kappa: f64,
    method: ShortDirectionMethod,
) -> Result<ShortDirectionReport> {
    check_dim(oracle.dim(), p.len())?;
    if !(kappa > 0.0) {
        return Err(Error::InvalidArgument(format!("kappa must be > 0, got {kappa}")));
    }
    match method {
        ShortDirectionMethod::ExactToy { tol } => {
            let toy = oracle.as_wedge().ok_or(Error::MethodMismatch)?;
            Ok(ShortDirectionReport {
                count: toy.exact_short_count(p, tol)?,
                kappa,
                method,
                eigenvalues: None,
                asymmetry: None,
            })
        }
        ShortDirectionMethod::HessianFd { h } => {
            let (eigenvalues, asymmetry) = match oracle.as_wedge() {
                Some(toy) => hessian_spectrum(&HalfSquared(toy), p, h)?,
                None => hessian_spectrum(oracle, p, h)?,
            };
            Ok(ShortDirectionReport {
                count: eigenvalues.iter().filter(|&&v| v > kappa).count(),
                kappa,
                method,
                eigenvalues: Some(eigenvalues),
                asymmetry: Some(asymmetry),
            })
        }
    }
}

/// Central-difference Hessian from gradient columns. Returns the raw
/// (unsymmetrized) matrix, column-major.
pub fn fd_hessian<O: LossOracle + ?Sized>(oracle: &O, p: &[f64], h: f64) -> Result<DMatrix<f64>> {
    let d = oracle.dim();
    check_dim(d, p.len())?;
    if d > HESSIAN_DIM_CAP {
        return Err(Error::DimensionCap { dim: d, cap: HESSIAN_DIM_CAP });
    }
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step h must be > 0, got {h}")));
    }
    let columns = (0..d)
        .into_par_iter()
        .map(|j| -> Result<Vec<f64>> {
            let mut plus = p.to_vec();
            let mut minus = p.to_vec();
            plus[j] += h;
            minus[j] -= h;
            let gp = oracle.grad(&plus)?;
            let gm = oracle.grad(&minus)?;
            Ok(gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h)).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DMatrix::from_fn(d, d, |i, j| columns[j][i]))
}

fn hessian_spectrum<O: LossOracle + ?Sized>(oracle: &O, p: &[f64], h: f64) -> Result<(Vec<f64>, f64)> {
    let raw = fd_hessian(oracle, p, h)?;
    let scale = raw.amax();
    let asymmetry = if scale > 0.0 {
        (&raw - raw.transpose()).amax() / scale
    } else {
        0.0
    };
    let sym = (&raw + raw.transpose()) * 0.5;
    let mut eigenvalues: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(|a, b| b.total_cmp(a));
    Ok((eigenvalues, asymmetry))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionProbe {
    pub distance: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub censored: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunnelWidthReport {
    pub center: ParamVector,
    pub loss_threshold: f64,
    pub r_max: f64,
    pub probes: Vec<DirectionProbe>,
    /// `atan(distance / ‖center‖)` per direction.
    pub angular: Vec<f64>,
    /// Censored directions count at `r_max`.
    pub mean: f64,
    pub mean_uncensored: Option<f64>,
    pub median: f64,
    pub p10: f64,
    pub p90: f64,
    pub censored: usize,
}

impl TunnelWidthReport {
    pub fn distances(&self) -> Vec<f64> {
        self.probes.iter().map(|p| p.distance).collect()
    }

    /// Standard deviation of the distances over their mean.
    pub fn relative_std(&self) -> f64 {
        let d = self.distances();
        let n = d.len() as f64;
        let var = d.iter().map(|x| (x - self.mean).powi(2)).sum::<f64>() / n;
        var.sqrt() / self.mean
    }

    /// Writes `direction_index,distance,angular,censored` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["direction_index", "distance", "angular", "censored"])
            .map_err(csv_error)?;
        for (i, (p, a)) in self.probes.iter().zip(&self.angular).enumerate() {
            w.write_record([i.to_string(), fmt_num(p.distance), fmt_num(*a), p.censored.to_string()])
                .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// First-passage distance along `direction` (unit) from `center`: expand a
/// bracket geometrically from `r_max / 1024`, then bisect it to a width below
/// `1e-4 · r_max`.
fn probe_direction<O: LossOracle + ?Sized>(
    oracle: &O,
    center: &[f64],
    direction: &[f64],
    threshold: f64,
    r_max: f64,
) -> Result<DirectionProbe> {
    let at = |t: f64| -> Result<f64> {
        let mut p = center.to_vec();
        linalg::axpy(t, direction, &mut p);
        oracle.loss(&p)
    };
    let mut lo = 0.0;
    let mut t = r_max / 1024.0;
    let hi = loop {
        if at(t)? > threshold {
            break t;
        }
        lo = t;
        if t >= r_max {
            return Ok(DirectionProbe { distance: r_max, t_lo: r_max, t_hi: r_max, censored: true });
        }
        t = (2.0 * t).min(r_max);
    };
    let mut hi = hi;
    while hi - lo >= 1e-4 * r_max {
        let mid = 0.5 * (lo + hi);
        if at(mid)? > threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(DirectionProbe { distance: 0.5 * (lo + hi), t_lo: lo, t_hi: hi, censored: false })
}

/// Probes `k` seeded random directions from `center`. Direction `i` is drawn
/// from a stream derived from `(seed, i)`, so results do not depend on
/// scheduling.
pub fn radial_tunnel_width<O: LossOracle + ?Sized>(
    oracle: &O,
    center: &[f64],
    loss_threshold: f64,
    k: usize,
    r_max: f64,
    seed: u64,
) -> Result<TunnelWidthReport> {
    check_dim(oracle.dim(), center.len())?;
    let center = ParamVector::new(center.to_vec())?;
    if k == 0 {
        return Err(Error::InvalidArgument("need at least one probe direction".into()));
    }
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(Error::InvalidArgument(format!("r_max must be positive, got {r_max}")));
    }
    let center_loss = oracle.loss(&center)?;
    if !(center_loss < loss_threshold) {
        return Err(Error::CenterNotLowLoss { loss: center_loss, threshold: loss_threshold });
    }
    let dim = center.len();
    let probes = (0..k)
        .into_par_iter()
        .map(|i| {
            let dir = rng::unit_vector(&mut rng::labeled(seed, "probe-direction", i as u64), dim);
            probe_direction(oracle, &center, &dir, loss_threshold, r_max)
        })
        .collect::<Result<Vec<_>>>()?;
    let radius = center.norm();
    let angular = probes.iter().map(|p| (p.distance / radius).atan()).collect();
    let distances: Vec<f64> = probes.iter().map(|p| p.distance).collect();
    let uncensored: Vec<f64> = probes.iter().filter(|p| !p.censored).map(|p| p.distance).collect();
    let mean_of = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mut data = Data::new(distances.clone());
    Ok(TunnelWidthReport {
        mean: mean_of(&distances),
        mean_uncensored: (!uncensored.is_empty()).then(|| mean_of(&uncensored)),
        median: data.median(),
        p10: data.quantile(0.1),
        p90: data.quantile(0.9),
        censored: probes.iter().filter(|p| p.censored).count(),
        center,
        loss_threshold,
        r_max,
        probes,
        angular,
    })
}

/// `loss(p + r·v̂)` for every radius, with `v̂ = v / ‖v‖`.
pub fn loss_profile<O: LossOracle + ?Sized>(
    oracle: &O,
    p: &[f64],
    v: &[f64],
    radii: &[f64],
) -> Result<Vec<f64>> {
    check_dim(oracle.dim(), p.len())?;
    check_dim(oracle.dim(), v.len())?;
    let n = linalg::norm(v);
    if n == 0.0 {
        return Err(Error::InvalidArgument("direction must be nonzero".into()));
    }
    radii
        .iter()
        .map(|&r| {
            if r == 0.0 {
                return oracle.loss(p);
            }
            let mut q = p.to_vec();
            linalg::axpy(r / n, v, &mut q);
            oracle.loss(&q)
        })
        .collect()
}
