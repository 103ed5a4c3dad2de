//! Paths between optima: straight lines, 1-tunnels and m-connectors.
//!
//! A tunnel starts from the straight line between two optima. Every interior
//! waypoint is optimized inside the hyperplane through it that is normal to
//! the line, by projecting the line direction out of each gradient and update.
//! An m-connector does the same on a barycentric grid over the convex hull of
//! `m + 1` optima, removing the whole `m`-dimensional span of the hull.
//! Optima themselves are never moved.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::io::{csv_error, fmt_num};
use crate::linalg::{self, Projector};
use crate::optim::{minimize_projected, OptimizerConfig};
use crate::oracle::LossOracle;
use crate::param::ParamVector;

/// Largest m-connector order accepted.
pub const MAX_ORDER: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierReport {
    pub max_loss: f64,
    pub endpoint_max: f64,
    pub barrier_height: f64,
    /// Position of the peak along the path, in `[0, 1]`.
    pub argmax_fraction: f64,
    pub losses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Connector {
    /// `m`: 1 for a tunnel.
    pub order: usize,
    pub endpoints: Vec<ParamVector>,
    /// Barycentric coordinates of each waypoint's starting point.
    pub weights: Vec<Vec<f64>>,
    /// Starting points before optimization (the straight line for a tunnel).
    pub starts: Vec<ParamVector>,
    pub start_losses: Vec<f64>,
    pub waypoints: Vec<ParamVector>,
    pub losses: Vec<f64>,
}

impl Connector {
    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn max_loss(&self) -> f64 {
        self.losses.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_start_loss(&self) -> f64 {
        self.start_losses.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Displacement of each waypoint from its starting point.
    pub fn deviations(&self) -> Vec<Vec<f64>> {
        self.waypoints
            .iter()
            .zip(&self.starts)
            .map(|(w, s)| linalg::sub(w, s))
            .collect()
    }

    /// Distance travelled from the first optimum, as a fraction of the hull
    /// (the interpolation parameter for a tunnel).
    pub fn t(&self, index: usize) -> f64 {
        1.0 - self.weights[index][0]
    }

    /// Writes `index,t,loss,deviation_norm` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "t", "loss", "deviation_norm"]).map_err(csv_error)?;
        for (i, dev) in self.deviations().iter().enumerate() {
            w.write_record([
                i.to_string(),
                fmt_num(self.t(i)),
                fmt_num(self.losses[i]),
                fmt_num(linalg::norm(dev)),
            ])
            .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `k` evenly spaced points from `a` to `b`, both included exactly.
pub fn linear_interpolate(a: &[f64], b: &[f64], k: usize) -> Result<Vec<ParamVector>> {
    check_dim(a.len(), b.len())?;
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 waypoints, got {k}")));
    }
    let mut out = Vec::with_capacity(k);
    out.push(ParamVector::new(a.to_vec())?);
    for i in 1..k - 1 {
        out.push(ParamVector::new(affine_point(a, &[b], &[fraction(i, k)]))?);
    }
    out.push(ParamVector::new(b.to_vec())?);
    Ok(out)
}

fn fraction(i: usize, k: usize) -> f64 {
    i as f64 / (k - 1) as f64
}

/// `base + Σ λ_j (v_j − base)`, evaluated the same way for tunnels and
/// m-connectors so that `m = 1` reproduces a tunnel bit for bit.
fn affine_point(base: &[f64], others: &[&[f64]], lambdas: &[f64]) -> Vec<f64> {
    let mut p = base.to_vec();
    for (v, lambda) in others.iter().zip(lambdas) {
        for ((x, vi), bi) in p.iter_mut().zip(v.iter()).zip(base) {
            *x += lambda * (vi - bi);
        }
    }
    p
}

/// Loss at every waypoint and the height of the wall above the endpoints.
pub fn barrier_profile<O: LossOracle + ?Sized>(
    oracle: &O,
    waypoints: &[ParamVector],
) -> Result<BarrierReport> {
    if waypoints.len() < 2 {
        return Err(Error::InvalidArgument("a path needs at least 2 waypoints".into()));
    }
    let losses = waypoints
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let l = oracle.loss(w)?;
            if l.is_finite() {
                Ok(l)
            } else {
                Err(Error::NonFiniteStep { step: 0 }.in_segment(i))
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(barrier_from_losses(losses))
}

fn barrier_from_losses(losses: Vec<f64>) -> BarrierReport {
    let (argmax, max_loss) = losses
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, l)| if l > best.1 { (i, l) } else { best });
    let endpoint_max = losses[0].max(losses[losses.len() - 1]);
    BarrierReport {
        max_loss,
        endpoint_max,
        barrier_height: max_loss - endpoint_max,
        argmax_fraction: argmax as f64 / (losses.len() - 1) as f64,
        losses,
    }
}

/// Builds a 1-tunnel with `waypoints` points (endpoints included) between two
/// optima.
pub fn build_tunnel<O: LossOracle + ?Sized>(
    oracle: &O,
    a: &[f64],
    b: &[f64],
    waypoints: usize,
    inner: &OptimizerConfig,
) -> Result<Connector> {
    check_dim(oracle.dim(), a.len())?;
    check_dim(oracle.dim(), b.len())?;
    let starts = linear_interpolate(a, b, waypoints)?;
    let weights = (0..waypoints)
        .map(|i| {
            let t = fraction(i, waypoints);
            vec![1.0 - t, t]
        })
        .collect();
    let endpoints = vec![starts[0].clone(), starts[waypoints - 1].clone()];
    let is_vertex = |i: usize| i == 0 || i == waypoints - 1;
    let direction = linalg::sub(b, a);
    if waypoints > 2 && linalg::norm(&direction) == 0.0 {
        // coincident optima: nothing to project against, every waypoint is the optimum
        let loss = oracle.loss(a)?;
        return Ok(Connector {
            order: 1,
            endpoints,
            weights,
            waypoints: starts.clone(),
            starts,
            start_losses: vec![loss; waypoints],
            losses: vec![loss; waypoints],
        });
    }
    let constraint = if waypoints > 2 {
        Some(Projector::complement_of(vec![direction])?)
    } else {
        None
    };
    optimize_starts(oracle, 1, endpoints, weights, starts, is_vertex, constraint.as_ref(), inner)
}

#[allow(clippy::too_many_arguments)]
fn optimize_starts<O: LossOracle + ?Sized>(
    oracle: &O,
    order: usize,
    endpoints: Vec<ParamVector>,
    weights: Vec<Vec<f64>>,
    starts: Vec<ParamVector>,
    is_vertex: impl Fn(usize) -> bool + Sync,
    constraint: Option<&Projector>,
    inner: &OptimizerConfig,
) -> Result<Connector> {
    inner.validate()?;
    let results = (0..starts.len())
        .into_par_iter()
        .map(|i| -> Result<(ParamVector, f64, f64)> {
            let start_loss = oracle.loss(&starts[i]).map_err(|e| e.in_segment(i))?;
            match constraint {
                Some(c) if !is_vertex(i) => {
                    let run = minimize_projected(oracle, &starts[i], inner, c)
                        .map_err(|e| e.in_segment(i))?;
                    let loss = run.final_loss();
                    Ok((run.final_point, loss, start_loss))
                }
                _ => Ok((starts[i].clone(), start_loss, start_loss)),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut waypoints = Vec::with_capacity(results.len());
    let mut losses = Vec::with_capacity(results.len());
    let mut start_losses = Vec::with_capacity(results.len());
    for (w, l, s) in results {
        waypoints.push(w);
        losses.push(l);
        start_losses.push(s);
    }
    Ok(Connector {
        order,
        endpoints,
        weights,
        starts,
        start_losses,
        waypoints,
        losses,
    })
}

/// Barycentric grid: every composition of `points_per_edge - 1` into `m + 1`
/// non-negative parts, normalized. For `m = 1` the order runs from the first
/// optimum to the second.
pub fn barycentric_grid(m: usize, points_per_edge: usize) -> Vec<Vec<f64>> {
    let total = points_per_edge.saturating_sub(1);
    let mut out = Vec::new();
    let mut tail = vec![0usize; m];
    fn rec(pos: usize, remaining: usize, tail: &mut Vec<usize>, total: usize, out: &mut Vec<Vec<f64>>) {
        if pos == tail.len() {
            let mut w = Vec::with_capacity(tail.len() + 1);
            w.push(remaining as f64 / total as f64);
            w.extend(tail.iter().map(|&c| c as f64 / total as f64));
            out.push(w);
            return;
        }
        for c in 0..=remaining {
            tail[pos] = c;
            rec(pos + 1, remaining - c, tail, total, out);
        }
    }
    if total == 0 {
        return out;
    }
    rec(0, total, &mut tail, total, &mut out);
    out
}

fn hull_constraint(optima: &[ParamVector]) -> Result<Projector> {
    let base = &optima[0];
    let spans: Vec<Vec<f64>> = optima[1..].iter().map(|o| linalg::sub(o, base)).collect();
    Projector::complement_of(spans).map_err(|_| Error::AffinelyDependent)
}

fn validate_optima<O: LossOracle + ?Sized>(oracle: &O, optima: &[ParamVector]) -> Result<usize> {
    if optima.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "an m-connector needs at least 2 optima, got {}",
            optima.len()
        )));
    }
    let m = optima.len() - 1;
    if m > MAX_ORDER {
        return Err(Error::InvalidArgument(format!("order m={m} exceeds {MAX_ORDER}")));
    }
    if m >= oracle.dim() {
        return Err(Error::InvalidArgument(format!(
            "order m={m} leaves no free directions in dimension {}",
            oracle.dim()
        )));
    }
    for o in optima {
        check_dim(oracle.dim(), o.len())?;
    }
    Ok(m)
}

/// Optimizes the hull point with barycentric coordinates `weights` inside the
/// `(D - m)`-dimensional slice orthogonal to the hull.
pub fn optimize_in_hull<O: LossOracle + ?Sized>(
    oracle: &O,
    optima: &[ParamVector],
    weights: &[f64],
    inner: &OptimizerConfig,
) -> Result<(ParamVector, f64)> {
    let m = validate_optima(oracle, optima)?;
    check_dim(m + 1, weights.len())?;
    let constraint = hull_constraint(optima)?;
    let others: Vec<&[f64]> = optima[1..].iter().map(|o| o.as_slice()).collect();
    let start = affine_point(&optima[0], &others, &weights[1..]);
    let run = minimize_projected(oracle, &start, inner, &constraint)?;
    let loss = run.final_loss();
    Ok((run.final_point, loss))
}

/// Builds an m-connector among `m + 1` optima on a barycentric grid with
/// `grid_points_per_edge` points along every edge of the hull.
pub fn build_m_connector<O: LossOracle + ?Sized>(
    oracle: &O,
    optima: &[ParamVector],
    grid_points_per_edge: usize,
    inner: &OptimizerConfig,
) -> Result<Connector> {
    let m = validate_optima(oracle, optima)?;
    if grid_points_per_edge < 2 {
        return Err(Error::InvalidArgument("need at least 2 grid points per edge".into()));
    }
    let constraint = hull_constraint(optima)?;
    let weights = barycentric_grid(m, grid_points_per_edge);
    let others: Vec<&[f64]> = optima[1..].iter().map(|o| o.as_slice()).collect();
    let vertex_of = |w: &[f64]| w.iter().position(|&x| x == 1.0);
    let starts = weights
        .iter()
        .map(|w| match vertex_of(w) {
            Some(v) => Ok(optima[v].clone()),
            None => ParamVector::new(affine_point(&optima[0], &others, &w[1..])),
        })
        .collect::<Result<Vec<_>>>()?;
    let vertex_flags: Vec<bool> = weights.iter().map(|w| vertex_of(w).is_some()).collect();
    optimize_starts(
        oracle,
        m,
        optima.to_vec(),
        weights,
        starts,
        |i| vertex_flags[i],
        Some(&constraint),
        inner,
    )
}

/// Largest loss over `q` evenly spaced points strictly inside every segment
/// joining consecutive waypoints. `None` when `q = 0`.
pub fn sub_segment_max<O: LossOracle + ?Sized>(
    oracle: &O,
    connector: &Connector,
    q: usize,
) -> Result<Option<f64>> {
    if q == 0 {
        return Ok(None);
    }
    let mut worst = f64::NEG_INFINITY;
    for pair in connector.waypoints.windows(2) {
        let pts = linear_interpolate(&pair[0], &pair[1], q + 2)?;
        for p in &pts[1..=q] {
            worst = worst.max(oracle.loss(p)?);
        }
    }
    Ok(Some(worst))
}

/// Pairwise cosines between waypoint deviations. Entries involving a
/// deviation shorter than `1e-9` are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineMatrix {
    pub entries: Vec<Vec<Option<f64>>>,
}

impl CosineMatrix {
    /// Square matrix with a leading `index` column and a header of waypoint
    /// indices; degenerate entries are written as `undefined`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let header = std::iter::once("index".to_string()).chain((0..self.entries.len()).map(|j| j.to_string()));
        w.write_record(header).map_err(csv_error)?;
        for (i, row) in self.entries.iter().enumerate() {
            let cells = row.iter().map(|e| e.map_or_else(|| "undefined".to_string(), fmt_num));
            w.write_record(std::iter::once(i.to_string()).chain(cells)).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

const DEGENERATE_NORM: f64 = 1e-9;

pub fn deviation_cosines(connector: &Connector) -> CosineMatrix {
    let devs = connector.deviations();
    let norms: Vec<f64> = devs.iter().map(|d| linalg::norm(d)).collect();
    let entries = (0..devs.len())
        .map(|i| {
            (0..devs.len())
                .map(|j| {
                    if norms[i] < DEGENERATE_NORM || norms[j] < DEGENERATE_NORM {
                        None
                    } else if i == j {
                        Some(1.0)
                    } else {
                        Some(linalg::dot(&devs[i], &devs[j]) / (norms[i] * norms[j]))
                    }
                })
                .collect()
        })
        .collect();
    CosineMatrix { entries }
}

/// How deviations group on either side of the wedge crossing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationClusters {
    /// First waypoint index of the second half.
    pub split_index: usize,
    /// Mean cosine over pairs inside the same half.
    pub within_mean: f64,
    /// Mean absolute cosine over pairs from different halves.
    pub cross_mean_abs: f64,
}

/// Splits interior waypoints at the peak of the starting-path loss (the
/// midpoint when the peak sits within 2 waypoints of an end) and averages the
/// defined cosines within and across the halves.
pub fn deviation_clusters(connector: &Connector, cosines: &CosineMatrix) -> DeviationClusters {
    let k = connector.len();
    let argmax = connector
        .start_losses
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &l)| if l > best.1 { (i, l) } else { best })
        .0;
    let split_index = if argmax < 2 || argmax + 2 > k.saturating_sub(1) {
        k / 2
    } else {
        argmax
    };
    let interior = 1..k.saturating_sub(1);
    let (mut within, mut n_within, mut cross, mut n_cross) = (0.0, 0, 0.0, 0);
    for i in interior.clone() {
        for j in interior.clone().filter(|&j| j > i) {
            if let Some(c) = cosines.entries[i][j] {
                if (i < split_index) == (j < split_index) {
                    within += c;
                    n_within += 1;
                } else {
                    cross += c.abs();
                    n_cross += 1;
                }
            }
        }
    }
    let mean = |s: f64, n: usize| if n == 0 { f64::NAN } else { s / n as f64 };
    DeviationClusters {
        split_index,
        within_mean: mean(within, n_within),
        cross_mean_abs: mean(cross, n_cross),
    }
}
