//! Weight averaging versus prediction averaging over cyclical-rate snapshots.

use std::io::Write;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};
use statrs::statistics::{Data, OrderStatistics};

use crate::error::{check_dim, Error, Result};
use crate::io::{csv_error, fmt_num};
use crate::optim::{snapshot_train, CyclicalSchedule, OptimizerConfig};
use crate::oracle::LossOracle;
use crate::param::ParamVector;
use crate::tinynet::{self, MlpSpec, NetOracle, Samples};
use crate::wedge::{WedgeId, WedgeLandscape};

/// Snapshots above this surrogate loss are treated as unconverged and ignored
/// when deciding whether all snapshots share a wedge.
pub const CONVERGED_LOSS: f64 = 0.1;

/// Componentwise mean.
pub fn swa_average(snapshots: &[ParamVector]) -> Result<ParamVector> {
    let first = snapshots
        .first()
        .ok_or_else(|| Error::InvalidArgument("need at least one snapshot".into()))?;
    let mut sum = vec![0.0; first.len()];
    for s in snapshots {
        check_dim(first.len(), s.len())?;
        sum.iter_mut().zip(s.iter()).for_each(|(a, b)| *a += b);
    }
    let k = snapshots.len() as f64;
    sum.iter_mut().for_each(|a| *a /= k);
    ParamVector::new(sum)
}

/// Mean of the per-snapshot softmax probabilities.
pub fn ensemble_predict(spec: &MlpSpec, snapshots: &[ParamVector], x: ArrayView2<f64>) -> Result<Array2<f64>> {
    if snapshots.is_empty() {
        return Err(Error::InvalidArgument("need at least one snapshot".into()));
    }
    let mut acc = Array2::<f64>::zeros((x.nrows(), spec.classes()));
    for s in snapshots {
        acc += &tinynet::predict_proba(spec, s, x)?;
    }
    acc /= snapshots.len() as f64;
    Ok(acc)
}

/// Mean negative log probability of the true labels.
pub fn probability_loss(probs: &Array2<f64>, labels: &[usize]) -> Result<f64> {
    check_dim(probs.nrows(), labels.len())?;
    let mut total = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        if y >= probs.ncols() {
            return Err(Error::LabelOutOfRange { label: y, classes: probs.ncols() });
        }
        total -= probs[[i, y]].max(f64::MIN_POSITIVE).ln();
    }
    Ok(total / labels.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwaReport {
    pub lr_max: f64,
    pub snapshot_losses: Vec<f64>,
    pub weight_avg_loss: f64,
    /// Networks only.
    pub pred_avg_loss: Option<f64>,
    pub weight_avg_accuracy: Option<f64>,
    pub pred_avg_accuracy: Option<f64>,
    /// Toy landscape only.
    pub wedge_ids: Option<Vec<WedgeId>>,
    pub same_wedge: Option<bool>,
}

impl SwaReport {
    pub fn median_snapshot_loss(&self) -> f64 {
        Data::new(self.snapshot_losses.clone()).median()
    }

    pub fn max_snapshot_loss(&self) -> f64 {
        self.snapshot_losses.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn check_snapshot_count(schedule: &CyclicalSchedule) -> Result<()> {
    if schedule.n_cycles < 2 {
        return Err(Error::InvalidArgument("an average needs at least two cycles".into()));
    }
    Ok(())
}

/// Whether every converged snapshot sits on the same wedge. False when fewer
/// than one snapshot converged.
fn shared_wedge(ids: &[WedgeId], losses: &[f64]) -> bool {
    let mut converged = ids.iter().zip(losses).filter(|(_, &l)| l <= CONVERGED_LOSS).map(|(id, _)| id);
    match converged.next() {
        Some(first) => converged.all(|id| id == first),
        None => false,
    }
}

pub fn swa_toy(
    landscape: &WedgeLandscape,
    p0: &[f64],
    cfg: &OptimizerConfig,
    schedule: &CyclicalSchedule,
) -> Result<SwaReport> {
    check_snapshot_count(schedule)?;
    let snapshots = snapshot_train(landscape, p0, cfg, schedule)?;
    let snapshot_losses = snapshots
        .iter()
        .map(|s| landscape.surrogate_loss(s))
        .collect::<Result<Vec<_>>>()?;
    let wedge_ids = snapshots
        .iter()
        .map(|s| landscape.nearest_wedge(s))
        .collect::<Result<Vec<_>>>()?;
    let avg = swa_average(&snapshots)?;
    Ok(SwaReport {
        lr_max: schedule.lr_max,
        weight_avg_loss: landscape.surrogate_loss(&avg)?,
        pred_avg_loss: None,
        weight_avg_accuracy: None,
        pred_avg_accuracy: None,
        same_wedge: Some(shared_wedge(&wedge_ids, &snapshot_losses)),
        wedge_ids: Some(wedge_ids),
        snapshot_losses,
    })
}

/// Trains on `oracle` (a fixed batch) and scores snapshots, their weight
/// average and their prediction average on `eval`.
pub fn swa_net(
    oracle: &NetOracle,
    p0: &[f64],
    cfg: &OptimizerConfig,
    schedule: &CyclicalSchedule,
    eval: &Samples,
) -> Result<SwaReport> {
    check_snapshot_count(schedule)?;
    if eval.is_empty() {
        return Err(Error::InvalidArgument("evaluation set is empty".into()));
    }
    let spec = oracle.spec();
    let snapshots = snapshot_train(oracle, p0, cfg, schedule)?;
    let snapshot_losses = snapshots
        .iter()
        .map(|s| Ok(tinynet::evaluate(spec, s, eval)?.0))
        .collect::<Result<Vec<_>>>()?;
    let avg = swa_average(&snapshots)?;
    let (weight_avg_loss, weight_avg_accuracy) = tinynet::evaluate(spec, &avg, eval)?;
    let probs = ensemble_predict(spec, &snapshots, eval.view())?;
    let predicted = tinynet::argmax_rows(&probs);
    Ok(SwaReport {
        lr_max: schedule.lr_max,
        snapshot_losses,
        weight_avg_loss,
        pred_avg_loss: Some(probability_loss(&probs, &eval.labels)?),
        weight_avg_accuracy: Some(weight_avg_accuracy),
        pred_avg_accuracy: Some(tinynet::accuracy(&predicted, &eval.labels)),
        wedge_ids: None,
        same_wedge: None,
    })
}

/// Generic variant for any oracle: snapshot losses and weight-average loss
/// only.
pub fn swa_oracle<O: LossOracle + ?Sized>(
    oracle: &O,
    p0: &[f64],
    cfg: &OptimizerConfig,
    schedule: &CyclicalSchedule,
) -> Result<SwaReport> {
    if let Some(toy) = oracle.as_wedge() {
        return swa_toy(toy, p0, cfg, schedule);
    }
    check_snapshot_count(schedule)?;
    let snapshots = snapshot_train(oracle, p0, cfg, schedule)?;
    let snapshot_losses = snapshots.iter().map(|s| oracle.loss(s)).collect::<Result<Vec<_>>>()?;
    let avg = swa_average(&snapshots)?;
    Ok(SwaReport {
        lr_max: schedule.lr_max,
        snapshot_losses,
        weight_avg_loss: oracle.loss(&avg)?,
        pred_avg_loss: None,
        weight_avg_accuracy: None,
        pred_avg_accuracy: None,
        wedge_ids: None,
        same_wedge: None,
    })
}

/// Writes `lr_max,seed,same_wedge,weight_avg_loss,pred_avg_loss,median_snapshot_loss`
/// rows; absent fields are left empty.
pub fn write_sweep_csv<W: Write>(out: W, rows: &[(u64, SwaReport)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lr_max", "seed", "same_wedge", "weight_avg_loss", "pred_avg_loss", "median_snapshot_loss"])
        .map_err(csv_error)?;
    for (seed, r) in rows {
        w.write_record([
            fmt_num(r.lr_max),
            seed.to_string(),
            r.same_wedge.map_or_else(String::new, |b| b.to_string()),
            fmt_num(r.weight_avg_loss),
            r.pred_avg_loss.map_or_else(String::new, fmt_num),
            fmt_num(r.median_snapshot_loss()),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}
