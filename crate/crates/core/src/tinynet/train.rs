use std::io::Write;

use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::connectors::Connector;
use crate::error::{check_dim, Error, Result};
use crate::io::{csv_error, fmt_num};
use crate::optim::{OptimizerConfig, Stepper, Trajectory, TrajectoryPoint};
use crate::oracle::LossOracle;
use crate::param::ParamVector;
use crate::rng;

use super::data::{Dataset, Samples};
use super::model::{self, init_params, MlpSpec, Regularization};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetOptimizer {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub l2_coeff: f64,
    pub dropout_rate: f64,
    pub epochs: usize,
    pub optimizer: NetOptimizer,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            batch_size: 32,
            l2_coeff: 0.0,
            dropout_rate: 0.0,
            epochs: 200,
            optimizer: NetOptimizer::Adam,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!("learning_rate must be >= 0, got {}", self.learning_rate)));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch_size must be >= 1".into()));
        }
        if !(self.l2_coeff >= 0.0) {
            return Err(Error::InvalidArgument(format!("l2_coeff must be >= 0, got {}", self.l2_coeff)));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::InvalidArgument(format!("dropout_rate must be in [0, 1), got {}", self.dropout_rate)));
        }
        Ok(())
    }

    fn stepper_config(&self) -> OptimizerConfig {
        let base = match self.optimizer {
            NetOptimizer::Sgd => OptimizerConfig::gd(self.learning_rate),
            NetOptimizer::Adam => OptimizerConfig::adam(self.learning_rate),
        };
        OptimizerConfig { seed: self.seed, ..base }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub test_loss: Option<f64>,
    pub test_accuracy: Option<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: ParamVector,
    /// One point per epoch boundary, epoch 0 being the initialization.
    /// Losses are train cross-entropy without dropout or penalty.
    pub trajectory: Trajectory,
    pub records: Vec<EpochRecord>,
    /// Parameters at the end of every epoch.
    pub snapshots: Vec<ParamVector>,
}

impl TrainOutcome {
    pub fn final_record(&self) -> &EpochRecord {
        self.records.last().expect("epoch 0 is always recorded")
    }

    /// Writes `epoch,train_loss,train_accuracy,test_loss,test_accuracy,radius`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["epoch", "train_loss", "train_accuracy", "test_loss", "test_accuracy", "radius"])
            .map_err(csv_error)?;
        let opt = |v: Option<f64>| v.map_or_else(String::new, fmt_num);
        for r in &self.records {
            w.write_record([
                r.epoch.to_string(),
                fmt_num(r.train_loss),
                fmt_num(r.train_accuracy),
                opt(r.test_loss),
                opt(r.test_accuracy),
                fmt_num(r.radius),
            ])
            .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Cross-entropy (no penalty) and accuracy on a sample set.
pub fn evaluate(spec: &MlpSpec, params: &[f64], samples: &Samples) -> Result<(f64, f64)> {
    let logits = model::forward(spec, params, samples.view())?;
    let loss = model::cross_entropy(&logits, &samples.labels)?;
    let predicted = model::argmax_rows(&logits);
    Ok((loss, accuracy(&predicted, &samples.labels)))
}

pub fn accuracy(predicted: &[usize], labels: &[usize]) -> f64 {
    let hits = predicted.iter().zip(labels).filter(|(p, y)| p == y).count();
    hits as f64 / labels.len() as f64
}

/// Minibatch training from the seeded initialization of an `MlpSpec`.
pub fn train(spec: &MlpSpec, data: &Dataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    train_from(spec, data, cfg, init_params(spec)?)
}

/// Minibatch training from given parameters. Each epoch shuffles the train
/// split with its own seeded stream; every step draws fresh dropout masks.
pub fn train_from(spec: &MlpSpec, data: &Dataset, cfg: &TrainConfig, init: ParamVector) -> Result<TrainOutcome> {
    spec.validate()?;
    cfg.validate()?;
    check_dim(spec.param_count(), init.len())?;
    check_dim(spec.inputs(), data.n_features())?;
    let train_set = data.train();
    let test_set = data.test();
    if train_set.is_empty() {
        return Err(Error::InvalidArgument("train split is empty".into()));
    }
    let opt = cfg.stepper_config();
    let mut stepper = Stepper::new(&opt, init.len());
    let mut p = init.into_inner();
    let mut records = Vec::with_capacity(cfg.epochs + 1);
    let mut points = Vec::with_capacity(cfg.epochs + 1);
    let mut snapshots = Vec::with_capacity(cfg.epochs);

    let mut record = |epoch: usize, p: &[f64]| -> Result<()> {
        let (train_loss, train_accuracy) = evaluate(spec, p, &train_set)?;
        let test = if test_set.is_empty() { None } else { Some(evaluate(spec, p, &test_set)?) };
        let radius = crate::linalg::norm(p);
        records.push(EpochRecord {
            epoch,
            train_loss,
            train_accuracy,
            test_loss: test.map(|t| t.0),
            test_accuracy: test.map(|t| t.1),
            radius,
        });
        points.push(TrajectoryPoint { step: epoch, loss: train_loss, radius });
        Ok(())
    };
    record(0, &p)?;

    let n = train_set.len();
    let mut step = 0usize;
    for epoch in 1..=cfg.epochs {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng::labeled(cfg.seed, "shuffle", epoch as u64));
        for chunk in order.chunks(cfg.batch_size) {
            step += 1;
            let x = model::take_rows(train_set.view(), chunk);
            let y: Vec<usize> = chunk.iter().map(|&i| train_set.labels[i]).collect();
            let reg = Regularization {
                l2_coeff: cfg.l2_coeff,
                dropout_rate: cfg.dropout_rate,
                dropout_seed: rng::derive_seed(cfg.seed, "dropout", step as u64),
            };
            let (loss, grad) = model::loss_and_grad(spec, &p, x.view(), &y, reg).map_err(|e| match e {
                Error::NonFinite { .. } => Error::NonFiniteStep { step },
                e => e,
            })?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteStep { step });
            }
            let delta = stepper.update(&grad, opt.learning_rate);
            p.iter_mut().zip(&delta).for_each(|(x, d)| *x -= d);
        }
        record(epoch, &p)?;
        snapshots.push(ParamVector::new(p.clone())?);
    }
    let params = ParamVector::new(p)?;
    Ok(TrainOutcome {
        trajectory: Trajectory { points, final_point: params.clone(), converged: true },
        params,
        records,
        snapshots,
    })
}

/// The network's loss on a fixed sample set, as a deterministic oracle:
/// mean cross-entropy plus `l2_coeff · ‖weights‖²`, no dropout.
#[derive(Debug, Clone)]
pub struct NetOracle {
    spec: MlpSpec,
    samples: Samples,
    l2_coeff: f64,
}

impl NetOracle {
    pub fn new(spec: MlpSpec, samples: Samples, l2_coeff: f64) -> Result<Self> {
        spec.validate()?;
        check_dim(spec.inputs(), samples.x.ncols())?;
        if samples.is_empty() {
            return Err(Error::InvalidArgument("oracle needs at least one sample".into()));
        }
        if !(l2_coeff >= 0.0) {
            return Err(Error::InvalidArgument(format!("l2_coeff must be >= 0, got {l2_coeff}")));
        }
        Ok(NetOracle { spec, samples, l2_coeff })
    }

    /// Full train split, no penalty.
    pub fn on_train(spec: MlpSpec, data: &Dataset) -> Result<Self> {
        NetOracle::new(spec, data.train(), 0.0)
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn samples(&self) -> &Samples {
        &self.samples
    }
}

impl LossOracle for NetOracle {
    fn dim(&self) -> usize {
        self.spec.param_count()
    }

    fn loss(&self, p: &[f64]) -> Result<f64> {
        let logits = model::forward(&self.spec, p, self.samples.view())?;
        Ok(model::cross_entropy(&logits, &self.samples.labels)? + model::l2_penalty(&self.spec, p, self.l2_coeff))
    }

    fn grad(&self, p: &[f64]) -> Result<Vec<f64>> {
        Ok(self.loss_and_grad(p)?.1)
    }

    fn loss_and_grad(&self, p: &[f64]) -> Result<(f64, Vec<f64>)> {
        let reg = Regularization { l2_coeff: self.l2_coeff, ..Default::default() };
        let (loss, grad) = model::loss_and_grad(&self.spec, p, self.samples.view(), &self.samples.labels, reg)?;
        Ok((loss, grad.into_inner()))
    }
}

/// Fraction of inputs whose predicted label at each waypoint differs from
/// the prediction at the first waypoint.
pub fn prediction_change_profile(spec: &MlpSpec, connector: &Connector, x: ArrayView2<f64>) -> Result<Vec<f64>> {
    let first = connector
        .waypoints
        .first()
        .ok_or_else(|| Error::InvalidArgument("connector has no waypoints".into()))?;
    let reference = model::predict_labels(spec, first, x)?;
    connector
        .waypoints
        .iter()
        .map(|w| {
            let labels = model::predict_labels(spec, w, x)?;
            let changed = labels.iter().zip(&reference).filter(|(a, b)| a != b).count();
            Ok(changed as f64 / reference.len().max(1) as f64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connectors::linear_interpolate;
    use crate::tinynet::data::{generate_dataset, DatasetKind};
    use crate::tinynet::model::Activation;

    fn setup() -> (MlpSpec, Dataset) {
        let spec = MlpSpec::new(vec![2, 16, 2], Activation::Tanh, 1).unwrap();
        (spec, generate_dataset(DatasetKind::TwoMoons, 200, 0.1, 3).unwrap())
    }

    #[test]
    fn zero_epochs_and_zero_lr_leave_params_alone() {
        let (spec, data) = setup();
        let init = init_params(&spec).unwrap();
        let none = train(&spec, &data, &TrainConfig { epochs: 0, ..Default::default() }).unwrap();
        assert_eq!(none.params, init);
        assert!(none.snapshots.is_empty());
        let frozen = train(&spec, &data, &TrainConfig { epochs: 3, learning_rate: 0.0, ..Default::default() }).unwrap();
        assert_eq!(frozen.params, init);
        assert_eq!(frozen.snapshots.len(), 3);
    }

    #[test]
    fn training_is_deterministic_and_learns() {
        let (spec, data) = setup();
        let cfg = TrainConfig { epochs: 60, learning_rate: 0.01, dropout_rate: 0.1, ..Default::default() };
        let a = train(&spec, &data, &cfg).unwrap();
        assert_eq!(a, train(&spec, &data, &cfg).unwrap());
        assert!(a.final_record().train_loss < 0.5 * a.records[0].train_loss);
    }

    #[test]
    fn recorded_accuracy_matches_predictions() {
        let (spec, data) = setup();
        let out = train(&spec, &data, &TrainConfig { epochs: 20, learning_rate: 0.01, ..Default::default() }).unwrap();
        let test = data.test();
        let predicted = model::predict_labels(&spec, &out.params, test.view()).unwrap();
        assert_eq!(Some(accuracy(&predicted, &test.labels)), out.final_record().test_accuracy);
    }

    #[test]
    fn oracle_matches_model() {
        let (spec, data) = setup();
        let oracle = NetOracle::new(spec.clone(), data.train(), 1e-3).unwrap();
        let p = init_params(&spec).unwrap();
        let (l, g) = oracle.loss_and_grad(&p).unwrap();
        assert_eq!(l, oracle.loss(&p).unwrap());
        assert_eq!(g.len(), spec.param_count());
    }

    #[test]
    fn profile_between_identical_params_is_flat() {
        let (spec, data) = setup();
        let p = init_params(&spec).unwrap();
        let waypoints = linear_interpolate(&p, &p, 5).unwrap();
        let c = Connector {
            order: 1,
            endpoints: vec![p.clone(), p.clone()],
            weights: vec![vec![1.0, 0.0]; 5],
            starts: waypoints.clone(),
            start_losses: vec![0.0; 5],
            waypoints,
            losses: vec![0.0; 5],
        };
        let profile = prediction_change_profile(&spec, &c, data.test().view()).unwrap();
        assert_eq!(profile, vec![0.0; 5]);
    }
}
