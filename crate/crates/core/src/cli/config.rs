use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{minimize, OptimizerConfig};
use crate::oracle::LossOracle;
use crate::param::ParamVector;
use crate::rng;
use crate::tinynet::{
    generate_dataset, init_params, load_csv, train_from, Activation, Dataset, DatasetKind, MlpSpec, NetOracle,
    TrainConfig, TrainOutcome,
};
use crate::wedge::WedgeLandscape;

pub(crate) fn default_output_dir() -> PathBuf {
    PathBuf::from("wedgelab-out")
}

fn one() -> f64 {
    1.0
}

fn tanh() -> Activation {
    Activation::Tanh
}

fn default_noise() -> f64 {
    0.2
}

/// Adam with a learning rate decaying from 1e-2 to 1e-5 over 10 000 steps.
pub fn default_toy_optimizer() -> OptimizerConfig {
    OptimizerConfig::adam(0.01).with_decay(1e-3)
}

/// Adam at 1e-3 for a fixed 3000 steps.
pub fn default_net_inner() -> OptimizerConfig {
    OptimizerConfig::adam(1e-3).with_max_steps(3000).with_tolerance(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSpec {
    Generate {
        kind: DatasetKind,
        n: usize,
        #[serde(default = "default_noise")]
        noise: f64,
        #[serde(default)]
        seed: u64,
    },
    Csv {
        path: PathBuf,
        label_column: String,
        #[serde(default)]
        seed: u64,
    },
}

impl DataSpec {
    pub fn load(&self) -> Result<Dataset> {
        match self {
            DataSpec::Generate { kind, n, noise, seed } => generate_dataset(*kind, *n, *noise, *seed),
            DataSpec::Csv { path, label_column, seed } => load_csv(path, label_column, *seed),
        }
    }
}

/// Which loss surface an experiment runs on, and how optima are found there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum LandscapeSpec {
    Toy {
        #[serde(rename = "D")]
        dim: usize,
        #[serde(rename = "n")]
        wedge_dim: usize,
        #[serde(default)]
        rotation_seed: Option<u64>,
        /// Standard deviation of random starting points.
        #[serde(default = "one")]
        init_scale: f64,
        #[serde(default = "default_toy_optimizer")]
        optimizer: OptimizerConfig,
    },
    Net {
        layer_sizes: Vec<usize>,
        #[serde(default = "tanh")]
        activation: Activation,
        data: DataSpec,
        #[serde(default)]
        train: TrainConfig,
        /// L2 penalty included in the landscape's loss (not in training).
        #[serde(default)]
        l2_coeff: f64,
    },
}

impl LandscapeSpec {
    pub fn is_net(&self) -> bool {
        matches!(self, LandscapeSpec::Net { .. })
    }

    /// Optimizer used by commands that do not configure their own: the toy
    /// landscape's optimizer, or full-batch Adam for a network.
    pub fn optimizer(&self) -> OptimizerConfig {
        match self {
            LandscapeSpec::Toy { optimizer, .. } => optimizer.clone(),
            LandscapeSpec::Net { .. } => default_net_inner(),
        }
    }
}

pub enum Landscape {
    Toy {
        wedge: WedgeLandscape,
        init_scale: f64,
        optimizer: OptimizerConfig,
    },
    Net {
        oracle: NetOracle,
        data: Dataset,
        train: TrainConfig,
    },
}

impl Landscape {
    pub fn build(spec: &LandscapeSpec) -> Result<Self> {
        match spec {
            LandscapeSpec::Toy { dim, wedge_dim, rotation_seed, init_scale, optimizer } => {
                let wedge = match rotation_seed {
                    Some(s) => WedgeLandscape::with_rotation_seed(*dim, *wedge_dim, *s)?,
                    None => WedgeLandscape::new(*dim, *wedge_dim)?,
                };
                if !(*init_scale > 0.0 && init_scale.is_finite()) {
                    return Err(Error::InvalidArgument(format!("init_scale must be > 0, got {init_scale}")));
                }
                optimizer.validate()?;
                Ok(Landscape::Toy { wedge, init_scale: *init_scale, optimizer: optimizer.clone() })
            }
            LandscapeSpec::Net { layer_sizes, activation, data, train, l2_coeff } => {
                let spec = MlpSpec::new(layer_sizes.clone(), *activation, 0)?;
                let data = data.load()?;
                if data.n_features() != spec.inputs() {
                    return Err(Error::InvalidArgument(format!(
                        "data has {} features, network expects {}",
                        data.n_features(),
                        spec.inputs()
                    )));
                }
                if data.n_classes > spec.classes() {
                    return Err(Error::InvalidArgument(format!(
                        "data has {} classes, network outputs {}",
                        data.n_classes,
                        spec.classes()
                    )));
                }
                train.validate()?;
                let oracle = NetOracle::new(spec, data.train(), *l2_coeff)?;
                Ok(Landscape::Net { oracle, data, train: train.clone() })
            }
        }
    }

    pub fn oracle(&self) -> &(dyn LossOracle + '_) {
        match self {
            Landscape::Toy { wedge, .. } => wedge,
            Landscape::Net { oracle, .. } => oracle,
        }
    }

    pub fn dim(&self) -> usize {
        self.oracle().dim()
    }

    pub fn toy(&self) -> Option<&WedgeLandscape> {
        match self {
            Landscape::Toy { wedge, .. } => Some(wedge),
            Landscape::Net { .. } => None,
        }
    }

    pub fn net(&self) -> Option<(&NetOracle, &Dataset)> {
        match self {
            Landscape::Net { oracle, data, .. } => Some((oracle, data)),
            Landscape::Toy { .. } => None,
        }
    }

    fn net_spec(oracle: &NetOracle, master: u64, index: u64) -> MlpSpec {
        MlpSpec { seed: rng::derive_seed(master, "net-init", index), ..oracle.spec().clone() }
    }

    /// Network spec and training seed of run `index`.
    pub fn run_spec(&self, master: u64, index: u64) -> Option<(MlpSpec, u64)> {
        match self {
            Landscape::Net { oracle, .. } => {
                Some((Self::net_spec(oracle, master, index), rng::derive_seed(master, "net-train", index)))
            }
            Landscape::Toy { .. } => None,
        }
    }

    /// Random starting point number `index`: Gaussian on the toy landscape,
    /// the seeded initialization for a network.
    pub fn start(&self, master: u64, index: u64) -> Result<ParamVector> {
        match self {
            Landscape::Toy { wedge, init_scale, .. } => {
                let mut r = rng::labeled(master, "start", index);
                let v = rng::standard_normal_vec(&mut r, wedge.dim());
                ParamVector::new(v.into_iter().map(|x| x * init_scale).collect())
            }
            Landscape::Net { oracle, .. } => init_params(&Self::net_spec(oracle, master, index)),
        }
    }

    /// Network training run number `index` from its own initialization.
    pub fn train_run(&self, master: u64, index: u64) -> Result<TrainOutcome> {
        match self {
            Landscape::Net { data, train, .. } => {
                let (spec, seed) = self.run_spec(master, index).expect("net landscape");
                let cfg = TrainConfig { seed, ..train.clone() };
                train_from(&spec, data, &cfg, init_params(&spec)?)
            }
            Landscape::Toy { .. } => Err(Error::InvalidArgument("training needs a net landscape".into())),
        }
    }

    /// Independently optimized point number `index`.
    pub fn optimum(&self, master: u64, index: u64) -> Result<ParamVector> {
        match self {
            Landscape::Toy { wedge, optimizer, .. } => {
                Ok(minimize(wedge, &self.start(master, index)?, optimizer)?.final_point)
            }
            Landscape::Net { .. } => Ok(self.train_run(master, index)?.params),
        }
    }

    pub fn optima(&self, master: u64, count: usize) -> Result<Vec<ParamVector>> {
        (0..count as u64).into_par_iter().map(|i| self.optimum(master, i)).collect()
    }

    /// `explicit` if given (checked against the dimension), otherwise
    /// `count` fresh optima.
    pub fn endpoints(&self, master: u64, count: usize, explicit: Option<&Vec<Vec<f64>>>) -> Result<Vec<ParamVector>> {
        match explicit {
            Some(points) => {
                if points.len() != count {
                    return Err(Error::InvalidArgument(format!("expected {count} endpoints, got {}", points.len())));
                }
                points
                    .iter()
                    .map(|p| {
                        crate::error::check_dim(self.dim(), p.len())?;
                        ParamVector::new(p.clone())
                    })
                    .collect()
            }
            None => self.optima(master, count),
        }
    }
}

pub(crate) fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path)?;
    Ok(())
}
