use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use statrs::statistics::{Data, OrderStatistics};

use crate::connectors::{
    barrier_profile, build_m_connector, build_tunnel, deviation_clusters, deviation_cosines, linear_interpolate,
    optimize_in_hull, sub_segment_max, Connector,
};
use crate::ensembling::{swa_net, swa_toy, write_sweep_csv, SwaReport};
use crate::error::{Error, Result};
use crate::io::{fmt_num, write_csv, write_json};
use crate::linalg;
use crate::optim::{hyperplane_minimize, minimize, random_hyperplane, CyclicalSchedule, OptimizerConfig};
use crate::param::ParamVector;
use crate::probing::{radial_tunnel_width, short_direction_count, ShortDirectionMethod};
use crate::rng;
use crate::tinynet::checkpoint::{self, CheckpointHeader};
use crate::tinynet::{prediction_change_profile, Split};

use super::config::{default_output_dir, ensure_dir, Landscape, LandscapeSpec};
use super::CommandName;

/// Connector JSON sidecar written by `tunnel` and `m-connector`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectorFile {
    pub m: usize,
    pub landscape: LandscapeSpec,
    pub inner: OptimizerConfig,
    pub connector: Connector,
}

impl ConnectorFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read connector {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

trait Experiment: Serialize + DeserializeOwned {
    fn output_dir(&self) -> &Path;

    /// Runs the experiment, filling in defaults that depend on intermediate
    /// results.
    fn run(&mut self) -> Result<Map<String, Value>>;
}

pub(super) fn parse<T: DeserializeOwned>(value: Value) -> Result<T> {
    serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))
}

fn execute<E: Experiment>(value: Value) -> Result<Map<String, Value>> {
    let mut cfg: E = parse(value)?;
    let dir = cfg.output_dir().to_path_buf();
    ensure_dir(&dir)?;
    let resolved = dir.join("resolved_config.json");
    write_json(&resolved, &cfg)?;
    let mut summary = cfg.run()?;
    write_json(&resolved, &cfg)?;
    summary.insert("output_dir".into(), dir.to_string_lossy().into_owned().into());
    Ok(summary)
}

pub(super) fn dispatch(command: CommandName, value: Value) -> Result<Map<String, Value>> {
    match command {
        CommandName::ToyOptimize => execute::<ToyOptimize>(value),
        CommandName::HyperplaneSweep => execute::<HyperplaneSweep>(value),
        CommandName::Tunnel => execute::<Tunnel>(value),
        CommandName::MConnector => execute::<MConnector>(value),
        CommandName::ProbeWidth => execute::<ProbeWidth>(value),
        CommandName::ShortDirs => execute::<ShortDirs>(value),
        CommandName::TrainNet => execute::<TrainNet>(value),
        CommandName::Barrier => execute::<Barrier>(value),
        CommandName::SwaCompare => execute::<SwaCompare>(value),
        CommandName::DeviationCosines => execute::<DeviationCosines>(value),
        CommandName::PredictionProfile => execute::<PredictionProfile>(value),
        CommandName::Sweep => Err(Error::Config("sweeps cannot be nested".into())),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn median(values: &[f64]) -> f64 {
    Data::new(values.to_vec()).median()
}

fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, Value::from)
}

fn one() -> usize {
    1
}

fn twenty() -> usize {
    20
}

fn twenty_one() -> usize {
    21
}

fn resolve_optimizer(slot: &mut Option<OptimizerConfig>, spec: &LandscapeSpec) -> Result<OptimizerConfig> {
    let cfg = slot.get_or_insert_with(|| spec.optimizer()).clone();
    cfg.validate()?;
    Ok(cfg)
}

fn write_connector_files(dir: &Path, file: &ConnectorFile) -> Result<()> {
    file.connector.write_csv(create(&dir.join("connector.csv"))?)?;
    write_json(&dir.join("connector.json"), file)
}

// toy-optimize

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ToyOptimize {
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    landscape: LandscapeSpec,
    #[serde(default = "one")]
    runs: usize,
    #[serde(default)]
    optimizer: Option<OptimizerConfig>,
}

impl Experiment for ToyOptimize {
    fn output_dir(&self) -> &Path {
        &self.output_dir
    }

    fn run(&mut self) -> Result<Map<String, Value>> {
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        let opt = resolve_optimizer(&mut self.optimizer, &self.landscape)?;
        let land = Landscape::build(&self.landscape)?;
        let seed = self.seed;
        let runs = (0..self.runs as u64)
            .into_par_iter()
            .map(|i| minimize(land.oracle(), &land.start(seed, i)?, &opt))
            .collect::<Result<Vec<_>>>()?;
        let traj_dir = self.output_dir.join("trajectories");
        ensure_dir(&traj_dir)?;
        let mut rows = Vec::with_capacity(runs.len());
        for (i, t) in runs.iter().enumerate() {
            t.write_csv(create(&traj_dir.join(format!("run_{i}.csv")))?)?;
            let wedge = match land.toy() {
                Some(toy) => toy
                    .nearest_wedge(&t.final_point)?
                    .axes()
                    .iter()
                    .map(|a| a.to_string())
                    .collect::<Vec<_>>()
                    .join(" "),
                None => String::new(),
            };
            let last = t.points.last().expect("trajectory has points");
            rows.push(vec![
                i.to_string(),
                fmt_num(t.initial_loss()),
                fmt_num(t.final_loss()),
                fmt_num(last.radius),
                last.step.to_string(),
                t.converged.to_string(),
                wedge,
            ]);
        }
        write_csv(
            &self.output_dir.join("runs.csv"),
            &["run", "initial_loss", "final_loss", "final_radius", "steps", "converged", "wedge"],
            rows,
        )?;
        let finals: Vec<&ParamVector> = runs.iter().map(|t| &t.final_point).collect();
        write_json(&self.output_dir.join("final_points.json"), &finals)?;
        let losses: Vec<f64> = runs.iter().map(|t| t.final_loss()).collect();
        Ok(Map::from_iter([
            ("runs".into(), runs.len().into()),
            ("converged".into(), runs.iter().filter(|t| t.converged).count().into()),
            ("median_final_loss".into(), median(&losses).into()),
        ]))
    }
}

// hyperplane-sweep

fn default_success_threshold() -> f64 {
    1e-3
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HyperplaneSweep {
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    landscape: LandscapeSpec,
    dims: Vec<usize>,
    #[serde(default = "twenty")]
    seeds_per_dim: usize,
    #[serde(default = "default_success_threshold")]
    success_threshold: f64,
    #[serde(default)]
    optimizer: Option<OptimizerConfig>,
}

impl Experiment for HyperplaneSweep {
    fn output_dir(&self) -> &Path {
        &self.output_dir
    }

    fn run(&mut self) -> Result<Map<String, Value>> {
        if self.dims.is_empty() || self.seeds_per_dim == 0 {
            return Err(Error::Config("dims and seeds_per_dim must be non-empty".into()));
        }
        let opt = resolve_optimizer(&mut self.optimizer, &self.landscape)?;
        let land = Landscape::build(&self.landscape)?;
        let tasks: Vec<(usize, u64)> = self
            .dims
            .iter()
            .flat_map(|&d| (0..self.seeds_per_dim as u64).map(move |j| (d, j)))
            .collect();
        let master = self.seed;
        let losses = tasks
            .par_iter()
            .map(|&(d, j)| {
                // The same offset and basis stream for every d.
                let run_seed = rng::derive_seed(master, "hyperplane", j);
                let plane = random_hyperplane(land.dim(), d, land.start(run_seed, 0)?, run_seed)?;
                let run = hyperplane_minimize(land.oracle(), &plane, &vec![0.0; d], &opt)?;
                Ok(run.trajectory.final_loss())
            })
            .collect::<Result<Vec<f64>>>()?;
        write_csv(
            &self.output_dir.join("hyperplane.csv"),
            &["d", "seed", "final_loss"],
            tasks.iter().zip(&losses).map(|(&(d, j), &l)| [d.to_string(), j.to_string(), fmt_num(l)]),
        )?;
        let mut rates = Vec::new();
        for (k, &d) in self.dims.iter().enumerate() {
            let chunk = &losses[k * self.seeds_per_dim..(k + 1) * self.seeds_per_dim];
            let hits = chunk.iter().filter(|&&l| l <= self.success_threshold).count();
            rates.push((d, hits, hits as f64 / chunk.len() as f64));
        }
        write_csv(
            &self.output_dir.join("success.csv"),
            &["d", "successes", "runs", "success_rate"],
            rates
                .iter()
                .map(|&(d, hits, rate)| [d.to_string(), hits.to_string(), self.seeds_per_dim.to_string(), fmt_num(rate)]),
        )?;
        // Smallest d from which on at least half the runs succeed.
        let mut sorted = rates.clone();
        sorted.sort_by_key(|r| r.0);
        let boundary = sorted
            .iter()
            .enumerate()
            .find(|(k, _)| sorted[*k..].iter().all(|r| r.2 >= 0.5))
            .map(|(_, r)| r.0);
        Ok(Map::from_iter([
            ("runs".into(), losses.len().into()),
            ("boundary".into(), boundary.map_or(Value::Null, Value::from)),
        ]))
    }
}

// tunnel

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Tunnel {
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    landscape: LandscapeSpec,
    #[serde(default = "twenty_one")]
    waypoints: usize,
    #[serde(default)]
    inner: Option<OptimizerConfig>,
    /// Two explicit endpoints; otherwise two fresh optima.
    #[serde(default)]
    endpoints: Option<Vec<Vec<f64>>>,
    /// Extra points checked inside every segment; 0 disables the check.
    #[serde(default)]
    sub_segment_points: usize,
}

impl Experiment for Tunnel {
    fn output_dir(&self) -> &Path {
        &self.output_dir
    }

    fn run(&mut self) -> Result<Map<String, Value>> {
        let inner = resolve_optimizer(&mut self.inner, &self.landscape)?;
        let land = Landscape::build(&self.landscape)?;
        let ends = land.endpoints(self.seed, 2, self.endpoints.as_ref())?;
        let oracle = land.oracle();
        let connector = build_tunnel(oracle, &ends[0], &ends[1], self.waypoints, &inner)?;
        let line = barrier_profile(oracle, &linear_interpolate(&ends[0], &ends[1], self.waypoints)?)?;
        let sub_max = sub_segment_max(oracle, &connector, self.sub_segment_points)?;
        let cosines = deviation_cosines(&connector);
        let clusters = deviation_clusters(&connector, &cosines);
        let dir = &self.output_dir;
        cosines.write_file(&dir.join("cosines.csv"))?;
        write_json(&dir.join("clusters.json"), &clusters)?;
        write_csv(
            &dir.join("linear.csv"),
            &["index", "t", "loss"],
            line.losses.iter().enumerate().map(|(i, &l)| {
                [i.to_string(), fmt_num(i as f64 / (line.losses.len() - 1) as f64), fmt_num(l)]
            }),
        )?;
        let summary = Map::from_iter([
            ("max_loss".into(), connector.max_loss().into()),
            ("linear_max_loss".into(), line.max_loss.into()),
            ("endpoint_max".into(), line.endpoint_max.into()),
            ("linear_barrier_height".into(), line.barrier_height.into()),
            ("sub_segment_max".into(), opt_num(sub_max)),
            ("within_mean".into(), clusters.within_mean.into()),
            ("cross_mean_abs".into(), clusters.cross_mean_abs.into()),
        ]);
        write_connector_files(dir, &ConnectorFile { m: 1, landscape: self.landscape.clone(), inner, connector })?;
        Ok(summary)
    }
}

// m-connector

fn five() -> usize {
    5
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MConnector {
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    landscape: LandscapeSpec,
    m: usize,
    #[serde(default = "five")]
    grid_points_per_edge: usize,
    #[serde(default)]
    inner: Option<OptimizerConfig>,
    /// `m + 1` explicit optima; otherwise fresh ones.
    #[serde(default)]
    endpoints: Option<Vec<Vec<f64>>>,
}

impl Experiment for MConnector {
    fn output_dir(&self) -> &Path {
        &self.output_dir
    }

    fn run(&mut self) -> Result<Map<String, Value>> {
        if self.m == 0 {
            return Err(Error::Config("m must be at least 1".into()));
        }
        let inner = resolve_optimizer(&mut self.inner, &self.landscape)?;
        let land = Landscape::build(&self.landscape)?;
        let optima = land.endpoints(self.seed, self.m + 1, self.endpoints.as_ref())?;
        let connector = build_m_connector(land.oracle(), &optima, self.grid_points_per_edge, &inner)?;
        let mut header = vec!["index".to_string()];
        header.extend((0..=self.m).map(|j| format!("w{j}")));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        write_csv(
            &self.output_dir.join("weights.csv"),
            &header,
            connector.weights.iter().enumerate().map(|(i, w)| {
                std::iter::once(i.to_string()).chain(w.iter().map(|&x| fmt_num(x)))
            }),
        )?;
        let summary = Map::from_iter([
            ("points".into(), connector.len().into()),
            ("max_loss".into(), connector.max_loss().into()),
            ("max_start_loss".into(), connector.max_start_loss().into()),
        ]);
        let file = ConnectorFile { m: self.m, landscape: self.landscape.clone(), inner, connector };
        write_connector_files(&self.output_dir, &file)?;
        Ok(summary)
    }
}

// probe-width

fn two_hundred() -> usize {
    200
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbeWidth {
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    landscape: LandscapeSpec,
    #[serde(default = "two_hundred")]
    directions: usize,
    /// Explicit center; otherwise an optimum (projected onto its wedge on
    /// the toy landscape).
    #[serde(default)]
    center: Option<Vec<f64>>,
    /// Rescales the center to this norm.
    #[serde(default)]
    center_radius: Option<f64>,
    /// Defaults to halfway between the center loss and the loss at a random
    /// start.
    #[serde(default)]
    loss_threshold: Option<f64>,
    /// Defaults to ten times the center norm.
    #[serde(default)]
    r_max: Option<f64>,
}

impl Experiment for ProbeWidth {
    fn output_dir(&self) -> &Path {
        &self.output_dir
    }

    fn run(&mut self) -> Result<Map<String, Value>> {
        let land = Landscape::build(&self.landscape)?;
        let oracle = land.oracle();
        let mut center = match &self.center {
            Some(c) => {
                crate::error::check_dim(land.dim(), c.len())?;
                c.clone()
            }
            None => {
                let opt = land.optimum(self.seed, 0)?;
                match land.toy() {
                    Some(toy) => toy.project_to_wedge(&opt)?.into_inner(),
                    None => opt.into_inner(),
                }
            }
        };
        if let Some(r) = self.center_radius {
            let norm = linalg::norm(&center);
            if !(r > 0.0 && norm > 0.0) {
                return Err(Error::Config("center_radius needs a positive radius and a nonzero center".into()));
            }
            center.iter_mut().for_each(|x| *x *= r / norm);
        }
        let center_loss = oracle.loss(&center)?;
        let threshold = match self.loss_threshold {
            Some(t) => t,
            None => {
                let start_loss = oracle.loss(&land.start(self.seed, 0)?)?;
                center_loss + 0.5 * (start_loss - center_loss)
            }
        };
        self.loss_threshold = Some(threshold);
        let r_max = *self.r_max.get_or_insert(10.0 * linalg::norm(&center));
        let report = radial_tunnel_width(
            oracle,
            &center,
            threshold,
            self.directions,
            r_max,
            rng::derive_seed(self.seed, "probe", 0),
        )?;
        report.write_csv(create(&self.output_dir.join("widths.csv"))?)?;
        let summary = json!({
            "center_loss": center_loss,
            "center_norm": report.center.norm(),
            "loss_threshold": threshold,
            "r_max": r_max,
            "directions": report.probes.len(),
            "mean": report.mean,
            "mean_uncensored": report.mean_uncensored,
            "median": report.median,
            "p10": report.p10,
            "p90": report.p90,
            "censored": report.censored,
            "relative_std": report.relative_std(),
            "angular_median": median(&report.angular),
        });
        write_json(&self.output_dir.join("width_summary.json"), &summary)?;
        match summary {
            Value::Object(map) => Ok(map),
            _ => unreachable!(),
        }
    }
}

// short-dirs

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ProbePoint {
    #[default]
    Optimum,
    TunnelMidpoint,
    HullCenter,
}

fn two() -> usize {
    2
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShortDirs {
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    landscape: LandscapeSpec,
    #[serde(default)]
    at: ProbePoint,
    /// Hull order for `hull_center`.
    #[serde(default = "two")]
    m: usize,
    /// Tunnel length for `tunnel_midpoint`.
    #[serde(default = "twenty_one")]
    waypoints: usize,
    #[serde(default)]
    inner: Option<OptimizerConfig>,
    #[serde(default = "half")]
    kappa: f64,
    #[serde(default)]
    method: ShortDirectionMethod,
}

impl Experiment for ShortDirs {
    fn output_dir(&self) -> &Path {
        &self.output_dir
    }

    fn run(&mut self) -> Result<Map<String, Value>> {
        let inner = resolve_optimizer(&mut self.inner, &self.landscape)?;
        let land = Landscape::build(&self.landscape)?;
        let oracle = land.oracle();
        let point = match self.at {
            ProbePoint::Optimum => land.optimum(self.seed, 0)?,
            ProbePoint::TunnelMidpoint => {
                let ends = land.optima(self.seed, 2)?;
                let mut tunnel = build_tunnel(oracle, &ends[0], &ends[1], self.waypoints, &inner)?;
                tunnel.waypoints.swap_remove(self.waypoints / 2)
            }
            ProbePoint::HullCenter => {
                if self.m == 0 {
                    return Err(Error::Config("m must be at least 1".into()));
                }
                let optima = land.optima(self.seed, self.m + 1)?;
                let weights = vec![1.0 / (self.m + 1) as f64; self.m + 1];
                optimize_in_hull(oracle, &optima, &weights, &inner)?.0
            }
        };
        let report = short_direction_count(oracle, &point, self.kappa, self.method)?;
        report.write_eigenvalues(create(&self.output_dir.join("eigenvalues.txt"))?)?;
        let point_loss = oracle.loss(&point)?;
        write_json(
            &self.output_dir.join("short_dirs.json"),
            &json!({ "point_loss": point_loss, "report": report }),
        )?;
        Ok(Map::from_iter([
            ("count".into(), report.count.into()),
            ("dim".into(), land.dim().into()),
            ("point_loss".into(), point_loss.into()),
            ("asymmetry".into(), opt_num(report.asymmetry)),
        ]))
    }
}

// train-net

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainNet {
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    landscape: LandscapeSpec,
}

impl Experiment for TrainNet {
    fn output_dir(&self) -> &Path {
        &self.output_dir
    }

    fn run(&mut self) -> Result<Map<String, Value>> {
        let land = Landscape::build(&self.landscape)?;
        let (spec, train_seed) = land
            .run_spec(self.seed, 0)
            .ok_or_else(|| Error::Config("train-net needs a net landscape".into()))?;
        let outcome = land.train_run(self.seed, 0)?;
        outcome.write_csv(create(&self.output_dir.join("epochs.csv"))?)?;
        checkpoint::save(
            &self.output_dir.join("model.wsck"),
            &CheckpointHeader { spec, seed: train_seed },
            &outcome.params,
        )?;
        let last = outcome.final_record();
        Ok(Map::from_iter([
            ("params".into(), outcome.params.len().into()),
            ("epochs".into(), outcome.records.len().into()),
            ("train_loss".into(), last.train_loss.into()),
            ("train_accuracy".into(), last.train_accuracy.into()),
            ("test_loss".into(), opt_num(last.test_loss)),
            ("test_accuracy".into(), opt_num(last.test_accuracy)),
        ]))
    }
}

// barrier

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Barrier {
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    landscape: LandscapeSpec,
    #[serde(default = "twenty_one")]
    points: usize,
    #[serde(default)]
    endpoints: Option<Vec<Vec<f64>>>,
    /// Profiles a saved connector's waypoints instead of a straight line.
    #[serde(default)]
    connector: Option<PathBuf>,
}

impl Experiment for Barrier {
    fn output_dir(&self) -> &Path {
        &self.output_dir
    }

    fn run(&mut self) -> Result<Map<String, Value>> {
        let land = Landscape::build(&self.landscape)?;
        let (path, ts) = match &self.connector {
            Some(file) => {
                let c = ConnectorFile::load(file)?.connector;
                let ts = (0..c.len()).map(|i| c.t(i)).collect::<Vec<_>>();
                (c.waypoints, ts)
            }
            None => {
                let ends = land.endpoints(self.seed, 2, self.endpoints.as_ref())?;
                let line = linear_interpolate(&ends[0], &ends[1], self.points)?;
                let ts = (0..line.len()).map(|i| i as f64 / (line.len() - 1) as f64).collect();
                (line, ts)
            }
        };
        let report = barrier_profile(land.oracle(), &path)?;
        write_csv(
            &self.output_dir.join("barrier.csv"),
            &["index", "t", "loss"],
            report.losses.iter().zip(&ts).enumerate().map(|(i, (&l, &t))| [i.to_string(), fmt_num(t), fmt_num(l)]),
        )?;
        write_json(&self.output_dir.join("barrier.json"), &report)?;
        Ok(Map::from_iter([
            ("max_loss".into(), report.max_loss.into()),
            ("endpoint_max".into(), report.endpoint_max.into()),
            ("barrier_height".into(), report.barrier_height.into()),
            ("argmax_fraction".into(), report.argmax_fraction.into()),
        ]))
    }
}

// swa-compare

fn default_schedule() -> CyclicalSchedule {
    CyclicalSchedule { lr_max: 0.01, lr_min: 1e-5, cycle_len: 200, n_cycles: 8 }
}

fn ten() -> usize {
    10
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SwaCompare {
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    landscape: LandscapeSpec,
    #[serde(default = "default_schedule")]
    schedule: CyclicalSchedule,
    /// Update rule; its learning-rate settings are replaced by the schedule.
    #[serde(default)]
    optimizer: OptimizerConfig,
    /// Optional extra sweep over `lr_max`, written to `swa_sweep.csv`.
    #[serde(default)]
    lr_max_grid: Vec<f64>,
    #[serde(default = "ten")]
    sweep_seeds: usize,
}

fn swa_run(
    land: &Landscape,
    p0: &[f64],
    cfg: &OptimizerConfig,
    schedule: &CyclicalSchedule,
) -> Result<SwaReport> {
    match land {
        Landscape::Toy { wedge, .. } => swa_toy(wedge, p0, cfg, schedule),
        Landscape::Net { oracle, data, .. } => swa_net(oracle, p0, cfg, schedule, &data.test()),
    }
}

impl Experiment for SwaCompare {
    fn output_dir(&self) -> &Path {
        &self.output_dir
    }

    fn run(&mut self) -> Result<Map<String, Value>> {
        let land = Landscape::build(&self.landscape)?;
        let report = swa_run(&land, &land.start(self.seed, 0)?, &self.optimizer, &self.schedule)?;
        write_json(&self.output_dir.join("swa_report.json"), &report)?;
        let wedge_of = |i: usize| -> String {
            report.wedge_ids.as_ref().map_or(String::new(), |ids| {
                ids[i].axes().iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" ")
            })
        };
        write_csv(
            &self.output_dir.join("snapshots.csv"),
            &["index", "loss", "wedge"],
            report
                .snapshot_losses
                .iter()
                .enumerate()
                .map(|(i, &l)| [i.to_string(), fmt_num(l), wedge_of(i)]),
        )?;
        let mut summary = Map::from_iter([
            ("snapshots".into(), report.snapshot_losses.len().into()),
            ("median_snapshot_loss".into(), report.median_snapshot_loss().into()),
            ("weight_avg_loss".into(), report.weight_avg_loss.into()),
            ("pred_avg_loss".into(), opt_num(report.pred_avg_loss)),
            ("same_wedge".into(), report.same_wedge.map_or(Value::Null, Value::from)),
        ]);
        if !self.lr_max_grid.is_empty() {
            let tasks: Vec<(f64, u64)> = self
                .lr_max_grid
                .iter()
                .flat_map(|&lr| (0..self.sweep_seeds as u64).map(move |s| (lr, s)))
                .collect();
            let rows = tasks
                .par_iter()
                .map(|&(lr_max, s)| {
                    let p0 = land.start(rng::derive_seed(self.seed, "swa", s), 0)?;
                    let schedule = CyclicalSchedule { lr_max, ..self.schedule };
                    Ok((s, swa_run(&land, &p0, &self.optimizer, &schedule)?))
                })
                .collect::<Result<Vec<_>>>()?;
            write_sweep_csv(create(&self.output_dir.join("swa_sweep.csv"))?, &rows)?;
            summary.insert("sweep_rows".into(), rows.len().into());
        }
        Ok(summary)
    }
}

// deviation-cosines

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DeviationCosines {
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    /// `connector.json` written by `tunnel` or `m-connector`.
    connector: PathBuf,
}

impl Experiment for DeviationCosines {
    fn output_dir(&self) -> &Path {
        &self.output_dir
    }

    fn run(&mut self) -> Result<Map<String, Value>> {
        let connector = ConnectorFile::load(&self.connector)?.connector;
        let cosines = deviation_cosines(&connector);
        let clusters = deviation_clusters(&connector, &cosines);
        cosines.write_file(&self.output_dir.join("cosines.csv"))?;
        write_json(&self.output_dir.join("clusters.json"), &clusters)?;
        Ok(Map::from_iter([
            ("points".into(), connector.len().into()),
            ("split_index".into(), clusters.split_index.into()),
            ("within_mean".into(), clusters.within_mean.into()),
            ("cross_mean_abs".into(), clusters.cross_mean_abs.into()),
        ]))
    }
}

// prediction-profile

fn test_split() -> Split {
    Split::Test
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PredictionProfile {
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    landscape: LandscapeSpec,
    connector: PathBuf,
    #[serde(default = "test_split")]
    probe: Split,
}

impl Experiment for PredictionProfile {
    fn output_dir(&self) -> &Path {
        &self.output_dir
    }

    fn run(&mut self) -> Result<Map<String, Value>> {
        let land = Landscape::build(&self.landscape)?;
        let (oracle, data) = land
            .net()
            .ok_or_else(|| Error::Config("prediction-profile needs a net landscape".into()))?;
        let connector = ConnectorFile::load(&self.connector)?.connector;
        for w in &connector.waypoints {
            crate::error::check_dim(land.dim(), w.len())?;
        }
        let samples = data.part(self.probe);
        let profile = prediction_change_profile(oracle.spec(), &connector, samples.view())?;
        write_csv(
            &self.output_dir.join("profile.csv"),
            &["index", "t", "disagreement"],
            profile
                .iter()
                .enumerate()
                .map(|(i, &p)| [i.to_string(), fmt_num(connector.t(i)), fmt_num(p)]),
        )?;
        let max = profile.iter().copied().fold(0.0, f64::max);
        Ok(Map::from_iter([
            ("points".into(), profile.len().into()),
            ("max_disagreement".into(), max.into()),
            ("final_disagreement".into(), profile.last().copied().unwrap_or(0.0).into()),
        ]))
    }
}
