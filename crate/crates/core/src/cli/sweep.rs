//! Grid sweeps over another subcommand's config.

use std::collections::BTreeSet;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::io::{fmt_num, write_csv, write_json};
use crate::rng;

use super::commands::{dispatch, parse};
use super::config::{default_output_dir, ensure_dir};
use super::CommandName;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Axis {
    /// Dotted path into the base config, e.g. `landscape.train.learning_rate`.
    key: String,
    values: Vec<Value>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepConfig {
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    command: String,
    base: Map<String, Value>,
    grid: Vec<Axis>,
    #[serde(default = "one")]
    seeds: usize,
}

/// Sets `path` (dot separated) inside `root`, creating objects on the way.
fn set_path(root: &mut Map<String, Value>, path: &str, value: Value) -> Result<()> {
    let mut parts = path.split('.').peekable();
    let mut node = root;
    while let Some(part) = parts.next() {
        if part.is_empty() {
            return Err(Error::Config(format!("bad grid key `{path}`")));
        }
        if parts.peek().is_none() {
            node.insert(part.to_string(), value);
            return Ok(());
        }
        let child = node.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
        node = child
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("grid key `{path}`: `{part}` is not an object")))?;
    }
    unreachable!("split yields at least one part")
}

fn cell_values(grid: &[Axis]) -> Vec<Vec<Value>> {
    grid.iter().fold(vec![Vec::new()], |cells, axis| {
        cells
            .iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |v| {
                    let mut next = prefix.clone();
                    next.push(v.clone());
                    next
                })
            })
            .collect()
    })
}

fn cell_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.as_f64().map_or_else(|| n.to_string(), |x| {
            if n.is_f64() {
                fmt_num(x)
            } else {
                n.to_string()
            }
        }),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

struct CellRun {
    values: Vec<Value>,
    seed_index: usize,
    seed: u64,
    outcome: Result<Map<String, Value>>,
}

pub(super) fn run(value: Value) -> Result<Map<String, Value>> {
    let cfg: SweepConfig = parse(value)?;
    let command = CommandName::parse(&cfg.command)
        .filter(|c| *c != CommandName::Sweep)
        .ok_or_else(|| Error::Config(format!("unknown sweep command `{}`", cfg.command)))?;
    if cfg.grid.is_empty() || cfg.grid.iter().any(|a| a.values.is_empty()) {
        return Err(Error::Config("grid is empty".into()));
    }
    if cfg.grid.len() > 2 {
        return Err(Error::Config("grid takes one or two keys".into()));
    }
    if cfg.seeds == 0 {
        return Err(Error::Config("seeds must be at least 1".into()));
    }
    ensure_dir(&cfg.output_dir)?;
    write_json(&cfg.output_dir.join("resolved_config.json"), &cfg)?;

    let cells = cell_values(&cfg.grid);
    let tasks: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..cfg.seeds).map(move |s| (c, s))).collect();
    // Results are gathered in task order, so rows come out by cell index.
    let runs: Vec<CellRun> = tasks
        .par_iter()
        .map(|&(c, s)| {
            let seed = rng::derive_seed(cfg.seed, "sweep", s as u64);
            let dir = cfg.output_dir.join(format!("cell_{c}")).join(format!("seed_{s}"));
            let mut config = cfg.base.clone();
            let outcome = cfg
                .grid
                .iter()
                .zip(&cells[c])
                .try_for_each(|(axis, v)| set_path(&mut config, &axis.key, v.clone()))
                .and_then(|()| {
                    config.insert("seed".into(), seed.into());
                    config.insert("output_dir".into(), dir.to_string_lossy().into_owned().into());
                    dispatch(command, Value::Object(config))
                });
            CellRun { values: cells[c].clone(), seed_index: s, seed, outcome }
        })
        .collect();

    let metric_keys: BTreeSet<String> = runs
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok())
        .flat_map(|m| m.iter().filter(|(k, v)| k.as_str() != "output_dir" && !v.is_object() && !v.is_array()))
        .map(|(k, _)| k.clone())
        .collect();
    let mut header: Vec<String> = cfg.grid.iter().map(|a| a.key.clone()).collect();
    header.extend(["seed_index", "seed", "status", "error"].map(String::from));
    header.extend(metric_keys.iter().cloned());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();

    let mut failed = 0;
    let rows: Vec<Vec<String>> = runs
        .iter()
        .map(|r| {
            let mut row: Vec<String> = r.values.iter().map(cell_text).collect();
            row.push(r.seed_index.to_string());
            row.push(r.seed.to_string());
            match &r.outcome {
                Ok(summary) => {
                    row.push("ok".into());
                    row.push(String::new());
                    row.extend(metric_keys.iter().map(|k| summary.get(k).map_or(String::new(), cell_text)));
                }
                Err(e) => {
                    failed += 1;
                    let status = if e.is_numerical() { "numerical_error" } else { "config_error" };
                    row.push(status.into());
                    row.push(e.to_string());
                    row.extend(metric_keys.iter().map(|_| String::new()));
                }
            }
            row
        })
        .collect();
    write_csv(&cfg.output_dir.join("sweep.csv"), &header_refs, rows.iter().map(|r| r.iter().cloned()))?;
    Ok(Map::from_iter([
        ("swept".into(), command.name().into()),
        ("rows".into(), runs.len().into()),
        ("failed".into(), failed.into()),
        ("output_dir".into(), cfg.output_dir.to_string_lossy().into_owned().into()),
    ]))
}
