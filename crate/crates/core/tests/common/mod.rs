#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_wedgelab")
}

pub fn wedgelab(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

/// Writes `config` to `dir/name.json` and runs `command` on it with outputs
/// in `dir/name`.
pub fn run_config(dir: &Path, name: &str, command: &str, config: &Value) -> (Output, PathBuf) {
    let cfg = dir.join(format!("{name}.json"));
    std::fs::write(&cfg, serde_json::to_string_pretty(config).unwrap()).unwrap();
    let out = dir.join(name);
    let output = wedgelab(&[command, "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap(), "--quiet"]);
    (output, out)
}

pub fn summary(output: &Output) -> Value {
    let text = String::from_utf8_lossy(&output.stdout);
    let line = text.lines().last().unwrap_or_default();
    serde_json::from_str(line).unwrap_or(Value::Null)
}

/// Every file under `root`, keyed by relative path.
pub fn read_tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, acc: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, acc);
            } else {
                acc.insert(path.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&path).unwrap());
            }
        }
    }
    let mut acc = BTreeMap::new();
    walk(root, root, &mut acc);
    acc
}

/// Re-runs a finished run from its `resolved_config.json` into a fresh
/// directory. Returns the names of output files that differ (the output
/// directory entries of resolved configs are ignored).
pub fn rerun_differences(command: &str, first: &Path, scratch: &Path) -> Vec<String> {
    let second = scratch.join(format!("{}-rerun", first.file_name().unwrap().to_string_lossy()));
    let resolved = first.join("resolved_config.json");
    let output = wedgelab(&[
        command,
        "--config",
        resolved.to_str().unwrap(),
        "--output",
        second.to_str().unwrap(),
        "--quiet",
    ]);
    if !output.status.success() {
        return vec![format!("rerun failed: {}", String::from_utf8_lossy(&output.stderr))];
    }
    let (a, b) = (read_tree(first), read_tree(&second));
    let mut diffs = Vec::new();
    for name in a.keys().chain(b.keys().filter(|k| !a.contains_key(*k))) {
        let same = match (a.get(name), b.get(name)) {
            (Some(x), Some(y)) if name.ends_with("resolved_config.json") => {
                strip_output_dir(x) == strip_output_dir(y)
            }
            (Some(x), Some(y)) => x == y,
            _ => false,
        };
        if !same {
            diffs.push(name.display().to_string());
        }
    }
    diffs
}

fn strip_output_dir(bytes: &[u8]) -> Value {
    let mut v: Value = serde_json::from_slice(bytes).unwrap();
    v.as_object_mut().unwrap().remove("output_dir");
    v
}

pub fn toy(dim: usize, wedge_dim: usize) -> Value {
    json!({"kind": "toy", "D": dim, "n": wedge_dim})
}

pub fn small_net() -> Value {
    json!({
        "kind": "net",
        "layer_sizes": [2, 8, 2],
        "data": {"source": "generate", "kind": "two_moons", "n": 100, "noise": 0.2, "seed": 0},
        "train": {"epochs": 5, "learning_rate": 0.01}
    })
}

/// One small config per subcommand, in an order where `deviation-cosines`
/// and `prediction-profile` find the connectors written before them.
pub fn every_subcommand(dir: &Path) -> Vec<(&'static str, &'static str, Value)> {
    let toy_tunnel = dir.join("tunnel").join("connector.json");
    let net_tunnel = dir.join("tunnel-net").join("connector.json");
    let net_inner = json!({"learning_rate": 0.001, "max_steps": 50, "loss_tolerance": 0.0});
    vec![
        ("toy-optimize", "toy-optimize", json!({"landscape": toy(8, 5), "runs": 3})),
        ("hyperplane-sweep", "hyperplane-sweep", json!({"landscape": toy(8, 5), "dims": [2, 3, 4], "seeds_per_dim": 3})),
        ("tunnel", "tunnel", json!({"landscape": toy(8, 5), "waypoints": 9, "sub_segment_points": 2})),
        ("tunnel", "tunnel-net", json!({"landscape": small_net(), "waypoints": 5, "inner": net_inner})),
        ("m-connector", "m-connector", json!({"landscape": toy(8, 5), "m": 2, "grid_points_per_edge": 3})),
        ("probe-width", "probe-width", json!({"landscape": toy(8, 5), "directions": 20})),
        ("short-dirs", "short-dirs", json!({"landscape": toy(8, 5), "at": "tunnel_midpoint", "waypoints": 5})),
        ("train-net", "train-net", json!({"landscape": small_net()})),
        ("barrier", "barrier", json!({"landscape": toy(8, 5), "points": 7})),
        ("swa-compare", "swa-compare", json!({
            "landscape": toy(8, 5),
            "schedule": {"lr_max": 0.05, "lr_min": 1e-5, "cycle_len": 50, "n_cycles": 3},
            "lr_max_grid": [0.01, 0.1],
            "sweep_seeds": 2
        })),
        ("swa-compare", "swa-compare-net", json!({
            "landscape": small_net(),
            "schedule": {"lr_max": 0.05, "lr_min": 1e-5, "cycle_len": 20, "n_cycles": 3}
        })),
        ("deviation-cosines", "deviation-cosines", json!({"connector": toy_tunnel})),
        ("prediction-profile", "prediction-profile", json!({"landscape": small_net(), "connector": net_tunnel})),
        ("sweep", "sweep", json!({
            "command": "barrier",
            "base": {"landscape": toy(6, 4), "points": 5},
            "grid": [{"key": "landscape.n", "values": [3, 4]}],
            "seeds": 2
        })),
    ]
}
