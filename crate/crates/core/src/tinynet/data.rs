use std::f64::consts::PI;
use std::path::Path;

use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

use super::model::take_rows;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    TwoMoons,
    GaussianBlobs,
    Spirals,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// A batch of samples with labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub x: Array2<f64>,
    pub labels: Vec<usize>,
}

impl Samples {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: Array2<f64>,
    pub labels: Vec<usize>,
    pub n_classes: usize,
    pub split: Vec<Split>,
}

impl Dataset {
    /// Validates the data and assigns an 80/20 train/test split by a seeded
    /// permutation.
    pub fn new(inputs: Array2<f64>, labels: Vec<usize>, n_classes: usize, split_seed: u64) -> Result<Self> {
        let n = labels.len();
        if n == 0 || inputs.nrows() != n {
            return Err(Error::InvalidArgument(format!(
                "need one label per row and at least one row (rows {}, labels {n})",
                inputs.nrows()
            )));
        }
        if let Some(&label) = labels.iter().find(|&&y| y >= n_classes) {
            return Err(Error::LabelOutOfRange { label, classes: n_classes });
        }
        if let Some(index) = inputs.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng::labeled(split_seed, "split", 0));
        let n_train = if n < 2 { n } else { ((0.8 * n as f64).round() as usize).clamp(1, n - 1) };
        let mut split = vec![Split::Test; n];
        for &i in &order[..n_train] {
            split[i] = Split::Train;
        }
        Ok(Dataset { inputs, labels, n_classes, split })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.inputs.ncols()
    }

    pub fn part(&self, which: Split) -> Samples {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| self.split[i] == which).collect();
        Samples {
            x: take_rows(self.inputs.view(), &idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn train(&self) -> Samples {
        self.part(Split::Train)
    }

    pub fn test(&self) -> Samples {
        self.part(Split::Test)
    }
}

/// Evenly spaced angles over `[0, π]`.
fn arc(count: usize) -> impl Iterator<Item = f64> {
    (0..count).map(move |i| if count == 1 { 0.0 } else { PI * i as f64 / (count - 1) as f64 })
}

/// Generates a labeled point cloud in the plane.
///
/// * `two_moons`: an upper unit half circle (class 0) and a lower one shifted
///   to `(1, 0.5)` (class 1).
/// * `gaussian_blobs`: three classes around the vertices of an equilateral
///   triangle with side 10, so `noise = 1` separates the means by 10σ.
/// * `spirals`: two interleaved arms `r = t`, `t ∈ [π/2, 3π]`.
///
/// Gaussian noise of standard deviation `noise` is added to every coordinate.
pub fn generate_dataset(kind: DatasetKind, n: usize, noise: f64, seed: u64) -> Result<Dataset> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples, got {n}")));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::InvalidArgument(format!("noise must be >= 0, got {noise}")));
    }
    let mut points: Vec<[f64; 2]> = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let classes = match kind {
        DatasetKind::TwoMoons => {
            let upper = n - n / 2;
            for t in arc(upper) {
                points.push([t.cos(), t.sin()]);
                labels.push(0);
            }
            for t in arc(n / 2) {
                points.push([1.0 - t.cos(), 0.5 - t.sin()]);
                labels.push(1);
            }
            2
        }
        DatasetKind::GaussianBlobs => {
            let radius = 10.0 / 3f64.sqrt();
            for i in 0..n {
                let c = i % 3;
                let angle = 2.0 * PI * c as f64 / 3.0;
                points.push([radius * angle.cos(), radius * angle.sin()]);
                labels.push(c);
            }
            3
        }
        DatasetKind::Spirals => {
            for i in 0..n {
                let c = i % 2;
                let k = i / 2;
                let per_arm = n.div_ceil(2);
                let frac = if per_arm == 1 { 0.0 } else { k as f64 / (per_arm - 1) as f64 };
                let t = PI / 2.0 + frac * 2.5 * PI;
                let phase = PI * c as f64;
                points.push([t * (t + phase).cos(), t * (t + phase).sin()]);
                labels.push(c);
            }
            2
        }
    };
    if noise > 0.0 {
        let normal = Normal::new(0.0, noise).expect("validated noise");
        let mut r = rng::labeled(seed, "dataset-noise", 0);
        for p in &mut points {
            p[0] += normal.sample(&mut r);
            p[1] += normal.sample(&mut r);
        }
    }
    let flat: Vec<f64> = points.iter().flatten().copied().collect();
    let inputs = Array2::from_shape_vec((n, 2), flat).expect("two columns per point");
    Dataset::new(inputs, labels, classes, seed)
}

/// Reads a CSV with a header row. Every column except `label_column` is a
/// numeric feature; the label column holds non-negative integers.
pub fn load_csv(path: &Path, label_column: &str, split_seed: u64) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path).map_err(|e| Error::Csv {
        line: 0,
        message: e.to_string(),
    })?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Csv { line: 1, message: e.to_string() })?
        .clone();
    let label_idx = headers
        .iter()
        .position(|h| h.trim() == label_column)
        .ok_or_else(|| Error::Csv { line: 1, message: format!("no column named {label_column:?}") })?;
    let n_features = headers.len() - 1;
    let mut flat = Vec::new();
    let mut labels = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| Error::Csv { line, message: e.to_string() })?;
        if record.len() != headers.len() {
            return Err(Error::Csv {
                line,
                message: format!("expected {} fields, got {}", headers.len(), record.len()),
            });
        }
        for (j, field) in record.iter().enumerate() {
            let field = field.trim();
            if j == label_idx {
                let y: usize = field
                    .parse()
                    .map_err(|_| Error::Csv { line, message: format!("label {field:?} is not a non-negative integer") })?;
                labels.push(y);
            } else {
                let v: f64 = field
                    .parse()
                    .map_err(|_| Error::Csv { line, message: format!("feature {field:?} is not a number") })?;
                if !v.is_finite() {
                    return Err(Error::Csv { line, message: format!("feature {field:?} is not finite") });
                }
                flat.push(v);
            }
        }
    }
    if labels.is_empty() {
        return Err(Error::Csv { line: 2, message: "no data rows".into() });
    }
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let inputs = Array2::from_shape_vec((labels.len(), n_features), flat).expect("row lengths checked");
    Dataset::new(inputs, labels, n_classes, split_seed)
}
