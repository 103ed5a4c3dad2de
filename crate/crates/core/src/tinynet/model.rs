use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::param::ParamVector;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpSpec {
    /// Input width, hidden widths, number of classes.
    pub layer_sizes: Vec<usize>,
    pub activation: Activation,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerShape {
    pub fan_in: usize,
    pub fan_out: usize,
    /// Start of the `fan_in × fan_out` row-major weight block.
    pub offset: usize,
}

impl LayerShape {
    pub fn bias_offset(&self) -> usize {
        self.offset + self.fan_in * self.fan_out
    }

    pub fn end(&self) -> usize {
        self.bias_offset() + self.fan_out
    }

    fn views<'a>(&self, params: &'a [f64]) -> (ArrayView2<'a, f64>, ArrayView1<'a, f64>) {
        let w = ArrayView2::from_shape((self.fan_in, self.fan_out), &params[self.offset..self.bias_offset()])
            .expect("layer block matches its shape");
        let b = ArrayView1::from(&params[self.bias_offset()..self.end()]);
        (w, b)
    }
}

impl MlpSpec {
    pub fn new(layer_sizes: Vec<usize>, activation: Activation, seed: u64) -> Result<Self> {
        let spec = MlpSpec { layer_sizes, activation, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.len() < 2 {
            return Err(Error::InvalidArgument("an MLP needs at least an input and an output layer".into()));
        }
        if self.layer_sizes.contains(&0) {
            return Err(Error::InvalidArgument("layer sizes must be >= 1".into()));
        }
        Ok(())
    }

    pub fn inputs(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn classes(&self) -> usize {
        *self.layer_sizes.last().expect("validated spec")
    }

    pub fn layers(&self) -> Vec<LayerShape> {
        let mut offset = 0;
        self.layer_sizes
            .windows(2)
            .map(|w| {
                let shape = LayerShape { fan_in: w[0], fan_out: w[1], offset };
                offset = shape.end();
                shape
            })
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.layer_sizes.windows(2).map(|w| (w[0] + 1) * w[1]).sum()
    }

    /// Whether parameter `i` is a weight (as opposed to a bias).
    pub fn weight_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.param_count()];
        for l in self.layers() {
            mask[l.offset..l.bias_offset()].iter_mut().for_each(|m| *m = true);
        }
        mask
    }
}

/// Weights drawn from `N(0, 1/fan_in)`, biases zero.
pub fn init_params(spec: &MlpSpec) -> Result<ParamVector> {
    spec.validate()?;
    let mut params = vec![0.0; spec.param_count()];
    let mut r = rng::labeled(spec.seed, "init", 0);
    for l in spec.layers() {
        let std = 1.0 / (l.fan_in as f64).sqrt();
        let block = rng::standard_normal_vec(&mut r, l.fan_in * l.fan_out);
        for (dst, z) in params[l.offset..l.bias_offset()].iter_mut().zip(block) {
            *dst = std * z;
        }
    }
    ParamVector::new(params)
}

/// Splits a flat vector into per-layer `(weights, bias)` copies.
pub fn unflatten(spec: &MlpSpec, params: &[f64]) -> Result<Vec<(Array2<f64>, Array1<f64>)>> {
    check_dim(spec.param_count(), params.len())?;
    Ok(spec
        .layers()
        .iter()
        .map(|l| {
            let (w, b) = l.views(params);
            (w.to_owned(), b.to_owned())
        })
        .collect())
}

pub fn flatten(layers: &[(Array2<f64>, Array1<f64>)]) -> Vec<f64> {
    let mut out = Vec::new();
    for (w, b) in layers {
        out.extend(w.iter());
        out.extend(b.iter());
    }
    out
}

struct Pass {
    /// Input to each layer; `inputs[0]` is the batch itself.
    inputs: Vec<Array2<f64>>,
    /// Activation derivative times dropout mask, per hidden layer.
    slopes: Vec<Array2<f64>>,
    logits: Array2<f64>,
}

fn check_batch(spec: &MlpSpec, params: &[f64], x: &ArrayView2<f64>) -> Result<()> {
    spec.validate()?;
    check_dim(spec.param_count(), params.len())?;
    check_dim(spec.inputs(), x.ncols())
}

fn run_forward(spec: &MlpSpec, params: &[f64], x: ArrayView2<f64>, dropout: Option<(f64, u64)>) -> Pass {
    let layers = spec.layers();
    let mut inputs = vec![x.to_owned()];
    let mut slopes = Vec::with_capacity(layers.len() - 1);
    for (i, l) in layers.iter().enumerate() {
        let (w, b) = l.views(params);
        let mut z = inputs[i].dot(&w);
        z += &b;
        if i + 1 == layers.len() {
            return Pass { inputs, slopes, logits: z };
        }
        let (mut a, mut slope) = match spec.activation {
            Activation::Tanh => {
                let a = z.mapv(f64::tanh);
                let d = a.mapv(|t| 1.0 - t * t);
                (a, d)
            }
            Activation::Relu => (z.mapv(|v| v.max(0.0)), z.mapv(|v| if v > 0.0 { 1.0 } else { 0.0 })),
        };
        if let Some((rate, seed)) = dropout {
            let keep = 1.0 - rate;
            let mut r = rng::labeled(seed, "dropout", i as u64);
            let mask = Array2::from_shape_simple_fn(a.raw_dim(), || {
                if r.random::<f64>() < keep {
                    1.0 / keep
                } else {
                    0.0
                }
            });
            a *= &mask;
            slope *= &mask;
        }
        inputs.push(a);
        slopes.push(slope);
    }
    unreachable!("a validated spec has an output layer")
}

pub fn forward(spec: &MlpSpec, params: &[f64], x: ArrayView2<f64>) -> Result<Array2<f64>> {
    check_batch(spec, params, &x)?;
    Ok(run_forward(spec, params, x, None).logits)
}

/// Row-wise log-sum-exp.
fn log_normalizers(logits: &Array2<f64>) -> Array1<f64> {
    logits.map_axis(Axis(1), |row| {
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        m + row.iter().map(|z| (z - m).exp()).sum::<f64>().ln()
    })
}

pub fn softmax(logits: &Array2<f64>) -> Array2<f64> {
    let lse = log_normalizers(logits);
    let mut p = logits.clone();
    for (mut row, l) in p.rows_mut().into_iter().zip(lse.iter()) {
        row.mapv_inplace(|z| (z - l).exp());
    }
    p
}

pub fn predict_proba(spec: &MlpSpec, params: &[f64], x: ArrayView2<f64>) -> Result<Array2<f64>> {
    Ok(softmax(&forward(spec, params, x)?))
}

fn check_labels(labels: &[usize], classes: usize) -> Result<()> {
    match labels.iter().find(|&&y| y >= classes) {
        Some(&label) => Err(Error::LabelOutOfRange { label, classes }),
        None => Ok(()),
    }
}

/// Mean softmax cross-entropy of logits against labels.
pub fn cross_entropy(logits: &Array2<f64>, labels: &[usize]) -> Result<f64> {
    check_dim(logits.nrows(), labels.len())?;
    check_labels(labels, logits.ncols())?;
    let lse = log_normalizers(logits);
    let total: f64 = labels.iter().enumerate().map(|(i, &y)| lse[i] - logits[[i, y]]).sum();
    Ok(total / labels.len() as f64)
}

/// `l2_coeff · ‖weights‖²`, biases excluded.
pub fn l2_penalty(spec: &MlpSpec, params: &[f64], l2_coeff: f64) -> f64 {
    if l2_coeff == 0.0 {
        return 0.0;
    }
    let sq: f64 = spec
        .layers()
        .iter()
        .map(|l| params[l.offset..l.bias_offset()].iter().map(|w| w * w).sum::<f64>())
        .sum();
    l2_coeff * sq
}

/// Regularization knobs for one loss evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Regularization {
    pub l2_coeff: f64,
    pub dropout_rate: f64,
    pub dropout_seed: u64,
}

/// Mean cross-entropy plus the L2 penalty, and its gradient by backprop.
/// Dropout masks are drawn from `dropout_seed` and live only for this call.
pub fn loss_and_grad(
    spec: &MlpSpec,
    params: &[f64],
    x: ArrayView2<f64>,
    labels: &[usize],
    reg: Regularization,
) -> Result<(f64, ParamVector)> {
    check_batch(spec, params, &x)?;
    check_dim(x.nrows(), labels.len())?;
    if labels.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    check_labels(labels, spec.classes())?;
    if !(reg.l2_coeff >= 0.0) {
        return Err(Error::InvalidArgument(format!("l2_coeff must be >= 0, got {}", reg.l2_coeff)));
    }
    if !(0.0..1.0).contains(&reg.dropout_rate) {
        return Err(Error::InvalidArgument(format!("dropout_rate must be in [0, 1), got {}", reg.dropout_rate)));
    }
    let dropout = (reg.dropout_rate > 0.0).then_some((reg.dropout_rate, reg.dropout_seed));
    let pass = run_forward(spec, params, x, dropout);
    let n = labels.len() as f64;
    let loss = cross_entropy(&pass.logits, labels)? + l2_penalty(spec, params, reg.l2_coeff);

    let mut delta = softmax(&pass.logits);
    for (i, &y) in labels.iter().enumerate() {
        delta[[i, y]] -= 1.0;
    }
    delta /= n;

    let mut grad = vec![0.0; params.len()];
    let layers = spec.layers();
    for (i, l) in layers.iter().enumerate().rev() {
        let (w, _) = l.views(params);
        let gw = pass.inputs[i].t().dot(&delta);
        let gb = delta.sum_axis(Axis(0));
        for ((dst, g), wv) in grad[l.offset..l.bias_offset()].iter_mut().zip(gw.iter()).zip(w.iter()) {
            *dst = g + 2.0 * reg.l2_coeff * wv;
        }
        grad[l.bias_offset()..l.end()].copy_from_slice(gb.as_slice().expect("fresh array is contiguous"));
        if i > 0 {
            delta = delta.dot(&w.t()) * &pass.slopes[i - 1];
        }
    }
    Ok((loss, ParamVector::new(grad)?))
}

/// Argmax of each logit row; ties go to the lower class index.
pub fn argmax_rows(logits: &Array2<f64>) -> Vec<usize> {
    logits
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (j, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

pub fn predict_labels(spec: &MlpSpec, params: &[f64], x: ArrayView2<f64>) -> Result<Vec<usize>> {
    Ok(argmax_rows(&forward(spec, params, x)?))
}

/// Smallest pre-activation magnitude over all hidden units and samples;
/// finite differences are unreliable for relu below a small margin.
pub fn min_preactivation(spec: &MlpSpec, params: &[f64], x: ArrayView2<f64>) -> Result<f64> {
    check_batch(spec, params, &x)?;
    let layers = spec.layers();
    let mut a = x.to_owned();
    let mut smallest = f64::INFINITY;
    for l in &layers[..layers.len() - 1] {
        let (w, b) = l.views(params);
        let mut z = a.dot(&w);
        z += &b;
        smallest = z.iter().fold(smallest, |m, v| m.min(v.abs()));
        a = match spec.activation {
            Activation::Tanh => z.mapv(f64::tanh),
            Activation::Relu => z.mapv(|v| v.max(0.0)),
        };
    }
    Ok(smallest)
}

/// Rows `idx` of `x`.
pub(crate) fn take_rows(x: ArrayView2<f64>, idx: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((idx.len(), x.ncols()));
    for (k, &i) in idx.iter().enumerate() {
        out.slice_mut(s![k, ..]).assign(&x.row(i));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn tanh_spec() -> MlpSpec {
        MlpSpec::new(vec![2, 3, 2], Activation::Tanh, 7).unwrap()
    }

    fn fd_check(spec: &MlpSpec, params: &[f64], x: ArrayView2<f64>, y: &[usize], reg: Regularization) -> f64 {
        let (_, g) = loss_and_grad(spec, params, x, y, reg).unwrap();
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        for i in 0..params.len() {
            let mut p = params.to_vec();
            p[i] += h;
            let up = loss_and_grad(spec, &p, x, y, reg).unwrap().0;
            p[i] -= 2.0 * h;
            let down = loss_and_grad(spec, &p, x, y, reg).unwrap().0;
            let fd = (up - down) / (2.0 * h);
            worst = worst.max((fd - g[i]).abs() / fd.abs().max(g[i].abs()).max(1e-6));
        }
        worst
    }

    fn random_batch(seed: u64, n: usize, f: usize, classes: usize) -> (Array2<f64>, Vec<usize>) {
        let mut r = rng::seeded(seed);
        let x = Array2::from_shape_vec((n, f), rng::standard_normal_vec(&mut r, n * f)).unwrap();
        let y = (0..n).map(|_| r.random_range(0..classes)).collect();
        (x, y)
    }

    #[test]
    fn parameter_count_and_zero_biases() {
        let spec = tanh_spec();
        assert_eq!(spec.param_count(), 17);
        let p = init_params(&spec).unwrap();
        assert_eq!(p.len(), 17);
        for l in spec.layers() {
            assert!(p[l.bias_offset()..l.end()].iter().all(|&b| b == 0.0));
        }
        assert_eq!(p, init_params(&spec).unwrap());
    }

    #[test]
    fn invalid_specs() {
        assert!(MlpSpec::new(vec![3], Activation::Tanh, 0).is_err());
        assert!(MlpSpec::new(vec![3, 0, 2], Activation::Relu, 0).is_err());
    }

    #[test]
    fn flatten_round_trip_is_exact() {
        let spec = MlpSpec::new(vec![3, 5, 4, 2], Activation::Relu, 1).unwrap();
        let p = init_params(&spec).unwrap();
        assert_eq!(flatten(&unflatten(&spec, &p).unwrap()), p.as_slice());
    }

    #[test]
    fn zero_params_give_uniform_softmax() {
        let spec = MlpSpec::new(vec![2, 4, 3], Activation::Tanh, 0).unwrap();
        let p = vec![0.0; spec.param_count()];
        let x = array![[1.0, -2.0], [0.5, 0.3]];
        let logits = forward(&spec, &p, x.view()).unwrap();
        assert!(logits.iter().all(|&z| z == 0.0));
        let reg = Regularization { l2_coeff: 0.3, ..Default::default() };
        let (loss, _) = loss_and_grad(&spec, &p, x.view(), &[0, 2], reg).unwrap();
        assert!((loss - 3f64.ln()).abs() < 1e-15);
        assert_eq!(predict_labels(&spec, &p, x.view()).unwrap(), vec![0, 0]);
    }

    #[test]
    fn single_unit_is_affine() {
        let spec = MlpSpec::new(vec![1, 1], Activation::Tanh, 0).unwrap();
        let logits = forward(&spec, &[2.5, -1.0], array![[3.0]].view()).unwrap();
        assert_eq!(logits[[0, 0]], 6.5);
    }

    #[test]
    fn argmax_ties_and_order() {
        assert_eq!(argmax_rows(&array![[0.1, 0.9], [0.4, 0.4], [2.0, -1.0]]), vec![1, 0, 0]);
    }

    #[test]
    fn tanh_backprop_matches_finite_differences() {
        let spec = MlpSpec::new(vec![3, 5, 4, 3], Activation::Tanh, 0).unwrap();
        for trial in 0..10 {
            let p = rng::standard_normal_vec(&mut rng::seeded(100 + trial), spec.param_count());
            let (x, y) = random_batch(trial, 16, 3, 3);
            let reg = Regularization { l2_coeff: 1e-2, ..Default::default() };
            assert!(fd_check(&spec, &p, x.view(), &y, reg) < 1e-4);
        }
    }

    #[test]
    fn relu_backprop_away_from_kinks() {
        let spec = MlpSpec::new(vec![2, 6, 2], Activation::Relu, 0).unwrap();
        let mut checked = 0;
        for trial in 0..40 {
            let p = rng::standard_normal_vec(&mut rng::seeded(200 + trial), spec.param_count());
            let (x, y) = random_batch(300 + trial, 8, 2, 2);
            if min_preactivation(&spec, &p, x.view()).unwrap() < 1e-3 {
                continue;
            }
            checked += 1;
            assert!(fd_check(&spec, &p, x.view(), &y, Regularization::default()) < 1e-4);
        }
        assert!(checked > 5);
    }

    #[test]
    fn dropout_gradient_under_a_frozen_mask() {
        let spec = MlpSpec::new(vec![2, 8, 8, 2], Activation::Tanh, 0).unwrap();
        let p = init_params(&spec).unwrap();
        let (x, y) = random_batch(5, 16, 2, 2);
        let reg = Regularization { l2_coeff: 0.0, dropout_rate: 0.5, dropout_seed: 11 };
        let a = loss_and_grad(&spec, &p, x.view(), &y, reg).unwrap();
        let b = loss_and_grad(&spec, &p, x.view(), &y, reg).unwrap();
        assert_eq!(a, b);
        assert!(fd_check(&spec, &p, x.view(), &y, reg) < 1e-4);
    }

    #[test]
    fn zero_dropout_is_bit_identical() {
        let spec = MlpSpec::new(vec![2, 8, 2], Activation::Tanh, 3).unwrap();
        let p = init_params(&spec).unwrap();
        let (x, y) = random_batch(6, 10, 2, 2);
        let plain = loss_and_grad(&spec, &p, x.view(), &y, Regularization::default()).unwrap();
        let seeded = Regularization { dropout_seed: 99, ..Default::default() };
        assert_eq!(plain, loss_and_grad(&spec, &p, x.view(), &y, seeded).unwrap());
    }

    #[test]
    fn l2_part_matches_direct_sum() {
        let spec = MlpSpec::new(vec![2, 4, 2], Activation::Tanh, 0).unwrap();
        let p = init_params(&spec).unwrap();
        let (x, y) = random_batch(1, 12, 2, 2);
        let lambda = 0.01;
        let reg = Regularization { l2_coeff: lambda, ..Default::default() };
        let total = loss_and_grad(&spec, &p, x.view(), &y, reg).unwrap().0;
        let ce = cross_entropy(&forward(&spec, &p, x.view()).unwrap(), &y).unwrap();
        let mask = spec.weight_mask();
        let direct: f64 = lambda * p.iter().zip(&mask).filter(|(_, &m)| m).map(|(w, _)| w * w).sum::<f64>();
        assert!(total >= ce);
        assert!((total - ce - direct).abs() < 1e-10);
    }

    #[test]
    fn bad_inputs() {
        let spec = tanh_spec();
        let p = init_params(&spec).unwrap();
        let x = array![[1.0, 2.0]];
        assert!(matches!(
            loss_and_grad(&spec, &p, x.view(), &[2], Regularization::default()),
            Err(Error::LabelOutOfRange { label: 2, classes: 2 })
        ));
        assert!(forward(&spec, &p[..5], x.view()).is_err());
        assert!(forward(&spec, &p, array![[1.0, 2.0, 3.0]].view()).is_err());
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let p = softmax(&array![[1000.0, 0.0, -5.0], [0.1, 0.2, 0.3]]);
        for row in p.rows() {
            assert!((row.sum() - 1.0).abs() < 1e-12);
        }
    }
}
