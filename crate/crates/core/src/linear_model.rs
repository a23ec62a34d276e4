//! Softmax classifier head trained by mini-batch SGD.
//!
//! The objective is mean softmax cross-entropy plus `lambda * |W|_F^2` (bias
//! unregularized). With two classes and logits `[f, 0]` the cross-entropy of
//! class 0 is exactly the logistic loss `log(1 + exp(-f))`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::dataio::{self, Dataset, RecordReader};
use crate::detrand::RandomStream;
use crate::error::{Error, Result};
use crate::fastfood::{FastfoodMap, FeatureMapSpec};
use crate::Real;

/// Maps an input row to the feature vector the head consumes.
pub trait FeatureSource: Sync {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    /// Writes features of `x` into `out` (length [`output_dim`](Self::output_dim)).
    fn compute(&self, x: &[f32], out: &mut [f32], scratch: &mut Vec<f32>) -> Result<()>;
}

impl FeatureSource for FastfoodMap {
    fn input_dim(&self) -> usize {
        self.spec().input_dim()
    }

    fn output_dim(&self) -> usize {
        self.spec().feature_dim()
    }

    fn compute(&self, x: &[f32], out: &mut [f32], scratch: &mut Vec<f32>) -> Result<()> {
        self.feature_map_into(x, out, scratch)
    }
}

/// Whether the classifier sees kernel features with or without the `1 / sqrt(D)` factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FeatureScale {
    /// Plain `[cos z, sin z]`; the normalization is absorbed into `W`.
    #[default]
    Unit,
    /// `[cos z, sin z] / sqrt(D)`, the unbiased kernel estimator.
    Normalized,
}

impl fmt::Display for FeatureScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureScale::Unit => "unit",
            FeatureScale::Normalized => "normalized",
        })
    }
}

impl FromStr for FeatureScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit" => Ok(FeatureScale::Unit),
            "normalized" => Ok(FeatureScale::Normalized),
            other => Err(Error::Config(format!("unknown feature scale '{other}'"))),
        }
    }
}

/// Fastfood features for training, at a chosen [`FeatureScale`].
#[derive(Debug, Clone)]
pub struct KernelFeatures {
    pub map: FastfoodMap,
    pub scale: FeatureScale,
}

impl FeatureSource for KernelFeatures {
    fn input_dim(&self) -> usize {
        self.map.spec().input_dim()
    }

    fn output_dim(&self) -> usize {
        self.map.spec().feature_dim()
    }

    fn compute(&self, x: &[f32], out: &mut [f32], scratch: &mut Vec<f32>) -> Result<()> {
        match self.scale {
            FeatureScale::Unit => self.map.cos_sin_features_into(x, out, scratch),
            FeatureScale::Normalized => self.map.feature_map_into(x, out, scratch),
        }
    }
}

/// Identity features, for the plain logistic-regression baseline.
#[derive(Debug, Clone, Copy)]
pub struct RawFeatures {
    pub dim: usize,
}

impl FeatureSource for RawFeatures {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn output_dim(&self) -> usize {
        self.dim
    }

    fn compute(&self, x: &[f32], out: &mut [f32], _scratch: &mut Vec<f32>) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::LengthMismatch { expected: self.dim, actual: x.len() });
        }
        out.copy_from_slice(x);
        Ok(())
    }
}

#[inline]
fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    let mut acc = [T::zero(); 8];
    let mut ca = a.chunks_exact(8);
    let mut cb = b.chunks_exact(8);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for k in 0..8 {
            acc[k] = acc[k] + x[k] * y[k];
        }
    }
    let mut s = ca.remainder().iter().zip(cb.remainder()).fold(T::zero(), |s, (&x, &y)| s + x * y);
    for v in acc {
        s = s + v;
    }
    s
}

#[inline]
fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}

/// Numerically stable softmax; returns `log(sum(exp(logits)))`.
pub fn softmax_in_place<T: Real>(logits: &mut [T]) -> T {
    let max = logits.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
    let mut sum = T::zero();
    for v in logits.iter_mut() {
        *v = (*v - max).exp();
        sum = sum + *v;
    }
    for v in logits.iter_mut() {
        *v = *v / sum;
    }
    max + sum.ln()
}

/// Binary logistic loss `log(1 + exp(-y f))` for `y` in `{-1, +1}`.
pub fn logistic_loss(y: f64, f: f64) -> f64 {
    let m = -y * f;
    if m > 0.0 {
        m + (-m).exp().ln_1p()
    } else {
        m.exp().ln_1p()
    }
}

/// `W` (`classes x features`, row-major) and `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxModel<T> {
    classes: usize,
    features: usize,
    weights: Vec<T>,
    bias: Vec<T>,
}

impl<T: Real> SoftmaxModel<T> {
    pub fn zeros(classes: usize, features: usize) -> Result<Self> {
        Self::from_parts(classes, features, vec![T::zero(); classes * features], vec![T::zero(); classes])
    }

    pub fn from_parts(classes: usize, features: usize, weights: Vec<T>, bias: Vec<T>) -> Result<Self> {
        if classes < 2 || features == 0 {
            return Err(Error::InvalidArgument("model needs >= 2 classes and >= 1 feature".into()));
        }
        if weights.len() != classes * features {
            return Err(Error::LengthMismatch { expected: classes * features, actual: weights.len() });
        }
        if bias.len() != classes {
            return Err(Error::LengthMismatch { expected: classes, actual: bias.len() });
        }
        Ok(Self { classes, features, weights, bias })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn features(&self) -> usize {
        self.features
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn bias(&self) -> &[T] {
        &self.bias
    }

    pub fn weights_mut(&mut self) -> &mut [T] {
        &mut self.weights
    }

    pub fn bias_mut(&mut self) -> &mut [T] {
        &mut self.bias
    }

    fn check_row(&self, x: &[T]) -> Result<()> {
        if x.len() != self.features {
            return Err(Error::LengthMismatch { expected: self.features, actual: x.len() });
        }
        Ok(())
    }

    pub fn logits_into(&self, x: &[T], out: &mut [T]) -> Result<()> {
        self.check_row(x)?;
        for ((o, w), &b) in out.iter_mut().zip(self.weights.chunks_exact(self.features)).zip(&self.bias) {
            *o = dot(w, x) + b;
        }
        Ok(())
    }

    /// Class probabilities `softmax(W x + b)`.
    pub fn forward(&self, x: &[T]) -> Result<Vec<T>> {
        let mut p = vec![T::zero(); self.classes];
        self.logits_into(x, &mut p)?;
        softmax_in_place(&mut p);
        Ok(p)
    }

    /// Index of the largest logit; ties go to the lowest index.
    pub fn predict(&self, x: &[T]) -> Result<usize> {
        let mut l = vec![T::zero(); self.classes];
        self.logits_into(x, &mut l)?;
        Ok(argmax(&l))
    }

    pub fn frobenius_sq(&self) -> T {
        self.weights.iter().fold(T::zero(), |s, &w| s + w * w)
    }
}

fn argmax<T: Real>(v: &[T]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Rows of features with their labels.
#[derive(Debug, Clone, Copy)]
pub struct Batch<'a, T> {
    rows: &'a [T],
    labels: &'a [usize],
}

impl<'a, T: Real> Batch<'a, T> {
    pub fn new(rows: &'a [T], labels: &'a [usize], features: usize) -> Result<Self> {
        if rows.len() != labels.len() * features {
            return Err(Error::LengthMismatch { expected: labels.len() * features, actual: rows.len() });
        }
        Ok(Self { rows, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

fn check_batch<T: Real>(model: &SoftmaxModel<T>, batch: &Batch<'_, T>) -> Result<()> {
    if batch.rows.len() != batch.labels.len() * model.features {
        return Err(Error::LengthMismatch { expected: batch.labels.len() * model.features, actual: batch.rows.len() });
    }
    if let Some(&label) = batch.labels.iter().find(|&&l| l >= model.classes) {
        return Err(Error::LabelOutOfRange { label, classes: model.classes });
    }
    Ok(())
}

/// Per-row `p - onehot(y)` and the data term of the loss (summed, not averaged).
fn residuals<T: Real>(model: &SoftmaxModel<T>, batch: &Batch<'_, T>) -> (Vec<T>, f64) {
    let c = model.classes;
    let mut delta = vec![T::zero(); batch.len() * c];
    let mut total = 0.0;
    for ((x, &y), d) in batch.rows.chunks_exact(model.features).zip(batch.labels).zip(delta.chunks_exact_mut(c)) {
        for ((o, w), &b) in d.iter_mut().zip(model.weights.chunks_exact(model.features)).zip(&model.bias) {
            *o = dot(w, x) + b;
        }
        let logit_y = d[y];
        let lse = softmax_in_place(d);
        total += (lse - logit_y).to_f64().unwrap_or(f64::NAN);
        d[y] = d[y] - T::one();
    }
    (delta, total)
}

/// Mean cross-entropy over the batch plus `l2 * |W|_F^2`.
pub fn loss<T: Real>(model: &SoftmaxModel<T>, batch: &Batch<'_, T>, l2: f64) -> Result<f64> {
    check_batch(model, batch)?;
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let (_, total) = residuals(model, batch);
    Ok(total / batch.len() as f64 + l2 * model.frobenius_sq().to_f64().unwrap_or(f64::NAN))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradient<T> {
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

/// Loss and its analytic gradient at the current parameters.
pub fn gradient<T: Real>(model: &SoftmaxModel<T>, batch: &Batch<'_, T>, l2: f64) -> Result<(f64, Gradient<T>)> {
    check_batch(model, batch)?;
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let (c, f) = (model.classes, model.features);
    let (delta, total) = residuals(model, batch);
    let inv_m = T::from(1.0 / batch.len() as f64).unwrap();
    let two_l2 = T::from(2.0 * l2).unwrap();
    let mut gw: Vec<T> = model.weights.iter().map(|&w| two_l2 * w).collect();
    let mut gb = vec![T::zero(); c];
    for (x, d) in batch.rows.chunks_exact(f).zip(delta.chunks_exact(c)) {
        for (k, &dk) in d.iter().enumerate() {
            axpy(dk * inv_m, x, &mut gw[k * f..(k + 1) * f]);
            gb[k] = gb[k] + dk * inv_m;
        }
    }
    let loss = total / batch.len() as f64 + l2 * model.frobenius_sq().to_f64().unwrap_or(f64::NAN);
    Ok((loss, Gradient { weights: gw, bias: gb }))
}

/// SGD hyper-parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub l2_lambda: f64,
    pub shuffle_seed: u64,
    /// Compute every feature vector once up front instead of per batch.
    pub precompute: bool,
}

impl TrainConfig {
    pub fn new(learning_rate: f64, batch_size: usize, epochs: usize, l2_lambda: f64, shuffle_seed: u64) -> Result<Self> {
        let cfg = Self { learning_rate, batch_size, epochs, l2_lambda, shuffle_seed, precompute: false };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate must be > 0, got {}", self.learning_rate)));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be >= 1".into()));
        }
        if !(self.l2_lambda >= 0.0 && self.l2_lambda.is_finite()) {
            return Err(Error::Config(format!("l2 must be >= 0, got {}", self.l2_lambda)));
        }
        Ok(())
    }
}

/// One update `W -= lr * dW`, `b -= lr * db` with batch-averaged gradients.
/// Returns the loss before the step.
pub fn sgd_step<T: Real>(model: &mut SoftmaxModel<T>, batch: &Batch<'_, T>, config: &TrainConfig) -> Result<f64> {
    check_batch(model, batch)?;
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let (c, f) = (model.classes, model.features);
    let reg = config.l2_lambda * model.frobenius_sq().to_f64().unwrap_or(f64::NAN);
    let (delta, total) = residuals(model, batch);
    let lr = T::from(config.learning_rate).unwrap();
    let step = -lr * T::from(1.0 / batch.len() as f64).unwrap();
    if config.l2_lambda > 0.0 {
        let shrink = T::one() - T::from(2.0 * config.learning_rate * config.l2_lambda).unwrap();
        model.weights.iter_mut().for_each(|w| *w = *w * shrink);
    }
    for (x, d) in batch.rows.chunks_exact(f).zip(delta.chunks_exact(c)) {
        for (k, &dk) in d.iter().enumerate() {
            if dk != T::zero() {
                axpy(step * dk, x, &mut model.weights[k * f..(k + 1) * f]);
                model.bias[k] = model.bias[k] + step * dk;
            }
        }
    }
    Ok(total / batch.len() as f64 + reg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub accuracy: f64,
    pub mean_loss: f64,
}

fn check_source(source: &dyn FeatureSource, data: &Dataset) -> Result<()> {
    if source.input_dim() != data.dim() {
        return Err(Error::LengthMismatch { expected: source.input_dim(), actual: data.dim() });
    }
    Ok(())
}

/// Feature rows for a whole dataset, computed in parallel into fixed slots.
pub fn compute_features(source: &dyn FeatureSource, data: &Dataset) -> Result<Vec<f32>> {
    check_source(source, data)?;
    let f = source.output_dim();
    let mut out = vec![0.0; data.len() * f];
    out.par_chunks_mut(f)
        .enumerate()
        .try_for_each_init(Vec::new, |scratch, (i, row)| source.compute(data.row(i), row, scratch))?;
    Ok(out)
}

/// Argmax accuracy and mean cross-entropy (no regularizer).
///
/// Per-sample results are gathered in sample order and summed sequentially,
/// so the result does not depend on the worker count.
pub fn evaluate(model: &SoftmaxModel<f32>, source: &dyn FeatureSource, data: &Dataset) -> Result<Evaluation> {
    check_source(source, data)?;
    evaluate_rows(model, data, |i, row, scratch| source.compute(data.row(i), row, scratch))
}

fn evaluate_rows<F>(model: &SoftmaxModel<f32>, data: &Dataset, fill: F) -> Result<Evaluation>
where
    F: Fn(usize, &mut [f32], &mut Vec<f32>) -> Result<()> + Sync,
{
    if model.classes() != data.classes() {
        return Err(Error::LengthMismatch { expected: model.classes(), actual: data.classes() });
    }
    let f = model.features();
    let per_sample: Vec<(bool, f64)> = (0..data.len())
        .into_par_iter()
        .map_init(
            || (vec![0.0f32; f], vec![0.0f32; model.classes()], Vec::new()),
            |(row, logits, scratch), i| -> Result<(bool, f64)> {
                fill(i, row, scratch)?;
                model.logits_into(row, logits)?;
                let y = data.labels()[i];
                let hit = argmax(logits) == y;
                let ly = logits[y];
                let lse = softmax_in_place(logits);
                Ok((hit, f64::from(lse - ly)))
            },
        )
        .collect::<Result<_>>()?;
    let hits = per_sample.iter().filter(|(h, _)| *h).count();
    let total: f64 = per_sample.iter().map(|(_, l)| l).sum();
    Ok(Evaluation { accuracy: hits as f64 / data.len() as f64, mean_loss: total / data.len() as f64 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub test_acc: f64,
}

/// Per-epoch history. Epoch 0 is the untrained model: its `train_loss` is the
/// full training-set loss. Later epochs report the mean pre-update loss over
/// that epoch's mini-batches.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunMetrics {
    pub records: Vec<EpochRecord>,
}

impl RunMetrics {
    pub const CSV_HEADER: &'static str = "epoch,train_loss,test_acc";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.records {
            s.push_str(&format!("{},{:.9},{:.6}\n", r.epoch, r.train_loss, r.test_acc));
        }
        s
    }

    pub fn last(&self) -> Option<&EpochRecord> {
        self.records.last()
    }
}

enum FeatureRows<'a> {
    OnTheFly(&'a dyn FeatureSource, &'a Dataset),
    Cached(Vec<f32>),
}

impl FeatureRows<'_> {
    fn fill(&self, i: usize, row: &mut [f32], scratch: &mut Vec<f32>) -> Result<()> {
        match self {
            FeatureRows::OnTheFly(source, data) => source.compute(data.row(i), row, scratch),
            FeatureRows::Cached(all) => {
                let f = row.len();
                row.copy_from_slice(&all[i * f..(i + 1) * f]);
                Ok(())
            }
        }
    }
}

/// Mini-batch SGD from a zero model. Each epoch visits the training set in the
/// order of a Fisher-Yates shuffle drawn from stream
/// `(shuffle_seed, "shuffle", epoch)`; the final partial batch is kept.
pub fn train(
    source: &dyn FeatureSource,
    train_set: &Dataset,
    test_set: &Dataset,
    config: &TrainConfig,
) -> Result<(SoftmaxModel<f32>, RunMetrics)> {
    config.validate()?;
    check_source(source, train_set)?;
    check_source(source, test_set)?;
    if train_set.classes() != test_set.classes() {
        return Err(Error::LengthMismatch { expected: train_set.classes(), actual: test_set.classes() });
    }
    let f = source.output_dim();
    let mut model = SoftmaxModel::<f32>::zeros(train_set.classes(), f)?;

    let (train_rows, test_rows) = if config.precompute {
        (FeatureRows::Cached(compute_features(source, train_set)?), FeatureRows::Cached(compute_features(source, test_set)?))
    } else {
        (FeatureRows::OnTheFly(source, train_set), FeatureRows::OnTheFly(source, test_set))
    };
    let eval = |model: &SoftmaxModel<f32>, rows: &FeatureRows<'_>, data: &Dataset| {
        evaluate_rows(model, data, |i, row, scratch| rows.fill(i, row, scratch))
    };

    let mut metrics = RunMetrics::default();
    metrics.records.push(EpochRecord {
        epoch: 0,
        train_loss: eval(&model, &train_rows, train_set)?.mean_loss,
        test_acc: eval(&model, &test_rows, test_set)?.accuracy,
    });

    let mut batch_rows = vec![0.0f32; config.batch_size * f];
    let mut batch_labels = Vec::with_capacity(config.batch_size);
    for epoch in 1..=config.epochs {
        let order = RandomStream::new(config.shuffle_seed, "shuffle", epoch as u64).permutation(train_set.len())?;
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let rows = &mut batch_rows[..chunk.len() * f];
            rows.par_chunks_mut(f)
                .zip(chunk.par_iter())
                .try_for_each_init(Vec::new, |scratch, (row, &i)| train_rows.fill(i, row, scratch))?;
            batch_labels.clear();
            batch_labels.extend(chunk.iter().map(|&i| train_set.labels()[i]));
            let batch = Batch::new(rows, &batch_labels, f)?;
            epoch_loss += sgd_step(&mut model, &batch, config)? * chunk.len() as f64;
        }
        metrics.records.push(EpochRecord {
            epoch,
            train_loss: epoch_loss / train_set.len() as f64,
            test_acc: eval(&model, &test_rows, test_set)?.accuracy,
        });
    }
    Ok((model, metrics))
}

/// The feature pipeline in front of a head, as saved next to its weights.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureConfig {
    Raw { dim: usize },
    Kernel { spec: FeatureMapSpec, scale: FeatureScale },
}

impl FeatureConfig {
    pub fn input_dim(&self) -> usize {
        match self {
            FeatureConfig::Raw { dim } => *dim,
            FeatureConfig::Kernel { spec, .. } => spec.input_dim(),
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            FeatureConfig::Raw { dim } => *dim,
            FeatureConfig::Kernel { spec, .. } => spec.feature_dim(),
        }
    }

    /// Realizes the pipeline; for kernels this draws every block.
    pub fn build(&self) -> Result<Box<dyn FeatureSource>> {
        Ok(match self {
            FeatureConfig::Raw { dim } => Box::new(RawFeatures { dim: *dim }),
            FeatureConfig::Kernel { spec, scale } => {
                Box::new(KernelFeatures { map: FastfoodMap::new(spec.clone())?, scale: *scale })
            }
        })
    }
}

impl fmt::Display for FeatureConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureConfig::Raw { dim } => write!(f, "kernel=none\nd={dim}\n"),
            FeatureConfig::Kernel { spec, scale } => write!(f, "{spec}features={scale}\n"),
        }
    }
}

impl FromStr for FeatureConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut scale = FeatureScale::default();
        let mut rest = String::new();
        let mut raw = false;
        for line in text.lines() {
            match line.trim().split_once('=').map(|(k, v)| (k.trim(), v.trim())) {
                Some(("features", v)) => scale = v.parse()?,
                Some(("kernel", "none")) => raw = true,
                _ => {
                    rest.push_str(line);
                    rest.push('\n');
                }
            }
        }
        if raw {
            let dim = rest
                .lines()
                .find_map(|l| l.trim().strip_prefix("d="))
                .ok_or_else(|| Error::Config("missing key 'd'".into()))?
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::Config("bad d".into()))?;
            if dim == 0 {
                return Err(Error::Config("d must be >= 1".into()));
            }
            return Ok(FeatureConfig::Raw { dim });
        }
        Ok(FeatureConfig::Kernel { spec: rest.parse()?, scale })
    }
}

/// A trained head with its feature configuration.
///
/// Stored as two files: `path` holds `W` and `b` as f32 dump records, and
/// `path.cfg` holds the [`FeatureConfig`] text.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub features: FeatureConfig,
    pub model: SoftmaxModel<f32>,
}

impl Checkpoint {
    pub fn config_path(path: &Path) -> PathBuf {
        let mut p = path.as_os_str().to_owned();
        p.push(".cfg");
        PathBuf::from(p)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let m = &self.model;
        let mut buf = Vec::new();
        dataio::encode_f32(&mut buf, m.classes, m.features, &m.weights);
        dataio::encode_f32(&mut buf, 1, m.classes, &m.bias);
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))?;
        let cfg = Self::config_path(path);
        std::fs::write(&cfg, self.features.to_string()).map_err(|e| Error::io(cfg, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let mut reader = RecordReader::new(path, &bytes);
        let (classes, features, weights) = reader.f32_record()?;
        let (_, _, bias) = reader.f32_record()?;
        let model = SoftmaxModel::from_parts(classes, features, weights, bias)?;
        let cfg = Self::config_path(path);
        let features: FeatureConfig =
            std::fs::read_to_string(&cfg).map_err(|e| Error::io(&cfg, e))?.parse()?;
        if features.output_dim() != model.features() {
            return Err(Error::LengthMismatch { expected: features.output_dim(), actual: model.features() });
        }
        Ok(Self { features, model })
    }
}
