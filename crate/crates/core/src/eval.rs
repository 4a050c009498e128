//! Logistic baseline classifier, segmentation IoU and a synthetic blob dataset.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{read_pgm, write_pgm, GrayImage};
use crate::pointcloud::seeded_rng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleState {
    pub eta_max: f64,
    pub eta_min: f64,
    pub t_max: usize,
    pub t_cur: usize,
}

/// η_min + ½(η_max − η_min)(1 + cos(π · T_cur / T_max)).
pub fn cosine_lr(s: &ScheduleState) -> Result<f64> {
    if s.t_max == 0 {
        return Err(Error::invalid("cosine schedule needs T_max > 0"));
    }
    if s.t_cur > s.t_max || !(s.eta_min <= s.eta_max) {
        return Err(Error::invalid(format!("bad schedule state {s:?}")));
    }
    let phase = s.t_cur as f64 / s.t_max as f64 * std::f64::consts::PI;
    Ok(s.eta_min + 0.5 * (s.eta_max - s.eta_min) * (1.0 + phase.cos()))
}

/// `(max, ln Σ exp(x − max))`; ln_1p keeps precision when the other terms are tiny.
fn split_log_sum_exp(logits: &[f64]) -> (f64, f64) {
    let top = (0..logits.len()).fold(0, |b, i| if logits[i] > logits[b] { i } else { b });
    let m = logits[top];
    let rest: f64 = (0..logits.len()).filter(|&i| i != top).map(|i| (logits[i] - m).exp()).sum();
    (m, rest.ln_1p())
}

fn log_sum_exp(logits: &[f64]) -> f64 {
    let (m, tail) = split_log_sum_exp(logits);
    m + tail
}

/// −log softmax(logits)[label], computed with the max subtracted.
pub fn cross_entropy(logits: &[f64], label: usize) -> f64 {
    let (m, tail) = split_log_sum_exp(logits);
    ((m - logits[label]) + tail).max(0.0)
}

/// Gradient of [`cross_entropy`] with respect to the logits: softmax − one-hot.
pub fn cross_entropy_grad(logits: &[f64], label: usize) -> Vec<f64> {
    let lse = log_sum_exp(logits);
    let mut g: Vec<f64> = logits.iter().map(|&x| (x - lse).exp()).collect();
    g[label] -= 1.0;
    g
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledFeatures {
    pub ids: Vec<String>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<usize>,
    pub class_names: Vec<String>,
}

impl LabeledFeatures {
    pub fn new(ids: Vec<String>, x: Vec<Vec<f64>>, y: Vec<usize>, class_names: Vec<String>) -> Result<Self> {
        if ids.len() != x.len() || x.len() != y.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} ids, {} rows, {} labels",
                ids.len(),
                x.len(),
                y.len()
            )));
        }
        if let Some(row) = x.iter().position(|r| r.len() != x[0].len()) {
            return Err(Error::ShapeMismatch(format!("row {row} has {} features", x[row].len())));
        }
        if let Some(&bad) = y.iter().find(|&&c| c >= class_names.len()) {
            return Err(Error::invalid(format!("label {bad} out of range")));
        }
        Ok(LabeledFeatures { ids, x, y, class_names })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn features(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    /// Reads the `id,label,f_0,…` CSV written by feature extraction. Class
    /// names are the sorted distinct labels unless `classes` fixes them.
    pub fn from_csv(path: &Path, classes: Option<&[String]>) -> Result<Self> {
        let io = |e: csv::Error| Error::io(path, std::io::Error::other(e));
        let mut r = csv::Reader::from_path(path).map_err(io)?;
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(io)?;
            let line = i + 2;
            if rec.len() < 2 {
                return Err(Error::Parse {
                    line,
                    reason: "expected id and label columns".into(),
                });
            }
            let label = rec[1].to_string();
            if label.is_empty() {
                return Err(Error::Parse {
                    line,
                    reason: format!("row {} has no label", &rec[0]),
                });
            }
            let values = rec
                .iter()
                .skip(2)
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::Parse {
                    line,
                    reason: e.to_string(),
                })?;
            rows.push((rec[0].to_string(), label, values));
        }
        let class_names: Vec<String> = match classes {
            Some(c) => c.to_vec(),
            None => rows.iter().map(|r| r.1.clone()).collect::<BTreeSet<_>>().into_iter().collect(),
        };
        let mut ids = Vec::new();
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (id, label, values) in rows {
            let c = class_names
                .iter()
                .position(|n| *n == label)
                .ok_or_else(|| Error::invalid(format!("unknown class {label:?}")))?;
            ids.push(id);
            x.push(values);
            y.push(c);
        }
        Self::new(ids, x, y, class_names)
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        LabeledFeatures {
            ids: idx.iter().map(|&i| self.ids[i].clone()).collect(),
            x: idx.iter().map(|&i| self.x[i].clone()).collect(),
            y: idx.iter().map(|&i| self.y[i]).collect(),
            class_names: self.class_names.clone(),
        }
    }
}

/// Seeded per-class shuffle; `round(test_fraction · n_c)` rows of each class
/// go to the test split. Both splits keep the original row order.
pub fn stratified_split(data: &LabeledFeatures, test_fraction: f64, seed: u64) -> Result<(LabeledFeatures, LabeledFeatures)> {
    if !(0.0..1.0).contains(&test_fraction) {
        return Err(Error::invalid(format!("test fraction must be in [0, 1), got {test_fraction}")));
    }
    let mut rng = seeded_rng(seed, 0x5917);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for c in 0..data.class_names.len() {
        let mut idx: Vec<usize> = (0..data.len()).filter(|&i| data.y[i] == c).collect();
        idx.shuffle(&mut rng);
        let n_test = (idx.len() as f64 * test_fraction).round() as usize;
        test.extend_from_slice(&idx[..n_test]);
        train.extend_from_slice(&idx[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((data.subset(&train), data.subset(&test)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch: usize,
    pub eta_max: f64,
    pub eta_min: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch: 32,
            eta_max: 0.1,
            eta_min: 0.001,
            seed: 0,
        }
    }
}

/// Multinomial logistic regression on z-scored features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub class_names: Vec<String>,
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    /// One row of weights per class.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl LogisticModel {
    pub fn zeros(class_names: Vec<String>, features: usize) -> Self {
        let c = class_names.len();
        LogisticModel {
            class_names,
            mean: vec![0.0; features],
            scale: vec![1.0; features],
            weights: vec![vec![0.0; features]; c],
            bias: vec![0.0; c],
        }
    }

    pub fn features(&self) -> usize {
        self.mean.len()
    }

    fn standardize(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }

    fn logits_std(&self, z: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| b + w.iter().zip(z).map(|(a, x)| a * x).sum::<f64>())
            .collect()
    }

    pub fn logits(&self, row: &[f64]) -> Vec<f64> {
        self.logits_std(&self.standardize(row))
    }

    /// Arg-max class; ties go to the lowest index.
    pub fn predict(&self, row: &[f64]) -> usize {
        let l = self.logits(row);
        let mut best = 0;
        for (i, &v) in l.iter().enumerate() {
            if v > l[best] {
                best = i;
            }
        }
        best
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Model(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: LogisticModel = serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
        let (c, f) = (m.class_names.len(), m.mean.len());
        if m.scale.len() != f || m.bias.len() != c || m.weights.len() != c || m.weights.iter().any(|w| w.len() != f) {
            return Err(Error::Model("inconsistent model dimensions".into()));
        }
        Ok(m)
    }
}

/// Minibatch SGD on the mean cross-entropy with a per-epoch cosine learning
/// rate. Returns the model and each epoch's mean training loss.
pub fn train_logistic(data: &LabeledFeatures, cfg: &TrainConfig) -> Result<(LogisticModel, Vec<f64>)> {
    if data.is_empty() {
        return Err(Error::invalid("no training rows"));
    }
    if data.y.iter().collect::<BTreeSet<_>>().len() < 2 {
        return Err(Error::invalid("training data has a single class"));
    }
    if data.x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid("training data has non-finite features"));
    }
    if cfg.batch == 0 {
        return Err(Error::invalid("batch size must be positive"));
    }
    let f = data.features();
    let n = data.len() as f64;
    let mut model = LogisticModel::zeros(data.class_names.clone(), f);
    if cfg.epochs == 0 {
        return Ok((model, Vec::new()));
    }
    for j in 0..f {
        let mean = data.x.iter().map(|r| r[j]).sum::<f64>() / n;
        let var = data.x.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
        model.mean[j] = mean;
        model.scale[j] = if var > 0.0 { var.sqrt() } else { 1.0 };
    }
    let z: Vec<Vec<f64>> = data.x.iter().map(|r| model.standardize(r)).collect();
    let c = data.class_names.len();
    let mut rng = seeded_rng(cfg.seed, 0x7ea1);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let lr = cosine_lr(&ScheduleState {
            eta_max: cfg.eta_max,
            eta_min: cfg.eta_min,
            t_max: cfg.epochs,
            t_cur: epoch,
        })?;
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch) {
            let mut gw = vec![vec![0.0; f]; c];
            let mut gb = vec![0.0; c];
            for &i in batch {
                let logits = model.logits_std(&z[i]);
                epoch_loss += cross_entropy(&logits, data.y[i]);
                for (k, g) in cross_entropy_grad(&logits, data.y[i]).into_iter().enumerate() {
                    gb[k] += g;
                    for (acc, x) in gw[k].iter_mut().zip(&z[i]) {
                        *acc += g * x;
                    }
                }
            }
            let step = lr / batch.len() as f64;
            for k in 0..c {
                model.bias[k] -= step * gb[k];
                for (w, g) in model.weights[k].iter_mut().zip(&gw[k]) {
                    *w -= step * g;
                }
            }
        }
        trace.push(epoch_loss / n);
    }
    Ok((model, trace))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub accuracy: f64,
    /// `confusion[truth][predicted]` over the model's classes.
    pub confusion: Vec<Vec<usize>>,
    pub predictions: Vec<usize>,
}

/// Accuracy and confusion matrix. Data classes are matched to model classes by name.
pub fn evaluate(model: &LogisticModel, data: &LabeledFeatures) -> Result<Evaluation> {
    if data.features() != model.features() && !data.is_empty() {
        return Err(Error::ShapeMismatch(format!(
            "model expects {} features, data has {}",
            model.features(),
            data.features()
        )));
    }
    let map: Vec<usize> = data
        .class_names
        .iter()
        .map(|name| {
            model
                .class_names
                .iter()
                .position(|m| m == name)
                .ok_or_else(|| Error::invalid(format!("class {name:?} unknown to the model")))
        })
        .collect::<Result<_>>()?;
    let c = model.class_names.len();
    let mut confusion = vec![vec![0; c]; c];
    let predictions: Vec<usize> = data.x.iter().map(|r| model.predict(r)).collect();
    let mut correct = 0;
    for (&p, &y) in predictions.iter().zip(&data.y) {
        let truth = map[y];
        confusion[truth][p] += 1;
        correct += (truth == p) as usize;
    }
    let accuracy = if data.is_empty() {
        0.0
    } else {
        correct as f64 / data.len() as f64
    };
    Ok(Evaluation {
        accuracy,
        confusion,
        predictions,
    })
}

/// Per-pixel class indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMask {
    width: usize,
    height: usize,
    data: Vec<u16>,
}

impl LabelMask {
    pub fn new(width: usize, height: usize, data: Vec<u16>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::ShapeMismatch(format!(
                "{width}x{height} mask with {} values",
                data.len()
            )));
        }
        Ok(LabelMask { width, height, data })
    }

    /// Raw PGM sample values are the class indices; no scaling.
    pub fn read(path: &Path) -> Result<Self> {
        let raw = read_pgm(path)?;
        Self::new(raw.width, raw.height, raw.data)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let maxval = self.data.iter().copied().max().unwrap_or(0).max(1);
        write_pgm(path, self.width, self.height, maxval, &self.data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u16] {
        &self.data
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IouReport {
    pub per_class: Vec<BigRational>,
    /// Classes found in neither mask; their IoU is set to 1.
    pub absent: Vec<bool>,
    /// Mean over all classes.
    pub total: BigRational,
    /// Mean over the classes present in at least one mask.
    pub total_present: Option<BigRational>,
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

impl IouReport {
    pub fn per_class_f64(&self) -> Vec<f64> {
        self.per_class.iter().map(ratio_to_f64).collect()
    }

    pub fn total_f64(&self) -> f64 {
        ratio_to_f64(&self.total)
    }
}

fn ratio(n: usize, d: usize) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Intersection over union per class with exact rational arithmetic.
pub fn iou_scores(pred: &LabelMask, truth: &LabelMask, classes: usize) -> Result<IouReport> {
    if (pred.width, pred.height) != (truth.width, truth.height) {
        return Err(Error::ShapeMismatch(format!(
            "prediction is {}x{}, truth is {}x{}",
            pred.width, pred.height, truth.width, truth.height
        )));
    }
    if classes == 0 {
        return Err(Error::invalid("need at least one class"));
    }
    if let Some(&v) = pred.data.iter().chain(&truth.data).find(|&&v| v as usize >= classes) {
        return Err(Error::invalid(format!("mask value {v} is not a class below {classes}")));
    }
    let mut inter = vec![0usize; classes];
    let mut union = vec![0usize; classes];
    for (&p, &t) in pred.data.iter().zip(&truth.data) {
        let (p, t) = (p as usize, t as usize);
        if p == t {
            inter[p] += 1;
            union[p] += 1;
        } else {
            union[p] += 1;
            union[t] += 1;
        }
    }
    let absent: Vec<bool> = union.iter().map(|&u| u == 0).collect();
    let per_class: Vec<BigRational> = (0..classes)
        .map(|c| if absent[c] { ratio(1, 1) } else { ratio(inter[c], union[c]) })
        .collect();
    let sum = per_class.iter().fold(BigRational::zero(), |a, b| a + b);
    let total = sum / BigInt::from(classes);
    let present: Vec<&BigRational> = per_class.iter().zip(&absent).filter(|(_, &a)| !a).map(|(r, _)| r).collect();
    let total_present = (!present.is_empty()).then(|| {
        present.iter().fold(BigRational::zero(), |a, &b| a + b) / BigInt::from(present.len())
    });
    Ok(IouReport {
        per_class,
        absent,
        total,
        total_present,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthClass {
    pub name: String,
    pub blobs: (usize, usize),
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub size: usize,
    pub classes: Vec<SynthClass>,
    /// Blob peak intensities are drawn from this range.
    pub amplitude: (f64, f64),
}

impl Default for SynthConfig {
    fn default() -> Self {
        let class = |name: &str, blobs, sigma| SynthClass {
            name: name.into(),
            blobs,
            sigma,
        };
        SynthConfig {
            size: 256,
            classes: vec![
                class("dense", (80, 120), 2.0),
                class("sparse", (15, 30), 2.0),
                class("large", (5, 10), 8.0),
            ],
            amplitude: (0.5, 1.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthImage {
    pub id: String,
    pub class: usize,
    pub blobs: usize,
    pub image: GrayImage,
}

fn render(cfg: &SynthConfig, class: usize, index: usize, seed: u64) -> SynthImage {
    let spec = &cfg.classes[class];
    let mut rng = seeded_rng(seed, ((class as u64) << 32) | index as u64);
    let size = cfg.size;
    let blobs = rng.gen_range(spec.blobs.0..=spec.blobs.1);
    let mut acc = vec![0.0f64; size * size];
    for _ in 0..blobs {
        let cx = rng.gen_range(0.0..size as f64);
        let cy = rng.gen_range(0.0..size as f64);
        let sigma = spec.sigma * rng.gen_range(0.9..1.1);
        let amp = rng.gen_range(cfg.amplitude.0..=cfg.amplitude.1);
        let reach = (4.0 * sigma).ceil();
        let c0 = (cx - reach).max(0.0) as usize;
        let c1 = ((cx + reach) as usize).min(size - 1);
        let r0 = (cy - reach).max(0.0) as usize;
        let r1 = ((cy + reach) as usize).min(size - 1);
        for r in r0..=r1 {
            for c in c0..=c1 {
                let dx = c as f64 + 0.5 - cx;
                let dy = r as f64 + 0.5 - cy;
                acc[r * size + c] += amp * (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp();
            }
        }
    }
    let data = acc.into_iter().map(|v| v.min(1.0)).collect();
    SynthImage {
        id: format!("{}_{index:04}", spec.name),
        class,
        blobs,
        image: GrayImage::new(size, size, data).expect("values clamped to [0, 1]"),
    }
}

/// `n_per_class` Gaussian-blob images for each class, ordered by class then index.
pub fn synth_dataset(n_per_class: usize, seed: u64, cfg: &SynthConfig) -> Result<Vec<SynthImage>> {
    if n_per_class == 0 {
        return Err(Error::invalid("need at least one image per class"));
    }
    let jobs: Vec<(usize, usize)> = (0..cfg.classes.len())
        .flat_map(|c| (0..n_per_class).map(move |i| (c, i)))
        .collect();
    Ok(jobs.par_iter().map(|&(c, i)| render(cfg, c, i, seed)).collect())
}

/// Writes the dataset as 8-bit PGMs under `dir/<class>/<id>.pgm`.
pub fn write_synth_dataset(dir: &Path, n_per_class: usize, seed: u64, cfg: &SynthConfig) -> Result<Vec<PathBuf>> {
    let images = synth_dataset(n_per_class, seed, cfg)?;
    for class in &cfg.classes {
        let sub = dir.join(&class.name);
        fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;
    }
    images
        .par_iter()
        .map(|img| {
            let path = dir.join(&cfg.classes[img.class].name).join(format!("{}.pgm", img.id));
            img.image.write_pgm8(&path).map(|_| path)
        })
        .collect()
}
