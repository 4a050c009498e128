//! Truncated path signatures of piecewise-linear paths.
//!
//! Multi-indices are 0-based channel numbers. Level `m` of a signature over
//! `n` channels holds `n^m` values in lexicographic multi-index order.

use crate::error::{Error, Result};
use crate::persistence::PersistenceDiagram;
use crate::vectorize::{landscapes, LANDSCAPE_RESOLUTION};

pub const MAX_LEVEL: usize = 4;
pub const FEATURE_K: usize = 5;
pub const FEATURE_LEVEL: usize = 3;
/// Levels 1..=3 over 5 channels: 5 + 25 + 125.
pub const FEATURE_LEN: usize = 155;

/// `samples[t][c]`, at least two time steps.
#[derive(Clone, Debug, PartialEq)]
pub struct PathND {
    channels: usize,
    samples: Vec<Vec<f64>>,
}

impl PathND {
    pub fn new(samples: Vec<Vec<f64>>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::invalid(format!("a path needs at least 2 samples, got {}", samples.len())));
        }
        let channels = samples[0].len();
        if channels == 0 || samples.iter().any(|s| s.len() != channels) {
            return Err(Error::ShapeMismatch("path samples must share a nonzero channel count".into()));
        }
        if samples.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("path has a non-finite entry"));
        }
        Ok(PathND { channels, samples })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignatureTensor {
    channels: usize,
    /// `levels[0] == [1.0]`.
    levels: Vec<Vec<f64>>,
}

impl SignatureTensor {
    /// The signature of a constant path: 1 at level 0, zero elsewhere.
    pub fn identity(channels: usize, max_level: usize) -> Self {
        let levels = (0..=max_level).map(|m| {
            let mut v = vec![0.0; channels.pow(m as u32)];
            if m == 0 {
                v[0] = 1.0;
            }
            v
        });
        SignatureTensor {
            channels,
            levels: levels.collect(),
        }
    }

    /// Tensor exponential of one increment: level m is Δ^{⊗m} / m!.
    pub fn exp(delta: &[f64], max_level: usize) -> Self {
        let mut levels = vec![vec![1.0]];
        for m in 1..=max_level {
            let prev = &levels[m - 1];
            let mut next = Vec::with_capacity(prev.len() * delta.len());
            for &a in prev {
                for &d in delta {
                    next.push(a * d / m as f64);
                }
            }
            levels.push(next);
        }
        SignatureTensor {
            channels: delta.len(),
            levels,
        }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn max_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, m: usize) -> &[f64] {
        &self.levels[m]
    }

    /// Entry for a 0-based multi-index; the empty index gives level 0.
    pub fn get(&self, index: &[usize]) -> f64 {
        let flat = index.iter().fold(0, |acc, &i| acc * self.channels + i);
        self.levels[index.len()][flat]
    }

    /// Chen product, truncated at the smaller of the two levels.
    pub fn tensor_product(&self, other: &SignatureTensor) -> Result<Self> {
        if self.channels != other.channels {
            return Err(Error::ShapeMismatch(format!(
                "channel counts differ: {} vs {}",
                self.channels, other.channels
            )));
        }
        let top = self.max_level().min(other.max_level());
        let mut levels = Vec::with_capacity(top + 1);
        for m in 0..=top {
            let mut out = vec![0.0; self.channels.pow(m as u32)];
            for i in 0..=m {
                let (a, b) = (&self.levels[i], &other.levels[m - i]);
                for (ia, &x) in a.iter().enumerate() {
                    if x == 0.0 {
                        continue;
                    }
                    let base = ia * b.len();
                    for (ib, &y) in b.iter().enumerate() {
                        out[base + ib] += x * y;
                    }
                }
            }
            levels.push(out);
        }
        Ok(SignatureTensor {
            channels: self.channels,
            levels,
        })
    }

    /// Levels 1..=max_level concatenated.
    pub fn flatten(&self) -> Vec<f64> {
        self.levels[1..].iter().flatten().copied().collect()
    }
}

/// Signature of the piecewise-linear interpolation of `path`, levels 0..=max_level.
pub fn signature(path: &PathND, max_level: usize) -> Result<SignatureTensor> {
    if !(1..=MAX_LEVEL).contains(&max_level) {
        return Err(Error::invalid(format!("signature level must be 1..={MAX_LEVEL}, got {max_level}")));
    }
    let mut acc = SignatureTensor::identity(path.channels, max_level);
    let mut delta = vec![0.0; path.channels];
    for w in path.samples.windows(2) {
        for (d, (a, b)) in delta.iter_mut().zip(w[0].iter().zip(&w[1])) {
            *d = b - a;
        }
        if delta.iter().all(|&d| d == 0.0) {
            continue;
        }
        acc = acc.tensor_product(&SignatureTensor::exp(&delta, max_level))?;
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<usize>);

/// All interleavings of `i` and `j` that keep each operand's order, with
/// multiplicity; `C(|i|+|j|, |i|)` words in total.
pub fn shuffle_product(i: &MultiIndex, j: &MultiIndex) -> Vec<MultiIndex> {
    fn go(a: &[usize], b: &[usize], prefix: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
        if a.is_empty() || b.is_empty() {
            let mut w = prefix.clone();
            w.extend_from_slice(a);
            w.extend_from_slice(b);
            out.push(MultiIndex(w));
            return;
        }
        prefix.push(a[0]);
        go(&a[1..], b, prefix, out);
        prefix.pop();
        prefix.push(b[0]);
        go(a, &b[1..], prefix, out);
        prefix.pop();
    }
    let mut out = Vec::new();
    go(&i.0, &j.0, &mut Vec::new(), &mut out);
    out
}

/// Signatures (levels 1..=3) of the paths of λ_1..λ_5 for dimensions 0 and 1,
/// 2 × 155 values. Time is the grid index and is not a channel.
pub fn signature_feature(d: &PersistenceDiagram) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * FEATURE_LEN);
    for dim in 0..=1 {
        let l = landscapes(d, dim, FEATURE_K, LANDSCAPE_RESOLUTION)?;
        let samples = (0..LANDSCAPE_RESOLUTION)
            .map(|i| l.values.iter().map(|row| row[i]).collect())
            .collect();
        let sig = signature(&PathND::new(samples)?, FEATURE_LEVEL)?;
        out.extend(sig.flatten());
    }
    Ok(out)
}
