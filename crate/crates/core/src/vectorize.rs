//! Persistence landscapes and silhouettes sampled on a uniform grid.
//!
//! Infinite deaths are truncated to the largest finite death anywhere in the
//! diagram, or to the complex's largest filtration value when no finite
//! death exists.

use crate::error::{Error, Result};
use crate::persistence::PersistenceDiagram;

pub const SILHOUETTE_RESOLUTION: usize = 200;
pub const LANDSCAPE_RESOLUTION: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tent {
    pub birth: f64,
    pub death: f64,
}

impl Tent {
    pub fn new(birth: f64, death: f64) -> Result<Self> {
        if !(birth <= death) || !death.is_finite() {
            return Err(Error::invalid(format!("tent needs finite birth <= death, got ({birth}, {death})")));
        }
        Ok(Tent { birth, death })
    }
}

pub fn tent_eval(p: Tent, t: f64) -> f64 {
    (t - p.birth).min(p.death - t).max(0.0)
}

/// Tents of dimension `dim` after infinite-death truncation.
pub fn tents(d: &PersistenceDiagram, dim: usize) -> Vec<Tent> {
    let cap = d.max_finite_death().unwrap_or(d.max_filtration);
    d.in_dim(dim)
        .map(|p| {
            let death = if p.death.is_infinite() { cap.max(p.birth) } else { p.death };
            Tent { birth: p.birth, death }
        })
        .collect()
}

/// Uniform grid over `[min birth, max death]` of the tents, `[0, 1]` when
/// there are none.
fn grid_for(tents: &[Tent], resolution: usize) -> (f64, f64, Vec<f64>) {
    let (mut lo, mut hi) = if tents.is_empty() {
        (0.0, 1.0)
    } else {
        (
            tents.iter().map(|p| p.birth).fold(f64::INFINITY, f64::min),
            tents.iter().map(|p| p.death).fold(f64::NEG_INFINITY, f64::max),
        )
    };
    if !(hi > lo) {
        hi = lo + 1.0;
    }
    if !lo.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    let step = (hi - lo) / (resolution - 1) as f64;
    let mut grid: Vec<f64> = (0..resolution).map(|i| lo + step * i as f64).collect();
    grid[resolution - 1] = hi;
    (lo, hi, grid)
}

fn check_resolution(resolution: usize) -> Result<()> {
    if resolution < 2 {
        return Err(Error::invalid(format!("resolution must be >= 2, got {resolution}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct LandscapeSet {
    pub k_max: usize,
    pub resolution: usize,
    /// Raw domain of the grid.
    pub t_min: f64,
    pub t_max: f64,
    pub t_grid: Vec<f64>,
    /// `values[k][i]` is λ_{k+1} at `t_grid[i]`.
    pub values: Vec<Vec<f64>>,
    /// The grid is reported on `[0, 1]` by [`Self::normalized_grid`].
    pub domain_normalized: bool,
}

impl LandscapeSet {
    pub fn zeros(k_max: usize, resolution: usize) -> Self {
        let (t_min, t_max, t_grid) = grid_for(&[], resolution);
        LandscapeSet {
            k_max,
            resolution,
            t_min,
            t_max,
            t_grid,
            values: vec![vec![0.0; resolution]; k_max],
            domain_normalized: true,
        }
    }

    pub fn level(&self, k: usize) -> &[f64] {
        &self.values[k]
    }

    pub fn normalized_grid(&self) -> Vec<f64> {
        let span = self.t_max - self.t_min;
        self.t_grid.iter().map(|t| (t - self.t_min) / span).collect()
    }

    fn same_grid(&self, other: &LandscapeSet) -> bool {
        self.k_max == other.k_max && self.resolution == other.resolution && self.t_grid == other.t_grid
    }
}

/// λ_1..λ_{k_max} of dimension `dim`; λ_k(t) is the k-th largest tent value at t.
pub fn landscapes(d: &PersistenceDiagram, dim: usize, k_max: usize, resolution: usize) -> Result<LandscapeSet> {
    check_resolution(resolution)?;
    let tents = tents(d, dim);
    if tents.is_empty() {
        return Ok(LandscapeSet::zeros(k_max, resolution));
    }
    let (t_min, t_max, t_grid) = grid_for(&tents, resolution);
    let mut values = vec![vec![0.0; resolution]; k_max];
    let mut column = Vec::with_capacity(tents.len());
    for (i, &t) in t_grid.iter().enumerate() {
        column.clear();
        column.extend(tents.iter().map(|&p| tent_eval(p, t)));
        column.sort_unstable_by(|a, b| b.total_cmp(a));
        for (k, row) in values.iter_mut().enumerate() {
            row[i] = column.get(k).copied().unwrap_or(0.0);
        }
    }
    Ok(LandscapeSet {
        k_max,
        resolution,
        t_min,
        t_max,
        t_grid,
        values,
        domain_normalized: true,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightKind {
    Constant,
    /// w = (death − birth)^p
    Power(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SilhouettePath {
    pub t_min: f64,
    pub t_max: f64,
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub weight_kind: WeightKind,
}

/// Weighted mean of the tents of dimension `dim` on the landscape grid.
pub fn silhouette(
    d: &PersistenceDiagram,
    dim: usize,
    weight_kind: WeightKind,
    resolution: usize,
) -> Result<SilhouettePath> {
    check_resolution(resolution)?;
    let tents = tents(d, dim);
    let (t_min, t_max, t_grid) = grid_for(&tents, resolution);
    let weights: Vec<f64> = tents
        .iter()
        .map(|p| match weight_kind {
            WeightKind::Constant => 1.0,
            WeightKind::Power(q) => (p.death - p.birth).powf(q),
        })
        .collect();
    let total: f64 = weights.iter().sum();
    let values = t_grid
        .iter()
        .map(|&t| {
            if total > 0.0 {
                tents.iter().zip(&weights).map(|(&p, w)| w * tent_eval(p, t)).sum::<f64>() / total
            } else {
                0.0
            }
        })
        .collect();
    Ok(SilhouettePath {
        t_min,
        t_max,
        t_grid,
        values,
        weight_kind,
    })
}

/// Constant-weight silhouettes of dimensions 0 and 1, concatenated (2 × resolution).
pub fn silhouette_feature(d: &PersistenceDiagram, resolution: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * resolution);
    for dim in 0..=1 {
        out.extend(silhouette(d, dim, WeightKind::Constant, resolution)?.values);
    }
    Ok(out)
}

/// (Σ_k ‖λ_k‖_p^p)^{1/p}, integrals by the trapezoid rule on the raw grid.
pub fn landscape_norm(l: &LandscapeSet, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::invalid(format!("norm exponent must be >= 1, got {p}")));
    }
    let mut total = 0.0;
    for row in &l.values {
        for i in 1..l.t_grid.len() {
            let h = l.t_grid[i] - l.t_grid[i - 1];
            total += h * (row[i - 1].powf(p) + row[i].powf(p)) / 2.0;
        }
    }
    Ok(total.powf(1.0 / p))
}

/// Pointwise mean of landscapes sampled on one grid.
pub fn mean_landscape(ls: &[LandscapeSet]) -> Result<LandscapeSet> {
    let first = ls.first().ok_or_else(|| Error::invalid("mean of no landscapes"))?;
    if let Some(bad) = ls.iter().position(|l| !l.same_grid(first)) {
        return Err(Error::ShapeMismatch(format!("landscape {bad} is sampled on a different grid")));
    }
    let n = ls.len() as f64;
    let mut out = first.clone();
    for (k, row) in out.values.iter_mut().enumerate() {
        for (i, v) in row.iter_mut().enumerate() {
            *v = ls.iter().map(|l| l.values[k][i]).sum::<f64>() / n;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::Convention;
    use proptest::prelude::*;

    fn dgm(triples: &[(usize, f64, f64)]) -> PersistenceDiagram {
        PersistenceDiagram::from_triples(triples, Convention::AlphaSquaredRadius).unwrap()
    }

    /// λ_k(t) as the largest m with at least k tents at height ≥ m.
    fn rank_landscape(tents: &[Tent], k: usize, t: f64) -> f64 {
        let heights: Vec<f64> = tents.iter().map(|&p| tent_eval(p, t)).collect();
        heights
            .iter()
            .copied()
            .filter(|&m| heights.iter().filter(|&&h| h >= m).count() >= k)
            .fold(0.0, f64::max)
    }

    #[test]
    fn tent_values() {
        let t = Tent::new(0.0, 2.0).unwrap();
        assert_eq!(tent_eval(t, 1.0), 1.0);
        assert_eq!(tent_eval(t, 3.0), 0.0);
        assert_eq!(tent_eval(Tent::new(1.0, 3.0).unwrap(), 1.5), 0.5);
        assert!(Tent::new(2.0, 1.0).is_err());
    }

    #[test]
    fn single_bar_landscape() {
        let l = landscapes(&dgm(&[(0, 0.0, 2.0)]), 0, 3, 5).unwrap();
        assert_eq!(l.t_grid, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(l.level(0), &[0.0, 0.5, 1.0, 0.5, 0.0]);
        assert_eq!(l.level(1), &[0.0; 5]);
        assert_eq!(l.level(2), &[0.0; 5]);
        assert_eq!(l.normalized_grid(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn overlapping_bars() {
        let l = landscapes(&dgm(&[(0, 0.0, 2.0), (0, 1.0, 3.0)]), 0, 2, 7).unwrap();
        assert_eq!(l.t_grid[3], 1.5);
        assert_eq!(l.level(1)[3], 0.5);
        let s = silhouette(&dgm(&[(0, 0.0, 2.0), (0, 1.0, 3.0)]), 0, WeightKind::Constant, 4).unwrap();
        assert_eq!(s.t_grid[1], 1.0);
        assert_eq!(s.values[1], 0.5);
    }

    #[test]
    fn empty_dimension_is_zero() {
        let l = landscapes(&dgm(&[(1, 0.0, 2.0)]), 0, 2, 3).unwrap();
        assert_eq!((l.t_min, l.t_max), (0.0, 1.0));
        assert!(l.values.iter().flatten().all(|&v| v == 0.0));
        let s = silhouette(&dgm(&[]), 1, WeightKind::Constant, 3).unwrap();
        assert_eq!(s.values, vec![0.0; 3]);
        assert!(landscapes(&dgm(&[]), 0, 2, 1).is_err());
    }

    #[test]
    fn infinite_bars_are_truncated() {
        let d = dgm(&[(0, 0.0, f64::INFINITY), (0, 0.0, 1.0), (1, 0.5, 3.0)]);
        let t = tents(&d, 0);
        assert_eq!(t[1].death, 3.0);
        let only_inf = PersistenceDiagram {
            max_filtration: 4.0,
            ..dgm(&[(0, 0.0, f64::INFINITY)])
        };
        assert_eq!(tents(&only_inf, 0)[0].death, 4.0);
    }

    #[test]
    fn silhouette_weights() {
        let single = dgm(&[(0, 0.0, 2.0)]);
        let s = silhouette(&single, 0, WeightKind::Constant, 9).unwrap();
        let l = landscapes(&single, 0, 1, 9).unwrap();
        assert_eq!(s.values, l.values[0]);
        let same = dgm(&[(0, 0.0, 2.0), (0, 0.0, 2.0), (0, 0.0, 2.0)]);
        let s = silhouette(&same, 0, WeightKind::Power(2.0), 9).unwrap();
        for (&t, &v) in s.t_grid.iter().zip(&s.values) {
            assert!((v - tent_eval(Tent::new(0.0, 2.0).unwrap(), t)).abs() < 1e-15);
        }
        // long bar dominates under power weights
        let two = dgm(&[(0, 0.0, 4.0), (0, 0.0, 1.0)]);
        let s = silhouette(&two, 0, WeightKind::Power(1.0), 5).unwrap();
        assert!((s.values[1] - (4.0 * 1.0 + 1.0 * 0.0) / 5.0).abs() < 1e-15);
    }

    #[test]
    fn norms() {
        let l = landscapes(&dgm(&[(0, 0.0, 2.0)]), 0, 2, 5).unwrap();
        assert_eq!(landscape_norm(&l, 1.0).unwrap(), 1.0);
        assert_eq!(landscape_norm(&LandscapeSet::zeros(3, 10), 2.0).unwrap(), 0.0);
        let mut scaled = l.clone();
        scaled.values.iter_mut().flatten().for_each(|v| *v *= 3.0);
        for p in [1.0, 2.0, 3.5] {
            let (a, b) = (landscape_norm(&l, p).unwrap(), landscape_norm(&scaled, p).unwrap());
            assert!((b - 3.0 * a).abs() < 1e-12);
        }
        assert!(landscape_norm(&l, 0.5).is_err());
    }

    #[test]
    fn means() {
        let l = landscapes(&dgm(&[(0, 0.0, 2.0), (0, 0.5, 1.0)]), 0, 2, 5).unwrap();
        assert_eq!(mean_landscape(&[l.clone(), l.clone(), l.clone()]).unwrap(), l);
        let mut zero = l.clone();
        zero.values.iter_mut().flatten().for_each(|v| *v = 0.0);
        let half = mean_landscape(&[l.clone(), zero]).unwrap();
        for (a, b) in half.values.iter().flatten().zip(l.values.iter().flatten()) {
            assert_eq!(*a, b / 2.0);
        }
        let other = landscapes(&dgm(&[(0, 0.0, 3.0)]), 0, 2, 5).unwrap();
        assert!(matches!(mean_landscape(&[l, other]), Err(Error::ShapeMismatch(_))));
        assert!(mean_landscape(&[]).is_err());
    }

    fn diagram_strategy() -> impl Strategy<Value = PersistenceDiagram> {
        prop::collection::vec((0f64..5.0, 0f64..3.0), 1..12).prop_map(|v| {
            dgm(&v.into_iter().map(|(b, l)| (0, b, b + l)).collect::<Vec<_>>())
        })
    }

    proptest! {
        #[test]
        fn kth_largest_and_ordering(d in diagram_strategy(), res in 2usize..40) {
            let l = landscapes(&d, 0, 4, res).unwrap();
            let t = tents(&d, 0);
            for i in 0..res {
                for k in 0..4 {
                    prop_assert_eq!(l.values[k][i], rank_landscape(&t, k + 1, l.t_grid[i]));
                    if k > 0 {
                        prop_assert!(l.values[k - 1][i] >= l.values[k][i]);
                    }
                }
            }
        }

        #[test]
        fn landscapes_are_one_lipschitz(d in diagram_strategy()) {
            let l = landscapes(&d, 0, 3, 50).unwrap();
            for row in &l.values {
                for i in 1..50 {
                    let dt = l.t_grid[i] - l.t_grid[i - 1];
                    prop_assert!((row[i] - row[i - 1]).abs() <= dt + 1e-12);
                }
            }
        }

        #[test]
        fn constant_silhouette_is_tent_mean(d in diagram_strategy()) {
            let s = silhouette(&d, 0, WeightKind::Constant, 30).unwrap();
            let l = landscapes(&d, 0, 1, 30).unwrap();
            let t = tents(&d, 0);
            for (i, &x) in s.t_grid.iter().enumerate() {
                let mean = t.iter().map(|&p| tent_eval(p, x)).sum::<f64>() / t.len() as f64;
                prop_assert!((s.values[i] - mean).abs() < 1e-12);
                prop_assert!(s.values[i] <= l.values[0][i] + 1e-12);
            }
        }
    }
}
