//! Planar point sets, the seeded disc/annulus samplers and the `x y` text format.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn dist_sq(&self, other: &Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Where a cloud came from. Carried along for diagnostics only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Source {
    Resize,
    Contour,
    #[default]
    Synthetic,
    File,
}

/// An ordered list of finite planar points. The order defines vertex indices
/// in every complex built from the cloud.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct PointCloud {
    points: Vec<Point2>,
    pub source: Source,
}

impl PointCloud {
    pub fn new(points: Vec<Point2>, source: Source) -> Result<Self> {
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::invalid(format!("point {i} is not finite")));
        }
        Ok(PointCloud { points, source })
    }

    pub fn from_xy(coords: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            coords.iter().map(|&(x, y)| Point2::new(x, y)).collect(),
            Source::Synthetic,
        )
    }

    pub(crate) fn from_points_unchecked(points: Vec<Point2>, source: Source) -> Self {
        debug_assert!(points.iter().all(Point2::is_finite));
        PointCloud { points, source }
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Merges points whose coordinates both agree within `tol`, keeping the
    /// first occurrence. Returns the reduced cloud and, for each input point,
    /// the index of its representative.
    pub fn dedup(&self, tol: f64) -> (PointCloud, Vec<usize>) {
        let n = self.points.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| self.points[a].x.total_cmp(&self.points[b].x).then(a.cmp(&b)));

        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for (pos, &i) in order.iter().enumerate() {
            let p = self.points[i];
            for &j in &order[pos + 1..] {
                let q = self.points[j];
                if q.x - p.x > tol {
                    break;
                }
                if (q.y - p.y).abs() <= tol {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    // smallest original index is the root
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }

        let mut new_index = vec![usize::MAX; n];
        let mut kept = Vec::new();
        for i in 0..n {
            if find(&mut parent, i) == i {
                new_index[i] = kept.len();
                kept.push(self.points[i]);
            }
        }
        let mapping = (0..n).map(|i| new_index[find(&mut parent, i)]).collect();
        (PointCloud::from_points_unchecked(kept, self.source), mapping)
    }

    /// Reads the `x y` per line text format. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<f64> {
                let tok = tok.ok_or_else(|| Error::Parse {
                    line: lineno + 1,
                    reason: "expected two coordinates".into(),
                })?;
                tok.parse::<f64>().map_err(|e| Error::Parse {
                    line: lineno + 1,
                    reason: format!("{tok:?}: {e}"),
                })
            };
            let x = parse(it.next())?;
            let y = parse(it.next())?;
            if it.next().is_some() {
                return Err(Error::Parse {
                    line: lineno + 1,
                    reason: "more than two coordinates".into(),
                });
            }
            points.push(Point2::new(x, y));
        }
        PointCloud::new(points, Source::File)
    }

    /// Writes one `x y` line per point using shortest round-trip decimals.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.points.len() * 24);
        for p in &self.points {
            let _ = writeln!(out, "{} {}", p.x, p.y);
        }
        out
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Seeded generator used for every synthetic fixture. ChaCha8 output is fixed
/// across platforms; `stream` gives independent substreams of one seed.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `n` uniform points on the closed unit disc, by rejection from [-1, 1]².
pub fn sample_disc(n: usize, seed: u64) -> PointCloud {
    let mut rng = seeded_rng(seed, 0);
    let mut points = Vec::with_capacity(n);
    while points.len() < n {
        let p = Point2::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
        if p.x * p.x + p.y * p.y <= 1.0 {
            points.push(p);
        }
    }
    PointCloud::from_points_unchecked(points, Source::Synthetic)
}

/// `n` points uniform in area on the annulus `r_in <= |p| <= r_out`.
pub fn sample_annulus(n: usize, r_in: f64, r_out: f64, seed: u64) -> Result<PointCloud> {
    if !(r_in > 0.0 && r_in < r_out && r_out.is_finite()) {
        return Err(Error::invalid(format!(
            "annulus radii must satisfy 0 < r_in < r_out, got ({r_in}, {r_out})"
        )));
    }
    let mut rng = seeded_rng(seed, 0);
    let (lo, hi) = (r_in * r_in, r_out * r_out);
    let mut points = Vec::with_capacity(n);
    while points.len() < n {
        let p = Point2::new(
            rng.gen_range(-r_out..=r_out),
            rng.gen_range(-r_out..=r_out),
        );
        let r2 = p.x * p.x + p.y * p.y;
        if (lo..=hi).contains(&r2) {
            points.push(p);
        }
    }
    Ok(PointCloud::from_points_unchecked(points, Source::Synthetic))
}

/// Dense symmetric Euclidean distance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

pub fn pairwise_distances(pc: &PointCloud) -> DistanceMatrix {
    let n = pc.len();
    let pts = pc.points();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = pts[i].dist(&pts[j]);
            data[i * n + j] = d;
            data[j * n + i] = d;
        }
    }
    DistanceMatrix { n, data }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn disc_sampler_contract() {
        assert!(sample_disc(0, 7).is_empty());
        let a = sample_disc(200, 42);
        assert_eq!(a.len(), 200);
        assert!(a.points().iter().all(|p| p.norm() <= 1.0));
        assert_eq!(a, sample_disc(200, 42));
        assert_ne!(a, sample_disc(200, 43));
    }

    #[test]
    fn annulus_sampler_contract() {
        let a = sample_annulus(200, 0.5, 1.0, 1).unwrap();
        assert!(a
            .points()
            .iter()
            .all(|p| (0.5..=1.0).contains(&p.norm())));
        assert_eq!(sample_annulus(1, 0.5, 1.0, 99).unwrap().len(), 1);
        assert!(sample_annulus(5, 1.0, 0.5, 1).is_err());
        assert!(sample_annulus(5, 0.0, 0.5, 1).is_err());
    }

    #[test]
    fn annulus_mean_radius_matches_area_expectation() {
        let (r_in, r_out) = (0.5f64, 1.0f64);
        let expected = 2.0 * (r_out.powi(3) - r_in.powi(3)) / (3.0 * (r_out.powi(2) - r_in.powi(2)));
        let pc = sample_annulus(10_000, r_in, r_out, 3).unwrap();
        let mean = pc.points().iter().map(Point2::norm).sum::<f64>() / pc.len() as f64;
        assert!((expected - 0.7778).abs() < 1e-3);
        assert!((mean - expected).abs() < 0.01, "mean radius {mean}");
    }

    #[test]
    fn three_point_triangle_distances() {
        let pc = PointCloud::from_xy(&[(0.0, 0.0), (1.0, 2.0), (3.0, 0.0)]).unwrap();
        let d = pairwise_distances(&pc);
        assert_eq!(d.get(0, 1), 5f64.sqrt());
        assert_eq!(d.get(1, 2), 8f64.sqrt());
        assert_eq!(d.get(0, 2), 3.0);
        assert_eq!(d.get(2, 0), 3.0);
    }

    #[test]
    fn degenerate_distances() {
        let one = PointCloud::from_xy(&[(1.0, 1.0)]).unwrap();
        let d = pairwise_distances(&one);
        assert_eq!((d.len(), d.get(0, 0)), (1, 0.0));
        let dup = PointCloud::from_xy(&[(1.0, 1.0), (1.0, 1.0)]).unwrap();
        assert_eq!(pairwise_distances(&dup).get(0, 1), 0.0);
    }

    #[test]
    fn dedup_keeps_first_occurrence() {
        let pc = PointCloud::from_xy(&[
            (1.0, 1.0),
            (0.0, 0.0),
            (1.0 + 1e-12, 1.0),
            (0.0, 0.0),
            (2.0, 0.0),
        ])
        .unwrap();
        let (d, map) = pc.dedup(1e-9);
        assert_eq!(d.len(), 3);
        assert_eq!(d.points()[0], Point2::new(1.0, 1.0));
        assert_eq!(map, vec![0, 1, 0, 1, 2]);
    }

    #[test]
    fn text_format_rejects_garbage() {
        assert!(PointCloud::parse("1 2\n3\n").is_err());
        assert!(PointCloud::parse("1 2 3\n").is_err());
        assert!(PointCloud::parse("1 nan\n").is_err());
        let pc = PointCloud::parse("# header\n\n 1.5  -2 # trailing\n").unwrap();
        assert_eq!(pc.points(), &[Point2::new(1.5, -2.0)]);
    }

    proptest! {
        #[test]
        fn text_round_trip_is_exact(coords in prop::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 0..40)) {
            let pc = PointCloud::from_xy(&coords).unwrap();
            let back = PointCloud::parse(&pc.to_text()).unwrap();
            prop_assert_eq!(back.points(), pc.points());
        }

        #[test]
        fn triangle_inequality(coords in prop::collection::vec((-10f64..10.0, -10f64..10.0), 3..12)) {
            let pc = PointCloud::from_xy(&coords).unwrap();
            let d = pairwise_distances(&pc);
            let n = d.len();
            for i in 0..n {
                prop_assert_eq!(d.get(i, i), 0.0);
                for j in 0..n {
                    prop_assert_eq!(d.get(i, j), d.get(j, i));
                    for k in 0..n {
                        prop_assert!(d.get(i, k) <= d.get(i, j) + d.get(j, k) + 1e-12);
                    }
                }
            }
        }
    }
}
