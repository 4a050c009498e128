//! Filtered simplicial complexes on planar point clouds: Vietoris–Rips,
//! Čech and alpha filtrations.
//!
//! Each builder tags its output with the [`Convention`] of its filtration
//! values, since the three constructions live on different scales:
//! Rips uses edge length (diameter), Čech uses enclosing-ball radius and
//! alpha uses squared radius.

mod delaunay;
mod meb;

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};

pub use delaunay::{delaunay_2d, DelaunayTriangulation};
pub use meb::{circumradius_sq, min_enclosing_ball_radius, min_enclosing_ball_radius_sq};

use crate::error::{Error, Result};
use crate::pointcloud::{pairwise_distances, PointCloud};

/// Coordinates closer than this are merged before any complex is built.
pub const DEDUP_TOL: f64 = 1e-9;

/// Largest cloud accepted by [`build_cech`].
pub const CECH_SIZE_CAP: usize = 64;

/// A simplex as a strictly increasing list of vertex indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex(Vec<usize>);

impl Simplex {
    /// Sorts the vertices; fails on an empty or repeated vertex list.
    pub fn new(mut vertices: Vec<usize>) -> Result<Self> {
        vertices.sort_unstable();
        if vertices.is_empty() || vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("invalid simplex {vertices:?}")));
        }
        Ok(Simplex(vertices))
    }

    pub(crate) fn from_sorted(vertices: Vec<usize>) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]) && !vertices.is_empty());
        Simplex(vertices)
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// Codimension-one faces, the i-th omitting vertex i.
    pub fn facets(&self) -> impl Iterator<Item = Simplex> + '_ {
        let n = self.0.len();
        (0..n).filter(move |_| n > 1).map(move |skip| {
            Simplex(
                self.0
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &v)| v)
                    .collect(),
            )
        })
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.0 {
            if !first {
                f.write_char(' ')?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Convention {
    /// Edge length; a simplex enters at its diameter.
    RipsDiameter,
    /// Radius of the smallest enclosing ball.
    CechRadius,
    /// Squared radius.
    AlphaSquaredRadius,
}

impl Convention {
    pub fn as_str(self) -> &'static str {
        match self {
            Convention::RipsDiameter => "rips_diameter",
            Convention::CechRadius => "cech_radius",
            Convention::AlphaSquaredRadius => "alpha_squared_radius",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FilteredSimplex {
    pub simplex: Simplex,
    pub value: f64,
}

/// Filtration order: value, then dimension, then vertex list.
pub fn filtration_order(a: &FilteredSimplex, b: &FilteredSimplex) -> Ordering {
    a.value
        .total_cmp(&b.value)
        .then(a.simplex.dim().cmp(&b.simplex.dim()))
        .then_with(|| a.simplex.cmp(&b.simplex))
}

/// A face-closed, monotone, sorted list of simplices with filtration values.
#[derive(Clone, Debug, PartialEq)]
pub struct FilteredComplex {
    simplices: Vec<FilteredSimplex>,
    convention: Convention,
    points: PointCloud,
}

impl FilteredComplex {
    /// Sorts the simplices into filtration order and checks face closure and
    /// monotonicity. `points` is the vertex set the indices refer to.
    pub fn new(
        mut simplices: Vec<FilteredSimplex>,
        convention: Convention,
        points: PointCloud,
    ) -> Result<Self> {
        if let Some(s) = simplices.iter().find(|s| !(s.value >= 0.0)) {
            return Err(Error::invalid(format!(
                "simplex {} has filtration value {}",
                s.simplex, s.value
            )));
        }
        simplices.sort_by(filtration_order);
        validate_filtration(&simplices)?;
        Ok(FilteredComplex {
            simplices,
            convention,
            points,
        })
    }

    fn from_parts(
        mut simplices: Vec<FilteredSimplex>,
        convention: Convention,
        points: PointCloud,
    ) -> Self {
        simplices.sort_by(filtration_order);
        debug_assert!(validate_filtration(&simplices).is_ok());
        FilteredComplex {
            simplices,
            convention,
            points,
        }
    }

    pub fn simplices(&self) -> &[FilteredSimplex] {
        &self.simplices
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// The deduplicated vertex positions.
    pub fn points(&self) -> &PointCloud {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.simplices.iter().map(|s| s.simplex.dim()).max()
    }

    pub fn max_value(&self) -> f64 {
        self.simplices.last().map_or(0.0, |s| s.value)
    }

    /// Filtration value lookup by simplex.
    pub fn value_map(&self) -> HashMap<&Simplex, f64> {
        self.simplices.iter().map(|s| (&s.simplex, s.value)).collect()
    }

    /// Debug dump: one `dim v0 v1 [v2] : value` line per simplex, in stored order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for s in &self.simplices {
            let _ = writeln!(out, "{} {} : {}", s.simplex.dim(), s.simplex, s.value);
        }
        out
    }
}

fn validate_filtration(sorted: &[FilteredSimplex]) -> Result<()> {
    let mut seen: HashMap<&Simplex, f64> = HashMap::with_capacity(sorted.len());
    for s in sorted {
        for facet in s.simplex.facets() {
            match seen.get(&facet) {
                None => return Err(Error::MissingFace(facet.vertices().to_vec())),
                Some(&v) if v > s.value => {
                    return Err(Error::invalid(format!(
                        "face {facet} enters at {v}, after its coface {} at {}",
                        s.simplex, s.value
                    )))
                }
                Some(_) => {}
            }
        }
        if seen.insert(&s.simplex, s.value).is_some() {
            return Err(Error::invalid(format!("duplicate simplex {}", s.simplex)));
        }
    }
    Ok(())
}

fn dedup_nonempty(pc: &PointCloud) -> Result<PointCloud> {
    let (points, _) = pc.dedup(DEDUP_TOL);
    if points.is_empty() {
        return Err(Error::invalid("point cloud is empty"));
    }
    Ok(points)
}

fn vertices(n: usize) -> impl Iterator<Item = FilteredSimplex> {
    (0..n).map(|v| FilteredSimplex {
        simplex: Simplex::from_sorted(vec![v]),
        value: 0.0,
    })
}

/// Vietoris–Rips filtration up to `max_dim` (1..=3): edges enter at their
/// length and higher simplices at their longest edge. Only simplices with
/// value ≤ `max_value` are kept.
pub fn build_rips(pc: &PointCloud, max_dim: usize, max_value: f64) -> Result<FilteredComplex> {
    if !(1..=3).contains(&max_dim) {
        return Err(Error::invalid(format!("rips max_dim must be 1..=3, got {max_dim}")));
    }
    let points = dedup_nonempty(pc)?;
    let n = points.len();
    let dist = pairwise_distances(&points);
    let mut out: Vec<FilteredSimplex> = vertices(n).collect();

    // cliques of the current dimension, extended by higher-indexed common neighbours
    let mut frontier: Vec<(Vec<usize>, f64)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dist.get(i, j);
            if d <= max_value {
                frontier.push((vec![i, j], d));
            }
        }
    }
    for dim in 1..=max_dim {
        out.extend(frontier.iter().map(|(v, value)| FilteredSimplex {
            simplex: Simplex::from_sorted(v.clone()),
            value: *value,
        }));
        if dim == max_dim {
            break;
        }
        let mut next = Vec::new();
        for (clique, value) in &frontier {
            let last = *clique.last().expect("nonempty clique");
            for w in (last + 1)..n {
                let mut v = *value;
                let mut ok = true;
                for &u in clique {
                    let d = dist.get(u, w);
                    if d > max_value {
                        ok = false;
                        break;
                    }
                    v = v.max(d);
                }
                if ok {
                    let mut c = clique.clone();
                    c.push(w);
                    next.push((c, v));
                }
            }
        }
        frontier = next;
    }
    Ok(FilteredComplex::from_parts(out, Convention::RipsDiameter, points))
}

/// Čech filtration up to `max_dim` (1..=2) in the radius convention. This is
/// the slow reference construction and refuses clouds above [`CECH_SIZE_CAP`].
pub fn build_cech(pc: &PointCloud, max_dim: usize, max_value: f64) -> Result<FilteredComplex> {
    if !(1..=2).contains(&max_dim) {
        return Err(Error::invalid(format!("cech max_dim must be 1..=2, got {max_dim}")));
    }
    let points = dedup_nonempty(pc)?;
    let n = points.len();
    if n > CECH_SIZE_CAP {
        return Err(Error::SizeCap {
            size: n,
            cap: CECH_SIZE_CAP,
        });
    }
    let p = points.points();
    let mut out: Vec<FilteredSimplex> = vertices(n).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            let r = min_enclosing_ball_radius(&[p[i], p[j]]);
            if r <= max_value {
                out.push(FilteredSimplex {
                    simplex: Simplex::from_sorted(vec![i, j]),
                    value: r,
                });
            }
        }
    }
    if max_dim == 2 {
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    // clamp against rounding so the triangle never precedes its edges
                    let r = [(i, j), (j, k), (i, k)]
                        .iter()
                        .map(|&(u, v)| min_enclosing_ball_radius(&[p[u], p[v]]))
                        .fold(min_enclosing_ball_radius(&[p[i], p[j], p[k]]), f64::max);
                    if r <= max_value {
                        out.push(FilteredSimplex {
                            simplex: Simplex::from_sorted(vec![i, j, k]),
                            value: r,
                        });
                    }
                }
            }
        }
    }
    Ok(FilteredComplex::from_parts(out, Convention::CechRadius, points))
}

/// Alpha filtration in the squared-radius convention. Triangles enter at
/// their squared circumradius; an edge enters at its squared half-length when
/// its diametral disc holds no opposite Delaunay vertex (Gabriel), otherwise
/// at the smallest value among its incident triangles.
pub fn build_alpha(pc: &PointCloud) -> Result<FilteredComplex> {
    let dt = delaunay_2d(pc)?;
    let p = dt.points.points();
    let mut out: Vec<FilteredSimplex> = vertices(p.len()).collect();

    // edge -> (squared half length, attached?, min incident triangle value)
    let mut edges: HashMap<(usize, usize), (bool, f64)> = HashMap::with_capacity(dt.edges.len());
    for &[a, b] in &dt.edges {
        edges.insert((a, b), (false, f64::INFINITY));
    }
    for &[a, b, c] in &dt.triangles {
        let value = circumradius_sq(p[a], p[b], p[c]);
        for (u, v, opp) in [(a, b, c), (a, c, b), (b, c, a)] {
            let e = edges.get_mut(&(u, v)).expect("triangle edge in edge list");
            let (pu, pv, po) = (p[u], p[v], p[opp]);
            // opposite vertex strictly inside the diametral circle of uv
            let inside = (pu.x - po.x) * (pv.x - po.x) + (pu.y - po.y) * (pv.y - po.y) < 0.0;
            e.0 |= inside;
            e.1 = e.1.min(value);
        }
    }
    let mut edge_values: HashMap<(usize, usize), f64> = HashMap::with_capacity(edges.len());
    for (&(a, b), &(attached, tri_min)) in &edges {
        let value = if attached {
            tri_min
        } else {
            p[a].dist_sq(&p[b]) / 4.0
        };
        edge_values.insert((a, b), value);
        out.push(FilteredSimplex {
            simplex: Simplex::from_sorted(vec![a, b]),
            value,
        });
    }
    for &[a, b, c] in &dt.triangles {
        let value = [(a, b), (a, c), (b, c)]
            .iter()
            .map(|e| edge_values[e])
            .fold(circumradius_sq(p[a], p[b], p[c]), f64::max);
        out.push(FilteredSimplex {
            simplex: Simplex::from_sorted(vec![a, b, c]),
            value,
        });
    }
    Ok(FilteredComplex::from_parts(
        out,
        Convention::AlphaSquaredRadius,
        dt.points,
    ))
}

/// All simplices (of any dimension) present in the complex, as a set.
pub fn simplex_set(fc: &FilteredComplex) -> HashSet<Simplex> {
    fc.simplices().iter().map(|s| s.simplex.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointcloud::{sample_annulus, sample_disc, Point2};
    use proptest::prelude::*;

    fn triangle() -> PointCloud {
        PointCloud::from_xy(&[(0.0, 0.0), (1.0, 2.0), (3.0, 0.0)]).unwrap()
    }

    fn values_by_dim(fc: &FilteredComplex, dim: usize) -> Vec<f64> {
        fc.simplices()
            .iter()
            .filter(|s| s.simplex.dim() == dim)
            .map(|s| s.value)
            .collect()
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len(), "{a:?} vs {b:?}");
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn rips_on_three_point_triangle() {
        let fc = build_rips(&triangle(), 2, f64::INFINITY).unwrap();
        assert_eq!(fc.convention(), Convention::RipsDiameter);
        assert_close(&values_by_dim(&fc, 1), &[5f64.sqrt(), 8f64.sqrt(), 3.0], 0.0);
        assert_close(&values_by_dim(&fc, 2), &[3.0], 0.0);
    }

    #[test]
    fn rips_degenerate_inputs() {
        let two = PointCloud::from_xy(&[(1.0, 1.0), (1.0, 1.0)]).unwrap();
        let fc = build_rips(&two, 1, f64::INFINITY).unwrap();
        assert_eq!(fc.len(), 1);
        let fc = build_rips(&triangle(), 2, 0.0).unwrap();
        assert_eq!(fc.max_dim(), Some(0));
        assert_eq!(fc.len(), 3);
        assert!(build_rips(&triangle(), 0, 1.0).is_err());
        assert!(build_rips(&triangle(), 4, 1.0).is_err());
        assert!(build_rips(&PointCloud::default(), 1, 1.0).is_err());
    }

    #[test]
    fn rips_tetrahedra() {
        let square = PointCloud::from_xy(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap();
        let fc = build_rips(&square, 3, f64::INFINITY).unwrap();
        assert_eq!(values_by_dim(&fc, 3), vec![2f64.sqrt()]);
        assert_eq!(values_by_dim(&fc, 2).len(), 4);
    }

    #[test]
    fn cech_on_three_point_triangle() {
        let fc = build_cech(&triangle(), 2, f64::INFINITY).unwrap();
        assert_close(
            &values_by_dim(&fc, 1),
            &[5f64.sqrt() / 2.0, 2f64.sqrt(), 1.5],
            1e-15,
        );
        assert_close(&values_by_dim(&fc, 2), &[10f64.sqrt() / 2.0], 1e-15);
        let squared: Vec<f64> = fc.simplices().iter().skip(3).map(|s| s.value * s.value).collect();
        assert_close(&squared, &[1.25, 2.0, 2.25, 2.5], 1e-12);
    }

    #[test]
    fn cech_equilateral_and_pair() {
        let h = 3f64.sqrt();
        let eq = PointCloud::from_xy(&[(0.0, 0.0), (2.0, 0.0), (1.0, h)]).unwrap();
        let fc = build_cech(&eq, 2, f64::INFINITY).unwrap();
        assert_close(&values_by_dim(&fc, 1), &[1.0, 1.0, 1.0], 1e-15);
        assert_close(&values_by_dim(&fc, 2), &[2.0 / 3f64.sqrt()], 1e-15);

        let a = 0.7;
        let pair = PointCloud::from_xy(&[(0.0, 0.0), (2.0 * a, 0.0)]).unwrap();
        assert_eq!(values_by_dim(&build_cech(&pair, 1, 10.0).unwrap(), 1), vec![a]);
    }

    #[test]
    fn cech_size_cap() {
        let pc = sample_disc(CECH_SIZE_CAP + 1, 1);
        assert!(matches!(build_cech(&pc, 1, 1.0), Err(Error::SizeCap { .. })));
        assert!(build_cech(&sample_disc(CECH_SIZE_CAP, 1), 1, 0.1).is_ok());
    }

    #[test]
    fn alpha_on_three_point_triangle() {
        let fc = build_alpha(&triangle()).unwrap();
        assert_eq!(fc.convention(), Convention::AlphaSquaredRadius);
        assert_close(&values_by_dim(&fc, 0), &[0.0; 3], 0.0);
        assert_close(&values_by_dim(&fc, 1), &[1.25, 2.0, 2.25], 1e-12);
        assert_close(&values_by_dim(&fc, 2), &[2.5], 1e-12);
    }

    #[test]
    fn alpha_obtuse_triangle_edge_is_attached() {
        // The long edge sees the apex inside its diametral circle.
        let pc = PointCloud::from_xy(&[(0.0, 0.0), (4.0, 0.0), (1.0, 1.0)]).unwrap();
        let fc = build_alpha(&pc).unwrap();
        let tri = values_by_dim(&fc, 2)[0];
        let long = fc
            .simplices()
            .iter()
            .find(|s| s.simplex.vertices() == [0, 1])
            .unwrap()
            .value;
        assert_eq!(long, tri);
        assert!(tri > 4.0);
    }

    #[test]
    fn alpha_collinear_is_an_error() {
        let pc = PointCloud::from_xy(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]).unwrap();
        assert!(matches!(build_alpha(&pc), Err(Error::Collinear(3))));
    }

    #[test]
    fn alpha_simplex_set_is_delaunay() {
        let pc = sample_annulus(120, 0.5, 1.0, 9).unwrap();
        let dt = delaunay_2d(&pc).unwrap();
        let fc = build_alpha(&pc).unwrap();
        let mut expected: HashSet<Simplex> = (0..dt.points.len())
            .map(|v| Simplex::from_sorted(vec![v]))
            .collect();
        expected.extend(dt.edges.iter().map(|e| Simplex::from_sorted(e.to_vec())));
        expected.extend(dt.triangles.iter().map(|t| Simplex::from_sorted(t.to_vec())));
        assert_eq!(simplex_set(&fc), expected);
    }

    #[test]
    fn dump_format() {
        let fc = build_rips(&triangle(), 1, 2.5).unwrap();
        let dump = fc.dump();
        let lines: Vec<&str> = dump.lines().collect();
        assert_eq!(lines[0], "0 0 : 0");
        assert_eq!(lines[3], format!("1 0 1 : {}", 5f64.sqrt()));
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn new_rejects_bad_complexes() {
        let pc = triangle();
        let v = |s: Vec<usize>, value| FilteredSimplex {
            simplex: Simplex::new(s).unwrap(),
            value,
        };
        let missing = vec![v(vec![0], 0.0), v(vec![0, 1], 1.0)];
        assert!(matches!(
            FilteredComplex::new(missing, Convention::RipsDiameter, pc.clone()),
            Err(Error::MissingFace(_))
        ));
        let non_monotone = vec![v(vec![0], 2.0), v(vec![1], 0.0), v(vec![0, 1], 1.0)];
        assert!(FilteredComplex::new(non_monotone, Convention::RipsDiameter, pc.clone()).is_err());
        let ok = vec![v(vec![0, 1], 1.0), v(vec![1], 0.0), v(vec![0], 0.0)];
        let fc = FilteredComplex::new(ok, Convention::RipsDiameter, pc).unwrap();
        assert_eq!(fc.simplices()[2].simplex.vertices(), &[0, 1]);
        assert!(Simplex::new(vec![1, 1]).is_err());
        assert!(Simplex::new(vec![]).is_err());
    }

    fn cloud(coords: &[(f64, f64)]) -> PointCloud {
        PointCloud::new(
            coords.iter().map(|&(x, y)| Point2::new(x, y)).collect(),
            Default::default(),
        )
        .unwrap()
    }

    fn assert_monotone(fc: &FilteredComplex) {
        let values = fc.value_map();
        for s in fc.simplices() {
            for f in s.simplex.facets() {
                assert!(values[&f] <= s.value, "{f} > {}", s.simplex);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn builders_are_monotone(coords in prop::collection::vec((-5f64..5.0, -5f64..5.0), 3..14)) {
            let pc = cloud(&coords);
            assert_monotone(&build_rips(&pc, 3, f64::INFINITY).unwrap());
            assert_monotone(&build_cech(&pc, 2, f64::INFINITY).unwrap());
            if let Ok(alpha) = build_alpha(&pc) {
                assert_monotone(&alpha);
            }
        }

        #[test]
        fn cech_rips_sandwich(coords in prop::collection::vec((-5f64..5.0, -5f64..5.0), 2..12)) {
            let pc = cloud(&coords);
            let rips = build_rips(&pc, 2, f64::INFINITY).unwrap();
            let cech = build_cech(&pc, 2, f64::INFINITY).unwrap();
            let rv = rips.value_map();
            for s in cech.simplices() {
                let r = rv[&s.simplex];
                prop_assert!(s.value <= r + 1e-12);
                prop_assert!(r <= 2.0 * s.value + 1e-12);
            }
        }

        #[test]
        fn alpha_dominates_cech(coords in prop::collection::vec((-5f64..5.0, -5f64..5.0), 3..12)) {
            let pc = cloud(&coords);
            let Ok(alpha) = build_alpha(&pc) else { return Ok(()); };
            let cech = build_cech(&pc, 2, f64::INFINITY).unwrap();
            let cv = cech.value_map();
            let p = alpha.points().points();
            for s in alpha.simplices() {
                let c = cv[&s.simplex];
                prop_assert!(s.value.sqrt() >= c - 1e-12);
                if let [a, b] = *s.simplex.vertices() {
                    let (pa, pb) = (p[a], p[b]);
                    let gabriel = p.iter().enumerate().all(|(i, q)| {
                        i == a || i == b || (pa.x - q.x) * (pb.x - q.x) + (pa.y - q.y) * (pb.y - q.y) >= 0.0
                    });
                    if gabriel {
                        prop_assert!((s.value.sqrt() - c).abs() <= 1e-12);
                    }
                }
            }
        }
    }
}
