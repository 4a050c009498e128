//! Bottleneck distance between persistence diagrams and a point-cloud
//! stability probe.

use rand::Rng;

use crate::complex::build_cech;
use crate::error::{Error, Result};
use crate::persistence::{diagram, PersistenceDiagram};
use crate::pointcloud::{seeded_rng, Point2, PointCloud};

/// Largest number of finite off-diagonal points (both diagrams together) the
/// exhaustive oracle accepts.
pub const ORACLE_CAP: usize = 6;

/// One assignment of a bottleneck matching. `None` stands for the diagonal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub left: Option<usize>,
    pub right: Option<usize>,
}

/// Optimal bottleneck matching between the finite points of one dimension.
/// Indices refer to positions in the `dim`-filtered finite point lists.
#[derive(Clone, Debug, PartialEq)]
pub struct Matching {
    pub cost: f64,
    pub assignments: Vec<Assignment>,
}

fn split(d: &PersistenceDiagram, dim: usize) -> (Vec<(f64, f64)>, Vec<f64>) {
    let mut finite = Vec::new();
    let mut infinite = Vec::new();
    for p in d.in_dim(dim) {
        if p.is_infinite() {
            infinite.push(p.birth);
        } else {
            finite.push((p.birth, p.death));
        }
    }
    infinite.sort_by(f64::total_cmp);
    (finite, infinite)
}

fn linf(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

fn diag(a: (f64, f64)) -> f64 {
    (a.1 - a.0) / 2.0
}

/// Essential classes pair up by sorted birth; unequal counts are infinitely far.
fn infinite_cost(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Bipartite graph over `left ∪ diag(right)` and `right ∪ diag(left)`.
struct Augmented<'a> {
    left: &'a [(f64, f64)],
    right: &'a [(f64, f64)],
}

impl Augmented<'_> {
    fn size(&self) -> usize {
        self.left.len() + self.right.len()
    }

    /// Cost of joining left vertex `u` to right vertex `v`, `None` if no edge.
    fn cost(&self, u: usize, v: usize) -> Option<f64> {
        let (n, m) = (self.left.len(), self.right.len());
        match (u < n, v < m) {
            (true, true) => Some(linf(self.left[u], self.right[v])),
            (true, false) => (v - m == u).then(|| diag(self.left[u])),
            (false, true) => (u - n == v).then(|| diag(self.right[v])),
            (false, false) => Some(0.0),
        }
    }

    fn candidates(&self) -> Vec<f64> {
        let mut c = vec![0.0];
        c.extend(self.left.iter().map(|&p| diag(p)));
        c.extend(self.right.iter().map(|&p| diag(p)));
        for &a in self.left {
            for &b in self.right {
                c.push(linf(a, b));
            }
        }
        c.sort_by(f64::total_cmp);
        c.dedup();
        c
    }

    /// Perfect matching using only edges of cost ≤ `eps`, as `match_of_right`.
    fn perfect_matching(&self, eps: f64) -> Option<Vec<usize>> {
        let size = self.size();
        let adj: Vec<Vec<usize>> = (0..size)
            .map(|u| {
                (0..size)
                    .filter(|&v| self.cost(u, v).is_some_and(|c| c <= eps))
                    .collect()
            })
            .collect();
        let mut match_of_right = vec![usize::MAX; size];
        let mut seen = vec![false; size];
        for u in 0..size {
            seen.iter_mut().for_each(|s| *s = false);
            if !augment(u, &adj, &mut match_of_right, &mut seen) {
                return None;
            }
        }
        Some(match_of_right)
    }
}

// Kuhn's augmenting path search, iterative to keep deep chains off the stack.
fn augment(root: usize, adj: &[Vec<usize>], match_of_right: &mut [usize], seen: &mut [bool]) -> bool {
    // stack of (left vertex, next adjacency position); path[i] = right vertex chosen at depth i
    let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
    let mut path: Vec<usize> = Vec::new();
    while let Some(&mut (u, ref mut pos)) = stack.last_mut() {
        if *pos >= adj[u].len() {
            stack.pop();
            path.pop();
            continue;
        }
        let v = adj[u][*pos];
        *pos += 1;
        if seen[v] {
            continue;
        }
        seen[v] = true;
        path.push(v);
        if match_of_right[v] == usize::MAX {
            // flip the alternating path
            for (depth, &(lu, _)) in stack.iter().enumerate() {
                match_of_right[path[depth]] = lu;
            }
            return true;
        }
        stack.push((match_of_right[v], 0));
    }
    false
}

/// Bottleneck matching of the finite points of dimension `dim`.
pub fn bottleneck_matching(d: &PersistenceDiagram, e: &PersistenceDiagram, dim: usize) -> Matching {
    let (left, _) = split(d, dim);
    let (right, _) = split(e, dim);
    let g = Augmented {
        left: &left,
        right: &right,
    };
    let cands = g.candidates();
    // smallest feasible candidate; the largest one is always feasible
    let (mut lo, mut hi) = (0usize, cands.len() - 1);
    let mut best = g
        .perfect_matching(cands[hi])
        .expect("complete threshold admits a perfect matching");
    while lo < hi {
        let mid = (lo + hi) / 2;
        match g.perfect_matching(cands[mid]) {
            Some(m) => {
                best = m;
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    let (n, m) = (left.len(), right.len());
    let mut assignments = Vec::new();
    for (v, &u) in best.iter().enumerate() {
        let a = Assignment {
            left: (u < n).then_some(u),
            right: (v < m).then_some(v),
        };
        if a.left.is_some() || a.right.is_some() {
            assignments.push(a);
        }
    }
    assignments.sort_by_key(|a| (a.left.is_none(), a.left, a.right));
    Matching {
        cost: cands[lo],
        assignments,
    }
}

/// Bottleneck distance in dimension `dim` with the L∞ ground metric. Points
/// may be matched to the diagonal at half their persistence. Essential
/// classes are matched by sorted birth and must agree in number.
pub fn bottleneck(d: &PersistenceDiagram, e: &PersistenceDiagram, dim: usize) -> f64 {
    let (_, inf_d) = split(d, dim);
    let (_, inf_e) = split(e, dim);
    let inf = infinite_cost(&inf_d, &inf_e);
    if inf.is_infinite() {
        return inf;
    }
    bottleneck_matching(d, e, dim).cost.max(inf)
}

/// Exact bottleneck distance by enumerating every partial injection of the
/// finite points of `d` into those of `e`. Refuses more than [`ORACLE_CAP`]
/// finite points in total.
pub fn bottleneck_oracle(d: &PersistenceDiagram, e: &PersistenceDiagram, dim: usize) -> Result<f64> {
    let (left, inf_d) = split(d, dim);
    let (right, inf_e) = split(e, dim);
    let size = left.len() + right.len();
    if size > ORACLE_CAP {
        return Err(Error::SizeCap {
            size,
            cap: ORACLE_CAP,
        });
    }
    fn go(i: usize, left: &[(f64, f64)], right: &[(f64, f64)], used: &mut Vec<bool>, acc: f64) -> f64 {
        if i == left.len() {
            return right
                .iter()
                .zip(used.iter())
                .filter(|(_, &u)| !u)
                .map(|(&q, _)| (q.1 - q.0) / 2.0)
                .fold(acc, f64::max);
        }
        let p = left[i];
        let mut best = go(i + 1, left, right, used, acc.max((p.1 - p.0) / 2.0));
        for j in 0..right.len() {
            if !used[j] {
                used[j] = true;
                let q = right[j];
                let c = (p.0 - q.0).abs().max((p.1 - q.1).abs());
                best = best.min(go(i + 1, left, right, used, acc.max(c)));
                used[j] = false;
            }
        }
        best
    }
    let finite = go(0, &left, &right, &mut vec![false; right.len()], 0.0);
    Ok(finite.max(infinite_cost(&inf_d, &inf_e)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    /// `(dim, bottleneck distance)` for dimensions 0 and 1.
    pub distances: Vec<(usize, f64)>,
    /// Largest actual Euclidean displacement of any point.
    pub displacement: f64,
    /// √2 · noise, the largest displacement a box perturbation can cause.
    pub bound: f64,
    pub violation: bool,
}

/// Perturbs every point uniformly in `[-noise, noise]²`, builds Čech
/// filtrations (radius convention) of both clouds and compares their diagrams.
pub fn stability_probe(pc: &PointCloud, noise: f64, seed: u64) -> Result<StabilityReport> {
    if !(noise >= 0.0) || !noise.is_finite() {
        return Err(Error::invalid(format!("noise must be a finite value >= 0, got {noise}")));
    }
    let mut rng = seeded_rng(seed, 0x5157);
    let mut displacement: f64 = 0.0;
    let moved: Vec<Point2> = pc
        .points()
        .iter()
        .map(|p| {
            let (dx, dy) = if noise > 0.0 {
                (rng.gen_range(-noise..=noise), rng.gen_range(-noise..=noise))
            } else {
                (0.0, 0.0)
            };
            let q = Point2::new(p.x + dx, p.y + dy);
            displacement = displacement.max(p.dist(&q));
            q
        })
        .collect();
    let moved = PointCloud::new(moved, pc.source)?;
    let a = diagram(&build_cech(pc, 2, f64::INFINITY)?);
    let b = diagram(&build_cech(&moved, 2, f64::INFINITY)?);
    let bound = std::f64::consts::SQRT_2 * noise;
    let distances: Vec<(usize, f64)> = (0..=1).map(|k| (k, bottleneck(&a, &b, k))).collect();
    let violation = distances.iter().any(|&(_, d)| d > bound);
    Ok(StabilityReport {
        distances,
        displacement,
        bound,
        violation,
    })
}
