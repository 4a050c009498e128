//! Incremental (Bowyer–Watson) Delaunay triangulation with exact orientation
//! and in-circle predicates.
//!
//! The hull is closed with ghost triangles through a vertex at infinity so
//! points outside the current hull need no bounding super-triangle. After
//! insertion, edges whose two opposite vertices are cocircular are flipped
//! towards the lexicographically smaller diagonal, which makes the output
//! independent of how ties were resolved during insertion.

use std::collections::{HashMap, HashSet};

use robust::Coord;

use super::DEDUP_TOL;
use crate::error::{Error, Result};
use crate::pointcloud::{Point2, PointCloud};

const GHOST: usize = usize::MAX;

#[derive(Clone, Debug, PartialEq)]
pub struct DelaunayTriangulation {
    /// Deduplicated vertex positions the indices refer to.
    pub points: PointCloud,
    /// Vertex triples, each sorted ascending; list sorted.
    pub triangles: Vec<[usize; 3]>,
    /// Vertex pairs, each sorted ascending; list sorted.
    pub edges: Vec<[usize; 2]>,
}

fn coord(p: Point2) -> Coord<f64> {
    Coord { x: p.x, y: p.y }
}

struct Mesh<'a> {
    pts: &'a [Point2],
    /// Counter-clockwise vertex triples. Ghosts are stored as `[u, v, GHOST]`
    /// where the hull edge u→v has the exterior on its left.
    tris: Vec<[usize; 3]>,
    alive: Vec<bool>,
    /// Directed edge → triangle holding it in its ccw cycle.
    edge_owner: HashMap<(usize, usize), usize>,
    recent: Vec<usize>,
}

impl<'a> Mesh<'a> {
    fn orient(&self, a: usize, b: usize, c: usize) -> f64 {
        robust::orient2d(coord(self.pts[a]), coord(self.pts[b]), coord(self.pts[c]))
    }

    fn in_circumcircle(&self, t: [usize; 3], p: usize) -> bool {
        if t[2] == GHOST {
            let (u, v) = (t[0], t[1]);
            let o = self.orient(u, v, p);
            if o != 0.0 {
                return o > 0.0;
            }
            // on the hull line: inside only within the open segment
            let (a, b, q) = (self.pts[u], self.pts[v], self.pts[p]);
            let along_u = (q.x - a.x) * (b.x - a.x) + (q.y - a.y) * (b.y - a.y);
            let along_v = (q.x - b.x) * (a.x - b.x) + (q.y - b.y) * (a.y - b.y);
            return along_u > 0.0 && along_v > 0.0;
        }
        let [a, b, c] = t;
        robust::incircle(
            coord(self.pts[a]),
            coord(self.pts[b]),
            coord(self.pts[c]),
            coord(self.pts[p]),
        ) > 0.0
    }

    fn add(&mut self, t: [usize; 3]) -> usize {
        // rotate so a ghost vertex sits last
        let t = match t.iter().position(|&v| v == GHOST) {
            Some(0) => [t[1], t[2], t[0]],
            Some(1) => [t[2], t[0], t[1]],
            _ => t,
        };
        let id = self.tris.len();
        self.tris.push(t);
        self.alive.push(true);
        for k in 0..3 {
            self.edge_owner.insert((t[k], t[(k + 1) % 3]), id);
        }
        id
    }

    fn kill(&mut self, id: usize) {
        self.alive[id] = false;
        let t = self.tris[id];
        for k in 0..3 {
            let e = (t[k], t[(k + 1) % 3]);
            if self.edge_owner.get(&e) == Some(&id) {
                self.edge_owner.remove(&e);
            }
        }
    }

    fn find_seed(&self, p: usize) -> Option<usize> {
        self.recent
            .iter()
            .copied()
            .filter(|&id| self.alive[id])
            .chain((0..self.tris.len()).filter(|&id| self.alive[id]))
            .find(|&id| self.in_circumcircle(self.tris[id], p))
    }

    fn insert(&mut self, p: usize) {
        let seed = self
            .find_seed(p)
            .expect("every point lies in some circumcircle or hull half-plane");
        // grow the cavity across shared edges
        let mut cavity = vec![seed];
        let mut in_cavity: HashSet<usize> = HashSet::from([seed]);
        let mut stack = vec![seed];
        while let Some(id) = stack.pop() {
            let t = self.tris[id];
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                if let Some(&nb) = self.edge_owner.get(&(b, a)) {
                    if !in_cavity.contains(&nb) && self.in_circumcircle(self.tris[nb], p) {
                        in_cavity.insert(nb);
                        cavity.push(nb);
                        stack.push(nb);
                    }
                }
            }
        }
        let mut boundary = Vec::new();
        for &id in &cavity {
            let t = self.tris[id];
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let across = self.edge_owner.get(&(b, a));
                if !across.is_some_and(|nb| in_cavity.contains(nb)) {
                    boundary.push((a, b));
                }
            }
        }
        for &id in &cavity {
            self.kill(id);
        }
        self.recent.clear();
        for (a, b) in boundary {
            let id = self.add([a, b, p]);
            self.recent.push(id);
        }
        if self.tris.len() > 64 && self.alive.iter().filter(|&&a| !a).count() * 2 > self.tris.len() {
            self.compact();
        }
    }

    fn compact(&mut self) {
        let live: Vec<[usize; 3]> = self
            .tris
            .iter()
            .zip(&self.alive)
            .filter(|(_, &a)| a)
            .map(|(t, _)| *t)
            .collect();
        self.tris.clear();
        self.alive.clear();
        self.edge_owner.clear();
        self.recent.clear();
        for t in live {
            self.add(t);
        }
    }

    fn real_triangles(&self) -> Vec<[usize; 3]> {
        self.tris
            .iter()
            .zip(&self.alive)
            .filter(|(t, &a)| a && t[2] != GHOST)
            .map(|(t, _)| *t)
            .collect()
    }
}

fn sorted_pair(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Flips cocircular diagonals to the lexicographically smaller choice until
/// no such flip applies. Every flip strictly decreases the multiset of edges,
/// so this terminates.
fn canonicalize(pts: &[Point2], tris: &mut [[usize; 3]]) {
    loop {
        let mut owner: HashMap<(usize, usize), usize> = HashMap::with_capacity(tris.len() * 3);
        for (id, t) in tris.iter().enumerate() {
            for k in 0..3 {
                owner.insert((t[k], t[(k + 1) % 3]), id);
            }
        }
        let mut touched = vec![false; tris.len()];
        let mut flipped = false;
        for id in 0..tris.len() {
            for k in 0..3 {
                if touched[id] {
                    break;
                }
                let t = tris[id];
                let (a, b, c) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
                let Some(&other) = owner.get(&(b, a)) else { continue };
                if touched[other] {
                    continue;
                }
                let u = tris[other];
                let d = u.iter().copied().find(|&v| v != a && v != b).expect("triangle");
                if sorted_pair(c, d) >= sorted_pair(a, b) {
                    continue;
                }
                let cocircular = robust::incircle(
                    coord(pts[a]),
                    coord(pts[b]),
                    coord(pts[c]),
                    coord(pts[d]),
                ) == 0.0;
                if !cocircular {
                    continue;
                }
                // quad a, d, b, c is convex and ccw
                tris[id] = [a, d, c];
                tris[other] = [d, b, c];
                touched[id] = true;
                touched[other] = true;
                flipped = true;
            }
        }
        if !flipped {
            break;
        }
    }
}

/// Delaunay triangulation of the deduplicated cloud. Fails with
/// [`Error::Collinear`] when no three points span a triangle.
pub fn delaunay_2d(pc: &PointCloud) -> Result<DelaunayTriangulation> {
    let (points, _) = pc.dedup(DEDUP_TOL);
    let pts = points.points();
    let n = pts.len();
    if n < 3 {
        return Err(Error::Collinear(n));
    }
    let mut mesh = Mesh {
        pts,
        tris: Vec::with_capacity(2 * n + 8),
        alive: Vec::with_capacity(2 * n + 8),
        edge_owner: HashMap::with_capacity(6 * n + 24),
        recent: Vec::new(),
    };
    let third = (2..n)
        .find(|&k| mesh.orient(0, 1, k) != 0.0)
        .ok_or(Error::Collinear(n))?;
    let (a, b, c) = if mesh.orient(0, 1, third) > 0.0 {
        (0, 1, third)
    } else {
        (1, 0, third)
    };
    mesh.add([a, b, c]);
    mesh.add([b, a, GHOST]);
    mesh.add([c, b, GHOST]);
    mesh.add([a, c, GHOST]);
    for p in (2..n).filter(|&p| p != third) {
        mesh.insert(p);
    }

    let mut tris = mesh.real_triangles();
    canonicalize(pts, &mut tris);

    let mut triangles: Vec<[usize; 3]> = tris
        .into_iter()
        .map(|mut t| {
            t.sort_unstable();
            t
        })
        .collect();
    triangles.sort_unstable();
    let mut edges: Vec<[usize; 2]> = triangles
        .iter()
        .flat_map(|&[a, b, c]| [[a, b], [a, c], [b, c]])
        .collect();
    edges.sort_unstable();
    edges.dedup();
    Ok(DelaunayTriangulation {
        points,
        triangles,
        edges,
    })
}
