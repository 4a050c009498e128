//! Persistent homology over GF(2) by boundary-matrix column reduction.
//!
//! [`reduce`] is the standard algorithm with the twist (clearing)
//! optimization. [`persistent_betti`] computes ranks by dense Gaussian
//! elimination instead, and serves as an independent check on diagrams.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::complex::{Convention, FilteredComplex, FilteredSimplex, Simplex};
use crate::error::{Error, Result};

/// Sparse GF(2) boundary matrix; column `j` lists the sorted row indices of
/// the facets of simplex `j` in filtration order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryMatrix {
    columns: Vec<Vec<usize>>,
    dims: Vec<usize>,
}

impl BoundaryMatrix {
    pub fn column(&self, j: usize) -> &[usize] {
        &self.columns[j]
    }

    pub fn dim(&self, j: usize) -> usize {
        self.dims[j]
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

pub fn boundary_matrix(fc: &FilteredComplex) -> Result<BoundaryMatrix> {
    boundary_matrix_of(fc.simplices())
}

/// Boundary matrix of simplices given in an explicit (face-first) order.
pub fn boundary_matrix_of(simplices: &[FilteredSimplex]) -> Result<BoundaryMatrix> {
    let mut index: HashMap<&Simplex, usize> = HashMap::with_capacity(simplices.len());
    let mut columns = Vec::with_capacity(simplices.len());
    let mut dims = Vec::with_capacity(simplices.len());
    for (j, s) in simplices.iter().enumerate() {
        let mut col = Vec::with_capacity(s.simplex.dim() + 1);
        for facet in s.simplex.facets() {
            let row = *index
                .get(&facet)
                .ok_or_else(|| Error::MissingFace(facet.vertices().to_vec()))?;
            col.push(row);
        }
        col.sort_unstable();
        columns.push(col);
        dims.push(s.simplex.dim());
        index.insert(&s.simplex, j);
    }
    Ok(BoundaryMatrix { columns, dims })
}

/// Symmetric difference of two sorted index lists (column addition over GF(2)).
fn add_column(target: &mut Vec<usize>, other: &[usize], scratch: &mut Vec<usize>) {
    scratch.clear();
    let (mut i, mut k) = (0, 0);
    while i < target.len() && k < other.len() {
        match target[i].cmp(&other[k]) {
            std::cmp::Ordering::Less => {
                scratch.push(target[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                scratch.push(other[k]);
                k += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                k += 1;
            }
        }
    }
    scratch.extend_from_slice(&target[i..]);
    scratch.extend_from_slice(&other[k..]);
    std::mem::swap(target, scratch);
}

/// Output of [`reduce`].
#[derive(Clone, Debug)]
pub struct Reduction {
    /// Reduced columns R = ∂V. Cleared columns are empty.
    pub reduced: Vec<Vec<usize>>,
    /// `(birth, death)` column pairs: `low(R[death]) == birth`.
    pub pairs: Vec<(usize, usize)>,
    /// Unpaired positive columns, i.e. classes that never die.
    pub essential: Vec<usize>,
}

impl Reduction {
    pub fn low(&self, j: usize) -> Option<usize> {
        self.reduced[j].last().copied()
    }
}

/// Standard column reduction with clearing: dimensions are processed from the
/// top down and a column whose index became a pivot is zeroed without work.
pub fn reduce(bm: &BoundaryMatrix) -> Reduction {
    let n = bm.len();
    let mut reduced = bm.columns.clone();
    let mut pivot_owner: Vec<usize> = vec![usize::MAX; n];
    let mut cleared = vec![false; n];
    let mut pairs = Vec::new();
    let mut scratch = Vec::new();
    let max_dim = bm.dims.iter().copied().max().unwrap_or(0);

    for dim in (1..=max_dim).rev() {
        for j in 0..n {
            if bm.dims[j] != dim || cleared[j] {
                continue;
            }
            let mut col = std::mem::take(&mut reduced[j]);
            while let Some(&low) = col.last() {
                let owner = pivot_owner[low];
                if owner == usize::MAX {
                    break;
                }
                add_column(&mut col, &reduced[owner], &mut scratch);
            }
            if let Some(&low) = col.last() {
                pivot_owner[low] = j;
                pairs.push((low, j));
                cleared[low] = true;
                reduced[low].clear();
            }
            reduced[j] = col;
        }
    }
    let essential = (0..n)
        .filter(|&j| reduced[j].is_empty() && !cleared[j] && pivot_owner[j] == usize::MAX)
        .collect();
    pairs.sort_unstable_by_key(|&(_, d)| d);
    Reduction {
        reduced,
        pairs,
        essential,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PersistencePair {
    pub dim: usize,
    pub birth: f64,
    /// `f64::INFINITY` for essential classes.
    pub death: f64,
    pub birth_simplex: usize,
    pub death_simplex: Option<usize>,
}

impl PersistencePair {
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    pub fn is_infinite(&self) -> bool {
        self.death.is_infinite()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PersistenceDiagram {
    pub pairs: Vec<PersistencePair>,
    pub convention: Convention,
    /// Pairs with birth == death, kept out of `pairs`.
    pub zero_persistence: Vec<PersistencePair>,
    /// Largest filtration value of the source complex.
    pub max_filtration: f64,
}

fn pair_order(a: &PersistencePair, b: &PersistencePair) -> std::cmp::Ordering {
    a.dim
        .cmp(&b.dim)
        .then(a.birth.total_cmp(&b.birth))
        .then(a.death.total_cmp(&b.death))
}

impl PersistenceDiagram {
    pub fn empty(convention: Convention) -> Self {
        PersistenceDiagram {
            pairs: Vec::new(),
            convention,
            zero_persistence: Vec::new(),
            max_filtration: 0.0,
        }
    }

    /// Builds a diagram from `(dim, birth, death)` triples.
    pub fn from_triples(triples: &[(usize, f64, f64)], convention: Convention) -> Result<Self> {
        let mut pairs = Vec::with_capacity(triples.len());
        for &(dim, birth, death) in triples {
            if !(birth <= death) || !birth.is_finite() {
                return Err(Error::invalid(format!("bad pair ({birth}, {death})")));
            }
            pairs.push(PersistencePair {
                dim,
                birth,
                death,
                birth_simplex: usize::MAX,
                death_simplex: None,
            });
        }
        pairs.sort_by(pair_order);
        let max_filtration = pairs
            .iter()
            .flat_map(|p| [p.birth, p.death])
            .filter(|v| v.is_finite())
            .fold(0.0, f64::max);
        Ok(PersistenceDiagram {
            pairs,
            convention,
            zero_persistence: Vec::new(),
            max_filtration,
        })
    }

    pub fn in_dim(&self, dim: usize) -> impl Iterator<Item = &PersistencePair> + '_ {
        self.pairs.iter().filter(move |p| p.dim == dim)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn triples(&self) -> Vec<(usize, f64, f64)> {
        self.pairs.iter().map(|p| (p.dim, p.birth, p.death)).collect()
    }

    /// Largest finite death over all dimensions, if any.
    pub fn max_finite_death(&self) -> Option<f64> {
        self.pairs
            .iter()
            .filter(|p| p.death.is_finite())
            .map(|p| p.death)
            .reduce(f64::max)
    }

    /// Number of `dim` classes born by `i` and still alive at `j`.
    pub fn count_alive(&self, dim: usize, i: f64, j: f64) -> usize {
        self.in_dim(dim).filter(|p| p.birth <= i && p.death > j).count()
    }

    /// Converts between the radius and squared-radius scales of the same
    /// ball filtration. Rips diagrams cannot be converted.
    pub fn rescaled(&self, to: Convention) -> Result<Self> {
        use Convention::*;
        let f: fn(f64) -> f64 = match (self.convention, to) {
            (a, b) if a == b => return Ok(self.clone()),
            (CechRadius, AlphaSquaredRadius) => |v| v * v,
            (AlphaSquaredRadius, CechRadius) => f64::sqrt,
            (a, b) => {
                return Err(Error::invalid(format!(
                    "cannot convert a {} diagram to {}",
                    a.as_str(),
                    b.as_str()
                )))
            }
        };
        let map = |p: &PersistencePair| PersistencePair {
            birth: f(p.birth),
            death: f(p.death),
            ..*p
        };
        Ok(PersistenceDiagram {
            pairs: self.pairs.iter().map(map).collect(),
            convention: to,
            zero_persistence: self.zero_persistence.iter().map(map).collect(),
            max_filtration: f(self.max_filtration),
        })
    }

    /// `dim birth death` per line, `inf` for infinite deaths.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in &self.pairs {
            if p.death.is_infinite() {
                let _ = writeln!(out, "{} {} inf", p.dim, p.birth);
            } else {
                let _ = writeln!(out, "{} {} {}", p.dim, p.birth, p.death);
            }
        }
        out
    }

    pub fn parse(text: &str, convention: Convention) -> Result<Self> {
        let mut triples = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: String| Error::Parse {
                line: lineno + 1,
                reason,
            };
            let toks: Vec<&str> = line.split_whitespace().collect();
            let [d, b, e] = toks[..] else {
                return Err(err(format!("expected `dim birth death`, got {line:?}")));
            };
            let dim = d.parse::<usize>().map_err(|e| err(e.to_string()))?;
            let birth = b.parse::<f64>().map_err(|e| err(e.to_string()))?;
            let death = match e {
                "inf" | "+inf" | "Infinity" => f64::INFINITY,
                _ => e.parse::<f64>().map_err(|e| err(e.to_string()))?,
            };
            triples.push((dim, birth, death));
        }
        Self::from_triples(&triples, convention)
    }
}

/// Persistence diagram of the complex. Zero-length pairs go to
/// [`PersistenceDiagram::zero_persistence`].
pub fn diagram(fc: &FilteredComplex) -> PersistenceDiagram {
    diagram_of_order(fc.simplices(), fc.convention()).expect("complex is face-closed")
}

/// Diagram of simplices in an explicit face-first order.
pub fn diagram_of_order(
    simplices: &[FilteredSimplex],
    convention: Convention,
) -> Result<PersistenceDiagram> {
    let bm = boundary_matrix_of(simplices)?;
    let red = reduce(&bm);
    let mut pairs = Vec::with_capacity(red.pairs.len() + red.essential.len());
    let mut zero = Vec::new();
    for &(b, d) in &red.pairs {
        let pair = PersistencePair {
            dim: bm.dims[b],
            birth: simplices[b].value,
            death: simplices[d].value,
            birth_simplex: b,
            death_simplex: Some(d),
        };
        if pair.birth == pair.death {
            zero.push(pair);
        } else {
            pairs.push(pair);
        }
    }
    for &b in &red.essential {
        pairs.push(PersistencePair {
            dim: bm.dims[b],
            birth: simplices[b].value,
            death: f64::INFINITY,
            birth_simplex: b,
            death_simplex: None,
        });
    }
    pairs.sort_by(pair_order);
    zero.sort_by(pair_order);
    let max_filtration = simplices.iter().map(|s| s.value).fold(0.0, f64::max);
    Ok(PersistenceDiagram {
        pairs,
        convention,
        zero_persistence: zero,
        max_filtration,
    })
}

/// Dense GF(2) vector.
#[derive(Clone, Debug, PartialEq, Eq)]
struct BitVec(Vec<u64>);

impl BitVec {
    fn zeros(n: usize) -> Self {
        BitVec(vec![0; n.div_ceil(64).max(1)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn xor(&mut self, other: &BitVec) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }
    fn leading(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(k, &w)| k * 64 + 63 - w.leading_zeros() as usize)
    }
}

fn rank(vectors: &[BitVec]) -> usize {
    let mut basis: HashMap<usize, BitVec> = HashMap::new();
    for v in vectors {
        let mut v = v.clone();
        while let Some(lead) = v.leading() {
            match basis.get(&lead) {
                Some(b) => v.xor(b),
                None => {
                    basis.insert(lead, v);
                    break;
                }
            }
        }
    }
    basis.len()
}

/// Kernel basis of the linear map whose columns are `cols` (vectors of length
/// `rows`), via reduced row echelon form.
fn kernel_basis(cols: &[BitVec], rows: usize) -> Vec<BitVec> {
    let m = cols.len();
    // transpose into row vectors over the m columns
    let mut mat: Vec<BitVec> = (0..rows).map(|_| BitVec::zeros(m)).collect();
    for (c, col) in cols.iter().enumerate() {
        for (r, row) in mat.iter_mut().enumerate() {
            if col.get(r) {
                row.set(c);
            }
        }
    }
    let mut pivot_cols = Vec::new();
    let mut rank = 0;
    for c in 0..m {
        let Some(r) = (rank..rows).find(|&r| mat[r].get(c)) else {
            continue;
        };
        mat.swap(rank, r);
        let pivot = mat[rank].clone();
        for (k, row) in mat.iter_mut().enumerate() {
            if k != rank && row.get(c) {
                row.xor(&pivot);
            }
        }
        pivot_cols.push(c);
        rank += 1;
    }
    let is_pivot: Vec<bool> = {
        let mut v = vec![false; m];
        for &c in &pivot_cols {
            v[c] = true;
        }
        v
    };
    (0..m)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut x = BitVec::zeros(m);
            x.set(f);
            for (r, &pc) in pivot_cols.iter().enumerate() {
                if mat[r].get(f) {
                    x.set(pc);
                }
            }
            x
        })
        .collect()
}

/// Rank of the map H_k(K_i) → H_k(K_j) induced by inclusion, computed as
/// dim(Z_k(K_i) + B_k(K_j)) − dim B_k(K_j) with dense elimination.
pub fn persistent_betti(fc: &FilteredComplex, dim: usize, i: f64, j: f64) -> Result<usize> {
    if i > j {
        return Err(Error::invalid(format!("persistent betti needs i <= j, got {i} > {j}")));
    }
    let simplices = fc.simplices();
    let index_in_dim = |d: usize| -> HashMap<&Simplex, usize> {
        simplices
            .iter()
            .filter(|s| s.simplex.dim() == d)
            .enumerate()
            .map(|(k, s)| (&s.simplex, k))
            .collect()
    };
    let k_index = index_in_dim(dim);
    let n_k = k_index.len();

    // cycles of K_i as vectors over k-simplices
    let k_simplices_i: Vec<&FilteredSimplex> = simplices
        .iter()
        .filter(|s| s.simplex.dim() == dim && s.value <= i)
        .collect();
    let cycles: Vec<BitVec> = if dim == 0 {
        k_simplices_i
            .iter()
            .map(|s| {
                let mut v = BitVec::zeros(n_k);
                v.set(k_index[&s.simplex]);
                v
            })
            .collect()
    } else {
        let face_index = index_in_dim(dim - 1);
        let boundaries: Vec<BitVec> = k_simplices_i
            .iter()
            .map(|s| {
                let mut v = BitVec::zeros(face_index.len());
                for f in s.simplex.facets() {
                    v.set(face_index[&f]);
                }
                v
            })
            .collect();
        kernel_basis(&boundaries, face_index.len())
            .into_iter()
            .map(|x| {
                let mut v = BitVec::zeros(n_k);
                for (c, s) in k_simplices_i.iter().enumerate() {
                    if x.get(c) {
                        v.set(k_index[&s.simplex]);
                    }
                }
                v
            })
            .collect()
    };

    let bounds: Vec<BitVec> = simplices
        .iter()
        .filter(|s| s.simplex.dim() == dim + 1 && s.value <= j)
        .map(|s| {
            let mut v = BitVec::zeros(n_k);
            for f in s.simplex.facets() {
                v.set(k_index[&f]);
            }
            v
        })
        .collect();
    let mut both = cycles;
    both.extend(bounds.iter().cloned());
    Ok(rank(&both) - rank(&bounds))
}
