//! The fundamental domain as a finite simplicial complex: vertices are the
//! shapes, edges join a shape to each of its collapses, and faces fill every
//! chain of three shapes.

use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::splittings::{Shape, ShapeCatalog, ShapeInstance};

/// Sparse integer matrix stored by rows.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<BTreeMap<usize, i64>>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            entries: vec![BTreeMap::new(); rows],
        }
    }

    pub fn add(&mut self, r: usize, c: usize, v: i64) {
        let e = self.entries[r].entry(c).or_insert(0);
        *e += v;
        if *e == 0 {
            self.entries[r].remove(&c);
        }
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.entries[r].get(&c).copied().unwrap_or(0)
    }

    pub fn nnz(&self) -> usize {
        self.entries.iter().map(BTreeMap::len).sum()
    }

    /// Product `self * other`.
    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = SparseMatrix::zeros(self.rows, other.cols);
        for (r, row) in self.entries.iter().enumerate() {
            for (&k, &a) in row {
                for (&c, &b) in &other.entries[k] {
                    out.add(r, c, a * b);
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(BTreeMap::is_empty)
    }
}

/// The complex on the shapes for a fixed n.
#[derive(Clone, Debug)]
pub struct CellComplex {
    pub catalog: ShapeCatalog,
    /// Edges (from, to) where `to` is a collapse of `from`.
    pub edges: Vec<(usize, usize)>,
    /// Chains (a, b, c) with b a collapse of a and c a collapse of b.
    pub faces: Vec<(usize, usize, usize)>,
    edge_index: HashMap<(usize, usize), usize>,
}

impl CellComplex {
    pub fn vertices(&self) -> &[ShapeInstance] {
        self.catalog.shapes()
    }

    pub fn n(&self) -> usize {
        self.catalog.n()
    }

    pub fn cell_count(&self) -> usize {
        self.vertices().len() + self.edges.len() + self.faces.len()
    }

    pub fn edge(&self, from: usize, to: usize) -> Option<usize> {
        self.edge_index.get(&(from, to)).copied()
    }

    /// Whether two vertices are joined, in either direction.
    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.edge(a, b).is_some() || self.edge(b, a).is_some()
    }

    /// ∂₁: edges to vertices, with ∂(a → b) = b − a.
    pub fn boundary1(&self) -> SparseMatrix {
        let mut m = SparseMatrix::zeros(self.vertices().len(), self.edges.len());
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            m.add(b, e, 1);
            m.add(a, e, -1);
        }
        m
    }

    /// ∂₂: faces to edges, with ∂[a, b, c] = [b, c] − [a, c] + [a, b].
    pub fn boundary2(&self) -> SparseMatrix {
        let mut m = SparseMatrix::zeros(self.edges.len(), self.faces.len());
        for (f, &(a, b, c)) in self.faces.iter().enumerate() {
            m.add(self.edge_index[&(b, c)], f, 1);
            m.add(self.edge_index[&(a, c)], f, -1);
            m.add(self.edge_index[&(a, b)], f, 1);
        }
        m
    }

    /// Number of connected components of the 1-skeleton.
    pub fn components(&self) -> usize {
        let nv = self.vertices().len();
        let mut adj = vec![Vec::new(); nv];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; nv];
        let mut count = 0;
        for s in 0..nv {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        count
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices().len() as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }
}

pub fn build_domain_complex(n: usize) -> Result<CellComplex> {
    let catalog = ShapeCatalog::new(n)?;
    let mut edges = Vec::new();
    let mut edge_index = HashMap::new();
    for a in 0..catalog.len() {
        for &b in catalog.collapses_of(a) {
            edge_index.insert((a, b), edges.len());
            edges.push((a, b));
        }
    }
    let mut faces = Vec::new();
    for a in 0..catalog.len() {
        for &b in catalog.collapses_of(a) {
            for &c in catalog.collapses_of(b) {
                if !edge_index.contains_key(&(a, c)) {
                    return Err(Error::Internal(format!(
                        "collapse relation is not transitive at {}",
                        catalog.shapes()[a]
                    )));
                }
                faces.push((a, b, c));
            }
        }
    }
    Ok(CellComplex {
        catalog,
        edges,
        faces,
        edge_index,
    })
}

/// Diagonal of the Smith normal form, omitting zeros. Unit pivots are removed
/// by sparse elimination first and the remainder is reduced densely.
pub fn smith_diagonal(m: &SparseMatrix) -> Result<Vec<u64>> {
    let mut rows: Vec<BTreeMap<usize, i128>> = m
        .entries
        .iter()
        .map(|r| r.iter().map(|(&c, &v)| (c, v as i128)).collect())
        .collect();
    let mut cols: Vec<Vec<usize>> = vec![Vec::new(); m.cols];
    for (r, row) in rows.iter().enumerate() {
        for &c in row.keys() {
            cols[c].push(r);
        }
    }
    let mut alive_row = vec![true; m.rows];
    let mut alive_col = vec![true; m.cols];
    let mut diag = Vec::new();
    loop {
        let pivot = rows.iter().enumerate().find_map(|(r, row)| {
            if !alive_row[r] {
                return None;
            }
            row.iter()
                .find(|(_, v)| v.abs() == 1)
                .map(|(&c, &v)| (r, c, v))
        });
        let Some((pr, pc, pv)) = pivot else { break };
        let pivot_row: Vec<(usize, i128)> = rows[pr].iter().map(|(&c, &v)| (c, v)).collect();
        let touched: Vec<usize> = cols[pc].clone();
        for r in touched {
            if r == pr || !alive_row[r] {
                continue;
            }
            let Some(&a) = rows[r].get(&pc) else { continue };
            // Row r minus (a / pivot) times the pivot row; the pivot is ±1.
            let factor = a * pv;
            for &(c, v) in &pivot_row {
                let e = rows[r].entry(c).or_insert(0);
                if *e == 0 {
                    cols[c].push(r);
                }
                *e -= factor * v;
                if *e == 0 {
                    rows[r].remove(&c);
                }
            }
        }
        alive_row[pr] = false;
        alive_col[pc] = false;
        for (c, _) in pivot_row {
            cols[c].retain(|&r| r != pr);
        }
        for row in rows.iter_mut() {
            row.remove(&pc);
        }
        diag.push(1);
    }
    let live_rows: Vec<usize> = (0..m.rows)
        .filter(|&r| alive_row[r] && !rows[r].is_empty())
        .collect();
    let live_cols: Vec<usize> = (0..m.cols).filter(|&c| alive_col[c]).collect();
    let col_pos: HashMap<usize, usize> = live_cols.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut dense = vec![vec![0i128; live_cols.len()]; live_rows.len()];
    for (i, &r) in live_rows.iter().enumerate() {
        for (&c, &v) in &rows[r] {
            dense[i][col_pos[&c]] = v;
        }
    }
    diag.extend(dense_smith(dense)?);
    Ok(diag)
}

fn dense_smith(mut a: Vec<Vec<i128>>) -> Result<Vec<u64>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // Smallest non-zero entry in the remaining block.
        let mut best: Option<(usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(t) {
            for (j, &v) in row.iter().enumerate().skip(t) {
                if v != 0 && best.is_none_or(|(bi, bj)| v.abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        a.swap(t, bi);
        for row in a.iter_mut() {
            row.swap(t, bj);
        }
        let mut clean = true;
        let p = a[t][t];
        for i in t + 1..rows {
            let q = a[i][t] / p;
            if q != 0 {
                for j in t..cols {
                    a[i][j] -= q * a[t][j];
                }
            }
            clean &= a[i][t] == 0;
        }
        for j in t + 1..cols {
            let q = a[t][j] / p;
            if q != 0 {
                for row in a.iter_mut().skip(t) {
                    row[j] -= q * row[t];
                }
            }
            clean &= a[t][j] == 0;
        }
        if !clean {
            continue;
        }
        // The pivot must divide the rest of the block.
        let bad = (t + 1..rows)
            .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
            .find(|&(i, j)| a[i][j] % p != 0);
        if let Some((i, _)) = bad {
            for j in t..cols {
                a[t][j] += a[i][j];
            }
            continue;
        }
        let d = u64::try_from(p.abs()).map_err(|_| Error::Internal("entry overflow".into()))?;
        diag.push(d);
        t += 1;
    }
    Ok(diag)
}

/// Invariants of H₁: each 0 is a free summand Z and each d > 1 is Z/d.
/// An empty list means H₁ = 0.
pub fn homology_h1(c: &CellComplex) -> Result<Vec<u64>> {
    let d1 = smith_diagonal(&c.boundary1())?;
    let d2 = smith_diagonal(&c.boundary2())?;
    let kernel = c.edges.len() - d1.len();
    let free = kernel
        .checked_sub(d2.len())
        .ok_or_else(|| Error::Internal("image larger than kernel".into()))?;
    let mut out = vec![0; free];
    out.extend(d2.into_iter().filter(|&d| d > 1));
    Ok(out)
}

/// A path of shapes from `v` to α along edges of the complex.
pub fn path_to_alpha(c: &CellComplex, v: &ShapeInstance) -> Result<Vec<ShapeInstance>> {
    let cat = &c.catalog;
    let v = cat.canonical(v)?;
    let x = &v.indices;
    let s = |shape: Shape, idx: &[usize]| ShapeInstance::new(shape, idx.to_vec());
    let alpha = ShapeInstance::alpha();
    let raw = match v.shape {
        Shape::Alpha => vec![alpha],
        Shape::Rho | Shape::A => vec![v.clone(), alpha],
        Shape::Beta => vec![v.clone(), s(Shape::Rho, x), alpha],
        Shape::Gamma => vec![v.clone(), s(Shape::Rho, &x[1..3]), alpha],
        Shape::B => vec![
            v.clone(),
            s(Shape::Beta, &x[1..3]),
            s(Shape::Rho, &x[1..3]),
            alpha,
        ],
        Shape::Sigma | Shape::Tau => vec![v.clone(), s(Shape::A, &x[..1]), alpha],
        Shape::C => vec![
            v.clone(),
            s(Shape::Sigma, x),
            s(Shape::A, &x[..1]),
            alpha,
        ],
        Shape::Delta => vec![
            v.clone(),
            s(Shape::Tau, &x[1..]),
            s(Shape::A, &x[1..2]),
            alpha,
        ],
        Shape::Epsilon => vec![
            v.clone(),
            s(Shape::Tau, &[x[0], x[1], x[2], x[3]]),
            s(Shape::A, &x[..1]),
            alpha,
        ],
    };
    let mut path = Vec::with_capacity(raw.len());
    for inst in &raw {
        path.push(cat.canonical(inst)?);
    }
    for w in path.windows(2) {
        let (a, b) = (cat.find(&w[0])?, cat.find(&w[1])?);
        if !c.adjacent(a, b) {
            return Err(Error::Internal(format!("{} and {} are not adjacent", w[0], w[1])));
        }
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        let c3 = build_domain_complex(3).unwrap();
        assert_eq!((c3.vertices().len(), c3.edges.len(), c3.faces.len()), (4, 3, 0));
        let c4 = build_domain_complex(4).unwrap();
        assert_eq!(c4.vertices().len(), 32);
        assert_eq!(c4.cell_count(), 159);
    }

    #[test]
    fn boundary_squares_to_zero() {
        let c = build_domain_complex(4).unwrap();
        assert!(c.boundary1().mul(&c.boundary2()).is_zero());
    }

    #[test]
    fn smith_of_small_matrices() {
        let mut m = SparseMatrix::zeros(2, 2);
        m.add(0, 0, 2);
        m.add(1, 1, 3);
        assert_eq!(smith_diagonal(&m).unwrap(), vec![1, 6]);
        let mut m = SparseMatrix::zeros(2, 2);
        m.add(0, 0, 2);
        m.add(0, 1, 4);
        m.add(1, 0, 4);
        m.add(1, 1, 8);
        assert_eq!(smith_diagonal(&m).unwrap(), vec![2]);
    }

    #[test]
    fn circle_has_free_homology() {
        // Three vertices in a cycle with no face.
        let mut d1 = SparseMatrix::zeros(3, 3);
        for (e, (a, b)) in [(0, 1), (1, 2), (0, 2)].into_iter().enumerate() {
            d1.add(b, e, 1);
            d1.add(a, e, -1);
        }
        assert_eq!(smith_diagonal(&d1).unwrap().len(), 2);
    }

    #[test]
    fn h1_vanishes_for_small_n() {
        for n in [3, 4] {
            let c = build_domain_complex(n).unwrap();
            assert!(homology_h1(&c).unwrap().is_empty());
        }
    }

    #[test]
    fn alpha_path_is_trivial() {
        let c = build_domain_complex(4).unwrap();
        assert_eq!(path_to_alpha(&c, &ShapeInstance::alpha()).unwrap(), vec![ShapeInstance::alpha()]);
    }
}
