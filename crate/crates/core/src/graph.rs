//! Weighted undirected graphs and their (reduced) Laplacian matrices.
//!
//! Vertices are 1-based at the public boundary (`1..=n`) and 0-based inside
//! the crate. Parallel edges are merged by summing their weights.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, PairVector};

/// A weighted edge with 0-based endpoints, `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Immutable weighted undirected graph on vertices `1..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
}

pub(crate) fn check_endpoints(n: usize, u: usize, v: usize) -> Result<()> {
    if u == 0 || v == 0 || u > n || v > n {
        return Err(Error::Argument(format!(
            "edge {{{u},{v}}} references a vertex outside 1..={n}"
        )));
    }
    if u == v {
        return Err(Error::Argument(format!("self-loop at vertex {u}")));
    }
    Ok(())
}

fn check_weight(w: f64, min: f64) -> Result<()> {
    if !w.is_finite() || w < min || w <= 0.0 {
        return Err(Error::Data(format!(
            "edge weight {w} is invalid; weights must be finite and >= {min} \
             (use normalization to rescale)"
        )));
    }
    Ok(())
}

impl WeightedGraph {
    /// Builds a graph from 1-based `(u, v, weight)` triples.
    ///
    /// Weights below 1 are rejected; see [`WeightedGraph::normalized`].
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        Self::build(n, edges, 1.0)
    }

    /// Like [`WeightedGraph::new`] but rescales every weight by the smallest
    /// `alpha >= 1` that lifts all weights to at least 1. Returns `alpha`.
    pub fn normalized(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<(Self, f64)> {
        let edges: Vec<_> = edges.into_iter().collect();
        let min = edges.iter().map(|e| e.2).fold(f64::INFINITY, f64::min);
        let alpha = normalization_factor(min);
        let g = Self::build(n, edges.into_iter().map(|(u, v, w)| (u, v, w * alpha)), 1.0)?;
        Ok((g, alpha))
    }

    fn build(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
        min_weight: f64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Argument("graph must have at least one vertex".into()));
        }
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        let mut order = Vec::new();
        for (u, v, w) in edges {
            check_endpoints(n, u, v)?;
            check_weight(w, min_weight)?;
            let key = (u.min(v) - 1, u.max(v) - 1);
            match merged.get_mut(&key) {
                Some(acc) => *acc += w,
                None => {
                    merged.insert(key, w);
                    order.push(key);
                }
            }
        }
        let edges = order
            .into_iter()
            .map(|(u, v)| Edge { u, v, weight: merged[&(u, v)] })
            .collect();
        Ok(Self { n, edges })
    }

    /// Crate-internal constructor from 0-based edges that are already valid.
    pub(crate) fn from_zero_based(n: usize, edges: impl IntoIterator<Item = Edge>) -> Self {
        let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut out: Vec<Edge> = Vec::new();
        for e in edges {
            let key = (e.u.min(e.v), e.u.max(e.v));
            match index.get(&key) {
                Some(&i) => out[i].weight += e.weight,
                None => {
                    index.insert(key, out.len());
                    out.push(Edge { u: key.0, v: key.1, weight: e.weight });
                }
            }
        }
        Self { n, edges: out }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges with 0-based endpoints.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edges as 1-based `(u, v, weight)` triples.
    pub fn edge_triples(&self) -> Vec<(usize, usize, f64)> {
        self.edges.iter().map(|e| (e.u + 1, e.v + 1, e.weight)).collect()
    }

    /// Number of connected components.
    pub fn component_count(&self) -> usize {
        let mut dsu = DisjointSets::new(self.n);
        let mut count = self.n;
        for e in &self.edges {
            if dsu.union(e.u, e.v) {
                count -= 1;
            }
        }
        count
    }

    /// True iff all vertices lie in one component.
    pub fn is_connected(&self) -> bool {
        if self.n <= 1 {
            return true;
        }
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut reached = 1;
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    reached += 1;
                    stack.push(y);
                }
            }
        }
        reached == self.n
    }

    /// Full `n × n` weighted Laplacian, row-major.
    pub fn laplacian(&self) -> Vec<f64> {
        let n = self.n;
        let mut l = vec![0.0; n * n];
        for e in &self.edges {
            l[e.u * n + e.u] += e.weight;
            l[e.v * n + e.v] += e.weight;
            l[e.u * n + e.v] -= e.weight;
            l[e.v * n + e.u] -= e.weight;
        }
        l
    }
}

/// Smallest `alpha >= 1` with `alpha * min_weight >= 1`.
pub fn normalization_factor(min_weight: f64) -> f64 {
    if min_weight.is_finite() && min_weight > 0.0 && min_weight < 1.0 {
        1.0 / min_weight
    } else {
        1.0
    }
}

/// Union-find over `0..n`.
#[derive(Debug, Clone)]
pub(crate) struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Anchored weighted Laplacian `A W Aᵀ` with its Cholesky factor cached after
/// first use.
#[derive(Debug)]
pub struct ReducedLaplacian {
    n: usize,
    anchor: usize,
    matrix: Vec<f64>,
    factor: OnceLock<Result<Cholesky>>,
}

impl Clone for ReducedLaplacian {
    fn clone(&self) -> Self {
        let factor = OnceLock::new();
        if let Some(f) = self.factor.get() {
            let _ = factor.set(f.clone());
        }
        Self { n: self.n, anchor: self.anchor, matrix: self.matrix.clone(), factor }
    }
}

impl ReducedLaplacian {
    /// Assembles the reduced Laplacian on `n` vertices from 0-based weighted
    /// edges, crossing out row and column `anchor` (0-based).
    pub(crate) fn assemble(
        n: usize,
        anchor: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Self {
        let m = n - 1;
        let mut matrix = vec![0.0; m * m];
        for (u, v, w) in edges {
            let (ru, rv) = (reduce_index(u, anchor), reduce_index(v, anchor));
            if let Some(i) = ru {
                matrix[i * m + i] += w;
            }
            if let Some(j) = rv {
                matrix[j * m + j] += w;
            }
            if let (Some(i), Some(j)) = (ru, rv) {
                matrix[i * m + j] -= w;
                matrix[j * m + i] -= w;
            }
        }
        Self { n, anchor, matrix, factor: OnceLock::new() }
    }

    /// Order of the matrix (`n - 1`).
    pub fn order(&self) -> usize {
        self.n - 1
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    /// Anchored vertex, 1-based.
    pub fn anchor(&self) -> usize {
        self.anchor + 1
    }

    /// Row-major entries.
    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.order() + j]
    }

    /// Cached Cholesky factor.
    pub fn cholesky(&self) -> Result<&Cholesky> {
        self.factor
            .get_or_init(|| Cholesky::factor(self.order(), &self.matrix))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Takes the factor out of the cache, computing it if needed.
    pub(crate) fn into_cholesky(self) -> Result<Cholesky> {
        match self.factor.into_inner() {
            Some(f) => f,
            None => Cholesky::factor(self.n - 1, &self.matrix),
        }
    }

    /// `log det` of the matrix.
    pub fn log_det(&self) -> Result<f64> {
        Ok(self.cholesky()?.log_det())
    }

    /// `a_uv` for 0-based vertices in this matrix's coordinates.
    pub(crate) fn pair_vector(&self, u: usize, v: usize) -> PairVector {
        PairVector::new(reduce_index(u, self.anchor), reduce_index(v, self.anchor))
    }

    /// Largest `|M_ij - M_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let m = self.order();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..i {
                worst = worst.max((self.matrix[i * m + j] - self.matrix[j * m + i]).abs());
            }
        }
        worst
    }
}

pub(crate) fn reduce_index(v: usize, anchor: usize) -> Option<usize> {
    use std::cmp::Ordering::*;
    match v.cmp(&anchor) {
        Less => Some(v),
        Equal => None,
        Greater => Some(v - 1),
    }
}

/// Reduced weighted Laplacian of `g` anchored at the 1-based vertex `anchor`.
pub fn build_reduced_laplacian(g: &WeightedGraph, anchor: usize) -> Result<ReducedLaplacian> {
    if g.n < 2 {
        return Err(Error::Argument("reduced Laplacian needs at least 2 vertices".into()));
    }
    if anchor == 0 || anchor > g.n {
        return Err(Error::Argument(format!("anchor {anchor} outside 1..={}", g.n)));
    }
    Ok(ReducedLaplacian::assemble(
        g.n,
        anchor - 1,
        g.edges.iter().map(|e| (e.u, e.v, e.weight)),
    ))
}

/// Reduced Laplacian anchored at the default vertex `n`.
pub fn default_reduced_laplacian(g: &WeightedGraph) -> Result<ReducedLaplacian> {
    build_reduced_laplacian(g, g.n)
}

pub fn is_connected(g: &WeightedGraph) -> bool {
    g.is_connected()
}
