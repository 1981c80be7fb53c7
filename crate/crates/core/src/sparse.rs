//! Sparse Cholesky for reduced Laplacians with a fixed edge pattern.
//!
//! The relaxation refactors the same pattern (base plus every candidate) with
//! new weights at each iterate, so the ordering and fill pattern are computed
//! once. Ordering is plain minimum degree on the elimination graph; the
//! neighbor sets met along the way are exactly the columns of the factor.
//!
//! Every off-diagonal nonzero `L[i][j]` has `i` an ancestor of `j` in the
//! elimination tree, so solving against `e_u − e_v` only touches the two tree
//! paths from `u` and `v` to the root.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{PairVector, PIVOT_RELATIVE_FLOOR};

const NO_PARENT: usize = usize::MAX;

/// Sorted union of `a` and `b` with `skip_a` and `skip_b` left out.
fn merge_without(a: &[usize], b: &[usize], skip_a: usize, skip_b: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x == y => {
                i += 1;
                j += 1;
                x
            }
            (Some(&x), Some(&y)) if x < y => {
                i += 1;
                x
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (_, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        if next != skip_a && next != skip_b {
            out.push(next);
        }
    }
    out
}

/// Ordering, elimination tree and factor pattern for one edge list.
#[derive(Debug, Clone)]
pub(crate) struct SymbolicFactor {
    n: usize,
    /// `iperm[original] = position`.
    iperm: Vec<usize>,
    parent: Vec<usize>,
    col_ptr: Vec<usize>,
    /// Row indices per column, diagonal first, ascending.
    row_idx: Vec<usize>,
    /// Columns `k < j` with `L[j][k] ≠ 0`, per row `j`, ascending.
    row_cols: Vec<Vec<usize>>,
    /// Permuted endpoints of each edge slot.
    slots: Vec<PairVector>,
    /// Strictly-lower entries of the assembled matrix per column:
    /// `(row, slot)`.
    lower: Vec<Vec<(usize, usize)>>,
}

impl SymbolicFactor {
    /// `edges` are the reduced endpoints of every slot that may carry weight.
    pub(crate) fn analyze(n: usize, edges: &[PairVector]) -> Self {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in edges {
            if let (Some(a), Some(b)) = (e.plus, e.minus) {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }

        // Minimum degree, ties to the lowest index.
        let mut eliminated = vec![false; n];
        let mut heap: BinaryHeap<Reverse<(usize, usize)>> = (0..n).map(|v| Reverse((adj[v].len(), v))).collect();
        let mut order = Vec::with_capacity(n);
        let mut columns: Vec<Vec<usize>> = vec![Vec::new(); n];
        while let Some(Reverse((deg, v))) = heap.pop() {
            if eliminated[v] || deg != adj[v].len() {
                continue;
            }
            eliminated[v] = true;
            order.push(v);
            let nbrs = std::mem::take(&mut adj[v]);
            for &a in &nbrs {
                let merged = merge_without(&adj[a], &nbrs, v, a);
                adj[a] = merged;
                heap.push(Reverse((adj[a].len(), a)));
            }
            columns[v] = nbrs;
        }

        let mut iperm = vec![0; n];
        for (pos, &v) in order.iter().enumerate() {
            iperm[v] = pos;
        }
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::new();
        let mut parent = vec![NO_PARENT; n];
        let mut row_cols: Vec<Vec<usize>> = vec![Vec::new(); n];
        col_ptr.push(0);
        for (j, &v) in order.iter().enumerate() {
            let mut rows: Vec<usize> = columns[v].iter().map(|&a| iperm[a]).collect();
            rows.sort_unstable();
            row_idx.push(j);
            if let Some(&first) = rows.first() {
                parent[j] = first;
            }
            for &i in &rows {
                row_cols[i].push(j);
            }
            row_idx.extend(rows);
            col_ptr.push(row_idx.len());
        }

        let slots: Vec<PairVector> = edges
            .iter()
            .map(|e| PairVector { plus: e.plus.map(|a| iperm[a]), minus: e.minus.map(|b| iperm[b]) })
            .collect();
        let mut lower: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (s, e) in slots.iter().enumerate() {
            if let (Some(a), Some(b)) = (e.plus, e.minus) {
                lower[a.min(b)].push((a.max(b), s));
            }
        }
        Self { n, iperm, parent, col_ptr, row_idx, row_cols, slots, lower }
    }

    pub(crate) fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    /// Numeric factorization with `weights[s]` on slot `s`.
    #[allow(clippy::needless_range_loop)]
    pub(crate) fn factor(&self, weights: &[f64]) -> Result<SparseCholesky<'_>> {
        let n = self.n;
        let mut diag = vec![0.0; n];
        for (e, &w) in self.slots.iter().zip(weights) {
            for i in [e.plus, e.minus].into_iter().flatten() {
                diag[i] += w;
            }
        }
        let floor = PIVOT_RELATIVE_FLOOR * diag.iter().copied().fold(0.0, f64::max);
        let mut lx = vec![0.0; self.nnz()];
        let mut next: Vec<usize> = self.col_ptr[..n].iter().map(|p| p + 1).collect();
        let mut x = vec![0.0; n];
        for j in 0..n {
            x[j] = diag[j];
            for &(i, s) in &self.lower[j] {
                x[i] -= weights[s];
            }
            for &k in &self.row_cols[j] {
                let p = next[k];
                debug_assert_eq!(self.row_idx[p], j);
                let ljk = lx[p];
                for q in p..self.col_ptr[k + 1] {
                    x[self.row_idx[q]] -= lx[q] * ljk;
                }
                next[k] = p + 1;
            }
            let d = x[j];
            x[j] = 0.0;
            if d.is_nan() || d <= floor {
                return Err(Error::Numerical(format!("pivot {d:.3e} at step {j} is not positive")));
            }
            let ljj = d.sqrt();
            let start = self.col_ptr[j];
            lx[start] = ljj;
            for q in start + 1..self.col_ptr[j + 1] {
                let i = self.row_idx[q];
                lx[q] = x[i] / ljj;
                x[i] = 0.0;
            }
        }
        Ok(SparseCholesky { sym: self, lx })
    }
}

#[derive(Debug, Clone)]
pub(crate) struct SparseCholesky<'a> {
    sym: &'a SymbolicFactor,
    lx: Vec<f64>,
}

impl SparseCholesky<'_> {
    pub(crate) fn log_det(&self) -> f64 {
        2.0 * self.sym.col_ptr[..self.sym.n].iter().map(|&p| self.lx[p].ln()).sum::<f64>()
    }

    /// Appends the tree path from `start` to the root.
    fn path(&self, start: Option<usize>, out: &mut Vec<usize>) {
        let mut j = match start {
            Some(j) => j,
            None => return,
        };
        loop {
            out.push(j);
            j = self.sym.parent[j];
            if j == NO_PARENT {
                break;
            }
        }
    }

    /// `aᵀ L⁻¹ a` for `a` given in original reduced indices; `work` must be
    /// all zeros of length `n` and is left that way.
    fn quadratic_form_with(&self, a: PairVector, work: &mut [f64], nodes: &mut Vec<usize>) -> f64 {
        let sym = self.sym;
        let p = a.plus.map(|i| sym.iperm[i]);
        let m = a.minus.map(|i| sym.iperm[i]);
        nodes.clear();
        self.path(p, nodes);
        let split = nodes.len();
        self.path(m, nodes);
        let (first, second) = nodes.split_at(split);
        let mut merged = merge_without(first, second, NO_PARENT, NO_PARENT);
        if let Some(i) = p {
            work[i] += 1.0;
        }
        if let Some(i) = m {
            work[i] -= 1.0;
        }
        let mut acc = 0.0;
        for &j in &merged {
            let start = sym.col_ptr[j];
            let xj = work[j] / self.lx[start];
            work[j] = 0.0;
            if xj != 0.0 {
                acc += xj * xj;
                for q in start + 1..sym.col_ptr[j + 1] {
                    work[sym.row_idx[q]] -= self.lx[q] * xj;
                }
            }
        }
        merged.clear();
        acc
    }

    /// `aᵀ L⁻¹ a` for every `a`, in parallel.
    pub(crate) fn quadratic_forms(&self, pairs: &[PairVector]) -> Vec<f64> {
        let n = self.sym.n;
        pairs
            .par_iter()
            .map_init(
                || (vec![0.0; n], Vec::new()),
                |(work, nodes), &a| self.quadratic_form_with(a, work, nodes),
            )
            .collect()
    }
}
