//! Weighted tree-connectivity `τ_w = log t_w`, effective resistance, and
//! candidate scoring.
//!
//! The Cholesky route is the production path. The eigenvalue route and the
//! brute-force enumeration exist to cross-check it.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{default_reduced_laplacian, DisjointSets, ReducedLaplacian, WeightedGraph};

/// `tau` is the natural log of the weighted spanning-tree count, and 0 for a
/// disconnected graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TreeConnectivity {
    pub tau: f64,
    pub connected: bool,
}

/// Tree-connectivity via `2 Σ log diag(R)` of the reduced Laplacian's factor.
pub fn tree_connectivity(g: &WeightedGraph) -> Result<TreeConnectivity> {
    if !g.is_connected() {
        return Ok(TreeConnectivity { tau: 0.0, connected: false });
    }
    if g.vertex_count() == 1 {
        return Ok(TreeConnectivity { tau: 0.0, connected: true });
    }
    let l = default_reduced_laplacian(g)?;
    let tau = l.log_det().map_err(|e| {
        Error::Numerical(format!("connected graph has a non-positive-definite reduced Laplacian: {e}"))
    })?;
    Ok(TreeConnectivity { tau, connected: true })
}

/// Tree-connectivity via the Laplacian spectrum, `Σ_{i≥2} log λ_i − log n`.
pub fn tree_connectivity_spectral(g: &WeightedGraph) -> Result<TreeConnectivity> {
    let n = g.vertex_count();
    if n == 1 {
        return Ok(TreeConnectivity { tau: 0.0, connected: true });
    }
    let full = DMatrix::from_row_slice(n, n, &g.laplacian());
    let scale = full.diagonal().max().max(1.0);
    let mut eig: Vec<f64> = SymmetricEigen::new(full).eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    if eig[1] <= 1e-10 * scale {
        return Err(Error::Domain(format!(
            "algebraic connectivity {:.3e} is numerically zero; graph is disconnected",
            eig[1]
        )));
    }
    let tau = eig[1..].iter().map(|l| l.ln()).sum::<f64>() - (n as f64).ln();
    Ok(TreeConnectivity { tau, connected: true })
}

/// Largest graph accepted by [`count_spanning_trees_bruteforce`].
pub const BRUTEFORCE_MAX_EDGES: usize = 12;
pub const BRUTEFORCE_MAX_VERTICES: usize = 8;

/// Weighted spanning-tree count by enumerating every `(n−1)`-edge subset and
/// summing the weight products of those that are trees.
pub fn count_spanning_trees_bruteforce(g: &WeightedGraph) -> Result<f64> {
    let (n, m) = (g.vertex_count(), g.edge_count());
    if m > BRUTEFORCE_MAX_EDGES && n > BRUTEFORCE_MAX_VERTICES {
        return Err(Error::Size(format!(
            "enumeration limited to <= {BRUTEFORCE_MAX_EDGES} edges or <= {BRUTEFORCE_MAX_VERTICES} \
             vertices (got n = {n}, m = {m})"
        )));
    }
    if n == 1 {
        return Ok(1.0);
    }
    fn extend(
        edges: &[crate::graph::Edge],
        start: usize,
        need: usize,
        chosen: &mut Vec<usize>,
        n: usize,
        total: &mut f64,
    ) {
        if need == 0 {
            let mut dsu = DisjointSets::new(n);
            let mut value = 1.0;
            for &i in chosen.iter() {
                if !dsu.union(edges[i].u, edges[i].v) {
                    return;
                }
                value *= edges[i].weight;
            }
            *total += value;
            return;
        }
        for i in start..=edges.len().saturating_sub(need) {
            chosen.push(i);
            extend(edges, i + 1, need - 1, chosen, n, total);
            chosen.pop();
        }
    }
    let mut total = 0.0;
    if m >= n - 1 {
        extend(g.edges(), 0, n - 1, &mut Vec::with_capacity(n - 1), n, &mut total);
    }
    Ok(total)
}

/// Effective resistance between two vertices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveResistance {
    pub value: f64,
    /// 1-based endpoints.
    pub endpoints: (usize, usize),
}

fn check_pair(l: &ReducedLaplacian, u: usize, v: usize) -> Result<()> {
    let n = l.vertex_count();
    if u == 0 || v == 0 || u > n || v > n {
        return Err(Error::Argument(format!("vertex pair ({u},{v}) outside 1..={n}")));
    }
    if u == v {
        return Err(Error::Argument(format!("effective resistance needs distinct vertices, got {u} twice")));
    }
    Ok(())
}

/// `Δ_uv = a_uvᵀ L⁻¹ a_uv` by one triangular solve against the cached factor.
/// Vertices are 1-based.
pub fn effective_resistance(l: &ReducedLaplacian, u: usize, v: usize) -> Result<EffectiveResistance> {
    check_pair(l, u, v)?;
    let value = l.cholesky()?.quadratic_form_inverse(l.pair_vector(u - 1, v - 1));
    Ok(EffectiveResistance { value, endpoints: (u, v) })
}

/// Score `w Δ` of a candidate edge and the exact tree-connectivity gain
/// `log(1 + w Δ)` of adding it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CandidateScore {
    pub score: f64,
    pub gain: f64,
}

impl CandidateScore {
    pub fn from_resistance(weight: f64, resistance: f64) -> Self {
        let score = weight * resistance;
        Self { score, gain: score.ln_1p() }
    }
}

pub fn score_candidate(l: &ReducedLaplacian, u: usize, v: usize, weight: f64) -> Result<CandidateScore> {
    let r = effective_resistance(l, u, v)?;
    Ok(CandidateScore::from_resistance(weight, r.value))
}
