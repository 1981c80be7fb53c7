//! Sparse graph synthesis by maximizing the weighted number of spanning trees.
//!
//! Given a connected base graph and a pool of candidate edges, pick `k`
//! candidates (or remove `k` base edges) so that the log weighted
//! spanning-tree count is as large as possible. Two solvers are provided, a
//! greedy one with the usual `1 − 1/e` guarantee and a log-det relaxation with
//! rounding, plus bounds that bracket the unknown optimum.
//!
//! Vertices are 1-based at every public boundary. Candidate indices are
//! 0-based positions in the instance's candidate list.

pub mod certificates;
pub mod convex;
pub mod error;
pub mod graph;
pub mod greedy;
pub mod instance;
pub mod linalg;
pub mod rng;
pub mod slam;
mod sparse;
pub mod treeconn;

pub use certificates::{certify, gap_for_design, CertificateBundle, GapReport};
pub use convex::{round_deterministic, round_randomized, solve_p2, solve_p3, RelaxedSolution, SolverOptions};
pub use error::{Error, Result};
pub use graph::{build_reduced_laplacian, ReducedLaplacian, WeightedGraph};
pub use greedy::{exhaustive_select, greedy_dual, greedy_select, SelectionResult};
pub use instance::{
    random_instance, reduce_removal_to_addition, Channel, Direction, EdgeRecord, EspInstance, Objective,
    RandomInstanceConfig,
};
pub use slam::{dopt_proxy, parse_g2o, to_instance, PoseGraphDataset};
pub use treeconn::{effective_resistance, tree_connectivity, TreeConnectivity};
