mod common;

use proptest::prelude::*;
use treeconn::graph::{build_reduced_laplacian, default_reduced_laplacian};
use treeconn::treeconn::{
    count_spanning_trees_bruteforce, effective_resistance, score_candidate, tree_connectivity,
    tree_connectivity_spectral,
};
use treeconn::WeightedGraph;

use common::*;

fn graph(n: usize, edges: &EdgeList) -> WeightedGraph {
    WeightedGraph::new(n, edges.iter().copied()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

#[test]
fn tree_count_matches_enumeration_and_determinant() {
    let mut r = rng(11);
    for trial in 0..250 {
        let n = 2 + trial % 5;
        let extra = trial % 7;
        let edges = random_connected(&mut r, n, extra, 1, 5);
        let g = graph(n, &edges);
        let by_enum = tree_count_enum(n, &edges);
        let by_det = tree_count_det(n, &edges);
        let tau = tree_connectivity(&g).unwrap();
        assert!(tau.connected);
        assert!(rel(tau.tau.exp(), by_enum) <= 1e-9, "n={n} edges={edges:?}");
        assert!(rel(by_det, by_enum) <= 1e-9);
        assert!(rel(count_spanning_trees_bruteforce(&g).unwrap(), by_enum) <= 1e-9);
        let spectral = tree_connectivity_spectral(&g).unwrap().tau;
        assert!(rel(spectral.exp(), by_enum) <= 1e-8);
    }
}

#[test]
fn resistance_matches_dense_solve() {
    let mut r = rng(12);
    for trial in 0..100 {
        let n = 3 + trial % 6;
        let edges = random_connected(&mut r, n, trial % 9, 1, 5);
        let l = default_reduced_laplacian(&graph(n, &edges)).unwrap();
        for u in 1..=n {
            for v in u + 1..=n {
                let lib = effective_resistance(&l, u, v).unwrap().value;
                assert!(rel(lib, resistance(n, &edges, u, v)) <= 1e-10);
            }
        }
    }
}

#[test]
fn rank_one_update_law() {
    let mut r = rng(13);
    for trial in 0..300 {
        let n = 2 + trial % 9;
        let base = random_connected(&mut r, n, trial % 5, 1, 5);
        let (u, v) = loop {
            let u = rand::Rng::gen_range(&mut r, 1..=n);
            let v = rand::Rng::gen_range(&mut r, 1..=n);
            if u != v {
                break (u.min(v), u.max(v));
            }
        };
        let w = f64::from(rand::Rng::gen_range(&mut r, 1..=5u32));
        let before = tree_connectivity(&graph(n, &base)).unwrap().tau;
        let mut grown = base.clone();
        grown.push((u, v, w));
        let after = tree_connectivity(&graph(n, &grown)).unwrap().tau;
        let l = default_reduced_laplacian(&graph(n, &base)).unwrap();
        let predicted = score_candidate(&l, u, v, w).unwrap().gain;
        assert!((after - before - predicted).abs() <= 1e-9);
        assert!((predicted - (w * resistance(n, &base, u, v)).ln_1p()).abs() <= 1e-9);
    }
}

#[test]
fn rayleigh_monotonicity() {
    let mut r = rng(14);
    for trial in 0..60 {
        let n = 3 + trial % 6;
        let edges = random_connected(&mut r, n, 4, 1, 5);
        let i = rand::Rng::gen_range(&mut r, 0..edges.len());
        let mut heavier = edges.clone();
        heavier[i].2 += 2.5;
        let a = default_reduced_laplacian(&graph(n, &edges)).unwrap();
        let b = default_reduced_laplacian(&graph(n, &heavier)).unwrap();
        for u in 1..=n {
            for v in u + 1..=n {
                let before = effective_resistance(&a, u, v).unwrap().value;
                let after = effective_resistance(&b, u, v).unwrap().value;
                assert!(after <= before + 1e-12);
            }
        }
    }
}

fn arb_graph() -> impl Strategy<Value = (usize, EdgeList)> {
    (2usize..9, 0usize..10, any::<u64>()).prop_map(|(n, extra, seed)| {
        let mut r = rng(seed);
        (n, random_connected(&mut r, n, extra, 1, 9))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn anchor_invariance((n, edges) in arb_graph()) {
        let g = graph(n, &edges);
        let reference = build_reduced_laplacian(&g, n).unwrap();
        let tau = reference.log_det().unwrap();
        for anchor in 1..n {
            let l = build_reduced_laplacian(&g, anchor).unwrap();
            prop_assert!((l.log_det().unwrap() - tau).abs() <= 1e-9 * tau.abs().max(1.0));
            prop_assert_eq!(l.anchor(), anchor);
            for u in 1..=n {
                for v in u + 1..=n {
                    let a = effective_resistance(&l, u, v).unwrap().value;
                    let b = effective_resistance(&reference, u, v).unwrap().value;
                    prop_assert!((a - b).abs() <= 1e-9 * b.max(1.0));
                }
            }
        }
    }

    #[test]
    fn weight_scaling_shifts_tau((n, edges) in arb_graph(), alpha in 1.0f64..4.0) {
        let scaled: EdgeList = edges.iter().map(|&(u, v, w)| (u, v, w * alpha)).collect();
        let a = tree_connectivity(&graph(n, &edges)).unwrap().tau;
        let b = tree_connectivity(&graph(n, &scaled)).unwrap().tau;
        prop_assert!((b - a - (n as f64 - 1.0) * alpha.ln()).abs() <= 1e-9 * b.abs().max(1.0));
    }

    #[test]
    fn reduced_laplacian_is_symmetric_positive_definite((n, edges) in arb_graph()) {
        let l = default_reduced_laplacian(&graph(n, &edges)).unwrap();
        prop_assert_eq!(l.max_asymmetry(), 0.0);
        prop_assert!(l.cholesky().is_ok());
        prop_assert!(tree_connectivity(&graph(n, &edges)).unwrap().tau >= 0.0);
    }
}
