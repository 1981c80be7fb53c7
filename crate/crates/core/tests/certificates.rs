mod common;

use treeconn::certificates::{certify_with, greedy_upper_bound};
use treeconn::instance::{random_instance, CandidateMode, RandomInstanceConfig, WeightRange};
use treeconn::{certify, gap_for_design, Error, SolverOptions};

use common::*;

const SLACK: f64 = 1e-6;

#[test]
fn certificates_bracket_the_optimum() {
    let mut r = rng(51);
    for trial in 0..50 {
        let c = 5 + trial % 6;
        let k = 1 + trial % 4;
        let inst = random_esp(&mut r, 5 + trial % 4, trial % 3, c, k, trial % 5 == 0);
        let b = certify(&inst).unwrap();
        let (opt, best) = optimum(&inst);
        let init = objective(&inst, &[]);
        assert!((b.tau_init - init).abs() <= 1e-9);
        assert!((b.u_greedy - greedy_upper_bound(b.tau_greedy, init)).abs() <= 1e-12);
        assert!(b.tau_greedy.max(b.tau_cvx) <= opt + SLACK);
        assert!(opt <= b.u_greedy + SLACK);
        assert!(opt <= b.tau_cvx_star + SLACK);
        assert!(b.lower <= opt + SLACK && opt <= b.upper + SLACK);
        assert!((b.tau_cvx - objective(&inst, &b.rounded_selected)).abs() <= 1e-9);

        let g = gap_for_design(&inst, &best, &b).unwrap();
        assert!((g.design_tau - opt).abs() <= 1e-9);
        assert!(g.gap_lower <= SLACK);
        assert!(g.gap_upper >= -SLACK);
    }
}

#[test]
fn bracket_is_ordered_on_larger_instances() {
    for (n, m, c, seed) in [(30, 40, 60, 1), (50, 70, 120, 2), (80, 100, 200, 3), (40, 45, 300, 4)] {
        let cfg = RandomInstanceConfig {
            candidates: CandidateMode::Sampled(c),
            weights: WeightRange::Integer { lo: 1, hi: 4 },
            two_channel: seed % 2 == 0,
            ..RandomInstanceConfig::new(n, m)
        };
        let base = random_instance(&cfg, seed).unwrap();
        let mut last_upper = f64::NEG_INFINITY;
        for k in [1, 5, 10, 20] {
            let b = certify(&base.with_k(k).unwrap()).unwrap();
            assert!(b.lower <= b.upper, "n={n} k={k}: {} > {}", b.lower, b.upper);
            assert!(b.upper >= last_upper - SLACK);
            last_upper = b.upper;
        }
    }
}

#[test]
fn gap_report_validates_designs() {
    let mut r = rng(52);
    let inst = random_esp(&mut r, 6, 1, 6, 2, false);
    let b = certify_with(&inst, &SolverOptions::default()).unwrap();
    assert!(matches!(gap_for_design(&inst, &[0], &b), Err(Error::Argument(_))));
    assert!(matches!(gap_for_design(&inst, &[1, 1], &b), Err(Error::Argument(_))));
    assert!(gap_for_design(&inst, &[0, 9], &b).is_err());
    let g = gap_for_design(&inst, &b.greedy_selected, &b).unwrap();
    assert!((g.design_tau - b.tau_greedy).abs() <= 1e-12);
    assert_eq!(g.ratio_bound.is_some(), g.design_tau > 0.0);
}
