mod common;

use proptest::prelude::*;
use rand::Rng;
use treeconn::convex::{project_capped_simplex, relaxed_objective, relaxed_objective_and_gradient, StepRule};
use treeconn::instance::EspInstance;
use treeconn::{round_randomized, solve_p2, solve_p3, SolverOptions};

use common::*;

/// Relaxed objective from dense determinants with `π`-scaled candidates.
fn relaxed(inst: &EspInstance, pi: &[f64]) -> f64 {
    inst.objective()
        .channels()
        .iter()
        .map(|&(ch, coef)| {
            let mut edges = instance_edges(inst, ch, &[]);
            for (i, e) in inst.candidates().iter().enumerate() {
                let (u, v) = e.endpoints();
                edges.push((u, v, pi[i] * e.channel_weight(ch)));
            }
            coef * det(grounded_laplacian(inst.vertex_count(), &edges)).ln()
        })
        .sum()
}

fn interior(r: &mut impl Rng, c: usize) -> Vec<f64> {
    (0..c).map(|_| r.gen_range(0.1..0.9)).collect()
}

#[test]
fn gradient_matches_central_differences() {
    let mut r = rng(31);
    let h = 1e-5;
    for trial in 0..50 {
        let inst = random_esp(&mut r, 5 + trial % 4, 1, 7, 3, trial % 3 == 0);
        let pi = interior(&mut r, 7);
        let (f, g) = relaxed_objective_and_gradient(&inst, &pi).unwrap();
        assert!((f - relaxed(&inst, &pi)).abs() <= 1e-9 * f.abs().max(1.0));
        assert!((relaxed_objective(&inst, &pi).unwrap() - f).abs() <= 1e-12 * f.abs().max(1.0));
        for i in 0..7 {
            let mut up = pi.clone();
            let mut down = pi.clone();
            up[i] += h;
            down[i] -= h;
            let fd = (relaxed(&inst, &up) - relaxed(&inst, &down)) / (2.0 * h);
            assert!((g[i] - fd).abs() <= 1e-5 * g[i].abs().max(1.0), "probe {trial} coord {i}: {} vs {fd}", g[i]);
        }
    }
}

#[test]
fn relaxed_optimum_dominates_integer_optimum() {
    let mut r = rng(32);
    for trial in 0..40 {
        let c = 5 + trial % 5;
        let k = 1 + trial % (c - 1);
        let inst = random_esp(&mut r, 5 + trial % 3, trial % 2, c, k, trial % 4 == 1);
        let sol = solve_p2(&inst, &SolverOptions::default()).unwrap();
        let (opt, _) = optimum(&inst);
        assert!(sol.tau_cvx_star >= opt - 1e-7, "{} < {opt}", sol.tau_cvx_star);
        let pi = sol.pi_star.as_slice();
        assert!((pi.iter().sum::<f64>() - k as f64).abs() <= 1e-9);
        assert!(pi.iter().all(|&p| (0.0..=1.0).contains(&p)));
        assert!((sol.tau_cvx_star - relaxed(&inst, pi)).abs() <= 1e-9 * sol.tau_cvx_star.abs().max(1.0));
        assert!(sol.kkt_residual <= 1e-7);
    }
}

#[test]
fn different_starts_agree() {
    let mut r = rng(33);
    for trial in 0..25 {
        let inst = random_esp(&mut r, 8, 2, 12, 4, trial % 2 == 0);
        let a = solve_p2(&inst, &SolverOptions::default()).unwrap();
        let raw: Vec<f64> = (0..12).map(|_| r.gen_range(0.0..1.0)).collect();
        let start = project_capped_simplex(&raw, 4.0);
        let b = solve_p2(&inst, &SolverOptions { start: Some(start), ..Default::default() }).unwrap();
        let c = solve_p2(&inst, &SolverOptions { step_rule: StepRule::Unit, ..Default::default() }).unwrap();
        assert!((a.tau_cvx_star - b.tau_cvx_star).abs() <= 1e-6);
        assert!((a.tau_cvx_star - c.tau_cvx_star).abs() <= 1e-6);
    }
}

#[test]
fn objective_curve_is_monotone() {
    let mut r = rng(34);
    for trial in 0..25 {
        let inst = random_esp(&mut r, 9, 1, 15, 5, trial % 2 == 1);
        for sol in [
            solve_p2(&inst, &SolverOptions::default()).unwrap(),
            solve_p3(&inst, 0.3, &SolverOptions::default()).unwrap(),
        ] {
            assert!(!sol.objective_curve.is_empty());
            for w in sol.objective_curve.windows(2) {
                assert!(w[1] >= w[0], "curve decreased: {} -> {}", w[0], w[1]);
            }
        }
    }
}

#[test]
fn degenerate_budgets_are_closed_form() {
    let mut r = rng(35);
    for _ in 0..10 {
        let inst = random_esp(&mut r, 6, 1, 5, 0, false);
        let zero = solve_p2(&inst, &SolverOptions::default()).unwrap();
        assert_eq!(zero.iterations, 0);
        assert!(zero.pi_star.as_slice().iter().all(|&p| p == 0.0));
        assert!((zero.tau_cvx_star - objective(&inst, &[])).abs() <= 1e-9);
        let full = solve_p2(&inst.with_k(5).unwrap(), &SolverOptions::default()).unwrap();
        assert_eq!(full.iterations, 0);
        assert!((full.tau_cvx_star - objective(&inst, &[0, 1, 2, 3, 4])).abs() <= 1e-9);
    }
}

#[test]
fn penalty_shrinks_selection() {
    let mut r = rng(36);
    for _ in 0..10 {
        let inst = random_esp(&mut r, 7, 1, 10, 0, false);
        let mut last = f64::INFINITY;
        for lambda in [0.0, 0.05, 0.2, 0.5, 1.0, 2.0, 5.0] {
            let sol = solve_p3(&inst, lambda, &SolverOptions::default()).unwrap();
            let total = sol.pi_star.sum();
            assert!(total <= last + 1e-6, "λ = {lambda}: {total} > {last}");
            last = total;
        }
        assert!(solve_p3(&inst, -1.0, &SolverOptions::default()).is_err());
    }
}

#[test]
fn randomized_rounding_expectations_exact() {
    let mut r = rng(37);
    for trial in 0..12 {
        let c = 4 + trial % 9;
        let inst = random_esp(&mut r, 5 + trial % 3, 1, c, 0, trial % 3 == 2);
        let pi: Vec<f64> = (0..c).map(|_| r.gen_range(0.0..1.0)).collect();
        let out = round_randomized(&inst, &pi, 1, 1).unwrap();
        let channels = inst.objective().channels();
        let mut expected_count = 0.0;
        let mut expected_trees = vec![0.0; channels.len()];
        for mask in 0u32..(1 << c) {
            let chosen: Vec<usize> = (0..c).filter(|i| mask >> i & 1 == 1).collect();
            let p: f64 = (0..c).map(|i| if mask >> i & 1 == 1 { pi[i] } else { 1.0 - pi[i] }).product();
            expected_count += p * chosen.len() as f64;
            for (slot, &(ch, _)) in channels.iter().enumerate() {
                expected_trees[slot] +=
                    p * tree_count_det(inst.vertex_count(), &instance_edges(&inst, ch, &chosen));
            }
        }
        assert!((expected_count - out.expected_selected).abs() <= 1e-9);
        for (slot, &t) in expected_trees.iter().enumerate() {
            let at_pi = out.log_det_at_pi[slot].exp();
            assert!((t - at_pi).abs() <= 1e-9 * t, "channel {slot}: {t} vs {at_pi}");
        }
    }
}

#[test]
fn randomized_rounding_sample_means() {
    let mut r = rng(38);
    let inst = random_esp(&mut r, 6, 1, 8, 0, false);
    let pi: Vec<f64> = (0..8).map(|_| r.gen_range(0.0..1.0)).collect();
    let trials = 100_000;
    let out = round_randomized(&inst, &pi, 7, trials).unwrap();
    let n = trials as f64;

    let var_count: f64 = pi.iter().map(|p| p * (1.0 - p)).sum();
    let se_count = (var_count / n).sqrt();
    assert!((out.mean_selected - out.expected_selected).abs() <= 4.0 * se_count);

    let counts: Vec<f64> = out.trials.iter().map(|t| t.log_tree_counts[0].exp()).collect();
    let mean = counts.iter().sum::<f64>() / n;
    let var = counts.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let target = out.log_det_at_pi[0].exp();
    assert!((mean - target).abs() <= 4.0 * (var / n).sqrt(), "{mean} vs {target}");
    assert!((out.log_mean_tree_count[0] - mean.ln()).abs() <= 1e-9);

    let again = round_randomized(&inst, &pi, 7, 100).unwrap();
    assert_eq!(again.trials[..], out.trials[..100]);
}

/// Projection by bisection on the shift, run to exhaustion.
fn projection_oracle(v: &[f64], k: f64) -> Vec<f64> {
    let clip = |t: f64| v.iter().map(|x| (x - t).clamp(0.0, 1.0)).collect::<Vec<_>>();
    let sum = |t: f64| clip(t).iter().sum::<f64>();
    let (mut lo, mut hi) = (v.iter().copied().fold(f64::INFINITY, f64::min) - 1.0, v.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sum(mid) > k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    clip(0.5 * (lo + hi))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn projection_is_feasible_and_nearest(
        v in prop::collection::vec(-3.0f64..3.0, 1..30),
        frac in 0.0f64..1.0,
        seed in any::<u64>(),
    ) {
        let c = v.len();
        let k = (frac * c as f64).round();
        let p = project_capped_simplex(&v, k);
        prop_assert_eq!(p.len(), c);
        prop_assert!((p.iter().sum::<f64>() - k).abs() <= 1e-9 * k.max(1.0));
        prop_assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
        let q = projection_oracle(&v, k);
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
        // Variational inequality against random feasible points.
        let mut r = rng(seed);
        for _ in 0..5 {
            let raw: Vec<f64> = (0..c).map(|_| r.gen_range(-1.0..2.0)).collect();
            let y = projection_oracle(&raw, k);
            let ip: f64 = (0..c).map(|i| (v[i] - p[i]) * (y[i] - p[i])).sum();
            prop_assert!(ip <= 1e-8);
        }
        let again = project_capped_simplex(&p, k);
        for (a, b) in again.iter().zip(&p) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }
}
