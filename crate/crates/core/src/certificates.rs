//! Bounds on the unknown optimum of a k-ESP⁺ instance.
//!
//! Greedy and the rounded relaxation give feasible designs, hence lower
//! bounds. The greedy guarantee inverted gives one upper bound, the relaxed
//! optimum another.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::convex::{round_deterministic, solve_p2, SolverOptions};
use crate::error::{Error, Result};
use crate::greedy::greedy_select;
use crate::instance::EspInstance;

/// `1 − 1/e`.
pub fn greedy_ratio() -> f64 {
    1.0 - (-1.0f64).exp()
}

/// `1 / (1 − 1/e)`.
pub fn inverse_greedy_ratio() -> f64 {
    1.0 / greedy_ratio()
}

/// Upper bound on the optimum implied by the greedy guarantee. With a tree
/// base and unit weights `tau_init = 0` and this is just `ζ · tau_greedy`.
pub fn greedy_upper_bound(tau_greedy: f64, tau_init: f64) -> f64 {
    let zeta = inverse_greedy_ratio();
    zeta * tau_greedy + (1.0 - zeta) * tau_init
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateBundle {
    pub tau_init: f64,
    pub tau_greedy: f64,
    /// Objective of the deterministically rounded relaxation.
    pub tau_cvx: f64,
    /// Relaxed objective at the solver's final iterate.
    pub tau_cvx_star: f64,
    /// Solver's bound on `relaxed optimum − tau_cvx_star`.
    pub duality_gap: f64,
    pub u_greedy: f64,
    pub lower: f64,
    pub upper: f64,
    pub greedy_selected: Vec<usize>,
    pub rounded_selected: Vec<usize>,
}

impl CertificateBundle {
    /// Assembles the sandwich. The relaxed bound is padded by the solver's
    /// duality gap so an inexact solve cannot cut below the optimum.
    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        tau_init: f64,
        tau_greedy: f64,
        tau_cvx: f64,
        tau_cvx_star: f64,
        duality_gap: f64,
        greedy_selected: Vec<usize>,
        rounded_selected: Vec<usize>,
    ) -> Self {
        let u_greedy = greedy_upper_bound(tau_greedy, tau_init);
        let duality_gap = duality_gap.max(0.0);
        Self {
            tau_init,
            tau_greedy,
            tau_cvx,
            tau_cvx_star,
            duality_gap,
            u_greedy,
            lower: tau_greedy.max(tau_cvx),
            upper: u_greedy.min(tau_cvx_star + duality_gap),
            greedy_selected,
            rounded_selected,
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Runs greedy and the relaxation (concurrently) and brackets the optimum.
pub fn certify(inst: &EspInstance) -> Result<CertificateBundle> {
    certify_with(inst, &SolverOptions::default())
}

pub fn certify_with(inst: &EspInstance, opts: &SolverOptions) -> Result<CertificateBundle> {
    inst.require_add()?;
    let (greedy, relaxed) = rayon::join(
        || greedy_select(inst),
        || {
            let sol = solve_p2(inst, opts)?;
            let rounded = round_deterministic(inst, sol.pi_star.as_slice())?;
            Ok::<_, Error>((sol, rounded))
        },
    );
    let greedy = greedy?;
    let (sol, rounded) = relaxed?;
    Ok(CertificateBundle::assemble(
        greedy.tau_init,
        greedy.tau_achieved,
        rounded.tau_achieved,
        sol.tau_cvx_star,
        sol.duality_gap,
        greedy.sorted_selection(),
        rounded.sorted_selection(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub design_tau: f64,
    pub gap_lower: f64,
    pub gap_upper: f64,
    /// `upper / design_tau`; absent when `design_tau ≤ 0`.
    pub ratio_bound: Option<f64>,
}

/// Brackets `OPT − τ(S)` for a design `S` of exactly `k` distinct candidates.
pub fn gap_for_design(inst: &EspInstance, design: &[usize], bundle: &CertificateBundle) -> Result<GapReport> {
    if design.len() != inst.k() {
        return Err(Error::Argument(format!("design has {} edges, budget is {}", design.len(), inst.k())));
    }
    let distinct: BTreeSet<usize> = design.iter().copied().collect();
    if distinct.len() != design.len() {
        return Err(Error::Argument("design repeats a candidate index".into()));
    }
    let design_tau = inst.objective_value(design)?;
    Ok(GapReport {
        design_tau,
        gap_lower: (bundle.lower - design_tau).max(0.0),
        gap_upper: bundle.upper - design_tau,
        ratio_bound: (design_tau > 0.0).then(|| bundle.upper / design_tau),
    })
}
