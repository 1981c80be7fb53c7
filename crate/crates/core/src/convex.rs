//! Convex relaxation of k-ESP⁺ and rounding.
//!
//! Each candidate `i` gets a selector `π_i ∈ [0, 1]` scaling its weight in
//! `L_w(π) = L_init + Σ π_i w_i L_{e_i}`. The relaxed problem maximizes the
//! concave `log det L_w(π)` (or `2 log det L_{w_p}(π) + log det L_{w_θ}(π)`)
//! over the capped simplex `{π ∈ [0,1]^c : Σ π = k}`. Its gradient is
//! `∂/∂π_i = w_i a_iᵀ L_w(π)⁻¹ a_i`, the weighted effective resistance of
//! candidate `i` in the fractional graph.
//!
//! The solver is projected-gradient ascent with Armijo backtracking. Every
//! iterate is feasible, so the Frank–Wolfe gap `max_s ∇f(π)ᵀ(s − π)` bounds
//! the distance to the optimum from above and is reported alongside the
//! projected-gradient residual.

use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{reduce_index, ReducedLaplacian};
use crate::greedy::{evaluate_selection, SelectionResult};
use crate::instance::{Channel, EspInstance};
use crate::linalg::PairVector;
use crate::rng;
use crate::sparse::SymbolicFactor;

/// Fractional selectors, one per candidate, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SelectorVector(Vec<f64>);

impl SelectorVector {
    pub fn new(pi: Vec<f64>) -> Result<Self> {
        if let Some((i, p)) = pi.iter().enumerate().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Argument(format!("selector {i} = {p} outside [0, 1]")));
        }
        Ok(Self(pi))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// Output of the relaxed solvers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelaxedSolution {
    #[serde(rename = "pi")]
    pub pi_star: SelectorVector,
    /// Relaxed objective at `pi_star`.
    pub tau_cvx_star: f64,
    pub iterations: usize,
    /// Infinity norm of `π − P(π + ∇f(π))`.
    pub kkt_residual: f64,
    /// Frank–Wolfe gap: an upper bound on `optimum − tau_cvx_star`.
    pub duality_gap: f64,
    #[serde(skip)]
    pub objective_curve: Vec<f64>,
}

impl RelaxedSolution {
    /// Certified upper bound on the relaxed optimum.
    pub fn upper_bound(&self) -> f64 {
        self.tau_cvx_star + self.duality_gap.max(0.0)
    }
}

/// Initial trial step of each backtracking search.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum StepRule {
    /// Barzilai–Borwein step from the previous iterate pair, starting at 1.
    #[default]
    BarzilaiBorwein,
    /// Always start from 1.
    Unit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub max_iters: usize,
    /// Starting point; projected onto the feasible set. Defaults to the
    /// uniform vector.
    pub start: Option<Vec<f64>>,
    pub step_rule: StepRule,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tolerance: 1e-7, max_iters: 5000, start: None, step_rule: StepRule::default() }
    }
}

const ARMIJO_SLOPE: f64 = 1e-4;
const BACKTRACK_SHRINK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 80;
const MIN_STEP: f64 = 1e-12;
const MAX_STEP: f64 = 1e12;
/// `sqrt(f64::EPSILON)`.
const STALL_RELATIVE_GAP: f64 = 1.4901161193847656e-8;

fn check_pi(inst: &EspInstance, pi: &[f64]) -> Result<()> {
    if pi.len() != inst.candidate_count() {
        return Err(Error::Argument(format!(
            "selector vector has {} entries for {} candidates",
            pi.len(),
            inst.candidate_count()
        )));
    }
    SelectorVector::new(pi.to_vec()).map(|_| ())
}

/// `L_w(π)` for one weight channel, anchored at vertex `n`.
pub fn laplacian_of_pi(inst: &EspInstance, channel: Channel, pi: &[f64]) -> Result<ReducedLaplacian> {
    check_pi(inst, pi)?;
    Ok(inst.laplacian_with_scales(channel, pi.iter().copied().enumerate()))
}

fn factor_error(e: Error) -> Error {
    Error::Numerical(format!("L_w(π) lost positive definiteness: {e}"))
}

/// The relaxed objective of one instance, with the sparse factor pattern of
/// base plus all candidates analyzed once.
struct RelaxedModel {
    symbolic: SymbolicFactor,
    candidate_pairs: Vec<PairVector>,
    base_len: usize,
    /// `(coefficient, base weights, candidate weights)` per channel.
    channels: Vec<(f64, Vec<f64>, Vec<f64>)>,
}

impl RelaxedModel {
    fn new(inst: &EspInstance) -> Self {
        let n = inst.vertex_count();
        let anchor = n - 1;
        let pair = |e: &crate::instance::EdgeRecord| {
            let (u, v) = e.ends();
            PairVector::new(reduce_index(u, anchor), reduce_index(v, anchor))
        };
        let candidate_pairs: Vec<PairVector> = inst.candidates().iter().map(pair).collect();
        let slots: Vec<PairVector> =
            inst.base_edges().iter().map(pair).chain(candidate_pairs.iter().copied()).collect();
        let channels = inst
            .objective()
            .channels()
            .iter()
            .map(|&(channel, coef)| {
                let w = |e: &crate::instance::EdgeRecord| e.channel_weight(channel);
                (coef, inst.base_edges().iter().map(w).collect(), inst.candidates().iter().map(w).collect())
            })
            .collect();
        Self {
            symbolic: SymbolicFactor::analyze(n - 1, &slots),
            candidate_pairs,
            base_len: inst.base_edges().len(),
            channels,
        }
    }

    fn weights(&self, base: &[f64], cand: &[f64], pi: &[f64]) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.base_len + cand.len());
        w.extend_from_slice(base);
        w.extend(cand.iter().zip(pi).map(|(c, p)| c * p));
        w
    }

    fn value(&self, pi: &[f64]) -> Result<f64> {
        let mut total = 0.0;
        for (coef, base, cand) in &self.channels {
            let f = self.symbolic.factor(&self.weights(base, cand, pi)).map_err(factor_error)?;
            total += coef * f.log_det();
        }
        Ok(total)
    }

    fn value_and_gradient(&self, pi: &[f64]) -> Result<(f64, Vec<f64>)> {
        let mut total = 0.0;
        let mut grad = vec![0.0; pi.len()];
        for (coef, base, cand) in &self.channels {
            let f = self.symbolic.factor(&self.weights(base, cand, pi)).map_err(factor_error)?;
            total += coef * f.log_det();
            for ((g, q), w) in grad.iter_mut().zip(f.quadratic_forms(&self.candidate_pairs)).zip(cand) {
                *g += coef * w * q;
            }
        }
        Ok((total, grad))
    }
}

/// Relaxed objective without the gradient.
pub fn relaxed_objective(inst: &EspInstance, pi: &[f64]) -> Result<f64> {
    check_pi(inst, pi)?;
    RelaxedModel::new(inst).value(pi)
}

/// Relaxed objective and its gradient `coef · w_i a_iᵀ L_w(π)⁻¹ a_i`.
pub fn relaxed_objective_and_gradient(inst: &EspInstance, pi: &[f64]) -> Result<(f64, Vec<f64>)> {
    check_pi(inst, pi)?;
    RelaxedModel::new(inst).value_and_gradient(pi)
}

/// Euclidean projection onto `{π ∈ [0,1]^c : Σ π = k}` by bisection on the
/// shift `θ` in `π_i = clamp(v_i − θ, 0, 1)`.
pub fn project_capped_simplex(v: &[f64], k: f64) -> Vec<f64> {
    let c = v.len() as f64;
    let k = k.clamp(0.0, c);
    if k == 0.0 {
        return vec![0.0; v.len()];
    }
    if k == c {
        return vec![1.0; v.len()];
    }
    let sum = v.iter().sum::<f64>();
    if v.iter().all(|x| (0.0..=1.0).contains(x)) && (sum - k).abs() <= c * f64::EPSILON * k.max(1.0) {
        return v.to_vec();
    }
    // mass(θ) is non-increasing; bisect to full precision, then solve for θ
    // exactly on the components strictly inside the box.
    let mass = |theta: f64| v.iter().map(|x| (x - theta).clamp(0.0, 1.0)).sum::<f64>();
    let mut lo = v.iter().copied().fold(f64::INFINITY, f64::min) - 1.0;
    let mut hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mass(mid) > k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut theta = 0.5 * (lo + hi);
    let (mut free_sum, mut free, mut capped) = (0.0, 0usize, 0usize);
    for &x in v {
        let y = x - theta;
        if y >= 1.0 {
            capped += 1;
        } else if y > 0.0 {
            free += 1;
            free_sum += x;
        }
    }
    if free > 0 {
        let exact = (free_sum + capped as f64 - k) / free as f64;
        if (exact - theta).abs() <= 1e-9 * (1.0 + theta.abs()) {
            theta = exact;
        }
    }
    v.iter().map(|x| (x - theta).clamp(0.0, 1.0)).collect()
}

fn project_box(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x.clamp(0.0, 1.0)).collect()
}

fn inf_norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Feasible set of a relaxed problem and the linear part of its objective.
trait Feasible {
    fn project(&self, v: &[f64]) -> Vec<f64>;
    /// Penalty `λ` subtracted per unit of `Σ π`.
    fn penalty(&self) -> f64;
    /// `max_s gᵀ(s − π)` over the feasible set, `g` already penalized.
    fn frank_wolfe_gap(&self, g: &[f64], pi: &[f64]) -> f64;
}

struct CappedSimplex {
    k: usize,
}

impl Feasible for CappedSimplex {
    fn project(&self, v: &[f64]) -> Vec<f64> {
        project_capped_simplex(v, self.k as f64)
    }
    fn penalty(&self) -> f64 {
        0.0
    }
    fn frank_wolfe_gap(&self, g: &[f64], pi: &[f64]) -> f64 {
        let mut sorted = g.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let top: f64 = sorted[..self.k].iter().sum();
        top - g.iter().zip(pi).map(|(a, b)| a * b).sum::<f64>()
    }
}

struct PenalizedBox {
    lambda: f64,
}

impl Feasible for PenalizedBox {
    fn project(&self, v: &[f64]) -> Vec<f64> {
        project_box(v)
    }
    fn penalty(&self) -> f64 {
        self.lambda
    }
    fn frank_wolfe_gap(&self, g: &[f64], pi: &[f64]) -> f64 {
        g.iter().zip(pi).map(|(gi, p)| gi.max(0.0) - gi * p).sum()
    }
}

fn penalized(model: &RelaxedModel, pi: &[f64], lambda: f64) -> Result<(f64, Vec<f64>)> {
    let (f, mut g) = model.value_and_gradient(pi)?;
    if lambda == 0.0 {
        return Ok((f, g));
    }
    g.iter_mut().for_each(|x| *x -= lambda);
    Ok((f - lambda * pi.iter().sum::<f64>(), g))
}

fn penalized_value(model: &RelaxedModel, pi: &[f64], lambda: f64) -> Result<f64> {
    Ok(model.value(pi)? - lambda * pi.iter().sum::<f64>())
}

fn ascend(
    inst: &EspInstance,
    set: &dyn Feasible,
    start: Vec<f64>,
    opts: &SolverOptions,
) -> Result<RelaxedSolution> {
    let lambda = set.penalty();
    let model = RelaxedModel::new(inst);
    let mut pi = set.project(&start);
    let (mut f, mut g) = penalized(&model, &pi, lambda)?;
    let mut curve = vec![f];
    let mut step = 1.0;
    let mut iterations = 0;
    loop {
        let residual = inf_norm_diff(&pi, &set.project(&axpy(&pi, 1.0, &g)));
        if residual <= opts.tolerance {
            return Ok(solution(inst, set, pi, f, &g, iterations, residual, curve));
        }
        if iterations >= opts.max_iters {
            return Err(Error::NonConvergence { iterations, residual, best_pi: pi, best_value: f });
        }
        iterations += 1;

        // Backtracking along the projection arc. Once the expected increase
        // drops to the rounding level of `f`, sufficient increase is checked
        // on the gradient instead: by concavity
        // `f(trial) − f(π) ≥ ∇f(trial)ᵀ(trial − π)`. The computed value must
        // still not drop, so the objective curve stays monotone as stored.
        let noise = 64.0 * f64::EPSILON * f.abs().max(1.0);
        let mut t = match opts.step_rule {
            StepRule::Unit => 1.0,
            StepRule::BarzilaiBorwein => step,
        };
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial = set.project(&axpy(&pi, t, &g));
            let ascent = directional(&g, &trial, &pi);
            if ascent > 0.0 {
                if ARMIJO_SLOPE * ascent > noise {
                    let ft = penalized_value(&model, &trial, lambda)?;
                    if ft >= f + ARMIJO_SLOPE * ascent {
                        accepted = Some((trial, None));
                        break;
                    }
                } else {
                    let (ft, gt) = penalized(&model, &trial, lambda)?;
                    if ft >= f && directional(&gt, &trial, &pi) >= ARMIJO_SLOPE * ascent {
                        accepted = Some((trial, Some((ft, gt))));
                        break;
                    }
                }
            }
            t *= BACKTRACK_SHRINK;
        }
        let Some((next, evaluated)) = accepted else {
            // No ascent step is detectable at working precision. Accept the
            // iterate if its optimality gap is at the rounding level of `f`,
            // or if even the unit step promises less than the value test can
            // resolve (the rounding of `Σ π = k` alone moves `f` by about
            // that much near the optimum).
            let gap = set.frank_wolfe_gap(&g, &pi);
            let unit_ascent = directional(&g, &set.project(&axpy(&pi, 1.0, &g)), &pi);
            if gap <= STALL_RELATIVE_GAP * f.abs().max(1.0) || ARMIJO_SLOPE * unit_ascent <= noise {
                return Ok(solution(inst, set, pi, f, &g, iterations, residual, curve));
            }
            return Err(Error::NonConvergence { iterations, residual, best_pi: pi, best_value: f });
        };
        let (f_next, g_next) = match evaluated {
            Some(fg) => fg,
            None => penalized(&model, &next, lambda)?,
        };
        let s: Vec<f64> = next.iter().zip(&pi).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(g_next.iter().zip(&g)).map(|(si, (a, b))| si * (a - b)).sum();
        let ss: f64 = s.iter().map(|x| x * x).sum();
        step = if sy < 0.0 { (ss / -sy).clamp(MIN_STEP, MAX_STEP) } else { 1.0 };
        pi = next;
        f = f_next;
        g = g_next;
        curve.push(f);
    }
}

/// `gᵀ(to − from)`.
fn directional(g: &[f64], to: &[f64], from: &[f64]) -> f64 {
    g.iter().zip(to.iter().zip(from)).map(|(gi, (a, b))| gi * (a - b)).sum()
}

fn axpy(x: &[f64], t: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + t * b).collect()
}

#[allow(clippy::too_many_arguments)]
fn solution(
    inst: &EspInstance,
    set: &dyn Feasible,
    pi: Vec<f64>,
    f: f64,
    g: &[f64],
    iterations: usize,
    residual: f64,
    curve: Vec<f64>,
) -> RelaxedSolution {
    let _ = inst;
    let duality_gap = set.frank_wolfe_gap(g, &pi).max(0.0);
    RelaxedSolution {
        pi_star: SelectorVector(pi),
        tau_cvx_star: f,
        iterations,
        kkt_residual: residual,
        duality_gap,
        objective_curve: curve,
    }
}

/// Maximizes the relaxed objective subject to `Σ π = k`, `0 ≤ π ≤ 1`.
pub fn solve_p2(inst: &EspInstance, opts: &SolverOptions) -> Result<RelaxedSolution> {
    inst.require_add()?;
    let (c, k) = (inst.candidate_count(), inst.k());
    if k == 0 || k == c {
        // Unique feasible point.
        let pi = vec![if k == 0 { 0.0 } else { 1.0 }; c];
        let (f, g) = relaxed_objective_and_gradient(inst, &pi)?;
        let set = CappedSimplex { k };
        return Ok(solution(inst, &set, pi, f, &g, 0, 0.0, vec![f]));
    }
    let start = match &opts.start {
        Some(s) => {
            check_len(inst, s)?;
            s.clone()
        }
        None => vec![k as f64 / c as f64; c],
    };
    ascend(inst, &CappedSimplex { k }, start, opts)
}

/// Maximizes `objective(π) − λ Σ π` over the box `[0, 1]^c`.
pub fn solve_p3(inst: &EspInstance, lambda: f64, opts: &SolverOptions) -> Result<RelaxedSolution> {
    inst.require_add()?;
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::Argument(format!("penalty λ = {lambda} must be finite and non-negative")));
    }
    let c = inst.candidate_count();
    let start = match &opts.start {
        Some(s) => {
            check_len(inst, s)?;
            s.clone()
        }
        None => vec![0.5; c],
    };
    ascend(inst, &PenalizedBox { lambda }, start, opts)
}

fn check_len(inst: &EspInstance, v: &[f64]) -> Result<()> {
    if v.len() != inst.candidate_count() {
        return Err(Error::Argument(format!(
            "start vector has {} entries for {} candidates",
            v.len(),
            inst.candidate_count()
        )));
    }
    Ok(())
}

/// Indices of the `k` largest selectors, largest first, lowest index on ties.
pub fn top_k(pi: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pi.len()).collect();
    idx.sort_by(|&a, &b| pi[b].total_cmp(&pi[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

/// Deterministic rounding: keep the `k` candidates with the largest `π_i`.
/// The result's `tau_achieved` is the rounded design's objective `τ_cvx`.
pub fn round_deterministic(inst: &EspInstance, pi: &[f64]) -> Result<SelectionResult> {
    check_len(inst, pi)?;
    let start = Instant::now();
    let mut r = evaluate_selection(inst, &top_k(pi, inst.k()))?;
    r.elapsed = start.elapsed();
    Ok(r)
}

/// One independent-coin sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomizedTrial {
    pub selected: Vec<usize>,
    /// `log det L_w` of the sampled design, per weight channel.
    pub log_tree_counts: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomizedRounding {
    pub trials: Vec<RandomizedTrial>,
    /// Sample mean of the number of selected candidates.
    pub mean_selected: f64,
    /// `Σ π_i`.
    pub expected_selected: f64,
    /// Log of the sample mean of `t_w`, per channel.
    pub log_mean_tree_count: Vec<f64>,
    /// `log det L_w(π)`, per channel.
    pub log_det_at_pi: Vec<f64>,
}

/// Flips an independent coin with bias `π_i` per candidate, `trials` times.
pub fn round_randomized(inst: &EspInstance, pi: &[f64], seed: u64, trials: usize) -> Result<RandomizedRounding> {
    check_pi(inst, pi)?;
    if trials == 0 {
        return Err(Error::Argument("randomized rounding needs at least one trial".into()));
    }
    let channels = inst.objective().channels();
    let mut rng = rng::stream(seed, "rounding/randomized");
    let mut samples = Vec::with_capacity(trials);
    for _ in 0..trials {
        // One draw per candidate keeps the stream aligned across π.
        let selected: Vec<usize> = pi
            .iter()
            .enumerate()
            .filter_map(|(i, &p)| (rng.gen::<f64>() < p).then_some(i))
            .collect();
        let log_tree_counts = channels
            .iter()
            .map(|&(channel, _)| {
                inst.laplacian_with_scales(channel, selected.iter().map(|&i| (i, 1.0)))
                    .log_det()
                    .map_err(factor_error)
            })
            .collect::<Result<Vec<_>>>()?;
        samples.push(RandomizedTrial { selected, log_tree_counts });
    }
    let n = trials as f64;
    let mean_selected = samples.iter().map(|t| t.selected.len() as f64).sum::<f64>() / n;
    let log_mean_tree_count = (0..channels.len())
        .map(|ch| log_sum_exp(samples.iter().map(|t| t.log_tree_counts[ch])) - n.ln())
        .collect();
    let log_det_at_pi = channels
        .iter()
        .map(|&(channel, _)| laplacian_of_pi(inst, channel, pi)?.log_det().map_err(factor_error))
        .collect::<Result<Vec<_>>>()?;
    Ok(RandomizedRounding {
        trials: samples,
        mean_selected,
        expected_selected: pi.iter().sum(),
        log_mean_tree_count,
        log_det_at_pi,
    })
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + xs.map(|x| (x - max).exp()).sum::<f64>().ln()
}
