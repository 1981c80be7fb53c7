use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::time::Instant;

use serde::Serialize;
use treeconn::certificates::{gap_for_design, CertificateBundle, GapReport};
use treeconn::convex::{round_deterministic, round_randomized, solve_p2, solve_p3, RelaxedSolution, SolverOptions};
use treeconn::greedy::{evaluate_selection, exhaustive_select, greedy_dual, greedy_select, SelectionResult, TraceStep};
use treeconn::instance::{
    reduce_removal_to_addition, CandidateMode, Channel, Direction, EspInstance, Objective, RandomInstanceConfig,
    RemovalReduction, WeightRange,
};
use treeconn::slam::{dopt_proxy, LoadReport};
use treeconn::{random_instance, tree_connectivity, Error, Result};

use crate::args::{
    Algorithm, BenchArgs, CertifyArgs, EvaluateArgs, Format, GenArgs, GeneratorArgs, OutputArgs, SolverArgs, Sweep,
    SynthesizeArgs,
};
use crate::load::{load_dataset, load_design, load_instance};

fn emit(out: &OutputArgs, text: String) -> Result<()> {
    emit_to(out.output.as_deref(), text)
}

fn emit_to(path: Option<&std::path::Path>, mut text: String) -> Result<()> {
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes")
}

fn solver_options(args: &SolverArgs) -> Result<SolverOptions> {
    if args.tolerance.is_nan() || args.tolerance <= 0.0 {
        return Err(Error::Argument(format!("tolerance must be positive, got {}", args.tolerance)));
    }
    Ok(SolverOptions { tolerance: args.tolerance, max_iters: args.max_iters, ..SolverOptions::default() })
}

/// Runs `f` `repeat` times; returns the last result and the median wall time
/// in seconds.
fn timed<T>(repeat: u32, mut f: impl FnMut() -> Result<T>) -> Result<(T, f64)> {
    let mut times = Vec::with_capacity(repeat as usize);
    let mut last = None;
    for _ in 0..repeat {
        let start = Instant::now();
        last = Some(f()?);
        times.push(start.elapsed().as_secs_f64());
    }
    times.sort_by(f64::total_cmp);
    Ok((last.expect("repeat >= 1"), times[times.len() / 2]))
}

fn join_indices(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

// ---------------------------------------------------------------------------
// gen

fn generator_config(g: &GeneratorArgs, k: usize) -> RandomInstanceConfig {
    let weights = if g.integer_weights {
        WeightRange::Integer { lo: g.weight_lo as u32, hi: g.weight_hi as u32 }
    } else {
        WeightRange::Uniform { lo: g.weight_lo, hi: g.weight_hi }
    };
    RandomInstanceConfig {
        n: g.n,
        m_init: g.m_init,
        candidates: g.sample_candidates.map_or(CandidateMode::Complement, CandidateMode::Sampled),
        weights,
        k,
        two_channel: g.two_channel,
    }
}

fn check_integer_bounds(g: &GeneratorArgs) -> Result<()> {
    if g.integer_weights && (g.weight_lo.fract() != 0.0 || g.weight_hi.fract() != 0.0) {
        return Err(Error::Argument("--integer-weights needs integral --weight-lo/--weight-hi".into()));
    }
    Ok(())
}

pub fn gen(args: &GenArgs) -> Result<()> {
    check_integer_bounds(&args.generator)?;
    let inst = random_instance(&generator_config(&args.generator, args.k), args.generator.seed)?;
    eprintln!(
        "generated n = {}, {} base edges, {} candidates, k = {}",
        inst.vertex_count(),
        inst.base_edges().len(),
        inst.candidate_count(),
        inst.k()
    );
    emit_to(args.output.as_deref(), inst.to_json())
}

// ---------------------------------------------------------------------------
// synthesize

#[derive(Debug, Serialize)]
struct InstanceSummary {
    n: usize,
    base_edges: usize,
    candidates: usize,
    k: usize,
    direction: Direction,
    objective: Objective,
    alpha: f64,
}

impl InstanceSummary {
    fn of(inst: &EspInstance, alpha: f64) -> Self {
        Self {
            n: inst.vertex_count(),
            base_edges: inst.base_edges().len(),
            candidates: inst.candidate_count(),
            k: inst.k(),
            direction: inst.direction(),
            objective: inst.objective(),
            alpha,
        }
    }
}

#[derive(Debug, Serialize)]
struct DesignReport {
    /// Candidate indices of the original instance: added edges for an
    /// addition instance, removed edges for a removal instance.
    selected: Vec<usize>,
    tau_init: f64,
    tau: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    trace: Vec<TraceStep>,
    #[serde(skip_serializing_if = "Option::is_none")]
    time_s: Option<f64>,
}

#[derive(Debug, Serialize)]
struct RandomizedSummary {
    trials: usize,
    mean_selected: f64,
    expected_selected: f64,
    best_selected: Vec<usize>,
    best_tau: f64,
}

#[derive(Debug, Serialize)]
struct ConvexReport {
    relaxed: RelaxedSolution,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    rounded: DesignReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    randomized: Option<RandomizedSummary>,
}

#[derive(Debug, Serialize)]
struct SynthesisReport {
    instance: InstanceSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    greedy: Option<DesignReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    convex: Option<ConvexReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exhaustive: Option<DesignReport>,
}

/// Instance the solvers run on, and the way back for removal instances.
struct Working {
    original: EspInstance,
    solve_on: EspInstance,
    reduction: Option<RemovalReduction>,
}

impl Working {
    fn new(original: EspInstance) -> Result<Self> {
        let (solve_on, reduction) = match original.direction() {
            Direction::Add => (original.clone(), None),
            Direction::Remove => {
                let r = reduce_removal_to_addition(&original)?;
                (r.instance.clone(), Some(r))
            }
        };
        Ok(Self { original, solve_on, reduction })
    }

    fn to_original(&self, added: &[usize]) -> Vec<usize> {
        let mut v = match &self.reduction {
            Some(r) => r.removed_for(added),
            None => added.to_vec(),
        };
        v.sort_unstable();
        v
    }

    /// Validates a design given in original indices and converts it.
    fn original_to_added(&self, design: &[usize]) -> Result<Vec<usize>> {
        let Some(r) = &self.reduction else { return Ok(design.to_vec()) };
        let k = self.original.k();
        if design.len() != k {
            return Err(Error::Argument(format!("design has {} edges, budget is {k}", design.len())));
        }
        let distinct: BTreeSet<usize> = design.iter().copied().collect();
        if distinct.len() != design.len() {
            return Err(Error::Argument("design repeats a candidate index".into()));
        }
        if let Some(&i) = distinct.iter().find(|&&i| i >= self.original.candidate_count()) {
            return Err(Error::Argument(format!("candidate index {i} out of range")));
        }
        Ok(r.added_for(design))
    }

    fn tau_init(&self) -> Result<f64> {
        self.original.tau_init()
    }

    fn design(&self, r: &SelectionResult, time_s: Option<f64>) -> Result<DesignReport> {
        let trace = if self.reduction.is_some() { Vec::new() } else { r.trace.clone() };
        Ok(DesignReport {
            selected: self.to_original(&r.selected),
            tau_init: self.tau_init()?,
            tau: r.tau_achieved,
            trace,
            time_s,
        })
    }
}

fn log_design(name: &str, d: &DesignReport, time: f64) {
    eprintln!("{name}: tau = {:.6} with {} edges ({time:.3} s)", d.tau, d.selected.len());
}

pub fn synthesize(args: &SynthesizeArgs) -> Result<()> {
    let loaded = load_instance(&args.input, args.k)?;
    let work = Working::new(loaded.instance)?;
    let opts = solver_options(&args.solver)?;
    let out = &args.output;
    let keep_time = |t: f64| out.timings.then_some(t);
    let runs = |a: Algorithm| args.algorithm == a || args.algorithm == Algorithm::All;

    if args.tau_min.is_some() && (args.algorithm != Algorithm::Greedy || work.reduction.is_some()) {
        return Err(Error::Argument("--tau-min applies to greedy on addition instances only".into()));
    }
    if args.random_trials > 0 && work.reduction.is_some() {
        return Err(Error::Argument("--random-trials applies to addition instances only".into()));
    }

    let mut report = SynthesisReport {
        instance: InstanceSummary::of(&work.original, loaded.alpha),
        greedy: None,
        convex: None,
        exhaustive: None,
    };

    if runs(Algorithm::Greedy) {
        let (r, t) = match args.tau_min {
            Some(tau_min) => timed(out.repeat, || greedy_dual(&work.solve_on, tau_min))?,
            None => timed(out.repeat, || greedy_select(&work.solve_on))?,
        };
        let d = work.design(&r, keep_time(t))?;
        log_design("greedy", &d, t);
        report.greedy = Some(d);
    }

    if runs(Algorithm::Convex) {
        let ((relaxed, rounded), t) = timed(out.repeat, || match args.lambda {
            None => {
                let s = solve_p2(&work.solve_on, &opts)?;
                let r = round_deterministic(&work.solve_on, s.pi_star.as_slice())?;
                Ok((s, r))
            }
            Some(lambda) => {
                let s = solve_p3(&work.solve_on, lambda, &opts)?;
                let keep: Vec<usize> = (0..s.pi_star.as_slice().len()).filter(|&i| s.pi_star.as_slice()[i] >= 0.5).collect();
                let r = evaluate_selection(&work.solve_on.with_k(keep.len())?, &keep)?;
                Ok((s, r))
            }
        })?;
        eprintln!(
            "convex: relaxed objective = {:.6} after {} iterations (gap {:.2e})",
            relaxed.tau_cvx_star, relaxed.iterations, relaxed.duality_gap
        );
        let d = work.design(&rounded, keep_time(t))?;
        log_design("convex (rounded)", &d, t);
        let randomized = if args.random_trials > 0 {
            let rr = round_randomized(&work.solve_on, relaxed.pi_star.as_slice(), args.seed, args.random_trials)?;
            let coefs: Vec<f64> = work.solve_on.objective().channels().iter().map(|&(_, c)| c).collect();
            let value = |t: &treeconn::convex::RandomizedTrial| -> f64 {
                t.log_tree_counts.iter().zip(&coefs).map(|(l, c)| l * c).sum()
            };
            let mut best = &rr.trials[0];
            for t in &rr.trials[1..] {
                if value(t) > value(best) {
                    best = t;
                }
            }
            Some(RandomizedSummary {
                trials: rr.trials.len(),
                mean_selected: rr.mean_selected,
                expected_selected: rr.expected_selected,
                best_selected: best.selected.clone(),
                best_tau: value(best),
            })
        } else {
            None
        };
        report.convex = Some(ConvexReport { relaxed, lambda: args.lambda, rounded: d, randomized });
    }

    if runs(Algorithm::Exhaustive) {
        match timed(out.repeat, || exhaustive_select(&work.solve_on)) {
            Ok((r, t)) => {
                let d = work.design(&r, keep_time(t))?;
                log_design("exhaustive", &d, t);
                report.exhaustive = Some(d);
            }
            // `all` keeps the other results when enumeration is out of reach.
            Err(Error::Size(msg)) if args.algorithm == Algorithm::All => {
                eprintln!("exhaustive: skipped, {msg}");
            }
            Err(e) => return Err(e),
        }
    }

    let text = match out.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut s = String::from("algorithm,k,tau_init,tau,selected");
            s.push_str(if out.timings { ",time_s\n" } else { "\n" });
            let rows = [
                ("greedy", report.greedy.as_ref()),
                ("convex", report.convex.as_ref().map(|c| &c.rounded)),
                ("exhaustive", report.exhaustive.as_ref()),
            ];
            for (name, d) in rows {
                let Some(d) = d else { continue };
                write!(s, "{name},{},{},{},{}", d.selected.len(), d.tau_init, d.tau, join_indices(&d.selected)).unwrap();
                if out.timings {
                    write!(s, ",{}", opt_cell(d.time_s)).unwrap();
                }
                s.push('\n');
            }
            s
        }
    };
    emit(out, text)
}

// ---------------------------------------------------------------------------
// certify

#[derive(Debug, Serialize)]
struct CertifyReport {
    instance: InstanceSummary,
    bundle: CertificateBundle,
    #[serde(skip_serializing_if = "Option::is_none")]
    gap: Option<GapReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    time_s: Option<f64>,
}

fn bundle_for(inst: &EspInstance, opts: &SolverOptions) -> Result<CertificateBundle> {
    treeconn::certificates::certify_with(inst, opts)
}

pub fn certify(args: &CertifyArgs) -> Result<()> {
    let loaded = load_instance(&args.input, args.k)?;
    let work = Working::new(loaded.instance)?;
    let opts = solver_options(&args.solver)?;
    let design = match &args.design {
        Some(p) => Some(work.original_to_added(&load_design(p)?)?),
        None => None,
    };
    let (mut bundle, t) = timed(args.output.repeat, || bundle_for(&work.solve_on, &opts))?;
    let gap = match &design {
        Some(d) => Some(gap_for_design(&work.solve_on, d, &bundle)?),
        None => None,
    };
    bundle.greedy_selected = work.to_original(&bundle.greedy_selected);
    bundle.rounded_selected = work.to_original(&bundle.rounded_selected);
    eprintln!("certificate: {:.6} <= OPT <= {:.6} ({t:.3} s)", bundle.lower, bundle.upper);
    if let Some(g) = &gap {
        eprintln!("design: tau = {:.6}, gap in [{:.6}, {:.6}]", g.design_tau, g.gap_lower, g.gap_upper);
    }
    let report = CertifyReport {
        instance: InstanceSummary::of(&work.original, loaded.alpha),
        bundle,
        gap,
        time_s: args.output.timings.then_some(t),
    };
    let text = match args.output.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let b = &report.bundle;
            let mut s = String::from("tau_init,tau_greedy,tau_cvx,tau_cvx_star,duality_gap,u_greedy,lower,upper");
            if report.gap.is_some() {
                s.push_str(",design_tau,gap_lower,gap_upper");
            }
            s.push('\n');
            write!(
                s,
                "{},{},{},{},{},{},{},{}",
                b.tau_init, b.tau_greedy, b.tau_cvx, b.tau_cvx_star, b.duality_gap, b.u_greedy, b.lower, b.upper
            )
            .unwrap();
            if let Some(g) = &report.gap {
                write!(s, ",{},{},{}", g.design_tau, g.gap_lower, g.gap_upper).unwrap();
            }
            s
        }
    };
    emit(&args.output, text)
}

// ---------------------------------------------------------------------------
// evaluate

#[derive(Debug, Serialize)]
struct ChannelTau {
    channel: Channel,
    tau: f64,
}

#[derive(Debug, Serialize)]
struct EvaluateReport {
    n: usize,
    base_edges: usize,
    candidate_edges: usize,
    included_edges: usize,
    channels: Vec<ChannelTau>,
    objective: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    dopt_proxy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    load_report: Option<LoadReport>,
}

fn connected_tau(g: &treeconn::WeightedGraph) -> Result<f64> {
    let t = tree_connectivity(g)?;
    if !t.connected {
        return Err(Error::Domain(format!("graph is disconnected ({} components)", g.component_count())));
    }
    Ok(t.tau)
}

pub fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let with_candidates = !args.base_only;
    let report = if let Some((ds, load_report)) = load_dataset(&args.input)? {
        let gp = ds.graph(Channel::Primary, with_candidates)?;
        let gt = ds.graph(Channel::Rotational, with_candidates)?;
        let (tp, tt) = (connected_tau(&gp)?, connected_tau(&gt)?);
        let proxy = dopt_proxy(&gp, &gt)?;
        EvaluateReport {
            n: ds.poses,
            base_edges: ds.odometry.len(),
            candidate_edges: ds.loop_closures.len(),
            included_edges: ds.odometry.len() + if with_candidates { ds.loop_closures.len() } else { 0 },
            channels: vec![
                ChannelTau { channel: Channel::Primary, tau: tp },
                ChannelTau { channel: Channel::Rotational, tau: tt },
            ],
            objective: proxy,
            dopt_proxy: Some(proxy),
            load_report: Some(load_report),
        }
    } else {
        let loaded = load_instance(&args.input, None)?;
        let inst = &loaded.instance;
        let include = with_candidates && inst.direction() == Direction::Add;
        let all: Vec<usize> = if include { (0..inst.candidate_count()).collect() } else { Vec::new() };
        let mut channels = Vec::new();
        let mut objective = 0.0;
        for &(channel, coef) in inst.objective().channels() {
            let tau = connected_tau(&inst.graph_with(channel, &all))?;
            objective += coef * tau;
            channels.push(ChannelTau { channel, tau });
        }
        EvaluateReport {
            n: inst.vertex_count(),
            base_edges: inst.base_edges().len(),
            candidate_edges: inst.candidate_count(),
            included_edges: inst.base_edges().len() + all.len(),
            channels,
            objective,
            dopt_proxy: (inst.objective() == Objective::SlamDouble).then_some(objective),
            load_report: None,
        }
    };
    eprintln!("n = {}, {} edges, objective = {:.6}", report.n, report.included_edges, report.objective);
    let text = match args.output.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut s = String::from("n,base_edges,candidate_edges,included_edges,objective,dopt_proxy");
            for c in &report.channels {
                write!(s, ",tau_{}", match c.channel {
                    Channel::Primary => "primary",
                    Channel::Rotational => "rotational",
                })
                .unwrap();
            }
            write!(
                s,
                "\n{},{},{},{},{},{}",
                report.n,
                report.base_edges,
                report.candidate_edges,
                report.included_edges,
                report.objective,
                opt_cell(report.dopt_proxy)
            )
            .unwrap();
            for c in &report.channels {
                write!(s, ",{}", c.tau).unwrap();
            }
            s
        }
    };
    emit(&args.output, text)
}

// ---------------------------------------------------------------------------
// bench

/// Column order of the bench table.
pub const BENCH_COLUMNS: &[&str] = &[
    "k",
    "m_init",
    "tau_init",
    "tau_greedy",
    "tau_cvx",
    "tau_cvx_star",
    "u_greedy",
    "lower",
    "upper",
    "opt",
];
pub const BENCH_TIMING_COLUMNS: &[&str] = &["t_greedy_s", "t_cvx_s", "t_opt_s"];

#[derive(Debug, Serialize)]
struct BenchRow {
    k: usize,
    m_init: usize,
    tau_init: f64,
    tau_greedy: f64,
    tau_cvx: f64,
    tau_cvx_star: f64,
    u_greedy: f64,
    lower: f64,
    upper: f64,
    opt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_greedy_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_cvx_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_opt_s: Option<f64>,
}

fn parse_range(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::Argument(format!("range `{text}` is not A:B or A:B:STEP"));
    let parts: Vec<&str> = text.split(':').collect();
    if !(2..=3).contains(&parts.len()) {
        return Err(bad());
    }
    let nums = parts.iter().map(|p| p.trim().parse::<usize>().map_err(|_| bad())).collect::<Result<Vec<_>>>()?;
    let step = nums.get(2).copied().unwrap_or(1);
    if step == 0 {
        return Err(Error::Argument("range step must be positive".into()));
    }
    if nums[0] > nums[1] {
        return Err(Error::Argument(format!("range `{text}` is empty")));
    }
    Ok((nums[0]..=nums[1]).step_by(step).collect())
}

fn bench_row(inst: &EspInstance, opts: &SolverOptions, oracle: bool, repeat: u32, timings: bool) -> Result<BenchRow> {
    let (greedy, t_greedy) = timed(repeat, || greedy_select(inst))?;
    let ((relaxed, rounded), t_cvx) = timed(repeat, || {
        let s = solve_p2(inst, opts)?;
        let r = round_deterministic(inst, s.pi_star.as_slice())?;
        Ok((s, r))
    })?;
    let (opt, t_opt) = if oracle {
        match timed(repeat, || exhaustive_select(inst)) {
            Ok((r, t)) => (Some(r.tau_achieved), Some(t)),
            Err(Error::Size(msg)) => {
                eprintln!("k = {}: oracle skipped, {msg}", inst.k());
                (None, None)
            }
            Err(e) => return Err(e),
        }
    } else {
        (None, None)
    };
    let b = CertificateBundle::assemble(
        greedy.tau_init,
        greedy.tau_achieved,
        rounded.tau_achieved,
        relaxed.tau_cvx_star,
        relaxed.duality_gap,
        greedy.sorted_selection(),
        rounded.sorted_selection(),
    );
    Ok(BenchRow {
        k: inst.k(),
        m_init: inst.base_edges().len(),
        tau_init: b.tau_init,
        tau_greedy: b.tau_greedy,
        tau_cvx: b.tau_cvx,
        tau_cvx_star: b.tau_cvx_star,
        u_greedy: b.u_greedy,
        lower: b.lower,
        upper: b.upper,
        opt,
        t_greedy_s: timings.then_some(t_greedy),
        t_cvx_s: timings.then_some(t_cvx),
        t_opt_s: if timings { t_opt } else { None },
    })
}

pub fn bench(args: &BenchArgs) -> Result<()> {
    let points = parse_range(&args.range)?;
    let opts = solver_options(&args.solver)?;
    check_integer_bounds(&args.generator)?;
    let file_input = args.input.instance.is_some() || args.input.g2o.is_some();
    let out = &args.output;
    let mut rows = Vec::with_capacity(points.len());
    match args.sweep {
        Sweep::K => {
            let base = if file_input {
                load_instance(&args.input, None)?.instance
            } else {
                random_instance(&generator_config(&args.generator, 0), args.generator.seed)?
            };
            if base.direction() != Direction::Add {
                return Err(Error::Argument("bench expects an addition instance".into()));
            }
            for k in points {
                let inst = base.with_k(k)?;
                rows.push(bench_row(&inst, &opts, args.oracle, out.repeat, out.timings)?);
                log_row(rows.last().unwrap());
            }
        }
        Sweep::MInit => {
            if file_input {
                return Err(Error::Argument("an m-init sweep generates its own instances".into()));
            }
            for m in points {
                let cfg = RandomInstanceConfig { m_init: m, ..generator_config(&args.generator, args.k) };
                let inst = random_instance(&cfg, args.generator.seed)?;
                rows.push(bench_row(&inst, &opts, args.oracle, out.repeat, out.timings)?);
                log_row(rows.last().unwrap());
            }
        }
    }
    let text = match out.format {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut header: Vec<&str> = BENCH_COLUMNS.to_vec();
            if out.timings {
                header.extend_from_slice(BENCH_TIMING_COLUMNS);
            }
            let mut s = header.join(",");
            s.push('\n');
            for r in &rows {
                write!(
                    s,
                    "{},{},{},{},{},{},{},{},{},{}",
                    r.k,
                    r.m_init,
                    r.tau_init,
                    r.tau_greedy,
                    r.tau_cvx,
                    r.tau_cvx_star,
                    r.u_greedy,
                    r.lower,
                    r.upper,
                    opt_cell(r.opt)
                )
                .unwrap();
                if out.timings {
                    write!(s, ",{},{},{}", opt_cell(r.t_greedy_s), opt_cell(r.t_cvx_s), opt_cell(r.t_opt_s)).unwrap();
                }
                s.push('\n');
            }
            s
        }
    };
    emit(out, text)
}

fn log_row(r: &BenchRow) {
    eprintln!("k = {}, m_init = {}: {:.6} <= OPT <= {:.6}", r.k, r.m_init, r.lower, r.upper);
}
