//! Edge-selection problem instances: validation, the canonical JSON format,
//! the removal-to-addition reduction, and seeded random generation.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{check_endpoints, normalization_factor, Edge, ReducedLaplacian, WeightedGraph};
use crate::rng;
use crate::treeconn::tree_connectivity;

/// Whether candidates are added to, or removed from, the base graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Add,
    Remove,
}

/// Objective maximized over selections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// `τ_w` of a single weight function.
    #[default]
    Single,
    /// `2 τ_{w_p} + τ_{w_θ}`, the pose-graph D-optimality proxy.
    SlamDouble,
}

/// One of the two edge-weight functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    /// The single weight, or the translational precision `w_p`.
    Primary,
    /// The rotational precision `w_θ`.
    Rotational,
}

impl Objective {
    /// Channels entering the objective, with their coefficients.
    pub fn channels(self) -> &'static [(Channel, f64)] {
        match self {
            Objective::Single => &[(Channel::Primary, 1.0)],
            Objective::SlamDouble => &[(Channel::Primary, 2.0), (Channel::Rotational, 1.0)],
        }
    }
}

/// An edge carrying one or two weights. Endpoints are 0-based internally.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeRecord {
    u: usize,
    v: usize,
    pub weight: f64,
    pub weight_theta: Option<f64>,
}

impl EdgeRecord {
    /// Edge between the 1-based vertices `u` and `v`.
    pub fn new(u: usize, v: usize, weight: f64, weight_theta: Option<f64>) -> Self {
        Self { u: u.wrapping_sub(1), v: v.wrapping_sub(1), weight, weight_theta }
    }

    pub fn single(u: usize, v: usize, weight: f64) -> Self {
        Self::new(u, v, weight, None)
    }

    pub fn double(u: usize, v: usize, weight_p: f64, weight_theta: f64) -> Self {
        Self::new(u, v, weight_p, Some(weight_theta))
    }

    /// 1-based endpoints.
    pub fn endpoints(&self) -> (usize, usize) {
        (self.u.wrapping_add(1), self.v.wrapping_add(1))
    }

    pub(crate) fn ends(&self) -> (usize, usize) {
        (self.u, self.v)
    }

    /// Unordered 0-based pair.
    pub(crate) fn key(&self) -> (usize, usize) {
        (self.u.min(self.v), self.u.max(self.v))
    }

    pub fn channel_weight(&self, channel: Channel) -> f64 {
        match channel {
            Channel::Primary => self.weight,
            // Validation guarantees presence whenever the rotational channel is used.
            Channel::Rotational => self.weight_theta.unwrap_or(self.weight),
        }
    }

    fn weights(&self) -> impl Iterator<Item = f64> {
        std::iter::once(self.weight).chain(self.weight_theta)
    }

    fn scaled(self, alpha: f64) -> Self {
        Self { weight: self.weight * alpha, weight_theta: self.weight_theta.map(|w| w * alpha), ..self }
    }
}

/// A k-ESP instance.
#[derive(Debug, Clone, PartialEq)]
pub struct EspInstance {
    n: usize,
    base: Vec<EdgeRecord>,
    candidates: Vec<EdgeRecord>,
    k: usize,
    direction: Direction,
    objective: Objective,
}

impl EspInstance {
    pub fn new(
        n: usize,
        base: Vec<EdgeRecord>,
        candidates: Vec<EdgeRecord>,
        k: usize,
        direction: Direction,
        objective: Objective,
    ) -> Result<Self> {
        let inst = Self { n, base, candidates, k, direction, objective };
        inst.validate()?;
        Ok(inst)
    }

    /// Builds the instance after rescaling all weights (both channels) by the
    /// smallest `alpha >= 1` that makes every weight at least 1.
    pub fn normalized(
        n: usize,
        base: Vec<EdgeRecord>,
        candidates: Vec<EdgeRecord>,
        k: usize,
        direction: Direction,
        objective: Objective,
    ) -> Result<(Self, f64)> {
        let min = base
            .iter()
            .chain(&candidates)
            .flat_map(EdgeRecord::weights)
            .fold(f64::INFINITY, f64::min);
        let alpha = normalization_factor(min);
        let scale = |v: Vec<EdgeRecord>| v.into_iter().map(|e| e.scaled(alpha)).collect();
        let inst = Self::new(n, scale(base), scale(candidates), k, direction, objective)?;
        Ok((inst, alpha))
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Argument("instance needs at least 2 vertices".into()));
        }
        for e in self.base.iter().chain(&self.candidates) {
            let (u, v) = e.endpoints();
            check_endpoints(self.n, u, v)?;
            for w in e.weights() {
                if !w.is_finite() || w < 1.0 {
                    return Err(Error::Data(format!(
                        "edge {{{u},{v}}} has weight {w}; weights must be >= 1 \
                         (request normalization to rescale)"
                    )));
                }
            }
            if self.objective == Objective::SlamDouble && e.weight_theta.is_none() {
                return Err(Error::Data(format!(
                    "edge {{{u},{v}}} lacks a rotational weight required by the slam-double objective"
                )));
            }
        }
        if self.k > self.candidates.len() {
            return Err(Error::Argument(format!(
                "budget k = {} exceeds the {} candidates",
                self.k,
                self.candidates.len()
            )));
        }
        if self.direction == Direction::Remove {
            let base_keys: BTreeSet<_> = self.base.iter().map(EdgeRecord::key).collect();
            let mut seen = BTreeSet::new();
            for e in &self.candidates {
                let (u, v) = e.endpoints();
                if !base_keys.contains(&e.key()) {
                    return Err(Error::Data(format!(
                        "removal candidate {{{u},{v}}} is not a base edge"
                    )));
                }
                if !seen.insert(e.key()) {
                    return Err(Error::Data(format!("removal candidate {{{u},{v}}} listed twice")));
                }
            }
        }
        let base = self.base_graph(Channel::Primary);
        if !base.is_connected() {
            return Err(Error::Domain(format!(
                "base graph is disconnected ({} components)",
                base.component_count()
            )));
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn base_edges(&self) -> &[EdgeRecord] {
        &self.base
    }

    pub fn candidates(&self) -> &[EdgeRecord] {
        &self.candidates
    }

    pub fn candidate_count(&self) -> usize {
        self.candidates.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn objective(&self) -> Objective {
        self.objective
    }

    /// Same instance with a different budget.
    pub fn with_k(&self, k: usize) -> Result<Self> {
        if k > self.candidates.len() {
            return Err(Error::Argument(format!(
                "budget k = {k} exceeds the {} candidates",
                self.candidates.len()
            )));
        }
        Ok(Self { k, ..self.clone() })
    }

    /// Weighted base graph under one weight channel.
    pub fn base_graph(&self, channel: Channel) -> WeightedGraph {
        self.graph_with(channel, &[])
    }

    /// Base graph plus the given candidates under one weight channel.
    pub fn graph_with(&self, channel: Channel, selected: &[usize]) -> WeightedGraph {
        let edge = |e: &EdgeRecord| Edge { u: e.u, v: e.v, weight: e.channel_weight(channel) };
        WeightedGraph::from_zero_based(
            self.n,
            self.base.iter().map(edge).chain(selected.iter().map(|&i| edge(&self.candidates[i]))),
        )
    }

    /// Reduced Laplacian of the base graph plus `scale_i`-weighted candidates,
    /// anchored at vertex `n`.
    pub(crate) fn laplacian_with_scales(
        &self,
        channel: Channel,
        scales: impl IntoIterator<Item = (usize, f64)>,
    ) -> ReducedLaplacian {
        let base = self.base.iter().map(|e| (e.u, e.v, e.channel_weight(channel)));
        let extra = scales.into_iter().filter(|&(_, s)| s != 0.0).map(|(i, s)| {
            let e = &self.candidates[i];
            (e.u, e.v, s * e.channel_weight(channel))
        });
        ReducedLaplacian::assemble(self.n, self.n - 1, base.chain(extra))
    }

    /// Objective value (combined tree-connectivity) of the base graph plus
    /// the selected candidates.
    pub fn objective_value(&self, selected: &[usize]) -> Result<f64> {
        self.check_subset(selected)?;
        // Assemble in index order so equal sets give bit-identical values.
        let mut sorted = selected.to_vec();
        sorted.sort_unstable();
        let mut total = 0.0;
        for &(channel, coef) in self.objective.channels() {
            total += coef * tree_connectivity(&self.graph_with(channel, &sorted))?.tau;
        }
        Ok(total)
    }

    /// Objective value of the base graph alone.
    pub fn tau_init(&self) -> Result<f64> {
        self.objective_value(&[])
    }

    pub(crate) fn check_subset(&self, selected: &[usize]) -> Result<()> {
        let mut seen = BTreeSet::new();
        for &i in selected {
            if i >= self.candidates.len() {
                return Err(Error::Argument(format!(
                    "candidate index {i} out of range (0..{})",
                    self.candidates.len()
                )));
            }
            if !seen.insert(i) {
                return Err(Error::Argument(format!("candidate index {i} repeated")));
            }
        }
        Ok(())
    }

    pub(crate) fn require_add(&self) -> Result<()> {
        if self.direction != Direction::Add {
            return Err(Error::Argument(
                "operation expects an addition instance; reduce the removal instance first".into(),
            ));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: InstanceDoc = serde_json::from_str(text)?;
        doc.into_instance()
    }

    /// Like [`EspInstance::from_json`], rescaling weights as in
    /// [`EspInstance::normalized`]. Returns the factor applied.
    pub fn from_json_normalized(text: &str) -> Result<(Self, f64)> {
        let doc: InstanceDoc = serde_json::from_str(text)?;
        EspInstance::normalized(
            doc.n,
            doc.base_edges.iter().map(EdgeRecord::from).collect(),
            doc.candidates.iter().map(EdgeRecord::from).collect(),
            doc.k,
            doc.direction,
            doc.objective,
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&InstanceDoc::from(self)).expect("instance serializes")
    }
}

/// Result of turning a removal instance into an equivalent addition instance.
#[derive(Debug, Clone)]
pub struct RemovalReduction {
    /// Addition instance on the retained skeleton; its candidates are the
    /// removal candidates in their original order.
    pub instance: EspInstance,
}

impl RemovalReduction {
    /// Removal set corresponding to an addition selection: every removal
    /// candidate that was not re-added.
    pub fn removed_for(&self, added: &[usize]) -> Vec<usize> {
        let kept: BTreeSet<_> = added.iter().copied().collect();
        (0..self.instance.candidate_count()).filter(|i| !kept.contains(i)).collect()
    }

    /// Addition selection corresponding to a removal set.
    pub fn added_for(&self, removed: &[usize]) -> Vec<usize> {
        self.removed_for(removed)
    }
}

/// Rewrites a removal instance as an addition instance on the skeleton
/// `E_init \ C⁻` with budget `|C⁻| - k`.
pub fn reduce_removal_to_addition(inst: &EspInstance) -> Result<RemovalReduction> {
    if inst.direction != Direction::Remove {
        return Err(Error::Argument("instance is not a removal instance".into()));
    }
    let removable: BTreeSet<_> = inst.candidates.iter().map(EdgeRecord::key).collect();
    let mut merged: BTreeMap<(usize, usize), EdgeRecord> = BTreeMap::new();
    let mut skeleton = Vec::new();
    for e in &inst.base {
        if removable.contains(&e.key()) {
            merged
                .entry(e.key())
                .and_modify(|acc| {
                    acc.weight += e.weight;
                    acc.weight_theta = acc.weight_theta.zip(e.weight_theta).map(|(a, b)| a + b);
                })
                .or_insert(*e);
        } else {
            skeleton.push(*e);
        }
    }
    // Candidate weights come from the base edges they would remove.
    let candidates: Vec<EdgeRecord> = inst.candidates.iter().map(|c| merged[&c.key()]).collect();
    let k = candidates.len() - inst.k;
    let instance = EspInstance {
        n: inst.n,
        base: skeleton,
        candidates,
        k,
        direction: Direction::Add,
        objective: inst.objective,
    };
    let skeleton_graph = instance.base_graph(Channel::Primary);
    if !skeleton_graph.is_connected() {
        return Err(Error::Infeasible {
            message: format!(
                "removing every candidate disconnects the graph ({} components); \
                 the reduction requires a connected skeleton",
                skeleton_graph.component_count()
            ),
            max_achievable: 0.0,
        });
    }
    Ok(RemovalReduction { instance })
}

// ---------------------------------------------------------------------------
// JSON

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum EdgeDoc {
    Single(usize, usize, f64),
    Double(usize, usize, f64, f64),
}

impl From<&EdgeRecord> for EdgeDoc {
    fn from(e: &EdgeRecord) -> Self {
        let (u, v) = e.endpoints();
        match e.weight_theta {
            None => EdgeDoc::Single(u, v, e.weight),
            Some(t) => EdgeDoc::Double(u, v, e.weight, t),
        }
    }
}

impl From<&EdgeDoc> for EdgeRecord {
    fn from(d: &EdgeDoc) -> Self {
        match *d {
            EdgeDoc::Single(u, v, w) => EdgeRecord::single(u, v, w),
            EdgeDoc::Double(u, v, w, t) => EdgeRecord::double(u, v, w, t),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct InstanceDoc {
    n: usize,
    base_edges: Vec<EdgeDoc>,
    #[serde(default)]
    candidates: Vec<EdgeDoc>,
    #[serde(default)]
    k: usize,
    #[serde(default)]
    direction: Direction,
    #[serde(default)]
    objective: Objective,
}

impl From<&EspInstance> for InstanceDoc {
    fn from(inst: &EspInstance) -> Self {
        Self {
            n: inst.n,
            base_edges: inst.base.iter().map(EdgeDoc::from).collect(),
            candidates: inst.candidates.iter().map(EdgeDoc::from).collect(),
            k: inst.k,
            direction: inst.direction,
            objective: inst.objective,
        }
    }
}

impl InstanceDoc {
    fn into_instance(self) -> Result<EspInstance> {
        EspInstance::new(
            self.n,
            self.base_edges.iter().map(EdgeRecord::from).collect(),
            self.candidates.iter().map(EdgeRecord::from).collect(),
            self.k,
            self.direction,
            self.objective,
        )
    }
}

// ---------------------------------------------------------------------------
// Random instances

/// How the candidate pool of a random instance is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateMode {
    /// Every vertex pair not in the base graph.
    Complement,
    /// A uniformly sampled subset of that many non-base pairs.
    Sampled(usize),
}

/// Distribution of random edge weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightRange {
    Uniform { lo: f64, hi: f64 },
    Integer { lo: u32, hi: u32 },
}

impl WeightRange {
    pub const UNIT: WeightRange = WeightRange::Integer { lo: 1, hi: 1 };

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            WeightRange::Uniform { lo, hi } if lo == hi => lo,
            WeightRange::Uniform { lo, hi } => rng.gen_range(lo..hi),
            WeightRange::Integer { lo, hi } => f64::from(rng.gen_range(lo..=hi)),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            WeightRange::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo >= 1.0 && hi >= lo,
            WeightRange::Integer { lo, hi } => lo >= 1 && hi >= lo,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Argument(format!("invalid weight range {self:?}; need 1 <= lo <= hi")))
        }
    }
}

/// Parameters of [`random_instance`].
#[derive(Debug, Clone, PartialEq)]
pub struct RandomInstanceConfig {
    pub n: usize,
    pub m_init: usize,
    pub candidates: CandidateMode,
    pub weights: WeightRange,
    pub k: usize,
    /// Draw an independent rotational weight per edge and use the
    /// slam-double objective.
    pub two_channel: bool,
}

impl RandomInstanceConfig {
    pub fn new(n: usize, m_init: usize) -> Self {
        Self {
            n,
            m_init,
            candidates: CandidateMode::Complement,
            weights: WeightRange::UNIT,
            k: 0,
            two_channel: false,
        }
    }
}

const MAX_CONNECTIVITY_ATTEMPTS: usize = 100_000;

/// Random addition instance: a base graph with exactly `m_init` uniformly
/// chosen edges, redrawn until connected, and a candidate pool per `mode`.
pub fn random_instance(cfg: &RandomInstanceConfig, seed: u64) -> Result<EspInstance> {
    let n = cfg.n;
    if n < 2 {
        return Err(Error::Argument("random instance needs n >= 2".into()));
    }
    let total = n * (n - 1) / 2;
    if cfg.m_init > total {
        return Err(Error::Argument(format!(
            "m_init = {} exceeds the {total} vertex pairs of K_{n}",
            cfg.m_init
        )));
    }
    if cfg.m_init + 1 < n {
        return Err(Error::Argument(format!(
            "m_init = {} cannot connect {n} vertices",
            cfg.m_init
        )));
    }
    cfg.weights.validate()?;

    let mut pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let mut topo = rng::stream(seed, "instance/topology");
    let mut attempt = 0;
    let split = loop {
        attempt += 1;
        if attempt > MAX_CONNECTIVITY_ATTEMPTS {
            return Err(Error::Argument(format!(
                "no connected graph with n = {n}, m_init = {} after {MAX_CONNECTIVITY_ATTEMPTS} draws",
                cfg.m_init
            )));
        }
        pairs.shuffle(&mut topo);
        let g = WeightedGraph::from_zero_based(
            n,
            pairs[..cfg.m_init].iter().map(|&(u, v)| Edge { u, v, weight: 1.0 }),
        );
        if g.is_connected() {
            break cfg.m_init;
        }
    };
    let mut base_pairs = pairs[..split].to_vec();
    let mut rest = pairs[split..].to_vec();
    base_pairs.sort_unstable();
    rest.sort_unstable();
    let cand_pairs = match cfg.candidates {
        CandidateMode::Complement => rest,
        CandidateMode::Sampled(c) => {
            if c > rest.len() {
                return Err(Error::Argument(format!(
                    "cannot sample {c} candidates from {} non-base pairs",
                    rest.len()
                )));
            }
            let mut pick = rng::stream(seed, "instance/candidates");
            rest.shuffle(&mut pick);
            let mut chosen = rest[..c].to_vec();
            chosen.sort_unstable();
            chosen
        }
    };

    let mut wrng = rng::stream(seed, "instance/weights");
    let mut record = |(u, v): (usize, usize)| {
        let w = cfg.weights.sample(&mut wrng);
        let t = cfg.two_channel.then(|| cfg.weights.sample(&mut wrng));
        EdgeRecord::new(u + 1, v + 1, w, t)
    };
    let base: Vec<_> = base_pairs.into_iter().map(&mut record).collect();
    let candidates: Vec<_> = cand_pairs.into_iter().map(&mut record).collect();
    let objective = if cfg.two_channel { Objective::SlamDouble } else { Objective::Single };
    EspInstance::new(n, base, candidates, cfg.k, Direction::Add, objective)
}
