//! 2-D pose-graph datasets in g2o text format.
//!
//! Each `EDGE_SE2 i j dx dy dθ I11 I12 I13 I22 I23 I33` line becomes an edge
//! between poses `i+1` and `j+1` with translational weight `(I11 + I22) / 2`
//! and rotational weight `I33`. Off-diagonal information is dropped; lines
//! where it is not negligible are listed in the load report. Consecutive ids
//! are odometry, everything else a loop closure, unless an explicit base-edge
//! list says otherwise.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{normalization_factor, DisjointSets, WeightedGraph};
use crate::instance::{Channel, Direction, EdgeRecord, EspInstance, Objective};
use crate::treeconn::tree_connectivity;

/// Environment variable naming the directory searched for datasets.
pub const DATA_DIR_VAR: &str = "TREECONN_DATA_DIR";

/// Discarded off-diagonal mass, relative to the diagonal, above which a line
/// is flagged.
const OFFDIAG_FLAG_RATIO: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoseEdge {
    /// 1-based poses.
    pub u: usize,
    pub v: usize,
    pub weight_p: f64,
    pub weight_theta: f64,
}

impl PoseEdge {
    fn record(&self) -> EdgeRecord {
        EdgeRecord::double(self.u, self.v, self.weight_p, self.weight_theta)
    }

    fn weight(&self, channel: Channel) -> f64 {
        match channel {
            Channel::Primary => self.weight_p,
            Channel::Rotational => self.weight_theta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoseGraphDataset {
    pub poses: usize,
    pub odometry: Vec<PoseEdge>,
    pub loop_closures: Vec<PoseEdge>,
    pub source: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadOptions {
    /// Rescale every weight by the smallest factor making all of them `>= 1`.
    pub normalize: bool,
    /// Explicit base edges as unordered pairs of g2o (0-based) ids; replaces
    /// the consecutive-id rule.
    pub base_edges: Option<BTreeSet<(usize, usize)>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LoadReport {
    pub vertex_lines: usize,
    pub edge_lines: usize,
    /// Lines with an unrecognized tag.
    pub ignored_lines: usize,
    /// Line numbers whose dropped off-diagonal information exceeds 1% of the
    /// diagonal.
    pub offdiag_flagged: Vec<usize>,
    /// Weight rescaling applied (1 when none).
    pub alpha: f64,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| parse_err(line, format!("bad {what} `{tok}`")))
}

/// Parses with default options.
pub fn parse_g2o(reader: impl BufRead) -> Result<PoseGraphDataset> {
    parse_g2o_with(reader, &LoadOptions::default()).map(|(ds, _)| ds)
}

pub fn parse_g2o_with(reader: impl BufRead, opts: &LoadOptions) -> Result<(PoseGraphDataset, LoadReport)> {
    let mut report = LoadReport { alpha: 1.0, ..LoadReport::default() };
    let mut max_vertex: Option<usize> = None;
    // (line, i, j, w_p, w_θ) with 0-based ids.
    let mut raw = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let mut toks = line.split_whitespace();
        let Some(tag) = toks.next() else { continue };
        if tag.starts_with('#') {
            continue;
        }
        match tag {
            "VERTEX_SE2" => {
                let id: usize = field(toks.next(), lineno, "vertex id")?;
                for what in ["x", "y", "theta"] {
                    field::<f64>(toks.next(), lineno, what)?;
                }
                if toks.next().is_some() {
                    return Err(parse_err(lineno, "trailing fields after VERTEX_SE2"));
                }
                max_vertex = Some(max_vertex.map_or(id, |m| m.max(id)));
                report.vertex_lines += 1;
            }
            "EDGE_SE2" => {
                let i: usize = field(toks.next(), lineno, "source id")?;
                let j: usize = field(toks.next(), lineno, "target id")?;
                for what in ["dx", "dy", "dtheta"] {
                    field::<f64>(toks.next(), lineno, what)?;
                }
                let mut info = [0.0f64; 6];
                for (k, slot) in info.iter_mut().enumerate() {
                    *slot = field(toks.next(), lineno, &format!("information entry {}", k + 1))?;
                }
                if toks.next().is_some() {
                    return Err(parse_err(lineno, "trailing fields after EDGE_SE2"));
                }
                let [i11, i12, i13, i22, i23, i33] = info;
                if !(i11 > 0.0 && i22 > 0.0 && i33 > 0.0) {
                    return Err(Error::Data(format!(
                        "line {lineno}: information diagonal ({i11}, {i22}, {i33}) is not positive"
                    )));
                }
                if info.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Data(format!("line {lineno}: non-finite information entry")));
                }
                if i == j {
                    return Err(Error::Data(format!("line {lineno}: edge joins pose {i} to itself")));
                }
                let off = (2.0 * (i12 * i12 + i13 * i13 + i23 * i23)).sqrt();
                let diag = (i11 * i11 + i22 * i22 + i33 * i33).sqrt();
                if off > OFFDIAG_FLAG_RATIO * diag {
                    report.offdiag_flagged.push(lineno);
                }
                raw.push((lineno, i, j, 0.5 * (i11 + i22), i33));
                report.edge_lines += 1;
            }
            _ => report.ignored_lines += 1,
        }
    }

    let max_edge_id = raw.iter().map(|&(_, i, j, _, _)| i.max(j)).max();
    let poses = match (max_vertex, max_edge_id) {
        (Some(v), Some(e)) if e > v => {
            let (line, ..) = raw.iter().find(|r| r.1.max(r.2) > v).unwrap();
            return Err(Error::Data(format!("line {line}: edge references pose {e} with no VERTEX_SE2 line")));
        }
        (Some(v), _) => v + 1,
        (None, Some(e)) => e + 1,
        (None, None) => return Err(Error::Data("no poses found".into())),
    };

    let min = raw.iter().flat_map(|r| [r.3, r.4]).fold(f64::INFINITY, f64::min);
    if min < 1.0 {
        if !opts.normalize {
            return Err(Error::Data(format!(
                "smallest extracted weight is {min}; weights must be >= 1 (request normalization to rescale)"
            )));
        }
        report.alpha = normalization_factor(min);
    }

    let mut ds = PoseGraphDataset { poses, odometry: Vec::new(), loop_closures: Vec::new(), source: String::new() };
    for (_, i, j, wp, wt) in raw {
        let is_base = match &opts.base_edges {
            Some(set) => set.contains(&(i.min(j), i.max(j))),
            None => i.abs_diff(j) == 1,
        };
        let e = PoseEdge { u: i + 1, v: j + 1, weight_p: wp * report.alpha, weight_theta: wt * report.alpha };
        if is_base {
            ds.odometry.push(e);
        } else {
            ds.loop_closures.push(e);
        }
    }
    Ok((ds, report))
}

/// Reads a g2o file from disk.
pub fn load_g2o(path: &Path, opts: &LoadOptions) -> Result<(PoseGraphDataset, LoadReport)> {
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let (mut ds, report) = parse_g2o_with(BufReader::new(file), opts)?;
    ds.source = path.display().to_string();
    Ok((ds, report))
}

/// Reads a base-edge list: one pair of g2o ids per line, `#` comments allowed.
pub fn parse_base_edges(reader: impl BufRead) -> Result<BTreeSet<(usize, usize)>> {
    let mut set = BTreeSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let body = line.split('#').next().unwrap_or("");
        let mut toks = body.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty());
        let Some(first) = toks.next() else { continue };
        let i: usize = field(Some(first), lineno, "pose id")?;
        let j: usize = field(toks.next(), lineno, "pose id")?;
        if toks.next().is_some() {
            return Err(parse_err(lineno, "expected exactly two ids"));
        }
        set.insert((i.min(j), i.max(j)));
    }
    Ok(set)
}

impl PoseGraphDataset {
    pub fn edge_count(&self) -> usize {
        self.odometry.len() + self.loop_closures.len()
    }

    /// Graph over all poses for one channel, optionally without closures.
    pub fn graph(&self, channel: Channel, with_closures: bool) -> Result<WeightedGraph> {
        let closures = if with_closures { &self.loop_closures[..] } else { &[] };
        WeightedGraph::new(
            self.poses,
            self.odometry.iter().chain(closures).map(|e| (e.u, e.v, e.weight(channel))),
        )
    }

    /// Consecutive pose pairs with no base edge, and the base's component
    /// count.
    pub fn missing_links(&self) -> (Vec<(usize, usize)>, usize) {
        let mut dsu = DisjointSets::new(self.poses);
        let mut components = self.poses;
        let mut present = BTreeSet::new();
        for e in &self.odometry {
            if dsu.union(e.u - 1, e.v - 1) {
                components -= 1;
            }
            present.insert((e.u.min(e.v), e.u.max(e.v)));
        }
        let missing = (1..self.poses).map(|i| (i, i + 1)).filter(|p| !present.contains(p)).collect();
        (missing, components)
    }

    /// Recovers a dataset from an instance built by [`to_instance`].
    pub fn from_instance(inst: &EspInstance, source: impl Into<String>) -> Result<Self> {
        let convert = |edges: &[EdgeRecord]| {
            edges
                .iter()
                .map(|e| {
                    let (u, v) = e.endpoints();
                    let weight_theta = e.weight_theta.ok_or_else(|| {
                        Error::Data(format!("edge {{{u},{v}}} lacks a rotational weight"))
                    })?;
                    Ok(PoseEdge { u, v, weight_p: e.weight, weight_theta })
                })
                .collect::<Result<Vec<_>>>()
        };
        Ok(Self {
            poses: inst.vertex_count(),
            odometry: convert(inst.base_edges())?,
            loop_closures: convert(inst.candidates())?,
            source: source.into(),
        })
    }
}

/// Addition instance with odometry as the base, closures as candidates and
/// the two-channel objective.
pub fn to_instance(ds: &PoseGraphDataset, k: usize) -> Result<EspInstance> {
    let (missing, components) = ds.missing_links();
    if components > 1 {
        let shown: Vec<String> = missing.iter().take(20).map(|(u, v)| format!("{{{u},{v}}}")).collect();
        let more = if missing.len() > shown.len() { format!(" and {} more", missing.len() - shown.len()) } else { String::new() };
        return Err(Error::Data(format!(
            "base graph has {components} components; missing consecutive links: {}{more}",
            if shown.is_empty() { "none".to_string() } else { shown.join(", ") }
        )));
    }
    EspInstance::new(
        ds.poses,
        ds.odometry.iter().map(PoseEdge::record).collect(),
        ds.loop_closures.iter().map(PoseEdge::record).collect(),
        k,
        Direction::Add,
        Objective::SlamDouble,
    )
}

/// `2 τ(translational) + τ(rotational)`, the negated limiting log-determinant
/// of the estimator covariance. Larger is better.
pub fn dopt_proxy(translational: &WeightedGraph, rotational: &WeightedGraph) -> Result<f64> {
    if translational.vertex_count() != rotational.vertex_count() {
        return Err(Error::Argument("channel graphs have different vertex counts".into()));
    }
    let mut total = 0.0;
    for (g, coef) in [(translational, 2.0), (rotational, 1.0)] {
        let t = tree_connectivity(g)?;
        if !t.connected {
            return Err(Error::Domain(format!("graph is disconnected ({} components)", g.component_count())));
        }
        total += coef * t.tau;
    }
    Ok(total)
}

/// `$TREECONN_DATA_DIR/<name>` when that file exists.
pub fn dataset_path(name: &str) -> Option<PathBuf> {
    let dir = std::env::var_os(DATA_DIR_VAR)?;
    let path = Path::new(&dir).join(name);
    path.is_file().then_some(path)
}

/// File names under which the Intel Research Lab dataset is looked up.
pub const INTEL_FILE_NAMES: &[&str] = &["intel.g2o", "INTEL.g2o", "input_INTEL_g2o.g2o"];

pub fn find_intel() -> Option<PathBuf> {
    INTEL_FILE_NAMES.iter().find_map(|name| dataset_path(name))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const CHAIN: &str = "\
VERTEX_SE2 0 0 0 0
VERTEX_SE2 1 1 0 0
VERTEX_SE2 2 2 0 0
VERTEX_SE2 3 3 0 0
EDGE_SE2 0 1 1.0 0.0 0.0 500 0 0 500 0 5000
EDGE_SE2 1 2 1.0 0.0 0.0 400 0 0 600 0 4000
EDGE_SE2 2 3 1.0 0.0 0.0 500 0 0 500 0 5000
EDGE_SE2 0 3 3.0 0.0 0.0 20 5 0 30 0 100
FIX 0
";

    #[test]
    fn parses_and_classifies() {
        let (ds, report) = parse_g2o_with(CHAIN.as_bytes(), &LoadOptions::default()).unwrap();
        assert_eq!(ds.poses, 4);
        assert_eq!(ds.odometry.len(), 3);
        assert_eq!(ds.odometry[0], PoseEdge { u: 1, v: 2, weight_p: 500.0, weight_theta: 5000.0 });
        assert_eq!(ds.odometry[1].weight_p, 500.0);
        assert_eq!(ds.loop_closures, vec![PoseEdge { u: 1, v: 4, weight_p: 25.0, weight_theta: 100.0 }]);
        assert_eq!(report.ignored_lines, 1);
        assert_eq!(report.offdiag_flagged, vec![8]);
        assert_eq!(report.alpha, 1.0);
    }

    #[test]
    fn loop_closure_rule() {
        let ds = parse_g2o("EDGE_SE2 0 7 1 0 0 1 0 0 1 0 1\n".as_bytes()).unwrap();
        assert_eq!(ds.poses, 8);
        assert_eq!(ds.loop_closures.len(), 1);
        assert!(ds.odometry.is_empty());
    }

    #[test]
    fn errors() {
        let bad = "EDGE_SE2 0 1 1.0 0.0 x 500 0 0 500 0 5000\n";
        assert!(matches!(parse_g2o(bad.as_bytes()), Err(Error::Parse { line: 1, .. })));
        let short = "VERTEX_SE2 0 0 0 0\nEDGE_SE2 0 1 1.0 0.0\n";
        assert!(matches!(parse_g2o(short.as_bytes()), Err(Error::Parse { line: 2, .. })));
        let neg = "EDGE_SE2 0 1 1 0 0 500 0 0 500 0 0\n";
        assert!(matches!(parse_g2o(neg.as_bytes()), Err(Error::Data(_))));
        let small = "EDGE_SE2 0 1 1 0 0 0.5 0 0 0.5 0 2\n";
        assert!(matches!(parse_g2o(small.as_bytes()), Err(Error::Data(_))));
        let opts = LoadOptions { normalize: true, ..LoadOptions::default() };
        let (ds, report) = parse_g2o_with(small.as_bytes(), &opts).unwrap();
        assert_eq!(report.alpha, 2.0);
        assert_eq!(ds.odometry[0].weight_p, 1.0);
        assert_eq!(ds.odometry[0].weight_theta, 4.0);
    }

    #[test]
    fn base_override() {
        let opts = LoadOptions { base_edges: Some([(0, 3), (0, 1), (1, 2)].into()), ..LoadOptions::default() };
        let (ds, _) = parse_g2o_with(CHAIN.as_bytes(), &opts).unwrap();
        assert_eq!(ds.odometry.len(), 3);
        assert_eq!(ds.loop_closures.len(), 1);
        assert_eq!((ds.loop_closures[0].u, ds.loop_closures[0].v), (3, 4));
        let set = parse_base_edges("# pairs\n0 1\n3, 2\n\n".as_bytes()).unwrap();
        assert_eq!(set, [(0, 1), (2, 3)].into());
    }

    #[test]
    fn instance_conversion() {
        let ds = parse_g2o(CHAIN.as_bytes()).unwrap();
        let inst = to_instance(&ds, 1).unwrap();
        assert_eq!(inst.base_edges().len(), 3);
        assert_eq!(inst.candidate_count(), 1);
        assert_eq!(inst.objective(), Objective::SlamDouble);
        assert!(matches!(to_instance(&ds, 2), Err(Error::Argument(_))));
        let back = PoseGraphDataset::from_instance(&EspInstance::from_json(&inst.to_json()).unwrap(), "").unwrap();
        assert_eq!(back.odometry, ds.odometry);
        assert_eq!(back.loop_closures, ds.loop_closures);

        let gap = "EDGE_SE2 0 1 1 0 0 1 0 0 1 0 1\nEDGE_SE2 2 3 1 0 0 1 0 0 1 0 1\nEDGE_SE2 0 3 1 0 0 1 0 0 1 0 1\n";
        let err = to_instance(&parse_g2o(gap.as_bytes()).unwrap(), 0).unwrap_err();
        assert!(matches!(&err, Error::Data(m) if m.contains("{2,3}")));
    }

    #[test]
    fn proxy_examples() {
        let tree = WeightedGraph::new(3, [(1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(dopt_proxy(&tree, &tree).unwrap(), 0.0);
        let tri = WeightedGraph::new(3, [(1, 2, 1.0), (2, 3, 1.0), (1, 3, 1.0)]).unwrap();
        assert_relative_eq!(dopt_proxy(&tri, &tri).unwrap(), 3.0 * 3f64.ln(), epsilon = 1e-12);
        let split = WeightedGraph::new(3, [(1, 2, 1.0)]).unwrap();
        assert!(matches!(dopt_proxy(&split, &split), Err(Error::Domain(_))));
    }
}
