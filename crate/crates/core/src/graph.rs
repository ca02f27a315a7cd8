//! Signed edge lists: parsing, symmetrization, splitting and degree statistics.
//!
//! A [`SignedGraph`] is undirected. Every stored edge appears exactly once in
//! [`SignedGraph::edges`] (in the orientation it was first seen) and twice in
//! the per-sign adjacency lists.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{stream, Purpose};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: sign token `{token}` is not one of 1, -1, +, -")]
    BadSign { line: usize, token: String },
    #[error("edge list contains no nodes")]
    Empty,
    #[error("node {node} out of range (node count {node_count})")]
    NodeOutOfRange { node: usize, node_count: usize },
    #[error("invalid split ratios {0:?}: must be non-negative and sum to 1")]
    BadRatios((f64, f64, f64)),
    #[error("split leaves the training set without {0} edges")]
    DegenerateSplit(Sign),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Polarity of a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn from_value(v: i8) -> Option<Sign> {
        match v {
            1 => Some(Sign::Positive),
            -1 => Some(Sign::Negative),
            _ => None,
        }
    }

    pub fn value(self) -> i8 {
        match self {
            Sign::Positive => 1,
            Sign::Negative => -1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }

    /// Sign of the product of two signs (balance rule).
    pub fn product(self, other: Sign) -> Sign {
        if self == other {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    fn parse_token(token: &str) -> Option<Sign> {
        match token {
            "1" | "+1" | "+" => Some(Sign::Positive),
            "-1" | "-" => Some(Sign::Negative),
            _ => None,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Positive => f.write_str("positive"),
            Sign::Negative => f.write_str("negative"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub src: usize,
    pub dst: usize,
    pub sign: Sign,
}

impl EdgeRecord {
    pub fn new(src: usize, dst: usize, sign: Sign) -> Self {
        Self { src, dst, sign }
    }

    /// Orientation-free key of the node pair.
    pub fn key(&self) -> (usize, usize) {
        if self.src <= self.dst {
            (self.src, self.dst)
        } else {
            (self.dst, self.src)
        }
    }
}

/// How to resolve `(i, j, s)` and `(j, i, t)` with `s != t`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConflictPolicy {
    #[default]
    NegativeWins,
    Drop,
    FirstWins,
}

impl FromStr for ConflictPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "negative-wins" => Ok(ConflictPolicy::NegativeWins),
            "drop" => Ok(ConflictPolicy::Drop),
            "first-wins" => Ok(ConflictPolicy::FirstWins),
            other => Err(format!("unknown conflict policy `{other}` (expected negative-wins, drop or first-wins)")),
        }
    }
}

impl fmt::Display for ConflictPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConflictPolicy::NegativeWins => "negative-wins",
            ConflictPolicy::Drop => "drop",
            ConflictPolicy::FirstWins => "first-wins",
        })
    }
}

/// Counters for everything silently discarded while building a graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildReport {
    pub self_loops: usize,
    pub duplicates: usize,
    pub conflicts: usize,
}

/// Undirected signed graph with dense node indices `0..node_count`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedGraph {
    labels: Vec<String>,
    edges: Vec<EdgeRecord>,
    positive: Vec<Vec<usize>>,
    negative: Vec<Vec<usize>>,
}

impl SignedGraph {
    /// Builds a graph from edges that are already free of self-loops and
    /// duplicate pairs.
    fn from_clean_edges(labels: Vec<String>, edges: Vec<EdgeRecord>) -> Self {
        let n = labels.len();
        let mut positive = vec![Vec::new(); n];
        let mut negative = vec![Vec::new(); n];
        for e in &edges {
            let lists = match e.sign {
                Sign::Positive => &mut positive,
                Sign::Negative => &mut negative,
            };
            lists[e.src].push(e.dst);
            lists[e.dst].push(e.src);
        }
        for list in positive.iter_mut().chain(negative.iter_mut()) {
            list.sort_unstable();
        }
        Self { labels, edges, positive, negative }
    }

    /// Graph with `node_count` nodes labelled by their index.
    pub fn from_edges(
        node_count: usize,
        raw: &[EdgeRecord],
        policy: ConflictPolicy,
    ) -> Result<(Self, BuildReport), GraphError> {
        let labels = (0..node_count).map(|i| i.to_string()).collect();
        Self::from_labelled_edges(labels, raw, policy)
    }

    pub fn from_labelled_edges(
        labels: Vec<String>,
        raw: &[EdgeRecord],
        policy: ConflictPolicy,
    ) -> Result<(Self, BuildReport), GraphError> {
        let node_count = labels.len();
        if let Some(e) = raw.iter().find(|e| e.src >= node_count || e.dst >= node_count) {
            return Err(GraphError::NodeOutOfRange { node: e.src.max(e.dst), node_count });
        }
        let (edges, report) = symmetrize_edges(raw, policy);
        Ok((Self::from_clean_edges(labels, edges), report))
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, node: usize) -> &str {
        &self.labels[node]
    }

    pub fn count_sign(&self, sign: Sign) -> usize {
        self.edges.iter().filter(|e| e.sign == sign).count()
    }

    /// Sorted per-sign neighbour list of `node`.
    pub fn neighbors(&self, node: usize, sign: Sign) -> Result<&[usize], GraphError> {
        if node >= self.node_count() {
            return Err(GraphError::NodeOutOfRange { node, node_count: self.node_count() });
        }
        Ok(self.neighbors_unchecked(node, sign))
    }

    pub(crate) fn neighbors_unchecked(&self, node: usize, sign: Sign) -> &[usize] {
        match sign {
            Sign::Positive => &self.positive[node],
            Sign::Negative => &self.negative[node],
        }
    }

    pub fn degree(&self, node: usize, sign: Sign) -> usize {
        self.neighbors_unchecked(node, sign).len()
    }

    /// Sign of the edge between `a` and `b`, if any.
    pub fn edge_sign(&self, a: usize, b: usize) -> Option<Sign> {
        if self.positive[a].binary_search(&b).is_ok() {
            Some(Sign::Positive)
        } else if self.negative[a].binary_search(&b).is_ok() {
            Some(Sign::Negative)
        } else {
            None
        }
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.edge_sign(a, b).is_some()
    }

    /// A graph over the same node set holding only `edges`.
    pub fn with_edges(&self, edges: Vec<EdgeRecord>) -> SignedGraph {
        SignedGraph::from_clean_edges(self.labels.clone(), edges)
    }

    /// Re-applies symmetrization to the stored edges.
    pub fn symmetrize(&self, policy: ConflictPolicy) -> (SignedGraph, BuildReport) {
        let (edges, report) = symmetrize_edges(&self.edges, policy);
        (SignedGraph::from_clean_edges(self.labels.clone(), edges), report)
    }

    /// Writes the graph as a `src dst sign` edge list using node labels.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write_edges(&mut out, &self.labels, &self.edges)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

pub fn write_edges<W: Write>(out: &mut W, labels: &[String], edges: &[EdgeRecord]) -> std::io::Result<()> {
    for e in edges {
        writeln!(out, "{} {} {}", labels[e.src], labels[e.dst], e.sign.value())?;
    }
    Ok(())
}

/// Collapses reciprocal and duplicate pairs, drops self-loops, and resolves
/// sign conflicts. Output order follows first occurrence of each pair.
pub fn symmetrize_edges(raw: &[EdgeRecord], policy: ConflictPolicy) -> (Vec<EdgeRecord>, BuildReport) {
    let mut report = BuildReport::default();
    let mut slot: HashMap<(usize, usize), usize> = HashMap::with_capacity(raw.len());
    // (edge, conflicted)
    let mut kept: Vec<(EdgeRecord, bool)> = Vec::with_capacity(raw.len());
    for e in raw {
        if e.src == e.dst {
            report.self_loops += 1;
            continue;
        }
        match slot.get(&e.key()) {
            None => {
                slot.insert(e.key(), kept.len());
                kept.push((*e, false));
            }
            Some(&idx) => {
                let (existing, conflicted) = &mut kept[idx];
                if existing.sign == e.sign {
                    report.duplicates += 1;
                    continue;
                }
                if !*conflicted {
                    report.conflicts += 1;
                    *conflicted = true;
                }
                match policy {
                    ConflictPolicy::NegativeWins => existing.sign = Sign::Negative,
                    ConflictPolicy::FirstWins | ConflictPolicy::Drop => {}
                }
            }
        }
    }
    let edges = kept
        .into_iter()
        .filter(|(_, conflicted)| !(policy == ConflictPolicy::Drop && *conflicted))
        .map(|(e, _)| e)
        .collect();
    (edges, report)
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    pub policy: ConflictPolicy,
    /// Labels registered, in order, before the file is read. Lets a training
    /// split keep nodes whose edges were all held out.
    pub preset_labels: Vec<String>,
}

/// Result of parsing an edge list.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub graph: SignedGraph,
    pub report: BuildReport,
}

/// Parses a whitespace separated `src dst sign` edge list. Labels are mapped
/// to dense indices in order of first appearance.
pub fn load_edge_list<R: BufRead>(source: R, options: &LoadOptions) -> Result<Loaded, GraphError> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut intern = |label: &str, labels: &mut Vec<String>| -> usize {
        if let Some(&i) = index.get(label) {
            return i;
        }
        let i = labels.len();
        index.insert(label.to_owned(), i);
        labels.push(label.to_owned());
        i
    };
    for label in &options.preset_labels {
        intern(label, &mut labels);
    }

    let mut raw = Vec::new();
    for (lineno, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let (Some(src), Some(dst), Some(sign)) = (fields.next(), fields.next(), fields.next()) else {
            return Err(GraphError::Malformed {
                line: lineno,
                message: format!("expected `src dst sign`, got `{trimmed}`"),
            });
        };
        let sign =
            Sign::parse_token(sign).ok_or_else(|| GraphError::BadSign { line: lineno, token: sign.to_owned() })?;
        let src = intern(src, &mut labels);
        let dst = intern(dst, &mut labels);
        raw.push(EdgeRecord::new(src, dst, sign));
    }
    if labels.is_empty() {
        return Err(GraphError::Empty);
    }
    let (graph, report) = SignedGraph::from_labelled_edges(labels, &raw, options.policy)?;
    Ok(Loaded { graph, report })
}

/// How held-out edges are drawn.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitMode {
    #[default]
    Uniform,
    /// Apply the ratios separately to positive and negative edges.
    Stratified,
}

#[derive(Debug, Clone)]
pub struct SplitBundle {
    pub train: SignedGraph,
    pub validation: Vec<EdgeRecord>,
    pub test: Vec<EdgeRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl SplitRatios {
    pub fn new(train: f64, validation: f64, test: f64) -> Result<Self, GraphError> {
        let r = SplitRatios { train, validation, test };
        let parts = [train, validation, test];
        let ok = parts.iter().all(|p| p.is_finite() && *p >= 0.0)
            && train > 0.0
            && (parts.iter().sum::<f64>() - 1.0).abs() <= 1e-9;
        if ok {
            Ok(r)
        } else {
            Err(GraphError::BadRatios((train, validation, test)))
        }
    }

    /// Ratios for reconstruction runs: train on everything.
    pub fn reconstruction() -> Self {
        SplitRatios { train: 1.0, validation: 0.0, test: 0.0 }
    }
}

/// Largest-remainder apportionment of `total` items over `ratios`.
pub fn apportion(total: usize, ratios: &[f64]) -> Vec<usize> {
    let exact: Vec<f64> = ratios.iter().map(|r| r * total as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..ratios.len()).collect();
    // Stable sort keeps earlier parts first on equal remainders.
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra)
    });
    for &i in order.iter().cycle().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// Randomly partitions the edges of `graph` into train/validation/test.
pub fn split_edges(
    graph: &SignedGraph,
    ratios: SplitRatios,
    mode: SplitMode,
    seed: u64,
) -> Result<SplitBundle, GraphError> {
    let mut rng = stream(seed, Purpose::Split, 0);
    let parts = [ratios.train, ratios.validation, ratios.test];
    let groups: Vec<Vec<EdgeRecord>> = match mode {
        SplitMode::Uniform => vec![graph.edges.clone()],
        SplitMode::Stratified => [Sign::Positive, Sign::Negative]
            .iter()
            .map(|&s| graph.edges.iter().copied().filter(|e| e.sign == s).collect())
            .collect(),
    };
    let mut train = Vec::new();
    let mut validation = Vec::new();
    let mut test = Vec::new();
    for mut group in groups {
        group.shuffle(&mut rng);
        let counts = apportion(group.len(), &parts);
        let mut rest = group.into_iter();
        train.extend(rest.by_ref().take(counts[0]));
        validation.extend(rest.by_ref().take(counts[1]));
        test.extend(rest);
    }
    for sign in [Sign::Positive, Sign::Negative] {
        if !train.iter().any(|e| e.sign == sign) {
            return Err(GraphError::DegenerateSplit(sign));
        }
    }
    Ok(SplitBundle { train: graph.with_edges(train), validation, test })
}

/// Per-sign degree histograms (degree -> node count).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeStats {
    pub positive: BTreeMap<usize, usize>,
    pub negative: BTreeMap<usize, usize>,
}

impl DegreeStats {
    pub fn histogram(&self, sign: Sign) -> &BTreeMap<usize, usize> {
        match sign {
            Sign::Positive => &self.positive,
            Sign::Negative => &self.negative,
        }
    }
}

pub fn degree_stats(graph: &SignedGraph) -> DegreeStats {
    let hist = |sign| {
        let mut h = BTreeMap::new();
        for node in 0..graph.node_count() {
            *h.entry(graph.degree(node, sign)).or_insert(0) += 1;
        }
        h
    };
    DegreeStats { positive: hist(Sign::Positive), negative: hist(Sign::Negative) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn load(text: &str) -> Loaded {
        load_edge_list(text.as_bytes(), &LoadOptions::default()).unwrap()
    }

    fn e(src: usize, dst: usize, s: i8) -> EdgeRecord {
        EdgeRecord::new(src, dst, Sign::from_value(s).unwrap())
    }

    #[test]
    fn loads_numeric_edge_list() {
        let g = load("0 1 1\n1 2 -1\n").graph;
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.edge_sign(0, 1), Some(Sign::Positive));
        assert_eq!(g.edge_sign(1, 2), Some(Sign::Negative));
        assert_eq!(g.edge_sign(2, 1), Some(Sign::Negative));
        assert_eq!(g.edge_sign(0, 2), None);
    }

    #[test]
    fn loads_symbolic_labels_and_skips_comments() {
        let g = load("# comment\na b +\n").graph;
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.labels(), &["a".to_string(), "b".to_string()]);
        assert_eq!(g.edges(), &[e(0, 1, 1)]);
    }

    #[test]
    fn self_loop_dropped_and_counted() {
        let loaded = load("0 0 1\n");
        assert_eq!(loaded.report.self_loops, 1);
        assert_eq!(loaded.graph.edge_count(), 0);
    }

    #[test]
    fn tabs_and_extra_fields_are_accepted() {
        let g = load("x\t\ty   -1 ignored\n").graph;
        assert_eq!(g.edges(), &[e(0, 1, -1)]);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = load_edge_list("0 1 1\n\n1 2\n".as_bytes(), &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, GraphError::Malformed { line: 3, .. }), "{err}");
    }

    #[test]
    fn bad_sign_rejected() {
        let err = load_edge_list("0 1 2\n".as_bytes(), &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, GraphError::BadSign { line: 1, .. }));
    }

    #[test]
    fn empty_input_rejected() {
        let err = load_edge_list("# nothing\n\n".as_bytes(), &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, GraphError::Empty));
    }

    #[test]
    fn preset_labels_keep_isolated_nodes() {
        let opts = LoadOptions { preset_labels: vec!["z".into(), "a".into()], ..Default::default() };
        let g = load_edge_list("a b 1\n".as_bytes(), &opts).unwrap().graph;
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.index_of("z"), Some(0));
        assert_eq!(g.edges(), &[e(1, 2, 1)]);
    }

    #[test]
    fn reciprocal_pair_collapses() {
        let (g, r) = SignedGraph::from_edges(2, &[e(0, 1, 1), e(1, 0, 1)], ConflictPolicy::NegativeWins).unwrap();
        assert_eq!(g.edges(), &[e(0, 1, 1)]);
        assert_eq!(r.duplicates, 1);
    }

    #[test]
    fn conflict_policies() {
        let raw = [e(0, 1, 1), e(1, 0, -1)];
        let (g, r) = SignedGraph::from_edges(2, &raw, ConflictPolicy::NegativeWins).unwrap();
        assert_eq!(g.edges(), &[e(0, 1, -1)]);
        assert_eq!(r.conflicts, 1);
        let (g, _) = SignedGraph::from_edges(2, &raw, ConflictPolicy::Drop).unwrap();
        assert_eq!(g.edge_count(), 0);
        let (g, _) = SignedGraph::from_edges(2, &raw, ConflictPolicy::FirstWins).unwrap();
        assert_eq!(g.edges(), &[e(0, 1, 1)]);
    }

    #[test]
    fn out_of_range_endpoint_rejected() {
        let err = SignedGraph::from_edges(2, &[e(0, 5, 1)], ConflictPolicy::Drop).unwrap_err();
        assert!(matches!(err, GraphError::NodeOutOfRange { node: 5, .. }));
    }

    #[test]
    fn neighbors_sorted_per_sign() {
        let (g, _) = SignedGraph::from_edges(3, &[e(0, 1, 1), e(0, 2, -1)], ConflictPolicy::default()).unwrap();
        assert_eq!(g.neighbors(0, Sign::Positive).unwrap(), &[1]);
        assert_eq!(g.neighbors(0, Sign::Negative).unwrap(), &[2]);
        assert!(g.neighbors(1, Sign::Negative).unwrap().is_empty());
        assert!(matches!(g.neighbors(3, Sign::Positive), Err(GraphError::NodeOutOfRange { .. })));
    }

    #[test]
    fn apportion_largest_remainder() {
        assert_eq!(apportion(100, &[0.8, 0.1, 0.1]), vec![80, 10, 10]);
        assert_eq!(apportion(7, &[0.8, 0.1, 0.1]), vec![5, 1, 1]);
        assert_eq!(apportion(9, &[0.8, 0.1, 0.1]), vec![7, 1, 1]);
        assert_eq!(apportion(3, &[1.0, 0.0, 0.0]), vec![3, 0, 0]);
        assert_eq!(apportion(0, &[0.5, 0.25, 0.25]), vec![0, 0, 0]);
    }

    fn hundred_edge_graph() -> SignedGraph {
        let mut raw = Vec::new();
        for i in 0..100 {
            let s = if i % 4 == 0 { -1 } else { 1 };
            raw.push(e(i, i + 1, s));
        }
        SignedGraph::from_edges(101, &raw, ConflictPolicy::default()).unwrap().0
    }

    #[test]
    fn split_counts_and_determinism() {
        let g = hundred_edge_graph();
        let r = SplitRatios::new(0.8, 0.1, 0.1).unwrap();
        let a = split_edges(&g, r, SplitMode::Uniform, 7).unwrap();
        assert_eq!(a.train.edge_count(), 80);
        assert_eq!(a.validation.len(), 10);
        assert_eq!(a.test.len(), 10);
        assert_eq!(a.train.node_count(), 101);
        let b = split_edges(&g, r, SplitMode::Uniform, 7).unwrap();
        assert_eq!(a.train.edges(), b.train.edges());
        assert_eq!(a.validation, b.validation);
        assert_eq!(a.test, b.test);
        let c = split_edges(&g, r, SplitMode::Uniform, 8).unwrap();
        assert_ne!(a.test, c.test);
    }

    #[test]
    fn stratified_split_preserves_sign_ratio() {
        let g = hundred_edge_graph();
        let r = SplitRatios::new(0.8, 0.1, 0.1).unwrap();
        let s = split_edges(&g, r, SplitMode::Stratified, 1).unwrap();
        assert_eq!(s.train.count_sign(Sign::Negative), 20);
        assert_eq!(s.train.count_sign(Sign::Positive), 60);
    }

    #[test]
    fn reconstruction_split_keeps_everything() {
        let g = hundred_edge_graph();
        let s = split_edges(&g, SplitRatios::reconstruction(), SplitMode::Uniform, 3).unwrap();
        assert_eq!(s.train.edge_count(), 100);
        assert!(s.validation.is_empty() && s.test.is_empty());
        let got: HashSet<_> = s.train.edges().iter().map(|e| e.key()).collect();
        let want: HashSet<_> = g.edges().iter().map(|e| e.key()).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn split_rejects_bad_ratios_and_single_sign_train() {
        assert!(SplitRatios::new(0.8, 0.1, 0.2).is_err());
        assert!(SplitRatios::new(0.0, 0.5, 0.5).is_err());
        assert!(SplitRatios::new(1.2, -0.1, -0.1).is_err());
        let (g, _) = SignedGraph::from_edges(3, &[e(0, 1, 1), e(1, 2, 1)], ConflictPolicy::default()).unwrap();
        let err = split_edges(&g, SplitRatios::reconstruction(), SplitMode::Uniform, 0).unwrap_err();
        assert!(matches!(err, GraphError::DegenerateSplit(Sign::Negative)));
    }

    #[test]
    fn star_degree_histogram() {
        let raw: Vec<_> = (1..10).map(|leaf| e(0, leaf, 1)).collect();
        let (g, _) = SignedGraph::from_edges(10, &raw, ConflictPolicy::default()).unwrap();
        let d = degree_stats(&g);
        assert_eq!(d.positive, BTreeMap::from([(1, 9), (9, 1)]));
        assert_eq!(d.negative, BTreeMap::from([(0, 10)]));
    }

    #[test]
    fn degree_histogram_edge_cases() {
        let (g, _) = SignedGraph::from_edges(5, &[], ConflictPolicy::default()).unwrap();
        let d = degree_stats(&g);
        assert_eq!(d.positive, BTreeMap::from([(0, 5)]));
        assert_eq!(d.negative, BTreeMap::from([(0, 5)]));
        let (g, _) = SignedGraph::from_edges(2, &[e(0, 1, -1)], ConflictPolicy::default()).unwrap();
        assert_eq!(degree_stats(&g).negative, BTreeMap::from([(1, 2)]));
    }
}
