//! Extended adjacency and triple sampling.
//!
//! Many nodes of real signed networks have links of only one polarity, so they
//! never appear as anchors of an (anchor, friend, enemy) triple. The
//! [`AugmentedGraph`] fills those gaps with inferred neighbours according to a
//! [`Strategy`] and then serves uniformly sampled triples.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Sign, SignedGraph};
use crate::rng::{stream, Purpose};

/// Cap on balance-inferred neighbours per node and sign.
pub const BALANCE_INFERENCE_CAP: usize = 5;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SampleError {
    #[error("augmentation needs at least 2 nodes, graph has {0}")]
    TooFewNodes(usize),
    #[error("no node has both a positive and a negative neighbour")]
    NoEligibleAnchor,
    #[error("batch size must be at least 1")]
    EmptyBatch,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Give a deficient node one random non-adjacent node of the missing sign.
    RandomSampling,
    /// Two shared synthetic nodes: a universal friend and a universal enemy.
    #[default]
    VirtualNode,
    /// Infer the missing sign along two-hop paths (product of signs).
    BalanceInference,
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(Strategy::RandomSampling),
            "virtual" => Ok(Strategy::VirtualNode),
            "balance" => Ok(Strategy::BalanceInference),
            other => Err(format!("unknown augmentation `{other}` (expected random, virtual or balance)")),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::RandomSampling => "random",
            Strategy::VirtualNode => "virtual",
            Strategy::BalanceInference => "balance",
        })
    }
}

/// (anchor, friend, enemy) row indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Triple {
    pub anchor: usize,
    pub positive: usize,
    pub negative: usize,
}

impl Triple {
    pub fn new(anchor: usize, positive: usize, negative: usize) -> Self {
        Self { anchor, positive, negative }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentSummary {
    pub inferred_positive: usize,
    pub inferred_negative: usize,
    /// Nodes that still lack one polarity and are never anchors.
    pub ineligible: usize,
    pub eligible: usize,
}

/// Signed graph plus inferred neighbours. Inferred entries are directed: they
/// are added only to the deficient node's own lists.
#[derive(Debug, Clone)]
pub struct AugmentedGraph {
    base: SignedGraph,
    strategy: Strategy,
    positive: Vec<Vec<usize>>,
    negative: Vec<Vec<usize>>,
    virtual_positive: Option<usize>,
    virtual_negative: Option<usize>,
    anchors: Vec<usize>,
    summary: AugmentSummary,
}

impl AugmentedGraph {
    pub fn base(&self) -> &SignedGraph {
        &self.base
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    /// Number of embedding rows needed: real nodes plus virtual ones.
    pub fn row_count(&self) -> usize {
        self.base.node_count() + self.virtual_count()
    }

    pub fn virtual_count(&self) -> usize {
        usize::from(self.virtual_positive.is_some()) + usize::from(self.virtual_negative.is_some())
    }

    pub fn virtual_nodes(&self) -> (Option<usize>, Option<usize>) {
        (self.virtual_positive, self.virtual_negative)
    }

    pub fn is_virtual(&self, row: usize) -> bool {
        row >= self.base.node_count()
    }

    /// Extended neighbour list; empty for virtual rows.
    pub fn extended(&self, node: usize, sign: Sign) -> &[usize] {
        let lists = match sign {
            Sign::Positive => &self.positive,
            Sign::Negative => &self.negative,
        };
        lists.get(node).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Nodes with at least one extended neighbour of each sign.
    pub fn anchors(&self) -> &[usize] {
        &self.anchors
    }

    pub fn summary(&self) -> AugmentSummary {
        self.summary
    }

    /// Whether `t` is a legal triple of the extended adjacency.
    pub fn is_valid_triple(&self, t: &Triple) -> bool {
        t.anchor != t.positive
            && t.anchor != t.negative
            && self.extended(t.anchor, Sign::Positive).binary_search(&t.positive).is_ok()
            && self.extended(t.anchor, Sign::Negative).binary_search(&t.negative).is_ok()
    }

    /// Draws one triple: uniform anchor among eligible nodes, then uniform
    /// friend and enemy from its extended lists.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Triple, SampleError> {
        if self.anchors.is_empty() {
            return Err(SampleError::NoEligibleAnchor);
        }
        let anchor = self.anchors[rng.random_range(0..self.anchors.len())];
        let pos = &self.positive[anchor];
        let neg = &self.negative[anchor];
        let positive = pos[rng.random_range(0..pos.len())];
        let negative = neg[rng.random_range(0..neg.len())];
        Ok(Triple { anchor, positive, negative })
    }
}

/// Builds the extended adjacency of `graph` under `strategy`.
///
/// Only nodes with at least one real edge are augmented; isolated nodes stay
/// out of the anchor pool.
pub fn build_extended(graph: &SignedGraph, strategy: Strategy, seed: u64) -> Result<AugmentedGraph, SampleError> {
    let n = graph.node_count();
    if n < 2 {
        return Err(SampleError::TooFewNodes(n));
    }
    let mut positive: Vec<Vec<usize>> = (0..n).map(|i| graph.neighbors_unchecked(i, Sign::Positive).to_vec()).collect();
    let mut negative: Vec<Vec<usize>> = (0..n).map(|i| graph.neighbors_unchecked(i, Sign::Negative).to_vec()).collect();
    let mut summary = AugmentSummary::default();
    let mut rng = stream(seed, Purpose::Augment, 0);
    let (mut virtual_positive, mut virtual_negative) = (None, None);

    let deficient = |node: usize, sign: Sign| graph.degree(node, sign) == 0 && graph.degree(node, sign.flip()) > 0;

    match strategy {
        Strategy::VirtualNode => {
            let vp = n;
            let vn = n + 1;
            virtual_positive = Some(vp);
            virtual_negative = Some(vn);
            for node in 0..n {
                if deficient(node, Sign::Positive) {
                    positive[node].push(vp);
                    summary.inferred_positive += 1;
                }
                if deficient(node, Sign::Negative) {
                    negative[node].push(vn);
                    summary.inferred_negative += 1;
                }
            }
        }
        Strategy::RandomSampling => {
            for node in 0..n {
                for sign in [Sign::Positive, Sign::Negative] {
                    if deficient(node, sign) {
                        if let Some(pick) = random_non_adjacent(graph, node, &mut rng) {
                            push_inferred(&mut positive, &mut negative, &mut summary, node, pick, sign);
                        }
                    }
                }
            }
        }
        Strategy::BalanceInference => {
            for node in 0..n {
                for sign in [Sign::Positive, Sign::Negative] {
                    if !deficient(node, sign) {
                        continue;
                    }
                    let inferred = balance_candidates(graph, node, sign);
                    if inferred.is_empty() {
                        if let Some(pick) = random_non_adjacent(graph, node, &mut rng) {
                            push_inferred(&mut positive, &mut negative, &mut summary, node, pick, sign);
                        }
                    } else {
                        for pick in inferred {
                            push_inferred(&mut positive, &mut negative, &mut summary, node, pick, sign);
                        }
                    }
                }
            }
        }
    }

    for list in positive.iter_mut().chain(negative.iter_mut()) {
        list.sort_unstable();
    }
    let anchors: Vec<usize> = (0..n).filter(|&i| !positive[i].is_empty() && !negative[i].is_empty()).collect();
    summary.eligible = anchors.len();
    summary.ineligible = n - anchors.len();
    Ok(AugmentedGraph {
        base: graph.clone(),
        strategy,
        positive,
        negative,
        virtual_positive,
        virtual_negative,
        anchors,
        summary,
    })
}

fn push_inferred(
    positive: &mut [Vec<usize>],
    negative: &mut [Vec<usize>],
    summary: &mut AugmentSummary,
    node: usize,
    other: usize,
    sign: Sign,
) {
    match sign {
        Sign::Positive => {
            positive[node].push(other);
            summary.inferred_positive += 1;
        }
        Sign::Negative => {
            negative[node].push(other);
            summary.inferred_negative += 1;
        }
    }
}

/// Uniform node that is neither `node` nor one of its real neighbours.
fn random_non_adjacent(graph: &SignedGraph, node: usize, rng: &mut ChaCha8Rng) -> Option<usize> {
    let n = graph.node_count();
    let blocked = 1 + graph.degree(node, Sign::Positive) + graph.degree(node, Sign::Negative);
    if blocked >= n {
        return None;
    }
    // Rejection sampling is fast unless the node is adjacent to almost everything.
    if blocked * 2 <= n {
        loop {
            let pick = rng.random_range(0..n);
            if pick != node && !graph.is_adjacent(node, pick) {
                return Some(pick);
            }
        }
    }
    let free: Vec<usize> = (0..n).filter(|&c| c != node && !graph.is_adjacent(node, c)).collect();
    Some(free[rng.random_range(0..free.len())])
}

/// Non-adjacent two-hop endpoints whose balance vote has the wanted sign.
///
/// Each path `node - mid - target` votes with the product of its two signs;
/// a target is inferred with the sign of its vote total. Strongest votes win,
/// ties broken by node index, at most [`BALANCE_INFERENCE_CAP`] per sign.
fn balance_candidates(graph: &SignedGraph, node: usize, wanted: Sign) -> Vec<usize> {
    let mut votes: BTreeMap<usize, i64> = BTreeMap::new();
    for first in [Sign::Positive, Sign::Negative] {
        for &mid in graph.neighbors_unchecked(node, first) {
            for second in [Sign::Positive, Sign::Negative] {
                for &target in graph.neighbors_unchecked(mid, second) {
                    if target == node || graph.is_adjacent(node, target) {
                        continue;
                    }
                    *votes.entry(target).or_insert(0) += i64::from(first.product(second).value());
                }
            }
        }
    }
    let want = i64::from(wanted.value());
    let mut picks: Vec<(usize, i64)> = votes.into_iter().filter(|(_, v)| v.signum() == want).collect();
    picks.sort_by(|a, b| b.1.abs().cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
    picks.into_iter().take(BALANCE_INFERENCE_CAP).map(|(t, _)| t).collect()
}

/// `batch_size` independent triples.
pub fn sample_batch<R: Rng + ?Sized>(
    aug: &AugmentedGraph,
    batch_size: usize,
    rng: &mut R,
) -> Result<Vec<Triple>, SampleError> {
    if batch_size == 0 {
        return Err(SampleError::EmptyBatch);
    }
    (0..batch_size).map(|_| aug.sample(rng)).collect()
}

/// Deterministic batches for one epoch. The epoch index selects the random
/// stream, so every epoch differs while staying reproducible.
pub struct EpochStream<'a> {
    aug: &'a AugmentedGraph,
    rng: ChaCha8Rng,
    remaining: usize,
    batch_size: usize,
}

pub fn epoch_stream(
    aug: &AugmentedGraph,
    triples_per_epoch: usize,
    batch_size: usize,
    seed: u64,
    epoch: u64,
) -> Result<EpochStream<'_>, SampleError> {
    if batch_size == 0 {
        return Err(SampleError::EmptyBatch);
    }
    if aug.anchors.is_empty() {
        return Err(SampleError::NoEligibleAnchor);
    }
    Ok(EpochStream { aug, rng: stream(seed, Purpose::Sampling, epoch), remaining: triples_per_epoch, batch_size })
}

impl Iterator for EpochStream<'_> {
    type Item = Vec<Triple>;

    fn next(&mut self) -> Option<Vec<Triple>> {
        if self.remaining == 0 {
            return None;
        }
        let take = self.batch_size.min(self.remaining);
        self.remaining -= take;
        // Anchors were checked non-empty at construction.
        Some((0..take).map(|_| self.aug.sample(&mut self.rng).expect("eligible anchors")).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{ConflictPolicy, EdgeRecord};

    fn graph(n: usize, edges: &[(usize, usize, i8)]) -> SignedGraph {
        let raw: Vec<_> = edges.iter().map(|&(a, b, s)| EdgeRecord::new(a, b, Sign::from_value(s).unwrap())).collect();
        SignedGraph::from_edges(n, &raw, ConflictPolicy::default()).unwrap().0
    }

    #[test]
    fn unique_triple() {
        let g = graph(3, &[(0, 1, 1), (0, 2, -1)]);
        let aug = build_extended(&g, Strategy::RandomSampling, 0).unwrap();
        let mut rng = stream(0, Purpose::Sampling, 0);
        // Nodes 1 and 2 are augmented too, but their triples are forced.
        for t in sample_batch(&aug, 50, &mut rng).unwrap() {
            assert!(aug.is_valid_triple(&t));
            if t.anchor == 0 {
                assert_eq!(t, Triple::new(0, 1, 2));
            }
        }
        let aug = build_extended(&g, Strategy::BalanceInference, 0).unwrap();
        // Node 1: friend 0, enemy of friend is 2 -> inferred enemy 2.
        assert_eq!(aug.extended(1, Sign::Negative), &[2]);
    }

    #[test]
    fn virtual_node_makes_one_sided_nodes_eligible() {
        let g = graph(6, &[(3, 5, 1), (0, 1, 1), (0, 2, -1)]);
        let aug = build_extended(&g, Strategy::VirtualNode, 0).unwrap();
        let (vp, vn) = aug.virtual_nodes();
        assert_eq!((vp, vn), (Some(6), Some(7)));
        assert_eq!(aug.row_count(), 8);
        assert!(aug.is_valid_triple(&Triple::new(3, 5, 7)));
        assert!(!aug.anchors().contains(&6) && !aug.anchors().contains(&7));
        // Node 4 is isolated and stays out.
        assert!(!aug.anchors().contains(&4));
        assert_eq!(aug.extended(0, Sign::Positive), &[1]);
        assert_eq!(aug.extended(0, Sign::Negative), &[2]);
    }

    #[test]
    fn balance_infers_enemy_of_friend() {
        let g = graph(3, &[(0, 1, 1), (1, 2, -1)]);
        let aug = build_extended(&g, Strategy::BalanceInference, 0).unwrap();
        assert_eq!(aug.extended(0, Sign::Negative), &[2]);
        assert_eq!(aug.extended(0, Sign::Positive), &[1]);
        // Node 2 only reaches 0 as an enemy of its enemy's friend; no
        // positive two-hop vote exists, so it falls back to random sampling,
        // which has no non-adjacent candidate other than 0.
        assert_eq!(aug.extended(2, Sign::Positive), &[0]);
    }

    #[test]
    fn balance_respects_cap() {
        // Hub 0 is a friend of 1; 1 is an enemy of 2..=9.
        let mut edges = vec![(0, 1, 1)];
        for t in 2..10 {
            edges.push((1, t, -1));
        }
        let g = graph(10, &edges);
        let aug = build_extended(&g, Strategy::BalanceInference, 0).unwrap();
        assert_eq!(aug.extended(0, Sign::Negative), &[2, 3, 4, 5, 6]);
    }

    #[test]
    fn node_with_both_signs_unchanged() {
        let g = graph(4, &[(0, 1, 1), (0, 2, -1), (2, 3, 1)]);
        for s in [Strategy::RandomSampling, Strategy::VirtualNode, Strategy::BalanceInference] {
            let aug = build_extended(&g, s, 1).unwrap();
            assert_eq!(aug.extended(0, Sign::Positive), g.neighbors(0, Sign::Positive).unwrap());
            assert_eq!(aug.extended(0, Sign::Negative), g.neighbors(0, Sign::Negative).unwrap());
        }
    }

    #[test]
    fn errors() {
        let g = graph(1, &[]);
        assert_eq!(build_extended(&g, Strategy::VirtualNode, 0).unwrap_err(), SampleError::TooFewNodes(1));
        let g = graph(3, &[]);
        let aug = build_extended(&g, Strategy::RandomSampling, 0).unwrap();
        let mut rng = stream(0, Purpose::Sampling, 0);
        assert_eq!(sample_batch(&aug, 1, &mut rng).unwrap_err(), SampleError::NoEligibleAnchor);
        let g = graph(3, &[(0, 1, 1), (0, 2, -1)]);
        let aug = build_extended(&g, Strategy::RandomSampling, 0).unwrap();
        assert_eq!(sample_batch(&aug, 0, &mut rng).unwrap_err(), SampleError::EmptyBatch);
    }

    #[test]
    fn batch_size_contract() {
        let g = graph(3, &[(0, 1, 1), (0, 2, -1)]);
        let aug = build_extended(&g, Strategy::VirtualNode, 0).unwrap();
        let mut rng = stream(9, Purpose::Sampling, 0);
        assert_eq!(sample_batch(&aug, 17, &mut rng).unwrap().len(), 17);
    }

    #[test]
    fn epoch_stream_batching_and_determinism() {
        let g = graph(4, &[(0, 1, 1), (0, 2, -1), (1, 3, 1), (2, 3, -1)]);
        let aug = build_extended(&g, Strategy::VirtualNode, 0).unwrap();
        let batches: Vec<_> = epoch_stream(&aug, 1000, 100, 5, 0).unwrap().collect();
        assert_eq!(batches.len(), 10);
        assert!(batches.iter().all(|b| b.len() == 100));
        let again: Vec<_> = epoch_stream(&aug, 1000, 100, 5, 0).unwrap().collect();
        assert_eq!(batches, again);
        let next: Vec<_> = epoch_stream(&aug, 1000, 100, 5, 1).unwrap().collect();
        assert_ne!(batches, next);
        let partial: Vec<_> = epoch_stream(&aug, 250, 100, 5, 0).unwrap().map(|b| b.len()).collect();
        assert_eq!(partial, vec![100, 100, 50]);
    }
}
