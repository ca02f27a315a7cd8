//! Hierarchy diagnostics for a trained embedding.
//!
//! Nodes near the origin of the ball behave like roots of a latent hierarchy
//! and nodes near the boundary like leaves. These helpers summarize that
//! picture: equal-count radius bands with per-band degree statistics, the
//! norm versus mean-distance profile, and a log-log power-law fit of a degree
//! histogram.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{Sign, SignedGraph};
use crate::manifold::{distance_unchecked, norm, EmbeddingStore};
use crate::rng::{stream, Purpose};

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("band count must be between 1 and {nodes}, got {bands}")]
    BadBandCount { bands: usize, nodes: usize },
    #[error("embedding has {rows} node rows but the graph has {nodes} nodes")]
    RowMismatch { rows: usize, nodes: usize },
    #[error("need at least {needed} nodes, have {have}")]
    TooFewNodes { needed: usize, have: usize },
    #[error("power-law fit needs at least 3 distinct degrees >= {degree_min}, found {found}")]
    InsufficientSupport { degree_min: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandSummary {
    /// 0 is the innermost band.
    pub band: usize,
    pub nodes: Vec<usize>,
    pub mean_positive_degree: f64,
    pub mean_negative_degree: f64,
    /// `inf` when the band has no negative edges.
    pub degree_ratio: f64,
    pub mean_norm: f64,
}

/// Sorts nodes by norm and cuts them into `band_count` contiguous groups of
/// equal size; the first `N mod B` bands take one extra node.
pub fn radius_bands(
    store: &EmbeddingStore,
    graph: &SignedGraph,
    band_count: usize,
) -> Result<Vec<BandSummary>, AnalysisError> {
    let n = graph.node_count();
    if store.node_rows() != n {
        return Err(AnalysisError::RowMismatch { rows: store.node_rows(), nodes: n });
    }
    if band_count == 0 || band_count > n {
        return Err(AnalysisError::BadBandCount { bands: band_count, nodes: n });
    }
    let norms: Vec<f64> = (0..n).map(|i| norm(store.row(i))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[a].total_cmp(&norms[b]).then(a.cmp(&b)));

    let base = n / band_count;
    let extra = n % band_count;
    let mut bands = Vec::with_capacity(band_count);
    let mut start = 0;
    for band in 0..band_count {
        let size = base + usize::from(band < extra);
        let nodes = order[start..start + size].to_vec();
        start += size;
        let mean = |f: &dyn Fn(usize) -> f64| nodes.iter().map(|&i| f(i)).sum::<f64>() / size as f64;
        let mean_positive_degree = mean(&|i| graph.degree(i, Sign::Positive) as f64);
        let mean_negative_degree = mean(&|i| graph.degree(i, Sign::Negative) as f64);
        let degree_ratio =
            if mean_negative_degree == 0.0 { f64::INFINITY } else { mean_positive_degree / mean_negative_degree };
        let mean_norm = mean(&|i| norms[i]);
        bands.push(BandSummary { band, nodes, mean_positive_degree, mean_negative_degree, degree_ratio, mean_norm });
    }
    Ok(bands)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileRow {
    pub node: usize,
    pub norm: f64,
    pub mean_distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileOptions {
    /// Above this many nodes the mean distance is estimated from a sample.
    pub exact_cutoff: usize,
    pub sample_size: usize,
    pub seed: u64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self { exact_cutoff: 5000, sample_size: 1000, seed: 0 }
    }
}

/// Per node: norm and mean Poincaré distance to every other node, sorted by
/// norm. Exact computation is `O(N^2)`; above `exact_cutoff` nodes each mean
/// is estimated from `sample_size` partners drawn with replacement.
pub fn centrality_profile(store: &EmbeddingStore, options: &ProfileOptions) -> Result<Vec<ProfileRow>, AnalysisError> {
    let n = store.node_rows();
    if n < 2 {
        return Err(AnalysisError::TooFewNodes { needed: 2, have: n });
    }
    let exact = n <= options.exact_cutoff;
    let mut rows: Vec<ProfileRow> = (0..n)
        .into_par_iter()
        .map(|i| {
            let ui = store.row(i);
            let mean_distance = if exact {
                let total: f64 = (0..n).filter(|&j| j != i).map(|j| distance_unchecked(ui, store.row(j))).sum();
                total / (n - 1) as f64
            } else {
                let mut rng = stream(options.seed, Purpose::Profile, i as u64);
                let draws = options.sample_size.max(1);
                let total: f64 = (0..draws)
                    .map(|_| {
                        // Uniform over the other n - 1 nodes.
                        let mut j = rng.random_range(0..n - 1);
                        if j >= i {
                            j += 1;
                        }
                        distance_unchecked(ui, store.row(j))
                    })
                    .sum();
                total / draws as f64
            };
            ProfileRow { node: i, norm: norm(ui), mean_distance }
        })
        .collect();
    rows.sort_by(|a, b| a.norm.total_cmp(&b.norm).then(a.node.cmp(&b.node)));
    Ok(rows)
}

/// Least-squares line through `(ln degree, ln count)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit {
    /// Negated slope, so `count ~ degree^-exponent`.
    pub exponent: f64,
    pub degree_min: usize,
    pub degree_max: usize,
    pub r_squared: f64,
    pub support: usize,
}

/// Count-weighted log-log regression of a degree histogram over degrees
/// `>= degree_min` (never below 1) with non-zero counts. A quick diagnostic,
/// not a maximum likelihood estimator.
pub fn powerlaw_summary(histogram: &BTreeMap<usize, usize>, degree_min: usize) -> Result<PowerLawFit, AnalysisError> {
    let degree_min = degree_min.max(1);
    // (ln k, ln count, weight). Counts are weighted by themselves: the log of a
    // Poisson count has variance ~1/count, so sparse tail bins are noisy.
    let points: Vec<(f64, f64, f64)> = histogram
        .range(degree_min..)
        .filter(|(_, &c)| c > 0)
        .map(|(&k, &c)| ((k as f64).ln(), (c as f64).ln(), c as f64))
        .collect();
    if points.len() < 3 {
        return Err(AnalysisError::InsufficientSupport { degree_min, found: points.len() });
    }
    let total_w: f64 = points.iter().map(|p| p.2).sum();
    let mean_x = points.iter().map(|p| p.2 * p.0).sum::<f64>() / total_w;
    let mean_y = points.iter().map(|p| p.2 * p.1).sum::<f64>() / total_w;
    let sxx: f64 = points.iter().map(|p| p.2 * (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| p.2 * (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let syy: f64 = points.iter().map(|p| p.2 * (p.1 - mean_y).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = points.iter().map(|p| p.2 * (p.1 - (intercept + slope * p.0)).powi(2)).sum();
    // A flat histogram is fitted exactly by the horizontal line.
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    let degree_max = *histogram.range(degree_min..).rfind(|(_, &c)| c > 0).map(|(k, _)| k).unwrap_or(&degree_min);
    Ok(PowerLawFit { exponent: -slope, degree_min, degree_max, r_squared, support: points.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{ConflictPolicy, EdgeRecord};

    fn ring_store(n: usize, radius_of: impl Fn(usize) -> f64) -> EmbeddingStore {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let a = i as f64 * 2.399;
                let r = radius_of(i);
                vec![r * a.cos(), r * a.sin()]
            })
            .collect();
        EmbeddingStore::from_rows(&rows, 2, 1e-5).unwrap()
    }

    fn path_graph(n: usize) -> SignedGraph {
        let raw: Vec<_> = (0..n - 1)
            .map(|i| EdgeRecord::new(i, i + 1, if i % 3 == 0 { Sign::Negative } else { Sign::Positive }))
            .collect();
        SignedGraph::from_edges(n, &raw, ConflictPolicy::default()).unwrap().0
    }

    #[test]
    fn bands_of_equal_size() {
        let g = path_graph(10);
        let s = ring_store(10, |i| 0.05 + 0.08 * ((i * 7) % 10) as f64);
        let bands = radius_bands(&s, &g, 5).unwrap();
        assert_eq!(bands.len(), 5);
        assert!(bands.iter().all(|b| b.nodes.len() == 2));
        for w in bands.windows(2) {
            assert!(w[0].mean_norm <= w[1].mean_norm);
        }
        let mut all: Vec<usize> = bands.iter().flat_map(|b| b.nodes.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn remainder_goes_to_inner_bands() {
        let g = path_graph(11);
        let s = ring_store(11, |i| 0.01 * (i + 1) as f64);
        let sizes: Vec<usize> = radius_bands(&s, &g, 3).unwrap().iter().map(|b| b.nodes.len()).collect();
        assert_eq!(sizes, vec![4, 4, 3]);
    }

    #[test]
    fn single_band_is_global_average() {
        let g = path_graph(10);
        let s = ring_store(10, |_| 0.3);
        let b = &radius_bands(&s, &g, 1).unwrap()[0];
        let pos = g.count_sign(Sign::Positive) as f64;
        assert!((b.mean_positive_degree - 2.0 * pos / 10.0).abs() < 1e-12);
    }

    #[test]
    fn ratio_without_negatives_is_infinite() {
        let raw = [EdgeRecord::new(0, 1, Sign::Positive)];
        let g = SignedGraph::from_edges(2, &raw, ConflictPolicy::default()).unwrap().0;
        let s = ring_store(2, |_| 0.2);
        let b = radius_bands(&s, &g, 1).unwrap();
        assert!(b[0].degree_ratio.is_infinite());
    }

    #[test]
    fn band_errors() {
        let g = path_graph(4);
        let s = ring_store(4, |_| 0.2);
        assert!(matches!(radius_bands(&s, &g, 0), Err(AnalysisError::BadBandCount { .. })));
        assert!(matches!(radius_bands(&s, &g, 5), Err(AnalysisError::BadBandCount { .. })));
        let s = ring_store(3, |_| 0.2);
        assert!(matches!(radius_bands(&s, &g, 2), Err(AnalysisError::RowMismatch { .. })));
    }

    #[test]
    fn profile_symmetric_pair() {
        let s = EmbeddingStore::from_rows(&[vec![0.4, 0.0], vec![-0.4, 0.0]], 2, 1e-5).unwrap();
        let p = centrality_profile(&s, &ProfileOptions::default()).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p[0].norm, p[1].norm);
        assert_eq!(p[0].mean_distance, p[1].mean_distance);
        let d = crate::manifold::distance(s.row(0), s.row(1)).unwrap();
        assert_eq!(p[0].mean_distance, d);
    }

    #[test]
    fn origin_is_most_central_on_a_ring() {
        let mut rows = vec![vec![0.0, 0.0]];
        for i in 0..12 {
            let a = i as f64 * std::f64::consts::TAU / 12.0;
            rows.push(vec![0.6 * a.cos(), 0.6 * a.sin()]);
        }
        let s = EmbeddingStore::from_rows(&rows, 2, 1e-5).unwrap();
        let p = centrality_profile(&s, &ProfileOptions::default()).unwrap();
        assert_eq!(p[0].node, 0);
        assert!(p[1..].iter().all(|r| r.mean_distance > p[0].mean_distance));
    }

    #[test]
    fn sampled_profile_close_to_exact() {
        let s = ring_store(200, |i| 0.1 + 0.004 * i as f64);
        let exact = centrality_profile(&s, &ProfileOptions::default()).unwrap();
        let opts = ProfileOptions { exact_cutoff: 10, sample_size: 4000, seed: 3 };
        let sampled = centrality_profile(&s, &opts).unwrap();
        for (a, b) in exact.iter().zip(&sampled) {
            assert_eq!(a.node, b.node);
            assert!((a.mean_distance - b.mean_distance).abs() / a.mean_distance < 0.05);
        }
    }

    #[test]
    fn profile_needs_two_nodes() {
        let s = EmbeddingStore::from_rows(&[vec![0.1]], 1, 1e-5).unwrap();
        assert_eq!(
            centrality_profile(&s, &ProfileOptions::default()),
            Err(AnalysisError::TooFewNodes { needed: 2, have: 1 })
        );
    }

    #[test]
    fn powerlaw_on_synthetic_histogram() {
        let hist: BTreeMap<usize, usize> =
            (1..=50).map(|k| (k, (1000.0 * (k as f64).powi(-2)).round() as usize)).collect();
        let fit = powerlaw_summary(&hist, 1).unwrap();
        assert!((fit.exponent - 2.0).abs() <= 0.1, "{fit:?}");
        assert!(fit.r_squared > 0.9);
    }

    #[test]
    fn powerlaw_flat_and_insufficient() {
        let flat: BTreeMap<usize, usize> = (1..=10).map(|k| (k, 7)).collect();
        let fit = powerlaw_summary(&flat, 1).unwrap();
        assert!(fit.exponent.abs() < 1e-12);
        let two = BTreeMap::from([(1, 5), (2, 3)]);
        assert_eq!(powerlaw_summary(&two, 1), Err(AnalysisError::InsufficientSupport { degree_min: 1, found: 2 }));
        // Degree zero never enters the fit.
        let with_zero = BTreeMap::from([(0, 100), (1, 5), (2, 3)]);
        assert!(powerlaw_summary(&with_zero, 0).is_err());
    }
}
