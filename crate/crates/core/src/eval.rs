//! Link-sign evaluation: distance scores, threshold fitting, F1 and AUC, and
//! edge-feature export for external classifiers.
//!
//! Note on reconstruction runs: when the threshold is fitted on the same edge
//! set it is scored on, the reported F1 values are optimistically biased.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EdgeRecord, Sign};
use crate::manifold::{distance_unchecked, EmbeddingStore};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("row {row} is not a node row (node rows: {node_rows})")]
    RowOutOfRange { row: usize, node_rows: usize },
    #[error("evaluation needs at least one {0} edge")]
    MissingClass(Sign),
    #[error("no edges to evaluate")]
    Empty,
    #[error("length mismatch: {predicted} predictions vs {truth} labels")]
    LengthMismatch { predicted: usize, truth: usize },
    #[error("score is NaN")]
    NanScore,
    #[error("unknown edge operator `{0}` (expected hadamard, l1, l2, concat or average)")]
    UnknownOperator(String),
}

/// Likelihood-of-positive score `-d(u_i, u_j)`.
pub fn score(store: &EmbeddingStore, i: usize, j: usize) -> Result<f64, EvalError> {
    let node_rows = store.node_rows();
    for row in [i, j] {
        if row >= node_rows {
            return Err(EvalError::RowOutOfRange { row, node_rows });
        }
    }
    Ok(-distance_unchecked(store.row(i), store.row(j)))
}

pub fn score_edges(store: &EmbeddingStore, edges: &[EdgeRecord]) -> Result<Vec<f64>, EvalError> {
    edges.iter().map(|e| score(store, e.src, e.dst)).collect()
}

/// `+1` above the threshold, `-1` below; ties go to `+1`.
pub fn classify_score(score: f64, threshold: f64) -> Sign {
    if score >= threshold {
        Sign::Positive
    } else {
        Sign::Negative
    }
}

pub fn classify_scores(scores: &[f64], threshold: f64) -> Vec<Sign> {
    scores.iter().map(|&s| classify_score(s, threshold)).collect()
}

pub fn classify(store: &EmbeddingStore, edges: &[EdgeRecord], threshold: f64) -> Result<Vec<Sign>, EvalError> {
    Ok(classify_scores(&score_edges(store, edges)?, threshold))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn f1(tp: usize, fp: usize, fn_: usize) -> f64 {
    let precision = ratio(tp as f64, (tp + fp) as f64);
    let recall = ratio(tp as f64, (tp + fn_) as f64);
    ratio(2.0 * precision * recall, precision + recall)
}

impl Confusion {
    pub fn from_predictions(predicted: &[Sign], truth: &[Sign]) -> Confusion {
        let mut c = Confusion::default();
        for (p, t) in predicted.iter().zip(truth) {
            match (p, t) {
                (Sign::Positive, Sign::Positive) => c.tp += 1,
                (Sign::Positive, Sign::Negative) => c.fp += 1,
                (Sign::Negative, Sign::Negative) => c.tn += 1,
                (Sign::Negative, Sign::Positive) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn f1_positive(&self) -> f64 {
        f1(self.tp, self.fp, self.fn_)
    }

    /// F1 with the negative class treated as the positive one.
    pub fn f1_negative(&self) -> f64 {
        f1(self.tn, self.fn_, self.fp)
    }

    pub fn macro_f1(&self) -> f64 {
        (self.f1_positive() + self.f1_negative()) / 2.0
    }

    /// Class-frequency weighted mean of the per-class F1 scores.
    pub fn micro_f1(&self) -> f64 {
        let total = (self.tp + self.fp + self.tn + self.fn_) as f64;
        let positives = (self.tp + self.fn_) as f64;
        let negatives = (self.tn + self.fp) as f64;
        ratio(positives, total) * self.f1_positive() + ratio(negatives, total) * self.f1_negative()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct F1Scores {
    pub macro_f1: f64,
    pub micro_f1: f64,
    pub confusion: Confusion,
}

pub fn f1_scores(predicted: &[Sign], truth: &[Sign]) -> Result<F1Scores, EvalError> {
    if predicted.len() != truth.len() {
        return Err(EvalError::LengthMismatch { predicted: predicted.len(), truth: truth.len() });
    }
    if truth.is_empty() {
        return Err(EvalError::Empty);
    }
    let confusion = Confusion::from_predictions(predicted, truth);
    Ok(F1Scores { macro_f1: confusion.macro_f1(), micro_f1: confusion.micro_f1(), confusion })
}

/// Probability that a random positive edge outscores a random negative one,
/// ties counting one half. Sort-based, `O((P + Q) log(P + Q))`.
pub fn auc(positive: &[f64], negative: &[f64]) -> Result<f64, EvalError> {
    if positive.is_empty() {
        return Err(EvalError::MissingClass(Sign::Positive));
    }
    if negative.is_empty() {
        return Err(EvalError::MissingClass(Sign::Negative));
    }
    if positive.iter().chain(negative).any(|s| s.is_nan()) {
        return Err(EvalError::NanScore);
    }
    let mut neg = negative.to_vec();
    neg.sort_by(f64::total_cmp);
    let (mut wins, mut ties) = (0u64, 0u64);
    for &p in positive {
        let below = neg.partition_point(|&n| n < p);
        let not_above = neg.partition_point(|&n| n <= p);
        wins += below as u64;
        ties += (not_above - below) as u64;
    }
    let pairs = positive.len() as f64 * negative.len() as f64;
    Ok((wins as f64 + 0.5 * ties as f64) / pairs)
}

/// Objective maximized by [`fit_threshold`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdMetric {
    #[default]
    MacroF1,
    MicroF1,
}

impl ThresholdMetric {
    fn of(self, c: &Confusion) -> f64 {
        match self {
            ThresholdMetric::MacroF1 => c.macro_f1(),
            ThresholdMetric::MicroF1 => c.micro_f1(),
        }
    }
}

impl FromStr for ThresholdMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "macro-f1" => Ok(ThresholdMetric::MacroF1),
            "micro-f1" => Ok(ThresholdMetric::MicroF1),
            other => Err(format!("unknown threshold metric `{other}` (expected macro-f1 or micro-f1)")),
        }
    }
}

impl fmt::Display for ThresholdMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThresholdMetric::MacroF1 => "macro-f1",
            ThresholdMetric::MicroF1 => "micro-f1",
        })
    }
}

/// Largest double strictly below `x`.
fn below(x: f64) -> f64 {
    if x == 0.0 {
        return -f64::from_bits(1);
    }
    let bits = x.to_bits();
    if x > 0.0 {
        f64::from_bits(bits - 1)
    } else {
        f64::from_bits(bits + 1)
    }
}

fn above(x: f64) -> f64 {
    -below(-x)
}

/// Grid search over the midpoints between consecutive distinct scores, plus
/// one sentinel below the minimum (everything positive) and one above the
/// maximum (everything negative). Ties in the objective resolve to the
/// smallest threshold.
pub fn fit_threshold_scores(scores: &[f64], truth: &[Sign], metric: ThresholdMetric) -> Result<f64, EvalError> {
    if scores.len() != truth.len() {
        return Err(EvalError::LengthMismatch { predicted: scores.len(), truth: truth.len() });
    }
    for sign in [Sign::Positive, Sign::Negative] {
        if !truth.contains(&sign) {
            return Err(EvalError::MissingClass(sign));
        }
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(EvalError::NanScore);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let lowest = scores[order[0]];
    let highest = scores[order[order.len() - 1]];
    if lowest == highest {
        return Ok(below(lowest));
    }

    // Sweep from "everything positive" upward; each step moves one block of
    // equal scores to the negative side.
    let positives = truth.iter().filter(|&&s| s == Sign::Positive).count();
    let mut c = Confusion { tp: positives, fp: truth.len() - positives, tn: 0, fn_: 0 };
    let mut best_threshold = below(lowest);
    let mut best_value = metric.of(&c);
    let mut idx = 0;
    while idx < order.len() {
        let value = scores[order[idx]];
        while idx < order.len() && scores[order[idx]] == value {
            match truth[order[idx]] {
                Sign::Positive => {
                    c.tp -= 1;
                    c.fn_ += 1;
                }
                Sign::Negative => {
                    c.fp -= 1;
                    c.tn += 1;
                }
            }
            idx += 1;
        }
        let threshold = if idx < order.len() {
            let next = scores[order[idx]];
            let mid = value + (next - value) / 2.0;
            // Adjacent doubles: the midpoint rounds onto `value`.
            if mid > value {
                mid
            } else {
                next
            }
        } else {
            above(highest)
        };
        let v = metric.of(&c);
        if v > best_value {
            best_value = v;
            best_threshold = threshold;
        }
    }
    Ok(best_threshold)
}

pub fn fit_threshold(
    store: &EmbeddingStore,
    validation: &[EdgeRecord],
    metric: ThresholdMetric,
) -> Result<f64, EvalError> {
    let scores = score_edges(store, validation)?;
    let truth: Vec<Sign> = validation.iter().map(|e| e.sign).collect();
    fit_threshold_scores(&scores, &truth, metric)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalReport {
    pub macro_f1: f64,
    pub micro_f1: f64,
    pub auc: f64,
    pub threshold: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub edges: usize,
}

/// Scores an edge set against a fitted threshold.
pub fn evaluate(store: &EmbeddingStore, test: &[EdgeRecord], threshold: f64) -> Result<EvalReport, EvalError> {
    if test.is_empty() {
        return Err(EvalError::Empty);
    }
    let scores = score_edges(store, test)?;
    evaluate_scores(&scores, test, threshold)
}

pub fn evaluate_scores(scores: &[f64], test: &[EdgeRecord], threshold: f64) -> Result<EvalReport, EvalError> {
    if test.is_empty() {
        return Err(EvalError::Empty);
    }
    let truth: Vec<Sign> = test.iter().map(|e| e.sign).collect();
    let predicted = classify_scores(scores, threshold);
    let f1 = f1_scores(&predicted, &truth)?;
    let score_of =
        |sign: Sign| -> Vec<f64> { scores.iter().zip(&truth).filter(|(_, &t)| t == sign).map(|(&s, _)| s).collect() };
    let (pos, neg) = (score_of(Sign::Positive), score_of(Sign::Negative));
    let auc = auc(&pos, &neg)?;
    Ok(EvalReport {
        macro_f1: f1.macro_f1,
        micro_f1: f1.micro_f1,
        auc,
        threshold,
        tp: f1.confusion.tp,
        fp: f1.confusion.fp,
        tn: f1.confusion.tn,
        fn_: f1.confusion.fn_,
        edges: test.len(),
    })
}

/// Maps two node vectors to one edge vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeOperator {
    Hadamard,
    L1,
    L2,
    Concat,
    Average,
}

impl EdgeOperator {
    pub fn output_dim(self, dim: usize) -> usize {
        match self {
            EdgeOperator::Concat => 2 * dim,
            _ => dim,
        }
    }

    pub fn apply(self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let zip = u.iter().zip(v);
        match self {
            EdgeOperator::Hadamard => zip.map(|(a, b)| a * b).collect(),
            EdgeOperator::L1 => zip.map(|(a, b)| (a - b).abs()).collect(),
            EdgeOperator::L2 => zip.map(|(a, b)| (a - b) * (a - b)).collect(),
            EdgeOperator::Concat => u.iter().chain(v).copied().collect(),
            EdgeOperator::Average => zip.map(|(a, b)| (a + b) / 2.0).collect(),
        }
    }
}

impl FromStr for EdgeOperator {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hadamard" => Ok(EdgeOperator::Hadamard),
            "l1" | "l1-weight" => Ok(EdgeOperator::L1),
            "l2" | "l2-weight" => Ok(EdgeOperator::L2),
            "concat" | "concate" => Ok(EdgeOperator::Concat),
            "average" => Ok(EdgeOperator::Average),
            other => Err(EvalError::UnknownOperator(other.to_owned())),
        }
    }
}

impl fmt::Display for EdgeOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeOperator::Hadamard => "hadamard",
            EdgeOperator::L1 => "l1",
            EdgeOperator::L2 => "l2",
            EdgeOperator::Concat => "concat",
            EdgeOperator::Average => "average",
        })
    }
}

pub fn edge_features(store: &EmbeddingStore, op: EdgeOperator, i: usize, j: usize) -> Result<Vec<f64>, EvalError> {
    let node_rows = store.node_rows();
    for row in [i, j] {
        if row >= node_rows {
            return Err(EvalError::RowOutOfRange { row, node_rows });
        }
    }
    Ok(op.apply(store.row(i), store.row(j)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use Sign::{Negative as N, Positive as P};

    fn brute_auc(pos: &[f64], neg: &[f64]) -> f64 {
        let mut total = 0.0;
        for p in pos {
            for n in neg {
                total += if p > n {
                    1.0
                } else if p == n {
                    0.5
                } else {
                    0.0
                };
            }
        }
        total / (pos.len() as f64 * neg.len() as f64)
    }

    #[test]
    fn score_examples() {
        let s = EmbeddingStore::from_rows(&[vec![0.3, 0.0], vec![0.0, 0.0], vec![0.3, 0.0]], 2, 1e-5).unwrap();
        assert_eq!(score(&s, 0, 2).unwrap(), 0.0);
        assert_eq!(score(&s, 0, 1).unwrap(), score(&s, 1, 0).unwrap());
        assert!((score(&s, 0, 1).unwrap() + 0.619_039).abs() < 1e-6);
        assert_eq!(score(&s, 0, 3), Err(EvalError::RowOutOfRange { row: 3, node_rows: 3 }));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_score(0.5, 0.0), P);
        assert_eq!(classify_score(-2.0, 0.0), N);
        assert_eq!(classify_score(0.0, 0.0), P);
    }

    #[test]
    fn f1_hand_computed_confusion() {
        // 10 positives (8 right), 5 negatives (4 right).
        let mut truth = vec![P; 10];
        truth.extend(vec![N; 5]);
        let mut pred = vec![P; 8];
        pred.extend([N, N]);
        pred.extend([N, N, N, N, P]);
        let f = f1_scores(&pred, &truth).unwrap();
        assert_eq!(f.confusion, Confusion { tp: 8, fp: 1, tn: 4, fn_: 2 });
        assert!((f.confusion.f1_positive() - 0.842_11).abs() < 1e-5);
        assert!((f.confusion.f1_negative() - 0.727_27).abs() < 1e-5);
        assert!((f.macro_f1 - 0.784_69).abs() < 1e-5);
        assert!((f.micro_f1 - 0.803_83).abs() < 1e-5);
    }

    #[test]
    fn f1_degenerate_cases() {
        let f = f1_scores(&[P, N, P], &[P, N, P]).unwrap();
        assert_eq!((f.macro_f1, f.micro_f1), (1.0, 1.0));
        let f = f1_scores(&[P, P, P], &[N, N, N]).unwrap();
        assert_eq!(f.confusion.f1_positive(), 0.0);
        assert_eq!(f.confusion.f1_negative(), 0.0);
        assert_eq!(f.macro_f1, 0.0);
        assert!(matches!(f1_scores(&[P], &[P, N]), Err(EvalError::LengthMismatch { .. })));
        assert_eq!(f1_scores(&[], &[]), Err(EvalError::Empty));
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[0.9, 0.8], &[0.1]).unwrap(), 1.0);
        assert_eq!(auc(&[0.5], &[0.5]).unwrap(), 0.5);
        assert_eq!(auc(&[0.9, 0.2], &[0.5]).unwrap(), brute_auc(&[0.9, 0.2], &[0.5]));
        assert_eq!(auc(&[0.9, 0.2], &[0.5]).unwrap(), 0.5);
        assert_eq!(auc(&[], &[0.5]), Err(EvalError::MissingClass(P)));
        assert_eq!(auc(&[0.1], &[]), Err(EvalError::MissingClass(N)));
    }

    #[test]
    fn threshold_examples() {
        let t = fit_threshold_scores(&[-1.0, -3.0], &[P, N], ThresholdMetric::MacroF1).unwrap();
        assert_eq!(t, -2.0);
        let t =
            fit_threshold_scores(&[-1.0, -1.2, -3.0, -2.5, -2.9], &[P, P, N, N, N], ThresholdMetric::MacroF1).unwrap();
        assert!(t > -2.5 && t < -1.2);
        let scores = [0.4, 0.4, 0.4];
        let t = fit_threshold_scores(&scores, &[P, N, P], ThresholdMetric::MacroF1).unwrap();
        assert!(t < 0.4 && 0.4 - t < 1e-15);
        assert_eq!(classify_scores(&scores, t), vec![P, P, P]);
        assert_eq!(
            fit_threshold_scores(&[0.1, 0.2], &[P, P], ThresholdMetric::MacroF1),
            Err(EvalError::MissingClass(N))
        );
    }

    #[test]
    fn threshold_prefers_smallest_on_ties() {
        let t = fit_threshold_scores(&[0.0, 1.0], &[N, P], ThresholdMetric::MacroF1).unwrap();
        assert_eq!(t, 0.5);
        let t = fit_threshold_scores(&[1.0, 0.0], &[N, P], ThresholdMetric::MacroF1).unwrap();
        // Candidates: below 0 (all positive, macro 1/3), 0.5 (all wrong,
        // macro 0), above 1 (all negative, macro 1/3). Tie -> smallest.
        assert!(t < 0.0);
    }

    #[test]
    fn evaluate_requires_edges() {
        let s = EmbeddingStore::from_rows(&[vec![0.0, 0.0]], 2, 1e-5).unwrap();
        assert_eq!(evaluate(&s, &[], 0.0), Err(EvalError::Empty));
    }

    #[test]
    fn edge_operators() {
        let u = [0.1, -0.2];
        let v = [0.3, 0.4];
        assert_eq!(EdgeOperator::Hadamard.apply(&u, &u), vec![0.1 * 0.1, 0.2 * 0.2]);
        assert_eq!(EdgeOperator::L1.apply(&u, &u), vec![0.0, 0.0]);
        assert_eq!(EdgeOperator::Concat.apply(&u, &v).len(), 4);
        assert_eq!(EdgeOperator::Concat.output_dim(2), 4);
        let l2 = EdgeOperator::L2.apply(&u, &v);
        assert!((l2[0] - 0.04).abs() < 1e-15 && (l2[1] - 0.36).abs() < 1e-15);
        assert_eq!(EdgeOperator::Average.apply(&u, &v), vec![0.2, 0.1]);
        assert_eq!("cosine".parse::<EdgeOperator>(), Err(EvalError::UnknownOperator("cosine".into())));
    }
}
