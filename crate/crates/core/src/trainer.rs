//! Riemannian SGD on the structural-balance hinge objective
//! `max(0, d(i, j) - d(i, k) + margin)` over sampled triples.
//!
//! Within a batch every triple's gradient is evaluated at the batch-start
//! positions and summed per row; rows are then retracted once each, in
//! ascending row order. Deterministic mode is bitwise reproducible.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::SignedGraph;
use crate::manifold::{
    add_partial, distance_unchecked, init_embeddings, riemannian_factor, EmbeddingStore, GeometryError, Retraction,
    DEFAULT_EPS, DEFAULT_INIT_RADIUS,
};
use crate::sampler::{build_extended, epoch_stream, AugmentSummary, AugmentedGraph, SampleError, Strategy, Triple};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("embedding has {rows} rows but the augmented graph needs {needed}")]
    RowMismatch { rows: usize, needed: usize },
    #[error("non-finite value at epoch {epoch}, batch {batch}: {detail}")]
    NonFinite { epoch: usize, batch: usize, detail: String },
    #[error("observer aborted training: {0}")]
    Observer(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LrDecay {
    Constant,
    /// `lr * (1 - step / total_steps)`.
    #[default]
    Linear,
}

impl FromStr for LrDecay {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "constant" => Ok(LrDecay::Constant),
            "linear" => Ok(LrDecay::Linear),
            other => Err(format!("unknown learning-rate decay `{other}` (expected constant or linear)")),
        }
    }
}

impl fmt::Display for LrDecay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LrDecay::Constant => "constant",
            LrDecay::Linear => "linear",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub dim: usize,
    pub margin: f64,
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// `None` means one triple per training edge.
    pub triples_per_epoch: Option<usize>,
    pub strategy: Strategy,
    pub retraction: Retraction,
    pub eps: f64,
    pub init_radius: f64,
    pub seed: u64,
    pub lr_decay: LrDecay,
    /// Only move the friend and the enemy of each triple.
    pub freeze_anchor: bool,
    /// Worker threads; anything above 1 is non-deterministic.
    pub threads: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            dim: 20,
            margin: 1.0,
            lr: 0.05,
            epochs: 100,
            batch_size: 512,
            triples_per_epoch: None,
            strategy: Strategy::VirtualNode,
            retraction: Retraction::Simple,
            eps: DEFAULT_EPS,
            init_radius: DEFAULT_INIT_RADIUS,
            seed: 0,
            lr_decay: LrDecay::Linear,
            freeze_anchor: false,
            threads: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: String| Err(TrainError::Config(m));
        if self.dim == 0 {
            return bad("dim must be positive".into());
        }
        if !(self.margin > 0.0 && self.margin.is_finite()) {
            return bad(format!("margin must be positive, got {}", self.margin));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.lr));
        }
        if !(self.eps > 0.0 && self.eps < 0.1) {
            return bad(format!("eps must lie in (0, 0.1), got {}", self.eps));
        }
        if !(self.init_radius > 0.0 && self.init_radius < 1.0) {
            return bad(format!("init radius must lie in (0, 1), got {}", self.init_radius));
        }
        if self.batch_size == 0 {
            return bad("batch size must be positive".into());
        }
        if self.triples_per_epoch == Some(0) {
            return bad("triples per epoch must be positive".into());
        }
        if self.threads == 0 {
            return bad("threads must be at least 1".into());
        }
        Ok(())
    }

    pub fn resolved_triples_per_epoch(&self, edge_count: usize) -> usize {
        self.triples_per_epoch.unwrap_or(edge_count).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    pub zero_loss_fraction: f64,
    pub max_norm: f64,
    pub seconds: f64,
    pub skipped: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs: Vec<EpochStats>,
    pub augmentation: AugmentSummary,
    pub triples_per_epoch: usize,
}

impl TrainReport {
    pub fn final_epoch(&self) -> usize {
        self.epochs.len()
    }

    pub fn losses(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.mean_loss).collect()
    }
}

/// Hinge loss of one triple.
pub fn triple_loss(store: &EmbeddingStore, t: &Triple, margin: f64) -> f64 {
    let pos = distance_unchecked(store.row(t.anchor), store.row(t.positive));
    let neg = distance_unchecked(store.row(t.anchor), store.row(t.negative));
    (pos - neg + margin).max(0.0)
}

/// Per-row Euclidean gradient contributions of one active triple.
struct TripleGrad {
    loss: f64,
    anchor: Option<Vec<f64>>,
    positive: Vec<f64>,
    negative: Vec<f64>,
}

fn triple_grad(
    store: &EmbeddingStore,
    t: &Triple,
    margin: f64,
    freeze_anchor: bool,
) -> Result<Option<TripleGrad>, GeometryError> {
    let loss = triple_loss(store, t, margin);
    if loss <= 0.0 {
        return Ok(None);
    }
    let (ui, uj, uk) = (store.row(t.anchor), store.row(t.positive), store.row(t.negative));
    let dim = store.dim();
    let mut positive = vec![0.0; dim];
    let mut negative = vec![0.0; dim];
    add_partial(uj, ui, 1.0, &mut positive)?;
    add_partial(uk, ui, -1.0, &mut negative)?;
    let anchor = if freeze_anchor {
        None
    } else {
        let mut g = vec![0.0; dim];
        add_partial(ui, uj, 1.0, &mut g)?;
        add_partial(ui, uk, -1.0, &mut g)?;
        Some(g)
    };
    Ok(Some(TripleGrad { loss, anchor, positive, negative }))
}

/// Outcome of a single-triple update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    /// Margin already satisfied; nothing moved.
    Inactive,
    Updated,
    /// Coincident points make the gradient undefined; nothing moved.
    Degenerate,
}

/// One RSGD step on a single triple. All gradients are taken at the current
/// positions before any row moves.
pub fn triple_step(
    store: &mut EmbeddingStore,
    t: &Triple,
    margin: f64,
    lr: f64,
    retraction: Retraction,
    freeze_anchor: bool,
) -> StepOutcome {
    match triple_grad(store, t, margin, freeze_anchor) {
        Ok(None) => StepOutcome::Inactive,
        Err(_) => StepOutcome::Degenerate,
        Ok(Some(g)) => {
            let mut updates = vec![(t.positive, g.positive), (t.negative, g.negative)];
            if let Some(a) = g.anchor {
                updates.push((t.anchor, a));
            }
            let steps: Vec<(usize, Vec<f64>)> = updates
                .into_iter()
                .map(|(row, grad)| {
                    let f = -lr * riemannian_factor(store.row(row));
                    (row, grad.into_iter().map(|x| f * x).collect())
                })
                .collect();
            let eps = store.eps();
            for (row, step) in steps {
                retraction.apply_in_place(store.row_mut(row), &step, eps);
            }
            StepOutcome::Updated
        }
    }
}

/// Summed per-row Euclidean gradients of one batch.
#[derive(Default)]
struct BatchAccum {
    grads: BTreeMap<usize, Vec<f64>>,
    loss_sum: f64,
    zero_loss: usize,
    skipped: usize,
}

impl BatchAccum {
    fn add_row(&mut self, row: usize, g: Vec<f64>) {
        match self.grads.get_mut(&row) {
            Some(acc) => acc.iter_mut().zip(&g).for_each(|(a, b)| *a += b),
            None => {
                self.grads.insert(row, g);
            }
        }
    }

    fn absorb(&mut self, store: &EmbeddingStore, t: &Triple, margin: f64, freeze_anchor: bool) {
        match triple_grad(store, t, margin, freeze_anchor) {
            Ok(None) => self.zero_loss += 1,
            Ok(Some(g)) => {
                self.loss_sum += g.loss;
                if let Some(a) = g.anchor {
                    self.add_row(t.anchor, a);
                }
                self.add_row(t.positive, g.positive);
                self.add_row(t.negative, g.negative);
            }
            Err(_) => self.skipped += 1,
        }
    }

    fn merge(mut self, other: BatchAccum) -> BatchAccum {
        for (row, g) in other.grads {
            self.add_row(row, g);
        }
        self.loss_sum += other.loss_sum;
        self.zero_loss += other.zero_loss;
        self.skipped += other.skipped;
        self
    }
}

/// Owns the augmented graph and the embedding while training runs.
pub struct Trainer {
    aug: AugmentedGraph,
    store: EmbeddingStore,
    config: TrainConfig,
    pool: Option<rayon::ThreadPool>,
}

impl Trainer {
    /// Builds the extended adjacency and a fresh seeded initialization.
    pub fn new(graph: &SignedGraph, config: TrainConfig) -> Result<Self, TrainError> {
        config.validate()?;
        let aug = build_extended(graph, config.strategy, config.seed)?;
        let store = init_embeddings(aug.row_count(), config.dim, config.init_radius, config.eps, config.seed)?;
        Self::with_store(aug, store, config)
    }

    /// Trains from a caller-supplied initial embedding.
    pub fn with_store(aug: AugmentedGraph, mut store: EmbeddingStore, config: TrainConfig) -> Result<Self, TrainError> {
        config.validate()?;
        if store.rows() != aug.row_count() {
            return Err(TrainError::RowMismatch { rows: store.rows(), needed: aug.row_count() });
        }
        if store.dim() != config.dim {
            return Err(TrainError::Config(format!(
                "initial embedding has dimension {}, config asks for {}",
                store.dim(),
                config.dim
            )));
        }
        if aug.anchors().is_empty() {
            return Err(SampleError::NoEligibleAnchor.into());
        }
        store.set_virtual_rows(aug.virtual_count());
        let pool = if config.threads > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(config.threads)
                    .build()
                    .map_err(|e| TrainError::Config(e.to_string()))?,
            )
        } else {
            None
        };
        Ok(Self { aug, store, config, pool })
    }

    pub fn store(&self) -> &EmbeddingStore {
        &self.store
    }

    pub fn augmented(&self) -> &AugmentedGraph {
        &self.aug
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn triples_per_epoch(&self) -> usize {
        self.config.resolved_triples_per_epoch(self.aug.base().edge_count())
    }

    fn batches_per_epoch(&self) -> usize {
        self.triples_per_epoch().div_ceil(self.config.batch_size)
    }

    fn learning_rate(&self, step: usize, total: usize) -> f64 {
        match self.config.lr_decay {
            LrDecay::Constant => self.config.lr,
            LrDecay::Linear => self.config.lr * (1.0 - step as f64 / total as f64),
        }
    }

    fn accumulate(&self, batch: &[Triple]) -> BatchAccum {
        let (margin, freeze) = (self.config.margin, self.config.freeze_anchor);
        let store = &self.store;
        match &self.pool {
            None => {
                let mut acc = BatchAccum::default();
                for t in batch {
                    acc.absorb(store, t, margin, freeze);
                }
                acc
            }
            Some(pool) => pool.install(|| {
                batch
                    .par_iter()
                    .fold(BatchAccum::default, |mut acc, t| {
                        acc.absorb(store, t, margin, freeze);
                        acc
                    })
                    .reduce(BatchAccum::default, BatchAccum::merge)
            }),
        }
    }

    /// Applies one batch; returns the accumulator for bookkeeping.
    fn apply_batch(&mut self, batch: &[Triple], lr: f64, epoch: usize, index: usize) -> Result<BatchAccum, TrainError> {
        let mut acc = self.accumulate(batch);
        if !acc.loss_sum.is_finite() {
            return Err(TrainError::NonFinite { epoch, batch: index, detail: format!("batch loss {}", acc.loss_sum) });
        }
        let eps = self.store.eps();
        let retraction = self.config.retraction;
        for (&row, grad) in acc.grads.iter_mut() {
            let f = -lr * riemannian_factor(self.store.row(row));
            grad.iter_mut().for_each(|g| *g *= f);
            let theta = self.store.row_mut(row);
            retraction.apply_in_place(theta, grad, eps);
            if theta.iter().any(|x| !x.is_finite()) {
                return Err(TrainError::NonFinite {
                    epoch,
                    batch: index,
                    detail: format!("row {row} became {theta:?}"),
                });
            }
        }
        Ok(acc)
    }

    /// Runs every epoch, calling `observer` after each one.
    pub fn run_with<F>(&mut self, mut observer: F) -> Result<TrainReport, TrainError>
    where
        F: FnMut(&EpochStats, &EmbeddingStore) -> Result<(), String>,
    {
        let triples = self.triples_per_epoch();
        let total_steps = self.config.epochs * self.batches_per_epoch();
        let mut report = TrainReport {
            epochs: Vec::with_capacity(self.config.epochs),
            augmentation: self.aug.summary(),
            triples_per_epoch: triples,
        };
        let mut step = 0usize;
        for epoch in 0..self.config.epochs {
            let started = Instant::now();
            let batches: Vec<Vec<Triple>> =
                epoch_stream(&self.aug, triples, self.config.batch_size, self.config.seed, epoch as u64)?.collect();
            let (mut loss_sum, mut zero, mut skipped, mut seen) = (0.0, 0usize, 0usize, 0usize);
            for (index, batch) in batches.iter().enumerate() {
                let lr = self.learning_rate(step, total_steps);
                step += 1;
                let acc = self.apply_batch(batch, lr, epoch, index)?;
                loss_sum += acc.loss_sum;
                zero += acc.zero_loss;
                skipped += acc.skipped;
                seen += batch.len();
            }
            let stats = EpochStats {
                epoch,
                mean_loss: loss_sum / seen as f64,
                zero_loss_fraction: zero as f64 / seen as f64,
                max_norm: self.store.max_norm(),
                seconds: started.elapsed().as_secs_f64(),
                skipped,
            };
            observer(&stats, &self.store).map_err(TrainError::Observer)?;
            report.epochs.push(stats);
        }
        Ok(report)
    }

    pub fn run(&mut self) -> Result<TrainReport, TrainError> {
        self.run_with(|_, _| Ok(()))
    }

    pub fn into_store(self) -> EmbeddingStore {
        self.store
    }
}

/// Trains an embedding of `graph` from a seeded initialization.
pub fn train(graph: &SignedGraph, config: &TrainConfig) -> Result<(EmbeddingStore, TrainReport), TrainError> {
    let mut trainer = Trainer::new(graph, config.clone())?;
    let report = trainer.run()?;
    Ok((trainer.into_store(), report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{distance, norm};

    fn store(rows: &[Vec<f64>]) -> EmbeddingStore {
        EmbeddingStore::from_rows(rows, rows[0].len(), 1e-5).unwrap()
    }

    #[test]
    fn loss_zero_when_margin_satisfied() {
        // d(i, j) = 2 artanh(0.1) ~ 0.2007, d(i, k) = 2 artanh(0.7) ~ 1.7346.
        let s = store(&[vec![0.0, 0.0], vec![0.1, 0.0], vec![-0.7, 0.0]]);
        assert_eq!(triple_loss(&s, &Triple::new(0, 1, 2), 1.0), 0.0);
    }

    #[test]
    fn loss_hand_value() {
        // Radii r with 2 artanh(r) = 1.0 and 1.5 give those distances from the origin.
        let r1 = (0.5f64).tanh();
        let r2 = (0.75f64).tanh();
        let s = store(&[vec![0.0, 0.0], vec![r1, 0.0], vec![0.0, r2]]);
        let l = triple_loss(&s, &Triple::new(0, 1, 2), 1.0);
        assert!((l - 0.5).abs() < 1e-12, "{l}");
        // Equal distances: loss is the margin.
        let s = store(&[vec![0.0, 0.0], vec![0.3, 0.0], vec![0.0, 0.3]]);
        assert!((triple_loss(&s, &Triple::new(0, 1, 2), 0.7) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn inactive_triple_leaves_store_untouched() {
        let mut s = store(&[vec![0.0, 0.0], vec![0.1, 0.0], vec![-0.7, 0.0]]);
        let before = s.clone();
        let out = triple_step(&mut s, &Triple::new(0, 1, 2), 1.0, 0.1, Retraction::Simple, false);
        assert_eq!(out, StepOutcome::Inactive);
        assert_eq!(s, before);
    }

    #[test]
    fn active_step_decreases_loss() {
        let s0 = store(&[vec![0.12, -0.3], vec![0.5, 0.2], vec![0.05, -0.25]]);
        let t = Triple::new(0, 1, 2);
        for retraction in [Retraction::Simple, Retraction::Exp] {
            let mut s = s0.clone();
            let before = triple_loss(&s, &t, 1.0);
            assert!(before > 0.0);
            assert_eq!(triple_step(&mut s, &t, 1.0, 1e-3, retraction, false), StepOutcome::Updated);
            let after = triple_loss(&s, &t, 1.0);
            assert!(after < before, "{retraction}: {after} !< {before}");
            assert!(s.max_norm() <= 1.0 - 1e-5);
        }
    }

    #[test]
    fn frozen_anchor_does_not_move() {
        let mut s = store(&[vec![0.12, -0.3], vec![0.5, 0.2], vec![0.05, -0.25]]);
        let anchor = s.row(0).to_vec();
        triple_step(&mut s, &Triple::new(0, 1, 2), 1.0, 1e-2, Retraction::Simple, true);
        assert_eq!(s.row(0), anchor.as_slice());
    }

    #[test]
    fn degenerate_triple_skipped() {
        let mut s = store(&[vec![0.1, 0.1], vec![0.1, 0.1], vec![0.3, 0.0]]);
        let before = s.clone();
        assert_eq!(
            triple_step(&mut s, &Triple::new(0, 1, 2), 1.0, 0.1, Retraction::Simple, false),
            StepOutcome::Degenerate
        );
        assert_eq!(s, before);
    }

    #[test]
    fn persistent_triple_pulls_friend_and_pushes_enemy() {
        let mut s = store(&[vec![0.1, 0.0], vec![0.0, 0.3], vec![0.0, -0.2]]);
        let t = Triple::new(0, 1, 2);
        let mut last_pos = f64::INFINITY;
        let mut last_neg = 0.0;
        for _ in 0..200 {
            triple_step(&mut s, &t, 50.0, 0.01, Retraction::Simple, false);
            let dp = distance(s.row(0), s.row(1)).unwrap();
            let dn = distance(s.row(0), s.row(2)).unwrap();
            if norm(s.row(2)) > 0.99 {
                break;
            }
            // Near coincidence a fixed-size step can overshoot the friend.
            assert!(dn >= last_neg - 1e-12, "{dn} < {last_neg}");
            assert!(dp <= last_pos + 1e-12 || last_pos < 0.05, "{dp} > {last_pos}");
            last_pos = dp;
            last_neg = dn;
        }
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        for bad in [
            TrainConfig { margin: 0.0, ..Default::default() },
            TrainConfig { lr: -1.0, ..Default::default() },
            TrainConfig { eps: 0.2, ..Default::default() },
            TrainConfig { dim: 0, ..Default::default() },
            TrainConfig { batch_size: 0, ..Default::default() },
            TrainConfig { threads: 0, ..Default::default() },
        ] {
            assert!(matches!(bad.validate(), Err(TrainError::Config(_))));
        }
    }
}
