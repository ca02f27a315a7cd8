//! Signed-network embedding in the Poincaré ball.
//!
//! Nodes of a graph with positive and negative links are placed in the open
//! unit ball so that, for every node, friends sit closer than enemies under the
//! hyperbolic metric. The pipeline is:
//!
//! 1. [`graph`]: load, symmetrize and split signed edge lists.
//! 2. [`sampler`]: build (anchor, friend, enemy) triples, augmenting nodes that
//!    lack one link polarity.
//! 3. [`trainer`]: minimise a margin hinge loss with Riemannian SGD over
//!    [`manifold`] primitives.
//! 4. [`eval`]: link-sign prediction with a fitted distance threshold.
//! 5. [`analysis`]: radius bands, centrality profiles, power-law summaries.

pub mod analysis;
pub mod cli;
pub mod eval;
pub mod graph;
pub mod io;
pub mod manifold;
pub mod rng;
pub mod sampler;
pub mod trainer;

pub use eval::{auc, evaluate, fit_threshold, EvalReport, ThresholdMetric};
pub use graph::{ConflictPolicy, EdgeRecord, Sign, SignedGraph};
pub use manifold::{distance, EmbeddingStore, PoincarePoint, Retraction};
pub use sampler::{Strategy, Triple};
pub use trainer::{train, TrainConfig, TrainReport, Trainer};
