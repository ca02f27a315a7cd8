//! C ABI over `signed_poincare`.
//!
//! Conventions:
//! - Every fallible function returns an [`SpStatus`]; results go through out
//!   pointers, which are written only on success.
//! - On failure, [`sp_last_error`] returns a message for the calling thread.
//! - Graphs and embeddings are opaque handles created by this library and
//!   released with [`sp_graph_free`] / [`sp_embedding_free`].
//! - Node indices refer to the dense `0..node_count` numbering of the graph a
//!   handle was built from. Enumerations are passed as `uint32_t` using the
//!   `SP_*` constants.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use signed_poincare::eval::{self, ThresholdMetric};
use signed_poincare::graph::{load_edge_list, LoadOptions};
use signed_poincare::io::EmbeddingFile;
use signed_poincare::manifold;
use signed_poincare::trainer::LrDecay;
use signed_poincare::{ConflictPolicy, EdgeRecord, Retraction, Sign, SignedGraph, Strategy, TrainConfig};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Geometry = 5,
    Training = 6,
    Evaluation = 7,
    Panic = 8,
}

pub const SP_POLICY_NEGATIVE_WINS: u32 = 0;
pub const SP_POLICY_DROP: u32 = 1;
pub const SP_POLICY_FIRST_WINS: u32 = 2;

pub const SP_STRATEGY_RANDOM: u32 = 0;
pub const SP_STRATEGY_VIRTUAL: u32 = 1;
pub const SP_STRATEGY_BALANCE: u32 = 2;

pub const SP_RETRACTION_SIMPLE: u32 = 0;
pub const SP_RETRACTION_EXP: u32 = 1;

pub const SP_LR_CONSTANT: u32 = 0;
pub const SP_LR_LINEAR: u32 = 1;

pub const SP_METRIC_MACRO_F1: u32 = 0;
pub const SP_METRIC_MICRO_F1: u32 = 1;

/// One signed edge; `sign` is +1 or -1.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpEdge {
    pub src: usize,
    pub dst: usize,
    pub sign: i8,
}

/// Training hyperparameters. Start from [`sp_train_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpTrainConfig {
    pub dim: usize,
    pub margin: f64,
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// 0 means one triple per training edge.
    pub triples_per_epoch: usize,
    pub strategy: u32,
    pub retraction: u32,
    pub lr_decay: u32,
    pub eps: f64,
    pub init_radius: f64,
    pub seed: u64,
    pub freeze_anchor: bool,
    /// Values above 1 give non-reproducible results.
    pub threads: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SpEvalReport {
    pub macro_f1: f64,
    pub micro_f1: f64,
    pub auc: f64,
    pub threshold: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_count: usize,
    pub edges: usize,
}

/// Opaque graph handle.
pub struct SpGraph {
    graph: SignedGraph,
}

/// Opaque embedding handle: node labels plus coordinates (virtual rows, if
/// any, are dropped).
pub struct SpEmbedding {
    file: EmbeddingFile,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(SpStatus, String);

impl Failure {
    fn new(status: SpStatus, message: impl ToString) -> Self {
        Failure(status, message.to_string())
    }
}

type FfiResult<T> = Result<T, Failure>;

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `body`, converting errors and panics into status codes.
fn guard(body: impl FnOnce() -> FfiResult<()>) -> SpStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => SpStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {message}"));
            SpStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, name: &str) -> FfiResult<()> {
    if p.is_null() {
        Err(Failure::new(SpStatus::NullPointer, format!("`{name}` is null")))
    } else {
        Ok(())
    }
}

/// # Safety
/// `p` must be null or point to `len` readable values; null is accepted only
/// when `len == 0`.
unsafe fn slice_arg<'a, T>(p: *const T, len: usize, name: &str) -> FfiResult<&'a [T]> {
    if len == 0 {
        return Ok(&[]);
    }
    non_null(p, name)?;
    Ok(unsafe { slice::from_raw_parts(p, len) })
}

/// # Safety
/// `p` must be null or a NUL-terminated string.
unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> FfiResult<&'a str> {
    non_null(p, name)?;
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Failure::new(SpStatus::InvalidArgument, format!("`{name}` is not UTF-8")))
}

fn policy(code: u32) -> FfiResult<ConflictPolicy> {
    match code {
        SP_POLICY_NEGATIVE_WINS => Ok(ConflictPolicy::NegativeWins),
        SP_POLICY_DROP => Ok(ConflictPolicy::Drop),
        SP_POLICY_FIRST_WINS => Ok(ConflictPolicy::FirstWins),
        _ => Err(Failure::new(SpStatus::InvalidArgument, format!("unknown conflict policy {code}"))),
    }
}

fn metric(code: u32) -> FfiResult<ThresholdMetric> {
    match code {
        SP_METRIC_MACRO_F1 => Ok(ThresholdMetric::MacroF1),
        SP_METRIC_MICRO_F1 => Ok(ThresholdMetric::MicroF1),
        _ => Err(Failure::new(SpStatus::InvalidArgument, format!("unknown threshold metric {code}"))),
    }
}

fn edges_arg(edges: &[SpEdge]) -> FfiResult<Vec<EdgeRecord>> {
    edges
        .iter()
        .map(|e| {
            let sign = Sign::from_value(e.sign).ok_or_else(|| {
                Failure::new(SpStatus::InvalidArgument, format!("edge sign must be +1 or -1, got {}", e.sign))
            })?;
            Ok(EdgeRecord::new(e.src, e.dst, sign))
        })
        .collect()
}

fn eval_failure(e: eval::EvalError) -> Failure {
    Failure::new(SpStatus::Evaluation, e)
}

fn config_from(c: &SpTrainConfig) -> FfiResult<TrainConfig> {
    let bad = |what: &str, v: u32| Failure::new(SpStatus::InvalidArgument, format!("unknown {what} {v}"));
    Ok(TrainConfig {
        dim: c.dim,
        margin: c.margin,
        lr: c.lr,
        epochs: c.epochs,
        batch_size: c.batch_size,
        triples_per_epoch: (c.triples_per_epoch > 0).then_some(c.triples_per_epoch),
        strategy: match c.strategy {
            SP_STRATEGY_RANDOM => Strategy::RandomSampling,
            SP_STRATEGY_VIRTUAL => Strategy::VirtualNode,
            SP_STRATEGY_BALANCE => Strategy::BalanceInference,
            v => return Err(bad("strategy", v)),
        },
        retraction: match c.retraction {
            SP_RETRACTION_SIMPLE => Retraction::Simple,
            SP_RETRACTION_EXP => Retraction::Exp,
            v => return Err(bad("retraction", v)),
        },
        lr_decay: match c.lr_decay {
            SP_LR_CONSTANT => LrDecay::Constant,
            SP_LR_LINEAR => LrDecay::Linear,
            v => return Err(bad("learning-rate schedule", v)),
        },
        eps: c.eps,
        init_radius: c.init_radius,
        seed: c.seed,
        freeze_anchor: c.freeze_anchor,
        threads: c.threads,
    })
}

/// Message describing the last failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a graph over nodes `0..node_count` from possibly directed,
/// duplicated edges; self-loops are dropped.
///
/// # Safety
/// `edges` must point to `edge_count` values (may be null if zero); `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_graph_from_edges(
    node_count: usize,
    edges: *const SpEdge,
    edge_count: usize,
    conflict_policy: u32,
    out: *mut *mut SpGraph,
) -> SpStatus {
    guard(|| {
        non_null(out, "out")?;
        let raw = edges_arg(unsafe { slice_arg(edges, edge_count, "edges")? })?;
        let (graph, _) = SignedGraph::from_edges(node_count, &raw, policy(conflict_policy)?)
            .map_err(|e| Failure::new(SpStatus::InvalidArgument, e))?;
        unsafe { *out = Box::into_raw(Box::new(SpGraph { graph })) };
        Ok(())
    })
}

/// Reads a `src dst sign` edge list. Nodes are numbered in order of first
/// appearance.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_graph_load(path: *const c_char, conflict_policy: u32, out: *mut *mut SpGraph) -> SpStatus {
    guard(|| {
        non_null(out, "out")?;
        let path = unsafe { str_arg(path, "path")? };
        let options = LoadOptions { policy: policy(conflict_policy)?, preset_labels: Vec::new() };
        let file = File::open(path).map_err(|e| Failure::new(SpStatus::Io, format!("{path}: {e}")))?;
        let loaded = load_edge_list(BufReader::new(file), &options)
            .map_err(|e| Failure::new(SpStatus::Parse, format!("{path}: {e}")))?;
        unsafe { *out = Box::into_raw(Box::new(SpGraph { graph: loaded.graph })) };
        Ok(())
    })
}

/// # Safety
/// `graph` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn sp_graph_free(graph: *mut SpGraph) {
    if !graph.is_null() {
        drop(unsafe { Box::from_raw(graph) });
    }
}

/// Node count, or 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_graph_node_count(graph: *const SpGraph) -> usize {
    unsafe { graph.as_ref() }.map_or(0, |g| g.graph.node_count())
}

/// Undirected edge count, or 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_graph_edge_count(graph: *const SpGraph) -> usize {
    unsafe { graph.as_ref() }.map_or(0, |g| g.graph.edge_count())
}

/// Copies edge `index` (in storage order) into `out`.
///
/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_graph_edge(graph: *const SpGraph, index: usize, out: *mut SpEdge) -> SpStatus {
    guard(|| {
        non_null(graph, "graph")?;
        non_null(out, "out")?;
        let g = unsafe { &(*graph).graph };
        let e = g.edges().get(index).ok_or_else(|| {
            Failure::new(SpStatus::InvalidArgument, format!("edge {index} out of range ({} edges)", g.edge_count()))
        })?;
        unsafe { *out = SpEdge { src: e.src, dst: e.dst, sign: e.sign.value() } };
        Ok(())
    })
}

/// Library defaults: 20 dimensions, margin 1, learning rate 0.05 decaying
/// linearly, 100 epochs, batches of 512, virtual-node augmentation.
#[no_mangle]
pub extern "C" fn sp_train_config_default() -> SpTrainConfig {
    let d = TrainConfig::default();
    SpTrainConfig {
        dim: d.dim,
        margin: d.margin,
        lr: d.lr,
        epochs: d.epochs,
        batch_size: d.batch_size,
        triples_per_epoch: 0,
        strategy: SP_STRATEGY_VIRTUAL,
        retraction: SP_RETRACTION_SIMPLE,
        lr_decay: SP_LR_LINEAR,
        eps: d.eps,
        init_radius: d.init_radius,
        seed: d.seed,
        freeze_anchor: d.freeze_anchor,
        threads: d.threads,
    }
}

/// Trains an embedding of `graph`.
///
/// # Safety
/// `graph` must be a live handle, `config` readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sp_train(
    graph: *const SpGraph,
    config: *const SpTrainConfig,
    out: *mut *mut SpEmbedding,
) -> SpStatus {
    guard(|| {
        non_null(graph, "graph")?;
        non_null(config, "config")?;
        non_null(out, "out")?;
        let g = unsafe { &(*graph).graph };
        let config = config_from(unsafe { &*config })?;
        let (store, _) = signed_poincare::train(g, &config).map_err(|e| Failure::new(SpStatus::Training, e))?;
        let file = EmbeddingFile::new(g.labels(), store).without_virtual();
        unsafe { *out = Box::into_raw(Box::new(SpEmbedding { file })) };
        Ok(())
    })
}

/// # Safety
/// `embedding` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn sp_embedding_free(embedding: *mut SpEmbedding) {
    if !embedding.is_null() {
        drop(unsafe { Box::from_raw(embedding) });
    }
}

/// Number of node rows, or 0 for a null handle.
///
/// # Safety
/// `embedding` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_embedding_rows(embedding: *const SpEmbedding) -> usize {
    unsafe { embedding.as_ref() }.map_or(0, |e| e.file.store.node_rows())
}

/// Dimension, or 0 for a null handle.
///
/// # Safety
/// `embedding` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_embedding_dim(embedding: *const SpEmbedding) -> usize {
    unsafe { embedding.as_ref() }.map_or(0, |e| e.file.store.dim())
}

/// Copies row `row` into `out`, which must hold `len == dim` doubles.
///
/// # Safety
/// `embedding` must be a live handle; `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sp_embedding_row(
    embedding: *const SpEmbedding,
    row: usize,
    out: *mut f64,
    len: usize,
) -> SpStatus {
    guard(|| {
        non_null(embedding, "embedding")?;
        non_null(out, "out")?;
        let store = unsafe { &(*embedding).file.store };
        if row >= store.node_rows() {
            return Err(Failure::new(
                SpStatus::InvalidArgument,
                format!("row {row} out of range ({} rows)", store.node_rows()),
            ));
        }
        if len != store.dim() {
            return Err(Failure::new(
                SpStatus::InvalidArgument,
                format!("buffer holds {len} values, dimension is {}", store.dim()),
            ));
        }
        unsafe { slice::from_raw_parts_mut(out, len) }.copy_from_slice(store.row(row));
        Ok(())
    })
}

/// Poincaré distance between rows `i` and `j`.
///
/// # Safety
/// `embedding` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_embedding_distance(
    embedding: *const SpEmbedding,
    i: usize,
    j: usize,
    out: *mut f64,
) -> SpStatus {
    guard(|| {
        non_null(embedding, "embedding")?;
        non_null(out, "out")?;
        let score = eval::score(unsafe { &(*embedding).file.store }, i, j).map_err(eval_failure)?;
        unsafe { *out = -score };
        Ok(())
    })
}

/// Sign score of the pair (negated distance): higher means more friendly.
///
/// # Safety
/// `embedding` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_embedding_score(
    embedding: *const SpEmbedding,
    i: usize,
    j: usize,
    out: *mut f64,
) -> SpStatus {
    guard(|| {
        non_null(embedding, "embedding")?;
        non_null(out, "out")?;
        let score = eval::score(unsafe { &(*embedding).file.store }, i, j).map_err(eval_failure)?;
        unsafe { *out = score };
        Ok(())
    })
}

/// Writes the embedding in the tool's TSV format.
///
/// # Safety
/// `embedding` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sp_embedding_save(embedding: *const SpEmbedding, path: *const c_char) -> SpStatus {
    guard(|| {
        non_null(embedding, "embedding")?;
        let path = unsafe { str_arg(path, "path")? };
        let io_err = |e: std::io::Error| Failure::new(SpStatus::Io, format!("{path}: {e}"));
        let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
        unsafe { &(*embedding).file }.write(&mut w).map_err(io_err)?;
        w.flush().map_err(io_err)
    })
}

/// Reads an embedding written by [`sp_embedding_save`] or the CLI.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_embedding_load(path: *const c_char, out: *mut *mut SpEmbedding) -> SpStatus {
    guard(|| {
        non_null(out, "out")?;
        let path = unsafe { str_arg(path, "path")? };
        let file = File::open(path).map_err(|e| Failure::new(SpStatus::Io, format!("{path}: {e}")))?;
        let file = EmbeddingFile::read(BufReader::new(file))
            .map_err(|e| Failure::new(SpStatus::Parse, format!("{path}: {e}")))?
            .without_virtual();
        unsafe { *out = Box::into_raw(Box::new(SpEmbedding { file })) };
        Ok(())
    })
}

/// Fits the score threshold that maximizes `metric` on `edges`.
///
/// # Safety
/// `embedding` must be a live handle; `edges` must point to `edge_count`
/// values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_fit_threshold(
    embedding: *const SpEmbedding,
    edges: *const SpEdge,
    edge_count: usize,
    threshold_metric: u32,
    out: *mut f64,
) -> SpStatus {
    guard(|| {
        non_null(embedding, "embedding")?;
        non_null(out, "out")?;
        let edges = edges_arg(unsafe { slice_arg(edges, edge_count, "edges")? })?;
        let t = eval::fit_threshold(unsafe { &(*embedding).file.store }, &edges, metric(threshold_metric)?)
            .map_err(eval_failure)?;
        unsafe { *out = t };
        Ok(())
    })
}

/// Classifies `edges` at `threshold` and reports F1 scores and AUC.
///
/// # Safety
/// `embedding` must be a live handle; `edges` must point to `edge_count`
/// values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_evaluate(
    embedding: *const SpEmbedding,
    edges: *const SpEdge,
    edge_count: usize,
    threshold: f64,
    out: *mut SpEvalReport,
) -> SpStatus {
    guard(|| {
        non_null(embedding, "embedding")?;
        non_null(out, "out")?;
        let edges = edges_arg(unsafe { slice_arg(edges, edge_count, "edges")? })?;
        let r = eval::evaluate(unsafe { &(*embedding).file.store }, &edges, threshold).map_err(eval_failure)?;
        unsafe {
            *out = SpEvalReport {
                macro_f1: r.macro_f1,
                micro_f1: r.micro_f1,
                auc: r.auc,
                threshold: r.threshold,
                tp: r.tp,
                fp: r.fp,
                tn: r.tn,
                fn_count: r.fn_,
                edges: r.edges,
            }
        };
        Ok(())
    })
}

/// Area under the ROC curve of positive versus negative scores.
///
/// # Safety
/// `positive` / `negative` must point to the given number of doubles;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_auc(
    positive: *const f64,
    positive_count: usize,
    negative: *const f64,
    negative_count: usize,
    out: *mut f64,
) -> SpStatus {
    guard(|| {
        non_null(out, "out")?;
        let p = unsafe { slice_arg(positive, positive_count, "positive")? };
        let n = unsafe { slice_arg(negative, negative_count, "negative")? };
        let a = eval::auc(p, n).map_err(eval_failure)?;
        unsafe { *out = a };
        Ok(())
    })
}

/// Poincaré distance between two points of dimension `dim`.
///
/// # Safety
/// `u` and `v` must each point to `dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_poincare_distance(u: *const f64, v: *const f64, dim: usize, out: *mut f64) -> SpStatus {
    guard(|| {
        non_null(out, "out")?;
        let u = unsafe { slice_arg(u, dim, "u")? };
        let v = unsafe { slice_arg(v, dim, "v")? };
        let d = manifold::distance(u, v).map_err(|e| Failure::new(SpStatus::Geometry, e))?;
        unsafe { *out = d };
        Ok(())
    })
}
