//! Command-line pipeline: `stats`, `split`, `train`, `eval`, `bands`,
//! `profile` and `features`.
//!
//! Every subcommand that writes an artifact also writes one JSON run manifest
//! next to it (resolved configuration, seed, SHA-256 of every input, tool
//! version). Reruns with the same inputs and flags reproduce the artifacts
//! byte for byte; only the manifest's wall-clock field differs.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::analysis::{centrality_profile, powerlaw_summary, radius_bands, ProfileOptions};
use crate::eval::{classify_scores, evaluate_scores, fit_threshold_scores, score_edges, EdgeOperator, ThresholdMetric};
use crate::graph::{
    degree_stats, load_edge_list, split_edges, write_edges, ConflictPolicy, EdgeRecord, LoadOptions, Loaded, Sign,
    SignedGraph, SplitMode, SplitRatios,
};
use crate::io::{write_bands, write_features, write_predictions, write_profile, EmbeddingFile};
use crate::manifold::Retraction;
use crate::sampler::Strategy;
use crate::trainer::{LrDecay, TrainConfig, Trainer};

#[derive(Debug, Parser)]
#[command(
    name = "signed-poincare",
    version,
    about = "Embed signed networks in the Poincaré ball and evaluate link-sign prediction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-sign degree histograms and power-law fits.
    Stats(StatsArgs),
    /// Split an edge list into train/validation/test files.
    Split(SplitArgs),
    /// Train an embedding.
    Train(TrainArgs),
    /// Fit a sign threshold on validation edges and score test edges.
    Eval(EvalArgs),
    /// Equal-count radius bands with per-band degree statistics.
    Bands(BandsArgs),
    /// Norm versus mean distance to all other nodes.
    Profile(ProfileArgs),
    /// Export edge feature vectors for external classifiers.
    Features(FeaturesArgs),
}

#[derive(Debug, Args)]
pub struct GraphInput {
    /// How to resolve reciprocal edges with opposite signs.
    #[arg(long, default_value_t = ConflictPolicy::NegativeWins)]
    pub policy: ConflictPolicy,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Edge list (`src dst sign` per line).
    pub graph: PathBuf,
    #[command(flatten)]
    pub input: GraphInput,
    /// Smallest degree included in the power-law fit.
    #[arg(long, default_value_t = 1)]
    pub degree_min: usize,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    pub graph: PathBuf,
    #[command(flatten)]
    pub input: GraphInput,
    /// Output directory for train.txt, val.txt, test.txt and manifest.json.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Train, validation and test fractions.
    #[arg(long, default_value = "0.8,0.1,0.1")]
    pub ratios: String,
    /// Seeds the shuffle.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Apply the ratios separately within each sign.
    #[arg(long)]
    pub stratified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Task {
    Prediction,
    Reconstruction,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training edge list.
    pub graph: PathBuf,
    #[command(flatten)]
    pub input: GraphInput,
    /// Embedding output (TSV).
    #[arg(long)]
    pub out: PathBuf,
    /// Edge list whose labels are registered first, so nodes without
    /// training edges still get a row (typically the unsplit graph).
    #[arg(long)]
    pub nodes: Option<PathBuf>,
    /// Sets the default margin: 1.0 for prediction, 0.1 for reconstruction.
    #[arg(long, value_enum, default_value_t = Task::Prediction)]
    pub task: Task,
    /// Embedding dimension.
    #[arg(long, default_value_t = 20)]
    pub dim: usize,
    /// Hinge margin; overrides the task default.
    #[arg(long)]
    pub margin: Option<f64>,
    /// Initial learning rate.
    #[arg(long, default_value_t = 0.05)]
    pub lr: f64,
    /// Learning-rate schedule: constant, or linear decay to zero.
    #[arg(long, default_value_t = LrDecay::Linear)]
    pub lr_decay: LrDecay,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    /// Triples per batch; gradients are summed per row within a batch.
    #[arg(long, default_value_t = 512)]
    pub batch_size: usize,
    /// Triples per epoch [default: number of training edges].
    #[arg(long)]
    pub triples_per_epoch: Option<usize>,
    /// How nodes lacking one link polarity get training triples.
    #[arg(long, default_value_t = Strategy::VirtualNode)]
    pub augment: Strategy,
    /// Update rule: simple (add, then project) or exp (exponential map).
    #[arg(long, default_value_t = Retraction::Simple)]
    pub retraction: Retraction,
    /// Ball guard: points are kept within norm 1 - eps.
    #[arg(long, default_value_t = 1e-5)]
    pub eps: f64,
    /// Half-width of the uniform initialization box around the origin.
    #[arg(long, default_value_t = 1e-3)]
    pub init_radius: f64,
    /// Seeds initialization, augmentation and triple sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Update only the friend and enemy of each triple.
    #[arg(long)]
    pub freeze_anchor: bool,
    /// Worker threads; values above 1 give non-reproducible results.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Training log (TSV) destination [default: stdout].
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Write a checkpoint embedding every N epochs.
    #[arg(long)]
    pub ckpt_every: Option<usize>,
    /// Keep virtual-node rows in the embedding file.
    #[arg(long)]
    pub include_virtual: bool,
}

impl TrainArgs {
    pub fn config(&self) -> TrainConfig {
        let default_margin = match self.task {
            Task::Prediction => 1.0,
            Task::Reconstruction => 0.1,
        };
        TrainConfig {
            dim: self.dim,
            margin: self.margin.unwrap_or(default_margin),
            lr: self.lr,
            epochs: self.epochs,
            batch_size: self.batch_size,
            triples_per_epoch: self.triples_per_epoch,
            strategy: self.augment,
            retraction: self.retraction,
            eps: self.eps,
            init_radius: self.init_radius,
            seed: self.seed,
            lr_decay: self.lr_decay,
            freeze_anchor: self.freeze_anchor,
            threads: self.threads,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub embedding: PathBuf,
    /// Edges used to fit the threshold.
    #[arg(long)]
    pub val: PathBuf,
    /// Edges to score. For reconstruction pass the full graph for both.
    #[arg(long)]
    pub test: PathBuf,
    #[command(flatten)]
    pub input: GraphInput,
    /// Objective maximized when fitting the threshold.
    #[arg(long, default_value_t = ThresholdMetric::MacroF1)]
    pub threshold_metric: ThresholdMetric,
    /// Use this threshold instead of fitting one.
    #[arg(long, allow_hyphen_values = true)]
    pub threshold: Option<f64>,
    /// JSON report destination [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-edge predictions (TSV).
    #[arg(long)]
    pub predictions: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BandsArgs {
    #[arg(long)]
    pub embedding: PathBuf,
    #[arg(long)]
    pub graph: PathBuf,
    #[command(flatten)]
    pub input: GraphInput,
    /// Number of equal-count radius bands.
    #[arg(long, default_value_t = 5)]
    pub bands: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[arg(long)]
    pub embedding: PathBuf,
    /// Above this many nodes mean distances are sampled.
    #[arg(long, default_value_t = 5000)]
    pub exact_cutoff: usize,
    #[arg(long, default_value_t = 1000)]
    pub sample_size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[arg(long)]
    pub embedding: PathBuf,
    /// Edges to featurize.
    #[arg(long)]
    pub edges: PathBuf,
    #[command(flatten)]
    pub input: GraphInput,
    /// hadamard, l1, l2, concat or average.
    #[arg(long, default_value = "hadamard")]
    pub operator: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Provenance record written once per artifact-producing run.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    pub seed: Option<u64>,
    pub config: Value,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub details: Value,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    fn new(subcommand: &'static str, seed: Option<u64>, config: Value) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            seed,
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            details: Value::Null,
            wall_clock_seconds: 0.0,
        }
    }

    fn input(&mut self, path: &Path) -> Result<()> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.push(InputDigest { path: path.display().to_string(), sha256: hex::encode(Sha256::digest(&bytes)) });
        Ok(())
    }

    fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    fn write(mut self, path: &Path, started: Instant) -> Result<()> {
        self.wall_clock_seconds = started.elapsed().as_secs_f64();
        let mut f = create(path)?;
        serde_json::to_writer_pretty(&mut f, &self)?;
        f.write_all(b"\n")?;
        f.flush()?;
        Ok(())
    }
}

/// `<path>.manifest.json`
pub fn manifest_path(artifact: &Path) -> PathBuf {
    let mut s = artifact.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn load_graph(path: &Path, policy: ConflictPolicy, preset_labels: Vec<String>) -> Result<Loaded> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let options = LoadOptions { policy, preset_labels };
    load_edge_list(BufReader::new(file), &options).with_context(|| format!("parsing {}", path.display()))
}

fn load_embedding(path: &Path) -> Result<EmbeddingFile> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    EmbeddingFile::read(BufReader::new(file)).with_context(|| format!("parsing {}", path.display()))
}

/// Re-indexes the edges of `graph` onto the rows of `embedding`.
fn edges_for_embedding(graph: &SignedGraph, embedding: &EmbeddingFile, what: &Path) -> Result<Vec<EdgeRecord>> {
    let index = embedding.index();
    let mut missing: Vec<&str> = graph.labels().iter().map(String::as_str).filter(|l| !index.contains_key(l)).collect();
    if !missing.is_empty() {
        missing.sort_unstable();
        bail!(
            "{} references {} node(s) without an embedding row: {}",
            what.display(),
            missing.len(),
            missing.join(", ")
        );
    }
    Ok(graph
        .edges()
        .iter()
        .map(|e| EdgeRecord::new(index[graph.label(e.src)], index[graph.label(e.dst)], e.sign))
        .collect())
}

/// Writes to `path`, or to stdout when `path` is `None`.
fn with_output<F>(path: Option<&Path>, f: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match path {
        Some(p) => {
            let mut w = create(p)?;
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Stats(a) => cmd_stats(&a),
        Command::Split(a) => cmd_split(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Bands(a) => cmd_bands(&a),
        Command::Profile(a) => cmd_profile(&a),
        Command::Features(a) => cmd_features(&a),
    }
}

pub fn cmd_stats(args: &StatsArgs) -> Result<()> {
    let started = Instant::now();
    let loaded = load_graph(&args.graph, args.input.policy, Vec::new())?;
    let g = &loaded.graph;
    let stats = degree_stats(g);
    let mut text = String::new();
    let r = loaded.report;
    text.push_str(&format!(
        "# nodes={} edges={} positive={} negative={} self_loops={} duplicates={} conflicts={}\n",
        g.node_count(),
        g.edge_count(),
        g.count_sign(Sign::Positive),
        g.count_sign(Sign::Negative),
        r.self_loops,
        r.duplicates,
        r.conflicts
    ));
    let mut fits = serde_json::Map::new();
    for sign in [Sign::Positive, Sign::Negative] {
        let hist = stats.histogram(sign);
        text.push_str(&format!("\n[{sign}]\ndegree\tcount\n"));
        for (d, c) in hist {
            text.push_str(&format!("{d}\t{c}\n"));
        }
        match powerlaw_summary(hist, args.degree_min) {
            Ok(fit) => {
                text.push_str(&format!(
                    "powerlaw\texponent={:.4}\tr2={:.4}\trange={}-{}\tsupport={}\n",
                    fit.exponent, fit.r_squared, fit.degree_min, fit.degree_max, fit.support
                ));
                fits.insert(sign.to_string(), serde_json::to_value(fit)?);
            }
            Err(e) => text.push_str(&format!("powerlaw\tn/a\t{e}\n")),
        }
    }
    with_output(args.out.as_deref(), |w| w.write_all(text.as_bytes()))?;
    if let Some(out) = &args.out {
        let mut m =
            RunManifest::new("stats", None, json!({ "policy": args.input.policy, "degree_min": args.degree_min }));
        m.input(&args.graph)?;
        m.output(out);
        m.details = json!({ "powerlaw": fits });
        m.write(&manifest_path(out), started)?;
    }
    Ok(())
}

pub fn parse_ratios(text: &str) -> Result<SplitRatios> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>().with_context(|| format!("bad ratio `{p}`")))
        .collect::<Result<_>>()?;
    let [train, val, test] = parts[..] else {
        bail!("expected three comma-separated ratios, got `{text}`");
    };
    Ok(SplitRatios::new(train, val, test)?)
}

pub fn cmd_split(args: &SplitArgs) -> Result<()> {
    let started = Instant::now();
    let ratios = parse_ratios(&args.ratios)?;
    let loaded = load_graph(&args.graph, args.input.policy, Vec::new())?;
    let mode = if args.stratified { SplitMode::Stratified } else { SplitMode::Uniform };
    let bundle = split_edges(&loaded.graph, ratios, mode, args.seed)?;
    let labels = loaded.graph.labels();

    let mut manifest = RunManifest::new(
        "split",
        Some(args.seed),
        json!({ "ratios": ratios, "mode": mode, "policy": args.input.policy }),
    );
    manifest.input(&args.graph)?;
    let parts: [(&str, &[EdgeRecord]); 3] =
        [("train.txt", bundle.train.edges()), ("val.txt", &bundle.validation), ("test.txt", &bundle.test)];
    for (name, edges) in parts {
        let path = args.out_dir.join(name);
        let mut w = create(&path)?;
        write_edges(&mut w, labels, edges)?;
        w.flush()?;
        manifest.output(&path);
    }
    manifest.details = json!({
        "seed": args.seed,
        "ratios": ratios,
        "counts": {
            "train": bundle.train.edge_count(),
            "validation": bundle.validation.len(),
            "test": bundle.test.len(),
        },
        "load": loaded.report,
    });
    manifest.write(&args.out_dir.join("manifest.json"), started)
}

fn checkpoint_path(out: &Path, epoch: usize) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(format!(".ckpt-{epoch}"));
    PathBuf::from(s)
}

pub fn cmd_train(args: &TrainArgs) -> Result<()> {
    let started = Instant::now();
    let config = args.config();
    config.validate()?;
    if args.ckpt_every == Some(0) {
        bail!("--ckpt-every must be positive");
    }
    let preset = match &args.nodes {
        Some(p) => load_graph(p, args.input.policy, Vec::new())?.graph.labels().to_vec(),
        None => Vec::new(),
    };
    let loaded = load_graph(&args.graph, args.input.policy, preset)?;
    let graph = &loaded.graph;
    let mut trainer = Trainer::new(graph, config.clone())?;
    let aug = trainer.augmented().summary();

    let mut log: Box<dyn Write> = match &args.log {
        Some(p) => Box::new(create(p)?),
        None => Box::new(io::stdout()),
    };
    writeln!(
        log,
        "# nodes={} edges={} augment={} inferred_positive={} inferred_negative={} ineligible={} triples_per_epoch={}",
        graph.node_count(),
        graph.edge_count(),
        config.strategy,
        aug.inferred_positive,
        aug.inferred_negative,
        aug.ineligible,
        trainer.triples_per_epoch()
    )?;
    writeln!(log, "epoch\tmean_loss\tzero_loss_fraction\tmax_norm\tseconds")?;
    let labels = graph.labels().to_vec();
    let include_virtual = args.include_virtual;
    let mut checkpoints = Vec::new();
    let report = trainer
        .run_with(|stats, store| {
            writeln!(
                log,
                "{}\t{}\t{}\t{}\t{:.3}",
                stats.epoch + 1,
                stats.mean_loss,
                stats.zero_loss_fraction,
                stats.max_norm,
                stats.seconds
            )
            .map_err(|e| e.to_string())?;
            if let Some(every) = args.ckpt_every {
                if (stats.epoch + 1) % every == 0 {
                    let path = checkpoint_path(&args.out, stats.epoch + 1);
                    let file = embedding_file(&labels, store.clone(), include_virtual);
                    let mut w = create(&path).map_err(|e| e.to_string())?;
                    file.write(&mut w).and_then(|_| w.flush()).map_err(|e| e.to_string())?;
                    checkpoints.push(path);
                }
            }
            Ok(())
        })
        .context("training failed")?;
    log.flush()?;
    drop(log);

    let file = embedding_file(&labels, trainer.into_store(), include_virtual);
    let mut w = create(&args.out)?;
    file.write(&mut w)?;
    w.flush()?;

    let mut manifest = RunManifest::new("train", Some(config.seed), serde_json::to_value(&config)?);
    manifest.input(&args.graph)?;
    if let Some(p) = &args.nodes {
        manifest.input(p)?;
    }
    manifest.output(&args.out);
    for c in &checkpoints {
        manifest.output(c);
    }
    let last = report.epochs.last();
    manifest.details = json!({
        "nodes": graph.node_count(),
        "edges": graph.edge_count(),
        "load": loaded.report,
        "augmentation": report.augmentation,
        "triples_per_epoch": report.triples_per_epoch,
        "epochs_run": report.final_epoch(),
        "final_mean_loss": last.map(|e| e.mean_loss),
        "final_zero_loss_fraction": last.map(|e| e.zero_loss_fraction),
    });
    manifest.write(&manifest_path(&args.out), started)
}

fn embedding_file(labels: &[String], store: crate::manifold::EmbeddingStore, include_virtual: bool) -> EmbeddingFile {
    let file = EmbeddingFile::new(labels, store);
    if include_virtual {
        file
    } else {
        file.without_virtual()
    }
}

pub fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let started = Instant::now();
    let embedding = load_embedding(&args.embedding)?;
    let val_graph = load_graph(&args.val, args.input.policy, Vec::new())?.graph;
    let test_graph = load_graph(&args.test, args.input.policy, Vec::new())?.graph;
    let val = edges_for_embedding(&val_graph, &embedding, &args.val)?;
    let test = edges_for_embedding(&test_graph, &embedding, &args.test)?;
    if test.is_empty() {
        bail!("{} contains no edges", args.test.display());
    }
    let store = &embedding.store;
    let threshold = match args.threshold {
        Some(t) => t,
        None => {
            let scores = score_edges(store, &val)?;
            let truth: Vec<Sign> = val.iter().map(|e| e.sign).collect();
            fit_threshold_scores(&scores, &truth, args.threshold_metric)
                .with_context(|| format!("fitting threshold on {}", args.val.display()))?
        }
    };
    let scores = score_edges(store, &test)?;
    let report = evaluate_scores(&scores, &test, threshold)?;
    let json_text = serde_json::to_string_pretty(&report)? + "\n";
    with_output(args.out.as_deref(), |w| w.write_all(json_text.as_bytes()))?;
    if let Some(p) = &args.predictions {
        let mut w = create(p)?;
        write_predictions(&mut w, &embedding.labels, &test, &scores, &classify_scores(&scores, threshold))?;
        w.flush()?;
    }
    if let Some(out) = &args.out {
        let mut m = RunManifest::new(
            "eval",
            None,
            json!({ "threshold_metric": args.threshold_metric, "threshold": args.threshold, "policy": args.input.policy }),
        );
        for p in [&args.embedding, &args.val, &args.test] {
            m.input(p)?;
        }
        m.output(out);
        if let Some(p) = &args.predictions {
            m.output(p);
        }
        m.details = serde_json::to_value(report)?;
        m.write(&manifest_path(out), started)?;
    }
    Ok(())
}

/// Loads `path` and checks that it introduces no node unknown to the embedding.
fn graph_on_embedding(path: &Path, policy: ConflictPolicy, embedding: &EmbeddingFile) -> Result<SignedGraph> {
    let labels = embedding.node_labels().to_vec();
    let known = labels.len();
    let graph = load_graph(path, policy, labels)?.graph;
    if graph.node_count() != known {
        let extra: Vec<&str> = graph.labels()[known..].iter().map(String::as_str).collect();
        bail!("{} references {} node(s) without an embedding row: {}", path.display(), extra.len(), extra.join(", "));
    }
    Ok(graph)
}

pub fn cmd_bands(args: &BandsArgs) -> Result<()> {
    let started = Instant::now();
    let embedding = load_embedding(&args.embedding)?.without_virtual();
    let graph = graph_on_embedding(&args.graph, args.input.policy, &embedding)?;
    let bands = radius_bands(&embedding.store, &graph, args.bands)?;
    with_output(args.out.as_deref(), |w| write_bands(w, &bands))?;
    if let Some(out) = &args.out {
        let mut m = RunManifest::new("bands", None, json!({ "bands": args.bands, "policy": args.input.policy }));
        m.input(&args.embedding)?;
        m.input(&args.graph)?;
        m.output(out);
        m.write(&manifest_path(out), started)?;
    }
    Ok(())
}

pub fn cmd_profile(args: &ProfileArgs) -> Result<()> {
    let started = Instant::now();
    let embedding = load_embedding(&args.embedding)?.without_virtual();
    let options = ProfileOptions { exact_cutoff: args.exact_cutoff, sample_size: args.sample_size, seed: args.seed };
    let rows = centrality_profile(&embedding.store, &options)?;
    with_output(args.out.as_deref(), |w| write_profile(w, &embedding.labels, &rows))?;
    if let Some(out) = &args.out {
        let mut m = RunManifest::new(
            "profile",
            Some(args.seed),
            json!({ "exact_cutoff": args.exact_cutoff, "sample_size": args.sample_size }),
        );
        m.input(&args.embedding)?;
        m.output(out);
        m.write(&manifest_path(out), started)?;
    }
    Ok(())
}

pub fn cmd_features(args: &FeaturesArgs) -> Result<()> {
    let started = Instant::now();
    let op: EdgeOperator = args.operator.parse()?;
    let embedding = load_embedding(&args.embedding)?.without_virtual();
    let graph = load_graph(&args.edges, args.input.policy, Vec::new())?.graph;
    let edges = edges_for_embedding(&graph, &embedding, &args.edges)?;
    with_output(args.out.as_deref(), |w| write_features(w, &embedding.store, &embedding.labels, &edges, op))?;
    if let Some(out) = &args.out {
        let mut m = RunManifest::new("features", None, json!({ "operator": op, "policy": args.input.policy }));
        m.input(&args.embedding)?;
        m.input(&args.edges)?;
        m.output(out);
        m.write(&manifest_path(out), started)?;
    }
    Ok(())
}

/// Label -> row lookup shared by callers that map external edge lists.
pub fn label_index(labels: &[String]) -> HashMap<&str, usize> {
    labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect()
}
