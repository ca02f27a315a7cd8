mod common;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use signed_poincare::eval::{fit_threshold, ThresholdMetric};
use signed_poincare::graph::{split_edges, SplitMode, SplitRatios};
use signed_poincare::manifold::init_embeddings;
use signed_poincare::sampler::{build_extended, sample_batch, Strategy};
use signed_poincare::trainer::LrDecay;
use signed_poincare::{evaluate, train, Retraction, Sign, TrainConfig, Trainer};

fn reconstruction(config: &TrainConfig) -> (f64, f64) {
    let g = two_cliques(20);
    let (store, _) = train(&g, config).unwrap();
    let t = fit_threshold(&store, g.edges(), ThresholdMetric::MacroF1).unwrap();
    let r = evaluate(&store, g.edges(), t).unwrap();
    (r.auc, r.macro_f1)
}

#[test]
fn two_clique_loss_descends_in_windows() {
    let g = two_cliques(20);
    let config = TrainConfig { dim: 2, margin: 1.0, epochs: 50, ..Default::default() };
    let (_, report) = train(&g, &config).unwrap();
    let losses = report.losses();
    assert_eq!(losses.len(), 50);
    let windows: Vec<f64> = losses.chunks(5).map(|w| w.iter().sum::<f64>() / 5.0).collect();
    for w in windows.windows(2) {
        assert!(w[1] <= w[0], "window means {windows:?}");
    }
    assert!(*losses.last().unwrap() < 0.05, "final loss {}", losses.last().unwrap());
}

#[test]
fn zero_epochs_return_initialization() {
    let g = two_cliques(5);
    let config = TrainConfig { dim: 3, epochs: 0, seed: 4, ..Default::default() };
    let (store, report) = train(&g, &config).unwrap();
    let rows = build_extended(&g, config.strategy, config.seed).unwrap().row_count();
    let init = init_embeddings(rows, 3, config.init_radius, config.eps, config.seed).unwrap();
    assert_eq!(store.as_slice(), init.as_slice());
    assert_eq!(report.final_epoch(), 0);
}

#[test]
fn training_is_deterministic() {
    let g = community_network(120, 3, 0.2, 0.05, 1);
    let config = TrainConfig { epochs: 15, seed: 11, ..Default::default() };
    let (a, ra) = train(&g, &config).unwrap();
    let (b, rb) = train(&g, &config).unwrap();
    assert_eq!(a.as_slice(), b.as_slice());
    assert_eq!(ra.losses(), rb.losses());
    let (c, _) = train(&g, &TrainConfig { seed: 12, ..config }).unwrap();
    assert_ne!(a.as_slice(), c.as_slice());
}

#[test]
fn every_strategy_reconstructs_two_cliques() {
    for strategy in [Strategy::RandomSampling, Strategy::VirtualNode, Strategy::BalanceInference] {
        let (auc, f1) = reconstruction(&TrainConfig { dim: 2, strategy, ..Default::default() });
        assert!(auc >= 0.99 && f1 >= 0.95, "{strategy}: auc {auc} f1 {f1}");
    }
}

#[test]
fn exp_retraction_and_variants_also_converge() {
    let variants = [
        TrainConfig { dim: 2, retraction: Retraction::Exp, ..Default::default() },
        TrainConfig { dim: 2, lr_decay: LrDecay::Constant, ..Default::default() },
        TrainConfig { dim: 2, freeze_anchor: true, ..Default::default() },
        TrainConfig { dim: 2, batch_size: 1, epochs: 20, ..Default::default() },
    ];
    for config in variants {
        let (auc, f1) = reconstruction(&config);
        assert!(auc >= 0.99 && f1 >= 0.95, "{config:?}: auc {auc} f1 {f1}");
    }
}

#[test]
fn parallel_mode_trains_comparably() {
    let config = TrainConfig { dim: 2, threads: 4, ..Default::default() };
    let (auc, f1) = reconstruction(&config);
    assert!(auc >= 0.99 && f1 >= 0.95, "auc {auc} f1 {f1}");
}

#[test]
fn hidden_links_are_predicted() {
    let g = community_network(200, 4, 0.15, 0.03, 8);
    let split = split_edges(&g, SplitRatios::new(0.8, 0.1, 0.1).unwrap(), SplitMode::Stratified, 8).unwrap();
    let (store, _) = train(&split.train, &TrainConfig { seed: 8, ..Default::default() }).unwrap();
    let t = fit_threshold(&store, &split.validation, ThresholdMetric::MacroF1).unwrap();
    let r = evaluate(&store, &split.test, t).unwrap();
    assert!(r.auc > 0.9 && r.macro_f1 > 0.8, "{r:?}");
}

#[test]
fn virtual_rows_stay_out_of_evaluation() {
    let g = two_cliques(4);
    let mut trainer = Trainer::new(&g, TrainConfig { dim: 2, epochs: 2, ..Default::default() }).unwrap();
    trainer.run().unwrap();
    // Every node has a negative neighbour and a positive one, so no virtual rows are needed,
    // but they exist and are excluded from the node range.
    assert_eq!(trainer.store().virtual_rows(), 2);
    assert_eq!(trainer.store().node_rows(), 8);
    assert!(signed_poincare::eval::score(trainer.store(), 0, 8).is_err());
}

#[test]
fn anchors_are_drawn_uniformly() {
    // Chi-squared goodness of fit over 10^5 draws on the two-clique graph.
    let g = two_cliques(20);
    let aug = build_extended(&g, Strategy::VirtualNode, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let draws = 100_000;
    let mut counts = vec![0usize; g.node_count()];
    for t in sample_batch(&aug, draws, &mut rng).unwrap() {
        counts[t.anchor] += 1;
        assert_eq!(g.edge_sign(t.anchor, t.positive), Some(Sign::Positive));
        assert_eq!(g.edge_sign(t.anchor, t.negative), Some(Sign::Negative));
    }
    let expected = draws as f64 / counts.len() as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 39 degrees of freedom: mean 39, sd ~8.8; allow well past 3 sd.
    assert!(chi2 < 39.0 + 4.0 * (2.0f64 * 39.0).sqrt(), "chi2 {chi2}");
}
