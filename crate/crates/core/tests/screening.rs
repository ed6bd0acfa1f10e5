use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scvs_core::mpe::{FeatureScaler, MpeVector};
use scvs_core::nn::{family_shape, Activation, Mlp, TrainConfig};
use scvs_core::screening::*;

fn ranked(rows: &[(f64, bool)]) -> RankedList {
    RankedList::new(
        "t",
        rows.iter()
            .enumerate()
            .map(|(i, &(score, active))| RankedEntry { compound_id: format!("c{i:04}"), score, active })
            .collect(),
    )
}

fn pairwise_auc(rows: &[(f64, bool)]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for a in rows.iter().filter(|r| r.1) {
        for d in rows.iter().filter(|r| !r.1) {
            pairs += 1.0;
            wins += if a.0 > d.0 { 1.0 } else if a.0 == d.0 { 0.5 } else { 0.0 };
        }
    }
    wins / pairs
}

fn recount_ef(list: &RankedList, x: f64) -> f64 {
    let n = list.len();
    let mut window = 0;
    while (window as f64) * 100.0 < x * n as f64 - 1e-7 {
        window += 1;
    }
    let tp = list.entries().iter().take(window).filter(|e| e.active).count();
    let p = list.entries().iter().filter(|e| e.active).count();
    tp as f64 * 100.0 / (x * p as f64)
}

fn rows() -> impl Strategy<Value = Vec<(f64, bool)>> {
    // Coarse scores force plenty of ties.
    prop::collection::vec(((0i32..12).prop_map(|s| f64::from(s) / 4.0), any::<bool>()), 2..120)
        .prop_filter("both classes", |r| r.iter().any(|x| x.1) && r.iter().any(|x| !x.1))
}

proptest! {
    #[test]
    fn auc_matches_pairwise_oracle(r in rows()) {
        prop_assert!((auc(&ranked(&r)).unwrap() - pairwise_auc(&r)).abs() <= 1e-12);
    }

    #[test]
    fn ef_matches_recount(r in rows(), x in prop_oneof![Just(1.0), Just(5.0), Just(10.0), 0.5f64..100.0]) {
        let list = ranked(&r);
        let ef = enrichment_factor(&list, x).unwrap();
        prop_assert_eq!(ef, recount_ef(&list, x));
        prop_assert!(ef >= 0.0 && ef <= 100.0 / x + 1e-9);
    }

    #[test]
    fn metrics_invariant_under_monotone_maps(r in rows()) {
        let base = ranked(&r);
        for f in [|s: f64| 3.0 * s + 1.0, |s: f64| s.exp(), |s: f64| (s - 1.0).atan()] {
            let mapped = ranked(&r.iter().map(|&(s, a)| (f(s), a)).collect::<Vec<_>>());
            prop_assert_eq!(auc(&mapped).unwrap(), auc(&base).unwrap());
            for x in [1.0, 5.0, 10.0, 25.0] {
                prop_assert_eq!(enrichment_factor(&mapped, x).unwrap(), enrichment_factor(&base, x).unwrap());
            }
        }
    }
}

#[test]
fn random_rankings_enrich_at_chance() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut labels: Vec<bool> = (0..1000).map(|i| i % 20 == 0).collect();
    let mut total = 0.0;
    for _ in 0..200 {
        labels.shuffle(&mut rng);
        let rows: Vec<_> = labels.iter().enumerate().map(|(i, &a)| (-(i as f64), a)).collect();
        total += enrichment_factor(&ranked(&rows), 10.0).unwrap();
    }
    let mean = total / 200.0;
    assert!((mean - 1.0).abs() <= 0.2, "{mean}");
}

fn target(id: &str, actives: usize, decoys: usize) -> DescriptorTarget {
    let v = |x: f64| MpeVector { positives: [x, x / 2.0, 0.0, 0.0, 0.0, 0.0], negatives: [-x, 0.0, 0.0, 0.0, 0.0, 0.0] };
    DescriptorTarget {
        target_id: id.into(),
        ligand: v(10.0),
        actives: (0..actives).map(|i| Compound { id: format!("a{i:03}"), descriptor: v(50.0 + i as f64) }).collect(),
        decoys: (0..decoys).map(|i| Compound { id: format!("d{i:03}"), descriptor: v(i as f64 * 0.4) }).collect(),
        skipped: Vec::new(),
    }
}

fn fitted(t: &DescriptorTarget) -> FeatureScaler {
    let pairs = t.pairs();
    FeatureScaler::fit(pairs.iter().map(|p| &p.features)).unwrap()
}

#[test]
fn constant_scorer_ranks_by_compound_id() {
    let t = target("t", 3, 5);
    let list = score_library(&FnScorer(|_: &[f64]| 0.25), &t, &fitted(&t)).unwrap();
    let ids: Vec<_> = list.entries().iter().map(|e| e.compound_id.clone()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
    assert_eq!(auc(&list).unwrap(), 0.5);
}

#[test]
fn oracle_scorer_puts_actives_first() {
    let t = target("t", 4, 30);
    // Candidate p1 separates the classes in this fixture.
    let list = score_library(&FnScorer(|x: &[f64]| x[12]), &t, &fitted(&t)).unwrap();
    assert!(list.entries()[..4].iter().all(|e| e.active));
    assert_eq!(metrics(&list).unwrap().auc, 1.0);
}

#[test]
fn model_width_is_checked() {
    let t = target("t", 2, 2);
    let mlp = Mlp::new(&[12, 4, 1], Activation::Tanh, 0).unwrap();
    assert!(matches!(score_library(&mlp, &t, &fitted(&t)), Err(ScreenError::InputWidth { .. })));
}

fn separable(id: &str) -> DescriptorTarget {
    let mut targets = scvs_core::synth::generate(&scvs_core::synth::SynthConfig {
        targets: 1,
        actives_per_target: 40,
        decoys_per_target: 200,
        spread: 0.03,
        seed: 5,
    });
    let mut t = targets.remove(0);
    t.target_id = id.into();
    t
}

#[test]
fn per_target_protocol_learns_separable_target() {
    let t = separable("sep");
    let template = Mlp::new(&family_shape(64), Activation::Tanh, 3).unwrap();
    let cfg = TrainConfig { epochs: 60, batch_size: 32, seed: 3, ..TrainConfig::default() };
    let r = per_target_protocol(&t, &template, &cfg).unwrap();
    assert!(r.metrics.auc > 0.95, "{:?}", r.metrics);
    assert_eq!(r.test_size, 8 + 40);
    assert!(r.model.is_trained());
}

#[test]
fn per_target_protocol_without_epochs_scores_the_initial_net() {
    let t = separable("null");
    let template = Mlp::new(&family_shape(12), Activation::Tanh, 9).unwrap();
    let cfg = TrainConfig { epochs: 0, seed: 9, ..TrainConfig::default() };
    let r = per_target_protocol(&t, &template, &cfg).unwrap();
    assert_eq!(r.model.params().collect::<Vec<_>>(), template.params().collect::<Vec<_>>());
    assert!((0.0..=1.0).contains(&r.metrics.auc));
}

#[test]
fn per_target_protocol_needs_both_classes() {
    let t = target("small", 1, 10);
    let template = Mlp::new(&family_shape(12), Activation::Tanh, 0).unwrap();
    assert!(matches!(per_target_protocol(&t, &template, &TrainConfig::default()), Err(ScreenError::EmptyClass { .. })));
}

#[test]
fn score_library_agrees_with_evaluate_pairs() {
    let t = separable("c");
    let scaler = fitted(&t);
    let mlp = Mlp::new(&family_shape(24), Activation::Relu, 1).unwrap();
    let a = score_library(&mlp, &t, &scaler).unwrap();
    let mut pairs = t.pairs();
    for p in &mut pairs {
        p.features = scaler.transform(&p.features).unwrap();
    }
    let b = evaluate_pairs(&mlp, &pairs).unwrap();
    assert_eq!(a, b[0]);
    assert_eq!(auc(&a).unwrap(), auc(&b[0]).unwrap());
}
