use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{metrics, DescriptorTarget, Metrics, RankedEntry, RankedList, ScreenError};
use crate::mpe::{FeatureScaler, pair_features};
use crate::nn::{oversample, train_adam, LabeledPair, Mlp, TrainConfig, TrainReport};
use crate::rng::substream;
use crate::sc_nn::ScEngine;
use crate::PAIR_FEATURES;

/// Anything that maps a scaled 24-feature pair to a ranking score.
pub trait Scorer: Sync {
    fn input_width(&self) -> usize;
    fn score(&self, features: &[f64]) -> Result<f64, ScreenError>;
}

impl Scorer for Mlp {
    fn input_width(&self) -> usize {
        Mlp::input_width(self)
    }

    fn score(&self, features: &[f64]) -> Result<f64, ScreenError> {
        Ok(self.forward(features)?)
    }
}

impl Scorer for ScEngine {
    fn input_width(&self) -> usize {
        self.network().input_width()
    }

    fn score(&self, features: &[f64]) -> Result<f64, ScreenError> {
        Ok(self.infer(features)?)
    }
}

/// Wraps a closure, for stub and oracle models.
pub struct FnScorer<F>(pub F);

impl<F: Fn(&[f64]) -> f64 + Sync> Scorer for FnScorer<F> {
    fn input_width(&self) -> usize {
        PAIR_FEATURES
    }

    fn score(&self, features: &[f64]) -> Result<f64, ScreenError> {
        Ok((self.0)(features))
    }
}

fn check_width(model: &dyn Scorer) -> Result<(), ScreenError> {
    if model.input_width() != PAIR_FEATURES {
        return Err(ScreenError::InputWidth { expected: model.input_width(), got: PAIR_FEATURES });
    }
    Ok(())
}

/// Scores every active and decoy of `target` against its crystal ligand.
pub fn score_library(model: &dyn Scorer, target: &DescriptorTarget, scaler: &FeatureScaler) -> Result<RankedList, ScreenError> {
    check_width(model)?;
    let compounds: Vec<_> = target.actives.iter().map(|c| (c, true)).chain(target.decoys.iter().map(|c| (c, false))).collect();
    let entries = compounds
        .par_iter()
        .map(|(c, active)| {
            let x = scaler.transform(&pair_features(&target.ligand, &c.descriptor))?;
            Ok(RankedEntry { compound_id: c.id.clone(), score: model.score(&x)?, active: *active })
        })
        .collect::<Result<Vec<_>, ScreenError>>()?;
    Ok(RankedList::new(&target.target_id, entries))
}

/// Scores already-scaled pairs and ranks them per target, in target-id
/// order.
pub fn evaluate_pairs(model: &dyn Scorer, pairs: &[LabeledPair]) -> Result<Vec<RankedList>, ScreenError> {
    check_width(model)?;
    let scores = pairs.par_iter().map(|p| model.score(&p.features)).collect::<Result<Vec<_>, _>>()?;
    let mut groups: BTreeMap<&str, Vec<RankedEntry>> = BTreeMap::new();
    for (p, score) in pairs.iter().zip(scores) {
        groups.entry(&p.target_id).or_default().push(RankedEntry {
            compound_id: p.compound_id.clone(),
            score,
            active: p.active,
        });
    }
    Ok(groups.into_iter().map(|(t, e)| RankedList::new(t, e)).collect())
}

#[derive(Debug, Clone)]
pub struct PerTargetResult {
    pub model: Mlp,
    pub scaler: FeatureScaler,
    pub metrics: Metrics,
    pub report: TrainReport,
    pub train_size: usize,
    pub test_size: usize,
}

pub const PER_TARGET_TEST_FRACTION: f64 = 0.2;

/// Stratified 80/20 split, oversampled training side, one model per target.
pub fn per_target_protocol(target: &DescriptorTarget, template: &Mlp, cfg: &TrainConfig) -> Result<PerTargetResult, ScreenError> {
    target.validate()?;
    let mut rng = substream(cfg.seed, &format!("per-target/{}", target.target_id));
    let pairs = target.pairs();
    let (actives, decoys) = pairs.split_at(target.actives.len());
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (class, group) in [("actives", actives), ("decoys", decoys)] {
        if group.len() < 2 {
            return Err(ScreenError::EmptyClass { target: target.target_id.clone(), class });
        }
        let n_test = ((PER_TARGET_TEST_FRACTION * group.len() as f64).round() as usize).clamp(1, group.len() - 1);
        let mut held = rand::seq::index::sample(&mut rng, group.len(), n_test).into_vec();
        held.sort_unstable();
        for (i, p) in group.iter().enumerate() {
            if held.binary_search(&i).is_ok() {
                test.push(p.clone());
            } else {
                train.push(p.clone());
            }
        }
    }
    let mut train = oversample(&train, cfg.seed)?;
    let scaler = FeatureScaler::fit(train.iter().map(|p| &p.features))?;
    for p in train.iter_mut().chain(test.iter_mut()) {
        p.features = scaler.transform(&p.features)?;
    }
    let (model, report) = train_adam(template, &train, cfg)?;
    let lists = evaluate_pairs(&model, &test)?;
    let metrics = metrics(&lists[0])?;
    Ok(PerTargetResult { model, scaler, metrics, report, train_size: train.len(), test_size: test.len() })
}
