use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Gradients, Mlp, NnError};
use crate::rng::substream;
use crate::PAIR_FEATURES;

/// One network input: crystal-ligand descriptor followed by the candidate
/// descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPair {
    pub features: [f64; PAIR_FEATURES],
    pub active: bool,
    pub target_id: String,
    pub compound_id: String,
}

impl LabeledPair {
    pub fn label(&self) -> f64 {
        if self.active {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    /// Binary cross-entropy on the sigmoid of the output.
    BceWithLogits,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Fraction held out for early stopping; 0 trains on everything.
    pub validation_fraction: f64,
    /// Epochs without validation improvement before stopping; 0 disables.
    pub patience: usize,
    pub loss: Loss,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            epochs: 50,
            batch_size: 256,
            seed: 0,
            validation_fraction: 0.1,
            patience: 10,
            loss: Loss::BceWithLogits,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), NnError> {
        let bad = |m: &str| Err(NnError::InvalidConfig(m.into()));
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be finite and non-negative");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("beta1 and beta2 must lie in [0, 1)");
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return bad("validation_fraction must lie in [0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean training loss per epoch.
    pub loss_curve: Vec<f64>,
    /// Mean validation loss per epoch (empty without a validation split).
    pub validation_curve: Vec<f64>,
    pub epochs_run: usize,
    /// Epoch whose parameters were kept, when early stopping is active.
    pub best_epoch: Option<usize>,
    pub train_size: usize,
    pub validation_size: usize,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(n: usize) -> Self {
        Self { m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    fn step(&mut self, mlp: &mut Mlp, grads: &Gradients, cfg: &TrainConfig) {
        self.t += 1;
        let c1 = 1.0 - cfg.beta1.powi(self.t);
        let c2 = 1.0 - cfg.beta2.powi(self.t);
        for (((p, &g), m), v) in mlp.params_mut().zip(grads.iter()).zip(&mut self.m).zip(&mut self.v) {
            *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
            *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
            *p -= cfg.learning_rate * (*m / c1) / ((*v / c2).sqrt() + cfg.epsilon);
        }
    }
}

fn mean_loss(mlp: &Mlp, data: &[&LabeledPair]) -> Result<f64, NnError> {
    let mut total = 0.0;
    for s in data {
        total += mlp.loss(&s.features, s.label())?;
    }
    Ok(total / data.len() as f64)
}

/// Mini-batch Adam on binary cross-entropy.
///
/// Deterministic for a fixed `cfg.seed`: the validation hold-out and the
/// per-epoch batch order are drawn from labeled substreams of that seed and
/// gradients are reduced in sample order.
pub fn train_adam(mlp: &Mlp, data: &[LabeledPair], cfg: &TrainConfig) -> Result<(Mlp, TrainReport), NnError> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(NnError::EmptyData);
    }
    if mlp.input_width() != PAIR_FEATURES {
        return Err(NnError::InputMismatch { expected: PAIR_FEATURES, got: mlp.input_width() });
    }

    let mut order: Vec<usize> = (0..data.len()).collect();
    let n_val = if cfg.validation_fraction > 0.0 && data.len() >= 10 {
        order.shuffle(&mut substream(cfg.seed, "train/validation"));
        ((data.len() as f64 * cfg.validation_fraction).ceil() as usize).min(data.len() - 1)
    } else {
        0
    };
    let validation: Vec<&LabeledPair> = order[..n_val].iter().map(|&i| &data[i]).collect();
    let mut train_idx: Vec<usize> = order[n_val..].to_vec();
    train_idx.sort_unstable();

    let mut model = mlp.clone();
    let mut adam = Adam::new(model.param_count());
    let mut shuffle_rng = substream(cfg.seed, "train/shuffle");
    let mut report = TrainReport {
        loss_curve: Vec::with_capacity(cfg.epochs),
        validation_curve: Vec::new(),
        epochs_run: 0,
        best_epoch: None,
        train_size: train_idx.len(),
        validation_size: validation.len(),
    };
    let mut best: Option<(f64, Mlp)> = None;
    let mut stale = 0usize;

    for epoch in 0..cfg.epochs {
        train_idx.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        for (b, batch) in train_idx.chunks(cfg.batch_size).enumerate() {
            let mut grads = Gradients::zeros_like(&model);
            let mut batch_loss = 0.0;
            for &i in batch {
                let s = &data[i];
                batch_loss += model.accumulate_gradient(&s.features, s.label(), &mut grads).map_err(|e| match e {
                    NnError::NonFinite { .. } => NnError::NanLoss { epoch, batch: b },
                    other => other,
                })?;
            }
            if !batch_loss.is_finite() {
                return Err(NnError::NanLoss { epoch, batch: b });
            }
            let scale = 1.0 / batch.len() as f64;
            grads.iter_mut().for_each(|g| *g *= scale);
            adam.step(&mut model, &grads, cfg);
            epoch_loss += batch_loss;
        }
        report.loss_curve.push(epoch_loss / train_idx.len() as f64);
        report.epochs_run = epoch + 1;

        if !validation.is_empty() {
            let val = mean_loss(&model, &validation).map_err(|_| NnError::NanLoss { epoch, batch: 0 })?;
            report.validation_curve.push(val);
            if best.as_ref().is_none_or(|(b, _)| val < *b) {
                best = Some((val, model.clone()));
                report.best_epoch = Some(epoch);
                stale = 0;
            } else {
                stale += 1;
                if cfg.patience > 0 && stale >= cfg.patience {
                    break;
                }
            }
        }
    }

    if let Some((_, kept)) = best {
        model = kept;
    }
    model.mark_trained();
    Ok((model, report))
}

/// Resample the minority class with replacement until both classes have the
/// same count. Every original sample is kept, in its original order, and the
/// draws are appended after them.
pub fn oversample(data: &[LabeledPair], seed: u64) -> Result<Vec<LabeledPair>, NnError> {
    let actives: Vec<&LabeledPair> = data.iter().filter(|p| p.active).collect();
    let decoys: Vec<&LabeledPair> = data.iter().filter(|p| !p.active).collect();
    if actives.is_empty() || decoys.is_empty() {
        return Err(NnError::SingleClass);
    }
    let (minority, deficit) = if actives.len() < decoys.len() {
        (&actives, decoys.len() - actives.len())
    } else {
        (&decoys, actives.len() - decoys.len())
    };
    let mut rng = substream(seed, "oversample");
    let mut out = data.to_vec();
    out.extend((0..deficit).map(|_| minority[rng.random_range(0..minority.len())].clone()));
    Ok(out)
}
