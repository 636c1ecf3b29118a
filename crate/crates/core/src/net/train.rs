//! Epoch loop with seeded shuffling and early stopping on validation AUC.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{backward, batch_loss, forward_logit};
use super::optim::{nadam_step, NadamState};
use super::Snn;
use crate::embeddings::EncodedPair;
use crate::eval::auc;
use crate::{rng, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Epochs without a better validation AUC before stopping; `None`
    /// trains for all epochs.
    pub patience: Option<usize>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 30,
            batch_size: 32,
            learning_rate: 0.002,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            patience: Some(3),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(format!("train config: {m}")));
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if !(self.learning_rate > 0.0 && self.epsilon > 0.0) {
            return bad("learning_rate and epsilon must be positive");
        }
        if !(self.beta1 > 0.0 && self.beta1 < 1.0 && self.beta2 > 0.0 && self.beta2 < 1.0) {
            return bad("beta1 and beta2 must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_auc: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SnnTraining {
    pub model: Snn,
    pub history: Vec<EpochRecord>,
    /// Epoch whose parameters were kept; `None` when no epoch ran.
    pub best_epoch: Option<usize>,
}

/// Logits for a set of pairs, in input order.
pub fn score_pairs(model: &Snn, pairs: &[EncodedPair]) -> Vec<f64> {
    pairs.par_iter().map(|p| forward_logit(model, p)).collect()
}

fn check_ids(model: &Snn, pairs: &[EncodedPair], what: &str) -> Result<()> {
    let v = model.spec.vocab_size;
    for (i, p) in pairs.iter().enumerate() {
        if let Some(id) = p.q1_ids.iter().chain(&p.q2_ids).find(|&&id| id >= v) {
            return Err(Error::InvalidArgument(format!(
                "{what} pair {i} uses id {id}, vocabulary size is {v}"
            )));
        }
        if p.label > 1 {
            return Err(Error::InvalidArgument(format!(
                "{what} pair {i} has label {}",
                p.label
            )));
        }
    }
    Ok(())
}

/// Trains `init` with Nadam and returns the parameters of the epoch with
/// the best validation AUC.
///
/// Each epoch visits the training pairs in an order drawn from a stream
/// keyed by the config seed and the epoch. The recorded training loss is
/// the mean loss over the whole training set after the epoch. Without a
/// usable validation set (empty or single class) every epoch runs and the
/// last parameters are returned.
pub fn train_snn(
    init: Snn,
    train: &[EncodedPair],
    val: &[EncodedPair],
    config: &TrainConfig,
) -> Result<SnnTraining> {
    if train.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    config.validate()?;
    init.spec.validate()?;
    init.params.check_shapes(&init.spec)?;
    check_ids(&init, train, "training")?;
    check_ids(&init, val, "validation")?;

    let labels: Vec<u8> = val.iter().map(|p| p.label).collect();
    let validate = !val.is_empty() && labels.contains(&0) && labels.contains(&1);
    if !val.is_empty() && !validate {
        log::warn!("validation set has a single class; early stopping disabled");
    }

    let mut model = init;
    let mut state = NadamState::new(&model.params);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut history = Vec::new();
    let mut best: Option<(usize, f64, Snn)> = None;
    let mut t = 0;
    for epoch in 0..config.epochs {
        let mut shuffle = rng::stream(config.seed, &format!("snn-shuffle/{epoch}"));
        order.shuffle(&mut shuffle);
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<EncodedPair> = chunk.iter().map(|&i| train[i].clone()).collect();
            let grads = backward(&model, &batch);
            t += 1;
            nadam_step(&mut model.params, &grads, &mut state, config, t)?;
        }
        let train_loss = batch_loss(&model, train);
        let val_auc = if validate {
            Some(auc(&score_pairs(&model, val), &labels)?)
        } else {
            None
        };
        log::debug!("epoch {epoch}: loss {train_loss:.6} val auc {val_auc:?}");
        history.push(EpochRecord {
            epoch,
            train_loss,
            val_auc,
        });
        let Some(a) = val_auc else { continue };
        if best.as_ref().is_none_or(|(_, b, _)| a > *b) {
            best = Some((epoch, a, model.clone()));
        }
        if let (Some(patience), Some((best_epoch, _, _))) = (config.patience, &best) {
            if epoch - best_epoch >= patience {
                break;
            }
        }
    }
    let (model, best_epoch) = match best {
        Some((epoch, _, kept)) => (kept, Some(epoch)),
        None => (model, history.last().map(|r| r.epoch)),
    };
    Ok(SnnTraining {
        model,
        history,
        best_epoch,
    })
}

/// One JSON object per line.
pub fn write_history(path: &Path, history: &[EpochRecord]) -> Result<()> {
    let mut out = String::new();
    for r in history {
        out.push_str(
            &serde_json::to_string(r)
                .map_err(|e| Error::format("training history", e.to_string()))?,
        );
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
