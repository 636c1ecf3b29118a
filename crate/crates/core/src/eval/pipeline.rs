//! Fit one approach on a split dataset and score its held-out test split.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{ConfigEcho, EvalReport, ModelKind, ScoredSet};
use crate::corpus::{DatasetSplit, ProcessedPair};
use crate::embeddings::{build_vocab, EmbeddingTable, EncodedPair, Vocab};
use crate::features::{featurize_all, FeatureContext, CATALOG_VERSION};
use crate::gbt::{
    predict_gbt, train_gbt_validated, FeatureTable, GbtParams, RoundRecord, TreeEnsemble,
};
use crate::net::{
    init_parameters, score_pairs, train_snn, Aggregation, Encoder, EpochRecord, Snn, SnnSpec,
    TrainConfig,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Approach {
    Gbt,
    Snn,
}

/// Architecture of the Siamese network, minus the vocabulary size, which
/// comes from the training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SnnSettings {
    pub max_len: usize,
    pub embed_dim: usize,
    pub encoder: Encoder,
    pub hidden_dim: usize,
    pub representation: Vec<usize>,
    pub aggregation: Aggregation,
    pub decision: Vec<usize>,
    pub min_count: usize,
    pub seed: u64,
}

impl Default for SnnSettings {
    fn default() -> Self {
        let spec = SnnSpec::new(0, Encoder::MeanPool, Aggregation::ExpAbsDiff, 0);
        SnnSettings {
            max_len: spec.max_len,
            embed_dim: spec.embed_dim,
            encoder: spec.encoder,
            hidden_dim: spec.hidden_dim,
            representation: spec.representation,
            aggregation: spec.aggregation,
            decision: spec.decision,
            min_count: 1,
            seed: 0,
        }
    }
}

impl SnnSettings {
    pub fn spec(&self, vocab_size: usize) -> SnnSpec {
        SnnSpec {
            max_len: self.max_len,
            vocab_size,
            embed_dim: self.embed_dim,
            encoder: self.encoder,
            hidden_dim: self.hidden_dim,
            representation: self.representation.clone(),
            aggregation: self.aggregation,
            decision: self.decision.clone(),
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub approach: Approach,
    pub split_seed: u64,
    pub gbt: GbtParams,
    pub snn: SnnSettings,
    pub train: TrainConfig,
    /// Include the question co-occurrence graph block in the features.
    pub use_graph: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            approach: Approach::Gbt,
            split_seed: 0,
            gbt: GbtParams::default(),
            snn: SnnSettings::default(),
            train: TrainConfig::default(),
            use_graph: true,
        }
    }
}

impl PipelineConfig {
    pub fn seeds(&self) -> BTreeMap<String, u64> {
        let mut seeds = BTreeMap::from([("split".to_string(), self.split_seed)]);
        match self.approach {
            Approach::Gbt => {
                seeds.insert("gbt".into(), self.gbt.seed);
            }
            Approach::Snn => {
                seeds.insert("snn_init".into(), self.snn.seed);
                seeds.insert("snn_train".into(), self.train.seed);
            }
        }
        seeds
    }

    /// Echo of this configuration for a report.
    pub fn echo(&self, preprocess_version: &str) -> ConfigEcho {
        ConfigEcho {
            preprocess_version: preprocess_version.to_string(),
            catalog_version: (self.approach == Approach::Gbt).then(|| CATALOG_VERSION.to_string()),
            seeds: self.seeds(),
            hyperparameters: serde_json::to_value(self).expect("plain data serializes"),
        }
    }
}

/// A dataset already split, tagged with the preprocessing that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSplit {
    pub dataset: String,
    pub preprocess: String,
    pub split: DatasetSplit<ProcessedPair>,
}

#[derive(Debug, Clone)]
pub enum FittedModel {
    Gbt {
        model: TreeEnsemble,
        context: FeatureContext,
        history: Vec<RoundRecord>,
    },
    Snn {
        model: Snn,
        vocab: Vocab,
        history: Vec<EpochRecord>,
    },
}

/// A fitted model and the preprocessing version it expects.
#[derive(Debug, Clone)]
pub struct Fitted {
    pub model: FittedModel,
    pub preprocess: String,
    pub config: PipelineConfig,
}

/// Train the configured approach. The feature graph spans `all` pairs;
/// IDF and the SNN vocabulary come from `train` only. `table` feeds the
/// embedding features and the SNN's pretrained rows; its dimension must
/// equal `snn.embed_dim` for the SNN.
pub fn fit(
    train: &[ProcessedPair],
    validation: &[ProcessedPair],
    all: &[&ProcessedPair],
    table: Option<&EmbeddingTable>,
    preprocess: &str,
    config: &PipelineConfig,
) -> Result<Fitted> {
    if train.is_empty() {
        return Err(Error::EmptyDataset("training split".into()));
    }
    let model = match config.approach {
        Approach::Gbt => {
            let table = table
                .cloned()
                .unwrap_or_else(|| EmbeddingTable::new(config.snn.embed_dim));
            let context = FeatureContext::build(train, all, table, config.use_graph);
            let (x, y) = feature_table(train, &context);
            let (vx, vy) = feature_table(validation, &context);
            let val = (!validation.is_empty()).then_some((&vx, vy.as_slice()));
            let out = train_gbt_validated(&x, &y, val, &config.gbt)?;
            FittedModel::Gbt {
                model: out.model,
                context,
                history: out.history,
            }
        }
        Approach::Snn => {
            let vocab = build_vocab(
                train.iter().flat_map(|p| [&p.q1.tokens, &p.q2.tokens]),
                config.snn.min_count,
            )?;
            let spec = config.snn.spec(vocab.len());
            let encode = |v: &[ProcessedPair]| -> Vec<EncodedPair> {
                v.iter()
                    .map(|p| EncodedPair::from_processed(&vocab, p, spec.max_len))
                    .collect()
            };
            let (train, validation) = (encode(train), encode(validation));
            let params = init_parameters(&spec, &vocab, table)?;
            let out = train_snn(Snn { spec, params }, &train, &validation, &config.train)?;
            FittedModel::Snn {
                model: out.model,
                vocab,
                history: out.history,
            }
        }
    };
    Ok(Fitted {
        model,
        preprocess: preprocess.to_string(),
        config: config.clone(),
    })
}

fn feature_table(pairs: &[ProcessedPair], context: &FeatureContext) -> (FeatureTable, Vec<u8>) {
    let rows = featurize_all(pairs, context);
    (
        FeatureTable::from_vectors(&rows),
        pairs.iter().map(|p| p.label).collect(),
    )
}

/// Model scores for `pairs`: probabilities for GBT, logits for the SNN.
pub fn score(fitted: &Fitted, pairs: &[ProcessedPair], preprocess: &str) -> Result<Vec<f64>> {
    if preprocess != fitted.preprocess {
        return Err(Error::VersionMismatch {
            what: "preprocessing",
            expected: fitted.preprocess.clone(),
            found: preprocess.to_string(),
        });
    }
    match &fitted.model {
        FittedModel::Gbt { model, context, .. } => {
            predict_gbt(model, &feature_table(pairs, context).0)
        }
        FittedModel::Snn { model, vocab, .. } => {
            let encoded: Vec<EncodedPair> = pairs
                .iter()
                .map(|p| EncodedPair::from_processed(vocab, p, model.spec.max_len))
                .collect();
            Ok(score_pairs(model, &encoded))
        }
    }
}

/// Score every test pair and report AUC with the full configuration echo.
pub fn evaluate(fitted: &Fitted, data: &LabeledSplit, kind: ModelKind) -> Result<EvalReport> {
    let scores = score(fitted, &data.split.test, &data.preprocess)?;
    let labels = data.split.test.iter().map(|p| p.label).collect();
    let scored = ScoredSet::new(data.dataset.clone(), kind.as_str(), scores, labels)?;
    EvalReport::new(
        kind,
        &scored,
        data.split.sizes(),
        fitted.config.echo(&fitted.preprocess),
    )
}

/// One model on the concatenated train and validation splits of every
/// dataset, then one report per dataset on its own test split.
pub fn run_combined_baseline(
    datasets: &[LabeledSplit],
    table: Option<&EmbeddingTable>,
    config: &PipelineConfig,
) -> Result<Vec<EvalReport>> {
    let first = datasets
        .first()
        .ok_or_else(|| Error::EmptyDataset("no datasets to combine".into()))?;
    for d in datasets {
        if d.split.train.is_empty() || d.split.test.is_empty() {
            return Err(Error::EmptyDataset(d.dataset.clone()));
        }
        if d.preprocess != first.preprocess {
            return Err(Error::VersionMismatch {
                what: "preprocessing",
                expected: first.preprocess.clone(),
                found: d.preprocess.clone(),
            });
        }
    }
    let train: Vec<ProcessedPair> = datasets
        .iter()
        .flat_map(|d| d.split.train.iter().cloned())
        .collect();
    let validation: Vec<ProcessedPair> = datasets
        .iter()
        .flat_map(|d| d.split.validation.iter().cloned())
        .collect();
    let all: Vec<&ProcessedPair> = datasets
        .iter()
        .flat_map(|d| {
            d.split
                .train
                .iter()
                .chain(&d.split.validation)
                .chain(&d.split.test)
        })
        .collect();
    let fitted = fit(&train, &validation, &all, table, &first.preprocess, config)?;
    datasets
        .par_iter()
        .map(|d| {
            let mut report = evaluate(&fitted, d, ModelKind::Combined)?;
            report.split_sizes = [train.len(), validation.len(), d.split.test.len()];
            Ok(report)
        })
        .collect()
}
