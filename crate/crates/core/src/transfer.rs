//! Parameter-initialisation transfer from a source network to a target
//! network, one initialisation state per module.
//!
//! * `I1`: copy the source values and freeze them.
//! * `I2`: copy the source values and keep training them.
//! * `I3`: fresh seeded initialisation, exactly as target-only training
//!   would draw it.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::embeddings::{EmbeddingTable, EncodedPair, Vocab};
use crate::eval::auc;
use crate::net::{
    init_parameters, score_pairs, train_snn, EpochRecord, Group, ParameterStore, Snn, SnnSpec,
    TrainConfig,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InitState {
    I1,
    I2,
    I3,
}

impl InitState {
    pub const ALL: [InitState; 3] = [InitState::I1, InitState::I2, InitState::I3];

    pub fn copies(self) -> bool {
        self != InitState::I3
    }

    pub fn freezes(self) -> bool {
        self == InitState::I1
    }
}

impl fmt::Display for InitState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            InitState::I1 => "I1",
            InitState::I2 => "I2",
            InitState::I3 => "I3",
        };
        f.write_str(s)
    }
}

/// One initialisation state per module, written `[E(I2),R(I3),A(I3),D(I3)]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TlConfig {
    pub e: InitState,
    pub r: InitState,
    pub a: InitState,
    pub d: InitState,
}

impl TlConfig {
    pub const fn new(e: InitState, r: InitState, a: InitState, d: InitState) -> Self {
        TlConfig { e, r, a, d }
    }

    pub const fn uniform(s: InitState) -> Self {
        TlConfig::new(s, s, s, s)
    }

    pub fn state(&self, group: Group) -> InitState {
        match group {
            Group::E => self.e,
            Group::R => self.r,
            Group::A => self.a,
            Group::D => self.d,
        }
    }
}

impl fmt::Display for TlConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[E({}),R({}),A({}),D({})]",
            self.e, self.r, self.a, self.d
        )
    }
}

impl FromStr for TlConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::InvalidArgument(format!(
                "bad transfer config '{s}', expected like [E(I2),R(I3),A(I3),D(I3)]"
            ))
        };
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(bad)?;
        let mut states = Vec::with_capacity(4);
        for (part, group) in inner.split(',').zip(["E", "R", "A", "D"]) {
            let state = part
                .trim()
                .strip_prefix(group)
                .and_then(|t| t.strip_prefix('('))
                .and_then(|t| t.strip_suffix(')'))
                .and_then(|t| InitState::ALL.into_iter().find(|st| st.to_string() == t))
                .ok_or_else(bad)?;
            states.push(state);
        }
        match states.as_slice() {
            &[e, r, a, d] if inner.split(',').count() == 4 => Ok(TlConfig::new(e, r, a, d)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for TlConfig {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TlConfig {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    Curated,
    Full,
}

impl FromStr for SweepMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "curated" => Ok(SweepMode::Curated),
            "full" => Ok(SweepMode::Full),
            _ => Err(Error::InvalidArgument(format!(
                "sweep must be 'curated' or 'full', got '{s}'"
            ))),
        }
    }
}

/// Configurations to try. `Curated` lists six, in a fixed order; `Full`
/// lists all 81 with `E` varying slowest.
pub fn enumerate_configs(mode: SweepMode) -> Vec<TlConfig> {
    use InitState::{I1, I2, I3};
    match mode {
        SweepMode::Curated => vec![
            TlConfig::new(I2, I3, I3, I3),
            TlConfig::new(I2, I2, I3, I3),
            TlConfig::uniform(I2),
            TlConfig::uniform(I3),
            TlConfig::new(I2, I2, I2, I3),
            TlConfig::new(I1, I2, I3, I3),
        ],
        SweepMode::Full => {
            let mut out = Vec::with_capacity(81);
            for e in InitState::ALL {
                for r in InitState::ALL {
                    for a in InitState::ALL {
                        for d in InitState::ALL {
                            out.push(TlConfig::new(e, r, a, d));
                        }
                    }
                }
            }
            out
        }
    }
}

/// A trained network together with the vocabulary its ids refer to.
#[derive(Debug, Clone)]
pub struct SourceModel {
    pub model: Snn,
    pub vocab: Vocab,
}

/// Initial target parameters under `config`.
///
/// The starting point is the target-only initialisation (seeded by
/// `target_spec.seed`). Copied groups then take the source values; for `E`
/// only rows whose token exists in both vocabularies are copied and every
/// other row keeps its target-only value. `I1` groups are frozen.
pub fn apply_init_config(
    source: &SourceModel,
    target_spec: &SnnSpec,
    target_vocab: &Vocab,
    target_table: Option<&EmbeddingTable>,
    config: &TlConfig,
) -> Result<ParameterStore> {
    let mut store = init_parameters(target_spec, target_vocab, target_table)?;
    let src = &source.model;
    for group in [Group::E, Group::R, Group::D] {
        let state = config.state(group);
        if !state.copies() {
            continue;
        }
        let want: Vec<(&str, &[usize])> = store
            .group_arrays(group)
            .map(|a| (a.name.as_str(), a.shape.as_slice()))
            .collect();
        let have: Vec<(&str, &[usize])> = src
            .params
            .group_arrays(group)
            .map(|a| (a.name.as_str(), a.shape.as_slice()))
            .collect();
        let mismatch =
            |what: String| Error::InvalidArgument(format!("cannot copy group {group}: {what}"));
        if want.iter().map(|w| w.0).ne(have.iter().map(|h| h.0)) {
            return Err(mismatch(format!(
                "source arrays {:?} differ from target arrays {:?}",
                have.iter().map(|h| h.0).collect::<Vec<_>>(),
                want.iter().map(|w| w.0).collect::<Vec<_>>()
            )));
        }
        for ((name, w), (_, h)) in want.iter().zip(&have) {
            let ok = if group == Group::E {
                w[1] == h[1]
            } else {
                w == h
            };
            if !ok {
                return Err(mismatch(format!(
                    "array {name} has source shape {h:?}, target shape {w:?}"
                )));
            }
        }
        if group == Group::E {
            let d = target_spec.embed_dim;
            let src_e = &src.params.get("embedding").expect("embedding array").data;
            let dst = &mut store.get_mut("embedding").expect("embedding array").data;
            for (id, token) in target_vocab.tokens().iter().enumerate() {
                if let Some(sid) = source.vocab.get(token) {
                    dst[id * d..(id + 1) * d].copy_from_slice(&src_e[sid * d..(sid + 1) * d]);
                }
            }
        } else {
            for a in &src.params.arrays {
                if a.group == group {
                    store
                        .get_mut(&a.name)
                        .expect("checked above")
                        .data
                        .clone_from(&a.data);
                }
            }
        }
        store.set_frozen(group, state.freezes());
    }
    Ok(store)
}

/// A split target dataset and the pieces needed to build target networks.
#[derive(Debug, Clone)]
pub struct TargetData {
    pub dataset: String,
    pub spec: SnnSpec,
    pub vocab: Vocab,
    pub table: Option<EmbeddingTable>,
    pub train: Vec<EncodedPair>,
    pub validation: Vec<EncodedPair>,
    pub test: Vec<EncodedPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TlReport {
    pub config: TlConfig,
    pub dataset: String,
    pub seed: u64,
    pub baseline_auc: f64,
    pub transferred_auc: f64,
    pub history: Vec<EpochRecord>,
}

#[derive(Debug, Clone)]
pub struct TransferOutcome {
    pub baseline_auc: f64,
    pub baseline_history: Vec<EpochRecord>,
    /// One report per requested config, in request order.
    pub reports: Vec<TlReport>,
    /// Index into `reports` of the highest transferred AUC, the earliest on
    /// ties; `None` when no config was requested.
    pub best: Option<usize>,
}

fn test_auc(model: &Snn, test: &[EncodedPair]) -> Result<f64> {
    let labels: Vec<u8> = test.iter().map(|p| p.label).collect();
    auc(&score_pairs(model, test), &labels)
}

/// Trains the target-only baseline and one transferred model per config,
/// all with the same training settings, and scores each on the test split.
/// Configs run in parallel; reports keep the request order.
pub fn run_transfer_experiment(
    source: &SourceModel,
    target: &TargetData,
    configs: &[TlConfig],
    train_config: &TrainConfig,
) -> Result<TransferOutcome> {
    let baseline_init = Snn {
        spec: target.spec.clone(),
        params: init_parameters(&target.spec, &target.vocab, target.table.as_ref())?,
    };
    let baseline = train_snn(
        baseline_init,
        &target.train,
        &target.validation,
        train_config,
    )?;
    let baseline_auc = test_auc(&baseline.model, &target.test)?;

    let reports = configs
        .par_iter()
        .map(|config| {
            let params = apply_init_config(
                source,
                &target.spec,
                &target.vocab,
                target.table.as_ref(),
                config,
            )?;
            let init = Snn {
                spec: target.spec.clone(),
                params,
            };
            let trained = train_snn(init, &target.train, &target.validation, train_config)?;
            log::info!("{config}: best epoch {:?}", trained.best_epoch);
            Ok(TlReport {
                config: *config,
                dataset: target.dataset.clone(),
                seed: train_config.seed,
                baseline_auc,
                transferred_auc: test_auc(&trained.model, &target.test)?,
                history: trained.history,
            })
        })
        .collect::<Result<Vec<TlReport>>>()?;

    let mut best: Option<usize> = None;
    for (i, r) in reports.iter().enumerate() {
        if best.is_none_or(|b| r.transferred_auc > reports[b].transferred_auc) {
            best = Some(i);
        }
    }
    Ok(TransferOutcome {
        baseline_auc,
        baseline_history: baseline.history,
        reports,
        best,
    })
}

/// Sweep manifest: one `{"config": .., "seed": ..}` line per config.
pub fn write_manifest(path: &Path, configs: &[TlConfig], seed: u64) -> Result<()> {
    let mut out = String::new();
    for c in configs {
        out.push_str(&serde_json::json!({ "config": c.to_string(), "seed": seed }).to_string());
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn write_reports(path: &Path, reports: &[TlReport]) -> Result<()> {
    let mut out = String::new();
    for r in reports {
        out.push_str(
            &serde_json::to_string(r)
                .map_err(|e| Error::format("transfer report", e.to_string()))?,
        );
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Fixed-width summary, one row per config, best marked with `*`.
pub fn summary_table(outcome: &TransferOutcome) -> String {
    let mut out = format!("{:<28} {:>9} {:>11}\n", "config", "baseline", "transferred");
    for (i, r) in outcome.reports.iter().enumerate() {
        let mark = if Some(i) == outcome.best { " *" } else { "" };
        out.push_str(&format!(
            "{:<28} {:>9.4} {:>11.4}{mark}\n",
            r.config.to_string(),
            r.baseline_auc,
            r.transferred_auc
        ));
    }
    out
}
