//! A small Siamese network engine in `f64` with a hand-written backward
//! pass.
//!
//! ```text
//! q1 ids -> E -> R --\
//!                     A -> D -> sigmoid
//! q2 ids -> E -> R --/
//! ```
//!
//! `E` is the embedding matrix, `R` the shared encoder (masked mean pooling
//! or an LSTM) followed by a ReLU dense stack, `A` the parameter-free
//! aggregation (`exp(-|r1 - r2|)` or concatenation) and `D` a ReLU dense
//! stack ending in one sigmoid unit. Both questions are encoded with the
//! same `R` arrays; there is no second copy to keep in sync.

mod gradcheck;
mod model;
mod optim;
mod params;
mod train;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use gradcheck::{gradient_check, GradCheck};
pub use model::{
    aggregate_concat, aggregate_exp_abs, backward, bce_loss, encoder_forward, forward,
    forward_logit, Gradients, BCE_CLAMP,
};
pub use optim::{nadam_step, NadamState};
pub use params::{
    init_parameters, read_parameters, write_parameters, Group, ParamArray, ParameterStore,
    PARAMS_FORMAT,
};
pub use train::{score_pairs, train_snn, write_history, EpochRecord, SnnTraining, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoder {
    MeanPool,
    Lstm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    ExpAbsDiff,
    Concat,
}

/// Architecture of a Siamese network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnnSpec {
    pub max_len: usize,
    pub vocab_size: usize,
    pub embed_dim: usize,
    pub encoder: Encoder,
    /// LSTM state width; unused by mean pooling.
    pub hidden_dim: usize,
    /// ReLU dense layers applied to the encoder output.
    pub representation: Vec<usize>,
    pub aggregation: Aggregation,
    /// Decision layers; all but the last are ReLU, the last has one
    /// sigmoid unit.
    pub decision: Vec<usize>,
    pub seed: u64,
}

impl SnnSpec {
    /// Default sizes for a given vocabulary.
    pub fn new(vocab_size: usize, encoder: Encoder, aggregation: Aggregation, seed: u64) -> Self {
        SnnSpec {
            max_len: 30,
            vocab_size,
            embed_dim: 50,
            encoder,
            hidden_dim: 64,
            representation: vec![64],
            aggregation,
            decision: vec![32, 1],
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(format!("snn spec: {m}")));
        if self.decision.last() != Some(&1) {
            return bad("decision layers must end in a single unit");
        }
        if self.max_len == 0 || self.embed_dim == 0 || self.vocab_size < 2 {
            return bad("max_len and embed_dim must be positive and the vocabulary must hold <pad> and <oov>");
        }
        if self.encoder == Encoder::Lstm && self.hidden_dim == 0 {
            return bad("lstm hidden_dim must be positive");
        }
        if self.representation.contains(&0) || self.decision.contains(&0) {
            return bad("dense layers need at least one unit");
        }
        Ok(())
    }

    pub fn encoder_dim(&self) -> usize {
        match self.encoder {
            Encoder::MeanPool => self.embed_dim,
            Encoder::Lstm => self.hidden_dim,
        }
    }

    pub fn representation_dim(&self) -> usize {
        self.representation
            .last()
            .copied()
            .unwrap_or(self.encoder_dim())
    }

    pub fn aggregate_dim(&self) -> usize {
        match self.aggregation {
            Aggregation::ExpAbsDiff => self.representation_dim(),
            Aggregation::Concat => 2 * self.representation_dim(),
        }
    }
}

/// A network: its architecture and its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Snn {
    pub spec: SnnSpec,
    pub params: ParameterStore,
}
