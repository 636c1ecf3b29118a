//! Dataset ingestion and the text preprocessing pipeline.
//!
//! Raw question pairs come from the Quora TSV release or a Stack Exchange
//! archive dump. Each question is normalised as
//! expand contractions -> tokenize -> drop stopwords -> lemmatize -> stem,
//! and every intermediate view is kept on [`ProcessedQuestion`].

mod cache;
mod lemma;
pub mod porter;
mod quora;
mod split;
mod stackexchange;
mod text;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use cache::{read_cache, write_cache, CacheHeader, CACHE_FORMAT};
pub use lemma::lemmatize;
pub use porter::stem;
pub use quora::{load_quora_tsv, QUORA_COLUMNS};
pub use split::{split_dataset, DatasetSplit};
pub use stackexchange::load_stackexchange;
pub use text::{
    expand_abbreviations, is_english, is_stopword, remove_stopwords, tokenize, STOPWORDS,
};

/// Version tag of the preprocessing pipeline; stored in caches and reports.
pub const PREPROCESS_VERSION: &str = "pp_v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Quora,
    AskUbuntu,
    EnglishSE,
    Synthetic,
}

impl Source {
    pub const ALL: [Source; 4] = [
        Source::Quora,
        Source::AskUbuntu,
        Source::EnglishSE,
        Source::Synthetic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Source::Quora => "quora",
            Source::AskUbuntu => "askubuntu",
            Source::EnglishSE => "englishse",
            Source::Synthetic => "synthetic",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Source {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        Source::ALL
            .into_iter()
            .find(|src| src.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| crate::Error::InvalidArgument(format!("unknown dataset source '{s}'")))
    }
}

/// Two question titles and the moderator label (1 = duplicate).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionPair {
    pub id: u64,
    pub q1_raw: String,
    pub q2_raw: String,
    pub label: u8,
    pub source: Source,
}

/// Rows that a loader could not turn into a pair.
#[derive(Debug, Clone, Default)]
pub struct LoadReport {
    pub pairs: Vec<QuestionPair>,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ProcessedQuestion {
    pub raw: String,
    pub expanded: String,
    pub tokens: Vec<String>,
    pub tokens_no_stop: Vec<String>,
    pub lemmas: Vec<String>,
    pub stems: Vec<String>,
}

pub fn preprocess(raw: &str) -> ProcessedQuestion {
    let expanded = expand_abbreviations(raw);
    let tokens = tokenize(&expanded);
    let tokens_no_stop = remove_stopwords(&tokens);
    let lemmas: Vec<String> = tokens_no_stop.iter().map(|t| lemmatize(t)).collect();
    let stems = lemmas.iter().map(|t| stem(t)).collect();
    ProcessedQuestion {
        raw: raw.to_string(),
        expanded,
        tokens,
        tokens_no_stop,
        lemmas,
        stems,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessedPair {
    pub id: u64,
    pub source: Source,
    pub label: u8,
    #[serde(rename = "q1_stages")]
    pub q1: ProcessedQuestion,
    #[serde(rename = "q2_stages")]
    pub q2: ProcessedQuestion,
}

impl ProcessedPair {
    pub fn from_pair(pair: &QuestionPair) -> Self {
        ProcessedPair {
            id: pair.id,
            source: pair.source,
            label: pair.label,
            q1: preprocess(&pair.q1_raw),
            q2: preprocess(&pair.q2_raw),
        }
    }

    /// The same pair with the two questions exchanged.
    pub fn swapped(&self) -> Self {
        ProcessedPair {
            q1: self.q2.clone(),
            q2: self.q1.clone(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    Empty,
    NonEnglish,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropTally {
    pub empty: usize,
    pub non_english: usize,
}

impl DropTally {
    pub fn total(&self) -> usize {
        self.empty + self.non_english
    }
}

#[derive(Debug, Clone, Default)]
pub struct FilterOutcome {
    pub kept: Vec<QuestionPair>,
    pub tally: DropTally,
}

/// Why a pair would be dropped, if at all. Emptiness is checked first.
pub fn drop_reason(pair: &QuestionPair) -> Option<DropReason> {
    let empty = |q: &str| tokenize(&expand_abbreviations(q)).is_empty();
    if empty(&pair.q1_raw) || empty(&pair.q2_raw) {
        Some(DropReason::Empty)
    } else if !is_english(&pair.q1_raw) || !is_english(&pair.q2_raw) {
        Some(DropReason::NonEnglish)
    } else {
        None
    }
}

/// Drop pairs with a question that has no tokens after preprocessing, or
/// that fails the English check.
pub fn filter_pairs(pairs: Vec<QuestionPair>) -> FilterOutcome {
    let mut out = FilterOutcome::default();
    for pair in pairs {
        match drop_reason(&pair) {
            None => out.kept.push(pair),
            Some(DropReason::Empty) => out.tally.empty += 1,
            Some(DropReason::NonEnglish) => out.tally.non_english += 1,
        }
    }
    out
}

pub fn process_pairs(pairs: &[QuestionPair]) -> Vec<ProcessedPair> {
    use rayon::prelude::*;
    pairs.par_iter().map(ProcessedPair::from_pair).collect()
}

/// Pair count and words-per-question statistics over raw titles
/// (whitespace-separated words).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub pair_count: usize,
    pub max_wpq: usize,
    pub mean_wpq: f64,
}

pub fn dataset_stats(pairs: &[QuestionPair]) -> DatasetStats {
    let mut max_wpq = 0;
    let mut total = 0usize;
    for pair in pairs {
        for q in [&pair.q1_raw, &pair.q2_raw] {
            let n = q.split_whitespace().count();
            max_wpq = max_wpq.max(n);
            total += n;
        }
    }
    let mean_wpq = if pairs.is_empty() {
        0.0
    } else {
        total as f64 / (2 * pairs.len()) as f64
    };
    DatasetStats {
        pair_count: pairs.len(),
        max_wpq,
        mean_wpq,
    }
}
