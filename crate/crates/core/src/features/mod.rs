//! The 42-coordinate hand-crafted pair representation fed to the boosted
//! trees: lexical overlap and fuzzy ratios, TF-IDF distances, relaxed word
//! mover's distances, mean-embedding distances and pair-graph statistics.
//!
//! Every block has a defined value for degenerate inputs (empty questions,
//! no in-vocabulary words, unseen graph nodes), so vectors are always
//! finite.

mod catalog;
mod embedding;
mod graph;
mod lexical;
mod matrix;
mod tfidf;
mod wmd;

use rayon::prelude::*;

pub use catalog::{
    catalog_jsonl, feature_names, Block, FeatureSpec, Kind, CATALOG, CATALOG_VERSION, FEATURE_COUNT,
};
pub use embedding::{
    braycurtis, canberra, cityblock, correlation_distance, cosine_distance,
    embedding_distance_features, euclidean, kurtosis, minkowski, skewness,
};
pub use graph::{build_pair_graph, graph_features, PairGraph};
pub use lexical::{
    levenshtein, levenshtein_ratio, lexical_features, longest_common_substring, partial_ratio,
    token_set_ratio, token_sort_ratio,
};
pub use matrix::{read_feature_matrix, write_feature_matrix, FeatureMatrix};
pub use tfidf::{tfidf_features, IdfTable};
pub use wmd::{exact_wmd_small, relaxed_wmd, EXACT_WMD_LIMIT};

use crate::corpus::ProcessedPair;
use crate::embeddings::EmbeddingTable;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; FEATURE_COUNT]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Immutable inputs shared by every pair: IDF from the training split, the
/// word vectors, and the co-occurrence graph over all splits.
#[derive(Debug, Clone)]
pub struct FeatureContext {
    pub idf: IdfTable,
    pub table: EmbeddingTable,
    pub graph: PairGraph,
    /// When false the graph block is all zeros.
    pub use_graph: bool,
}

impl FeatureContext {
    /// IDF over the questions of `train`, graph over `all` pairs.
    pub fn build(
        train: &[ProcessedPair],
        all: &[&ProcessedPair],
        table: EmbeddingTable,
        use_graph: bool,
    ) -> Self {
        let idf = IdfTable::build(train.iter().flat_map(|p| [&p.q1.stems, &p.q2.stems]));
        let graph = build_pair_graph(all.iter().map(|p| (p.q1.raw.as_str(), p.q2.raw.as_str())));
        FeatureContext {
            idf,
            table,
            graph,
            use_graph,
        }
    }
}

pub fn featurize_pair(pair: &ProcessedPair, ctx: &FeatureContext) -> FeatureVector {
    let (p1, p2) = (&pair.q1, &pair.q2);
    let mut out = [0.0; FEATURE_COUNT];
    out[..17].copy_from_slice(&lexical_features(p1, p2));
    out[17..21].copy_from_slice(&tfidf_features(&p1.stems, &p2.stems, &ctx.idf));
    out[21] = relaxed_wmd(&p1.tokens, &p2.tokens, &ctx.table);
    out[22] = relaxed_wmd(&p1.tokens_no_stop, &p2.tokens_no_stop, &ctx.table);
    out[23..38].copy_from_slice(&embedding_distance_features(p1, p2, &ctx.table, &ctx.idf));
    if ctx.use_graph {
        out[38..42].copy_from_slice(&graph_features(&ctx.graph, &p1.raw, &p2.raw));
    }
    debug_assert!(out.iter().all(|v| v.is_finite()));
    FeatureVector(out)
}

/// Featurize many pairs in parallel; output order follows input order.
pub fn featurize_all(pairs: &[ProcessedPair], ctx: &FeatureContext) -> Vec<FeatureVector> {
    pairs.par_iter().map(|p| featurize_pair(p, ctx)).collect()
}
