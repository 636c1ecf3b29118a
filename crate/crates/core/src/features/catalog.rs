//! The frozen, ordered feature catalog.

use serde::Serialize;

pub const CATALOG_VERSION: &str = "catalog_v1";
pub const FEATURE_COUNT: usize = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Block {
    Lexical,
    Tfidf,
    Wmd,
    Embedding,
    Graph,
}

/// How a coordinate behaves on a pair of identical questions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    /// Per-question size; swaps with the question order.
    Length,
    /// Symmetric count without a fixed identical-pair value.
    Count,
    /// 1 for identical questions.
    Similarity,
    /// 0 for identical questions.
    Distance,
    /// Per-question distribution moment.
    Moment,
    /// Pair-graph statistic.
    Structural,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeatureSpec {
    pub index: usize,
    pub name: &'static str,
    pub block: Block,
    pub kind: Kind,
    pub range: &'static str,
    /// Index of the coordinate this one trades places with when the two
    /// questions are swapped (itself for symmetric features).
    #[serde(skip)]
    pub mirror: usize,
}

const fn f(
    index: usize,
    name: &'static str,
    block: Block,
    kind: Kind,
    range: &'static str,
    mirror: usize,
) -> FeatureSpec {
    FeatureSpec {
        index,
        name,
        block,
        kind,
        range,
        mirror,
    }
}

use Block::*;
use Kind::*;

pub const CATALOG: [FeatureSpec; FEATURE_COUNT] = [
    f(0, "q1_token_count", Lexical, Length, "[0,inf)", 1),
    f(1, "q2_token_count", Lexical, Length, "[0,inf)", 0),
    f(2, "abs_token_count_diff", Lexical, Distance, "[0,inf)", 2),
    f(3, "token_count_ratio", Lexical, Similarity, "[0,1]", 3),
    f(4, "q1_char_count", Lexical, Length, "[0,inf)", 5),
    f(5, "q2_char_count", Lexical, Length, "[0,inf)", 4),
    f(6, "common_token_count", Lexical, Count, "[0,inf)", 6),
    f(7, "jaccard", Lexical, Similarity, "[0,1]", 7),
    f(8, "dice", Lexical, Similarity, "[0,1]", 8),
    f(9, "containment", Lexical, Similarity, "[0,1]", 9),
    f(10, "first_token_equal", Lexical, Similarity, "{0,1}", 10),
    f(11, "last_token_equal", Lexical, Similarity, "{0,1}", 11),
    f(12, "levenshtein_ratio", Lexical, Similarity, "[0,1]", 12),
    f(13, "partial_ratio", Lexical, Similarity, "[0,1]", 13),
    f(14, "token_sort_ratio", Lexical, Similarity, "[0,1]", 14),
    f(15, "token_set_ratio", Lexical, Similarity, "[0,1]", 15),
    f(
        16,
        "longest_common_substring_ratio",
        Lexical,
        Similarity,
        "[0,1]",
        16,
    ),
    f(17, "tfidf_cosine_distance", Tfidf, Distance, "[0,1]", 17),
    f(18, "tfidf_l1_distance", Tfidf, Distance, "[0,inf)", 18),
    f(19, "tfidf_l2_distance", Tfidf, Distance, "[0,sqrt2]", 19),
    f(20, "shared_idf_ratio", Tfidf, Similarity, "[0,1]", 20),
    f(21, "rwmd_all_tokens", Wmd, Distance, "[0,inf)", 21),
    f(22, "rwmd_content_tokens", Wmd, Distance, "[0,inf)", 22),
    f(23, "mean_cosine_distance", Embedding, Distance, "[0,2]", 23),
    f(
        24,
        "mean_cityblock_distance",
        Embedding,
        Distance,
        "[0,inf)",
        24,
    ),
    f(
        25,
        "mean_euclidean_distance",
        Embedding,
        Distance,
        "[0,inf)",
        25,
    ),
    f(
        26,
        "mean_minkowski3_distance",
        Embedding,
        Distance,
        "[0,inf)",
        26,
    ),
    f(
        27,
        "mean_canberra_distance",
        Embedding,
        Distance,
        "[0,dim]",
        27,
    ),
    f(
        28,
        "mean_braycurtis_distance",
        Embedding,
        Distance,
        "[0,inf)",
        28,
    ),
    f(
        29,
        "mean_correlation_distance",
        Embedding,
        Distance,
        "[0,2]",
        29,
    ),
    f(
        30,
        "idf_mean_cosine_distance",
        Embedding,
        Distance,
        "[0,2]",
        30,
    ),
    f(
        31,
        "idf_mean_cityblock_distance",
        Embedding,
        Distance,
        "[0,inf)",
        31,
    ),
    f(
        32,
        "idf_mean_euclidean_distance",
        Embedding,
        Distance,
        "[0,inf)",
        32,
    ),
    f(
        33,
        "idf_mean_braycurtis_distance",
        Embedding,
        Distance,
        "[0,inf)",
        33,
    ),
    f(34, "q1_mean_skewness", Embedding, Moment, "(-inf,inf)", 35),
    f(35, "q2_mean_skewness", Embedding, Moment, "(-inf,inf)", 34),
    f(36, "q1_mean_kurtosis", Embedding, Moment, "[-3,inf)", 37),
    f(37, "q2_mean_kurtosis", Embedding, Moment, "[-3,inf)", 36),
    f(
        38,
        "graph_common_neighbors",
        Graph,
        Structural,
        "[0,inf)",
        38,
    ),
    f(39, "graph_min_degree", Graph, Structural, "[0,inf)", 39),
    f(40, "graph_max_degree", Graph, Structural, "[0,inf)", 40),
    f(41, "graph_neighbor_jaccard", Graph, Structural, "[0,1]", 41),
];

impl FeatureSpec {
    /// Numeric closure of `range`. `dim` in a range means the embedding
    /// width, which the catalog does not fix, so it reads as unbounded.
    pub fn bounds(&self) -> (f64, f64) {
        let inner = &self.range[1..self.range.len() - 1];
        let (lo, hi) = inner.split_once(',').expect("range has two ends");
        let parse = |s: &str| match s {
            "inf" | "dim" => f64::INFINITY,
            "-inf" => f64::NEG_INFINITY,
            "sqrt2" => std::f64::consts::SQRT_2,
            _ => s.parse().expect("numeric range end"),
        };
        (parse(lo), parse(hi))
    }
}

pub fn feature_names() -> Vec<String> {
    CATALOG.iter().map(|f| f.name.to_string()).collect()
}

/// The catalog as JSON lines: `{index, name, block, kind, range}` per feature.
pub fn catalog_jsonl() -> String {
    let mut out = String::new();
    for spec in &CATALOG {
        out.push_str(&serde_json::to_string(spec).expect("catalog serializes"));
        out.push('\n');
    }
    out
}
