//! Distances between question mean vectors, plain and IDF-weighted, plus
//! per-question moments of the mean vector.

use crate::corpus::ProcessedQuestion;
use crate::embeddings::{mean_vector, EmbeddingTable};

use super::tfidf::IdfTable;

pub const EMBEDDING_COUNT: usize = 15;

fn is_zero(v: &[f64]) -> bool {
    v.iter().all(|x| *x == 0.0)
}

/// `1 - cos`; 0 for equal vectors, otherwise 1 when either is zero.
pub fn cosine_distance(u: &[f64], v: &[f64]) -> f64 {
    if u == v {
        return 0.0;
    }
    if is_zero(u) || is_zero(v) {
        return 1.0;
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    (1.0 - dot / (nu * nv)).clamp(0.0, 2.0)
}

pub fn cityblock(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b).abs()).sum()
}

pub fn euclidean(u: &[f64], v: &[f64]) -> f64 {
    minkowski(u, v, 2.0)
}

pub fn minkowski(u: &[f64], v: &[f64], p: f64) -> f64 {
    u.iter()
        .zip(v)
        .map(|(a, b)| (a - b).abs().powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

/// `sum |u - v| / (|u| + |v|)`, skipping coordinates where both are zero.
pub fn canberra(u: &[f64], v: &[f64]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(a, b)| {
            let den = a.abs() + b.abs();
            if den == 0.0 {
                0.0
            } else {
                (a - b).abs() / den
            }
        })
        .sum()
}

/// `sum |u - v| / sum |u + v|`; 0 for equal vectors, otherwise 1 when
/// either is zero or the denominator vanishes.
pub fn braycurtis(u: &[f64], v: &[f64]) -> f64 {
    if u == v {
        return 0.0;
    }
    if is_zero(u) || is_zero(v) {
        return 1.0;
    }
    let num = cityblock(u, v);
    let den: f64 = u.iter().zip(v).map(|(a, b)| (a + b).abs()).sum();
    if den == 0.0 {
        1.0
    } else {
        num / den
    }
}

/// `1 - pearson(u, v)`; 0 for equal vectors, otherwise 1 when either is
/// zero or constant.
pub fn correlation_distance(u: &[f64], v: &[f64]) -> f64 {
    if u == v {
        return 0.0;
    }
    if is_zero(u) || is_zero(v) {
        return 1.0;
    }
    let n = u.len() as f64;
    let mu = u.iter().sum::<f64>() / n;
    let mv = v.iter().sum::<f64>() / n;
    let (mut cov, mut su, mut sv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        cov += (a - mu) * (b - mv);
        su += (a - mu) * (a - mu);
        sv += (b - mv) * (b - mv);
    }
    if su == 0.0 || sv == 0.0 {
        return 1.0;
    }
    (1.0 - cov / (su * sv).sqrt()).clamp(0.0, 2.0)
}

fn central_moments(v: &[f64]) -> (f64, f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for x in v {
        let d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    (m2 / n, m3 / n, m4 / n)
}

/// Population skewness `m3 / m2^1.5`; 0 for empty, zero or constant vectors.
pub fn skewness(v: &[f64]) -> f64 {
    if v.is_empty() || is_zero(v) {
        return 0.0;
    }
    let (m2, m3, _) = central_moments(v);
    if m2 == 0.0 {
        0.0
    } else {
        m3 / m2.powf(1.5)
    }
}

/// Population excess kurtosis `m4 / m2^2 - 3`; 0 for empty, zero or
/// constant vectors.
pub fn kurtosis(v: &[f64]) -> f64 {
    if v.is_empty() || is_zero(v) {
        return 0.0;
    }
    let (m2, _, m4) = central_moments(v);
    if m2 == 0.0 {
        0.0
    } else {
        m4 / (m2 * m2) - 3.0
    }
}

/// Mean vectors over stopword-free tokens; the weighted variant weighs each
/// word by the IDF of its stem.
pub fn embedding_distance_features(
    p1: &ProcessedQuestion,
    p2: &ProcessedQuestion,
    table: &EmbeddingTable,
    idf: &IdfTable,
) -> [f64; EMBEDDING_COUNT] {
    let u = mean_vector(table, &p1.tokens_no_stop, None);
    let v = mean_vector(table, &p2.tokens_no_stop, None);
    let weights =
        |p: &ProcessedQuestion| -> Vec<f64> { p.stems.iter().map(|s| idf.idf(s)).collect() };
    let uw = mean_vector(table, &p1.tokens_no_stop, Some(&weights(p1)));
    let vw = mean_vector(table, &p2.tokens_no_stop, Some(&weights(p2)));
    [
        cosine_distance(&u, &v),
        cityblock(&u, &v),
        euclidean(&u, &v),
        minkowski(&u, &v, 3.0),
        canberra(&u, &v),
        braycurtis(&u, &v),
        correlation_distance(&u, &v),
        cosine_distance(&uw, &vw),
        cityblock(&uw, &vw),
        euclidean(&uw, &vw),
        braycurtis(&uw, &vw),
        skewness(&u),
        skewness(&v),
        kurtosis(&u),
        kurtosis(&v),
    ]
}
