//! TF-IDF weighting over stemmed content tokens.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

/// Smoothed inverse document frequencies, `ln((N + 1) / (df + 1)) + 1`.
/// Tokens never seen in training get `df = 0`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IdfTable {
    pub documents: usize,
    pub document_frequency: HashMap<String, usize>,
}

impl IdfTable {
    /// One document per question.
    pub fn build<'a, I, Q>(questions: I) -> Self
    where
        I: IntoIterator<Item = Q>,
        Q: IntoIterator<Item = &'a String>,
    {
        let mut table = IdfTable::default();
        for question in questions {
            table.documents += 1;
            let unique: BTreeSet<&String> = question.into_iter().collect();
            for token in unique {
                *table.document_frequency.entry(token.clone()).or_default() += 1;
            }
        }
        table
    }

    pub fn idf(&self, token: &str) -> f64 {
        let df = self.document_frequency.get(token).copied().unwrap_or(0);
        ((self.documents as f64 + 1.0) / (df as f64 + 1.0)).ln() + 1.0
    }
}

/// Sparse, L2-normalised `count * idf` vector.
fn tfidf_vector(tokens: &[String], idf: &IdfTable) -> BTreeMap<String, f64> {
    let mut counts: BTreeMap<String, f64> = BTreeMap::new();
    for t in tokens {
        *counts.entry(t.clone()).or_default() += 1.0;
    }
    for (t, v) in counts.iter_mut() {
        *v *= idf.idf(t);
    }
    let norm = counts.values().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        counts.values_mut().for_each(|v| *v /= norm);
    }
    counts
}

/// `[cosine distance, L1 distance, L2 distance, shared-idf ratio]` between
/// the normalised TF-IDF vectors of two stem lists.
///
/// Cosine distance is 1 when either vector is zero. The shared-idf ratio is
/// `sum idf(shared) / sum idf(union)` over token sets, 1 for two empty sets.
pub fn tfidf_features(s1: &[String], s2: &[String], idf: &IdfTable) -> [f64; 4] {
    let v1 = tfidf_vector(s1, idf);
    let v2 = tfidf_vector(s2, idf);

    let keys: BTreeSet<&String> = v1.keys().chain(v2.keys()).collect();
    let mut dot = 0.0;
    let mut l1 = 0.0;
    let mut l2 = 0.0;
    for k in &keys {
        let a = v1.get(*k).copied().unwrap_or(0.0);
        let b = v2.get(*k).copied().unwrap_or(0.0);
        dot += a * b;
        l1 += (a - b).abs();
        l2 += (a - b) * (a - b);
    }
    let cosine_distance = if v1 == v2 {
        0.0
    } else if v1.is_empty() || v2.is_empty() {
        1.0
    } else {
        (1.0 - dot).clamp(0.0, 1.0)
    };

    let shared: f64 = keys
        .iter()
        .filter(|k| v1.contains_key(**k) && v2.contains_key(**k))
        .map(|k| idf.idf(k))
        .sum();
    let union: f64 = keys.iter().map(|k| idf.idf(k)).sum();
    let shared_ratio = if keys.is_empty() { 1.0 } else { shared / union };

    // Two unit vectors with non-negative entries are at most sqrt 2 apart.
    [
        cosine_distance,
        l1,
        l2.sqrt().min(std::f64::consts::SQRT_2),
        shared_ratio,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn identical_and_disjoint() {
        let idf = IdfTable::build([toks("a b"), toks("b c")].iter());
        assert_eq!(
            tfidf_features(&toks("a b"), &toks("a b"), &idf),
            [0.0, 0.0, 0.0, 1.0]
        );
        let d = tfidf_features(&toks("a"), &toks("c"), &idf);
        assert_eq!(d[0], 1.0);
        assert_eq!(d[3], 0.0);
        assert_eq!(tfidf_features(&toks(""), &toks("a"), &idf)[0], 1.0);
    }

    /// Three training questions {cat sat}, {cat ran}, {dog ran}; N = 3.
    /// df: cat 2, sat 1, ran 2, dog 1.
    /// idf(cat) = idf(ran) = ln(4/3) + 1, idf(sat) = idf(dog) = ln 2 + 1.
    /// q1 = "cat sat", q2 = "cat dog": vectors (cat, sat, dog)
    ///   u = (a, b, 0)/|.|, v = (a, 0, b)/|.| with a = idf(cat), b = ln 2 + 1.
    /// cos = a^2 / (a^2 + b^2); shared ratio = a / (a + 2b).
    #[test]
    fn hand_computed_toy_corpus() {
        let idf = IdfTable::build([toks("cat sat"), toks("cat ran"), toks("dog ran")].iter());
        let a = (4.0f64 / 3.0).ln() + 1.0;
        let b = 2.0f64.ln() + 1.0;
        assert!((idf.idf("cat") - a).abs() < 1e-15);
        assert!((idf.idf("unseen") - (4.0f64.ln() + 1.0)).abs() < 1e-15);

        let f = tfidf_features(&toks("cat sat"), &toks("cat dog"), &idf);
        let n2 = a * a + b * b;
        let cos = a * a / n2;
        let l1 = 2.0 * b / n2.sqrt();
        let l2 = (2.0 * b * b / n2).sqrt();
        assert!((f[0] - (1.0 - cos)).abs() < 1e-12, "{f:?}");
        assert!((f[1] - l1).abs() < 1e-12);
        assert!((f[2] - l2).abs() < 1e-12);
        assert!((f[3] - a / (a + 2.0 * b)).abs() < 1e-12);
    }
}
