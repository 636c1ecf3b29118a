//! Seeded synthetic data for tests, demos and the `synthetic` dataset.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::corpus::{QuestionPair, Source};
use crate::rng;

/// Points in `[-1, 1]^2` labelled by `x + y > 0`, keeping a gap of `margin`
/// around the boundary.
pub fn separable(n: usize, margin: f64, seed: u64) -> (Vec<[f64; 2]>, Vec<u8>) {
    let mut rng = rng::stream(seed, "synth-separable");
    let mut points = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    while points.len() < n {
        let p = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let s: f64 = p[0] + p[1];
        if s.abs() < margin {
            continue;
        }
        points.push(p);
        labels.push(u8::from(s > 0.0));
    }
    (points, labels)
}

/// Points in `[-1, 1]^2` labelled 1 when the coordinates have the same sign.
///
/// All but four points come in groups of four mirror images `(±a, ±b)`, so
/// every axis-aligned half-plane holds as many positives as negatives and an
/// additive model has nothing to fit. The remaining two pairs `(a, b)` = 1,
/// `(a, -b)` = 0 tilt the `y` axis very slightly; without them every first
/// split of a greedy tree has zero gain and no depth could recover the
/// pattern. `n` must be a multiple of 4 and at least 8.
pub fn xor(n: usize, seed: u64) -> (Vec<[f64; 2]>, Vec<u8>) {
    assert!(
        n >= 8 && n.is_multiple_of(4),
        "xor needs a multiple of 4, at least 8 points"
    );
    let mut rng = rng::stream(seed, "synth-xor");
    let mut points = Vec::with_capacity(n);
    for _ in 0..(n - 4) / 4 {
        let (a, b): (f64, f64) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
        points.extend([[a, b], [-a, -b], [-a, b], [a, -b]]);
    }
    for _ in 0..2 {
        let (a, b): (f64, f64) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
        points.extend([[a, b], [a, -b]]);
    }
    let labels = points
        .iter()
        .map(|p| u8::from((p[0] > 0.0) == (p[1] > 0.0)))
        .collect();
    (points, labels)
}

/// Vocabulary of the synthetic question generator. None of the words is a
/// stopword.
pub const WORDS: [&str; 40] = [
    "alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel", "india", "juliet",
    "kilo", "lima", "mike", "november", "oscar", "papa", "quebec", "romeo", "sierra", "tango",
    "uniform", "victor", "whiskey", "xray", "yankee", "zulu", "apple", "banana", "cherry", "grape",
    "lemon", "mango", "olive", "peach", "plum", "berry", "melon", "kiwi", "guava", "fig",
];

/// Token-set Jaccard of two space-separated word lists.
pub fn word_jaccard(a: &str, b: &str) -> f64 {
    let sa: BTreeSet<&str> = a.split_whitespace().collect();
    let sb: BTreeSet<&str> = b.split_whitespace().collect();
    let union = sa.union(&sb).count();
    if union == 0 {
        return 1.0;
    }
    sa.intersection(&sb).count() as f64 / union as f64
}

/// Question pairs whose label is fixed by token overlap: duplicate exactly
/// when the two word sets have Jaccard similarity of at least 1/2.
///
/// About half the pairs are built as light edits of the first question
/// (reordered, at most one word swapped) and half as independent draws, so
/// both classes are well represented.
pub fn overlap_pairs(n: usize, seed: u64) -> Vec<QuestionPair> {
    let mut rng = rng::stream(seed, "synth-overlap");
    let mut out = Vec::with_capacity(n);
    for id in 0..n {
        let len = rng.gen_range(4..=7);
        let q1: Vec<&str> = WORDS.choose_multiple(&mut rng, len).copied().collect();
        let q2: Vec<&str> = if rng.gen_bool(0.5) {
            let mut q2 = q1.clone();
            if rng.gen_bool(0.5) {
                let at = rng.gen_range(0..q2.len());
                q2[at] = WORDS.choose(&mut rng).copied().expect("non-empty");
            }
            q2.shuffle(&mut rng);
            q2
        } else {
            let len = rng.gen_range(4..=7);
            WORDS.choose_multiple(&mut rng, len).copied().collect()
        };
        let (q1, q2) = (q1.join(" "), q2.join(" "));
        let label = u8::from(word_jaccard(&q1, &q2) >= 0.5);
        out.push(QuestionPair {
            id: id as u64,
            q1_raw: q1,
            q2_raw: q2,
            label,
            source: Source::Synthetic,
        });
    }
    out
}

/// Second surface form of each entry of [`WORDS`]: the word reversed with
/// a trailing `q`.
pub fn synonym(concept: usize) -> String {
    let mut w: String = WORDS[concept].chars().rev().collect();
    w.push('q');
    w
}

/// Question pairs over concepts that each have two surface words
/// ([`WORDS`] and [`synonym`]). Each mention picks one of the two forms at
/// random, and a pair is a duplicate exactly when the two concept sets have
/// Jaccard similarity of at least 1/2. Matching surface tokens only reveal
/// part of the shared concepts, so a model does well only after learning
/// which words are synonyms.
pub fn paraphrase_pairs(n: usize, seed: u64) -> Vec<QuestionPair> {
    let mut rng = rng::stream(seed, "synth-paraphrase");
    let concepts: Vec<usize> = (0..WORDS.len()).collect();
    let mut out = Vec::with_capacity(n);
    for id in 0..n {
        let len = rng.gen_range(4..=7);
        let c1: Vec<usize> = concepts.choose_multiple(&mut rng, len).copied().collect();
        let c2: Vec<usize> = if rng.gen_bool(0.5) {
            let mut c2 = c1.clone();
            if rng.gen_bool(0.5) {
                let at = rng.gen_range(0..c2.len());
                c2[at] = rng.gen_range(0..WORDS.len());
            }
            c2.shuffle(&mut rng);
            c2
        } else {
            let len = rng.gen_range(4..=7);
            concepts.choose_multiple(&mut rng, len).copied().collect()
        };
        let mut render = |c: &[usize]| -> String {
            let words: Vec<String> = c
                .iter()
                .map(|&k| {
                    if rng.gen_bool(0.5) {
                        WORDS[k].to_string()
                    } else {
                        synonym(k)
                    }
                })
                .collect();
            words.join(" ")
        };
        let (q1, q2) = (render(&c1), render(&c2));
        let s1: BTreeSet<usize> = c1.into_iter().collect();
        let s2: BTreeSet<usize> = c2.into_iter().collect();
        let jaccard = s1.intersection(&s2).count() as f64 / s1.union(&s2).count() as f64;
        out.push(QuestionPair {
            id: id as u64,
            q1_raw: q1,
            q2_raw: q2,
            label: u8::from(jaccard >= 0.5),
            source: Source::Synthetic,
        });
    }
    out
}
