//! Token-overlap and fuzzy string features.

use std::collections::BTreeSet;

use crate::corpus::ProcessedQuestion;

pub const LEXICAL_COUNT: usize = 17;

/// Edit distance with unit insert, delete and substitute costs.
pub fn levenshtein(a: &[char], b: &[char]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `1 - distance / max_len`, 1 for two empty strings.
pub fn levenshtein_ratio(a: &[char], b: &[char]) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein(a, b) as f64 / longest as f64
}

/// Best [`levenshtein_ratio`] of the shorter string against every
/// equal-length window of the longer one.
pub fn partial_ratio(a: &[char], b: &[char]) -> f64 {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return if long.is_empty() { 1.0 } else { 0.0 };
    }
    long.windows(short.len())
        .map(|w| levenshtein_ratio(short, w))
        .fold(0.0, f64::max)
}

fn chars(s: &str) -> Vec<char> {
    s.chars().collect()
}

pub fn token_sort_ratio(a: &[String], b: &[String]) -> f64 {
    let sorted = |t: &[String]| {
        let mut v: Vec<&str> = t.iter().map(String::as_str).collect();
        v.sort_unstable();
        chars(&v.join(" "))
    };
    levenshtein_ratio(&sorted(a), &sorted(b))
}

/// Ratio over the sorted intersection and the intersection extended by each
/// side's remainder; the best of the three comparisons.
pub fn token_set_ratio(a: &[String], b: &[String]) -> f64 {
    let sa: BTreeSet<&str> = a.iter().map(String::as_str).collect();
    let sb: BTreeSet<&str> = b.iter().map(String::as_str).collect();
    let common: Vec<&str> = sa.intersection(&sb).copied().collect();
    let extend = |only: Vec<&str>| {
        let mut all = common.clone();
        all.extend(only);
        chars(all.join(" ").trim())
    };
    let t0 = chars(&common.join(" "));
    let t1 = extend(sa.difference(&sb).copied().collect());
    let t2 = extend(sb.difference(&sa).copied().collect());
    levenshtein_ratio(&t0, &t1)
        .max(levenshtein_ratio(&t0, &t2))
        .max(levenshtein_ratio(&t1, &t2))
}

pub fn longest_common_substring(a: &[char], b: &[char]) -> usize {
    let mut best = 0;
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for ca in a {
        for (j, cb) in b.iter().enumerate() {
            cur[j + 1] = if ca == cb { prev[j] + 1 } else { 0 };
            best = best.max(cur[j + 1]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    best
}

/// Overlap ratio with the convention that two empty sides are identical.
fn ratio(num: usize, den: usize, both_empty: bool) -> f64 {
    if both_empty {
        1.0
    } else if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn lexical_features(p1: &ProcessedQuestion, p2: &ProcessedQuestion) -> [f64; LEXICAL_COUNT] {
    let (t1, t2) = (&p1.tokens, &p2.tokens);
    let (n1, n2) = (t1.len(), t2.len());
    let s1: BTreeSet<&str> = t1.iter().map(String::as_str).collect();
    let s2: BTreeSet<&str> = t2.iter().map(String::as_str).collect();
    let common = s1.intersection(&s2).count();
    let union = s1.len() + s2.len() - common;
    let both_empty = s1.is_empty() && s2.is_empty();
    let j1 = chars(&t1.join(" "));
    let j2 = chars(&t2.join(" "));

    [
        n1 as f64,
        n2 as f64,
        n1.abs_diff(n2) as f64,
        ratio(n1.min(n2), n1.max(n2), n1 == 0 && n2 == 0),
        p1.raw.trim().chars().count() as f64,
        p2.raw.trim().chars().count() as f64,
        common as f64,
        ratio(common, union, both_empty),
        ratio(2 * common, s1.len() + s2.len(), both_empty),
        ratio(common, s1.len().min(s2.len()), both_empty),
        f64::from(u8::from(t1.first() == t2.first())),
        f64::from(u8::from(t1.last() == t2.last())),
        levenshtein_ratio(&j1, &j2),
        partial_ratio(&j1, &j2),
        token_sort_ratio(t1, t2),
        token_set_ratio(t1, t2),
        ratio(
            longest_common_substring(&j1, &j2),
            j1.len().min(j2.len()),
            j1.is_empty() && j2.is_empty(),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::preprocess;

    /// Plain recursive edit distance, memoised; independent of the DP above.
    fn edit_distance_oracle(a: &[char], b: &[char]) -> usize {
        fn go(
            a: &[char],
            b: &[char],
            i: usize,
            j: usize,
            memo: &mut Vec<Vec<Option<usize>>>,
        ) -> usize {
            if let Some(v) = memo[i][j] {
                return v;
            }
            let v = if i == a.len() {
                b.len() - j
            } else if j == b.len() {
                a.len() - i
            } else if a[i] == b[j] {
                go(a, b, i + 1, j + 1, memo)
            } else {
                1 + go(a, b, i + 1, j, memo)
                    .min(go(a, b, i, j + 1, memo))
                    .min(go(a, b, i + 1, j + 1, memo))
            };
            memo[i][j] = Some(v);
            v
        }
        let mut memo = vec![vec![None; b.len() + 1]; a.len() + 1];
        go(a, b, 0, 0, &mut memo)
    }

    #[test]
    fn identical_questions() {
        let p = preprocess("What is the best way to learn Rust?");
        let f = lexical_features(&p, &p);
        assert_eq!(f[2], 0.0);
        for i in [3, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16] {
            assert_eq!(f[i], 1.0, "feature {i}");
        }
    }

    #[test]
    fn disjoint_questions() {
        let f = lexical_features(&preprocess("cats purr"), &preprocess("dogs bark loudly"));
        assert_eq!(f[6], 0.0);
        assert_eq!(f[7], 0.0);
        assert_eq!(f[8], 0.0);
        assert_eq!(f[9], 0.0);
    }

    #[test]
    fn reordered_tokens() {
        let a = preprocess("what is name");
        let b = preprocess("name is what");
        let f = lexical_features(&a, &b);
        assert_eq!(f[14], 1.0);
        let d = edit_distance_oracle(&chars("what is name"), &chars("name is what"));
        assert_eq!(d, 8);
        assert_eq!(f[12], 1.0 - 8.0 / 12.0);
        assert!(f[12] < 1.0);
    }

    #[test]
    fn dp_matches_recursive_oracle() {
        let words = [
            "",
            "a",
            "kitten",
            "sitting",
            "flaw",
            "lawn",
            "intention",
            "execution",
            "abcabc",
        ];
        for x in words {
            for y in words {
                assert_eq!(
                    levenshtein(&chars(x), &chars(y)),
                    edit_distance_oracle(&chars(x), &chars(y)),
                    "{x} {y}"
                );
            }
        }
    }

    #[test]
    fn partial_and_lcs() {
        assert_eq!(
            partial_ratio(&chars("new york"), &chars("new york mets")),
            1.0
        );
        assert_eq!(partial_ratio(&chars(""), &chars("abc")), 0.0);
        assert_eq!(
            longest_common_substring(&chars("xabcy"), &chars("zzabcq")),
            3
        );
    }

    #[test]
    fn token_set_handles_subset() {
        let a: Vec<String> = ["install", "ubuntu"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let b: Vec<String> = ["install", "ubuntu", "server"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(token_set_ratio(&a, &b), 1.0);
    }

    #[test]
    fn empty_sides() {
        let e = preprocess("");
        let f = lexical_features(&e, &e);
        assert!(f.iter().all(|v| v.is_finite()));
        let g = lexical_features(&e, &preprocess("something here"));
        assert_eq!(g[7], 0.0);
        assert_eq!(g[3], 0.0);
    }
}
