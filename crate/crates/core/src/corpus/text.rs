//! Character- and token-level normalisation steps.

use std::collections::HashSet;
use std::sync::LazyLock;

use regex::{Captures, Regex};

/// Contraction table, applied longest match first. Whole-word entries need a
/// word boundary on both sides; suffix entries attach to the preceding word.
const WHOLE_WORD: &[(&str, &str)] = &[
    ("what's", "what is"),
    ("can't", "cannot"),
    ("won't", "will not"),
    ("it's", "it is"),
    ("i'm", "i am"),
];

const SUFFIXES: &[(&str, &str)] = &[
    ("n't", " not"),
    ("'re", " are"),
    ("'ve", " have"),
    ("'ll", " will"),
    ("'d", " would"),
];

static CONTRACTION: LazyLock<Regex> = LazyLock::new(|| {
    let pattern = |entries: &[(&str, &str)]| {
        let mut keys: Vec<&str> = entries.iter().map(|(k, _)| *k).collect();
        keys.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        keys.iter()
            .map(|k| regex::escape(k).replace('\'', "['\u{2019}]"))
            .collect::<Vec<_>>()
            .join("|")
    };
    Regex::new(&format!(
        r"(?i)\b(?P<word>{})\b|(?P<suffix>{})\b",
        pattern(WHOLE_WORD),
        pattern(SUFFIXES)
    ))
    .expect("contraction pattern")
});

fn lookup(table: &[(&str, &'static str)], matched: &str) -> &'static str {
    let key = matched.to_lowercase().replace('\u{2019}', "'");
    table
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .expect("matched text comes from the table")
}

/// Rewrite contractions ("what's" -> "what is", "don't" -> "do not", ...).
/// Matching is case-insensitive and accepts both `'` and `’`.
///
/// Passes repeat until nothing matches, so the result is a fixpoint. Each
/// replacement consumes one apostrophe, which bounds the number of passes.
pub fn expand_abbreviations(text: &str) -> String {
    let mut current = text.to_string();
    loop {
        let next = CONTRACTION.replace_all(&current, |caps: &Captures<'_>| {
            if let Some(m) = caps.name("word") {
                lookup(WHOLE_WORD, m.as_str())
            } else {
                lookup(SUFFIXES, &caps["suffix"])
            }
        });
        match next {
            std::borrow::Cow::Borrowed(_) => return current,
            std::borrow::Cow::Owned(s) => current = s,
        }
    }
}

/// Lowercase and split on every character that is not a letter or digit.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|s| !s.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// False as soon as the text contains an alphabetic character outside ASCII.
pub fn is_english(text: &str) -> bool {
    !text.chars().any(|c| c.is_alphabetic() && !c.is_ascii())
}

/// The classic 127-word English stopword list.
pub const STOPWORDS: [&str; 127] = [
    "i",
    "me",
    "my",
    "myself",
    "we",
    "our",
    "ours",
    "ourselves",
    "you",
    "your",
    "yours",
    "yourself",
    "yourselves",
    "he",
    "him",
    "his",
    "himself",
    "she",
    "her",
    "hers",
    "herself",
    "it",
    "its",
    "itself",
    "they",
    "them",
    "their",
    "theirs",
    "themselves",
    "what",
    "which",
    "who",
    "whom",
    "this",
    "that",
    "these",
    "those",
    "am",
    "is",
    "are",
    "was",
    "were",
    "be",
    "been",
    "being",
    "have",
    "has",
    "had",
    "having",
    "do",
    "does",
    "did",
    "doing",
    "a",
    "an",
    "the",
    "and",
    "but",
    "if",
    "or",
    "because",
    "as",
    "until",
    "while",
    "of",
    "at",
    "by",
    "for",
    "with",
    "about",
    "against",
    "between",
    "into",
    "through",
    "during",
    "before",
    "after",
    "above",
    "below",
    "to",
    "from",
    "up",
    "down",
    "in",
    "out",
    "on",
    "off",
    "over",
    "under",
    "again",
    "further",
    "then",
    "once",
    "here",
    "there",
    "when",
    "where",
    "why",
    "how",
    "all",
    "any",
    "both",
    "each",
    "few",
    "more",
    "most",
    "other",
    "some",
    "such",
    "no",
    "nor",
    "not",
    "only",
    "own",
    "same",
    "so",
    "than",
    "too",
    "very",
    "s",
    "t",
    "can",
    "will",
    "just",
    "don",
    "should",
    "now",
];

static STOPWORD_SET: LazyLock<HashSet<&'static str>> =
    LazyLock::new(|| STOPWORDS.iter().copied().collect());

pub fn is_stopword(token: &str) -> bool {
    STOPWORD_SET.contains(token)
}

pub fn remove_stopwords(tokens: &[String]) -> Vec<String> {
    tokens.iter().filter(|t| !is_stopword(t)).cloned().collect()
}
