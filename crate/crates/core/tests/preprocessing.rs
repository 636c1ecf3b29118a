use dupq::corpus::{expand_abbreviations, preprocess, split_dataset, stem};
use proptest::prelude::*;

const PORTER_ORACLE: &str = include_str!("data/porter_vocabulary.tsv");

#[test]
fn porter_matches_reference_vocabulary() {
    let mut mismatches = Vec::new();
    let mut total = 0;
    for line in PORTER_ORACLE.lines() {
        let (word, expected) = line.split_once('\t').expect("word<TAB>stem");
        total += 1;
        let got = stem(word);
        if got != expected {
            mismatches.push(format!("{word}: expected {expected}, got {got}"));
        }
    }
    assert!(total > 5000);
    assert!(
        mismatches.is_empty(),
        "{} of {total} differ:\n{}",
        mismatches.len(),
        mismatches.join("\n")
    );
}

#[test]
fn split_sizes_at_full_quora_scale() {
    let split = split_dataset((0..404_303u32).collect(), 42).unwrap();
    assert_eq!(split.sizes(), [242_581, 80_861, 80_861]);
}

fn sentence() -> impl Strategy<Value = String> {
    let words = prop::sample::select(vec![
        "What's",
        "i'm",
        "can't",
        "won't",
        "don't",
        "they're",
        "we've",
        "you'll",
        "he'd",
        "it's",
        "How",
        "the",
        "Ubuntu",
        "running",
        "geese",
        "plural",
        "noun?",
        "e.g.",
        "3-fold",
        "ponies",
        "caresses",
        "über",
        "isn't",
        "CAN'T",
        "hello,",
        "world!",
        "(install)",
        "it’s",
    ]);
    prop::collection::vec(words, 0..12).prop_map(|w| w.join(" "))
}

proptest! {
    #[test]
    fn preprocessing_is_idempotent_on_expanded_text(text in sentence()) {
        let once = preprocess(&text);
        let twice = preprocess(&once.expanded);
        prop_assert_eq!(&once.tokens, &twice.tokens);
        prop_assert_eq!(&once.tokens_no_stop, &twice.tokens_no_stop);
        prop_assert_eq!(&once.lemmas, &twice.lemmas);
        prop_assert_eq!(&once.stems, &twice.stems);
        prop_assert_eq!(expand_abbreviations(&once.expanded), once.expanded.clone());
    }

    #[test]
    fn stage_shapes(text in sentence()) {
        let p = preprocess(&text);
        prop_assert!(p.tokens_no_stop.len() <= p.tokens.len());
        prop_assert_eq!(p.lemmas.len(), p.tokens_no_stop.len());
        prop_assert_eq!(p.stems.len(), p.lemmas.len());
        for t in p.tokens.iter().chain(&p.lemmas).chain(&p.stems) {
            prop_assert_eq!(t.to_lowercase(), t.clone());
        }
    }

    #[test]
    fn split_is_a_partition(n in 5usize..300, seed in any::<u64>()) {
        let split = split_dataset((0..n).collect(), seed).unwrap();
        let mut all: Vec<usize> = split.train.iter().chain(&split.validation).chain(&split.test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        prop_assert_eq!(split.train.len(), n * 3 / 5);
        prop_assert_eq!(split.validation.len(), n * 4 / 5 - n * 3 / 5);
        prop_assert_eq!(split_dataset((0..n).collect(), seed).unwrap(), split);
    }
}
