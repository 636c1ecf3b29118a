//! Pair construction from a Stack Exchange archive dump.
//!
//! Positives are question pairs joined by a duplicate link
//! (`LinkTypeId=3`). Negatives are drawn uniformly from question pairs that
//! share no link of any type. Only titles are used.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use rand::seq::SliceRandom;
use rand::Rng;

use super::{QuestionPair, Source};
use crate::{rng, Error, Result};

const DUPLICATE_LINK: &str = "3";
/// Below this many candidate pairs the negatives are sampled from an
/// explicit list; above it by rejection.
const ENUMERATION_LIMIT: u64 = 4_000_000;

fn for_each_row(path: &Path, mut f: impl FnMut(&HashMap<String, String>)) -> Result<()> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = Reader::from_reader(BufReader::new(file));
    let mut buf = Vec::new();
    let mut attrs = HashMap::new();
    loop {
        let event = reader.read_event_into(&mut buf).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!("at byte {}: {e}", reader.buffer_position()),
        })?;
        match event {
            Event::Empty(ref e) | Event::Start(ref e) if e.name().as_ref() == b"row" => {
                attrs.clear();
                collect_attrs(e, &mut attrs).map_err(|message| Error::Parse {
                    path: path.to_path_buf(),
                    line: 0,
                    message,
                })?;
                f(&attrs);
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    Ok(())
}

fn collect_attrs(
    e: &BytesStart<'_>,
    out: &mut HashMap<String, String>,
) -> std::result::Result<(), String> {
    for attr in e.attributes() {
        let attr = attr.map_err(|e| e.to_string())?;
        let key = String::from_utf8_lossy(attr.key.as_ref()).into_owned();
        let value = attr
            .unescape_value()
            .map_err(|e| e.to_string())?
            .into_owned();
        out.insert(key, value);
    }
    Ok(())
}

fn unordered(a: u64, b: u64) -> (u64, u64) {
    (a.min(b), a.max(b))
}

/// Build labelled pairs from `Posts.xml` and `PostLinks.xml`.
///
/// The negative count is `round(negative_ratio * positives)`, capped at the
/// number of unlinked question pairs available.
pub fn load_stackexchange(
    posts_path: &Path,
    postlinks_path: &Path,
    source: Source,
    negative_ratio: f64,
    seed: u64,
) -> Result<Vec<QuestionPair>> {
    if !(negative_ratio > 0.0 && negative_ratio.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "negative_ratio must be positive, got {negative_ratio}"
        )));
    }

    let mut titles: BTreeMap<u64, String> = BTreeMap::new();
    for_each_row(posts_path, |row| {
        if row.get("PostTypeId").map(String::as_str) != Some("1") {
            return;
        }
        let (Some(id), Some(title)) =
            (row.get("Id").and_then(|s| s.parse().ok()), row.get("Title"))
        else {
            return;
        };
        let title = title.trim();
        if !title.is_empty() {
            titles.insert(id, title.to_string());
        }
    })?;

    let mut linked: HashSet<(u64, u64)> = HashSet::new();
    // Keyed by the unordered pair; value keeps the orientation first seen.
    let mut duplicates: BTreeMap<(u64, u64), (u64, u64)> = BTreeMap::new();
    let mut skipped_links = 0usize;
    for_each_row(postlinks_path, |row| {
        let parse = |k: &str| row.get(k).and_then(|s| s.parse::<u64>().ok());
        let (Some(a), Some(b)) = (parse("PostId"), parse("RelatedPostId")) else {
            return;
        };
        if a == b {
            return;
        }
        linked.insert(unordered(a, b));
        if row.get("LinkTypeId").map(String::as_str) == Some(DUPLICATE_LINK) {
            if titles.contains_key(&a) && titles.contains_key(&b) {
                duplicates.entry(unordered(a, b)).or_insert((a, b));
            } else {
                skipped_links += 1;
            }
        }
    })?;
    if skipped_links > 0 {
        log::warn!("{skipped_links} duplicate links reference unknown questions and were skipped");
    }
    if duplicates.is_empty() {
        return Err(Error::NoDuplicateLinks);
    }

    let ids: Vec<u64> = titles.keys().copied().collect();
    let wanted = (negative_ratio * duplicates.len() as f64).round() as u64;
    let negatives = sample_negatives(&ids, &linked, wanted, seed);

    let mut pairs = Vec::with_capacity(duplicates.len() + negatives.len());
    let mut push = |a: u64, b: u64, label: u8| {
        pairs.push(QuestionPair {
            id: pairs.len() as u64,
            q1_raw: titles[&a].clone(),
            q2_raw: titles[&b].clone(),
            label,
            source,
        });
    };
    for &(a, b) in duplicates.values() {
        push(a, b, 1);
    }
    for (a, b) in negatives {
        push(a, b, 0);
    }
    Ok(pairs)
}

fn sample_negatives(
    ids: &[u64],
    linked: &HashSet<(u64, u64)>,
    wanted: u64,
    seed: u64,
) -> Vec<(u64, u64)> {
    let n = ids.len() as u64;
    let total = n * n.saturating_sub(1) / 2;
    let linked_known = linked
        .iter()
        .filter(|(a, b)| ids.binary_search(a).is_ok() && ids.binary_search(b).is_ok())
        .count() as u64;
    let available = total - linked_known;
    let wanted = if wanted > available {
        log::warn!("only {available} unlinked question pairs exist; {wanted} negatives requested");
        available
    } else {
        wanted
    } as usize;

    let mut rng = rng::stream(seed, "stackexchange-negatives");
    if total <= ENUMERATION_LIMIT {
        let mut candidates: Vec<(u64, u64)> = Vec::with_capacity(available as usize);
        for (i, &a) in ids.iter().enumerate() {
            for &b in &ids[i + 1..] {
                if !linked.contains(&(a, b)) {
                    candidates.push((a, b));
                }
            }
        }
        let (chosen, _) = candidates.partial_shuffle(&mut rng, wanted);
        return chosen.to_vec();
    }

    let mut chosen = Vec::with_capacity(wanted);
    let mut seen = HashSet::with_capacity(wanted);
    while chosen.len() < wanted {
        let i = rng.gen_range(0..ids.len());
        let j = rng.gen_range(0..ids.len());
        if i == j {
            continue;
        }
        let key = unordered(ids[i], ids[j]);
        if linked.contains(&key) || !seen.insert(key) {
            continue;
        }
        chosen.push(key);
    }
    chosen
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use super::*;

    fn xml(rows: &[String], root: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<{root}>").unwrap();
        for r in rows {
            writeln!(f, "  {r}").unwrap();
        }
        writeln!(f, "</{root}>").unwrap();
        f
    }

    fn question(id: u64, title: &str) -> String {
        format!("<row Id=\"{id}\" PostTypeId=\"1\" Title=\"{title}\" Body=\"&lt;p&gt;body&lt;/p&gt;\" />")
    }

    fn link(id: u64, a: u64, b: u64, kind: u8) -> String {
        format!("<row Id=\"{id}\" PostId=\"{a}\" RelatedPostId=\"{b}\" LinkTypeId=\"{kind}\" />")
    }

    #[test]
    fn minimal_case_one_positive_one_negative() {
        let posts = xml(
            &[
                question(1, "How to mount a drive?"),
                question(2, "Mounting drives in Ubuntu"),
                question(3, "Change the wallpaper"),
                "<row Id=\"4\" PostTypeId=\"2\" ParentId=\"1\" Body=\"answer\" />".to_string(),
            ],
            "posts",
        );
        let links = xml(&[link(1, 2, 1, 3)], "postlinks");
        let pairs =
            load_stackexchange(posts.path(), links.path(), Source::AskUbuntu, 1.0, 7).unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].label, 1);
        assert_eq!(pairs[0].q1_raw, "Mounting drives in Ubuntu");
        assert_eq!(pairs[1].label, 0);
        assert!(pairs.iter().all(|p| p.source == Source::AskUbuntu));
    }

    #[test]
    fn link_to_deleted_post_is_skipped() {
        let posts = xml(
            &[question(1, "A?"), question(2, "B?"), question(3, "C?")],
            "posts",
        );
        let links = xml(&[link(1, 1, 2, 3), link(2, 1, 99, 3)], "postlinks");
        let pairs =
            load_stackexchange(posts.path(), links.path(), Source::EnglishSE, 1.0, 1).unwrap();
        assert_eq!(pairs.iter().filter(|p| p.label == 1).count(), 1);
    }

    #[test]
    fn negatives_avoid_any_link() {
        let posts = xml(
            &(1..=4)
                .map(|i| question(i, &format!("Q{i}")))
                .collect::<Vec<_>>(),
            "posts",
        );
        // 1-2 duplicate, 3-4 related: the only unlinked pairs involve crossing.
        let links = xml(&[link(1, 1, 2, 3), link(2, 3, 4, 1)], "postlinks");
        let pairs =
            load_stackexchange(posts.path(), links.path(), Source::EnglishSE, 4.0, 5).unwrap();
        let negatives: Vec<_> = pairs.iter().filter(|p| p.label == 0).collect();
        assert_eq!(negatives.len(), 4);
        for p in negatives {
            let pair = (p.q1_raw.as_str(), p.q2_raw.as_str());
            assert!(!matches!(
                pair,
                ("Q1", "Q2") | ("Q2", "Q1") | ("Q3", "Q4") | ("Q4", "Q3")
            ));
        }
    }

    #[test]
    fn seeded_and_escaped() {
        let posts = xml(
            &(1..=30)
                .map(|i| question(i, &format!("Q{i} &amp; more")))
                .collect::<Vec<_>>(),
            "posts",
        );
        let links = xml(&[link(1, 1, 2, 3), link(2, 5, 9, 3)], "postlinks");
        let a = load_stackexchange(posts.path(), links.path(), Source::AskUbuntu, 2.0, 11).unwrap();
        let b = load_stackexchange(posts.path(), links.path(), Source::AskUbuntu, 2.0, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 6);
        assert_eq!(a[0].q1_raw, "Q1 & more");
    }

    #[test]
    fn no_duplicate_links_is_an_error() {
        let posts = xml(&[question(1, "A?"), question(2, "B?")], "posts");
        let links = xml(&[link(1, 1, 2, 1)], "postlinks");
        assert!(matches!(
            load_stackexchange(posts.path(), links.path(), Source::AskUbuntu, 1.0, 1),
            Err(Error::NoDuplicateLinks)
        ));
        assert!(load_stackexchange(posts.path(), links.path(), Source::AskUbuntu, 0.0, 1).is_err());
    }
}
