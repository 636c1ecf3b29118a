use std::fs::File;
use std::path::Path;

use super::{LoadReport, QuestionPair, Source};
use crate::{Error, Result};

/// Columns of the public question-pairs release, in order.
pub const QUORA_COLUMNS: [&str; 6] = [
    "id",
    "qid1",
    "qid2",
    "question1",
    "question2",
    "is_duplicate",
];

/// Read the tab-separated Quora release. Rows with a bad id, an empty
/// question or a label other than 0/1 are skipped and counted.
pub fn load_quora_tsv(path: &Path) -> Result<LoadReport> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(true)
        .flexible(true)
        .from_reader(file);

    let header_err = |found: String| Error::HeaderMismatch {
        path: path.to_path_buf(),
        expected: QUORA_COLUMNS.join(", "),
        found,
    };
    let headers = reader
        .headers()
        .map_err(|e| header_err(e.to_string()))?
        .clone();
    let found: Vec<&str> = headers.iter().map(str::trim).collect();
    if found != QUORA_COLUMNS {
        return Err(header_err(found.join(", ")));
    }

    let mut report = LoadReport::default();
    for record in reader.records() {
        let Ok(record) = record else {
            report.skipped += 1;
            continue;
        };
        match parse_row(&record) {
            Some(pair) => report.pairs.push(pair),
            None => report.skipped += 1,
        }
    }
    Ok(report)
}

fn parse_row(record: &csv::StringRecord) -> Option<QuestionPair> {
    if record.len() != QUORA_COLUMNS.len() {
        return None;
    }
    let id = record[0].trim().parse().ok()?;
    let q1 = record[3].trim();
    let q2 = record[4].trim();
    if q1.is_empty() || q2.is_empty() {
        return None;
    }
    let label = match record[5].trim() {
        "0" => 0,
        "1" => 1,
        _ => return None,
    };
    Some(QuestionPair {
        id,
        q1_raw: q1.to_string(),
        q2_raw: q2.to_string(),
        label,
        source: Source::Quora,
    })
}
