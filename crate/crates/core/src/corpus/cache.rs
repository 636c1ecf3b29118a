//! Processed-corpus cache: a header line followed by one JSON record per pair.
//!
//! ```text
//! {"format":"dupq-corpus/1","preprocess":"pp_v1","dataset":"quora","count":2}
//! {"id":0,"source":"quora","label":1,"q1_stages":{...},"q2_stages":{...}}
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ProcessedPair, PREPROCESS_VERSION};
use crate::{Error, Result};

pub const CACHE_FORMAT: &str = "dupq-corpus/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheHeader {
    pub format: String,
    pub preprocess: String,
    pub dataset: String,
    pub count: usize,
}

pub fn write_cache(path: &Path, dataset: &str, pairs: &[ProcessedPair]) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    let header = CacheHeader {
        format: CACHE_FORMAT.to_string(),
        preprocess: PREPROCESS_VERSION.to_string(),
        dataset: dataset.to_string(),
        count: pairs.len(),
    };
    writeln!(out, "{}", json_line(&header)).map_err(io)?;
    for pair in pairs {
        writeln!(out, "{}", json_line(pair)).map_err(io)?;
    }
    out.flush().map_err(io)
}

fn json_line<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("plain data serializes")
}

pub fn read_cache(path: &Path) -> Result<(CacheHeader, Vec<ProcessedPair>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let first = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing header".into()))?
        .map_err(|e| Error::io(path, e))?;
    let header: CacheHeader =
        serde_json::from_str(&first).map_err(|e| parse_err(1, e.to_string()))?;
    if header.format != CACHE_FORMAT {
        return Err(Error::VersionMismatch {
            what: "corpus cache format",
            expected: CACHE_FORMAT.into(),
            found: header.format,
        });
    }
    if header.preprocess != PREPROCESS_VERSION {
        return Err(Error::VersionMismatch {
            what: "preprocessing version",
            expected: PREPROCESS_VERSION.into(),
            found: header.preprocess,
        });
    }
    let mut pairs = Vec::with_capacity(header.count);
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        pairs.push(serde_json::from_str(&line).map_err(|e| parse_err(i + 2, e.to_string()))?);
    }
    if pairs.len() != header.count {
        return Err(parse_err(
            pairs.len() + 1,
            format!(
                "header announces {} records, found {}",
                header.count,
                pairs.len()
            ),
        ));
    }
    Ok((header, pairs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{QuestionPair, Source};

    #[test]
    fn round_trip() {
        let pairs: Vec<_> = [
            ("What's up?", "How are you?", 0),
            ("Is it über?", "Why?", 1),
        ]
        .iter()
        .enumerate()
        .map(|(i, (a, b, l))| {
            ProcessedPair::from_pair(&QuestionPair {
                id: i as u64,
                q1_raw: a.to_string(),
                q2_raw: b.to_string(),
                label: *l,
                source: Source::Quora,
            })
        })
        .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        write_cache(&path, "quora", &pairs).unwrap();
        let (header, back) = read_cache(&path).unwrap();
        assert_eq!(header.count, 2);
        assert_eq!(back, pairs);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("{\"id\":0,\"source\":\"quora\",\"label\":0,\"q1_stages\""));
    }
}
