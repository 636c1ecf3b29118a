//! Pre-trained word vectors, corpus vocabularies and sequence encoding.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Word vectors keyed by token, all of length `dim`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    entries: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            entries: HashMap::new(),
        }
    }

    pub fn from_entries<I, S>(dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut table = EmbeddingTable::new(dim);
        for (token, vector) in entries {
            let token = token.into();
            if vector.len() != dim {
                return Err(Error::ShapeMismatch {
                    name: token,
                    expected: vec![dim],
                    found: vec![vector.len()],
                });
            }
            table.entries.entry(token).or_insert(vector);
        }
        Ok(table)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.entries.get(token).map(Vec::as_slice)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.entries.contains_key(token)
    }
}

#[derive(Debug, Clone)]
pub struct LoadedEmbeddings {
    pub table: EmbeddingTable,
    /// Rows ignored because the word had already been seen.
    pub duplicates: usize,
}

/// Read whitespace-separated text vectors (`word v1 ... vdim` per line).
///
/// A leading `count dim` header line, as written by word2vec, is accepted
/// when `dim` matches. Any other row with a value count other than
/// `expected_dim` is an error.
pub fn load_text_embeddings(path: &Path, expected_dim: usize) -> Result<LoadedEmbeddings> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut table = EmbeddingTable::new(expected_dim);
    let mut duplicates = 0;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line_no = i + 1;
        let mut fields = line.split_whitespace();
        let Some(word) = fields.next() else {
            continue;
        };
        let values: Vec<&str> = fields.collect();
        if line_no == 1
            && values.len() == 1
            && word.parse::<usize>().is_ok()
            && values[0].parse::<usize>().ok() == Some(expected_dim)
        {
            continue;
        }
        if values.len() != expected_dim {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message: format!("expected {expected_dim} values, found {}", values.len()),
            });
        }
        let vector = values
            .iter()
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message: e.to_string(),
            })?;
        if table.entries.contains_key(word) {
            duplicates += 1;
        } else {
            table.entries.insert(word.to_string(), vector);
        }
    }
    if duplicates > 0 {
        log::warn!(
            "{}: {duplicates} duplicate words ignored (first occurrence kept)",
            path.display()
        );
    }
    Ok(LoadedEmbeddings { table, duplicates })
}

pub const PAD: usize = 0;
pub const OOV: usize = 1;
pub const PAD_TOKEN: &str = "<pad>";
pub const OOV_TOKEN: &str = "<oov>";

/// Token index with reserved padding (0) and out-of-vocabulary (1) slots.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocab {
    tokens: Vec<String>,
    counts: Vec<usize>,
    index: HashMap<String, usize>,
    min_count: usize,
}

impl Vocab {
    fn from_parts(tokens: Vec<String>, counts: Vec<usize>, min_count: usize) -> Self {
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocab {
            tokens,
            counts,
            index,
            min_count,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.len() <= 2
    }

    pub fn min_count(&self) -> usize {
        self.min_count
    }

    pub fn id(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(OOV)
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    pub fn count(&self, id: usize) -> usize {
        self.counts.get(id).copied().unwrap_or(0)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Dump as `token<TAB>index<TAB>count` lines.
    pub fn write(&self, path: &Path) -> Result<()> {
        let io = |e| Error::io(path, e);
        let mut out = BufWriter::new(File::create(path).map_err(io)?);
        writeln!(out, "# min_count {}", self.min_count).map_err(io)?;
        for (i, (token, count)) in self.tokens.iter().zip(&self.counts).enumerate() {
            writeln!(out, "{token}\t{i}\t{count}").map_err(io)?;
        }
        out.flush().map_err(io)
    }

    pub fn read(path: &Path) -> Result<Vocab> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let bad = |line: usize, message: &str| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: message.to_string(),
        };
        let mut lines = text.lines();
        let min_count = lines
            .next()
            .and_then(|l| l.strip_prefix("# min_count "))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad(1, "missing '# min_count' header"))?;
        let mut tokens = Vec::new();
        let mut counts = Vec::new();
        for (i, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split('\t').collect();
            let [token, index, count] = fields[..] else {
                return Err(bad(i + 2, "expected token<TAB>index<TAB>count"));
            };
            if index.parse::<usize>().ok() != Some(tokens.len()) {
                return Err(bad(i + 2, "indices must be dense and ordered"));
            }
            tokens.push(token.to_string());
            counts.push(count.parse().map_err(|_| bad(i + 2, "bad count"))?);
        }
        if tokens.len() < 2 || tokens[PAD] != PAD_TOKEN || tokens[OOV] != OOV_TOKEN {
            return Err(bad(2, "reserved <pad>/<oov> entries missing"));
        }
        Ok(Vocab::from_parts(tokens, counts, min_count))
    }
}

/// Vocabulary over every token of every question, ordered by descending
/// frequency and then lexicographically.
pub fn build_vocab<'a, I, Q>(questions: I, min_count: usize) -> Result<Vocab>
where
    I: IntoIterator<Item = Q>,
    Q: IntoIterator<Item = &'a String>,
{
    if min_count == 0 {
        return Err(Error::InvalidArgument(
            "min_count must be at least 1".into(),
        ));
    }
    let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
    for question in questions {
        for token in question {
            *freq.entry(token.as_str()).or_default() += 1;
        }
    }
    let mut kept: Vec<(&str, usize)> = freq.into_iter().filter(|(_, c)| *c >= min_count).collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));

    let mut tokens = vec![PAD_TOKEN.to_string(), OOV_TOKEN.to_string()];
    let mut counts = vec![0, 0];
    for (token, count) in kept {
        tokens.push(token.to_string());
        counts.push(count);
    }
    Ok(Vocab::from_parts(tokens, counts, min_count))
}

/// Map tokens to ids, keep the first `max_len`, right-pad with [`PAD`].
pub fn encode_sequence(vocab: &Vocab, tokens: &[String], max_len: usize) -> Vec<usize> {
    let mut ids: Vec<usize> = tokens.iter().take(max_len).map(|t| vocab.id(t)).collect();
    ids.resize(max_len, PAD);
    ids
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedPair {
    pub q1_ids: Vec<usize>,
    pub q2_ids: Vec<usize>,
    pub label: u8,
}

impl EncodedPair {
    /// Encodes the `tokens` stage of both questions.
    pub fn from_processed(
        vocab: &Vocab,
        pair: &crate::corpus::ProcessedPair,
        max_len: usize,
    ) -> Self {
        EncodedPair {
            q1_ids: encode_sequence(vocab, &pair.q1.tokens, max_len),
            q2_ids: encode_sequence(vocab, &pair.q2.tokens, max_len),
            label: pair.label,
        }
    }

    pub fn swapped(&self) -> Self {
        EncodedPair {
            q1_ids: self.q2_ids.clone(),
            q2_ids: self.q1_ids.clone(),
            label: self.label,
        }
    }
}

/// Weighted mean of the vectors of in-table tokens (unit weights when
/// `weights` is `None`). Zero vector when no token is in the table or the
/// weights of the covered tokens sum to zero.
pub fn mean_vector(table: &EmbeddingTable, tokens: &[String], weights: Option<&[f64]>) -> Vec<f64> {
    let mut sum = vec![0.0; table.dim()];
    let mut total = 0.0;
    for (i, token) in tokens.iter().enumerate() {
        let Some(v) = table.get(token) else { continue };
        let w = weights.map_or(1.0, |w| w[i]);
        total += w;
        for (s, x) in sum.iter_mut().zip(v) {
            *s += w * x;
        }
    }
    if total == 0.0 {
        return vec![0.0; table.dim()];
    }
    sum.iter_mut().for_each(|s| *s /= total);
    sum
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use super::*;

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_text_vectors() {
        let f = file("cat 0.1 0.2\ndog -1 2.5e-1\ncat 9 9\nfish 0 0\n");
        let loaded = load_text_embeddings(f.path(), 2).unwrap();
        assert_eq!(loaded.table.len(), 3);
        assert_eq!(loaded.duplicates, 1);
        assert_eq!(loaded.table.get("cat").unwrap(), &[0.1, 0.2]);
        assert_eq!(loaded.table.get("dog").unwrap(), &[-1.0, 0.25]);
    }

    #[test]
    fn wrong_width_reports_line() {
        let f = file("dog 1 2\ncat 0.1\n");
        match load_text_embeddings(f.path(), 2) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_file_and_header() {
        let f = file("");
        assert!(load_text_embeddings(f.path(), 2).unwrap().table.is_empty());
        let f = file("2 3\na 1 2 3\nb 4 5 6\n");
        assert_eq!(load_text_embeddings(f.path(), 3).unwrap().table.len(), 2);
    }

    #[test]
    fn vocab_examples() {
        let corpus = [toks(&["a", "b", "a"]), toks(&["a"])];
        let v = build_vocab(corpus.iter(), 2).unwrap();
        assert_eq!(v.tokens(), &toks(&[PAD_TOKEN, OOV_TOKEN, "a"]));

        let v = build_vocab(std::iter::empty::<&Vec<String>>(), 1).unwrap();
        assert_eq!(v.len(), 2);

        let corpus = [toks(&["b", "a", "b", "a"])];
        let v = build_vocab(corpus.iter(), 1).unwrap();
        assert_eq!(v.id("a"), 2);
        assert_eq!(v.id("b"), 3);
        assert!(build_vocab(corpus.iter(), 0).is_err());
    }

    #[test]
    fn vocab_dump_round_trip() {
        let corpus = [toks(&["x", "y", "x"])];
        let v = build_vocab(corpus.iter(), 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vocab.tsv");
        v.write(&path).unwrap();
        assert_eq!(Vocab::read(&path).unwrap(), v);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("x\t2\t2\n"));
    }

    #[test]
    fn encoding_rules() {
        let corpus = [toks(&["what", "name"])];
        let v = build_vocab(corpus.iter(), 1).unwrap();
        let (w, n) = (v.id("what"), v.id("name"));
        assert_eq!(
            encode_sequence(&v, &toks(&["what", "name"]), 4),
            vec![w, n, 0, 0]
        );
        assert_eq!(encode_sequence(&v, &toks(&["zebra"]), 2), vec![OOV, PAD]);
        let long: Vec<String> = (0..40)
            .map(|i| if i % 2 == 0 { "what" } else { "name" }.to_string())
            .collect();
        let enc = encode_sequence(&v, &long, 30);
        assert_eq!(enc.len(), 30);
        assert_eq!(enc[29], n);
    }

    #[test]
    fn mean_vector_cases() {
        let t = EmbeddingTable::from_entries(2, [("a", vec![1.0, 0.0]), ("b", vec![0.0, 1.0])])
            .unwrap();
        assert_eq!(mean_vector(&t, &toks(&["a"]), None), vec![1.0, 0.0]);
        assert_eq!(mean_vector(&t, &toks(&["a", "b"]), None), vec![0.5, 0.5]);
        assert_eq!(mean_vector(&t, &toks(&["zz", "yy"]), None), vec![0.0, 0.0]);
        assert_eq!(
            mean_vector(&t, &toks(&["a", "b", "q"]), Some(&[3.0, 1.0, 100.0])),
            vec![0.75, 0.25]
        );
    }
}
