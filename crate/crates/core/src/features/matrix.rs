//! Feature matrix cache.
//!
//! ```text
//! # dupq-features catalog=catalog_v1 dataset=quora split=train rows=2
//! q1_token_count<TAB>...<TAB>graph_neighbor_jaccard<TAB>label
//! 5.0000000000000000e0<TAB>...<TAB>1
//! ```
//!
//! Values are written with 17 significant digits and read back bit-exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{FeatureVector, CATALOG, CATALOG_VERSION, FEATURE_COUNT};
use crate::{fmt_real, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub catalog: String,
    pub dataset: String,
    pub split: String,
    pub rows: Vec<FeatureVector>,
    pub labels: Vec<u8>,
}

pub fn write_feature_matrix(path: &Path, matrix: &FeatureMatrix) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(
        out,
        "# dupq-features catalog={} dataset={} split={} rows={}",
        matrix.catalog,
        matrix.dataset,
        matrix.split,
        matrix.rows.len()
    )
    .map_err(io)?;
    let names: Vec<&str> = CATALOG.iter().map(|f| f.name).collect();
    writeln!(out, "{}\tlabel", names.join("\t")).map_err(io)?;
    for (row, label) in matrix.rows.iter().zip(&matrix.labels) {
        let cells: Vec<String> = row.0.iter().map(|v| fmt_real(*v)).collect();
        writeln!(out, "{}\t{label}", cells.join("\t")).map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn read_feature_matrix(path: &Path) -> Result<FeatureMatrix> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let bad = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = BufReader::new(file).lines();
    let mut next = || lines.next().transpose().map_err(|e| Error::io(path, e));
    let header = next()?.ok_or_else(|| bad(1, "empty file".into()))?;
    let fields: std::collections::HashMap<&str, &str> = header
        .strip_prefix("# dupq-features ")
        .ok_or_else(|| bad(1, "missing '# dupq-features' header".into()))?
        .split_whitespace()
        .filter_map(|kv| kv.split_once('='))
        .collect();
    let field = |k: &str| {
        fields
            .get(k)
            .map(|s| s.to_string())
            .ok_or_else(|| bad(1, format!("missing {k}")))
    };
    let catalog = field("catalog")?;
    if catalog != CATALOG_VERSION {
        return Err(Error::VersionMismatch {
            what: "feature catalog",
            expected: CATALOG_VERSION.into(),
            found: catalog,
        });
    }
    let mut matrix = FeatureMatrix {
        catalog,
        dataset: field("dataset")?,
        split: field("split")?,
        rows: Vec::new(),
        labels: Vec::new(),
    };
    next()?.ok_or_else(|| bad(2, "missing column header".into()))?;
    let mut line_no = 2;
    while let Some(line) = next()? {
        line_no += 1;
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() != FEATURE_COUNT + 1 {
            return Err(bad(
                line_no,
                format!(
                    "expected {} columns, found {}",
                    FEATURE_COUNT + 1,
                    cells.len()
                ),
            ));
        }
        let mut row = [0.0; FEATURE_COUNT];
        for (slot, cell) in row.iter_mut().zip(&cells) {
            *slot = cell
                .parse()
                .map_err(|e| bad(line_no, format!("{e}: {cell}")))?;
        }
        let label = match cells[FEATURE_COUNT] {
            "0" => 0,
            "1" => 1,
            other => return Err(bad(line_no, format!("bad label {other}"))),
        };
        matrix.rows.push(FeatureVector(row));
        matrix.labels.push(label);
    }
    Ok(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_exact_round_trip() {
        let mut a = [0.0; FEATURE_COUNT];
        for (i, v) in a.iter_mut().enumerate() {
            *v = (i as f64 + 0.1).sqrt() / 3.0 - 1e-300 * i as f64;
        }
        a[5] = f64::MIN_POSITIVE;
        a[6] = -0.0;
        let m = FeatureMatrix {
            catalog: CATALOG_VERSION.into(),
            dataset: "toy".into(),
            split: "train".into(),
            rows: vec![FeatureVector(a), FeatureVector([1.0; FEATURE_COUNT])],
            labels: vec![1, 0],
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.tsv");
        write_feature_matrix(&p, &m).unwrap();
        let back = read_feature_matrix(&p).unwrap();
        for (x, y) in back.rows[0].0.iter().zip(&a) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        assert_eq!(back, m);
    }
}
