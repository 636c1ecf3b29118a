//! Evaluation reports and the approach-by-dataset results grid.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::auc;
use crate::corpus::Source;
use crate::{Error, Result};

/// Scores and labels of one model on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSet {
    pub dataset: String,
    pub model: String,
    scores: Vec<f64>,
    labels: Vec<u8>,
}

impl ScoredSet {
    pub fn new(
        dataset: impl Into<String>,
        model: impl Into<String>,
        scores: Vec<f64>,
        labels: Vec<u8>,
    ) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(Error::ShapeMismatch {
                name: "scores/labels".into(),
                expected: vec![scores.len()],
                found: vec![labels.len()],
            });
        }
        if scores.is_empty() {
            return Err(Error::EmptyDataset("scored set".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y > 1) {
            return Err(Error::InvalidArgument(format!("label {bad} is not 0/1")));
        }
        Ok(ScoredSet {
            dataset: dataset.into(),
            model: model.into(),
            scores,
            labels,
        })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn auc(&self) -> Result<f64> {
        auc(&self.scores, &self.labels)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Gbt,
    Snn,
    SnnTransfer,
    Combined,
}

impl ModelKind {
    /// Row order of the results grid.
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Gbt,
        ModelKind::Snn,
        ModelKind::SnnTransfer,
        ModelKind::Combined,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Gbt => "gbt",
            ModelKind::Snn => "snn",
            ModelKind::SnnTransfer => "snn_transfer",
            ModelKind::Combined => "combined",
        }
    }

    /// Row label in the results grid.
    pub fn approach(self) -> &'static str {
        match self {
            ModelKind::Gbt => "GTB",
            ModelKind::Snn => "SNN",
            ModelKind::SnnTransfer => "SNN+TL",
            ModelKind::Combined => "Combined",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown model kind '{s}'")))
    }
}

/// Everything needed to rerun the evaluated model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub preprocess_version: String,
    /// Present for models built on the hand-crafted features.
    pub catalog_version: Option<String>,
    pub seeds: BTreeMap<String, u64>,
    pub hyperparameters: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub kind: ModelKind,
    pub dataset: String,
    /// Train, validation and test sizes.
    pub split_sizes: [usize; 3],
    pub auc: f64,
    pub config: ConfigEcho,
}

impl EvalReport {
    pub fn new(
        kind: ModelKind,
        scored: &ScoredSet,
        split_sizes: [usize; 3],
        config: ConfigEcho,
    ) -> Result<Self> {
        Ok(EvalReport {
            kind,
            dataset: scored.dataset.clone(),
            split_sizes,
            auc: scored.auc()?,
            config,
        })
    }
}

/// One JSON record per report.
pub fn write_eval_reports(path: &Path, reports: &[EvalReport]) -> Result<()> {
    let mut out = String::new();
    for r in reports {
        out.push_str(
            &serde_json::to_string(r).map_err(|e| Error::format("eval report", e.to_string()))?,
        );
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_eval_reports(path: &Path) -> Result<Vec<EvalReport>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

/// AUC per (approach, dataset). Rows always follow [`ModelKind::ALL`];
/// columns put the known forums first, then other datasets by name.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultsTable {
    pub datasets: Vec<String>,
    pub cells: BTreeMap<(ModelKind, String), f64>,
}

pub fn results_table(reports: &[EvalReport]) -> Result<ResultsTable> {
    let mut cells = BTreeMap::new();
    for r in reports {
        if cells.insert((r.kind, r.dataset.clone()), r.auc).is_some() {
            return Err(Error::DuplicateCell {
                approach: r.kind.approach().to_string(),
                dataset: r.dataset.clone(),
            });
        }
    }
    let names: BTreeSet<&String> = cells.keys().map(|(_, d)| d).collect();
    let rank = |d: &str| {
        Source::ALL
            .iter()
            .position(|s| s.as_str() == d)
            .unwrap_or(Source::ALL.len())
    };
    let mut datasets: Vec<String> = names.into_iter().cloned().collect();
    datasets.sort_by(|a, b| rank(a).cmp(&rank(b)).then_with(|| a.cmp(b)));
    Ok(ResultsTable { datasets, cells })
}

impl ResultsTable {
    fn grid(&self) -> Vec<Vec<String>> {
        let mut rows = vec![std::iter::once("approach".to_string())
            .chain(self.datasets.iter().cloned())
            .collect()];
        if self.datasets.is_empty() {
            return rows;
        }
        for kind in ModelKind::ALL {
            let mut row = vec![kind.approach().to_string()];
            for d in &self.datasets {
                row.push(match self.cells.get(&(kind, d.clone())) {
                    Some(v) => format!("{v:.3}"),
                    None => String::new(),
                });
            }
            rows.push(row);
        }
        rows
    }

    /// Right-aligned columns, `-` for missing cells.
    pub fn to_text(&self) -> String {
        let grid = self.grid();
        let widths: Vec<usize> = (0..grid[0].len())
            .map(|c| grid.iter().map(|r| r[c].len().max(1)).max().unwrap_or(1))
            .collect();
        let mut out = String::new();
        for row in &grid {
            let line: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(c, v)| {
                    let v = if v.is_empty() { "-" } else { v };
                    if c == 0 {
                        format!("{v:<w$}", w = widths[0])
                    } else {
                        format!("{v:>w$}", w = widths[c])
                    }
                })
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out
    }

    /// Tab-separated, empty field for missing cells.
    pub fn to_tsv(&self) -> String {
        self.grid().iter().map(|r| r.join("\t") + "\n").collect()
    }

    pub fn filled(&self) -> usize {
        self.cells.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(kind: ModelKind, dataset: &str, auc: f64) -> EvalReport {
        EvalReport {
            kind,
            dataset: dataset.into(),
            split_sizes: [6, 2, 2],
            auc,
            config: ConfigEcho {
                preprocess_version: "pp_v1".into(),
                catalog_version: None,
                seeds: BTreeMap::from([("split".to_string(), 3)]),
                hyperparameters: serde_json::json!({}),
            },
        }
    }

    #[test]
    fn grid_layout() {
        let t = results_table(&[
            report(ModelKind::Snn, "zeta", 0.5),
            report(ModelKind::Gbt, "askubuntu", 0.6554),
            report(ModelKind::Gbt, "quora", 0.9406),
        ])
        .unwrap();
        assert_eq!(t.datasets, ["quora", "askubuntu", "zeta"]);
        assert_eq!(
            t.to_tsv(),
            "approach\tquora\taskubuntu\tzeta\nGTB\t0.941\t0.655\t\nSNN\t\t\t0.500\nSNN+TL\t\t\t\nCombined\t\t\t\n"
        );
        let text = t.to_text();
        assert_eq!(
            text.lines().next().unwrap(),
            "approach  quora  askubuntu   zeta"
        );
        assert_eq!(
            text.lines().nth(2).unwrap(),
            "SNN           -          -  0.500"
        );
    }

    #[test]
    fn empty_and_duplicates() {
        let t = results_table(&[]).unwrap();
        assert_eq!(t.to_tsv(), "approach\n");
        assert_eq!(t.to_text(), "approach\n");
        let err = results_table(&[
            report(ModelKind::Gbt, "q", 0.5),
            report(ModelKind::Gbt, "q", 0.6),
        ])
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateCell { .. }));
    }

    #[test]
    fn scored_set_guards() {
        assert!(ScoredSet::new("d", "m", vec![], vec![]).is_err());
        assert!(ScoredSet::new("d", "m", vec![0.1], vec![2]).is_err());
        assert!(ScoredSet::new("d", "m", vec![0.1], vec![1, 0]).is_err());
        let s = ScoredSet::new("d", "m", vec![0.1, 0.2], vec![1, 1]).unwrap();
        assert!(matches!(s.auc(), Err(Error::SingleClass { .. })));
    }
}
