//! Second-order gradient tree boosting for binary labels.
//!
//! Trees are grown level by level with exact greedy split search over
//! presorted columns. The learning rate is folded into the stored leaf
//! weights, so a prediction is `sigmoid(base_score + sum of leaf values)`.

mod model_file;
mod split;
mod train;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::features::{FeatureVector, CATALOG_VERSION};
use crate::{Error, Result};

pub use model_file::{model_to_string, parse_model, read_model, write_model, MODEL_FORMAT};
pub use split::{
    best_split, grad_hess_logistic, leaf_weight, sigmoid, SplitCandidate, MIN_HESSIAN,
};
pub use train::{train_gbt, train_gbt_validated, GbtTraining, RoundRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbtParams {
    pub rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_child_weight: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub colsample: f64,
    pub seed: u64,
    /// Patience in rounds for early stopping on validation AUC; only used
    /// when a validation set is supplied.
    pub early_stopping_rounds: Option<usize>,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams {
            rounds: 200,
            learning_rate: 0.1,
            max_depth: 6,
            min_child_weight: 1.0,
            lambda: 1.0,
            gamma: 0.0,
            colsample: 0.8,
            seed: 0,
            early_stopping_rounds: Some(10),
        }
    }
}

impl GbtParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("gbt: {what}")));
        if self.rounds == 0 {
            return bad("rounds must be at least 1");
        }
        if self.max_depth == 0 {
            return bad("max_depth must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad("learning_rate must lie in (0, 1]");
        }
        if !(self.colsample > 0.0 && self.colsample <= 1.0) {
            return bad("colsample must lie in (0, 1]");
        }
        if !(self.lambda >= 0.0 && self.gamma >= 0.0 && self.min_child_weight >= 0.0) {
            return bad("lambda, gamma and min_child_weight must be non-negative");
        }
        Ok(())
    }
}

/// Row-major feature matrix tagged with the catalog its columns follow.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    catalog: String,
    names: Vec<String>,
    values: Vec<f64>,
    rows: usize,
}

impl FeatureTable {
    pub fn new(catalog: impl Into<String>, names: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let cols = names.len();
        if cols == 0 || !values.len().is_multiple_of(cols) {
            return Err(Error::ShapeMismatch {
                name: "feature table".into(),
                expected: vec![cols],
                found: vec![values.len()],
            });
        }
        Ok(FeatureTable {
            catalog: catalog.into(),
            rows: values.len() / cols,
            names,
            values,
        })
    }

    pub fn from_rows(
        catalog: impl Into<String>,
        names: Vec<String>,
        rows: &[Vec<f64>],
    ) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.len() != names.len()) {
            return Err(Error::ShapeMismatch {
                name: "feature row".into(),
                expected: vec![names.len()],
                found: vec![r.len()],
            });
        }
        FeatureTable::new(catalog, names, rows.concat())
    }

    /// Catalog-ordered table from pair feature vectors.
    pub fn from_vectors(vectors: &[FeatureVector]) -> Self {
        let values = vectors.iter().flat_map(|v| v.0).collect();
        FeatureTable::new(CATALOG_VERSION, crate::features::feature_names(), values)
            .expect("42 columns")
    }

    pub fn catalog(&self) -> &str {
        &self.catalog
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.n_cols();
        &self.values[i * d..(i + 1) * d]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols() + col]
    }

    /// The table with its rows reordered: row `i` of the result is row
    /// `order[i]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let values = order
            .iter()
            .flat_map(|&i| self.row(i).iter().copied())
            .collect();
        FeatureTable {
            values,
            rows: order.len(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        /// Where a missing (NaN) value goes.
        default_left: bool,
        gain: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        weight: f64,
    },
}

/// Nodes in pre-order; the root is node 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn leaf(weight: f64) -> Self {
        Tree {
            nodes: vec![TreeNode::Leaf { weight }],
        }
    }

    pub fn value(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                TreeNode::Leaf { weight } => return weight,
                TreeNode::Split {
                    feature,
                    threshold,
                    default_left,
                    left,
                    right,
                    ..
                } => {
                    let x = row[feature];
                    let go_left = if x.is_nan() {
                        default_left
                    } else {
                        x < threshold
                    };
                    i = if go_left { left } else { right };
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrainingMeta {
    pub rows: usize,
    pub positives: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeEnsemble {
    pub catalog: String,
    pub feature_names: Vec<String>,
    pub params: GbtParams,
    pub base_score: f64,
    pub trees: Vec<Tree>,
    pub meta: TrainingMeta,
}

impl TreeEnsemble {
    /// Log-odds before the sigmoid.
    pub fn margin(&self, row: &[f64]) -> f64 {
        self.trees
            .iter()
            .fold(self.base_score, |acc, t| acc + t.value(row))
    }

    /// Probability, kept inside the open unit interval.
    pub fn probability(&self, row: &[f64]) -> f64 {
        sigmoid(self.margin(row)).clamp(f64::EPSILON, 1.0 - f64::EPSILON)
    }

    fn check_table(&self, table: &FeatureTable) -> Result<()> {
        if table.catalog() != self.catalog {
            return Err(Error::VersionMismatch {
                what: "feature catalog",
                expected: self.catalog.clone(),
                found: table.catalog().to_string(),
            });
        }
        if table.names() != self.feature_names.as_slice() {
            return Err(Error::ShapeMismatch {
                name: "feature columns".into(),
                expected: vec![self.feature_names.len()],
                found: vec![table.n_cols()],
            });
        }
        Ok(())
    }

    /// Margins for every row of `table`, which must follow this model's
    /// catalog.
    pub fn margins(&self, table: &FeatureTable) -> Result<Vec<f64>> {
        self.check_table(table)?;
        Ok((0..table.n_rows())
            .map(|i| self.margin(table.row(i)))
            .collect())
    }
}

/// Probabilities for every row of `table`; errors when the table was built
/// against a different feature catalog.
pub fn predict_gbt(ensemble: &TreeEnsemble, table: &FeatureTable) -> Result<Vec<f64>> {
    ensemble.check_table(table)?;
    Ok((0..table.n_rows())
        .map(|i| ensemble.probability(table.row(i)))
        .collect())
}

/// Total split gain per feature name, over every split of every tree.
pub fn feature_importance(ensemble: &TreeEnsemble) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for tree in &ensemble.trees {
        for node in &tree.nodes {
            if let TreeNode::Split { feature, gain, .. } = node {
                *out.entry(ensemble.feature_names[*feature].clone())
                    .or_insert(0.0) += gain;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ensemble(base_score: f64, trees: Vec<Tree>) -> TreeEnsemble {
        TreeEnsemble {
            catalog: "toy".into(),
            feature_names: vec!["a".into(), "b".into()],
            params: GbtParams::default(),
            base_score,
            trees,
            meta: TrainingMeta::default(),
        }
    }

    fn stump() -> Tree {
        Tree {
            nodes: vec![
                TreeNode::Split {
                    feature: 1,
                    threshold: 0.5,
                    default_left: false,
                    gain: 2.0,
                    left: 1,
                    right: 2,
                },
                TreeNode::Leaf { weight: -0.25 },
                TreeNode::Leaf { weight: 0.75 },
            ],
        }
    }

    #[test]
    fn zero_trees_and_single_leaf() {
        assert_eq!(ensemble(0.0, vec![]).probability(&[0.0, 0.0]), 0.5);
        let e = ensemble(0.2, vec![Tree::leaf(0.3)]);
        assert_eq!(e.probability(&[1.0, 1.0]), sigmoid(0.5));
    }

    #[test]
    fn routing_and_missing_values() {
        let e = ensemble(0.0, vec![stump()]);
        assert_eq!(e.margin(&[9.0, 0.4]), -0.25);
        assert_eq!(e.margin(&[9.0, 0.5]), 0.75);
        assert_eq!(e.margin(&[9.0, f64::NAN]), 0.75);
    }

    #[test]
    fn importance() {
        assert!(feature_importance(&ensemble(0.0, vec![])).is_empty());
        let imp = feature_importance(&ensemble(0.0, vec![stump(), stump()]));
        assert_eq!(imp.len(), 1);
        assert_eq!(imp["b"], 4.0);
    }

    #[test]
    fn catalog_mismatch_is_an_error() {
        let e = ensemble(0.0, vec![stump()]);
        let table =
            FeatureTable::new("other", vec!["a".into(), "b".into()], vec![0.0, 1.0]).unwrap();
        assert!(matches!(
            predict_gbt(&e, &table),
            Err(Error::VersionMismatch { .. })
        ));
        let table = FeatureTable::new("toy", vec!["a".into(), "c".into()], vec![0.0, 1.0]).unwrap();
        assert!(predict_gbt(&e, &table).is_err());
        let table = FeatureTable::new("toy", vec!["a".into(), "b".into()], vec![0.0, 1.0]).unwrap();
        assert_eq!(predict_gbt(&e, &table).unwrap(), vec![sigmoid(0.75)]);
    }

    #[test]
    fn params_validation() {
        assert!(GbtParams::default().validate().is_ok());
        for p in [
            GbtParams {
                rounds: 0,
                ..Default::default()
            },
            GbtParams {
                max_depth: 0,
                ..Default::default()
            },
            GbtParams {
                learning_rate: 0.0,
                ..Default::default()
            },
            GbtParams {
                colsample: 1.5,
                ..Default::default()
            },
            GbtParams {
                lambda: -1.0,
                ..Default::default()
            },
        ] {
            assert!(p.validate().is_err());
        }
    }
}
