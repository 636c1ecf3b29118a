//! Text serialization of a [`TreeEnsemble`].
//!
//! ```text
//! dupq-gbt/1
//! catalog catalog_v1
//! features 2
//! feature a
//! feature b
//! param rounds 200
//! ...
//! base_score 0.0000000000000000e0
//! meta rows 4
//! meta positives 2
//! trees 1
//! tree 3
//! split 0 2.5000000000000000e0 L 6.6666666666666663e-1 1 2
//! leaf -6.6666666666666663e-1
//! leaf 6.6666666666666663e-1
//! ```
//!
//! Nodes are listed in pre-order. Reals carry 17 significant digits, so a
//! write/read cycle is bit-exact.

use std::fs;
use std::path::Path;

use super::{GbtParams, TrainingMeta, Tree, TreeEnsemble, TreeNode};
use crate::{fmt_real, Error, Result};

pub const MODEL_FORMAT: &str = "dupq-gbt/1";

pub fn model_to_string(model: &TreeEnsemble) -> String {
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };
    let p = &model.params;
    line(MODEL_FORMAT.to_string());
    line(format!("catalog {}", model.catalog));
    line(format!("features {}", model.feature_names.len()));
    for name in &model.feature_names {
        line(format!("feature {name}"));
    }
    line(format!("param rounds {}", p.rounds));
    line(format!("param learning_rate {}", fmt_real(p.learning_rate)));
    line(format!("param max_depth {}", p.max_depth));
    line(format!(
        "param min_child_weight {}",
        fmt_real(p.min_child_weight)
    ));
    line(format!("param lambda {}", fmt_real(p.lambda)));
    line(format!("param gamma {}", fmt_real(p.gamma)));
    line(format!("param colsample {}", fmt_real(p.colsample)));
    line(format!("param seed {}", p.seed));
    line(format!(
        "param early_stopping_rounds {}",
        p.early_stopping_rounds
            .map_or("none".to_string(), |r| r.to_string())
    ));
    line(format!("base_score {}", fmt_real(model.base_score)));
    line(format!("meta rows {}", model.meta.rows));
    line(format!("meta positives {}", model.meta.positives));
    line(format!("trees {}", model.trees.len()));
    for tree in &model.trees {
        line(format!("tree {}", tree.nodes.len()));
        for node in &tree.nodes {
            line(match *node {
                TreeNode::Leaf { weight } => format!("leaf {}", fmt_real(weight)),
                TreeNode::Split {
                    feature,
                    threshold,
                    default_left,
                    gain,
                    left,
                    right,
                } => format!(
                    "split {feature} {} {} {} {left} {right}",
                    fmt_real(threshold),
                    if default_left { "L" } else { "R" },
                    fmt_real(gain)
                ),
            });
        }
    }
    out
}

pub fn write_model(path: &Path, model: &TreeEnsemble) -> Result<()> {
    fs::write(path, model_to_string(model)).map_err(|e| Error::io(path, e))
}

pub fn read_model(path: &Path) -> Result<TreeEnsemble> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_model(&text)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    at: usize,
}

impl<'a> Lines<'a> {
    fn fail(&self, message: impl std::fmt::Display) -> Error {
        Error::format("gbt model", format!("line {}: {message}", self.at))
    }

    fn next(&mut self) -> Result<&'a str> {
        match self.inner.next() {
            Some((i, l)) => {
                self.at = i + 1;
                Ok(l)
            }
            None => Err(self.fail("unexpected end of file")),
        }
    }

    /// Next line, which must start with `key`; returns the remaining fields.
    fn keyed(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let line = self.next()?;
        let mut fields = line.split(' ');
        if fields.next() != Some(key) {
            return Err(self.fail(format!("expected '{key}', found '{line}'")));
        }
        Ok(fields.collect())
    }

    fn value<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let fields = self.keyed(key)?;
        match fields.as_slice() {
            [v] => v
                .parse()
                .map_err(|_| self.fail(format!("bad value for {key}: {v}"))),
            _ => Err(self.fail(format!("expected one value after {key}"))),
        }
    }

    fn param<T: std::str::FromStr>(&mut self, name: &str) -> Result<T> {
        let fields = self.keyed("param")?;
        match fields.as_slice() {
            [n, v] if *n == name => v
                .parse()
                .map_err(|_| self.fail(format!("bad value for {name}: {v}"))),
            _ => Err(self.fail(format!("expected 'param {name} <value>'"))),
        }
    }

    fn meta(&mut self, name: &str) -> Result<usize> {
        let fields = self.keyed("meta")?;
        match fields.as_slice() {
            [n, v] if *n == name => v
                .parse()
                .map_err(|_| self.fail(format!("bad value for {name}: {v}"))),
            _ => Err(self.fail(format!("expected 'meta {name} <value>'"))),
        }
    }
}

pub fn parse_model(text: &str) -> Result<TreeEnsemble> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        at: 0,
    };
    let header = lines.next()?;
    if header != MODEL_FORMAT {
        return Err(Error::VersionMismatch {
            what: "gbt model format",
            expected: MODEL_FORMAT.into(),
            found: header.into(),
        });
    }
    let catalog: String = lines.value("catalog")?;
    let n_features: usize = lines.value("features")?;
    let feature_names = (0..n_features)
        .map(|_| lines.value("feature"))
        .collect::<Result<Vec<String>>>()?;
    let params = GbtParams {
        rounds: lines.param("rounds")?,
        learning_rate: lines.param("learning_rate")?,
        max_depth: lines.param("max_depth")?,
        min_child_weight: lines.param("min_child_weight")?,
        lambda: lines.param("lambda")?,
        gamma: lines.param("gamma")?,
        colsample: lines.param("colsample")?,
        seed: lines.param("seed")?,
        early_stopping_rounds: match lines.param::<String>("early_stopping_rounds")?.as_str() {
            "none" => None,
            v => Some(
                v.parse()
                    .map_err(|_| lines.fail("bad early_stopping_rounds"))?,
            ),
        },
    };
    let base_score = lines.value("base_score")?;
    let meta = TrainingMeta {
        rows: lines.meta("rows")?,
        positives: lines.meta("positives")?,
    };
    let n_trees: usize = lines.value("trees")?;
    let mut trees = Vec::with_capacity(n_trees);
    for _ in 0..n_trees {
        let n_nodes: usize = lines.value("tree")?;
        let mut nodes = Vec::with_capacity(n_nodes);
        for i in 0..n_nodes {
            let line = lines.next()?;
            let fields: Vec<&str> = line.split(' ').collect();
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| lines.fail(format!("bad number '{s}'")))
            };
            let idx = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| lines.fail(format!("bad index '{s}'")))
            };
            let node = match fields.as_slice() {
                ["leaf", w] => TreeNode::Leaf { weight: num(w)? },
                ["split", f, t, dir, g, l, r] => {
                    let (feature, left, right) = (idx(f)?, idx(l)?, idx(r)?);
                    if feature >= n_features
                        || left <= i
                        || right <= i
                        || left >= n_nodes
                        || right >= n_nodes
                    {
                        return Err(lines.fail("split refers to a missing feature or node"));
                    }
                    TreeNode::Split {
                        feature,
                        threshold: num(t)?,
                        default_left: match *dir {
                            "L" => true,
                            "R" => false,
                            _ => return Err(lines.fail("default direction must be L or R")),
                        },
                        gain: num(g)?,
                        left,
                        right,
                    }
                }
                _ => return Err(lines.fail(format!("expected a leaf or split, found '{line}'"))),
            };
            nodes.push(node);
        }
        trees.push(Tree { nodes });
    }
    if let Some((i, extra)) = lines.inner.next() {
        return Err(Error::format(
            "gbt model",
            format!("line {}: trailing content '{extra}'", i + 1),
        ));
    }
    Ok(TreeEnsemble {
        catalog,
        feature_names,
        params,
        base_score,
        trees,
        meta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Hand-built two-split tree over two features.
    ///
    ///   a < 0.5 ? (b < 2 ? -0.5 : 0.25) : 1.0, base 0.1
    fn hand_model() -> TreeEnsemble {
        TreeEnsemble {
            catalog: "toy".into(),
            feature_names: vec!["a".into(), "b".into()],
            params: GbtParams::default(),
            base_score: 0.1,
            trees: vec![Tree {
                nodes: vec![
                    TreeNode::Split {
                        feature: 0,
                        threshold: 0.5,
                        default_left: true,
                        gain: 1.25,
                        left: 1,
                        right: 4,
                    },
                    TreeNode::Split {
                        feature: 1,
                        threshold: 2.0,
                        default_left: false,
                        gain: 0.5,
                        left: 2,
                        right: 3,
                    },
                    TreeNode::Leaf { weight: -0.5 },
                    TreeNode::Leaf { weight: 0.25 },
                    TreeNode::Leaf { weight: 1.0 },
                ],
            }],
            meta: TrainingMeta {
                rows: 10,
                positives: 4,
            },
        }
    }

    #[test]
    fn golden_hand_built_model() {
        let m = hand_model();
        let text = model_to_string(&m);
        assert!(text.contains("split 0 5.0000000000000000e-1 L 1.2500000000000000e0 1 4\n"));
        let back = parse_model(&text).unwrap();
        assert_eq!(back, m);
        // sigmoid(0.1 - 0.5), sigmoid(0.1 + 0.25), sigmoid(0.1 + 1.0)
        let expected = [
            0.401_312_339_887_548,
            0.586_617_578_917_330_1,
            0.750_260_105_595_117_6,
        ];
        for (row, want) in [[0.0, 1.0], [0.0, 3.0], [0.9, 0.0]].iter().zip(expected) {
            assert!((back.probability(row) - want).abs() < 1e-15);
        }
        assert_eq!(back.margin(&[f64::NAN, f64::NAN]), 0.1 + 0.25);
    }

    #[test]
    fn awkward_reals_round_trip_bit_exactly() {
        let mut m = hand_model();
        m.base_score = -0.1 + 1e-17 * 3.0;
        m.params.learning_rate = 1.0 / 3.0;
        m.params.early_stopping_rounds = None;
        m.trees.push(Tree::leaf(f64::MIN_POSITIVE * 7.0));
        m.trees.push(Tree::leaf(-123_456.789_012_345_67));
        let back = parse_model(&model_to_string(&m)).unwrap();
        assert_eq!(back, m);
        assert_eq!(model_to_string(&back), model_to_string(&m));
    }

    #[test]
    fn malformed_files() {
        let good = model_to_string(&hand_model());
        assert!(matches!(
            parse_model("dupq-gbt/0\n"),
            Err(Error::VersionMismatch { .. })
        ));
        assert!(parse_model(&good.replace("split 0 ", "split 7 ")).is_err());
        assert!(parse_model(&good.replace(" L ", " X ")).is_err());
        let truncated: String = good
            .lines()
            .take(good.lines().count() - 1)
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(parse_model(&truncated).is_err());
        assert!(parse_model(&format!("{good}leaf 1\n")).is_err());
    }
}
