use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::split::{
    from_fixed, grad_hess_logistic, leaf_weight, to_fixed, Scanner, SplitCandidate, Stats,
};
use super::{FeatureTable, GbtParams, TrainingMeta, Tree, TreeEnsemble, TreeNode};
use crate::eval::auc;
use crate::{rng, Error, Result};

const PREVALENCE_CLAMP: f64 = 1e-6;
const SETTLED: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub train_logloss: f64,
    pub val_auc: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct GbtTraining {
    pub model: TreeEnsemble,
    pub history: Vec<RoundRecord>,
}

/// Mean logistic loss of `margins`, summed in fixed point so that the value
/// does not depend on row order.
fn logloss(margins: &[f64], labels: &[u8]) -> f64 {
    let total: i128 = margins
        .iter()
        .zip(labels)
        .map(|(&m, &y)| {
            let softplus = m.max(0.0) + (-m.abs()).exp().ln_1p();
            to_fixed(softplus - f64::from(y) * m)
        })
        .sum();
    from_fixed(total) / margins.len() as f64
}

pub fn train_gbt(x: &FeatureTable, y: &[u8], params: &GbtParams) -> Result<GbtTraining> {
    train_gbt_validated(x, y, None, params)
}

/// Train, optionally stopping early when validation AUC has not improved
/// for `params.early_stopping_rounds` rounds. The returned model keeps the
/// trees up to the best validation round.
pub fn train_gbt_validated(
    x: &FeatureTable,
    y: &[u8],
    validation: Option<(&FeatureTable, &[u8])>,
    params: &GbtParams,
) -> Result<GbtTraining> {
    params.validate()?;
    let n = x.n_rows();
    if n == 0 {
        return Err(Error::EmptyDataset("gbt training set".into()));
    }
    if y.len() != n {
        return Err(Error::ShapeMismatch {
            name: "labels".into(),
            expected: vec![n],
            found: vec![y.len()],
        });
    }
    if let Some(&label) = y.iter().find(|&&l| l > 1) {
        return Err(Error::InvalidArgument(format!("label {label} is not 0/1")));
    }
    if (0..n).any(|i| x.row(i).iter().any(|v| !v.is_finite())) {
        return Err(Error::InvalidArgument(
            "gbt training features must be finite".into(),
        ));
    }

    let positives = y.iter().filter(|&&l| l == 1).count();
    let prevalence = (positives as f64 / n as f64).clamp(PREVALENCE_CLAMP, 1.0 - PREVALENCE_CLAMP);
    let mut model = TreeEnsemble {
        catalog: x.catalog().to_string(),
        feature_names: x.names().to_vec(),
        params: params.clone(),
        base_score: (prevalence / (1.0 - prevalence)).ln(),
        trees: Vec::new(),
        meta: TrainingMeta { rows: n, positives },
    };
    if positives == 0 || positives == n {
        log::warn!(
            "gbt: training labels are all {}; returning the base score only",
            y[0]
        );
        return Ok(GbtTraining {
            model,
            history: Vec::new(),
        });
    }

    let mut val = match validation {
        Some((vx, vy)) => {
            let margins = model.margins(vx)?;
            let vpos = vy.iter().filter(|&&l| l == 1).count();
            if vpos == 0 || vpos == vy.len() {
                log::warn!("gbt: validation set has a single class; early stopping disabled");
                None
            } else {
                Some((vx, vy, margins))
            }
        }
        None => None,
    };

    let d = x.n_cols();
    let sorted: Vec<Vec<u32>> = (0..d)
        .into_par_iter()
        .map(|f| {
            let mut idx: Vec<u32> = (0..n as u32).collect();
            idx.sort_unstable_by(|&a, &b| x.get(a as usize, f).total_cmp(&x.get(b as usize, f)));
            idx
        })
        .collect();

    let mut margins = vec![model.base_score; n];
    let mut col_rng = rng::stream(params.seed, "gbt-colsample");
    let k = ((params.colsample * d as f64).round() as usize).clamp(1, d);
    let mut history = Vec::with_capacity(params.rounds);
    let mut best: Option<(f64, usize)> = None;

    for round in 0..params.rounds {
        let gh: Vec<(i128, i128)> = margins
            .iter()
            .zip(y)
            .map(|(&m, &l)| {
                let (g, h) = grad_hess_logistic(m, l);
                (to_fixed(g), to_fixed(h))
            })
            .collect();
        let mut features = sample(&mut col_rng, d, k).into_vec();
        features.sort_unstable();

        let tree = grow_tree(x, &sorted, &gh, &features, params);
        margins
            .par_iter_mut()
            .enumerate()
            .for_each(|(i, m)| *m += tree.value(x.row(i)));
        model.trees.push(tree);

        let train_logloss = logloss(&margins, y);
        if let Some(prev) = history.last().map(|r: &RoundRecord| r.train_logloss) {
            if train_logloss > prev {
                log::debug!(
                    "gbt: round {round} training logloss rose from {prev} to {train_logloss}"
                );
            }
        }
        let val_auc = match val.as_mut() {
            Some((vx, vy, vm)) => {
                let tree = model.trees.last().expect("just pushed");
                vm.iter_mut()
                    .enumerate()
                    .for_each(|(i, m)| *m += tree.value(vx.row(i)));
                Some(auc(vm, vy)?)
            }
            None => None,
        };
        history.push(RoundRecord {
            round,
            train_logloss,
            val_auc,
        });

        if let (Some(score), Some(patience)) = (val_auc, params.early_stopping_rounds) {
            if best.is_none_or(|(b, _)| score > b) {
                best = Some((score, round));
            }
            let (_, best_round) = best.expect("set above");
            if round - best_round >= patience {
                log::info!("gbt: early stop at round {round}, best round {best_round}");
                break;
            }
        }
    }
    if let (Some((_, best_round)), Some(_)) = (best, params.early_stopping_rounds) {
        model.trees.truncate(best_round + 1);
    }
    Ok(GbtTraining { model, history })
}

struct Growing {
    stats: Stats,
    split: Option<(usize, SplitCandidate)>,
    children: (usize, usize),
}

fn grow_tree(
    x: &FeatureTable,
    sorted: &[Vec<u32>],
    gh: &[(i128, i128)],
    features: &[usize],
    params: &GbtParams,
) -> Tree {
    let n = x.n_rows();
    let mut root = Stats::default();
    gh.iter().for_each(|&(g, h)| root.add(g, h));
    let mut nodes = vec![Growing {
        stats: root,
        split: None,
        children: (0, 0),
    }];
    let mut node_of_row = vec![0u32; n];
    let mut frontier = vec![0usize];

    for _depth in 0..params.max_depth {
        // slot[node] = position in the frontier, for frontier nodes that may split.
        let mut slot = vec![usize::MAX; nodes.len()];
        let eligible: Vec<usize> = frontier
            .iter()
            .copied()
            .filter(|&id| nodes[id].stats.hess() >= params.min_child_weight)
            .collect();
        if eligible.is_empty() {
            break;
        }
        for (s, &id) in eligible.iter().enumerate() {
            slot[id] = s;
        }

        let per_feature: Vec<Vec<Option<SplitCandidate>>> = features
            .par_iter()
            .map(|&f| {
                let mut scans: Vec<Scanner> = eligible
                    .iter()
                    .map(|&id| Scanner::new(nodes[id].stats))
                    .collect();
                for &row in &sorted[f] {
                    let node = node_of_row[row as usize];
                    if node == SETTLED || slot[node as usize] == usize::MAX {
                        continue;
                    }
                    let (g, h) = gh[row as usize];
                    scans[slot[node as usize]].push(x.get(row as usize, f), g, h, params);
                }
                scans.into_iter().map(Scanner::finish).collect()
            })
            .collect();

        // Features are visited in ascending order and only a strictly larger
        // gain replaces the incumbent: lowest feature index wins ties.
        let mut next = Vec::new();
        for (s, &id) in eligible.iter().enumerate() {
            let mut best: Option<(usize, SplitCandidate)> = None;
            for (fi, &f) in features.iter().enumerate() {
                if let Some(c) = per_feature[fi][s] {
                    if best.is_none_or(|(_, b)| c.gain > b.gain) {
                        best = Some((f, c));
                    }
                }
            }
            if let Some(split) = best {
                let left = nodes.len();
                for _ in 0..2 {
                    nodes.push(Growing {
                        stats: Stats::default(),
                        split: None,
                        children: (0, 0),
                    });
                }
                nodes[id].split = Some(split);
                nodes[id].children = (left, left + 1);
                next.extend([left, left + 1]);
            }
        }
        if next.is_empty() {
            break;
        }

        for (row, node) in node_of_row.iter_mut().enumerate() {
            if *node == SETTLED {
                continue;
            }
            let current = &nodes[*node as usize];
            match current.split {
                Some((f, c)) => {
                    let child = if x.get(row, f) < c.threshold {
                        current.children.0
                    } else {
                        current.children.1
                    };
                    let (g, h) = gh[row];
                    nodes[child].stats.add(g, h);
                    *node = child as u32;
                }
                None => *node = SETTLED,
            }
        }
        frontier = next;
    }

    let mut tree = Tree { nodes: Vec::new() };
    emit(&nodes, 0, params, &mut tree);
    tree
}

/// Append `id` and its subtree to `tree` in pre-order.
fn emit(nodes: &[Growing], id: usize, params: &GbtParams, tree: &mut Tree) {
    let node = &nodes[id];
    match node.split {
        None => {
            let w =
                leaf_weight(node.stats.grad(), node.stats.hess(), params) * params.learning_rate;
            tree.nodes.push(TreeNode::Leaf { weight: w });
        }
        Some((feature, c)) => {
            let at = tree.nodes.len();
            tree.nodes.push(TreeNode::Leaf { weight: 0.0 });
            emit(nodes, node.children.0, params, tree);
            let right = tree.nodes.len();
            emit(nodes, node.children.1, params, tree);
            tree.nodes[at] = TreeNode::Split {
                feature,
                threshold: c.threshold,
                default_left: true,
                gain: c.gain,
                left: at + 1,
                right,
            };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[[f64; 2]]) -> FeatureTable {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        FeatureTable::from_rows("toy", vec!["a".into(), "b".into()], &rows).unwrap()
    }

    #[test]
    fn single_class_gives_base_score_only() {
        let x = table(&[[0.0, 1.0], [1.0, 0.0]]);
        let out = train_gbt(&x, &[1, 1], &GbtParams::default()).unwrap();
        assert!(out.model.trees.is_empty());
        let p = out.model.probability(&[0.0, 0.0]);
        assert!((p - (1.0 - PREVALENCE_CLAMP)).abs() < 1e-12);
    }

    #[test]
    fn guards() {
        let x = table(&[]);
        assert!(matches!(
            train_gbt(&x, &[], &GbtParams::default()),
            Err(Error::EmptyDataset(_))
        ));
        let x = table(&[[0.0, f64::NAN], [1.0, 0.0]]);
        assert!(train_gbt(&x, &[0, 1], &GbtParams::default()).is_err());
        let x = table(&[[0.0, 1.0], [1.0, 0.0]]);
        assert!(train_gbt(&x, &[0], &GbtParams::default()).is_err());
    }

    #[test]
    fn one_round_on_four_points_matches_hand_computation() {
        let x = table(&[[1.0, 0.0], [2.0, 0.0], [3.0, 0.0], [4.0, 0.0]]);
        let params = GbtParams {
            rounds: 1,
            max_depth: 1,
            min_child_weight: 0.0,
            learning_rate: 1.0,
            colsample: 1.0,
            ..GbtParams::default()
        };
        let out = train_gbt(&x, &[0, 0, 1, 1], &params).unwrap();
        assert_eq!(out.model.base_score, 0.0);
        let tree = &out.model.trees[0];
        match tree.nodes[0] {
            TreeNode::Split {
                feature,
                threshold,
                gain,
                ..
            } => {
                assert_eq!((feature, threshold), (0, 2.5));
                assert!((gain - 2.0 / 3.0).abs() < 1e-15);
            }
            _ => panic!("expected a split"),
        }
        // G_L = 1, H_L = 0.5 -> w = -1 / 1.5
        assert_eq!(tree.nodes[1], TreeNode::Leaf { weight: -1.0 / 1.5 });
        assert_eq!(tree.nodes[2], TreeNode::Leaf { weight: 1.0 / 1.5 });
        let imp = super::super::feature_importance(&out.model);
        assert!((imp["a"] - 0.6667).abs() < 1e-4);
    }
}
