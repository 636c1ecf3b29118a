//! Central-difference verification of [`backward`].

use std::collections::BTreeSet;

use rand::seq::IteratorRandom;

use super::model::{backward, batch_loss};
use super::Snn;
use crate::embeddings::{EncodedPair, PAD};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheck {
    pub max_relative_error: f64,
    /// Largest `|a - cd|`; central differences in double precision cannot
    /// resolve much below `ulp(loss) / eps`, which bounds the relative
    /// error of components near zero.
    pub max_abs_error: f64,
    pub checked: usize,
    /// Array, flat index, analytic and central-difference values of the
    /// coordinate with the largest error.
    pub worst: Option<(String, usize, f64, f64)>,
}

/// Largest relative error between analytic and central-difference
/// gradients over sampled coordinates,
/// `|a - cd| / max(|a|, |cd|, 1e-12)`.
///
/// Up to `per_array` coordinates are drawn from each array of an unfrozen
/// group. Embedding coordinates are drawn from the rows the batch uses;
/// every other row has zero gradient by construction.
pub fn gradient_check(
    model: &Snn,
    batch: &[EncodedPair],
    eps: f64,
    per_array: usize,
    seed: u64,
) -> GradCheck {
    let analytic = backward(model, batch);
    let d = model.spec.embed_dim;
    let used: BTreeSet<usize> = batch
        .iter()
        .flat_map(|p| p.q1_ids.iter().chain(&p.q2_ids))
        .copied()
        .filter(|&id| id != PAD)
        .collect();
    let mut probe = model.clone();
    let mut report = GradCheck {
        max_relative_error: 0.0,
        max_abs_error: 0.0,
        checked: 0,
        worst: None,
    };
    for (i, array) in model.params.arrays.iter().enumerate() {
        if model.params.is_frozen(array.group) {
            continue;
        }
        let mut rng = rng::stream(seed, &format!("gradcheck/{}", array.name));
        let candidates: Vec<usize> = if array.name == "embedding" {
            used.iter().flat_map(|&id| id * d..(id + 1) * d).collect()
        } else {
            (0..array.data.len()).collect()
        };
        let mut picks = candidates.into_iter().choose_multiple(&mut rng, per_array);
        picks.sort_unstable();
        for k in picks {
            let x = array.data[k];
            probe.params.arrays[i].data[k] = x + eps;
            let up = batch_loss(&probe, batch);
            probe.params.arrays[i].data[k] = x - eps;
            let down = batch_loss(&probe, batch);
            probe.params.arrays[i].data[k] = x;
            let cd = (up - down) / (2.0 * eps);
            let a = analytic.arrays[i][k];
            let err = (a - cd).abs() / a.abs().max(cd.abs()).max(1e-12);
            report.max_abs_error = report.max_abs_error.max((a - cd).abs());
            if err > report.max_relative_error || report.worst.is_none() {
                report.max_relative_error = err;
                report.worst = Some((array.name.clone(), k, a, cd));
            }
            report.checked += 1;
        }
    }
    report
}
