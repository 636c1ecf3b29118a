//! Area under the ROC curve as a Mann-Whitney rank statistic.

use crate::{Error, Result};

/// AUC with tied scores sharing their average rank, so each tied
/// positive/negative pair counts one half.
///
/// Ranks are kept doubled so the statistic is an exact integer; the final
/// division is arranged so that `auc(s, y) + auc(s, 1 - y) == 1.0` holds in
/// floating point.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::ShapeMismatch {
            name: "scores/labels".into(),
            expected: vec![scores.len()],
            found: vec![labels.len()],
        });
    }
    if let Some(bad) = scores.iter().find(|s| s.is_nan()) {
        return Err(Error::InvalidArgument(format!(
            "score {bad} is not a number"
        )));
    }
    let positives = labels.iter().filter(|&&y| y == 1).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClass {
            positives,
            negatives,
        });
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Doubled rank sum of the positives.
    let mut rank_sum2: u128 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && scores[order[end + 1]] == scores[order[start]] {
            end += 1;
        }
        let doubled_rank = (start + 1 + end + 1) as u128;
        let tied_pos = order[start..=end]
            .iter()
            .filter(|&&i| labels[i] == 1)
            .count() as u128;
        rank_sum2 += doubled_rank * tied_pos;
        start = end + 1;
    }

    let (p, n) = (positives as u128, negatives as u128);
    let u2 = rank_sum2 - p * (p + 1);
    let denom = 2 * p * n;
    Ok(if 2 * u2 <= denom {
        u2 as f64 / denom as f64
    } else {
        1.0 - (denom - u2) as f64 / denom as f64
    })
}
