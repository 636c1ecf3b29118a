//! Second-order logistic statistics and the exact greedy split scan.
//!
//! Gradient and hessian sums are accumulated in 64.64 fixed point. Integer
//! addition is associative, so a node's statistics, and therefore every
//! gain and leaf weight, do not depend on the order rows are visited in.

use super::GbtParams;

const SCALE: f64 = 18_446_744_073_709_551_616.0; // 2^64

/// Smallest hessian used for a single row; keeps `h > 0` once the margin
/// saturates the sigmoid.
pub const MIN_HESSIAN: f64 = 1e-16;

pub(crate) fn to_fixed(x: f64) -> i128 {
    (x * SCALE).round() as i128
}

pub(crate) fn from_fixed(v: i128) -> f64 {
    v as f64 / SCALE
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `(p - y, p (1 - p))` for `p = sigmoid(raw_score)`.
pub fn grad_hess_logistic(raw_score: f64, label: u8) -> (f64, f64) {
    let p = sigmoid(raw_score);
    (p - f64::from(label), (p * (1.0 - p)).max(MIN_HESSIAN))
}

/// Optimal leaf value `-G / (H + lambda)`, before learning-rate scaling.
pub fn leaf_weight(g: f64, h: f64, params: &GbtParams) -> f64 {
    -g / (h + params.lambda)
}

fn score(g: f64, h: f64, lambda: f64) -> f64 {
    g * g / (h + lambda)
}

/// Summed statistics of a set of rows.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub(crate) struct Stats {
    pub g: i128,
    pub h: i128,
}

impl Stats {
    pub fn add(&mut self, g: i128, h: i128) {
        self.g += g;
        self.h += h;
    }

    pub fn minus(self, other: Stats) -> Stats {
        Stats {
            g: self.g - other.g,
            h: self.h - other.h,
        }
    }

    pub fn grad(self) -> f64 {
        from_fixed(self.g)
    }

    pub fn hess(self) -> f64 {
        from_fixed(self.h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub threshold: f64,
    pub gain: f64,
}

/// A point strictly above `lo` and at most `hi`, so that `x < threshold`
/// sends `lo` left and `hi` right.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) * 0.5;
    if mid > lo && mid <= hi {
        mid
    } else {
        hi
    }
}

/// Incremental scan over one node's rows in ascending feature order.
#[derive(Debug, Clone)]
pub(crate) struct Scanner {
    total: Stats,
    left: Stats,
    last: Option<f64>,
    best: Option<SplitCandidate>,
}

impl Scanner {
    pub fn new(total: Stats) -> Self {
        Scanner {
            total,
            left: Stats::default(),
            last: None,
            best: None,
        }
    }

    /// Feed the next row; rows must arrive sorted by `value`.
    pub fn push(&mut self, value: f64, g: i128, h: i128, params: &GbtParams) {
        if let Some(last) = self.last {
            if value > last {
                self.consider(midpoint(last, value), params);
            }
        }
        self.left.add(g, h);
        self.last = Some(value);
    }

    fn consider(&mut self, threshold: f64, params: &GbtParams) {
        let right = self.total.minus(self.left);
        let (hl, hr) = (self.left.hess(), right.hess());
        if hl < params.min_child_weight || hr < params.min_child_weight {
            return;
        }
        let (gl, gr) = (self.left.grad(), right.grad());
        let (g, h) = (self.total.grad(), self.total.hess());
        let lambda = params.lambda;
        let gain = 0.5 * (score(gl, hl, lambda) + score(gr, hr, lambda) - score(g, h, lambda))
            - params.gamma;
        // Strict comparison keeps the lowest threshold among equal gains.
        if gain > 0.0 && self.best.is_none_or(|b| gain > b.gain) {
            self.best = Some(SplitCandidate { threshold, gain });
        }
    }

    pub fn finish(self) -> Option<SplitCandidate> {
        self.best
    }
}

/// Best split of one sorted column given per-row gradients and hessians.
/// `None` when no threshold has positive gain with both children meeting
/// `min_child_weight`.
pub fn best_split(
    column: &[f64],
    g: &[f64],
    h: &[f64],
    params: &GbtParams,
) -> Option<SplitCandidate> {
    assert!(
        column.len() == g.len() && g.len() == h.len(),
        "column, g and h differ in length"
    );
    debug_assert!(
        column.windows(2).all(|w| w[0] <= w[1]),
        "column must be sorted"
    );
    let fixed: Vec<(i128, i128)> = g
        .iter()
        .zip(h)
        .map(|(&g, &h)| (to_fixed(g), to_fixed(h)))
        .collect();
    let mut total = Stats::default();
    fixed.iter().for_each(|&(g, h)| total.add(g, h));
    if total.hess() < params.min_child_weight {
        return None;
    }
    let mut scan = Scanner::new(total);
    for (&v, &(g, h)) in column.iter().zip(&fixed) {
        scan.push(v, g, h, params);
    }
    scan.finish()
}
