//! Forward pass, loss and reverse-mode gradients.

use rayon::prelude::*;

use super::params::{Layout, ParameterStore};
use super::{Aggregation, Snn, SnnSpec};
use crate::embeddings::{EncodedPair, PAD};
use crate::gbt::sigmoid;
use crate::{Error, Result};

/// Sparse embedding gradient: (row id, row gradient).
type RowGrads = Vec<(usize, Vec<f64>)>;

/// Probability clamp applied inside the loss.
pub const BCE_CLAMP: f64 = 1e-7;

/// Binary cross-entropy of a probability, clamped to `[1e-7, 1 - 1e-7]`.
pub fn bce_loss(p: f64, label: u8) -> f64 {
    let p = p.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
    if label == 1 {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

/// Elementwise `exp(-|r1 - r2|)`.
pub fn aggregate_exp_abs(r1: &[f64], r2: &[f64]) -> Result<Vec<f64>> {
    if r1.len() != r2.len() {
        return Err(Error::ShapeMismatch {
            name: "aggregation input".into(),
            expected: vec![r1.len()],
            found: vec![r2.len()],
        });
    }
    Ok(r1
        .iter()
        .zip(r2)
        .map(|(a, b)| (-(a - b).abs()).exp())
        .collect())
}

pub fn aggregate_concat(r1: &[f64], r2: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(r1.len() + r2.len());
    out.extend_from_slice(r1);
    out.extend_from_slice(r2);
    out
}

/// Gradients of the mean batch loss, aligned with [`ParameterStore::arrays`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub loss: f64,
    pub arrays: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros(store: &ParameterStore) -> Gradients {
        Gradients {
            loss: 0.0,
            arrays: store
                .arrays
                .iter()
                .map(|a| vec![0.0; a.data.len()])
                .collect(),
        }
    }

    pub fn get<'a>(&'a self, store: &ParameterStore, name: &str) -> Option<&'a [f64]> {
        let i = store.arrays.iter().position(|a| a.name == name)?;
        Some(&self.arrays[i])
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `W x + b` for `W` of shape `[b.len(), x.len()]`.
fn affine(w: &[f64], b: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    b.iter()
        .enumerate()
        .map(|(o, bo)| bo + dot(&w[o * n..(o + 1) * n], x))
        .collect()
}

/// `out += W^T delta`.
fn add_transposed(w: &[f64], delta: &[f64], out: &mut [f64]) {
    let n = out.len();
    for (o, &d) in delta.iter().enumerate() {
        if d != 0.0 {
            for (acc, wi) in out.iter_mut().zip(&w[o * n..(o + 1) * n]) {
                *acc += wi * d;
            }
        }
    }
}

/// `g += delta x^T`.
fn add_outer(g: &mut [f64], delta: &[f64], x: &[f64]) {
    let n = x.len();
    for (o, &d) in delta.iter().enumerate() {
        if d != 0.0 {
            for (acc, xi) in g[o * n..(o + 1) * n].iter_mut().zip(x) {
                *acc += d * xi;
            }
        }
    }
}

fn add_into(acc: &mut [f64], x: &[f64]) {
    for (a, v) in acc.iter_mut().zip(x) {
        *a += v;
    }
}

struct LstmStep {
    id: usize,
    /// Activated gates `i, f, g, o`, each of width `H`.
    gates: Vec<f64>,
    c_prev: Vec<f64>,
    h_prev: Vec<f64>,
    tanh_c: Vec<f64>,
}

struct QuestionTrace {
    ids: Vec<usize>,
    steps: Vec<LstmStep>,
    /// Encoder output followed by the output of each representation layer.
    acts: Vec<Vec<f64>>,
}

impl QuestionTrace {
    fn output(&self) -> &[f64] {
        self.acts.last().expect("encoder output")
    }
}

struct Net<'a> {
    spec: &'a SnnSpec,
    store: &'a ParameterStore,
    layout: Layout,
}

impl<'a> Net<'a> {
    fn new(spec: &'a SnnSpec, store: &'a ParameterStore) -> Self {
        Net {
            spec,
            store,
            layout: Layout::of(spec),
        }
    }

    fn data(&self, i: usize) -> &'a [f64] {
        &self.store.arrays[i].data
    }

    fn embedding_row(&self, id: usize) -> &'a [f64] {
        let d = self.spec.embed_dim;
        &self.data(self.layout.embedding)[id * d..(id + 1) * d]
    }

    /// Dense stack; every layer is ReLU unless `linear_last` is set.
    fn dense(
        &self,
        layers: &[(usize, usize)],
        input: Vec<f64>,
        linear_last: bool,
    ) -> Vec<Vec<f64>> {
        let mut acts = vec![input];
        for (k, &(w, b)) in layers.iter().enumerate() {
            let mut out = affine(self.data(w), self.data(b), acts.last().expect("input"));
            if !(linear_last && k + 1 == layers.len()) {
                out.iter_mut().for_each(|x| *x = x.max(0.0));
            }
            acts.push(out);
        }
        acts
    }

    /// Backward through a dense stack; returns the gradient at its input.
    fn dense_back(
        &self,
        layers: &[(usize, usize)],
        acts: &[Vec<f64>],
        mut delta: Vec<f64>,
        linear_last: bool,
        grads: &mut [Vec<f64>],
    ) -> Vec<f64> {
        for (k, &(w, b)) in layers.iter().enumerate().rev() {
            if !(linear_last && k + 1 == layers.len()) {
                for (d, &a) in delta.iter_mut().zip(&acts[k + 1]) {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            add_outer(&mut grads[w], &delta, &acts[k]);
            add_into(&mut grads[b], &delta);
            let mut below = vec![0.0; acts[k].len()];
            add_transposed(self.data(w), &delta, &mut below);
            delta = below;
        }
        delta
    }

    fn encode(&self, ids: &[usize]) -> QuestionTrace {
        let ids: Vec<usize> = ids.iter().copied().filter(|&id| id != PAD).collect();
        let mut steps = Vec::new();
        let encoded = match self.layout.lstm {
            None => {
                let mut mean = vec![0.0; self.spec.embed_dim];
                for &id in &ids {
                    add_into(&mut mean, self.embedding_row(id));
                }
                if !ids.is_empty() {
                    let n = ids.len() as f64;
                    mean.iter_mut().for_each(|x| *x /= n);
                }
                mean
            }
            Some([w, u, b]) => {
                let hd = self.spec.hidden_dim;
                let (w, u, b) = (self.data(w), self.data(u), self.data(b));
                let mut h = vec![0.0; hd];
                let mut c = vec![0.0; hd];
                for &id in &ids {
                    let x = self.embedding_row(id);
                    let mut gates = affine(w, b, x);
                    add_matvec(u, &h, &mut gates);
                    for (k, z) in gates.iter_mut().enumerate() {
                        *z = if k / hd == 2 { z.tanh() } else { sigmoid(*z) };
                    }
                    let (i, f, g, o) = (
                        &gates[..hd],
                        &gates[hd..2 * hd],
                        &gates[2 * hd..3 * hd],
                        &gates[3 * hd..],
                    );
                    let c_new: Vec<f64> = (0..hd).map(|k| f[k] * c[k] + i[k] * g[k]).collect();
                    let tanh_c: Vec<f64> = c_new.iter().map(|v| v.tanh()).collect();
                    let h_new: Vec<f64> = (0..hd).map(|k| o[k] * tanh_c[k]).collect();
                    steps.push(LstmStep {
                        id,
                        gates,
                        c_prev: std::mem::replace(&mut c, c_new),
                        h_prev: std::mem::replace(&mut h, h_new),
                        tanh_c,
                    });
                }
                h
            }
        };
        let acts = self.dense(&self.layout.representation, encoded, false);
        QuestionTrace { ids, steps, acts }
    }

    /// Backward through one question; embedding rows go to `rows`.
    fn encode_back(
        &self,
        trace: &QuestionTrace,
        delta: Vec<f64>,
        grads: &mut [Vec<f64>],
        rows: &mut Vec<(usize, Vec<f64>)>,
    ) {
        let delta = self.dense_back(
            &self.layout.representation,
            &trace.acts,
            delta,
            false,
            grads,
        );
        match self.layout.lstm {
            None => {
                if trace.ids.is_empty() {
                    return;
                }
                let n = trace.ids.len() as f64;
                let share: Vec<f64> = delta.iter().map(|d| d / n).collect();
                for &id in &trace.ids {
                    rows.push((id, share.clone()));
                }
            }
            Some([wi, ui, bi]) => {
                let hd = self.spec.hidden_dim;
                let (w, u) = (self.data(wi), self.data(ui));
                let mut dh = delta;
                let mut dc = vec![0.0; hd];
                for step in trace.steps.iter().rev() {
                    let g = &step.gates;
                    let mut dz = vec![0.0; 4 * hd];
                    for k in 0..hd {
                        let (i, f, gg, o) = (g[k], g[hd + k], g[2 * hd + k], g[3 * hd + k]);
                        let t = step.tanh_c[k];
                        let dck = dc[k] + dh[k] * o * (1.0 - t * t);
                        dz[k] = dck * gg * i * (1.0 - i);
                        dz[hd + k] = dck * step.c_prev[k] * f * (1.0 - f);
                        dz[2 * hd + k] = dck * i * (1.0 - gg * gg);
                        dz[3 * hd + k] = dh[k] * t * o * (1.0 - o);
                        dc[k] = dck * f;
                    }
                    add_outer(&mut grads[wi], &dz, self.embedding_row(step.id));
                    add_outer(&mut grads[ui], &dz, &step.h_prev);
                    add_into(&mut grads[bi], &dz);
                    let mut dx = vec![0.0; self.spec.embed_dim];
                    add_transposed(w, &dz, &mut dx);
                    rows.push((step.id, dx));
                    let mut dh_prev = vec![0.0; hd];
                    add_transposed(u, &dz, &mut dh_prev);
                    dh = dh_prev;
                }
            }
        }
    }

    fn aggregate(&self, r1: &[f64], r2: &[f64]) -> Vec<f64> {
        match self.spec.aggregation {
            Aggregation::ExpAbsDiff => aggregate_exp_abs(r1, r2).expect("shared encoder widths"),
            Aggregation::Concat => aggregate_concat(r1, r2),
        }
    }

    /// Logit and the traces needed to differentiate it.
    fn logit(&self, pair: &EncodedPair) -> (f64, [QuestionTrace; 2], Vec<Vec<f64>>) {
        let t1 = self.encode(&pair.q1_ids);
        let t2 = self.encode(&pair.q2_ids);
        let agg = self.aggregate(t1.output(), t2.output());
        let dec = self.dense(&self.layout.decision, agg, true);
        let z = dec.last().expect("decision output")[0];
        (z, [t1, t2], dec)
    }

    /// Loss of one pair and its gradient: dense arrays plus embedding rows.
    fn pair_gradient(&self, pair: &EncodedPair) -> (f64, Vec<Vec<f64>>, RowGrads) {
        let (z, [t1, t2], dec) = self.logit(pair);
        let p = sigmoid(z);
        let loss = bce_loss(p, pair.label);
        let mut grads: Vec<Vec<f64>> = self
            .store
            .arrays
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if i == self.layout.embedding {
                    Vec::new()
                } else {
                    vec![0.0; a.data.len()]
                }
            })
            .collect();
        let mut rows = Vec::new();
        let dz = if (BCE_CLAMP..=1.0 - BCE_CLAMP).contains(&p) {
            p - f64::from(pair.label)
        } else {
            0.0
        };
        if dz == 0.0 {
            return (loss, grads, rows);
        }
        let d_agg = self.dense_back(&self.layout.decision, &dec, vec![dz], true, &mut grads);
        let (r1, r2) = (t1.output(), t2.output());
        let (d1, d2): (Vec<f64>, Vec<f64>) = match self.spec.aggregation {
            Aggregation::ExpAbsDiff => (0..r1.len())
                .map(|k| {
                    let diff = r1[k] - r2[k];
                    let a = dec[0][k];
                    let sign = if diff > 0.0 {
                        1.0
                    } else if diff < 0.0 {
                        -1.0
                    } else {
                        0.0
                    };
                    let d = -d_agg[k] * a * sign;
                    (d, -d)
                })
                .unzip(),
            Aggregation::Concat => (d_agg[..r1.len()].to_vec(), d_agg[r1.len()..].to_vec()),
        };
        self.encode_back(&t1, d1, &mut grads, &mut rows);
        self.encode_back(&t2, d2, &mut grads, &mut rows);
        (loss, grads, rows)
    }
}

/// `out += U h`.
fn add_matvec(u: &[f64], h: &[f64], out: &mut [f64]) {
    let n = h.len();
    if n == 0 {
        return;
    }
    for (o, acc) in out.iter_mut().enumerate() {
        *acc += dot(&u[o * n..(o + 1) * n], h);
    }
}

/// Representation of one id sequence; padding ids are skipped.
pub fn encoder_forward(spec: &SnnSpec, store: &ParameterStore, ids: &[usize]) -> Vec<f64> {
    Net::new(spec, store).encode(ids).output().to_vec()
}

/// Pre-sigmoid output for a pair.
pub fn forward_logit(model: &Snn, pair: &EncodedPair) -> f64 {
    Net::new(&model.spec, &model.params).logit(pair).0
}

/// Duplicate probability for a pair, kept inside `(0, 1)`.
pub fn forward(model: &Snn, pair: &EncodedPair) -> f64 {
    sigmoid(forward_logit(model, pair)).clamp(f64::EPSILON, 1.0 - f64::EPSILON)
}

/// Mean loss over `batch` and its gradient with respect to every array.
///
/// Pairs are differentiated in parallel and their contributions summed in
/// batch order, so the result does not depend on scheduling. Arrays of
/// frozen groups get exactly zero gradient.
pub fn backward(model: &Snn, batch: &[EncodedPair]) -> Gradients {
    let net = Net::new(&model.spec, &model.params);
    let parts: Vec<_> = batch.par_iter().map(|p| net.pair_gradient(p)).collect();
    let mut out = Gradients::zeros(&model.params);
    if batch.is_empty() {
        return out;
    }
    let scale = 1.0 / batch.len() as f64;
    let d = model.spec.embed_dim;
    for (loss, grads, rows) in parts {
        out.loss += loss;
        for (i, g) in grads.iter().enumerate() {
            if i != net.layout.embedding {
                add_into(&mut out.arrays[i], g);
            }
        }
        let e = &mut out.arrays[net.layout.embedding];
        for (id, row) in rows {
            add_into(&mut e[id * d..(id + 1) * d], &row);
        }
    }
    out.loss *= scale;
    for (g, a) in out.arrays.iter_mut().zip(&model.params.arrays) {
        if model.params.is_frozen(a.group) {
            g.fill(0.0);
        } else {
            g.iter_mut().for_each(|x| *x *= scale);
        }
    }
    out
}

/// Mean loss over `batch` without gradients.
pub(crate) fn batch_loss(model: &Snn, batch: &[EncodedPair]) -> f64 {
    let net = Net::new(&model.spec, &model.params);
    let losses: Vec<f64> = batch
        .par_iter()
        .map(|p| bce_loss(sigmoid(net.logit(p).0), p.label))
        .collect();
    losses.iter().sum::<f64>() / batch.len().max(1) as f64
}
