//! Nadam.

use super::model::Gradients;
use super::params::{Group, ParameterStore};
use super::TrainConfig;
use crate::{Error, Result};

/// First and second moment estimates, shaped like the store.
#[derive(Debug, Clone, PartialEq)]
pub struct NadamState {
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

impl NadamState {
    pub fn new(store: &ParameterStore) -> NadamState {
        let zeros: Vec<Vec<f64>> = store
            .arrays
            .iter()
            .map(|a| vec![0.0; a.data.len()])
            .collect();
        NadamState {
            m: zeros.clone(),
            v: zeros,
        }
    }
}

/// One Nadam update at step `t >= 1`:
///
/// ```text
/// m <- b1 m + (1 - b1) g
/// v <- b2 v + (1 - b2) g^2
/// m_hat = b1 m / (1 - b1^(t+1)) + (1 - b1) g / (1 - b1^t)
/// v_hat = v / (1 - b2^t)
/// theta <- theta - lr m_hat / (sqrt(v_hat) + eps)
/// ```
///
/// Moments are updated for every array; parameters of frozen groups are
/// left untouched.
pub fn nadam_step(
    store: &mut ParameterStore,
    grads: &Gradients,
    state: &mut NadamState,
    config: &TrainConfig,
    t: u64,
) -> Result<()> {
    if t == 0 {
        return Err(Error::InvalidArgument(
            "nadam step counter starts at 1".into(),
        ));
    }
    let n_arrays = store.arrays.len();
    for (what, len) in [
        ("gradient", grads.arrays.len()),
        ("nadam state", state.m.len().min(state.v.len())),
    ] {
        if len != n_arrays {
            return Err(Error::ShapeMismatch {
                name: what.into(),
                expected: vec![n_arrays],
                found: vec![len],
            });
        }
    }
    for (i, a) in store.arrays.iter().enumerate() {
        for len in [grads.arrays[i].len(), state.m[i].len(), state.v[i].len()] {
            if len != a.data.len() {
                return Err(Error::ShapeMismatch {
                    name: a.name.clone(),
                    expected: a.shape.clone(),
                    found: vec![len],
                });
            }
        }
    }
    let (b1, b2, lr, eps) = (
        config.beta1,
        config.beta2,
        config.learning_rate,
        config.epsilon,
    );
    let tt = i32::try_from(t).unwrap_or(i32::MAX - 1);
    let next = 1.0 - b1.powi(tt + 1);
    let now = 1.0 - b1.powi(tt);
    let second = 1.0 - b2.powi(tt);
    let frozen: Vec<bool> = Group::ALL.iter().map(|&g| store.is_frozen(g)).collect();
    for (i, array) in store.arrays.iter_mut().enumerate() {
        let (m, v, g) = (&mut state.m[i], &mut state.v[i], &grads.arrays[i]);
        let update = !frozen[array.group as usize];
        for k in 0..g.len() {
            m[k] = b1 * m[k] + (1.0 - b1) * g[k];
            v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
            if update {
                let m_hat = b1 * m[k] / next + (1.0 - b1) * g[k] / now;
                let v_hat = v[k] / second;
                array.data[k] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{Aggregation, Encoder, SnnSpec};

    fn scalar_store() -> (SnnSpec, ParameterStore) {
        let spec = SnnSpec {
            embed_dim: 1,
            representation: vec![],
            decision: vec![1],
            ..SnnSpec::new(2, Encoder::MeanPool, Aggregation::ExpAbsDiff, 0)
        };
        let store = ParameterStore::zeros(&spec);
        (spec, store)
    }

    /// One step from w = 0 with g = 1:
    ///   m = 0.1, v = 0.001
    ///   m_hat = 0.9 * 0.1 / (1 - 0.81) + 0.1 / 0.1 = 0.09 / 0.19 + 1
    ///   v_hat = 0.001 / 0.001 = 1
    ///   w1 = -0.002 * m_hat / (1 + 1e-8)
    #[test]
    fn one_step_by_hand() {
        let (_, mut store) = scalar_store();
        let i = store
            .arrays
            .iter()
            .position(|a| a.name == "dec.0.b")
            .unwrap();
        let mut grads = Gradients::zeros(&store);
        grads.arrays[i][0] = 1.0;
        let mut state = NadamState::new(&store);
        nadam_step(&mut store, &grads, &mut state, &TrainConfig::default(), 1).unwrap();
        // -0.002 * (0.09 / 0.19 + 1) / (1 + 1e-8), evaluated with mpmath (tests/data/nadam_quadratic.py).
        let want = -0.002_947_368_391_578_947_7;
        assert!(
            (store.arrays[i].data[0] - want).abs() < 1e-17,
            "{}",
            store.arrays[i].data[0]
        );
        assert!((state.m[i][0] - 0.1).abs() < 1e-15);
        assert!((state.v[i][0] - 0.001).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let (_, mut store) = scalar_store();
        store.arrays[0].data = vec![0.3, -0.7];
        let before = store.clone();
        let grads = Gradients::zeros(&store);
        let mut state = NadamState::new(&store);
        nadam_step(&mut store, &grads, &mut state, &TrainConfig::default(), 1).unwrap();
        assert_eq!(store, before);
    }

    #[test]
    fn frozen_groups_keep_parameters_but_update_moments() {
        let (_, mut store) = scalar_store();
        store.set_frozen(Group::D, true);
        let before = store.clone();
        let mut grads = Gradients::zeros(&store);
        grads.arrays.iter_mut().for_each(|g| g.fill(0.5));
        let mut state = NadamState::new(&store);
        nadam_step(&mut store, &grads, &mut state, &TrainConfig::default(), 1).unwrap();
        for (a, b) in store.arrays.iter().zip(&before.arrays) {
            assert_eq!(a.data == b.data, a.group == Group::D, "{}", a.name);
        }
        assert!(state.m.iter().flatten().all(|&m| (m - 0.05).abs() < 1e-15));
        assert!(nadam_step(&mut store, &grads, &mut state, &TrainConfig::default(), 0).is_err());
        grads.arrays[1].pop();
        assert!(matches!(
            nadam_step(&mut store, &grads, &mut state, &TrainConfig::default(), 2),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    /// f(w) = w^2 from w = 1 with the default settings, against the same
    /// recurrence evaluated in Python (tests/data/nadam_quadratic.py).
    #[test]
    fn quadratic_descends_monotonically() {
        let (_, mut store) = scalar_store();
        let i = store
            .arrays
            .iter()
            .position(|a| a.name == "dec.0.b")
            .unwrap();
        store.arrays[i].data[0] = 1.0;
        let mut state = NadamState::new(&store);
        let config = TrainConfig::default();
        let mut prev = 1.0;
        for t in 1..=200 {
            let mut grads = Gradients::zeros(&store);
            grads.arrays[i][0] = 2.0 * store.arrays[i].data[0];
            nadam_step(&mut store, &grads, &mut state, &config, t).unwrap();
            let w = store.arrays[i].data[0];
            assert!(w < prev && w > 0.0, "step {t}: {w}");
            prev = w;
        }
        let want = 0.634_475_548_162_271_3;
        assert!((prev - want).abs() < 1e-12, "{prev}");
    }
}
