//! Named parameter arrays, their initialisation and their file format.

use std::fmt;
use std::fs;
use std::path::Path;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{Encoder, SnnSpec};
use crate::embeddings::{EmbeddingTable, Vocab, PAD};
use crate::{fmt_real, rng, Error, Result};

pub const PARAMS_FORMAT: &str = "dupq-snn-params/1";

/// Half-width of the uniform draw for embedding rows without a pre-trained
/// vector.
const EMBED_INIT: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Group {
    E,
    R,
    A,
    D,
}

impl Group {
    pub const ALL: [Group; 4] = [Group::E, Group::R, Group::A, Group::D];

    fn index(self) -> usize {
        self as usize
    }

    pub fn parse(s: &str) -> Option<Group> {
        Group::ALL.into_iter().find(|g| g.to_string() == s)
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Group::E => "E",
            Group::R => "R",
            Group::A => "A",
            Group::D => "D",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamArray {
    pub name: String,
    pub group: Group,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl ParamArray {
    fn zeros(name: &str, group: Group, shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        ParamArray {
            name: name.to_string(),
            group,
            shape,
            data: vec![0.0; len],
        }
    }
}

/// Every array of a network, in a fixed order determined by its
/// [`SnnSpec`]: the embedding, then the encoder, then the representation
/// layers, then the decision layers. Group `A` holds no arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterStore {
    pub arrays: Vec<ParamArray>,
    frozen: [bool; 4],
}

/// Positions of the arrays of a spec inside its store.
#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub embedding: usize,
    /// Input weights `[4H, D]`, recurrent weights `[4H, H]`, bias `[4H]`.
    pub lstm: Option<[usize; 3]>,
    /// Weight `[out, in]` and bias `[out]` per layer.
    pub representation: Vec<(usize, usize)>,
    pub decision: Vec<(usize, usize)>,
}

impl Layout {
    pub fn of(spec: &SnnSpec) -> Layout {
        let mut next = 1;
        let mut take = |n: usize| {
            let start = next;
            next += n;
            start
        };
        let lstm = (spec.encoder == Encoder::Lstm).then(|| {
            let s = take(3);
            [s, s + 1, s + 2]
        });
        let representation = spec
            .representation
            .iter()
            .map(|_| {
                let s = take(2);
                (s, s + 1)
            })
            .collect();
        let decision = spec
            .decision
            .iter()
            .map(|_| {
                let s = take(2);
                (s, s + 1)
            })
            .collect();
        Layout {
            embedding: 0,
            lstm,
            representation,
            decision,
        }
    }
}

/// Names, groups and shapes of every array of a spec, in store order.
fn array_shapes(spec: &SnnSpec) -> Vec<(String, Group, Vec<usize>)> {
    let mut out = vec![(
        "embedding".to_string(),
        Group::E,
        vec![spec.vocab_size, spec.embed_dim],
    )];
    if spec.encoder == Encoder::Lstm {
        let (h, d) = (spec.hidden_dim, spec.embed_dim);
        out.push(("lstm.w".into(), Group::R, vec![4 * h, d]));
        out.push(("lstm.u".into(), Group::R, vec![4 * h, h]));
        out.push(("lstm.b".into(), Group::R, vec![4 * h]));
    }
    let mut width = spec.encoder_dim();
    for (i, &n) in spec.representation.iter().enumerate() {
        out.push((format!("rep.{i}.w"), Group::R, vec![n, width]));
        out.push((format!("rep.{i}.b"), Group::R, vec![n]));
        width = n;
    }
    width = spec.aggregate_dim();
    for (i, &n) in spec.decision.iter().enumerate() {
        out.push((format!("dec.{i}.w"), Group::D, vec![n, width]));
        out.push((format!("dec.{i}.b"), Group::D, vec![n]));
        width = n;
    }
    out
}

impl ParameterStore {
    /// All-zero arrays shaped for `spec`.
    pub fn zeros(spec: &SnnSpec) -> ParameterStore {
        ParameterStore {
            arrays: array_shapes(spec)
                .into_iter()
                .map(|(name, group, shape)| ParamArray::zeros(&name, group, shape))
                .collect(),
            frozen: [false; 4],
        }
    }

    pub fn get(&self, name: &str) -> Option<&ParamArray> {
        self.arrays.iter().find(|a| a.name == name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut ParamArray> {
        self.arrays.iter_mut().find(|a| a.name == name)
    }

    pub fn is_frozen(&self, group: Group) -> bool {
        self.frozen[group.index()]
    }

    pub fn set_frozen(&mut self, group: Group, frozen: bool) {
        self.frozen[group.index()] = frozen;
    }

    pub fn group_arrays(&self, group: Group) -> impl Iterator<Item = &ParamArray> {
        self.arrays.iter().filter(move |a| a.group == group)
    }

    pub fn n_values(&self) -> usize {
        self.arrays.iter().map(|a| a.data.len()).sum()
    }

    /// Checks that the arrays are exactly those `spec` calls for.
    pub fn check_shapes(&self, spec: &SnnSpec) -> Result<()> {
        let want = array_shapes(spec);
        if want.len() != self.arrays.len() {
            return Err(Error::InvalidArgument(format!(
                "parameter store has {} arrays, spec needs {}",
                self.arrays.len(),
                want.len()
            )));
        }
        for ((name, group, shape), have) in want.into_iter().zip(&self.arrays) {
            if have.name != name || have.group != group {
                return Err(Error::InvalidArgument(format!(
                    "expected array {name} in group {group}, found {} in group {}",
                    have.name, have.group
                )));
            }
            if have.shape != shape || have.data.len() != shape.iter().product::<usize>() {
                return Err(Error::ShapeMismatch {
                    name,
                    expected: shape,
                    found: have.shape.clone(),
                });
            }
        }
        Ok(())
    }
}

/// Seeded initial parameters.
///
/// Embedding rows start as `U(-0.05, 0.05)` draws; rows whose token has a
/// pre-trained vector then take that vector, and the padding row is zero.
/// Weights are Glorot-uniform, `U(-a, a)` with `a = sqrt(6 / (fan_in +
/// fan_out))`, and biases are zero. Each array draws from its own stream,
/// so its values depend only on the seed, its name and its shape.
pub fn init_parameters(
    spec: &SnnSpec,
    vocab: &Vocab,
    table: Option<&EmbeddingTable>,
) -> Result<ParameterStore> {
    spec.validate()?;
    if vocab.len() != spec.vocab_size {
        return Err(Error::InvalidArgument(format!(
            "vocabulary has {} entries, spec expects {}",
            vocab.len(),
            spec.vocab_size
        )));
    }
    if let Some(t) = table {
        if t.dim() != spec.embed_dim {
            return Err(Error::InvalidArgument(format!(
                "embedding table has dimension {}, spec expects {}",
                t.dim(),
                spec.embed_dim
            )));
        }
    }
    let mut store = ParameterStore::zeros(spec);
    for array in &mut store.arrays {
        let mut rng = rng::stream(spec.seed, &format!("init/{}", array.name));
        if array.name == "embedding" {
            let d = spec.embed_dim;
            for (id, row) in array.data.chunks_mut(d).enumerate() {
                for x in row.iter_mut() {
                    *x = rng.gen_range(-EMBED_INIT..EMBED_INIT);
                }
                if id == PAD {
                    row.fill(0.0);
                } else if let Some(v) = vocab
                    .token(id)
                    .and_then(|tok| table.and_then(|t| t.get(tok)))
                {
                    row.copy_from_slice(v);
                }
            }
        } else if array.shape.len() == 2 {
            let (fan_out, fan_in) = (array.shape[0], array.shape[1]);
            let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for x in &mut array.data {
                *x = rng.gen_range(-a..a);
            }
        }
    }
    Ok(store)
}

/// Writes a parameter file.
///
/// ```text
/// dupq-snn-params/1
/// spec {"max_len":30,...}
/// seed 7
/// frozen E 0
/// frozen R 0
/// frozen A 0
/// frozen D 0
/// arrays 5
/// array embedding E 4,2
/// <one line per row of the last axis>
/// ```
pub fn write_parameters(path: &Path, spec: &SnnSpec, store: &ParameterStore) -> Result<()> {
    let mut out = String::new();
    out.push_str(PARAMS_FORMAT);
    out.push('\n');
    let spec_json =
        serde_json::to_string(spec).map_err(|e| Error::format("snn spec", e.to_string()))?;
    out.push_str(&format!("spec {spec_json}\nseed {}\n", spec.seed));
    for g in Group::ALL {
        out.push_str(&format!("frozen {g} {}\n", u8::from(store.is_frozen(g))));
    }
    out.push_str(&format!("arrays {}\n", store.arrays.len()));
    for a in &store.arrays {
        let shape: Vec<String> = a.shape.iter().map(usize::to_string).collect();
        out.push_str(&format!(
            "array {} {} {}\n",
            a.name,
            a.group,
            shape.join(",")
        ));
        let width = a.shape.last().copied().unwrap_or(1).max(1);
        for row in a.data.chunks(width) {
            let cells: Vec<String> = row.iter().map(|&x| fmt_real(x)).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a parameter file, returning the echoed spec and the store.
pub fn read_parameters(path: &Path) -> Result<(SnnSpec, ParameterStore)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let fail = |at: usize, m: String| Error::Parse {
        path: path.to_path_buf(),
        line: at,
        message: m,
    };
    let mut next = |what: &str| -> Result<(usize, &str)> {
        lines
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or_else(|| fail(0, format!("unexpected end of file, expected {what}")))
    };

    let (_, header) = next("header")?;
    if header != PARAMS_FORMAT {
        return Err(Error::VersionMismatch {
            what: "snn parameter format",
            expected: PARAMS_FORMAT.into(),
            found: header.into(),
        });
    }
    let (i, line) = next("spec")?;
    let spec: SnnSpec = line
        .strip_prefix("spec ")
        .ok_or_else(|| fail(i, "expected spec".into()))
        .and_then(|j| serde_json::from_str(j).map_err(|e| fail(i, e.to_string())))?;
    let (i, line) = next("seed")?;
    let seed: u64 = line
        .strip_prefix("seed ")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| fail(i, "expected seed".into()))?;
    if seed != spec.seed {
        return Err(fail(
            i,
            format!("seed {seed} disagrees with spec seed {}", spec.seed),
        ));
    }
    let mut store = ParameterStore::zeros(&spec);
    for g in Group::ALL {
        let (i, line) = next("frozen flag")?;
        match line.strip_prefix(&format!("frozen {g} ")) {
            Some("0") => store.set_frozen(g, false),
            Some("1") => store.set_frozen(g, true),
            _ => return Err(fail(i, format!("expected 'frozen {g} 0|1'"))),
        }
    }
    let (i, line) = next("array count")?;
    let count: usize = line
        .strip_prefix("arrays ")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| fail(i, "expected array count".into()))?;
    if count != store.arrays.len() {
        return Err(fail(
            i,
            format!("spec needs {} arrays, file has {count}", store.arrays.len()),
        ));
    }
    for a in &mut store.arrays {
        let (i, line) = next("array header")?;
        let fields: Vec<&str> = line.split(' ').collect();
        let shape: Option<Vec<usize>> = fields
            .get(3)
            .and_then(|s| s.split(',').map(|d| d.parse().ok()).collect());
        match (fields.as_slice(), shape) {
            (["array", name, group, _], Some(shape))
                if *name == a.name && Group::parse(group) == Some(a.group) =>
            {
                if shape != a.shape {
                    return Err(Error::ShapeMismatch {
                        name: a.name.clone(),
                        expected: a.shape.clone(),
                        found: shape,
                    });
                }
            }
            _ => {
                return Err(fail(
                    i,
                    format!("expected header of array {} ({})", a.name, a.group),
                ))
            }
        }
        let width = a.shape.last().copied().unwrap_or(1).max(1);
        for row in a.data.chunks_mut(width) {
            let (i, line) = next("array values")?;
            let values: Vec<&str> = line.split(' ').collect();
            if values.len() != row.len() {
                return Err(fail(
                    i,
                    format!("expected {} values, found {}", row.len(), values.len()),
                ));
            }
            for (x, v) in row.iter_mut().zip(values) {
                *x = v
                    .parse()
                    .map_err(|_| fail(i, format!("bad number '{v}'")))?;
            }
        }
    }
    if let Some((i, extra)) = lines.next() {
        return Err(fail(i + 1, format!("trailing content '{extra}'")));
    }
    Ok((spec, store))
}
