//! Declarative run description: a TOML or JSON file, overridden flag by flag.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dupq::corpus::PREPROCESS_VERSION;
use dupq::eval::PipelineConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const DATA_DIR_ENV: &str = "DUPQ_DATA_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Cache paths, or names resolved as `<data_dir>/<name>.corpus.jsonl`.
    pub datasets: Vec<String>,
    pub data_dir: Option<PathBuf>,
    pub preprocess: String,
    pub embeddings: Option<PathBuf>,
    pub embedding_dim: usize,
    pub out: PathBuf,
    pub pipeline: PipelineConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            datasets: Vec::new(),
            data_dir: None,
            preprocess: PREPROCESS_VERSION.to_string(),
            embeddings: None,
            embedding_dim: 50,
            out: PathBuf::from("runs"),
            pipeline: PipelineConfig::default(),
        }
    }
}

impl RunConfig {
    /// TOML, or JSON when the extension is `.json`. TOML has no null, so
    /// options that are off (no early stopping) need the JSON form.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let parsed = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(anyhow::Error::from)
        } else {
            toml::from_str(&text).map_err(anyhow::Error::from)
        };
        parsed.with_context(|| format!("parsing config {}", path.display()))
    }

    /// Every seed of the run set to one value.
    pub fn set_seed(&mut self, seed: u64) {
        let p = &mut self.pipeline;
        p.split_seed = seed;
        p.gbt.seed = seed;
        p.snn.seed = seed;
        p.train.seed = seed;
    }

    pub fn set_dim(&mut self, dim: usize) {
        self.embedding_dim = dim;
        self.pipeline.snn.embed_dim = dim;
    }

    pub fn data_dir(&self) -> PathBuf {
        self.data_dir
            .clone()
            .or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn dataset_path(&self, dataset: &str) -> PathBuf {
        let direct = Path::new(dataset);
        if direct.extension().is_some() || direct.components().count() > 1 {
            direct.to_path_buf()
        } else {
            self.data_dir().join(format!("{dataset}.corpus.jsonl"))
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run config serializes") + "\n"
    }

    /// Short digest of everything that affects results; the output and data
    /// directories are excluded.
    pub fn hash(&self) -> String {
        let canonical = RunConfig {
            out: PathBuf::new(),
            data_dir: None,
            ..self.clone()
        };
        digest(&serde_json::to_string(&canonical).expect("run config serializes"))
    }

    pub fn validate(&self) -> Result<()> {
        if self.preprocess != PREPROCESS_VERSION {
            bail!(dupq::Error::VersionMismatch {
                what: "preprocessing",
                expected: PREPROCESS_VERSION.into(),
                found: self.preprocess.clone(),
            });
        }
        if self.embedding_dim == 0 {
            bail!(dupq::Error::InvalidArgument(
                "embedding dimension must be positive".into()
            ));
        }
        self.pipeline.gbt.validate()?;
        self.pipeline.train.validate()?;
        Ok(())
    }
}

/// First twelve hex digits of SHA-256.
pub fn digest(text: &str) -> String {
    let bytes = Sha256::digest(text.as_bytes());
    bytes.iter().take(6).fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}
