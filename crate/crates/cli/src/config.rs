//! `key = value` configuration with flag overrides.
//!
//! Resource paths default to fixed locations under the resource root, which
//! is `$HUMORKIT_RESOURCES` or `./resources`.

use std::path::{Path, PathBuf};

use humorkit::corpus::CsvSchema;
use humorkit::distsem::EmbeddingFormat;
use humorkit::models::{BoostParams, MlpConfig, TreeParams};
use humorkit::wordnet::DEFAULT_SENSE_CAP;

use crate::error::CliError;

pub const RESOURCE_ENV: &str = "HUMORKIT_RESOURCES";

#[derive(Debug, Clone)]
pub struct Config {
    pub resource_root: PathBuf,
    pub emolex: Option<PathBuf>,
    pub wordnet: Option<PathBuf>,
    pub cmudict: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub embeddings_format: Option<EmbeddingFormat>,
    pub tagger: Option<PathBuf>,
    pub subordinators: Option<PathBuf>,
    pub sense_cap: usize,
    pub seed: u64,
    pub val_fraction: f64,
    pub jobs: usize,
    pub schema: CsvSchema,
    pub tree: TreeParams,
    pub boost: BoostParams,
    pub mlp: MlpConfig,
}

impl Config {
    pub fn new(resource_root: PathBuf) -> Self {
        Config {
            resource_root,
            emolex: None,
            wordnet: None,
            cmudict: None,
            embeddings: None,
            embeddings_format: None,
            tagger: None,
            subordinators: None,
            sense_cap: DEFAULT_SENSE_CAP,
            seed: 42,
            val_fraction: 0.2,
            jobs: 1,
            schema: CsvSchema::default(),
            tree: TreeParams::default(),
            boost: BoostParams::default(),
            mlp: MlpConfig::default(),
        }
    }

    /// Root from the environment, then the optional file, then overrides.
    pub fn load(file: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let root = std::env::var_os(RESOURCE_ENV).map_or_else(|| PathBuf::from("resources"), PathBuf::from);
        let mut cfg = Config::new(root);
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
            cfg.apply_text(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        }
        for kv in overrides {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("override {kv:?} is not key=value")))?;
            cfg.set(k.trim(), v.trim()).map_err(CliError::Config)?;
        }
        Ok(cfg)
    }

    /// Lines of `key = value`; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), String> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split_once('#').map_or(raw, |(l, _)| l).trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", i + 1))?;
            self.set(k.trim(), v.trim())
                .map_err(|e| format!("line {}: {e}", i + 1))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
            v.parse().map_err(|_| format!("{key}: invalid value {v:?}"))
        }
        let path = || Some(PathBuf::from(value));
        match key {
            "resource_root" => self.resource_root = PathBuf::from(value),
            "emolex" => self.emolex = path(),
            "wordnet" => self.wordnet = path(),
            "cmudict" => self.cmudict = path(),
            "embeddings" => self.embeddings = path(),
            "embeddings_format" => {
                self.embeddings_format = Some(value.parse().map_err(|e: humorkit::Error| e.to_string())?)
            }
            "tagger" => self.tagger = path(),
            "subordinators" => self.subordinators = path(),
            "sense_cap" => self.sense_cap = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "val_fraction" => self.val_fraction = num(key, value)?,
            "jobs" => self.jobs = num(key, value)?,
            "text_column" => self.schema.text_column = value.to_string(),
            "label_column" => self.schema.label_column = value.to_string(),
            "tree.max_depth" => self.tree.max_depth = num(key, value)?,
            "tree.min_samples_leaf" => self.tree.min_samples_leaf = num(key, value)?,
            "boost.n_rounds" => self.boost.n_rounds = num(key, value)?,
            "boost.learning_rate" => self.boost.learning_rate = num(key, value)?,
            "boost.max_depth" => self.boost.max_depth = num(key, value)?,
            "boost.min_samples_leaf" => self.boost.min_samples_leaf = num(key, value)?,
            "mlp.epochs" => self.mlp.epochs = num(key, value)?,
            "mlp.batch_size" => self.mlp.batch_size = num(key, value)?,
            "mlp.learning_rate" => self.mlp.learning_rate = num(key, value)?,
            "mlp.beta1" => self.mlp.beta1 = num(key, value)?,
            "mlp.beta2" => self.mlp.beta2 = num(key, value)?,
            "mlp.epsilon" => self.mlp.epsilon = num(key, value)?,
            "mlp.hand_hidden" => self.mlp.hand_hidden = num(key, value)?,
            "mlp.hand_out" => self.mlp.hand_out = num(key, value)?,
            "mlp.emb_hidden" => self.mlp.emb_hidden = num(key, value)?,
            "mlp.emb_out" => self.mlp.emb_out = num(key, value)?,
            "mlp.head_hidden" => self.mlp.head_hidden = num(key, value)?,
            "mlp.normalize" | "normalize" => self.mlp.normalize = num(key, value)?,
            other => return Err(format!("unknown config key {other:?}")),
        }
        Ok(())
    }

    pub fn emolex_path(&self) -> PathBuf {
        self.emolex.clone().unwrap_or_else(|| {
            self.resource_root
                .join("emolex/NRC-Emotion-Lexicon-Wordlevel-v0.92.txt")
        })
    }

    pub fn wordnet_path(&self) -> PathBuf {
        self.wordnet
            .clone()
            .unwrap_or_else(|| self.resource_root.join("wordnet"))
    }

    pub fn cmudict_path(&self) -> PathBuf {
        self.cmudict
            .clone()
            .unwrap_or_else(|| self.resource_root.join("cmudict/cmudict.dict"))
    }

    pub fn embeddings_path(&self) -> PathBuf {
        self.embeddings
            .clone()
            .unwrap_or_else(|| self.resource_root.join("embeddings/glove100.bin"))
    }

    /// Seeds of every trainer follow the global seed.
    pub fn seeded(&self) -> (TreeParams, BoostParams, MlpConfig) {
        let mut t = self.tree;
        let mut b = self.boost;
        let mut m = self.mlp;
        t.seed = self.seed;
        b.seed = self.seed;
        m.seed = self.seed;
        (t, b, m)
    }
}
