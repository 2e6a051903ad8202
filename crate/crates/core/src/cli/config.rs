//! `key = value` experiment configuration files.
//!
//! ```text
//! # children's songs, main protocol
//! corpus = songs.mel
//! variants = original, random_song, fake_melodies
//! context_sizes = 1, 2, 3, 4
//! embedding_dims = 2
//! encoders = multi_hot
//! n_runs = 100
//! seed = 42
//! output = songs.csv
//! ```
//!
//! Relative paths are resolved against the directory holding the file.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::analysis::{ExperimentPlan, Variant};
use crate::encode::EncoderKind;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value for {key}: {message}")]
    BadValue { line: usize, key: String, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub corpus_path: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub plan: ExperimentPlan,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            corpus_path: None,
            output: None,
            plan: ExperimentPlan::default(),
        }
    }
}

fn parse_list<T: FromStr>(value: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| format!("{s:?}: {e}")))
        .collect()
}

fn parse_one<T: FromStr>(value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse::<T>().map_err(|e| format!("{value:?}: {e}"))
}

impl ExperimentConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let plan = &mut self.plan;
        match key {
            "corpus" | "corpus_path" => self.corpus_path = Some(PathBuf::from(value.trim())),
            "output" | "out" => self.output = Some(PathBuf::from(value.trim())),
            "variants" => plan.variants = parse_list::<Variant>(value)?,
            "context_sizes" | "contexts" => plan.context_sizes = parse_list(value)?,
            "embedding_dims" | "dims" => plan.embedding_dims = parse_list(value)?,
            "encoders" => plan.encoders = parse_list::<EncoderKind>(value)?,
            "n_runs" | "runs" => plan.n_runs = parse_one(value)?,
            "seed" | "base_seed" => plan.base_seed = parse_one(value)?,
            "learning_rate" => plan.learning_rate = parse_one(value)?,
            "epochs" => plan.epochs = parse_one(value)?,
            "train_fraction" => plan.train_fraction = parse_one(value)?,
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut config = ExperimentConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { line: line_no })?;
            let key = key.trim().to_ascii_lowercase();
            config.set(&key, value).map_err(|message| {
                if message.starts_with("unknown key") {
                    ConfigError::UnknownKey { line: line_no, key: key.clone() }
                } else {
                    ConfigError::BadValue { line: line_no, key: key.clone(), message }
                }
            })?;
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut config.corpus_path, &mut config.output].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }
}
