//! TOML configuration shared by the CLI and the server.
//!
//! ```toml
//! delta = 0.5
//! tau = 0.35
//! stopwords_path = "stopwords.txt"
//! wordnet_dir = "/usr/share/wordnet"
//! data_dir = "data"
//! ```
//!
//! Relative paths are resolved against the directory holding the file.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::similarity::{parse_stopwords, ConfigError, SimilarityConfig, DEFAULT_DELTA, DEFAULT_TAU};
use crate::wordnet::{LexiconError, WordNetLexicon};

/// Overrides the configured data directory.
pub const DATA_DIR_ENV: &str = "CONCEPT_QA_DATA_DIR";
pub const DEFAULT_DATA_DIR: &str = "concept-qa-data";

#[derive(Debug, Error)]
pub enum ConfigFileError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Invalid(#[from] ConfigError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppConfig {
    pub delta: Option<f64>,
    pub tau: Option<f64>,
    pub stopwords_path: Option<PathBuf>,
    pub wordnet_dir: Option<PathBuf>,
    pub data_dir: Option<PathBuf>,
}

impl AppConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigFileError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigFileError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigFileError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut config = Self::from_toml(&text)?;
        if let Some(base) = path.parent() {
            for p in [
                &mut config.stopwords_path,
                &mut config.wordnet_dir,
                &mut config.data_dir,
            ]
            .into_iter()
            .flatten()
            {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(config)
    }

    pub fn similarity(&self) -> Result<SimilarityConfig, ConfigFileError> {
        let base = SimilarityConfig::default();
        let stopwords = match &self.stopwords_path {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigFileError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                parse_stopwords(&text)
            }
            None => base.stopwords().clone(),
        };
        Ok(SimilarityConfig::new(
            self.delta.unwrap_or(DEFAULT_DELTA),
            self.tau.unwrap_or(DEFAULT_TAU),
            stopwords,
        )?)
    }

    /// Noun and verb databases from `wordnet_dir`, or an empty lexicon
    /// (string-equality word similarity) when none is configured.
    pub fn lexicon(&self) -> Result<WordNetLexicon, ConfigFileError> {
        match &self.wordnet_dir {
            Some(dir) => Ok(WordNetLexicon::load_dir(dir)?),
            None => Ok(WordNetLexicon::empty()),
        }
    }

    /// `$CONCEPT_QA_DATA_DIR`, then `data_dir`, then `./concept-qa-data`.
    pub fn data_dir(&self) -> PathBuf {
        std::env::var_os(DATA_DIR_ENV)
            .map(PathBuf::from)
            .or_else(|| self.data_dir.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_DATA_DIR))
    }
}
