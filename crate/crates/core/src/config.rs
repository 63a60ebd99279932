//! Engine-wide configuration, one block per module. Every field has a
//! default so a config file only lists what it overrides.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Timestamp;
use crate::error::ScoringResult;
use crate::feedfilter::FeedWeights;
use crate::persona::{RubricConfig, ScoringWeights};
use crate::socialrank::FriendWeights;
use crate::vidquery::DEFAULT_DIM;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VideoConfig {
    pub dim: usize,
}

impl Default for VideoConfig {
    fn default() -> Self {
        VideoConfig { dim: DEFAULT_DIM }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    pub persona: ScoringWeights,
    pub rubric: RubricConfig,
    pub social: FriendWeights,
    pub feed: FeedWeights,
    pub video: VideoConfig,
    /// Fixed clock in unix seconds; `None` reads the system clock.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub now: Option<Timestamp>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid config: {0}")]
    Invalid(#[from] crate::error::ScoringError),
}

impl EngineConfig {
    pub fn validate(&self) -> ScoringResult<()> {
        self.persona.validate()?;
        self.social.validate()?;
        self.feed.validate()
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let cfg: EngineConfig =
            serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
                path: path.display().to_string(),
                source,
            })?;
        cfg.validate()?;
        Ok(cfg)
    }
}
