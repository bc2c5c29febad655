//! Run configuration in TOML.
//!
//! ```toml
//! protocol = "closed"
//! rounds = 100000
//! seed = 1
//! snapshot_stride = 100
//! output = "both"
//! history_mode = "summary"
//!
//! [scientist]
//! kind = "forcing"
//! setting_policy = "uniform"
//!
//! [nature]
//! kind = "quantum"
//! fill = "uniform"
//! ```

use std::path::Path;

use chsh_core::runner::{GameSpec, NatureSpec, PredictiveSpec, Protocol, ScientistSpec};
use chsh_core::{HistoryMode, RunOptions};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Csv,
    Json,
    #[default]
    Both,
}

impl OutputKind {
    pub fn csv(self) -> bool {
        matches!(self, OutputKind::Csv | OutputKind::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, OutputKind::Json | OutputKind::Both)
    }
}

fn default_stride() -> u64 {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub protocol: Protocol,
    pub rounds: u64,
    pub seed: u64,
    #[serde(default = "default_stride")]
    pub snapshot_stride: u64,
    #[serde(default)]
    pub output: OutputKind,
    #[serde(default)]
    pub history_mode: HistoryMode,
    pub scientist: ScientistSpec,
    pub nature: NatureSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predictive: Option<PredictiveSpec>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: RunConfig =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configs always serialize")
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(CliError::Config("rounds must be at least 1".into()));
        }
        if self.snapshot_stride == 0 {
            return Err(CliError::Config(
                "snapshot_stride must be at least 1".into(),
            ));
        }
        if self.protocol == Protocol::Predictive && self.predictive.is_none() {
            return Err(CliError::Config(
                "the predictive protocol needs a [predictive] section".into(),
            ));
        }
        Ok(())
    }

    pub fn game(&self) -> GameSpec {
        GameSpec {
            protocol: self.protocol,
            scientist: self.scientist.clone(),
            nature: self.nature.clone(),
            predictive: self.predictive.clone(),
        }
    }

    pub fn options(&self) -> RunOptions {
        RunOptions::new(self.rounds)
            .stride(self.snapshot_stride)
            .history(self.history_mode)
    }
}
