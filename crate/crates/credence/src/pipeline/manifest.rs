//! Experiment manifests: the TOML document naming dataset, backend,
//! mode, round sizes, and seeds, plus validation and content hashing.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::client::{AgentPolicy, GenerationConfig};
use crate::domain::ScoringRuleId;

use super::{io_error, PipelineError};

/// Which intervention an experiment runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Uncalibrated,
    SelfCal,
    GameSym,
    GameExp,
}

impl Mode {
    pub fn scoring_rule(self) -> Option<ScoringRuleId> {
        match self {
            Mode::GameSym => Some(ScoringRuleId::Symmetric),
            Mode::GameExp => Some(ScoringRuleId::Exponential),
            Mode::Uncalibrated | Mode::SelfCal => None,
        }
    }

    pub fn is_game(self) -> bool {
        self.scoring_rule().is_some()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Uncalibrated => "uncalibrated",
            Mode::SelfCal => "self_cal",
            Mode::GameSym => "game_sym",
            Mode::GameExp => "game_exp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendChoice {
    Simulated,
    Http,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    Mcq,
    OpenEnded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub kind: DatasetKind,
    pub path: PathBuf,
    /// Restrict the evaluation pool to one category.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
    /// Two-choice game bank fixture.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub game_bank_path: Option<PathBuf>,
    /// Draw game questions from the MCQ pool instead, reduced to the
    /// gold option plus one seeded distractor.
    #[serde(default)]
    pub game_from_mcq: bool,
}

fn default_parse_retries() -> u32 {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub mode: Mode,
    pub backend: BackendChoice,
    pub n_eval: usize,
    #[serde(default)]
    pub n_game: usize,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
    pub dataset: DatasetSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent: Option<AgentPolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generation: Option<GenerationConfig>,
    /// Use disjoint pre/post question sets instead of the paired default.
    #[serde(default)]
    pub disjoint_eval: bool,
    #[serde(default = "default_parse_retries")]
    pub parse_retries: u32,
}

impl ExperimentManifest {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        let manifest: ExperimentManifest =
            toml::from_str(&text).map_err(|e| PipelineError::Manifest(e.to_string()))?;
        Ok(manifest)
    }

    pub fn to_toml(&self) -> Result<String, PipelineError> {
        toml::to_string_pretty(self).map_err(|e| PipelineError::Manifest(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.seeds.is_empty() {
            return Err(PipelineError::Manifest("seeds must not be empty".into()));
        }
        if self.n_eval == 0 {
            return Err(PipelineError::Manifest("n_eval must be at least 1".into()));
        }
        if self.mode.is_game() {
            if self.n_game == 0 {
                return Err(PipelineError::Manifest(
                    "game modes require n_game >= 1".into(),
                ));
            }
            if self.dataset.game_bank_path.is_none() && !self.dataset.game_from_mcq {
                return Err(PipelineError::Manifest(
                    "game modes require dataset.game_bank_path or dataset.game_from_mcq".into(),
                ));
            }
            if self.dataset.game_from_mcq && self.dataset.kind != DatasetKind::Mcq {
                return Err(PipelineError::Manifest(
                    "game_from_mcq requires an mcq dataset".into(),
                ));
            }
        }
        match self.backend {
            BackendChoice::Simulated if self.agent.is_none() => {
                return Err(PipelineError::Manifest(
                    "simulated backend requires an [agent] section".into(),
                ));
            }
            BackendChoice::Http if self.generation.is_none() => {
                return Err(PipelineError::Manifest(
                    "http backend requires a [generation] section".into(),
                ));
            }
            _ => {}
        }
        Ok(())
    }

    /// Content hash of the resolved manifest; embedded in every report.
    pub fn content_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("manifest serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        hex::encode(hasher.finalize())
    }
}
