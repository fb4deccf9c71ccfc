use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::ModelConfig;
use crate::training::{DpConfig, GanConfig, Mode};

/// Environment variable naming the default output root.
pub const OUTPUT_ENV: &str = "DP_GRAPHGEN_OUT";

/// σ and C grids for a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub sigma_grid: Vec<f64>,
    pub clip_grid: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            sigma_grid: vec![0.5, 1.0, 2.0],
            clip_grid: vec![0.05, 0.1, 0.5, 1.0],
        }
    }
}

/// Everything one pipeline run needs. Every field has a default, so a
/// config file only lists what it changes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Edge-list file of the input graph.
    pub dataset: PathBuf,
    pub mode: Mode,
    /// Sequence length in walk mode.
    pub walk_length: usize,
    pub validation_fraction: f64,
    /// Generated samples used for the final assembly.
    pub sample_volume: usize,
    /// Generated samples scored at each training checkpoint.
    pub checkpoint_sample_volume: usize,
    /// Master seed; each stage derives its own seed from it.
    pub seed: u64,
    /// Run directory. Unset means `$DP_GRAPHGEN_OUT` or `runs`, plus a
    /// name derived from the config hash.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub model: ModelConfig,
    pub gan: GanConfig,
    pub dp: DpConfig,
    pub sweep: SweepConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: PathBuf::new(),
            mode: Mode::Edge,
            walk_length: 16,
            validation_fraction: 0.15,
            sample_volume: 400_000,
            checkpoint_sample_volume: 40_000,
            seed: 0,
            output_dir: None,
            model: ModelConfig::default(),
            gan: GanConfig::default(),
            dp: DpConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg.resolved())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// The full effective configuration, defaults included.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Fixes fields implied by others: the mode sets the sequence length.
    pub fn resolved(mut self) -> Self {
        self.model.sequence_length = match self.mode {
            Mode::Edge => 2,
            Mode::Walk => self.walk_length,
        };
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.dataset.as_os_str().is_empty() {
            return bad("dataset path is not set".into());
        }
        if self.mode == Mode::Walk && self.walk_length < 2 {
            return bad(format!("walk_length must be at least 2, got {}", self.walk_length));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return bad(format!(
                "validation_fraction must lie in (0, 1), got {}",
                self.validation_fraction
            ));
        }
        if self.sample_volume == 0 {
            return bad("no samples: sample_volume must be at least 1".into());
        }
        if self.checkpoint_sample_volume == 0 {
            return bad("no samples: checkpoint_sample_volume must be at least 1".into());
        }
        self.gan.validate()?;
        self.dp.validate()
    }

    /// SHA-256 of the effective config with the output location removed,
    /// so that reruns elsewhere hash identically.
    pub fn hash(&self) -> String {
        let mut c = self.clone().resolved();
        c.output_dir = None;
        hex::encode(Sha256::digest(c.to_toml().as_bytes()))
    }

    /// Where this run writes its artifacts.
    pub fn run_dir(&self) -> PathBuf {
        match &self.output_dir {
            Some(dir) => dir.clone(),
            None => default_output_root().join(format!("run-{}", &self.hash()[..12])),
        }
    }
}

/// `$DP_GRAPHGEN_OUT` when set, otherwise `runs`.
pub fn default_output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"))
}
