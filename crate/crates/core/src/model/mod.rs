//! Recurrent generator and critic over node-id sequences.
//!
//! An edge is a length-2 sequence of node tokens; walk mode reuses the same
//! networks with longer sequences.

mod checkpoint;
mod discriminator;
mod generator;
mod lstm;
mod params;
mod sampling;

pub use checkpoint::{load_checkpoint, read_manifest, save_checkpoint, Checkpoint, CheckpointManifest, RngState};
pub use discriminator::DiscriminatorState;
pub use generator::{generate_samples, GeneratedBatch, GeneratorDraw, GeneratorState};
pub use params::{GroupSpec, ParamSet};
pub use sampling::{relaxed_sample_step, RelaxedSample};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Architecture hyperparameters shared by generator and critic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub num_nodes: usize,
    pub noise_dim: usize,
    pub hidden_dim: usize,
    pub down_projection_dim: usize,
    /// 2 in edge mode, `k` in walk mode.
    pub sequence_length: usize,
    pub temperature: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            num_nodes: 0,
            noise_dim: 16,
            hidden_dim: 40,
            down_projection_dim: 64,
            sequence_length: 2,
            temperature: 1.0,
        }
    }
}

impl ModelConfig {
    pub fn for_nodes(num_nodes: usize) -> Self {
        ModelConfig {
            num_nodes,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("num_nodes", self.num_nodes),
            ("noise_dim", self.noise_dim),
            ("hidden_dim", self.hidden_dim),
            ("down_projection_dim", self.down_projection_dim),
        ];
        for (name, v) in dims {
            if v == 0 {
                return Err(Error::Config(format!("model.{name} must be at least 1")));
            }
        }
        if self.sequence_length < 2 {
            return Err(Error::Config(format!(
                "model.sequence_length must be at least 2, got {}",
                self.sequence_length
            )));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::Config(format!(
                "model.temperature must be positive, got {}",
                self.temperature
            )));
        }
        Ok(())
    }
}
