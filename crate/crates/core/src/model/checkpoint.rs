//! Versioned binary checkpoints.
//!
//! Layout: the 8-byte magic `DPGGCKPT`, a little-endian `u32` format
//! version, a little-endian `u64` manifest length, the JSON manifest, then
//! every parameter group listed in the manifest as little-endian `f64`s in
//! manifest order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DiscriminatorState, GeneratorState, GroupSpec, ModelConfig, ParamSet};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"DPGGCKPT";
const FORMAT_VERSION: u32 = 1;
const INIT_SCHEME: &str = "weights glorot uniform except critic down-projection uniform[-1,1]; biases zero";

/// Training randomness is counter based, so the seed plus step counters is
/// the complete RNG state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    pub seed: u64,
    pub critic_steps: u64,
    pub generator_steps: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointManifest {
    pub format_version: u32,
    pub model: ModelConfig,
    pub generator_groups: Vec<GroupSpec>,
    pub discriminator_groups: Vec<GroupSpec>,
    pub global_step: u64,
    pub rng: Option<RngState>,
    pub init_scheme: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub generator: GeneratorState,
    pub discriminator: Option<DiscriminatorState>,
    pub global_step: u64,
    pub rng: Option<RngState>,
}

impl Checkpoint {
    pub fn manifest(&self) -> CheckpointManifest {
        CheckpointManifest {
            format_version: FORMAT_VERSION,
            model: self.generator.config.clone(),
            generator_groups: self.generator.params.specs().to_vec(),
            discriminator_groups: self
                .discriminator
                .as_ref()
                .map(|d| d.params.specs().to_vec())
                .unwrap_or_default(),
            global_step: self.global_step,
            rng: self.rng,
            init_scheme: INIT_SCHEME.to_string(),
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let manifest = serde_json::to_vec(&self.manifest())?;
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(manifest.len() as u64).to_le_bytes());
        out.extend_from_slice(&manifest);
        let disc_values = self.discriminator.as_ref().map(|d| d.params.values());
        for v in self.generator.params.values().iter().chain(disc_values.unwrap_or(&[])) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: &str| Error::Checkpoint(msg.to_string());
        if bytes.len() < 20 || &bytes[..8] != MAGIC {
            return Err(bad("not a checkpoint file (bad magic)"));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported format version {version}")));
        }
        let len = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
        let body = bytes.get(20..20 + len).ok_or_else(|| bad("truncated manifest"))?;
        let manifest: CheckpointManifest = serde_json::from_slice(body)?;
        let mut floats = bytes[20 + len..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        if !bytes[20 + len..].len().is_multiple_of(8) {
            return Err(bad("parameter payload is not a whole number of f64 values"));
        }
        let mut take = |specs: &[GroupSpec]| -> Result<ParamSet> {
            let n: usize = specs.iter().map(GroupSpec::len).sum();
            let values: Vec<f64> = floats.by_ref().take(n).collect();
            if values.len() != n {
                return Err(bad("parameter payload shorter than the shape manifest"));
            }
            ParamSet::from_parts(specs.to_vec(), values)
        };
        let generator = GeneratorState::from_params(manifest.model.clone(), take(&manifest.generator_groups)?)?;
        let discriminator = if manifest.discriminator_groups.is_empty() {
            None
        } else {
            Some(DiscriminatorState::from_params(
                manifest.model.clone(),
                take(&manifest.discriminator_groups)?,
            )?)
        };
        if floats.next().is_some() {
            return Err(bad("parameter payload longer than the shape manifest"));
        }
        Ok(Checkpoint {
            generator,
            discriminator,
            global_step: manifest.global_step,
            rng: manifest.rng,
        })
    }
}

pub fn save_checkpoint(path: &Path, checkpoint: &Checkpoint) -> Result<()> {
    fs::write(path, checkpoint.to_bytes()?).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Checkpoint::from_bytes(&bytes)
}

/// Reads only the manifest.
pub fn read_manifest(bytes: &[u8]) -> Result<CheckpointManifest> {
    if bytes.len() < 20 || &bytes[..8] != MAGIC {
        return Err(Error::Checkpoint("not a checkpoint file (bad magic)".into()));
    }
    let len = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
    let body = bytes
        .get(20..20 + len)
        .ok_or_else(|| Error::Checkpoint("truncated manifest".into()))?;
    Ok(serde_json::from_slice(body)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        let cfg = ModelConfig {
            num_nodes: 6,
            noise_dim: 3,
            hidden_dim: 4,
            down_projection_dim: 2,
            ..Default::default()
        };
        Checkpoint {
            generator: GeneratorState::new(cfg.clone(), 1).unwrap(),
            discriminator: Some(DiscriminatorState::new(cfg, 2).unwrap()),
            global_step: 42,
            rng: Some(RngState {
                seed: 7,
                critic_steps: 126,
                generator_steps: 42,
            }),
        }
    }

    #[test]
    fn round_trip() {
        let ck = sample();
        let bytes = ck.to_bytes().unwrap();
        assert_eq!(Checkpoint::from_bytes(&bytes).unwrap(), ck);
        assert_eq!(read_manifest(&bytes).unwrap().global_step, 42);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.ckpt");
        let mut no_disc = ck.clone();
        no_disc.discriminator = None;
        save_checkpoint(&path, &no_disc).unwrap();
        assert_eq!(load_checkpoint(&path).unwrap(), no_disc);
    }

    #[test]
    fn rejects_corruption() {
        let bytes = sample().to_bytes().unwrap();
        assert!(Checkpoint::from_bytes(&bytes[..bytes.len() - 8]).is_err());
        let mut longer = bytes.clone();
        longer.extend_from_slice(&0f64.to_le_bytes());
        assert!(Checkpoint::from_bytes(&longer).is_err());
        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        assert!(Checkpoint::from_bytes(&bad_magic).is_err());
    }

    #[test]
    fn rejects_shape_mismatch() {
        let ck = sample();
        let mut manifest = ck.manifest();
        manifest.generator_groups[0].rows += 1;
        manifest.generator_groups[1].cols -= 1;
        let json = serde_json::to_vec(&manifest).unwrap();
        let mut bytes = Vec::new();
        bytes.extend_from_slice(MAGIC);
        bytes.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        bytes.extend_from_slice(&(json.len() as u64).to_le_bytes());
        bytes.extend_from_slice(&json);
        let payload = &ck.to_bytes().unwrap()[20 + serde_json::to_vec(&ck.manifest()).unwrap().len()..];
        bytes.extend_from_slice(payload);
        assert!(matches!(Checkpoint::from_bytes(&bytes), Err(Error::Shape(_))));
    }
}
