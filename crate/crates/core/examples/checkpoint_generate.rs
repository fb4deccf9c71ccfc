//! Trains briefly, saves a checkpoint, reloads it and samples edges.
//!
//! cargo run --release --example checkpoint_generate

use dp_graphgen::graph::{largest_connected_component, split_edges, stochastic_block_model};
use dp_graphgen::model::{generate_samples, load_checkpoint, read_manifest, save_checkpoint, Checkpoint, ModelConfig};
use dp_graphgen::training::{train, DpConfig, GanConfig, Mode, TrainOptions};

fn main() -> dp_graphgen::Result<()> {
    let g = largest_connected_component(&stochastic_block_model(&[30, 30], 0.3, 0.02, 4)?)?.graph;
    let split = split_edges(&g, 0.15, 4)?;
    let model = ModelConfig {
        hidden_dim: 8,
        down_projection_dim: 8,
        ..ModelConfig::for_nodes(g.num_nodes())
    };
    let gan = GanConfig {
        batch_size: 32,
        max_epochs: 20,
        checkpoint_epochs: 10,
        ..Default::default()
    };
    let options = TrainOptions {
        mode: Mode::Edge,
        checkpoint_sample_volume: 5_000,
        seed: 4,
    };
    let out = train(&split, &model, &gan, &DpConfig::disabled(), &options, |_, _| Ok(()))?;

    let dir = tempfile::TempDir::new().map_err(|e| dp_graphgen::Error::io(std::env::temp_dir(), e))?;
    let path = dir.path().join("best.bin");
    let checkpoint = Checkpoint {
        generator: out.generator.clone(),
        discriminator: Some(out.discriminator.clone()),
        global_step: out.critic_steps,
        rng: None,
    };
    save_checkpoint(&path, &checkpoint)?;
    let bytes = std::fs::read(&path).map_err(|e| dp_graphgen::Error::io(&path, e))?;
    println!("{}", serde_json::to_string_pretty(&read_manifest(&bytes)?)?);

    let restored = load_checkpoint(&path)?;
    let samples = generate_samples(&restored.generator, 10, 99)?;
    assert_eq!(samples, generate_samples(&out.generator, 10, 99)?);
    for s in samples {
        println!("{} {}", s[0], s[1]);
    }
    Ok(())
}
