//! A 2x2 grid of private runs over noise scale and clip bound, resumable.
//! The runs are short, so the cells differ mainly in their privacy loss.
//!
//! cargo run --release --example sweep

use dp_graphgen::graph::{largest_connected_component, stochastic_block_model, write_edge_list};
use dp_graphgen::model::ModelConfig;
use dp_graphgen::pipeline::{default_output_root, run_sweep, ExperimentConfig, SweepConfig};
use dp_graphgen::training::GanConfig;

fn main() -> dp_graphgen::Result<()> {
    let root = default_output_root().join("sweep-example");
    std::fs::create_dir_all(&root).map_err(|e| dp_graphgen::Error::io(&root, e))?;
    let dataset = root.join("sbm-40.txt");
    let g = largest_connected_component(&stochastic_block_model(&[20, 20], 0.35, 0.03, 6)?)?.graph;
    write_edge_list(&dataset, &g)?;

    let cfg = ExperimentConfig {
        dataset,
        sample_volume: 10_000,
        checkpoint_sample_volume: 2_000,
        model: ModelConfig {
            hidden_dim: 6,
            down_projection_dim: 6,
            ..Default::default()
        },
        gan: GanConfig {
            batch_size: 16,
            max_epochs: 6,
            checkpoint_epochs: 3,
            ..Default::default()
        },
        sweep: SweepConfig {
            sigma_grid: vec![0.8, 1.6],
            clip_grid: vec![0.1, 1.0],
        },
        ..Default::default()
    };
    let rows = run_sweep(&cfg, &root, true)?;
    for row in &rows {
        match &row.result {
            Ok(r) => println!(
                "σ {:<4} C {:<4} ε {:>7.3}  AUC {:.4}",
                row.noise_scale, row.clip_bound, r.epsilon_at_eval, r.auc
            ),
            Err(e) => println!("σ {:<4} C {:<4} failed: {e}", row.noise_scale, row.clip_bound),
        }
    }
    println!("table: {}", root.join("sweep.csv").display());
    Ok(())
}
