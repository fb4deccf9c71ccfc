//! Non-private edge-mode training on a two-community block model, printing
//! validation AUC/AP at every checkpoint.
//!
//! cargo run --release --example train_sbm -- [p_in] [p_out] [seed]

use dp_graphgen::graph::{largest_connected_component, split_edges, stochastic_block_model};
use dp_graphgen::model::ModelConfig;
use dp_graphgen::training::{train, AdamConfig, DpConfig, GanConfig, Mode, TrainOptions};

fn main() -> dp_graphgen::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let arg = |i: usize, default: f64| args.get(i).and_then(|s| s.parse().ok()).unwrap_or(default);
    let seed = arg(3, 7.0) as u64;
    let g = stochastic_block_model(&[150, 150], arg(1, 0.085), arg(2, 0.005), seed)?;
    let lcc = largest_connected_component(&g)?.graph;
    let split = split_edges(&lcc, 0.15, seed)?;
    println!(
        "{} nodes, {} edges, {} train edges",
        lcc.num_nodes(),
        lcc.num_edges(),
        split.train.num_edges()
    );

    let model = ModelConfig {
        hidden_dim: 16,
        down_projection_dim: 16,
        ..ModelConfig::for_nodes(lcc.num_nodes())
    };
    let gan = GanConfig {
        batch_size: 128,
        checkpoint_epochs: 25,
        patience: 10,
        max_epochs: 2000,
        adam: AdamConfig {
            learning_rate: 5e-3,
            ..Default::default()
        },
        ..Default::default()
    };
    let options = TrainOptions {
        mode: Mode::Edge,
        checkpoint_sample_volume: 100_000,
        seed,
    };
    let out = train(&split, &model, &gan, &DpConfig::disabled(), &options, |rec, _| {
        println!(
            "epoch {:>5}  auc {:.4}  ap {:.4}  critic {:+.4}  gen {:+.4}  {:.1}s",
            rec.epoch, rec.auc, rec.ap, rec.critic_loss, rec.generator_loss, rec.wall_clock_secs
        );
        Ok(())
    })?;
    let best = &out.history.checkpoints[out.best_checkpoint];
    println!(
        "stopped: {}; best checkpoint {} (epoch {}, auc {:.4}, ap {:.4})",
        out.stop_reason, out.best_checkpoint, best.epoch, best.auc, best.ap
    );
    Ok(())
}
