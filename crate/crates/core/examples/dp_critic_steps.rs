//! Private critic updates: per-example clipping, Gaussian noise on the sum,
//! and one accountant step per update.
//!
//! cargo run --release --example dp_critic_steps

use dp_graphgen::graph::{largest_connected_component, stochastic_block_model};
use dp_graphgen::model::ModelConfig;
use dp_graphgen::rng::stream_rng;
use dp_graphgen::training::{
    clip_per_example, critic_step, generator_step, noisy_aggregate, DpConfig, GanConfig, Mode, TrainState,
};
use dp_graphgen::Error;

fn main() -> dp_graphgen::Result<()> {
    let clipped = clip_per_example(&[3.0, 4.0], 1.0)?;
    println!("clip (3, 4) to 1: {clipped:?}");
    let mut rng = stream_rng(0, 0);
    let mean = noisy_aggregate(&[vec![1.0, 0.0], vec![0.0, 1.0]], 0.5, 1.0, &mut rng)?;
    println!("noisy mean of (1,0), (0,1) at σ=0.5: {mean:?}");

    let g = largest_connected_component(&stochastic_block_model(&[40, 40], 0.2, 0.02, 3)?)?.graph;
    let model = ModelConfig {
        hidden_dim: 8,
        down_projection_dim: 8,
        ..ModelConfig::for_nodes(g.num_nodes())
    };
    let gan = GanConfig {
        batch_size: 32,
        ..Default::default()
    };
    let dp = DpConfig {
        noise_scale: 1.1,
        clip_bound: 0.5,
        target_epsilon: Some(3.0),
        ..Default::default()
    };
    let mut state = TrainState::new(&model, &gan, &dp, g.num_edges(), 3)?;
    for iteration in 0.. {
        for _ in 0..gan.n_critic {
            let rec = match critic_step(&mut state, &g, Mode::Edge, &gan, &dp) {
                Ok(rec) => rec,
                Err(Error::BudgetExhausted { epsilon, delta }) => {
                    println!(
                        "budget spent: ε = {epsilon:.3} at δ = {delta} after {} steps",
                        state.ledger.steps()
                    );
                    return Ok(());
                }
                Err(e) => return Err(e),
            };
            println!(
                "critic step {:>2}: loss {:+.4}, batch {}, ε = {:.3}",
                rec.step,
                rec.loss,
                rec.batch_size,
                dp.epsilon(&state.ledger)
            );
        }
        let loss = generator_step(&mut state, &gan)?;
        println!("generator step {iteration}: loss {loss:+.4}");
    }
    Ok(())
}
