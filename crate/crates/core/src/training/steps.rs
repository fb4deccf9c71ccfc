use rand::Rng;
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::critic::{critic_gradient, per_example_gradients, CriticBatch, CriticLoss};
use super::mechanism::{clip_per_example, noisy_sum};
use super::{DpConfig, GanConfig, Mode, Sampling};
use crate::accountant::PrivacyLedger;
use crate::error::{Error, Result};
use crate::graph::{sample_edge_batch, sample_poisson_batch, sample_random_walks, Graph};
use crate::model::{DiscriminatorState, GeneratorDraw, GeneratorState, ModelConfig};
use crate::rng::{stream_rng, streams};
use crate::tape::Tape;

/// Everything that changes during training.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainState {
    pub generator: GeneratorState,
    pub discriminator: DiscriminatorState,
    pub critic_opt: Adam,
    pub generator_opt: Adam,
    /// Advanced once per critic step. With the mechanism off the noise
    /// scale is 0, so every reported ε is infinite.
    pub ledger: PrivacyLedger,
    pub seed: u64,
    pub critic_steps: u64,
    pub generator_steps: u64,
}

impl TrainState {
    /// Fresh networks for a training graph with `train_edges` edges.
    pub fn new(model: &ModelConfig, gan: &GanConfig, dp: &DpConfig, train_edges: usize, seed: u64) -> Result<Self> {
        model.validate()?;
        gan.validate()?;
        dp.validate()?;
        if train_edges == 0 {
            return Err(Error::EmptyInput("training graph has no edges".into()));
        }
        let generator = GeneratorState::new(model.clone(), seed)?;
        let discriminator = DiscriminatorState::new(model.clone(), seed)?;
        let q = (gan.batch_size as f64 / train_edges as f64).min(1.0);
        let sigma = if dp.enabled { dp.noise_scale } else { 0.0 };
        Ok(TrainState {
            critic_opt: Adam::new(gan.adam, discriminator.num_params()),
            generator_opt: Adam::new(gan.adam, generator.num_params()),
            generator,
            discriminator,
            ledger: PrivacyLedger::new(q, sigma),
            seed,
            critic_steps: 0,
            generator_steps: 0,
        })
    }
}

/// Summary of one critic update.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticRecord {
    pub step: u64,
    pub loss: f64,
    pub batch_size: usize,
}

fn real_batch(
    train: &Graph,
    mode: Mode,
    length: usize,
    gan: &GanConfig,
    dp: &DpConfig,
    seed: u64,
    step: u64,
) -> Result<Vec<Vec<usize>>> {
    let pairs = match mode {
        Mode::Walk => return sample_random_walks(train, length, gan.batch_size, seed, step),
        Mode::Edge if dp.enabled && dp.sampling == Sampling::Poisson => {
            let rate = (gan.batch_size as f64 / train.num_edges() as f64).min(1.0);
            sample_poisson_batch(train, rate, seed, step)?
        }
        Mode::Edge => sample_edge_batch(train, gan.batch_size, seed, step)?,
    };
    Ok(pairs.into_iter().map(|(u, v)| vec![u, v]).collect())
}

/// One critic update.
///
/// With the mechanism on, every example's gradient is computed by its own
/// backward pass, clipped to `C`, summed, perturbed by `N(0, (σC)² I)` and
/// divided by the batch size (the expected size under Poisson sampling).
/// Otherwise the batch-mean gradient is used directly. Refuses to run once
/// the budget is spent.
pub fn critic_step(
    state: &mut TrainState,
    train: &Graph,
    mode: Mode,
    gan: &GanConfig,
    dp: &DpConfig,
) -> Result<CriticRecord> {
    if dp.budget_exceeded(&state.ledger) {
        return Err(Error::BudgetExhausted {
            epsilon: state.ledger.epsilon_for_delta(dp.target_delta),
            delta: dp.target_delta,
        });
    }
    let step = state.critic_steps;
    let cfg = &state.generator.config;
    if mode == Mode::Edge && cfg.sequence_length != 2 {
        return Err(Error::Config("edge mode needs model.sequence_length = 2".into()));
    }
    let real = real_batch(train, mode, cfg.sequence_length, gan, dp, state.seed, step)?;
    let m = real.len();
    let mut rng = stream_rng(state.seed, streams::CRITIC ^ step);
    let fake = state.generator.sample(m, &mut rng)?;
    let rho: Vec<f64> = (0..m).map(|_| rng.random()).collect();
    let dim = state.discriminator.num_params();

    let (loss, grad) = if m == 0 {
        // an empty Poisson batch still releases noise
        let grad = if dp.enabled {
            clipped_mean(&[], dim, state, dp, gan, train, step)?
        } else {
            vec![0.0; dim]
        };
        (0.0, grad)
    } else {
        let batch = CriticBatch::from_sequences(&real, &fake, rho, cfg.num_nodes)?;
        if dp.enabled {
            let (loss, grads) = per_example_gradients(&state.discriminator, &batch, gan.lambda_gp);
            check_finite(&loss, step)?;
            let clipped = grads
                .iter()
                .map(|g| clip_per_example(g, dp.clip_bound))
                .collect::<Result<Vec<_>>>()
                .map_err(|_| Error::Diverged {
                    what: "critic gradient",
                    step,
                })?;
            (loss.loss, clipped_mean(&clipped, dim, state, dp, gan, train, step)?)
        } else {
            let (loss, grad) = critic_gradient(&state.discriminator, &batch, gan.lambda_gp);
            check_finite(&loss, step)?;
            (loss.loss, grad)
        }
    };
    state.critic_opt.step(state.discriminator.params.values_mut(), &grad);
    state.discriminator.params.check_finite()?;
    state.ledger.advance(1);
    state.critic_steps += 1;
    Ok(CriticRecord {
        step,
        loss,
        batch_size: m,
    })
}

fn check_finite(loss: &CriticLoss, step: u64) -> Result<()> {
    if loss.loss.is_finite() {
        Ok(())
    } else {
        Err(Error::Diverged {
            what: "critic loss",
            step,
        })
    }
}

fn clipped_mean(
    clipped: &[Vec<f64>],
    dim: usize,
    state: &TrainState,
    dp: &DpConfig,
    gan: &GanConfig,
    train: &Graph,
    step: u64,
) -> Result<Vec<f64>> {
    let mut noise_rng = stream_rng(state.seed, streams::DP_NOISE ^ step);
    let sum = noisy_sum(clipped, dim, dp.noise_scale, dp.clip_bound, &mut noise_rng)?;
    let denom = match dp.sampling {
        Sampling::FixedSize => clipped.len() as f64,
        Sampling::Poisson => (gan.batch_size as f64).min(train.num_edges() as f64),
    };
    Ok(sum.into_iter().map(|s| s / denom).collect())
}

/// `−mean D(G(z))` with its gradient in generator parameters.
pub fn generator_loss(gen: &GeneratorState, disc: &DiscriminatorState, draw: &GeneratorDraw) -> (f64, Vec<f64>) {
    let mut tape = Tape::new();
    let gvars = gen.params.load(&mut tape, true);
    let dvars = disc.params.load(&mut tape, false);
    let out = gen.forward(&mut tape, &gvars, draw);
    let scores = disc.forward(&mut tape, &dvars, &out.tokens);
    let total = tape.sum(scores);
    let loss = tape.scale(total, -1.0 / draw.noise.rows as f64);
    let grads = tape.grad(loss, &gvars);
    (tape.value(loss).item(), gen.params.flatten_grads(&tape, &grads))
}

/// One generator update. It reads data only through the critic, so it
/// adds no privacy cost and uses neither clipping nor noise.
pub fn generator_step(state: &mut TrainState, gan: &GanConfig) -> Result<f64> {
    let step = state.generator_steps;
    let mut rng = stream_rng(state.seed, streams::GENERATOR ^ step);
    let draw = state.generator.draw(gan.batch_size, &mut rng);
    let (loss, grad) = generator_loss(&state.generator, &state.discriminator, &draw);
    if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Diverged {
            what: "generator loss",
            step,
        });
    }
    state.generator_opt.step(state.generator.params.values_mut(), &grad);
    state.generator.params.check_finite()?;
    state.generator_steps += 1;
    Ok(loss)
}
