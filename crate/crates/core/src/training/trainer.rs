use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::steps::{critic_step, generator_step, TrainState};
use super::{DpConfig, GanConfig, Mode};
use crate::accountant::PrivacyLedger;
use crate::assembler::{count_edges, sequences_to_pairs, symmetrize};
use crate::error::{Error, Result};
use crate::evaluation::link_prediction;
use crate::graph::EdgeSplit;
use crate::model::{generate_samples, DiscriminatorState, GeneratorState, ModelConfig};
use crate::rng::{derive_seed, streams};

/// Why training ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Patience,
    PrivacyBudget,
    MaxEpochs,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StopReason::Patience => "patience",
            StopReason::PrivacyBudget => "privacy budget",
            StopReason::MaxEpochs => "max epochs",
        })
    }
}

/// One validation checkpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointRecord {
    pub index: usize,
    pub epoch: usize,
    /// Mean critic loss over the steps since the previous checkpoint.
    pub critic_loss: f64,
    pub generator_loss: f64,
    pub auc: f64,
    pub ap: f64,
    /// Early-stopping score, the mean of AUC and AP.
    pub score: f64,
    #[serde(with = "crate::serde_ext::real")]
    pub epsilon: f64,
    pub delta: f64,
    pub critic_steps: u64,
    pub generator_steps: u64,
    pub wall_clock_secs: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub checkpoints: Vec<CheckpointRecord>,
}

impl TrainHistory {
    /// One JSON object per line.
    pub fn to_json_lines(&self) -> Result<String> {
        let mut out = String::new();
        for c in &self.checkpoints {
            out.push_str(&serde_json::to_string(c)?);
            out.push('\n');
        }
        Ok(out)
    }
}

/// Stops after `patience` consecutive checkpoints without a new best score.
#[derive(Clone, Debug, PartialEq)]
pub struct EarlyStopping {
    patience: usize,
    best: Option<(usize, f64)>,
    since_best: usize,
    seen: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        EarlyStopping {
            patience,
            best: None,
            since_best: 0,
            seen: 0,
        }
    }

    /// Records the next checkpoint's score. Returns true if it is the new best.
    pub fn observe(&mut self, score: f64) -> bool {
        let index = self.seen;
        self.seen += 1;
        let improved = match self.best {
            None => true,
            Some((_, b)) => score > b || (b.is_nan() && !score.is_nan()),
        };
        if improved {
            self.best = Some((index, score));
            self.since_best = 0;
        } else {
            self.since_best += 1;
        }
        improved
    }

    pub fn should_stop(&self) -> bool {
        self.since_best >= self.patience
    }

    /// Zero-based index of the best checkpoint so far.
    pub fn best_index(&self) -> Option<usize> {
        self.best.map(|(i, _)| i)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub mode: Mode,
    /// Generated samples scored at each checkpoint.
    pub checkpoint_sample_volume: usize,
    pub seed: u64,
}

pub struct TrainOutcome {
    /// Networks at the best checkpoint.
    pub generator: GeneratorState,
    pub discriminator: DiscriminatorState,
    pub best_checkpoint: usize,
    pub history: TrainHistory,
    /// Ledger at termination; the best snapshot may have spent less.
    pub ledger: PrivacyLedger,
    pub stop_reason: StopReason,
    pub critic_steps: u64,
    pub generator_steps: u64,
}

/// Scores a generator on the validation split.
fn checkpoint_scores(gen: &GeneratorState, split: &EdgeSplit, volume: usize, seed: u64) -> Result<(f64, f64)> {
    let samples = generate_samples(gen, volume, seed)?;
    let sm = symmetrize(&count_edges(&sequences_to_pairs(&samples), gen.config.num_nodes)?);
    let lp = link_prediction(&sm, split);
    Ok((lp.auc, lp.ap))
}

/// Trains on `split.train`.
///
/// Each epoch runs `max(1, ⌈|E_train| / (m · n_critic)⌉)` generator
/// iterations of `n_critic` critic steps plus one generator step. Every
/// `checkpoint_epochs` epochs, and once more when training ends, the
/// generator is scored on the validation split. `on_checkpoint` sees each
/// record together with the networks it describes.
pub fn train(
    split: &EdgeSplit,
    model: &ModelConfig,
    gan: &GanConfig,
    dp: &DpConfig,
    options: &TrainOptions,
    mut on_checkpoint: impl FnMut(&CheckpointRecord, &TrainState) -> Result<()>,
) -> Result<TrainOutcome> {
    let graph = &split.train;
    if !graph.is_connected() {
        return Err(Error::InvalidArgument("training graph must be connected".into()));
    }
    if options.checkpoint_sample_volume == 0 {
        return Err(Error::Config("checkpoint_sample_volume must be at least 1".into()));
    }
    if options.mode == Mode::Edge && dp.sampling == super::Sampling::FixedSize && gan.batch_size > graph.num_edges() {
        return Err(Error::Config(format!(
            "gan.batch_size {} exceeds the {} training edges",
            gan.batch_size,
            graph.num_edges()
        )));
    }
    let mut state = TrainState::new(model, gan, dp, graph.num_edges(), options.seed)?;
    let iterations = graph.num_edges().div_ceil(gan.batch_size * gan.n_critic).max(1);
    let mut stopper = EarlyStopping::new(gan.patience);
    let mut history = TrainHistory::default();
    let mut best: Option<(GeneratorState, DiscriminatorState)> = None;
    let started = Instant::now();
    let (mut critic_sum, mut critic_n, mut gen_sum, mut gen_n) = (0.0, 0usize, 0.0, 0usize);
    let mut stop = None;

    for epoch in 1..=gan.max_epochs {
        'epoch: for _ in 0..iterations {
            for _ in 0..gan.n_critic {
                let rec = critic_step(&mut state, graph, options.mode, gan, dp)?;
                critic_sum += rec.loss;
                critic_n += 1;
                if dp.budget_exceeded(&state.ledger) {
                    stop = Some(StopReason::PrivacyBudget);
                    break 'epoch;
                }
            }
            gen_sum += generator_step(&mut state, gan)?;
            gen_n += 1;
        }
        if stop.is_none() && epoch == gan.max_epochs {
            stop = Some(StopReason::MaxEpochs);
        }
        if stop.is_none() && epoch % gan.checkpoint_epochs != 0 {
            continue;
        }

        let index = history.checkpoints.len();
        let eval_seed = derive_seed(options.seed, streams::CHECKPOINT ^ index as u64);
        let (auc, ap) = checkpoint_scores(&state.generator, split, options.checkpoint_sample_volume, eval_seed)?;
        let mean = |s: f64, n: usize| if n == 0 { f64::NAN } else { s / n as f64 };
        let record = CheckpointRecord {
            index,
            epoch,
            critic_loss: mean(critic_sum, critic_n),
            generator_loss: mean(gen_sum, gen_n),
            auc,
            ap,
            score: (auc + ap) / 2.0,
            epsilon: dp.epsilon(&state.ledger),
            delta: dp.target_delta,
            critic_steps: state.critic_steps,
            generator_steps: state.generator_steps,
            wall_clock_secs: started.elapsed().as_secs_f64(),
        };
        (critic_sum, critic_n, gen_sum, gen_n) = (0.0, 0, 0.0, 0);
        log::info!(
            "checkpoint {index} epoch {epoch}: auc {auc:.4} ap {ap:.4} eps {}",
            record.epsilon
        );
        if stopper.observe(record.score) {
            best = Some((state.generator.clone(), state.discriminator.clone()));
        }
        on_checkpoint(&record, &state)?;
        history.checkpoints.push(record);
        if stop.is_none() && stopper.should_stop() {
            stop = Some(StopReason::Patience);
        }
        if stop.is_some() {
            break;
        }
    }

    let (generator, discriminator) = best.expect("training always records a checkpoint");
    Ok(TrainOutcome {
        generator,
        discriminator,
        best_checkpoint: stopper.best_index().unwrap_or(0),
        history,
        ledger: state.ledger,
        stop_reason: stop.unwrap_or(StopReason::MaxEpochs),
        critic_steps: state.critic_steps,
        generator_steps: state.generator_steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{split_edges, Graph};

    #[test]
    fn patience_rule() {
        let mut s = EarlyStopping::new(5);
        let history = [0.60, 0.61, 0.60, 0.59, 0.58, 0.57, 0.56];
        let mut stopped_at = None;
        for (i, &auc) in history.iter().enumerate() {
            s.observe(auc);
            if s.should_stop() {
                stopped_at = Some(i + 1);
                break;
            }
        }
        assert_eq!(stopped_at, Some(7));
        // second checkpoint, zero-based
        assert_eq!(s.best_index(), Some(1));
    }

    fn ring_with_chords(n: usize) -> Graph {
        let ring = (0..n).map(|i| (i, (i + 1) % n));
        let chords = (0..n).step_by(3).map(|i| (i, (i + n / 2) % n));
        Graph::from_edges(n, ring.chain(chords)).unwrap()
    }

    fn small_model(n: usize) -> ModelConfig {
        ModelConfig {
            num_nodes: n,
            noise_dim: 4,
            hidden_dim: 6,
            down_projection_dim: 5,
            ..Default::default()
        }
    }

    #[test]
    fn tiny_budget_stops_in_first_epoch() {
        let g = ring_with_chords(20);
        let split = split_edges(&g, 0.15, 0).unwrap();
        let gan = GanConfig {
            batch_size: 8,
            max_epochs: 50,
            ..Default::default()
        };
        let dp = DpConfig {
            target_epsilon: Some(0.01),
            ..Default::default()
        };
        let options = TrainOptions {
            mode: Mode::Edge,
            checkpoint_sample_volume: 500,
            seed: 4,
        };
        let out = train(&split, &small_model(20), &gan, &dp, &options, |_, _| Ok(())).unwrap();
        assert_eq!(out.stop_reason, StopReason::PrivacyBudget);
        assert_eq!(out.stop_reason.to_string(), "privacy budget");
        assert_eq!(out.history.checkpoints.len(), 1);
        assert_eq!(out.history.checkpoints[0].epoch, 1);
        assert_eq!(out.critic_steps, 1);
    }

    #[test]
    fn non_private_history_reports_infinite_epsilon() {
        let g = ring_with_chords(20);
        let split = split_edges(&g, 0.15, 0).unwrap();
        let gan = GanConfig {
            batch_size: 8,
            max_epochs: 4,
            checkpoint_epochs: 2,
            ..Default::default()
        };
        let options = TrainOptions {
            mode: Mode::Edge,
            checkpoint_sample_volume: 500,
            seed: 4,
        };
        let mut seen = 0;
        let out = train(
            &split,
            &small_model(20),
            &gan,
            &DpConfig::disabled(),
            &options,
            |_, _| {
                seen += 1;
                Ok(())
            },
        )
        .unwrap();
        assert_eq!(out.stop_reason, StopReason::MaxEpochs);
        assert_eq!(seen, 2);
        assert!(out.history.checkpoints.iter().all(|c| c.epsilon == f64::INFINITY));
        let lines = out.history.to_json_lines().unwrap();
        assert!(lines.lines().all(|l| l.contains(r#""epsilon":"inf""#)));
        // 17 train edges / (8 · 3) rounds up to one iteration per epoch
        assert_eq!(out.generator_steps, 4);
        assert_eq!(out.critic_steps, 12);
    }

    #[test]
    fn private_epsilon_is_non_decreasing() {
        let g = ring_with_chords(20);
        let split = split_edges(&g, 0.15, 0).unwrap();
        let gan = GanConfig {
            batch_size: 4,
            max_epochs: 3,
            checkpoint_epochs: 1,
            patience: 10,
            ..Default::default()
        };
        let options = TrainOptions {
            mode: Mode::Edge,
            checkpoint_sample_volume: 200,
            seed: 1,
        };
        let out = train(
            &split,
            &small_model(20),
            &gan,
            &DpConfig::default(),
            &options,
            |_, _| Ok(()),
        )
        .unwrap();
        let eps: Vec<f64> = out.history.checkpoints.iter().map(|c| c.epsilon).collect();
        assert_eq!(eps.len(), 3);
        assert!(eps.windows(2).all(|w| w[0] <= w[1]));
        assert!(eps[0].is_finite());
    }
}
