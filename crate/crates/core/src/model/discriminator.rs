use super::lstm::cell;
use super::params::{GroupSpec, Init, ParamSet};
use super::ModelConfig;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, streams};
use crate::tape::{Tape, Var};
use crate::tensor::Mat;

const DOWN_W: usize = 0;
const LSTM_W: usize = 1;
const LSTM_B: usize = 2;
const OUT_W: usize = 3;
const OUT_B: usize = 4;

/// Critic parameters: a down-projection of each step's node vector feeds an
/// LSTM whose last hidden state is mapped to one unbounded score.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscriminatorState {
    pub config: ModelConfig,
    pub params: ParamSet,
}

impl DiscriminatorState {
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let (n, h, d) = (config.num_nodes, config.hidden_dim, config.down_projection_dim);
        let groups = [
            (GroupSpec::new("down_projection.weight", n, d), Init::Uniform(1.0)),
            (GroupSpec::new("lstm.weight", d + h, 4 * h), Init::Glorot),
            (GroupSpec::new("lstm.bias", 1, 4 * h), Init::Zeros),
            (GroupSpec::new("output.weight", h, 1), Init::Glorot),
            (GroupSpec::new("output.bias", 1, 1), Init::Zeros),
        ];
        let params = ParamSet::initialize(&groups, &mut stream_rng(seed, streams::INIT ^ 1));
        Ok(DiscriminatorState { config, params })
    }

    pub fn from_params(config: ModelConfig, params: ParamSet) -> Result<Self> {
        let template = DiscriminatorState::new(config.clone(), 0)?;
        if template.params.specs() != params.specs() {
            return Err(Error::Shape(
                "discriminator parameter groups do not match the config".into(),
            ));
        }
        Ok(DiscriminatorState { config, params })
    }

    pub fn num_params(&self) -> usize {
        self.params.num_params()
    }

    /// Scores an `m`-row batch given one `m × num_nodes` input per step.
    /// Rows never interact. Returns an `m × 1` node.
    pub fn forward(&self, tape: &mut Tape, vars: &[Var], inputs: &[Var]) -> Var {
        let cfg = &self.config;
        let m = tape.value(inputs[0]).rows;
        let mut h = tape.constant(Mat::zeros(m, cfg.hidden_dim));
        let mut c = tape.constant(Mat::zeros(m, cfg.hidden_dim));
        for &v in inputs {
            let x = tape.matmul(v, vars[DOWN_W]);
            (h, c) = cell(tape, x, h, c, vars[LSTM_W], vars[LSTM_B], cfg.hidden_dim);
        }
        let out = tape.matmul(h, vars[OUT_W]);
        tape.add_row(out, vars[OUT_B])
    }

    /// Scores sequences given as per-step probability vectors.
    pub fn scores(&self, batch: &[Vec<Vec<f64>>]) -> Result<Vec<f64>> {
        if batch.is_empty() {
            return Ok(Vec::new());
        }
        let (n, len) = (self.config.num_nodes, batch[0].len());
        let mut steps = vec![Mat::zeros(batch.len(), n); len];
        for (r, seq) in batch.iter().enumerate() {
            if seq.len() != len || seq.is_empty() {
                return Err(Error::Shape(format!(
                    "sequence {r} has {} steps, expected {len}",
                    seq.len()
                )));
            }
            for (step, v) in seq.iter().enumerate() {
                if v.len() != n {
                    return Err(Error::Shape(format!(
                        "sequence {r} step {step} has length {}, expected {n}",
                        v.len()
                    )));
                }
                steps[step].row_mut(r).copy_from_slice(v);
            }
        }
        Ok(self.score_steps(&steps))
    }

    pub fn score_steps(&self, steps: &[Mat]) -> Vec<f64> {
        let mut tape = Tape::new();
        let vars = self.params.load(&mut tape, false);
        let inputs: Vec<Var> = steps.iter().map(|m| tape.constant(m.clone())).collect();
        let out = self.forward(&mut tape, &vars, &inputs);
        tape.value(out).data.clone()
    }
}
