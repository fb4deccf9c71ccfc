use rand::Rng;
use rand_distr::StandardNormal;

use super::lstm::{cell, cell_plain};
use super::params::{GroupSpec, Init, ParamSet};
use super::sampling::{argmax, categorical, gumbel_noise};
use super::ModelConfig;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, streams};
use crate::tape::{Tape, Var};
use crate::tensor::Mat;

const NOISE_H_W: usize = 0;
const NOISE_H_B: usize = 1;
const NOISE_C_W: usize = 2;
const NOISE_C_B: usize = 3;
const LSTM_W: usize = 4;
const LSTM_B: usize = 5;
const UP_W: usize = 6;
const UP_B: usize = 7;
const DOWN_W: usize = 8;

/// Samples per independently seeded generation shard.
const SHARD: usize = 1024;

/// Generator parameters.
///
/// The initial LSTM state is an affine map of the noise vector squashed by
/// `tanh`. Each step's logits come from an up-projection of the hidden
/// state; the sampled token is down-projected to form the next input.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorState {
    pub config: ModelConfig,
    pub params: ParamSet,
}

/// Randomness consumed by one differentiable generator pass.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorDraw {
    /// `m × noise_dim` standard normal.
    pub noise: Mat,
    /// One `m × num_nodes` Gumbel matrix per sequence step.
    pub gumbel: Vec<Mat>,
}

/// Output of [`GeneratorState::forward`].
pub struct GeneratedBatch {
    /// Per step, an `m × num_nodes` straight-through token matrix: one-hot
    /// values, relaxed gradients.
    pub tokens: Vec<Var>,
    /// Sampled node ids, one sequence per row.
    pub sequences: Vec<Vec<usize>>,
}

impl GeneratorState {
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let (n, z, h, d) = (
            config.num_nodes,
            config.noise_dim,
            config.hidden_dim,
            config.down_projection_dim,
        );
        let groups = [
            (GroupSpec::new("noise_to_hidden.weight", z, h), Init::Glorot),
            (GroupSpec::new("noise_to_hidden.bias", 1, h), Init::Zeros),
            (GroupSpec::new("noise_to_cell.weight", z, h), Init::Glorot),
            (GroupSpec::new("noise_to_cell.bias", 1, h), Init::Zeros),
            (GroupSpec::new("lstm.weight", d + h, 4 * h), Init::Glorot),
            (GroupSpec::new("lstm.bias", 1, 4 * h), Init::Zeros),
            (GroupSpec::new("up_projection.weight", h, n), Init::Glorot),
            (GroupSpec::new("up_projection.bias", 1, n), Init::Zeros),
            (GroupSpec::new("down_projection.weight", n, d), Init::Glorot),
        ];
        let params = ParamSet::initialize(&groups, &mut stream_rng(seed, streams::INIT));
        Ok(GeneratorState { config, params })
    }

    pub fn from_params(config: ModelConfig, params: ParamSet) -> Result<Self> {
        let template = GeneratorState::new(config.clone(), 0)?;
        if template.params.specs() != params.specs() {
            return Err(Error::Shape(
                "generator parameter groups do not match the config".into(),
            ));
        }
        Ok(GeneratorState { config, params })
    }

    pub fn num_params(&self) -> usize {
        self.params.num_params()
    }

    pub fn draw(&self, m: usize, rng: &mut impl Rng) -> GeneratorDraw {
        let noise = Mat::from_vec(
            m,
            self.config.noise_dim,
            (0..m * self.config.noise_dim)
                .map(|_| rng.sample(StandardNormal))
                .collect(),
        );
        let gumbel = (0..self.config.sequence_length)
            .map(|_| gumbel_noise(m, self.config.num_nodes, rng))
            .collect();
        GeneratorDraw { noise, gumbel }
    }

    /// Differentiable pass. `vars` are this generator's groups loaded on `tape`.
    pub fn forward(&self, tape: &mut Tape, vars: &[Var], draw: &GeneratorDraw) -> GeneratedBatch {
        let cfg = &self.config;
        let m = draw.noise.rows;
        let z = tape.constant(draw.noise.clone());
        let h0 = tape.matmul(z, vars[NOISE_H_W]);
        let h0 = tape.add_row(h0, vars[NOISE_H_B]);
        let mut h = tape.tanh(h0);
        let c0 = tape.matmul(z, vars[NOISE_C_W]);
        let c0 = tape.add_row(c0, vars[NOISE_C_B]);
        let mut c = tape.tanh(c0);
        let mut x = tape.constant(Mat::zeros(m, cfg.down_projection_dim));

        let mut tokens = Vec::with_capacity(cfg.sequence_length);
        let mut sequences = vec![Vec::with_capacity(cfg.sequence_length); m];
        for step in 0..cfg.sequence_length {
            (h, c) = cell(tape, x, h, c, vars[LSTM_W], vars[LSTM_B], cfg.hidden_dim);
            let logits = tape.matmul(h, vars[UP_W]);
            let logits = tape.add_row(logits, vars[UP_B]);
            let g = tape.constant(draw.gumbel[step].clone());
            let perturbed = tape.add(logits, g);
            let pv = tape.value(perturbed);
            let hard: Vec<usize> = (0..m).map(|r| argmax(pv.row(r))).collect();
            let scaled = tape.scale(perturbed, 1.0 / cfg.temperature);
            let relaxed = tape.softmax_rows(scaled);
            let token = tape.straight_through(relaxed, Mat::one_hot(&hard, cfg.num_nodes));
            for (seq, &id) in sequences.iter_mut().zip(&hard) {
                seq.push(id);
            }
            tokens.push(token);
            x = tape.matmul(token, vars[DOWN_W]);
        }
        GeneratedBatch { tokens, sequences }
    }

    /// Draws `m` sequences without building a tape.
    pub fn sample(&self, m: usize, rng: &mut impl Rng) -> Result<Vec<Vec<usize>>> {
        self.params.check_finite()?;
        let cfg = &self.config;
        let p = &self.params;
        let noise = Mat::from_vec(
            m,
            cfg.noise_dim,
            (0..m * cfg.noise_dim).map(|_| rng.sample(StandardNormal)).collect(),
        );
        let affine_tanh = |w: usize, b: usize| {
            let mut out = Mat::matmul(&noise, false, &p.mat(w), false);
            let bias = p.group(b);
            for r in 0..m {
                for (o, bb) in out.row_mut(r).iter_mut().zip(bias) {
                    *o = (*o + bb).tanh();
                }
            }
            out
        };
        let mut h = affine_tanh(NOISE_H_W, NOISE_H_B);
        let mut c = affine_tanh(NOISE_C_W, NOISE_C_B);
        let lstm_w = p.mat(LSTM_W);
        let lstm_b = p.mat(LSTM_B);
        let up_w = p.mat(UP_W);
        let up_b = p.group(UP_B);
        let down = p.mat(DOWN_W);
        let d = cfg.down_projection_dim;
        let mut x = Mat::zeros(m, d);
        let mut sequences = vec![Vec::with_capacity(cfg.sequence_length); m];
        for _ in 0..cfg.sequence_length {
            (h, c) = cell_plain(&x, &h, &c, &lstm_w, &lstm_b, cfg.hidden_dim);
            let mut logits = Mat::matmul(&h, false, &up_w, false);
            for r in 0..m {
                for (l, b) in logits.row_mut(r).iter_mut().zip(up_b) {
                    *l += b;
                }
            }
            if !logits.is_finite() {
                return Err(Error::NonFinite(self.params.specs()[UP_W].name.clone()));
            }
            for (r, seq) in sequences.iter_mut().enumerate() {
                let id = categorical(logits.row(r), rng);
                seq.push(id);
                x.row_mut(r).copy_from_slice(down.row(id));
            }
        }
        Ok(sequences)
    }
}

/// Generates `count` sequences in fixed-size shards, shard `k` seeded by
/// `(seed, k)`, so the result depends only on `(gen, count, seed)`.
pub fn generate_samples(gen: &GeneratorState, count: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::with_capacity(count);
    let mut shard = 0u64;
    while out.len() < count {
        let m = SHARD.min(count - out.len());
        let mut rng = stream_rng(seed, streams::GENERATE ^ shard);
        out.extend(gen.sample(m, &mut rng)?);
        shard += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(n: usize) -> GeneratorState {
        let cfg = ModelConfig {
            num_nodes: n,
            noise_dim: 4,
            hidden_dim: 6,
            down_projection_dim: 5,
            ..Default::default()
        };
        GeneratorState::new(cfg, 3).unwrap()
    }

    #[test]
    fn parameter_count() {
        let g = small(10);
        let (n, z, h, d) = (10, 4, 6, 5);
        let expected = 2 * (z * h + h) + (d + h) * 4 * h + 4 * h + h * n + n + n * d;
        assert_eq!(g.num_params(), expected);
        let declared: usize = g.params.specs().iter().map(|s| s.len()).sum();
        assert_eq!(declared, expected);
    }

    #[test]
    fn zero_samples() {
        assert!(generate_samples(&small(5), 0, 1).unwrap().is_empty());
    }

    #[test]
    fn ids_in_range_and_deterministic() {
        let g = small(7);
        let a = generate_samples(&g, 100_000, 9).unwrap();
        assert_eq!(a.len(), 100_000);
        assert!(a.iter().all(|s| s.len() == 2 && s.iter().all(|&id| id < 7)));
        // shards are independent, so whole-shard prefixes agree
        assert_eq!(a[..3072], generate_samples(&g, 3072, 9).unwrap()[..]);
        assert_ne!(a[..3000], generate_samples(&g, 3000, 10).unwrap()[..]);
    }

    #[test]
    fn non_finite_parameters_are_named() {
        let mut g = small(4);
        let last = g.params.num_params() - 1;
        g.params.values_mut()[last] = f64::INFINITY;
        match generate_samples(&g, 3, 0) {
            Err(Error::NonFinite(name)) => assert_eq!(name, "down_projection.weight"),
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }

    #[test]
    fn tape_forward_emits_one_hot_tokens() {
        let g = small(6);
        let mut rng = stream_rng(0, 0);
        let draw = g.draw(5, &mut rng);
        let mut tape = Tape::new();
        let vars = g.params.load(&mut tape, true);
        let out = g.forward(&mut tape, &vars, &draw);
        assert_eq!(out.tokens.len(), 2);
        for (step, &tok) in out.tokens.iter().enumerate() {
            let v = tape.value(tok);
            for r in 0..5 {
                assert_eq!(v.row(r)[out.sequences[r][step]], 1.0);
                assert_eq!(v.row(r).iter().sum::<f64>(), 1.0);
            }
        }
    }

    #[test]
    fn walk_mode_lengths() {
        let cfg = ModelConfig {
            sequence_length: 5,
            ..ModelConfig::for_nodes(8)
        };
        let g = GeneratorState::new(cfg, 0).unwrap();
        assert!(generate_samples(&g, 10, 0).unwrap().iter().all(|s| s.len() == 5));
    }
}
