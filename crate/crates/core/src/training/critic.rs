//! The critic objective `D(G(z)) − D(x) + λ(‖∇_x̂ D(x̂)‖₂ − 1)²`.

use crate::error::{Error, Result};
use crate::model::DiscriminatorState;
use crate::tape::{Tape, Var};
use crate::tensor::Mat;

/// Keeps the penalty's square root differentiable at a zero gradient.
const NORM_FLOOR: f64 = 1e-12;

/// One critic batch in probability-vector form: per sequence step an
/// `m × num_nodes` matrix for real and for generated rows, plus each row's
/// interpolation coefficient `ρ`.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticBatch {
    pub real: Vec<Mat>,
    pub fake: Vec<Mat>,
    pub rho: Vec<f64>,
}

impl CriticBatch {
    pub fn new(real: Vec<Mat>, fake: Vec<Mat>, rho: Vec<f64>) -> Result<Self> {
        let m = rho.len();
        if real.is_empty() || real.len() != fake.len() {
            return Err(Error::Shape(format!(
                "real batch has {} steps, generated batch {}",
                real.len(),
                fake.len()
            )));
        }
        let shape = (m, real[0].cols);
        if real.iter().chain(&fake).any(|s| s.shape() != shape) {
            return Err(Error::Shape(format!("every step must be {}x{}", shape.0, shape.1)));
        }
        Ok(CriticBatch { real, fake, rho })
    }

    /// One-hot encodes node-id sequences.
    pub fn from_sequences(real: &[Vec<usize>], fake: &[Vec<usize>], rho: Vec<f64>, num_nodes: usize) -> Result<Self> {
        let len = real.first().map_or(0, Vec::len);
        let encode = |seqs: &[Vec<usize>]| -> Vec<Mat> {
            (0..len)
                .map(|s| Mat::one_hot(&seqs.iter().map(|q| q[s]).collect::<Vec<_>>(), num_nodes))
                .collect()
        };
        if real.len() != fake.len() || real.iter().chain(fake).any(|q| q.len() != len) {
            return Err(Error::Shape(
                "real and generated sequences must match in count and length".into(),
            ));
        }
        Self::new(encode(real), encode(fake), rho)
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// Row `i` as a batch of one.
    pub fn example(&self, i: usize) -> CriticBatch {
        let pick = |steps: &[Mat]| -> Vec<Mat> {
            steps
                .iter()
                .map(|s| Mat::from_vec(1, s.cols, s.row(i).to_vec()))
                .collect()
        };
        CriticBatch {
            real: pick(&self.real),
            fake: pick(&self.fake),
            rho: vec![self.rho[i]],
        }
    }

    /// `x̂ = ρ x + (1 − ρ) G(z)` row by row.
    pub fn interpolates(&self) -> Vec<Mat> {
        self.real
            .iter()
            .zip(&self.fake)
            .map(|(x, f)| {
                let mut out = x.clone();
                for (r, &rho) in self.rho.iter().enumerate() {
                    for (o, fv) in out.row_mut(r).iter_mut().zip(f.row(r)) {
                        *o = rho * *o + (1.0 - rho) * fv;
                    }
                }
                out
            })
            .collect()
    }
}

/// Loss value with its per-example decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticLoss {
    /// Mean of `per_example`.
    pub loss: f64,
    pub per_example: Vec<f64>,
    /// `(‖∇_x̂ D‖ − 1)²` per example, before scaling by λ; zeros when λ = 0.
    pub penalty: Vec<f64>,
}

struct Built {
    loss: Var,
    per_example: Var,
    penalty: Option<Var>,
}

fn build(tape: &mut Tape, disc: &DiscriminatorState, vars: &[Var], batch: &CriticBatch, lambda: f64) -> Built {
    let m = batch.len();
    let real: Vec<Var> = batch.real.iter().map(|s| tape.constant(s.clone())).collect();
    let fake: Vec<Var> = batch.fake.iter().map(|s| tape.constant(s.clone())).collect();
    let d_real = disc.forward(tape, vars, &real);
    let d_fake = disc.forward(tape, vars, &fake);
    let mut per_example = tape.sub(d_fake, d_real);
    let mut penalty = None;
    if lambda != 0.0 {
        let xhat: Vec<Var> = batch.interpolates().into_iter().map(|s| tape.variable(s)).collect();
        let d_hat = disc.forward(tape, vars, &xhat);
        let total = tape.sum(d_hat);
        // rows are independent, so the gradient of the sum holds each row's own gradient
        let grads = tape.grad(total, &xhat);
        let mut sq = tape.constant(Mat::zeros(m, 1));
        for g in grads.into_iter().flatten() {
            let g2 = tape.mul(g, g);
            let row = tape.sum_cols(g2);
            sq = tape.add(sq, row);
        }
        let sq = tape.offset(sq, NORM_FLOOR);
        let norm = tape.sqrt(sq);
        let gap = tape.offset(norm, -1.0);
        let pen = tape.mul(gap, gap);
        let weighted = tape.scale(pen, lambda);
        per_example = tape.add(per_example, weighted);
        penalty = Some(pen);
    }
    let total = tape.sum(per_example);
    let loss = tape.scale(total, 1.0 / m as f64);
    Built {
        loss,
        per_example,
        penalty,
    }
}

fn read(tape: &Tape, built: &Built, m: usize) -> CriticLoss {
    CriticLoss {
        loss: tape.value(built.loss).item(),
        per_example: tape.value(built.per_example).data.clone(),
        penalty: built
            .penalty
            .map_or_else(|| vec![0.0; m], |p| tape.value(p).data.clone()),
    }
}

/// Evaluates the critic objective without parameter gradients.
pub fn critic_loss(disc: &DiscriminatorState, batch: &CriticBatch, lambda: f64) -> CriticLoss {
    let mut tape = Tape::new();
    let vars = disc.params.load(&mut tape, false);
    let built = build(&mut tape, disc, &vars, batch, lambda);
    read(&tape, &built, batch.len())
}

/// Gradient of the mean loss over the whole batch in one pass.
pub fn critic_gradient(disc: &DiscriminatorState, batch: &CriticBatch, lambda: f64) -> (CriticLoss, Vec<f64>) {
    let mut tape = Tape::new();
    let vars = disc.params.load(&mut tape, true);
    let built = build(&mut tape, disc, &vars, batch, lambda);
    let grads = tape.grad(built.loss, &vars);
    let flat = disc.params.flatten_grads(&tape, &grads);
    (read(&tape, &built, batch.len()), flat)
}

/// One backward pass per example; entry `i` is the gradient of `l⁽ⁱ⁾`.
pub fn per_example_gradients(
    disc: &DiscriminatorState,
    batch: &CriticBatch,
    lambda: f64,
) -> (CriticLoss, Vec<Vec<f64>>) {
    let mut losses = CriticLoss {
        loss: 0.0,
        per_example: Vec::with_capacity(batch.len()),
        penalty: Vec::with_capacity(batch.len()),
    };
    let mut grads = Vec::with_capacity(batch.len());
    for i in 0..batch.len() {
        let (l, g) = critic_gradient(disc, &batch.example(i), lambda);
        losses.per_example.push(l.loss);
        losses.penalty.push(l.penalty[0]);
        grads.push(g);
    }
    if !batch.is_empty() {
        losses.loss = losses.per_example.iter().sum::<f64>() / batch.len() as f64;
    }
    (losses, grads)
}

/// Gradient of `Σ_rows D(x)` with respect to each step's input matrix.
pub fn score_input_gradients(disc: &DiscriminatorState, steps: &[Mat]) -> Vec<Mat> {
    let mut tape = Tape::new();
    let vars = disc.params.load(&mut tape, false);
    let inputs: Vec<Var> = steps.iter().map(|s| tape.variable(s.clone())).collect();
    let scores = disc.forward(&mut tape, &vars, &inputs);
    let total = tape.sum(scores);
    let grads = tape.grad(total, &inputs);
    grads
        .into_iter()
        .zip(steps)
        .map(|(g, s)| g.map_or_else(|| Mat::zeros(s.rows, s.cols), |g| tape.value(g).clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelConfig;
    use crate::rng::stream_rng;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn disc(n: usize, seed: u64) -> DiscriminatorState {
        let cfg = ModelConfig {
            num_nodes: n,
            hidden_dim: 5,
            down_projection_dim: 4,
            ..Default::default()
        };
        DiscriminatorState::new(cfg, seed).unwrap()
    }

    fn random_batch(n: usize, m: usize, seed: u64) -> CriticBatch {
        let mut rng = stream_rng(seed, 0);
        let seqs = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<Vec<usize>> {
            (0..m)
                .map(|_| vec![rng.random_range(0..n), rng.random_range(0..n)])
                .collect()
        };
        let real = seqs(&mut rng);
        let fake = seqs(&mut rng);
        let rho = (0..m).map(|_| rng.random()).collect();
        CriticBatch::from_sequences(&real, &fake, rho, n).unwrap()
    }

    #[test]
    fn zero_lambda_is_mean_score_gap() {
        let d = disc(6, 1);
        let b = random_batch(6, 5, 2);
        let l = critic_loss(&d, &b, 0.0);
        let fake = d.score_steps(&b.fake);
        let real = d.score_steps(&b.real);
        let expect = fake.iter().sum::<f64>() / 5.0 - real.iter().sum::<f64>() / 5.0;
        assert_relative_eq!(l.loss, expect, epsilon = 1e-12);
        assert!(l.penalty.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn penalty_matches_measured_input_gradient() {
        let d = disc(4, 3);
        let b = random_batch(4, 3, 4);
        let l = critic_loss(&d, &b, 1.0);
        let g = score_input_gradients(&d, &b.interpolates());
        for r in 0..3 {
            let sq: f64 = g.iter().map(|s| s.row(r).iter().map(|x| x * x).sum::<f64>()).sum();
            let expect = ((sq + NORM_FLOOR).sqrt() - 1.0).powi(2);
            assert_relative_eq!(l.penalty[r], expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn unit_norm_gradient_has_no_penalty() {
        // the score is linear in the output weights, so rescaling them
        // rescales the input gradient to norm one
        let mut d = disc(4, 5);
        let b = random_batch(4, 1, 6);
        let g = score_input_gradients(&d, &b.interpolates());
        let norm = g
            .iter()
            .map(|s| s.data.iter().map(|x| x * x).sum::<f64>())
            .sum::<f64>()
            .sqrt();
        let out_w = d.params.specs().iter().position(|s| s.name == "output.weight").unwrap();
        let start: usize = d.params.specs()[..out_w].iter().map(|s| s.len()).sum();
        for v in &mut d.params.values_mut()[start..start + 5] {
            *v /= norm;
        }
        let l = critic_loss(&d, &b, 10.0);
        assert!(l.penalty[0] < 1e-20, "penalty {}", l.penalty[0]);
    }

    #[test]
    fn per_example_gradients_average_to_batch_gradient() {
        let d = disc(5, 7);
        let b = random_batch(5, 6, 8);
        let (bl, batch_grad) = critic_gradient(&d, &b, 10.0);
        let (pl, per) = per_example_gradients(&d, &b, 10.0);
        assert_relative_eq!(bl.loss, pl.loss, epsilon = 1e-12);
        for (k, g) in batch_grad.iter().enumerate() {
            let mean = per.iter().map(|p| p[k]).sum::<f64>() / 6.0;
            assert_relative_eq!(*g, mean, epsilon = 1e-12, max_relative = 1e-10);
        }
    }

    #[test]
    fn parameter_gradient_matches_finite_differences() {
        let d = disc(4, 11);
        let b = random_batch(4, 3, 12);
        let (_, grad) = critic_gradient(&d, &b, 10.0);
        let h = 1e-5;
        for k in (0..d.num_params()).step_by(17) {
            let mut plus = d.clone();
            plus.params.values_mut()[k] += h;
            let mut minus = d.clone();
            minus.params.values_mut()[k] -= h;
            let fd = (critic_loss(&plus, &b, 10.0).loss - critic_loss(&minus, &b, 10.0).loss) / (2.0 * h);
            assert!(
                (fd - grad[k]).abs() <= 1e-3 * fd.abs().max(grad[k].abs()).max(1e-6),
                "param {k}: analytic {} vs fd {fd}",
                grad[k]
            );
        }
    }

    #[test]
    fn batch_shape_checks() {
        assert!(CriticBatch::from_sequences(&[vec![0, 1]], &[vec![0]], vec![0.5], 3).is_err());
        assert!(CriticBatch::new(vec![Mat::zeros(2, 3)], vec![Mat::zeros(2, 4)], vec![0.1, 0.2]).is_err());
    }
}
