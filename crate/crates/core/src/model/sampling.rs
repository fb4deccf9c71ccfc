//! Straight-through Gumbel categorical sampling.
//!
//! The hard index is `argmax(logits + g)` with `g ~ Gumbel(0, 1)`, which is an
//! exact draw from `softmax(logits)`. The relaxed vector
//! `softmax((logits + g) / τ)` carries the gradient.

use rand::Rng;
use rand_distr::{Distribution, Gumbel};

use crate::tensor::Mat;

#[derive(Clone, Debug, PartialEq)]
pub struct RelaxedSample {
    pub relaxed: Vec<f64>,
    pub index: usize,
}

pub(crate) fn gumbel_noise(rows: usize, cols: usize, rng: &mut impl Rng) -> Mat {
    let dist = Gumbel::new(0.0, 1.0).expect("standard Gumbel parameters are valid");
    Mat::from_vec(rows, cols, (0..rows * cols).map(|_| dist.sample(rng)).collect())
}

pub(crate) fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// One categorical draw with its temperature-relaxed companion vector.
pub fn relaxed_sample_step(logits: &[f64], temperature: f64, rng: &mut impl Rng) -> RelaxedSample {
    assert!(temperature > 0.0, "temperature must be positive");
    let noise = gumbel_noise(1, logits.len(), rng);
    let perturbed: Vec<f64> = logits.iter().zip(&noise.data).map(|(l, g)| l + g).collect();
    let index = argmax(&perturbed);
    let max = perturbed[index];
    let mut relaxed: Vec<f64> = perturbed.iter().map(|p| ((p - max) / temperature).exp()).collect();
    let total: f64 = relaxed.iter().sum();
    relaxed.iter_mut().for_each(|r| *r /= total);
    RelaxedSample { relaxed, index }
}

/// Inverse-CDF draw from `softmax(logits)`; used where no relaxation is needed.
pub(crate) fn categorical(logits: &[f64], rng: &mut impl Rng) -> usize {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    // rounding left u just past the last bucket
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}
