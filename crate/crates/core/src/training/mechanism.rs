//! Per-example clipping and the Gaussian mechanism on the clipped sum.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::tensor::l2_norm;

/// `g / max(1, ‖g‖₂ / C)`.
pub fn clip_per_example(grad: &[f64], clip_bound: f64) -> Result<Vec<f64>> {
    if !(clip_bound > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "clip bound must be positive, got {clip_bound}"
        )));
    }
    if grad.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("cannot clip a non-finite gradient".into()));
    }
    let scale = (l2_norm(grad) / clip_bound).max(1.0);
    Ok(grad.iter().map(|g| g / scale).collect())
}

/// `Σ g_i + ξ` with `ξ ~ N(0, (σC)² I)`, drawn once for the whole sum.
///
/// Each `g_i` must already be clipped to norm `C`. `dim` is needed because
/// a Poisson batch may be empty.
pub fn noisy_sum(
    clipped: &[Vec<f64>],
    dim: usize,
    sigma: f64,
    clip_bound: f64,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    let mut sum = vec![0.0; dim];
    for g in clipped {
        if g.len() != dim {
            return Err(Error::Shape(format!(
                "gradient of length {} among length {dim}",
                g.len()
            )));
        }
        let norm = l2_norm(g);
        if norm > clip_bound + 1e-9 {
            return Err(Error::ClipViolation {
                norm,
                bound: clip_bound,
            });
        }
        for (s, x) in sum.iter_mut().zip(g) {
            *s += x;
        }
    }
    let std = sigma * clip_bound;
    if std > 0.0 {
        for s in &mut sum {
            let z: f64 = rng.sample(StandardNormal);
            *s += std * z;
        }
    }
    Ok(sum)
}

/// `(1/m)(Σ g_i + ξ)` over `m` clipped per-example gradients.
pub fn noisy_aggregate(clipped: &[Vec<f64>], sigma: f64, clip_bound: f64, rng: &mut impl Rng) -> Result<Vec<f64>> {
    let Some(first) = clipped.first() else {
        return Err(Error::EmptyInput("no per-example gradients to aggregate".into()));
    };
    let m = clipped.len() as f64;
    let sum = noisy_sum(clipped, first.len(), sigma, clip_bound, rng)?;
    Ok(sum.into_iter().map(|s| s / m).collect())
}
