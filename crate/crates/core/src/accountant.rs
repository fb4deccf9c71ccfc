//! Moments accountant for the subsampled Gaussian mechanism.
//!
//! For a step that touches each record with probability `q` and adds
//! `N(0, σ²)` noise to a sensitivity-1 sum, the log-moment of order `λ` is
//!
//! ```text
//! α(λ) = log Σ_{k=0}^{λ+1} C(λ+1, k) q^k (1-q)^{λ+1-k} exp(k(k-1) / 2σ²)
//! ```
//!
//! Log-moments add across steps, and `(ε, δ)` follow from the tail bound
//! `δ = min_λ exp(α_T(λ) - λε)`.

use serde::{Deserialize, Serialize};

/// Default moment orders `1..=64`.
pub fn default_orders() -> Vec<u32> {
    (1..=64).collect()
}

fn ln_binomial(n: u32, k: u32) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Log-moment of one subsampled Gaussian step at integer order `order`.
///
/// Returns `f64::INFINITY` for `sigma == 0` when data is touched.
pub fn single_step_log_moment(q: f64, sigma: f64, order: u32) -> f64 {
    assert!((0.0..=1.0).contains(&q), "sampling rate {q} outside [0, 1]");
    assert!(order >= 1, "moment order must be positive");
    if q == 0.0 {
        return 0.0;
    }
    if sigma == 0.0 {
        return f64::INFINITY;
    }
    let n = order + 1;
    if q == 1.0 {
        return f64::from(order) * f64::from(n) / (2.0 * sigma * sigma);
    }
    let (ln_q, ln_1mq) = (q.ln(), (-q).ln_1p());
    let terms: Vec<f64> = (0..=n)
        .map(|k| {
            let kf = f64::from(k);
            ln_binomial(n, k) + kf * ln_q + f64::from(n - k) * ln_1mq + kf * (kf - 1.0) / (2.0 * sigma * sigma)
        })
        .collect();
    // the sum is at least 1 analytically; rounding can push it a hair below
    log_sum_exp(&terms).max(0.0)
}

/// Accumulated privacy loss of a training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyLedger {
    sampling_rate: f64,
    noise_scale: f64,
    steps: u64,
    orders: Vec<u32>,
    per_step: Vec<f64>,
    log_moments: Vec<f64>,
}

impl PrivacyLedger {
    pub fn new(sampling_rate: f64, noise_scale: f64) -> Self {
        Self::with_orders(sampling_rate, noise_scale, default_orders())
    }

    pub fn with_orders(sampling_rate: f64, noise_scale: f64, orders: Vec<u32>) -> Self {
        assert!(!orders.is_empty(), "at least one moment order is required");
        assert!(noise_scale >= 0.0, "noise scale must be nonnegative");
        let per_step: Vec<f64> = orders
            .iter()
            .map(|&l| single_step_log_moment(sampling_rate, noise_scale, l))
            .collect();
        PrivacyLedger {
            sampling_rate,
            noise_scale,
            steps: 0,
            log_moments: vec![0.0; orders.len()],
            orders,
            per_step,
        }
    }

    /// Rebuilds the ledger of a run from its stored `(q, σ, T)`.
    pub fn recompute(sampling_rate: f64, noise_scale: f64, steps: u64, orders: Vec<u32>) -> Self {
        let mut ledger = Self::with_orders(sampling_rate, noise_scale, orders);
        ledger.advance(steps);
        ledger
    }

    pub fn sampling_rate(&self) -> f64 {
        self.sampling_rate
    }

    pub fn noise_scale(&self) -> f64 {
        self.noise_scale
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    pub fn log_moments(&self) -> &[f64] {
        &self.log_moments
    }

    /// Composes `num_steps` further identical steps.
    pub fn advance(&mut self, num_steps: u64) {
        if num_steps == 0 {
            return;
        }
        self.steps += num_steps;
        let t = self.steps as f64;
        // T·α rather than repeated addition keeps composition exactly additive
        for (acc, &step) in self.log_moments.iter_mut().zip(&self.per_step) {
            *acc = if step == 0.0 { 0.0 } else { t * step };
        }
    }

    /// Smallest ε over the order set, with the minimizing order.
    pub fn epsilon_with_order(&self, delta: f64) -> (f64, Option<u32>) {
        assert!(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
        if self.steps == 0 || self.sampling_rate == 0.0 {
            return (0.0, None);
        }
        let ln_inv_delta = -delta.ln();
        self.orders
            .iter()
            .zip(&self.log_moments)
            .map(|(&l, &a)| ((a + ln_inv_delta) / f64::from(l), Some(l)))
            .fold(
                (f64::INFINITY, None),
                |best, cand| if cand.0 < best.0 { cand } else { best },
            )
    }

    pub fn epsilon_for_delta(&self, delta: f64) -> f64 {
        self.epsilon_with_order(delta).0
    }

    /// Smallest δ over the order set, clamped to `[0, 1]`, with the minimizing order.
    pub fn delta_with_order(&self, epsilon: f64) -> (f64, Option<u32>) {
        assert!(epsilon > 0.0, "epsilon must be positive");
        if self.steps == 0 || self.sampling_rate == 0.0 {
            return (0.0, None);
        }
        let (delta, order) = self
            .orders
            .iter()
            .zip(&self.log_moments)
            .map(|(&l, &a)| ((a - f64::from(l) * epsilon).exp(), Some(l)))
            .fold(
                (f64::INFINITY, None),
                |best, cand| if cand.0 < best.0 { cand } else { best },
            );
        (delta.clamp(0.0, 1.0), order)
    }

    pub fn delta_for_epsilon(&self, epsilon: f64) -> f64 {
        self.delta_with_order(epsilon).0
    }
}
