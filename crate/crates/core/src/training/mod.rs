//! Critic and generator updates, the private gradient mechanism, and the
//! checkpointed training loop with early stopping and budget termination.

mod adam;
mod critic;
mod mechanism;
mod steps;
mod trainer;

pub use adam::{Adam, AdamConfig};
pub use critic::{critic_gradient, critic_loss, per_example_gradients, score_input_gradients, CriticBatch, CriticLoss};
pub use mechanism::{clip_per_example, noisy_aggregate, noisy_sum};
pub use steps::{critic_step, generator_loss, generator_step, CriticRecord, TrainState};
pub use trainer::{train, CheckpointRecord, EarlyStopping, StopReason, TrainHistory, TrainOptions, TrainOutcome};

use serde::{Deserialize, Serialize};

use crate::accountant::PrivacyLedger;
use crate::error::{Error, Result};

/// Adversarial training hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GanConfig {
    pub lambda_gp: f64,
    pub n_critic: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    /// Epochs between validation checkpoints.
    pub checkpoint_epochs: usize,
    /// Checkpoints without improvement before stopping.
    pub patience: usize,
    pub max_epochs: usize,
}

impl Default for GanConfig {
    fn default() -> Self {
        GanConfig {
            lambda_gp: 10.0,
            n_critic: 3,
            batch_size: 2048,
            adam: AdamConfig::default(),
            checkpoint_epochs: 5,
            patience: 5,
            max_epochs: 500,
        }
    }
}

impl GanConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.lambda_gp >= 0.0 && self.lambda_gp.is_finite()) {
            return bad(format!(
                "gan.lambda_gp must be a nonnegative real, got {}",
                self.lambda_gp
            ));
        }
        for (name, v) in [
            ("n_critic", self.n_critic),
            ("batch_size", self.batch_size),
            ("checkpoint_epochs", self.checkpoint_epochs),
            ("patience", self.patience),
            ("max_epochs", self.max_epochs),
        ] {
            if v == 0 {
                return bad(format!("gan.{name} must be at least 1"));
            }
        }
        self.adam.validate()
    }
}

/// How real batches are drawn, which fixes the accountant's sampling model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Exactly `batch_size` distinct edges per step.
    FixedSize,
    /// Each edge independently with probability `batch_size / |E|`.
    Poisson,
}

/// Which budget query ends training.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopConvention {
    /// Stop once `ε(δ0) > ε0`.
    EpsilonAtDelta,
    /// Stop once `δ(ε0) > δ0`.
    DeltaAtEpsilon,
}

/// Differential privacy settings for the critic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DpConfig {
    pub enabled: bool,
    pub clip_bound: f64,
    pub noise_scale: f64,
    pub target_delta: f64,
    /// `None` leaves ε unbounded: the loss is tracked but never stops training.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_epsilon: Option<f64>,
    pub sampling: Sampling,
    pub stop_convention: StopConvention,
}

impl Default for DpConfig {
    fn default() -> Self {
        DpConfig {
            enabled: true,
            clip_bound: 1.0,
            noise_scale: 1.0,
            target_delta: 1e-5,
            target_epsilon: None,
            sampling: Sampling::FixedSize,
            stop_convention: StopConvention::EpsilonAtDelta,
        }
    }
}

impl DpConfig {
    pub fn disabled() -> Self {
        DpConfig {
            enabled: false,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.enabled && !(self.clip_bound > 0.0) {
            return bad(format!("dp.clip_bound must be positive, got {}", self.clip_bound));
        }
        if !(self.noise_scale >= 0.0) {
            return bad(format!("dp.noise_scale must be nonnegative, got {}", self.noise_scale));
        }
        if !(self.target_delta > 0.0 && self.target_delta < 1.0) {
            return bad(format!("dp.target_delta must lie in (0, 1), got {}", self.target_delta));
        }
        if let Some(e) = self.target_epsilon {
            if !(e > 0.0) {
                return bad(format!("dp.target_epsilon must be positive, got {e}"));
            }
        }
        Ok(())
    }

    /// Privacy loss at `target_delta`; infinite when the mechanism is off.
    pub fn epsilon(&self, ledger: &PrivacyLedger) -> f64 {
        if self.enabled {
            ledger.epsilon_for_delta(self.target_delta)
        } else {
            f64::INFINITY
        }
    }

    /// True once the ledger has spent more than the configured budget.
    pub fn budget_exceeded(&self, ledger: &PrivacyLedger) -> bool {
        let Some(eps0) = self.target_epsilon.filter(|_| self.enabled) else {
            return false;
        };
        match self.stop_convention {
            StopConvention::EpsilonAtDelta => ledger.epsilon_for_delta(self.target_delta) > eps0,
            StopConvention::DeltaAtEpsilon => ledger.delta_for_epsilon(eps0) > self.target_delta,
        }
    }
}

/// Source of real training sequences.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Uniformly sampled edges, length-2 sequences.
    Edge,
    /// Uniform random walks of the model's sequence length.
    Walk,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        assert!(GanConfig::default().validate().is_ok());
        assert!(DpConfig::default().validate().is_ok());
        let bad = GanConfig {
            n_critic: 0,
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
        let bad = DpConfig {
            clip_bound: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let off = DpConfig {
            clip_bound: 0.0,
            ..DpConfig::disabled()
        };
        assert!(off.validate().is_ok());
    }

    #[test]
    fn budget_conventions() {
        let mut ledger = PrivacyLedger::new(1.0, 1.0);
        ledger.advance(1);
        // ε(1e-5) ≈ 5.3026 for this ledger
        let mut dp = DpConfig {
            target_epsilon: Some(5.0),
            ..Default::default()
        };
        assert!(dp.budget_exceeded(&ledger));
        dp.target_epsilon = Some(5.5);
        assert!(!dp.budget_exceeded(&ledger));
        dp.stop_convention = StopConvention::DeltaAtEpsilon;
        assert!(!dp.budget_exceeded(&ledger));
        dp.target_epsilon = Some(5.0);
        assert!(dp.budget_exceeded(&ledger));
        dp.target_epsilon = None;
        assert!(!dp.budget_exceeded(&ledger));
        assert_eq!(DpConfig::disabled().epsilon(&ledger), f64::INFINITY);
    }
}
