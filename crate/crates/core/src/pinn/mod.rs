//! Physics-informed network for the EHD problem: a dense MLP whose output
//! jet `(v̂, v̂', v̂'')` is fed into the strong-form residual, trained with
//! full-batch Adamax.

mod adamax;
mod loss;
mod network;
mod train;

use serde::{Deserialize, Serialize};

pub use adamax::{AdamaxConfig, AdamaxState};
pub use loss::{collocation_grid, physics_loss, LossBreakdown, PhysicsLoss};
pub use network::{
    glorot_normal_init, glorot_std_dev, LossEvaluation, Network, PointLoss, Tape, SITE_CHUNK,
};
pub use train::{
    initial_network, train, train_with, LossRecord, TrainingStatus, TrainingTrace,
    DIVERGENCE_LIMIT, RECORD_STRIDE,
};

use crate::autodiff::ActivationKind;
use crate::error::{Error, Result};

/// Hyperparameters of one training run. Defaults are the best setting
/// found by the sensitivity study: 100 points, 2×16 sigmoid, lr 0.001,
/// 25 000 epochs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkConfig {
    pub n_points: usize,
    pub hidden_layers: usize,
    pub neurons_per_layer: usize,
    pub activation: ActivationKind,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub adamax: AdamaxConfig,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            n_points: 100,
            hidden_layers: 2,
            neurons_per_layer: 16,
            activation: ActivationKind::Sigmoid,
            learning_rate: 0.001,
            epochs: 25_000,
            seed: 0,
            adamax: AdamaxConfig::default(),
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n_points < 2 {
            return bad(format!(
                "n_points must be at least 2, got {}",
                self.n_points
            ));
        }
        if self.hidden_layers == 0 || self.neurons_per_layer == 0 {
            return bad("network needs at least one hidden layer and one neuron".into());
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            ));
        }
        let a = &self.adamax;
        if !(a.beta1 > 0.0 && a.beta1 < 1.0 && a.beta2 > 0.0 && a.beta2 < 1.0) {
            return bad(format!(
                "Adamax betas must lie in (0, 1), got {} and {}",
                a.beta1, a.beta2
            ));
        }
        if !(a.epsilon > 0.0) {
            return bad(format!(
                "Adamax epsilon must be positive, got {}",
                a.epsilon
            ));
        }
        Ok(())
    }

    /// Trainable parameter count of the configured architecture.
    pub fn parameter_count(&self) -> usize {
        let w = Network::architecture(self.hidden_layers, self.neurons_per_layer);
        w.windows(2).map(|p| p[0] * p[1] + p[1]).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_optimum() {
        let c = NetworkConfig::default();
        assert_eq!(
            (c.n_points, c.hidden_layers, c.neurons_per_layer),
            (100, 2, 16)
        );
        assert_eq!(c.activation, ActivationKind::Sigmoid);
        assert_eq!((c.learning_rate, c.epochs), (0.001, 25_000));
        assert_eq!(c.parameter_count(), 321);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn validation() {
        let base = NetworkConfig::default();
        let mut c = base.clone();
        c.adamax.beta1 = 1.0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.adamax.epsilon = 0.0;
        assert!(c.validate().is_err());
        let c = NetworkConfig {
            n_points: 1,
            ..base.clone()
        };
        assert!(c.validate().is_err());
        let c = NetworkConfig {
            hidden_layers: 0,
            ..base
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn partial_json_uses_defaults() {
        let c: NetworkConfig =
            serde_json::from_str(r#"{"epochs": 10, "activation": "tanh"}"#).unwrap();
        assert_eq!(c.epochs, 10);
        assert_eq!(c.activation, ActivationKind::Tanh);
        assert_eq!(c.n_points, 100);
    }
}
