use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adamax::AdamaxState;
use super::loss::{collocation_grid, LossBreakdown, PhysicsLoss};
use super::network::Network;
use super::NetworkConfig;
use crate::error::Result;
use crate::model::ModelParams;
use crate::par::Execution;

/// Loss is recorded every this many epochs, plus at the final epoch.
pub const RECORD_STRIDE: usize = 100;

/// A total loss above this counts as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub epoch: usize,
    pub loss: LossBreakdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TrainingStatus {
    Completed,
    Diverged { epoch: usize, reason: String },
}

#[derive(Debug, Clone)]
pub struct TrainingTrace {
    pub records: Vec<LossRecord>,
    pub network: Network,
    pub status: TrainingStatus,
    pub duration: Duration,
}

impl TrainingTrace {
    pub fn diverged(&self) -> bool {
        matches!(self.status, TrainingStatus::Diverged { .. })
    }

    /// Last recorded (finite) loss.
    pub fn final_loss(&self) -> Option<&LossBreakdown> {
        self.records.last().map(|r| &r.loss)
    }

    /// Equality of everything but the wall-clock duration.
    pub fn same_run(&self, other: &Self) -> bool {
        self.records == other.records
            && self.network == other.network
            && self.status == other.status
    }
}

/// Initial network for `cfg`, drawn from `cfg.seed`.
pub fn initial_network(cfg: &NetworkConfig) -> Result<Network> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    Network::glorot(
        Network::architecture(cfg.hidden_layers, cfg.neurons_per_layer),
        cfg.activation,
        &mut rng,
    )
}

pub fn train(cfg: &NetworkConfig, params: ModelParams) -> Result<TrainingTrace> {
    train_with(cfg, params, Execution::default())
}

/// Full-batch Adamax training on the physics loss.
///
/// Divergence (non-finite loss or gradient, a reaction pole, or a total
/// above [`DIVERGENCE_LIMIT`]) stops training and is reported in the trace
/// status rather than as an error.
pub fn train_with(
    cfg: &NetworkConfig,
    params: ModelParams,
    exec: Execution,
) -> Result<TrainingTrace> {
    cfg.validate()?;
    let start = Instant::now();
    let grid = collocation_grid(cfg.n_points)?;
    let loss = PhysicsLoss::new(&grid, params)?;
    let mut net = initial_network(cfg)?;
    let mut opt = AdamaxState::new(net.n_params());
    let mut records = Vec::with_capacity(cfg.epochs / RECORD_STRIDE + 2);

    let diverged = |epoch: usize, reason: String| TrainingStatus::Diverged { epoch, reason };

    for epoch in 0..cfg.epochs {
        let (breakdown, grad) = match loss.gradient(&net, exec) {
            Ok(v) => v,
            Err(e) => {
                return Ok(TrainingTrace {
                    records,
                    network: net,
                    status: diverged(epoch, e.to_string()),
                    duration: start.elapsed(),
                })
            }
        };
        if breakdown.total > DIVERGENCE_LIMIT {
            return Ok(TrainingTrace {
                records,
                network: net,
                status: diverged(
                    epoch,
                    format!("loss {:e} exceeds {DIVERGENCE_LIMIT:e}", breakdown.total),
                ),
                duration: start.elapsed(),
            });
        }
        if epoch % RECORD_STRIDE == 0 {
            records.push(LossRecord {
                epoch,
                loss: breakdown,
            });
        }
        opt.step(
            net.params_mut(),
            &grad.gradient,
            cfg.learning_rate,
            &cfg.adamax,
        );
    }

    let status = match loss.evaluate(&net, exec) {
        Ok(b) if b.total <= DIVERGENCE_LIMIT => {
            records.push(LossRecord {
                epoch: cfg.epochs,
                loss: b,
            });
            TrainingStatus::Completed
        }
        Ok(b) => diverged(
            cfg.epochs,
            format!("loss {:e} exceeds {DIVERGENCE_LIMIT:e}", b.total),
        ),
        Err(e) => diverged(cfg.epochs, e.to_string()),
    };
    Ok(TrainingTrace {
        records,
        network: net,
        status,
        duration: start.elapsed(),
    })
}
