//! Adamax: Adam with an infinity-norm second moment.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamaxConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamaxConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-7,
        }
    }
}

/// Per-parameter moments and the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamaxState {
    m: Vec<f64>,
    u: Vec<f64>,
    t: u64,
}

impl AdamaxState {
    pub fn new(n_params: usize) -> Self {
        Self {
            m: vec![0.0; n_params],
            u: vec![0.0; n_params],
            t: 0,
        }
    }

    /// Number of steps taken so far.
    pub fn steps(&self) -> u64 {
        self.t
    }

    /// One update with step index `t + 1`:
    ///
    /// ```text
    /// m ← β₁ m + (1 - β₁) g
    /// u ← max(β₂ u, |g|)
    /// θ ← θ - lr / (1 - β₁ᵗ) · m / (u + ε)
    /// ```
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64, cfg: &AdamaxConfig) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        self.t += 1;
        let step = lr / (1.0 - cfg.beta1.powi(self.t as i32));
        for (((p, &g), m), u) in params
            .iter_mut()
            .zip(grads)
            .zip(&mut self.m)
            .zip(&mut self.u)
        {
            *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
            *u = (cfg.beta2 * *u).max(g.abs());
            *p -= step * *m / (*u + cfg.epsilon);
        }
    }
}
