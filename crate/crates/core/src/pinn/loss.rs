use serde::{Deserialize, Serialize};

use super::network::{Network, PointLoss};
use crate::autodiff::{GradientRecord, Jet2};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::par::Execution;

/// Uniform collocation points `τᵢ = i/n` for `i = 1..=n`.
///
/// `τ = 0` is left out because the `v'/τ` term is singular there; the
/// symmetry condition at the axis enters the loss through its own term.
pub fn collocation_grid(n_points: usize) -> Result<Vec<f64>> {
    if n_points < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 collocation points, got {n_points}"
        )));
    }
    Ok((1..=n_points).map(|i| i as f64 / n_points as f64).collect())
}

/// The three parts of the physics loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    /// Mean squared ODE residual over the collocation points.
    pub differential_cost: f64,
    /// `v̂'(0)²`
    pub boundary_neumann: f64,
    /// `v̂(1)²`
    pub boundary_dirichlet: f64,
    pub total: f64,
}

impl LossBreakdown {
    pub fn new(differential_cost: f64, boundary_neumann: f64, boundary_dirichlet: f64) -> Self {
        Self {
            differential_cost,
            boundary_neumann,
            boundary_dirichlet,
            total: differential_cost + boundary_neumann + boundary_dirichlet,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.total.is_finite()
    }
}

/// Differential cost on a collocation grid plus the two boundary penalties.
///
/// Sites are the grid points followed by `τ = 0` (Neumann) and `τ = 1`
/// (Dirichlet).
#[derive(Debug, Clone)]
pub struct PhysicsLoss {
    sites: Vec<f64>,
    n_grid: usize,
    params: ModelParams,
}

impl PhysicsLoss {
    pub fn new(grid: &[f64], params: ModelParams) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::InvalidParameter("empty collocation grid".into()));
        }
        if let Some(&t) = grid.iter().find(|&&t| !(t > 0.0 && t <= 1.0)) {
            return Err(Error::Domain(format!(
                "collocation point {t} outside (0, 1]"
            )));
        }
        let mut sites = grid.to_vec();
        sites.extend([0.0, 1.0]);
        Ok(Self {
            sites,
            n_grid: grid.len(),
            params,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.sites[..self.n_grid]
    }

    fn breakdown(&self, site_values: &[f64]) -> Result<LossBreakdown> {
        let diff: f64 = site_values[..self.n_grid].iter().sum();
        let b = LossBreakdown::new(diff, site_values[self.n_grid], site_values[self.n_grid + 1]);
        if !b.is_finite() {
            return Err(Error::NonFinite(format!("physics loss = {}", b.total)));
        }
        Ok(b)
    }

    pub fn evaluate(&self, net: &Network, exec: Execution) -> Result<LossBreakdown> {
        self.breakdown(&net.loss_values(self, exec)?)
    }

    /// Loss breakdown together with the exact parameter gradient of its
    /// total.
    pub fn gradient(
        &self,
        net: &Network,
        exec: Execution,
    ) -> Result<(LossBreakdown, GradientRecord)> {
        let eval = net.loss_gradient(self, exec)?;
        let b = self.breakdown(&eval.site_values)?;
        let mut record = eval.record;
        record.loss_value = b.total;
        Ok((b, record))
    }
}

impl PointLoss for PhysicsLoss {
    fn sites(&self) -> &[f64] {
        &self.sites
    }

    fn term(&self, index: usize, out: Jet2) -> Result<(f64, Jet2)> {
        if index < self.n_grid {
            let tau = self.sites[index];
            let n = self.n_grid as f64;
            let r = self.params.ode_residual(tau, out.val, out.d1, out.d2)?;
            let c = 2.0 * r / n;
            let dr = self.params.reaction_derivative(out.val)?;
            Ok((r * r / n, Jet2::new(c * dr, c / tau, c)))
        } else if index == self.n_grid {
            Ok((out.d1 * out.d1, Jet2::new(0.0, 2.0 * out.d1, 0.0)))
        } else {
            Ok((out.val * out.val, Jet2::new(2.0 * out.val, 0.0, 0.0)))
        }
    }
}

/// Convenience wrapper: loss breakdown of `net` on `grid`.
pub fn physics_loss(net: &Network, grid: &[f64], params: ModelParams) -> Result<LossBreakdown> {
    PhysicsLoss::new(grid, params)?.evaluate(net, Execution::default())
}
