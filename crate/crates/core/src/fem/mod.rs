//! Continuous Galerkin P1 solver with Newton–Raphson and backtracking line
//! search.
//!
//! Two weak forms of the equation are available (see [`Formulation`]).
//! Both keep the axis node `τ = 0` as an unknown, impose `v'(0) = 0`
//! naturally and eliminate the Dirichlet node `τ = 1`, which leaves a
//! tridiagonal system on the free nodes.

mod assemble;
mod newton;
mod quadrature;
mod study;
mod tridiag;

use serde::{Deserialize, Serialize};

pub use assemble::{assemble, residual_norm, residual_vector};
pub use newton::{newton_solve, solve, NewtonHistory, NewtonStep};
pub use quadrature::GaussLegendre;
pub use study::{mesh_refinement_study, successive_difference_ratios, RefinementRow};
pub use tridiag::{solve_tridiagonal, TridiagonalSystem};

use crate::error::{Error, Result};
use crate::model::{SolutionTable, Source};

/// Uniform mesh of `n_cells` cells on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mesh {
    n_cells: usize,
}

impl Mesh {
    pub fn uniform(n_cells: usize) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::InvalidParameter(
                "mesh needs at least one cell".into(),
            ));
        }
        Ok(Self { n_cells })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n_cells as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 / self.n_cells as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_nodes()).map(|i| self.node(i)).collect()
    }
}

/// Nodal values on a mesh; the last node is pinned to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct FemState {
    mesh: Mesh,
    values: Vec<f64>,
}

impl FemState {
    pub fn zero(mesh: Mesh) -> Self {
        Self {
            mesh,
            values: vec![0.0; mesh.n_nodes()],
        }
    }

    pub fn new(mesh: Mesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n_nodes() {
            return Err(Error::InvalidParameter(format!(
                "expected {} nodal values, got {}",
                mesh.n_nodes(),
                values.len()
            )));
        }
        if values[mesh.n_cells()] != 0.0 {
            return Err(Error::InvalidParameter("v(1) must be 0".into()));
        }
        Ok(Self { mesh, values })
    }

    /// Nodal interpolant of `f` with the Dirichlet node forced to 0.
    pub fn from_fn(mesh: Mesh, f: impl Fn(f64) -> f64) -> Self {
        let mut values: Vec<f64> = mesh.nodes().into_iter().map(f).collect();
        values[mesh.n_cells()] = 0.0;
        Self { mesh, values }
    }

    pub fn mesh(&self) -> Mesh {
        self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of nodal unknowns including the constrained one.
    pub fn dofs(&self) -> usize {
        self.mesh.n_nodes()
    }

    /// `self + λ δ` on the free nodes.
    pub(crate) fn updated(&self, delta: &[f64], lambda: f64) -> Self {
        let mut values = self.values.clone();
        for (v, d) in values.iter_mut().zip(delta) {
            *v += lambda * d;
        }
        Self {
            mesh: self.mesh,
            values,
        }
    }

    /// Piecewise-linear value at `tau ∈ [0, 1]`; exact at nodes.
    pub fn interpolate(&self, tau: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::Domain(format!("tau {tau} outside [0, 1]")));
        }
        let n = self.mesh.n_cells();
        let x = tau * n as f64;
        let k = (x.floor() as usize).min(n - 1);
        let w = x - k as f64;
        if w == 0.0 {
            return Ok(self.values[k]);
        }
        if w == 1.0 {
            return Ok(self.values[k + 1]);
        }
        Ok(self.values[k] + w * (self.values[k + 1] - self.values[k]))
    }

    pub fn to_table(&self, grid: &[f64]) -> Result<SolutionTable> {
        let samples = grid
            .iter()
            .map(|&t| self.interpolate(t).map(|v| (t, v)))
            .collect::<Result<Vec<_>>>()?;
        SolutionTable::new(samples, Source::Fem)
    }
}

/// Which weak form is discretised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    /// Galerkin projection of the expanded equation
    /// `∫ v'w' - ∫ (v'/τ) w - ∫ f(v) w = 0`.
    /// The matrix is not symmetric and the `1/τ` weight is integrated by
    /// quadrature only. This is the default: it reproduces the published
    /// refinement table to six digits.
    Expanded,
    /// Axisymmetric (τ-weighted) form
    /// `∫ τ v'w' - ∫ τ f(v) w = 0`, symmetric.
    Weighted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FemSettings {
    pub formulation: Formulation,
    pub quadrature_points: usize,
    pub r_tol: f64,
    pub i_max: usize,
    pub l_max: usize,
}

impl Default for FemSettings {
    fn default() -> Self {
        Self {
            formulation: Formulation::Expanded,
            quadrature_points: 2,
            r_tol: 1e-10,
            i_max: 50,
            l_max: 20,
        }
    }
}

impl FemSettings {
    /// τ-weighted symmetric form with 3-point quadrature.
    pub fn weighted() -> Self {
        Self {
            formulation: Formulation::Weighted,
            quadrature_points: 3,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        GaussLegendre::new(self.quadrature_points)?;
        if !(self.r_tol > 0.0) || self.i_max == 0 || self.l_max == 0 {
            return Err(Error::InvalidParameter(
                "r_tol must be positive and i_max, l_max at least 1".into(),
            ));
        }
        Ok(())
    }
}
