use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{self, FemSettings};
use crate::model::{
    l2_error, reference_grid, ModelParams, ReferenceSolution, SolutionTable, Source,
};
use crate::par::Execution;
use crate::pinn::{train_with, NetworkConfig, TrainingStatus};
use crate::shooting::ShootingSolution;

/// Trainable-parameter count quoted in the published comparison for the
/// 2×16 network. The standard count for that architecture is 321.
pub const PUBLISHED_PARAMETER_COUNT: usize = 305;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    /// The embedded benchmark table (only valid for α = 0.5, Ha² = 1).
    Tabulated,
    /// The shooting oracle, used for any other parameters.
    Shooting,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub tau: f64,
    pub reference: f64,
    pub pinn: f64,
    pub fem: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub alpha: f64,
    pub ha_sq: f64,
    pub reference_kind: ReferenceKind,
    pub rows: Vec<ComparisonRow>,
    pub pinn_l2_error: f64,
    pub fem_l2_error: f64,
    pub pinn_parameters: usize,
    pub published_pinn_parameters: usize,
    pub parameter_count_mismatch: bool,
    pub fem_cells: usize,
    pub fem_dofs: usize,
    pub fem_iterations: usize,
    pub pinn_seconds: f64,
    pub fem_seconds: f64,
}

/// Trains `pinn_cfg`, solves on `fem_cells` cells and tabulates both
/// against the reference on the 11-point grid.
///
/// The PINN and FEM runs execute concurrently under
/// [`Execution::Parallel`]. A diverged PINN run is an error here.
pub fn run_comparison(
    pinn_cfg: &NetworkConfig,
    fem_cells: usize,
    params: ModelParams,
    exec: Execution,
) -> Result<Comparison> {
    pinn_cfg.validate()?;
    let grid = reference_grid();
    let (reference_kind, reference) = if params == ModelParams::default() {
        (
            ReferenceKind::Tabulated,
            ReferenceSolution::tabulated().values(),
        )
    } else {
        (
            ReferenceKind::Shooting,
            ShootingSolution::solve(params)?.values(&grid)?,
        )
    };
    let ref_solution = ReferenceSolution::from_points(
        grid.iter()
            .copied()
            .zip(reference.iter().copied())
            .collect(),
    )?;

    enum Engine {
        Pinn(Result<(SolutionTable, f64)>),
        Fem(Result<(SolutionTable, usize, f64)>),
    }
    let engines = exec.map_range(2, |i| {
        let start = Instant::now();
        if i == 0 {
            Engine::Pinn((|| {
                let trace = train_with(pinn_cfg, params, Execution::Sequential)?;
                if let TrainingStatus::Diverged { epoch, reason } = trace.status {
                    return Err(Error::Diverged { epoch, reason });
                }
                Ok((
                    trace.network.evaluate(&grid)?,
                    start.elapsed().as_secs_f64(),
                ))
            })())
        } else {
            Engine::Fem((|| {
                let (state, history) = fem::solve(
                    fem_cells,
                    params,
                    &FemSettings::default(),
                    Execution::Sequential,
                )?;
                Ok((
                    state.to_table(&grid)?,
                    history.iterations(),
                    start.elapsed().as_secs_f64(),
                ))
            })())
        }
    });
    let mut pinn = None;
    let mut fem = None;
    for e in engines {
        match e {
            Engine::Pinn(r) => pinn = Some(r?),
            Engine::Fem(r) => fem = Some(r?),
        }
    }
    let (pinn_table, pinn_seconds) = pinn.expect("PINN engine ran");
    let (fem_table, fem_iterations, fem_seconds) = fem.expect("FEM engine ran");

    let rows = grid
        .iter()
        .zip(&reference)
        .zip(pinn_table.samples().iter().zip(fem_table.samples()))
        .map(|((&tau, &r), (p, f))| ComparisonRow {
            tau,
            reference: r,
            pinn: p.1,
            fem: f.1,
        })
        .collect();
    let pinn_parameters = pinn_cfg.parameter_count();
    let published_arch = pinn_cfg.hidden_layers == 2 && pinn_cfg.neurons_per_layer == 16;
    Ok(Comparison {
        alpha: params.alpha(),
        ha_sq: params.ha_sq(),
        reference_kind,
        rows,
        pinn_l2_error: l2_error(&pinn_table, &ref_solution)?,
        fem_l2_error: l2_error(&fem_table, &ref_solution)?,
        pinn_parameters,
        published_pinn_parameters: PUBLISHED_PARAMETER_COUNT,
        parameter_count_mismatch: published_arch && pinn_parameters != PUBLISHED_PARAMETER_COUNT,
        fem_cells,
        fem_dofs: fem_cells + 1,
        fem_iterations,
        pinn_seconds,
        fem_seconds,
    })
}

impl Comparison {
    pub fn reference_table(&self) -> Result<SolutionTable> {
        SolutionTable::new(
            self.rows.iter().map(|r| (r.tau, r.reference)).collect(),
            Source::Reference,
        )
    }
}
