use serde::{Deserialize, Serialize};

use super::{solve, FemSettings};
use crate::error::{Error, Result};
use crate::model::{l2_error, reference_grid, ModelParams, ReferenceSolution};
use crate::par::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinementRow {
    pub cells: usize,
    pub v_half: f64,
    pub l2_error: f64,
    pub iterations: usize,
    pub final_residual: f64,
}

/// Solves independently on each mesh and reports `v(0.5)` and the ℓ₂
/// error against the tabulated reference.
///
/// Meshes are solved concurrently under [`Execution::Parallel`]; each
/// solve itself runs sequentially.
pub fn mesh_refinement_study(
    cell_counts: &[usize],
    params: ModelParams,
    settings: &FemSettings,
    exec: Execution,
) -> Result<Vec<RefinementRow>> {
    if let Some(&n) = cell_counts.iter().find(|&&n| n < 4) {
        return Err(Error::InvalidParameter(format!(
            "refinement study needs at least 4 cells, got {n}"
        )));
    }
    let reference = ReferenceSolution::tabulated();
    let grid = reference_grid();
    exec.map_slice(cell_counts, |&cells| {
        let (state, history) = solve(cells, params, settings, Execution::Sequential)?;
        Ok(RefinementRow {
            cells,
            v_half: state.interpolate(0.5)?,
            l2_error: l2_error(&state.to_table(&grid)?, &reference)?,
            iterations: history.iterations(),
            final_residual: history.final_residual(),
        })
    })
    .into_iter()
    .collect()
}

/// `|v_k - v_{k-1}| / |v_{k+1} - v_k|` over consecutive rows; about 4 for
/// a second-order method under halving.
pub fn successive_difference_ratios(rows: &[RefinementRow]) -> Vec<f64> {
    rows.windows(3)
        .map(|w| (w[1].v_half - w[0].v_half).abs() / (w[2].v_half - w[1].v_half).abs())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_tiny_meshes() {
        let r = mesh_refinement_study(
            &[8, 2],
            ModelParams::default(),
            &FemSettings::default(),
            Execution::Sequential,
        );
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn second_order_convergence_at_midpoint() {
        let rows = mesh_refinement_study(
            &[8, 16, 32, 64],
            ModelParams::default(),
            &FemSettings::default(),
            Execution::Parallel,
        )
        .unwrap();
        assert_eq!(
            rows.iter().map(|r| r.cells).collect::<Vec<_>>(),
            vec![8, 16, 32, 64]
        );
        for ratio in successive_difference_ratios(&rows) {
            assert!((3.0..=5.0).contains(&ratio), "{ratio}");
        }
    }

    #[test]
    fn modes_agree() {
        let cells = [8, 16, 32];
        let p = ModelParams::default();
        let s = FemSettings::default();
        let a = mesh_refinement_study(&cells, p, &s, Execution::Sequential).unwrap();
        let b = mesh_refinement_study(&cells, p, &s, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
