use super::{FemSettings, FemState, Formulation, GaussLegendre, TridiagonalSystem};
use crate::error::Result;
use crate::model::Reaction;
use crate::par::Execution;

/// Local 2×2 Jacobian and 2-vector right-hand side of one cell.
type CellContribution = ([[f64; 2]; 2], [f64; 2]);

fn cell_contribution<R: Reaction + ?Sized>(
    state: &FemState,
    cell: usize,
    reaction: &R,
    formulation: Formulation,
    rule: &GaussLegendre,
    with_jacobian: bool,
) -> Result<CellContribution> {
    let mesh = state.mesh();
    let h = mesh.h();
    let x0 = mesh.node(cell);
    let (v0, v1) = (state.values()[cell], state.values()[cell + 1]);
    let dphi = [-1.0 / h, 1.0 / h];
    let dv = (v1 - v0) / h;

    let mut k = [[0.0; 2]; 2];
    let mut f = [0.0; 2];
    for (xi, w) in rule.iter() {
        let tau = x0 + 0.5 * h * (xi + 1.0);
        let wq = 0.5 * h * w;
        let phi = [0.5 * (1.0 - xi), 0.5 * (1.0 + xi)];
        let v = phi[0] * v0 + phi[1] * v1;
        let src = reaction.value(v)?;
        let dsrc = if with_jacobian {
            reaction.derivative(v)?
        } else {
            0.0
        };
        match formulation {
            Formulation::Weighted => {
                for i in 0..2 {
                    f[i] += wq * tau * (-dv * dphi[i] + src * phi[i]);
                    if with_jacobian {
                        for j in 0..2 {
                            k[i][j] += wq * tau * (dphi[i] * dphi[j] - dsrc * phi[i] * phi[j]);
                        }
                    }
                }
            }
            Formulation::Expanded => {
                for i in 0..2 {
                    f[i] += wq * (-dv * dphi[i] + dv / tau * phi[i] + src * phi[i]);
                    if with_jacobian {
                        for j in 0..2 {
                            k[i][j] += wq
                                * (dphi[i] * dphi[j]
                                    - dphi[j] / tau * phi[i]
                                    - dsrc * phi[i] * phi[j]);
                        }
                    }
                }
            }
        }
    }
    Ok((k, f))
}

fn contributions<R: Reaction + ?Sized>(
    state: &FemState,
    reaction: &R,
    settings: &FemSettings,
    with_jacobian: bool,
    exec: Execution,
) -> Result<Vec<CellContribution>> {
    let rule = GaussLegendre::new(settings.quadrature_points)?;
    exec.map_range(state.mesh().n_cells(), |cell| {
        cell_contribution(
            state,
            cell,
            reaction,
            settings.formulation,
            &rule,
            with_jacobian,
        )
    })
    .into_iter()
    .collect()
}

/// Newton system `A(vⁿ) δV = F(vⁿ)` on the free nodes `0..n_cells`.
///
/// `F` is the negated weak residual; the Dirichlet node's row and column
/// are dropped.
pub fn assemble<R: Reaction + ?Sized>(
    state: &FemState,
    reaction: &R,
    settings: &FemSettings,
    exec: Execution,
) -> Result<TridiagonalSystem> {
    let n_free = state.mesh().n_cells();
    let mut sys = TridiagonalSystem::zeros(n_free);
    for (cell, (k, f)) in contributions(state, reaction, settings, true, exec)?
        .into_iter()
        .enumerate()
    {
        // Local node 0 is always free; local node 1 is free unless it is the
        // Dirichlet node.
        sys.diag[cell] += k[0][0];
        sys.rhs[cell] += f[0];
        if cell + 1 < n_free {
            sys.diag[cell + 1] += k[1][1];
            sys.upper[cell] += k[0][1];
            sys.lower[cell] += k[1][0];
            sys.rhs[cell + 1] += f[1];
        }
    }
    Ok(sys)
}

/// The right-hand side of [`assemble`] alone.
pub fn residual_vector<R: Reaction + ?Sized>(
    state: &FemState,
    reaction: &R,
    settings: &FemSettings,
    exec: Execution,
) -> Result<Vec<f64>> {
    let n_free = state.mesh().n_cells();
    let mut rhs = vec![0.0; n_free];
    for (cell, (_, f)) in contributions(state, reaction, settings, false, exec)?
        .into_iter()
        .enumerate()
    {
        rhs[cell] += f[0];
        if cell + 1 < n_free {
            rhs[cell + 1] += f[1];
        }
    }
    Ok(rhs)
}

/// ℓ₂ norm of the assembled residual vector.
pub fn residual_norm<R: Reaction + ?Sized>(
    state: &FemState,
    reaction: &R,
    settings: &FemSettings,
    exec: Execution,
) -> Result<f64> {
    Ok(residual_vector(state, reaction, settings, exec)?
        .iter()
        .map(|r| r * r)
        .sum::<f64>()
        .sqrt())
}
