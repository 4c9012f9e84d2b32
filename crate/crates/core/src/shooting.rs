//! Independent high-accuracy solution by shooting on `v(0)`.
//!
//! The equation is integrated as a first-order system with an adaptive
//! Dormand–Prince 5(4) scheme, starting slightly off the axis from the
//! regular series `v = v₀ + v''(0) τ²/2` with `v''(0) = -f(v₀)/2`. The
//! initial value `v₀ ∈ (0, 1/(α+1))` is bisected until `v(1) = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelParams, SolutionTable, Source};

/// Series start point; the truncation error there is `O(τ₀⁴)`.
const TAU_START: f64 = 1e-4;
const RTOL: f64 = 1e-12;
const ATOL: f64 = 1e-14;
const MAX_STEPS: usize = 1_000_000;
const BISECTION_STEPS: usize = 200;

// Dormand–Prince tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

type State = [f64; 2];

fn rhs(params: &ModelParams, tau: f64, y: State) -> Result<State> {
    Ok([y[1], -y[1] / tau - params.reaction_term(y[0])?])
}

fn series(params: &ModelParams, v0: f64, tau: f64) -> Result<State> {
    let c = -params.reaction_term(v0)? / 2.0;
    Ok([v0 + 0.5 * c * tau * tau, c * tau])
}

/// Integrates from `TAU_START` through each of `taus` (ascending, in
/// `[0, 1]`) and returns `(v, v')` at each.
fn integrate(params: &ModelParams, v0: f64, taus: &[f64]) -> Result<Vec<State>> {
    let mut out = Vec::with_capacity(taus.len());
    let mut t = TAU_START;
    let mut y = series(params, v0, t)?;
    let mut h = 1e-5;
    let mut steps = 0;
    for &target in taus {
        if !(0.0..=1.0).contains(&target) {
            return Err(Error::Domain(format!("tau {target} outside [0, 1]")));
        }
        if target <= TAU_START {
            out.push(series(params, v0, target)?);
            continue;
        }
        if target < t {
            return Err(Error::InvalidParameter(
                "output points must be ascending".into(),
            ));
        }
        while t < target {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::Shooting(format!("step limit reached at tau = {t}")));
            }
            let last = h >= target - t;
            let step = if last { target - t } else { h };
            let mut k = [[0.0; 2]; 7];
            for s in 0..7 {
                let mut ys = y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    ys[0] += step * A[s][j] * kj[0];
                    ys[1] += step * A[s][j] * kj[1];
                }
                k[s] = rhs(params, t + C[s] * step, ys)?;
            }
            let mut y5 = y;
            let mut err = 0.0f64;
            for c in 0..2 {
                let mut e = 0.0;
                for s in 0..7 {
                    y5[c] += step * B5[s] * k[s][c];
                    e += step * (B5[s] - B4[s]) * k[s][c];
                }
                let scale = ATOL + RTOL * y[c].abs().max(y5[c].abs());
                err = err.max((e / scale).abs());
            }
            if !err.is_finite() {
                return Err(Error::NonFinite(format!(
                    "shooting error estimate at tau = {t}"
                )));
            }
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y = y5;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = step * factor;
        }
        out.push(y);
    }
    Ok(out)
}

/// Shooting solution for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingSolution {
    pub params: ModelParams,
    /// Converged axis value `v(0)`.
    pub v0: f64,
    /// `v(1)` of the converged trajectory.
    pub boundary_miss: f64,
}

impl ShootingSolution {
    pub fn solve(params: ModelParams) -> Result<Self> {
        let miss = |v0: f64| -> Result<f64> { Ok(integrate(&params, v0, &[1.0])?[0][0]) };
        let (mut lo, mut hi) = (0.0, params.upper_bound());
        let (f_lo, f_hi) = (miss(lo)?, miss(hi)?);
        if !(f_lo < 0.0 && f_hi > 0.0) {
            return Err(Error::Shooting(format!(
                "v(1) does not change sign on the bracket: {f_lo:e}, {f_hi:e}"
            )));
        }
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if miss(mid)? < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let v0 = 0.5 * (lo + hi);
        Ok(Self {
            params,
            v0,
            boundary_miss: miss(v0)?,
        })
    }

    /// `(v, v')` at each of `taus`, which must be ascending in `[0, 1]`.
    pub fn state_at(&self, taus: &[f64]) -> Result<Vec<(f64, f64)>> {
        Ok(integrate(&self.params, self.v0, taus)?
            .into_iter()
            .map(|y| (y[0], y[1]))
            .collect())
    }

    pub fn values(&self, taus: &[f64]) -> Result<Vec<f64>> {
        Ok(self.state_at(taus)?.into_iter().map(|s| s.0).collect())
    }

    pub fn to_table(&self, grid: &[f64]) -> Result<SolutionTable> {
        let v = self.values(grid)?;
        SolutionTable::new(grid.iter().copied().zip(v).collect(), Source::Reference)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{reference_grid, ReferenceSolution};

    #[test]
    fn matches_the_benchmark_table() {
        let s = ShootingSolution::solve(ModelParams::default()).unwrap();
        assert!(s.boundary_miss.abs() < 1e-12, "{}", s.boundary_miss);
        assert!((s.v0 - 0.2070081525).abs() < 1e-8, "{}", s.v0);
        let got = s.values(&reference_grid()).unwrap();
        for (g, r) in got.iter().zip(ReferenceSolution::tabulated().values()) {
            assert!((g - r).abs() < 5e-4, "{g} vs {r}");
        }
    }

    #[test]
    fn satisfies_the_equation_in_the_interior() {
        let p = ModelParams::default();
        let s = ShootingSolution::solve(p).unwrap();
        let h = 1e-3;
        for tau in [0.25, 0.5, 0.75] {
            let pts: Vec<f64> = [-2.0, -1.0, 0.0, 1.0, 2.0]
                .iter()
                .map(|k| tau + k * h)
                .collect();
            let st = s.state_at(&pts).unwrap();
            let d2v = (st[0].1 - 8.0 * st[1].1 + 8.0 * st[3].1 - st[4].1) / (12.0 * h);
            let r = p.ode_residual(tau, st[2].0, st[2].1, d2v).unwrap();
            assert!(r.abs() < 1e-8, "tau {tau}: {r:e}");
        }
    }

    #[test]
    fn axis_slope_vanishes_and_bounds_hold() {
        for alpha in [0.25, 0.5, 1.0] {
            let p = ModelParams::new(alpha, 1.0).unwrap();
            let s = ShootingSolution::solve(p).unwrap();
            let taus: Vec<f64> = (0..=50).map(|i| i as f64 / 50.0).collect();
            let st = s.state_at(&taus).unwrap();
            assert_eq!(st[0].1, 0.0);
            for w in st.windows(2) {
                assert!(w[1].0 < w[0].0);
            }
            assert!(st[..50].iter().all(|x| x.0 > 0.0 && x.0 < p.upper_bound()));
        }
    }

    #[test]
    fn rejects_bad_output_points() {
        let s = ShootingSolution::solve(ModelParams::default()).unwrap();
        assert!(s.state_at(&[0.5, 0.2]).is_err());
        assert!(s.state_at(&[1.5]).is_err());
    }
}
