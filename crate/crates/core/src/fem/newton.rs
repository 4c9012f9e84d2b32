use serde::{Deserialize, Serialize};

use super::{assemble, residual_norm, FemSettings, FemState, Mesh};
use crate::error::{Error, Result};
use crate::model::{ModelParams, Reaction};
use crate::par::Execution;

/// One row of the iteration log. Iteration 0 is the initial guess and has
/// no damping factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonStep {
    pub iteration: usize,
    pub residual: f64,
    pub damping: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NewtonHistory {
    pub steps: Vec<NewtonStep>,
}

impl NewtonHistory {
    /// Newton updates taken (the initial row is not counted).
    pub fn iterations(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }

    pub fn final_residual(&self) -> f64 {
        self.steps.last().map_or(f64::NAN, |s| s.residual)
    }

    pub fn initial_residual(&self) -> f64 {
        self.steps.first().map_or(f64::NAN, |s| s.residual)
    }

    pub fn residuals(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.residual).collect()
    }
}

/// Damped Newton from `initial`.
///
/// Each step tries `λ = 1, ½, ¼, …` (at most `l_max` trials) and takes the
/// first one that lowers the residual norm. A trial that hits the reaction
/// pole counts as a rejection.
pub fn newton_solve<R: Reaction + ?Sized>(
    initial: FemState,
    reaction: &R,
    settings: &FemSettings,
    exec: Execution,
) -> Result<(FemState, NewtonHistory)> {
    settings.validate()?;
    let mut state = initial;
    let mut r = residual_norm(&state, reaction, settings, exec)?;
    if !r.is_finite() {
        return Err(Error::NonFinite("initial residual".into()));
    }
    let mut history = NewtonHistory {
        steps: vec![NewtonStep {
            iteration: 0,
            residual: r,
            damping: None,
        }],
    };
    if r < settings.r_tol {
        return Ok((state, history));
    }

    for iteration in 1..=settings.i_max {
        let mut delta = assemble(&state, reaction, settings, exec)?.solve()?;
        delta.push(0.0);

        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..settings.l_max {
            let trial = state.updated(&delta, lambda);
            match residual_norm(&trial, reaction, settings, exec) {
                Ok(rt) if rt.is_finite() && rt < r => {
                    accepted = Some((trial, rt));
                    break;
                }
                Ok(_) | Err(Error::Pole { .. }) => lambda *= 0.5,
                Err(e) => return Err(e),
            }
        }
        let Some((next, rt)) = accepted else {
            return Err(Error::LineSearchExhausted {
                iteration,
                halvings: settings.l_max,
                history,
            });
        };
        state = next;
        r = rt;
        history.steps.push(NewtonStep {
            iteration,
            residual: r,
            damping: Some(lambda),
        });
        if r < settings.r_tol {
            return Ok((state, history));
        }
    }
    Err(Error::NonConvergence { history })
}

/// Solves on a uniform mesh of `cells` cells starting from `v ≡ 0`.
pub fn solve(
    cells: usize,
    params: ModelParams,
    settings: &FemSettings,
    exec: Execution,
) -> Result<(FemState, NewtonHistory)> {
    newton_solve(
        FemState::zero(Mesh::uniform(cells)?),
        &params,
        settings,
        exec,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::residual_vector;

    /// `v'' + v'/τ = 0`: linear, so Newton is exact after one step.
    struct NoReaction;
    impl Reaction for NoReaction {
        fn value(&self, _: f64) -> Result<f64> {
            Ok(0.0)
        }
        fn derivative(&self, _: f64) -> Result<f64> {
            Ok(0.0)
        }
    }

    #[test]
    fn zero_reaction_from_zero_needs_no_step() {
        let s = FemSettings::default();
        let (state, h) = newton_solve(
            FemState::zero(Mesh::uniform(16).unwrap()),
            &NoReaction,
            &s,
            Execution::Sequential,
        )
        .unwrap();
        assert!(h.iterations() <= 1);
        assert!(state.values().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn zero_reaction_from_guess_converges_in_one_step() {
        let s = FemSettings::default();
        let guess = FemState::from_fn(Mesh::uniform(16).unwrap(), |t| 0.3 * (1.0 - t));
        let (state, h) = newton_solve(guess, &NoReaction, &s, Execution::Sequential).unwrap();
        assert_eq!(h.iterations(), 1);
        assert_eq!(h.steps[1].damping, Some(1.0));
        assert!(state.values().iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn default_problem_converges_quadratically() {
        let (state, h) = solve(
            1024,
            ModelParams::default(),
            &FemSettings::default(),
            Execution::Sequential,
        )
        .unwrap();
        let r = h.residuals();
        assert!(h.iterations() <= 5, "{r:?}");
        assert!(h.final_residual() < 1e-6);
        assert!(r.windows(2).all(|w| w[1] < w[0]), "{r:?}");
        for w in r.windows(2) {
            if w[0] < 1e-2 && w[1] > 1e-13 {
                assert!(w[1] <= w[0].powf(1.5), "{r:?}");
            }
        }
        assert!(h.steps[1..].iter().all(|s| s.damping == Some(1.0)));
        let v = state.values();
        assert!((v[512] - 0.158009).abs() < 5e-7, "{}", v[512]);
        assert!(residual_vector(
            &state,
            &ModelParams::default(),
            &FemSettings::default(),
            Execution::Sequential
        )
        .unwrap()
        .iter()
        .all(|x| x.abs() < 1e-10));
    }

    #[test]
    fn solution_is_bounded_and_monotone() {
        for alpha in [0.25, 0.5, 1.0] {
            let p = ModelParams::new(alpha, 1.0).unwrap();
            let (state, _) = solve(256, p, &FemSettings::default(), Execution::Sequential).unwrap();
            let v = state.values();
            assert!(v[..256].iter().all(|&x| x > 0.0 && x < p.upper_bound()));
            assert!(v.windows(2).all(|w| w[1] <= w[0]));
            let slope = (v[1] - v[0]) / state.mesh().h();
            assert!(slope.abs() < 0.02, "{slope}");
        }
    }

    #[test]
    fn weighted_form_converges() {
        let (state, h) = solve(
            64,
            ModelParams::default(),
            &FemSettings::weighted(),
            Execution::Sequential,
        )
        .unwrap();
        assert!(h.final_residual() < 1e-10);
        assert!((state.values()[32] - 0.158).abs() < 1e-3);
    }

    #[test]
    fn iteration_cap_reports_history() {
        let s = FemSettings {
            i_max: 1,
            r_tol: 1e-300,
            ..FemSettings::default()
        };
        match solve(32, ModelParams::default(), &s, Execution::Sequential) {
            Err(Error::NonConvergence { history }) => {
                assert_eq!(history.iterations(), 1);
                assert!(history.final_residual() < history.initial_residual());
            }
            other => panic!("{other:?}"),
        }
    }

    /// Finite only at the zero state, so every trial step hits the pole.
    struct PoleEverywhereElse;
    impl Reaction for PoleEverywhereElse {
        fn value(&self, v: f64) -> Result<f64> {
            if v == 0.0 {
                Ok(1.0)
            } else {
                Err(Error::Pole { v, distance: 0.0 })
            }
        }
        fn derivative(&self, _: f64) -> Result<f64> {
            Ok(0.0)
        }
    }

    #[test]
    fn exhausted_line_search_is_an_error() {
        let s = FemSettings {
            l_max: 3,
            ..FemSettings::default()
        };
        let r = newton_solve(
            FemState::zero(Mesh::uniform(8).unwrap()),
            &PoleEverywhereElse,
            &s,
            Execution::Sequential,
        );
        match r {
            Err(Error::LineSearchExhausted {
                iteration,
                halvings,
                history,
            }) => {
                assert_eq!((iteration, halvings), (1, 3));
                assert_eq!(history.iterations(), 0);
            }
            other => panic!("{other:?}"),
        }
    }
}
