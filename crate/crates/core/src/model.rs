//! The EHD flow equation
//!
//! ```text
//! v'' + v'/τ + Ha² (1 - v / (1 - α v)) = 0,   0 < τ < 1,
//! v'(0) = 0,  v(1) = 0
//! ```
//!
//! together with the tabulated benchmark solution and the discrete ℓ₂ error
//! used to score both solvers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `|1 - α v|` below this is treated as hitting the reaction pole.
pub const POLE_EPSILON: f64 = 1e-12;

/// Physical constants of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    alpha: f64,
    ha_sq: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, ha_sq: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be positive and finite, got {alpha}"
            )));
        }
        // Ha² = 0 only admits the trivial solution v ≡ 0.
        if !(ha_sq.is_finite() && ha_sq > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Ha^2 must be positive and finite, got {ha_sq}"
            )));
        }
        Ok(Self { alpha, ha_sq })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn ha_sq(&self) -> f64 {
        self.ha_sq
    }

    /// Upper bound `1/(α+1)` of any solution on (0, 1).
    pub fn upper_bound(&self) -> f64 {
        1.0 / (self.alpha + 1.0)
    }

    fn pole_distance(&self, v: f64) -> Result<f64> {
        let d = 1.0 - self.alpha * v;
        if d.abs() < POLE_EPSILON || !d.is_finite() {
            return Err(Error::Pole {
                v,
                distance: d.abs(),
            });
        }
        Ok(d)
    }

    /// `Ha² (1 - v/(1 - α v))`.
    pub fn reaction_term(&self, v: f64) -> Result<f64> {
        let d = self.pole_distance(v)?;
        Ok(self.ha_sq * (1.0 - v / d))
    }

    /// `d/dv` of [`reaction_term`](Self::reaction_term): `-Ha² / (1 - α v)²`.
    pub fn reaction_derivative(&self, v: f64) -> Result<f64> {
        let d = self.pole_distance(v)?;
        Ok(-self.ha_sq / (d * d))
    }

    /// Strong-form residual `v'' + v'/τ + reaction(v)`; requires `τ > 0`.
    pub fn ode_residual(&self, tau: f64, v: f64, dv: f64, d2v: f64) -> Result<f64> {
        if !(tau > 0.0) {
            return Err(Error::Domain(format!(
                "ODE residual needs tau > 0, got {tau}"
            )));
        }
        Ok(d2v + dv / tau + self.reaction_term(v)?)
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            ha_sq: 1.0,
        }
    }
}

/// A nonlinear source term `f(v)` and its derivative.
///
/// The FEM engine is generic over this so that the reaction can be switched
/// off for linear checks; [`ModelParams`] is the only production impl.
pub trait Reaction: Sync {
    fn value(&self, v: f64) -> Result<f64>;
    fn derivative(&self, v: f64) -> Result<f64>;
}

impl Reaction for ModelParams {
    fn value(&self, v: f64) -> Result<f64> {
        self.reaction_term(v)
    }

    fn derivative(&self, v: f64) -> Result<f64> {
        self.reaction_derivative(v)
    }
}

/// Number of rows in the benchmark table.
pub const REFERENCE_POINTS: usize = 11;

const REFERENCE_VALUES: [f64; REFERENCE_POINTS] = [
    0.206916, 0.204991, 0.199513, 0.189791, 0.175889, 0.158055, 0.135427, 0.108932, 0.077707,
    0.041212, 0.000000,
];

/// Benchmark solution for `α = 0.5, Ha² = 1` at `τ = 0.0, 0.1, …, 1.0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    points: Vec<(f64, f64)>,
}

impl ReferenceSolution {
    pub fn tabulated() -> Self {
        let points = reference_grid().into_iter().zip(REFERENCE_VALUES).collect();
        Self { points }
    }

    /// Reference values from another source (e.g. the shooting oracle).
    pub fn from_points(points: Vec<(f64, f64)>) -> Result<Self> {
        let table = SolutionTable::new(points, Source::Reference)?;
        Ok(Self {
            points: table.samples,
        })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn taus(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }
}

impl Default for ReferenceSolution {
    fn default() -> Self {
        Self::tabulated()
    }
}

/// `τ = i/10` for `i = 0..=10`, computed exactly as `i as f64 / 10.0`.
pub fn reference_grid() -> Vec<f64> {
    (0..REFERENCE_POINTS).map(|i| i as f64 / 10.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Pinn,
    Fem,
    Reference,
}

/// Sampled solution `(τ, v)` with strictly increasing `τ` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionTable {
    samples: Vec<(f64, f64)>,
    source: Source,
}

impl SolutionTable {
    pub fn new(samples: Vec<(f64, f64)>, source: Source) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidParameter("empty solution table".into()));
        }
        for (i, &(tau, _)) in samples.iter().enumerate() {
            if !(0.0..=1.0).contains(&tau) {
                return Err(Error::Domain(format!("sample tau {tau} outside [0, 1]")));
            }
            if i > 0 && samples[i - 1].0 >= tau {
                return Err(Error::InvalidParameter(
                    "sample tau values must be strictly increasing".into(),
                ));
            }
        }
        Ok(Self { samples, source })
    }

    pub fn reference() -> Self {
        Self {
            samples: ReferenceSolution::tabulated().points,
            source: Source::Reference,
        }
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn source(&self) -> Source {
        self.source
    }

    /// Piecewise-linear value at `tau`; exact at sample points.
    pub fn value_at(&self, tau: f64) -> Result<f64> {
        let s = &self.samples;
        let first = s[0].0;
        let last = s[s.len() - 1].0;
        if tau < first || tau > last {
            return Err(Error::Domain(format!(
                "tau {tau} outside sampled range [{first}, {last}]"
            )));
        }
        let k = s.partition_point(|p| p.0 < tau);
        if s[k].0 == tau {
            return Ok(s[k].1);
        }
        let (t0, v0) = s[k - 1];
        let (t1, v1) = s[k];
        let w = (tau - t0) / (t1 - t0);
        Ok(v0 + w * (v1 - v0))
    }
}

/// Discrete ℓ₂ error `sqrt(Σ (v(τᵢ) - v_ref(τᵢ))²)` over the reference points.
pub fn l2_error(table: &SolutionTable, reference: &ReferenceSolution) -> Result<f64> {
    let mut sum = 0.0;
    for &(tau, v_ref) in reference.points() {
        let d = table.value_at(tau)? - v_ref;
        sum += d * d;
    }
    Ok(sum.sqrt())
}
