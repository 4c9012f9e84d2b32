//! Tridiagonal systems and Thomas elimination.

use crate::error::{Error, Result};

/// `A x = rhs` with `A` tridiagonal. Row `i` reads
/// `lower[i-1] x[i-1] + diag[i] x[i] + upper[i] x[i+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![0.0; n.saturating_sub(1)],
            diag: vec![0.0; n],
            upper: vec![0.0; n.saturating_sub(1)],
            rhs: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.upper[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// `max |A - Aᵀ|`.
    pub fn max_asymmetry(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| (l - u).abs())
            .fold(0.0, f64::max)
    }

    pub fn solve(&self) -> Result<Vec<f64>> {
        solve_tridiagonal(&self.lower, &self.diag, &self.upper, &self.rhs)
    }
}

/// Thomas algorithm without pivoting. Fails on a pivot that is zero
/// relative to its row.
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = diag.len();
    if rhs.len() != n || lower.len() + 1 != n.max(1) || upper.len() + 1 != n.max(1) {
        return Err(Error::InvalidParameter(format!(
            "inconsistent tridiagonal sizes: lower {}, diag {n}, upper {}, rhs {}",
            lower.len(),
            upper.len(),
            rhs.len()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    for i in 0..n {
        let sub = if i > 0 { lower[i - 1] } else { 0.0 };
        let sup = if i + 1 < n { upper[i] } else { 0.0 };
        let pivot = if i > 0 {
            diag[i] - sub * c[i - 1]
        } else {
            diag[i]
        };
        let scale = diag[i].abs() + sub.abs() + sup.abs();
        if !(pivot.abs() > 1e-14 * scale) || !pivot.is_finite() {
            return Err(Error::SingularPivot { row: i, pivot });
        }
        c[i] = sup / pivot;
        d[i] = (rhs[i] - if i > 0 { sub * d[i - 1] } else { 0.0 }) / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}
