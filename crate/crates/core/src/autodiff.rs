//! Second-order Taylor jets and their reverse-mode adjoints.
//!
//! A [`Jet2`] carries `(f, f', f'')` of some quantity with respect to the
//! scalar network input `τ`. Pushing the lifted input `(τ, 1, 0)` through a
//! network yields `v̂(τ), v̂'(τ), v̂''(τ)` exactly.
//!
//! The loss depends on all three jet components, so training needs the
//! gradient of a function of `(v̂, v̂', v̂'')` with respect to the weights.
//! Every forward primitive here has a matching `*_adjoint` that maps an
//! adjoint of its output jet back to adjoints of its inputs. Smooth unary
//! maps need the third derivative of the scalar function for that.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet2 {
    pub val: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet2 {
    pub const ZERO: Jet2 = Jet2::new(0.0, 0.0, 0.0);

    pub const fn new(val: f64, d1: f64, d2: f64) -> Self {
        Self { val, d1, d2 }
    }

    /// A constant: `(c, 0, 0)`.
    pub const fn constant(c: f64) -> Self {
        Self::new(c, 0.0, 0.0)
    }

    /// The independent variable: `(τ, 1, 0)`.
    pub const fn variable(tau: f64) -> Self {
        Self::new(tau, 1.0, 0.0)
    }

    pub fn scale(self, c: f64) -> Self {
        Self::new(c * self.val, c * self.d1, c * self.d2)
    }

    /// Chain rule through a scalar map with derivatives `f1 = f'(val)`,
    /// `f2 = f''(val)` at this jet's value.
    #[inline]
    pub fn map(self, f0: f64, f1: f64, f2: f64) -> Self {
        Self::new(f0, f1 * self.d1, f2 * self.d1 * self.d1 + f1 * self.d2)
    }

    pub fn recip(self) -> Result<Self> {
        if self.val == 0.0 {
            return Err(Error::ZeroDivision);
        }
        let r = 1.0 / self.val;
        Ok(self.map(r, -r * r, 2.0 * r * r * r))
    }

    pub fn checked_div(self, rhs: Self) -> Result<Self> {
        Ok(self * rhs.recip()?)
    }

    pub fn exp(self) -> Self {
        let e = self.val.exp();
        self.map(e, e, e)
    }

    pub fn is_finite(&self) -> bool {
        self.val.is_finite() && self.d1.is_finite() && self.d2.is_finite()
    }

    /// `Σ` over the three components of `self ⊙ other`; the weight adjoint
    /// of an affine map `z = w·a` is `dot(z̄, a)`.
    #[inline]
    pub fn dot(self, other: Self) -> f64 {
        self.val * other.val + self.d1 * other.d1 + self.d2 * other.d2
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.val + rhs.val, self.d1 + rhs.d1, self.d2 + rhs.d2)
    }
}

impl AddAssign for Jet2 {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        self.val += rhs.val;
        self.d1 += rhs.d1;
        self.d2 += rhs.d2;
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(self, rhs: f64) -> Self {
        Self::new(self.val + rhs, self.d1, self.d2)
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.val - rhs.val, self.d1 - rhs.d1, self.d2 - rhs.d2)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    #[inline]
    fn mul(self, b: Self) -> Self {
        let a = self;
        Self::new(
            a.val * b.val,
            a.d1 * b.val + a.val * b.d1,
            a.d2 * b.val + 2.0 * a.d1 * b.d1 + a.val * b.d2,
        )
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, c: f64) -> Self {
        self.scale(c)
    }
}

/// Adjoints `(ā, b̄)` of `c = a * b` given `c̄`.
#[inline]
pub fn mul_adjoint(a: Jet2, b: Jet2, c_bar: Jet2) -> (Jet2, Jet2) {
    let a_bar = Jet2::new(
        c_bar.val * b.val + c_bar.d1 * b.d1 + c_bar.d2 * b.d2,
        c_bar.d1 * b.val + 2.0 * c_bar.d2 * b.d1,
        c_bar.d2 * b.val,
    );
    let b_bar = Jet2::new(
        c_bar.val * a.val + c_bar.d1 * a.d1 + c_bar.d2 * a.d2,
        c_bar.d1 * a.val + 2.0 * c_bar.d2 * a.d1,
        c_bar.d2 * a.val,
    );
    (a_bar, b_bar)
}

/// Adjoint of `z` for `a = z.map(f(z), f1, f2)`, where `f1..f3` are the first
/// three derivatives of `f` at `z.val`.
#[inline]
pub fn map_adjoint(z: Jet2, f1: f64, f2: f64, f3: f64, a_bar: Jet2) -> Jet2 {
    Jet2::new(
        a_bar.val * f1 + a_bar.d1 * f2 * z.d1 + a_bar.d2 * (f3 * z.d1 * z.d1 + f2 * z.d2),
        a_bar.d1 * f1 + 2.0 * a_bar.d2 * f2 * z.d1,
        a_bar.d2 * f1,
    )
}

/// Hidden-layer activation.
///
/// `Softmax` is applied across the neurons of a layer. On a single neuron it
/// collapses to the constant 1, so a per-neuron reading cannot produce a
/// trainable network; the layer-wide reading is the only useful one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationKind {
    Sigmoid,
    Tanh,
    Softmax,
    Relu,
    Elu,
    Selu,
    HardSigmoid,
    Linear,
}

pub const SELU_ALPHA: f64 = 1.673_263_242_354_377_3;
pub const SELU_LAMBDA: f64 = 1.050_700_987_355_480_5;

impl ActivationKind {
    pub const ALL: [ActivationKind; 8] = [
        ActivationKind::Relu,
        ActivationKind::Sigmoid,
        ActivationKind::Tanh,
        ActivationKind::Elu,
        ActivationKind::HardSigmoid,
        ActivationKind::Linear,
        ActivationKind::Selu,
        ActivationKind::Softmax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Sigmoid => "sigmoid",
            ActivationKind::Tanh => "tanh",
            ActivationKind::Softmax => "softmax",
            ActivationKind::Relu => "relu",
            ActivationKind::Elu => "elu",
            ActivationKind::Selu => "selu",
            ActivationKind::HardSigmoid => "hard_sigmoid",
            ActivationKind::Linear => "linear",
        }
    }

    pub fn is_elementwise(self) -> bool {
        self != ActivationKind::Softmax
    }

    /// `[f, f', f'', f''']` at `x` for elementwise kinds.
    ///
    /// Kinks (relu at 0, hard-sigmoid at ±2.5) take the zero subgradient and
    /// all second and third derivatives of piecewise-linear kinds are 0.
    /// For `Softmax` this returns the single-neuron degenerate constant 1.
    #[inline]
    pub fn derivatives(self, x: f64) -> [f64; 4] {
        match self {
            ActivationKind::Sigmoid => {
                let s = sigmoid(x);
                let ds = s * (1.0 - s);
                [
                    s,
                    ds,
                    ds * (1.0 - 2.0 * s),
                    ds * (1.0 - 6.0 * s + 6.0 * s * s),
                ]
            }
            ActivationKind::Tanh => {
                let t = x.tanh();
                let sech2 = 1.0 - t * t;
                [
                    t,
                    sech2,
                    -2.0 * t * sech2,
                    -2.0 * sech2 * (1.0 - 3.0 * t * t),
                ]
            }
            ActivationKind::Relu => {
                if x > 0.0 {
                    [x, 1.0, 0.0, 0.0]
                } else {
                    [0.0, 0.0, 0.0, 0.0]
                }
            }
            ActivationKind::Elu => {
                if x > 0.0 {
                    [x, 1.0, 0.0, 0.0]
                } else {
                    let e = x.exp();
                    [e - 1.0, e, e, e]
                }
            }
            ActivationKind::Selu => {
                if x > 0.0 {
                    [SELU_LAMBDA * x, SELU_LAMBDA, 0.0, 0.0]
                } else {
                    let e = SELU_LAMBDA * SELU_ALPHA * x.exp();
                    [e - SELU_LAMBDA * SELU_ALPHA, e, e, e]
                }
            }
            ActivationKind::HardSigmoid => {
                if x <= -2.5 {
                    [0.0, 0.0, 0.0, 0.0]
                } else if x >= 2.5 {
                    [1.0, 0.0, 0.0, 0.0]
                } else {
                    [0.2 * x + 0.5, 0.2, 0.0, 0.0]
                }
            }
            ActivationKind::Linear => [x, 1.0, 0.0, 0.0],
            ActivationKind::Softmax => [1.0, 0.0, 0.0, 0.0],
        }
    }

    /// Scalar activation value.
    pub fn apply(self, x: f64) -> f64 {
        self.derivatives(x)[0]
    }
}

impl std::fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ActivationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        ActivationKind::ALL
            .into_iter()
            .find(|k| {
                k.name() == norm || (norm == "hardsigmoid" && *k == ActivationKind::HardSigmoid)
            })
            .ok_or_else(|| Error::InvalidParameter(format!("unknown activation '{s}'")))
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Elementwise activation of a single jet.
#[inline]
pub fn jet_activate(kind: ActivationKind, a: Jet2) -> Jet2 {
    let [f0, f1, f2, _] = kind.derivatives(a.val);
    a.map(f0, f1, f2)
}

/// Activate a whole layer, `out[i] = act(z)[i]`.
pub fn activate_layer(kind: ActivationKind, z: &[Jet2], out: &mut [Jet2]) {
    debug_assert_eq!(z.len(), out.len());
    if kind.is_elementwise() {
        for (o, &zi) in out.iter_mut().zip(z) {
            *o = jet_activate(kind, zi);
        }
    } else {
        softmax_forward(z, out);
    }
}

/// Adjoint of a layer activation. `z` is the pre-activation, `a` the
/// activated output from the forward pass.
pub fn activate_layer_adjoint(
    kind: ActivationKind,
    z: &[Jet2],
    a: &[Jet2],
    a_bar: &[Jet2],
    z_bar: &mut [Jet2],
) {
    if kind.is_elementwise() {
        for i in 0..z.len() {
            let [_, f1, f2, f3] = kind.derivatives(z[i].val);
            z_bar[i] = map_adjoint(z[i], f1, f2, f3, a_bar[i]);
        }
    } else {
        softmax_adjoint(z, a, a_bar, z_bar);
    }
}

fn softmax_shift(z: &[Jet2]) -> f64 {
    z.iter().map(|j| j.val).fold(f64::NEG_INFINITY, f64::max)
}

// s_i = e_i * R,  e_i = exp(z_i - m),  R = 1 / Σ e_j.
// The shift m only touches the value component, and softmax is invariant
// under it, so it drops out of the adjoint.
fn softmax_forward(z: &[Jet2], out: &mut [Jet2]) {
    let m = softmax_shift(z);
    let mut sum = Jet2::ZERO;
    for (o, &zi) in out.iter_mut().zip(z) {
        *o = (zi + (-m)).exp();
        sum += *o;
    }
    // sum.val >= 1 because the largest term is exp(0).
    let r = sum.recip().expect("softmax normaliser is at least 1");
    for o in out.iter_mut() {
        *o = *o * r;
    }
}

fn softmax_adjoint(z: &[Jet2], _a: &[Jet2], a_bar: &[Jet2], z_bar: &mut [Jet2]) {
    let m = softmax_shift(z);
    let mut sum = Jet2::ZERO;
    for (zb, &zi) in z_bar.iter_mut().zip(z) {
        // Stash e_i in z_bar until the adjoints are known.
        *zb = (zi + (-m)).exp();
        sum += *zb;
    }
    let inv = 1.0 / sum.val;
    let r = sum.map(inv, -inv * inv, 2.0 * inv * inv * inv);

    let mut r_bar = Jet2::ZERO;
    for (zb, &sb) in z_bar.iter().zip(a_bar) {
        let (_, rb) = mul_adjoint(*zb, r, sb);
        r_bar += rb;
    }
    let sum_bar = map_adjoint(
        sum,
        -inv * inv,
        2.0 * inv * inv * inv,
        -6.0 * inv.powi(4),
        r_bar,
    );

    for i in 0..z.len() {
        let e = z_bar[i];
        let (eb, _) = mul_adjoint(e, r, a_bar[i]);
        let e_bar = eb + sum_bar;
        let shifted = z[i] + (-m);
        z_bar[i] = map_adjoint(shifted, e.val, e.val, e.val, e_bar);
    }
}

/// Scalar loss together with its gradient over the flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientRecord {
    pub loss_value: f64,
    pub gradient: Vec<f64>,
}

impl GradientRecord {
    pub fn zeros(n_params: usize) -> Self {
        Self {
            loss_value: 0.0,
            gradient: vec![0.0; n_params],
        }
    }

    /// Fails with [`Error::NonFinite`] unless the loss and every gradient
    /// entry are finite.
    pub fn ensure_finite(self) -> Result<Self> {
        if !self.loss_value.is_finite() {
            return Err(Error::NonFinite(format!("loss = {}", self.loss_value)));
        }
        if let Some(i) = self.gradient.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFinite(format!(
                "gradient[{i}] = {}",
                self.gradient[i]
            )));
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn jet_close(a: Jet2, b: Jet2, tol: f64) {
        assert!(
            (a.val - b.val).abs() <= tol
                && (a.d1 - b.d1).abs() <= tol
                && (a.d2 - b.d2).abs() <= tol,
            "{a:?} vs {b:?}"
        );
    }

    #[test]
    fn lifting() {
        assert_eq!(Jet2::constant(3.0), Jet2::new(3.0, 0.0, 0.0));
        assert_eq!(Jet2::variable(3.0), Jet2::new(3.0, 1.0, 0.0));
    }

    #[test]
    fn square_of_variable() {
        let t = Jet2::variable(3.0);
        assert_eq!(t * t, Jet2::new(9.0, 6.0, 2.0));
    }

    #[test]
    fn reciprocal_of_variable() {
        let one = Jet2::constant(1.0);
        let q = one.checked_div(Jet2::variable(2.0)).unwrap();
        jet_close(q, Jet2::new(0.5, -0.25, 0.25), 1e-15);
    }

    #[test]
    fn division_by_zero_value() {
        let r = Jet2::constant(1.0).checked_div(Jet2::new(0.0, 1.0, 0.0));
        assert!(matches!(r, Err(Error::ZeroDivision)));
    }

    #[test]
    fn mul_then_div_round_trip() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let a = Jet2::new(
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
            );
            let mut bv: f64 = rng.random_range(0.5..3.0);
            if rng.random_bool(0.5) {
                bv = -bv;
            }
            let b = Jet2::new(bv, rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let back = (a * b).checked_div(b).unwrap();
            jet_close(
                back,
                a,
                1e-12 * (1.0 + a.val.abs() + a.d1.abs() + a.d2.abs()) * 10.0,
            );
        }
    }

    #[test]
    fn sigmoid_and_tanh_at_zero() {
        jet_close(
            jet_activate(ActivationKind::Sigmoid, Jet2::variable(0.0)),
            Jet2::new(0.5, 0.25, 0.0),
            1e-15,
        );
        jet_close(
            jet_activate(ActivationKind::Tanh, Jet2::variable(0.0)),
            Jet2::new(0.0, 1.0, 0.0),
            1e-15,
        );
    }

    #[test]
    fn activation_derivatives_match_finite_differences() {
        let x = 0.7;
        let h = 1e-5;
        for kind in ActivationKind::ALL {
            if !kind.is_elementwise() {
                continue;
            }
            let f = |x: f64| kind.apply(x);
            let j = jet_activate(kind, Jet2::variable(x));
            let fd1 = (f(x + h) - f(x - h)) / (2.0 * h);
            let fd2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
            assert!(
                (j.d1 - fd1).abs() <= 1e-6 * (1.0 + fd1.abs()),
                "{kind} d1 {} vs {fd1}",
                j.d1
            );
            assert!(
                (j.d2 - fd2).abs() <= 1e-4 * (1.0 + fd2.abs()),
                "{kind} d2 {} vs {fd2}",
                j.d2
            );
            // Third derivative against differences of the analytic second.
            let [_, _, _, f3] = kind.derivatives(x);
            let f2 = |x: f64| kind.derivatives(x)[2];
            let fd3 = (f2(x + h) - f2(x - h)) / (2.0 * h);
            assert!(
                (f3 - fd3).abs() <= 1e-6 * (1.0 + fd3.abs()),
                "{kind} f3 {f3} vs {fd3}"
            );
        }
        // Negative branch of elu/selu.
        for kind in [ActivationKind::Elu, ActivationKind::Selu] {
            let x = -0.4;
            let j = jet_activate(kind, Jet2::variable(x));
            let fd1 = (kind.apply(x + h) - kind.apply(x - h)) / (2.0 * h);
            assert_abs_diff_eq!(j.d1, fd1, epsilon = 1e-8);
        }
    }

    #[test]
    fn kink_conventions() {
        assert_eq!(ActivationKind::Relu.derivatives(0.0), [0.0; 4]);
        assert_eq!(ActivationKind::Relu.derivatives(2.0), [2.0, 1.0, 0.0, 0.0]);
        assert_eq!(
            ActivationKind::HardSigmoid.derivatives(0.0),
            [0.5, 0.2, 0.0, 0.0]
        );
        assert_eq!(ActivationKind::HardSigmoid.derivatives(-2.5), [0.0; 4]);
        assert_eq!(
            ActivationKind::HardSigmoid.derivatives(3.0),
            [1.0, 0.0, 0.0, 0.0]
        );
    }

    #[test]
    fn single_neuron_softmax_is_constant() {
        let mut out = [Jet2::ZERO];
        activate_layer(
            ActivationKind::Softmax,
            &[Jet2::new(0.3, 1.0, 2.0)],
            &mut out,
        );
        jet_close(out[0], Jet2::constant(1.0), 1e-15);
    }

    #[test]
    fn softmax_layer_matches_scalar_composition() {
        // Each z_i is a smooth function of τ; compare jets to FD of softmax(z(τ)).
        let zs = |t: f64| [0.3 * t + 0.1, -t * t + 0.5, (2.0 * t).sin()];
        let zj = |t: f64| {
            let v = Jet2::variable(t);
            [v * 0.3 + 0.1, -(v * v) + 0.5, {
                let s = (2.0 * t).sin();
                let c = (2.0 * t).cos();
                Jet2::new(s, 2.0 * c, -4.0 * s)
            }]
        };
        let soft = |t: f64| {
            let z = zs(t);
            let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let e: Vec<f64> = z.iter().map(|x| (x - m).exp()).collect();
            let s: f64 = e.iter().sum();
            e.into_iter().map(|x| x / s).collect::<Vec<_>>()
        };
        let t = 0.4;
        let h = 1e-4;
        let mut out = [Jet2::ZERO; 3];
        activate_layer(ActivationKind::Softmax, &zj(t), &mut out);
        let (p, c, m) = (soft(t + h), soft(t), soft(t - h));
        for i in 0..3 {
            assert_abs_diff_eq!(out[i].val, c[i], epsilon = 1e-14);
            assert_abs_diff_eq!(out[i].d1, (p[i] - m[i]) / (2.0 * h), epsilon = 1e-7);
            assert_abs_diff_eq!(
                out[i].d2,
                (p[i] - 2.0 * c[i] + m[i]) / (h * h),
                epsilon = 1e-5
            );
        }
    }

    /// Numerically checks an adjoint rule: for a random output adjoint, the
    /// input adjoint must equal the gradient of `<ȳ, f(x)>` w.r.t. `x`.
    fn check_layer_adjoint(kind: ActivationKind, z: &[Jet2]) {
        let n = z.len();
        let bar: Vec<Jet2> = (0..n)
            .map(|i| {
                Jet2::new(
                    0.3 + i as f64 * 0.1,
                    -0.7 + 0.2 * i as f64,
                    0.45 - 0.3 * i as f64,
                )
            })
            .collect();
        let pairing = |z: &[Jet2]| {
            let mut out = vec![Jet2::ZERO; n];
            activate_layer(kind, z, &mut out);
            out.iter().zip(&bar).map(|(o, b)| o.dot(*b)).sum::<f64>()
        };
        let mut a = vec![Jet2::ZERO; n];
        activate_layer(kind, z, &mut a);
        let mut zb = vec![Jet2::ZERO; n];
        activate_layer_adjoint(kind, z, &a, &bar, &mut zb);
        let h = 1e-6;
        for i in 0..n {
            for c in 0..3 {
                let mut zp = z.to_vec();
                let mut zm = z.to_vec();
                let bump = |j: &mut Jet2, d: f64| match c {
                    0 => j.val += d,
                    1 => j.d1 += d,
                    _ => j.d2 += d,
                };
                bump(&mut zp[i], h);
                bump(&mut zm[i], -h);
                let fd = (pairing(&zp) - pairing(&zm)) / (2.0 * h);
                let an = [zb[i].val, zb[i].d1, zb[i].d2][c];
                assert!(
                    (an - fd).abs() <= 1e-6 * (1.0 + fd.abs()),
                    "{kind} i={i} c={c}: {an} vs {fd}"
                );
            }
        }
    }

    #[test]
    fn layer_adjoints_match_finite_differences() {
        let z = [
            Jet2::new(0.4, 1.3, -0.2),
            Jet2::new(-0.8, 0.5, 0.9),
            Jet2::new(1.1, -0.6, 0.3),
        ];
        for kind in [
            ActivationKind::Sigmoid,
            ActivationKind::Tanh,
            ActivationKind::Softmax,
            ActivationKind::Elu,
            ActivationKind::Selu,
            ActivationKind::Linear,
        ] {
            check_layer_adjoint(kind, &z);
        }
    }

    #[test]
    fn mul_adjoint_matches_finite_differences() {
        let a = Jet2::new(0.7, -1.2, 0.4);
        let b = Jet2::new(-0.3, 0.8, 1.5);
        let cb = Jet2::new(0.2, -0.5, 0.9);
        let (ab, bb) = mul_adjoint(a, b, cb);
        let f = |a: Jet2, b: Jet2| (a * b).dot(cb);
        let h = 1e-6;
        let e = [
            Jet2::new(h, 0.0, 0.0),
            Jet2::new(0.0, h, 0.0),
            Jet2::new(0.0, 0.0, h),
        ];
        let an_a = [ab.val, ab.d1, ab.d2];
        let an_b = [bb.val, bb.d1, bb.d2];
        for c in 0..3 {
            let fda = (f(a + e[c], b) - f(a - e[c], b)) / (2.0 * h);
            let fdb = (f(a, b + e[c]) - f(a, b - e[c])) / (2.0 * h);
            assert_abs_diff_eq!(an_a[c], fda, epsilon = 1e-8);
            assert_abs_diff_eq!(an_b[c], fdb, epsilon = 1e-8);
        }
    }

    #[test]
    fn parse_activation_names() {
        for k in ActivationKind::ALL {
            assert_eq!(k.name().parse::<ActivationKind>().unwrap(), k);
        }
        assert_eq!(
            "hard-sigmoid".parse::<ActivationKind>().unwrap(),
            ActivationKind::HardSigmoid
        );
        assert!("swish".parse::<ActivationKind>().is_err());
    }

    #[test]
    fn gradient_record_finiteness() {
        let g = GradientRecord {
            loss_value: 1.0,
            gradient: vec![0.0, f64::NAN],
        };
        assert!(matches!(g.ensure_finite(), Err(Error::NonFinite(_))));
        assert!(GradientRecord::zeros(3).ensure_finite().is_ok());
    }
}
