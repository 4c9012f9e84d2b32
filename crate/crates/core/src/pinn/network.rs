use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::autodiff::{
    activate_layer, activate_layer_adjoint, ActivationKind, GradientRecord, Jet2,
};
use crate::error::{Error, Result};
use crate::model::{SolutionTable, Source};
use crate::par::Execution;

/// Sites per work unit when evaluating a loss. Fixed so that the summation
/// order (and hence every bit of the result) is independent of threading.
pub const SITE_CHUNK: usize = 16;

/// Draws a `fan_out × fan_in` row-major weight matrix from a normal with
/// standard deviation `sqrt(2 / (fan_in + fan_out))`, resampling any draw
/// beyond two standard deviations.
pub fn glorot_normal_init<R: Rng + ?Sized>(fan_in: usize, fan_out: usize, rng: &mut R) -> Vec<f64> {
    assert!(fan_in >= 1 && fan_out >= 1, "fan sizes must be positive");
    let std_dev = glorot_std_dev(fan_in, fan_out);
    let normal = Normal::new(0.0, std_dev).expect("finite positive std dev");
    (0..fan_in * fan_out)
        .map(|_| loop {
            let x: f64 = normal.sample(rng);
            if x.abs() <= 2.0 * std_dev {
                break x;
            }
        })
        .collect()
}

pub fn glorot_std_dev(fan_in: usize, fan_out: usize) -> f64 {
    (2.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Dense `1 → k → … → k → 1` network with a linear output neuron.
///
/// Parameters live in one flat vector in canonical order: layer by layer
/// from the input side, each layer's weight matrix (row-major,
/// `out × in`) followed by its bias vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    widths: Vec<usize>,
    activation: ActivationKind,
    params: Vec<f64>,
    #[serde(skip)]
    offsets: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
struct LayerShape {
    n_in: usize,
    n_out: usize,
    offset: usize,
}

impl LayerShape {
    fn weights<'a>(&self, p: &'a [f64]) -> &'a [f64] {
        &p[self.offset..self.offset + self.n_in * self.n_out]
    }

    fn biases<'a>(&self, p: &'a [f64]) -> &'a [f64] {
        let b = self.offset + self.n_in * self.n_out;
        &p[b..b + self.n_out]
    }
}

fn layer_offsets(widths: &[usize]) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(widths.len());
    let mut acc = 0;
    for w in widths.windows(2) {
        offsets.push(acc);
        acc += w[0] * w[1] + w[1];
    }
    offsets.push(acc);
    offsets
}

impl Network {
    /// Widths for `hidden_layers` layers of `neurons` each.
    pub fn architecture(hidden_layers: usize, neurons: usize) -> Vec<usize> {
        let mut w = vec![1];
        w.extend(std::iter::repeat_n(neurons, hidden_layers));
        w.push(1);
        w
    }

    /// Builds a network from explicit parameters in canonical order.
    pub fn from_params(
        widths: Vec<usize>,
        activation: ActivationKind,
        params: Vec<f64>,
    ) -> Result<Self> {
        if widths.len() < 2 || widths[0] != 1 || *widths.last().unwrap() != 1 || widths.contains(&0)
        {
            return Err(Error::InvalidParameter(format!(
                "network widths must be 1 → k… → 1 with k ≥ 1, got {widths:?}"
            )));
        }
        let offsets = layer_offsets(&widths);
        let n = *offsets.last().unwrap();
        if params.len() != n {
            return Err(Error::InvalidParameter(format!(
                "expected {n} parameters, got {}",
                params.len()
            )));
        }
        Ok(Self {
            widths,
            activation,
            params,
            offsets,
        })
    }

    pub fn zeros(widths: Vec<usize>, activation: ActivationKind) -> Result<Self> {
        let n = *layer_offsets(&widths).last().unwrap_or(&0);
        Self::from_params(widths, activation, vec![0.0; n])
    }

    /// Glorot-normal weights, zero biases.
    pub fn glorot<R: Rng + ?Sized>(
        widths: Vec<usize>,
        activation: ActivationKind,
        rng: &mut R,
    ) -> Result<Self> {
        let mut net = Self::zeros(widths, activation)?;
        for l in 0..net.n_layers() {
            let s = net.shape(l);
            let w = glorot_normal_init(s.n_in, s.n_out, rng);
            net.params[s.offset..s.offset + w.len()].copy_from_slice(&w);
        }
        Ok(net)
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn activation(&self) -> ActivationKind {
        self.activation
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    /// Number of affine layers (hidden layers plus the output layer).
    pub fn n_layers(&self) -> usize {
        self.widths.len() - 1
    }

    /// Restores the derived layout after deserialization.
    pub fn rebuild(mut self) -> Result<Self> {
        self.offsets = layer_offsets(&self.widths);
        Self::from_params(self.widths, self.activation, self.params)
    }

    fn shape(&self, layer: usize) -> LayerShape {
        LayerShape {
            n_in: self.widths[layer],
            n_out: self.widths[layer + 1],
            offset: self.offsets[layer],
        }
    }

    fn tape(&self) -> Tape {
        Tape {
            a: self.widths.iter().map(|&w| vec![Jet2::ZERO; w]).collect(),
            z: self.widths.iter().map(|&w| vec![Jet2::ZERO; w]).collect(),
            bar: vec![Jet2::ZERO; *self.widths.iter().max().unwrap()],
            bar_prev: vec![Jet2::ZERO; *self.widths.iter().max().unwrap()],
        }
    }

    /// `(v̂, v̂', v̂'')` at `tau`.
    pub fn forward_jet(&self, tau: f64) -> Jet2 {
        self.forward_from(Jet2::variable(tau), &mut self.tape())
    }

    /// Propagates an arbitrary input jet.
    pub fn forward_from(&self, input: Jet2, tape: &mut Tape) -> Jet2 {
        tape.a[0][0] = input;
        let last = self.n_layers() - 1;
        for l in 0..self.n_layers() {
            let s = self.shape(l);
            let w = s.weights(&self.params);
            let b = s.biases(&self.params);
            let (lower, upper) = tape.a.split_at_mut(l + 1);
            let prev = &lower[l];
            let z = &mut tape.z[l + 1];
            for i in 0..s.n_out {
                let row = &w[i * s.n_in..(i + 1) * s.n_in];
                let mut acc = Jet2::ZERO;
                for (wij, aj) in row.iter().zip(prev.iter()) {
                    acc.val += wij * aj.val;
                    acc.d1 += wij * aj.d1;
                    acc.d2 += wij * aj.d2;
                }
                acc.val += b[i];
                z[i] = acc;
            }
            if l == last {
                upper[0].copy_from_slice(z);
            } else {
                activate_layer(self.activation, z, &mut upper[0]);
            }
        }
        tape.a[self.n_layers()][0]
    }

    /// Scalar forward pass; same operation order as the `val` channel of
    /// [`forward_from`](Self::forward_from).
    pub fn value(&self, tau: f64) -> f64 {
        let mut a = vec![tau];
        let last = self.n_layers() - 1;
        for l in 0..self.n_layers() {
            let s = self.shape(l);
            let w = s.weights(&self.params);
            let b = s.biases(&self.params);
            let mut z: Vec<f64> = (0..s.n_out)
                .map(|i| {
                    let mut acc = 0.0;
                    for (wij, aj) in w[i * s.n_in..(i + 1) * s.n_in].iter().zip(&a) {
                        acc += wij * aj;
                    }
                    acc + b[i]
                })
                .collect();
            if l != last {
                if self.activation.is_elementwise() {
                    for zi in &mut z {
                        *zi = self.activation.apply(*zi);
                    }
                } else {
                    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let mut sum = 0.0;
                    for zi in &mut z {
                        *zi = (*zi + (-m)).exp();
                        sum += *zi;
                    }
                    let r = 1.0 / sum;
                    for zi in &mut z {
                        *zi *= r;
                    }
                }
            }
            a = z;
        }
        a[0]
    }

    /// Accumulates `∂⟨ȳ, output jet⟩/∂θ` into `grad` for the forward pass
    /// currently held in `tape`.
    pub fn backward(&self, tape: &mut Tape, y_bar: Jet2, grad: &mut [f64]) {
        debug_assert_eq!(grad.len(), self.params.len());
        let Tape {
            a,
            z,
            bar,
            bar_prev,
        } = tape;
        bar[0] = y_bar;
        for l in (0..self.n_layers()).rev() {
            let s = self.shape(l);
            let prev = &a[l];
            let wb = s.offset + s.n_in * s.n_out;
            for i in 0..s.n_out {
                let zb = bar[i];
                let g = &mut grad[s.offset + i * s.n_in..s.offset + (i + 1) * s.n_in];
                for (gij, aj) in g.iter_mut().zip(prev.iter()) {
                    *gij += zb.dot(*aj);
                }
                grad[wb + i] += zb.val;
            }
            if l == 0 {
                break;
            }
            let w = s.weights(&self.params);
            let a_bar = &mut bar_prev[..s.n_in];
            a_bar.fill(Jet2::ZERO);
            for i in 0..s.n_out {
                let zb = bar[i];
                for (ab, wij) in a_bar.iter_mut().zip(&w[i * s.n_in..(i + 1) * s.n_in]) {
                    ab.val += wij * zb.val;
                    ab.d1 += wij * zb.d1;
                    ab.d2 += wij * zb.d2;
                }
            }
            activate_layer_adjoint(self.activation, &z[l], &a[l], a_bar, &mut bar[..s.n_in]);
        }
    }

    /// Evaluates a site-wise loss. Returns each site's contribution in site
    /// order.
    pub fn loss_values<L: PointLoss + ?Sized>(
        &self,
        loss: &L,
        exec: Execution,
    ) -> Result<Vec<f64>> {
        let chunks = exec.map_chunks(loss.sites(), SITE_CHUNK, |start, sites| {
            let mut tape = self.tape();
            sites
                .iter()
                .enumerate()
                .map(|(k, &tau)| {
                    let out = self.forward_from(Jet2::variable(tau), &mut tape);
                    loss.term(start + k, out).map(|t| t.0)
                })
                .collect::<Result<Vec<f64>>>()
        });
        let mut values = Vec::with_capacity(loss.sites().len());
        for c in chunks {
            values.extend(c?);
        }
        Ok(values)
    }

    /// Exact gradient of `Σ_sites loss.term` over all parameters.
    pub fn loss_gradient<L: PointLoss + ?Sized>(
        &self,
        loss: &L,
        exec: Execution,
    ) -> Result<LossEvaluation> {
        let n = self.n_params();
        let chunks = exec.map_chunks(
            loss.sites(),
            SITE_CHUNK,
            |start, sites| -> Result<(Vec<f64>, Vec<f64>)> {
                let mut tape = self.tape();
                let mut grad = vec![0.0; n];
                let mut values = Vec::with_capacity(sites.len());
                for (k, &tau) in sites.iter().enumerate() {
                    let out = self.forward_from(Jet2::variable(tau), &mut tape);
                    let (value, y_bar) = loss.term(start + k, out)?;
                    values.push(value);
                    self.backward(&mut tape, y_bar, &mut grad);
                }
                Ok((values, grad))
            },
        );
        let mut site_values = Vec::with_capacity(loss.sites().len());
        let mut gradient = vec![0.0; n];
        for c in chunks {
            let (v, g) = c?;
            site_values.extend(v);
            for (acc, gi) in gradient.iter_mut().zip(g) {
                *acc += gi;
            }
        }
        let loss_value = site_values.iter().sum();
        let record = GradientRecord {
            loss_value,
            gradient,
        }
        .ensure_finite()?;
        Ok(LossEvaluation {
            site_values,
            record,
        })
    }

    /// Samples `v̂` on `grid`.
    pub fn evaluate(&self, grid: &[f64]) -> Result<SolutionTable> {
        SolutionTable::new(
            grid.iter().map(|&t| (t, self.value(t))).collect(),
            Source::Pinn,
        )
    }
}

/// Forward-pass storage for one evaluation site.
pub struct Tape {
    a: Vec<Vec<Jet2>>,
    z: Vec<Vec<Jet2>>,
    bar: Vec<Jet2>,
    bar_prev: Vec<Jet2>,
}

/// A loss that is a sum of terms, each a function of the network's output
/// jet at one input site.
pub trait PointLoss: Sync {
    fn sites(&self) -> &[f64];

    /// Contribution of site `index` and its gradient with respect to the
    /// output jet components `(v̂, v̂', v̂'')`.
    fn term(&self, index: usize, out: Jet2) -> Result<(f64, Jet2)>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossEvaluation {
    pub site_values: Vec<f64>,
    pub record: GradientRecord,
}
