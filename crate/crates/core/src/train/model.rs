//! Linear and one-hidden-layer ReLU scorers with hand-written backprop.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::surrogate::{sign, MarginPenalty};
use crate::train::data::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arch {
    Linear,
    Mlp { hidden: usize },
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Linear => f.pad("linear"),
            Self::Mlp { hidden } => write!(f, "mlp:{hidden}"),
        }
    }
}

impl FromStr for Arch {
    type Err = Error;

    /// `linear` or `mlp:<hidden>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "linear" {
            return Ok(Self::Linear);
        }
        let hidden = s
            .strip_prefix("mlp:")
            .and_then(|h| h.trim().parse::<usize>().ok())
            .filter(|&h| h > 0)
            .ok_or_else(|| Error::Input(format!("unknown architecture `{s}`")))?;
        Ok(Self::Mlp { hidden })
    }
}

/// Per-example loss applied to the model output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    /// `φ(y·s(x))` on a scalar score, labels `±1`.
    Margin(MarginPenalty),
    /// Softmax cross-entropy on logits, labels `0..K`.
    CrossEntropy,
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Margin(phi) => write!(f, "{phi}"),
            Self::CrossEntropy => f.pad("cross-entropy"),
        }
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "cross-entropy" => Ok(Self::CrossEntropy),
            other => Ok(Self::Margin(other.parse()?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    arch: Arch,
    input_dim: usize,
    output_dim: usize,
    /// Per layer: weights (row-major, `out × in`) then biases.
    params: Vec<f64>,
}

/// Per-example losses and gradients for a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct PerExample {
    pub losses: Vec<f64>,
    /// Row `i` (length `n_params`) is the gradient of `losses[i]`.
    pub grads: Vec<f64>,
    pub n_params: usize,
}

impl PerExample {
    pub fn grad(&self, i: usize) -> &[f64] {
        &self.grads[i * self.n_params..(i + 1) * self.n_params]
    }

    pub fn len(&self) -> usize {
        self.losses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.losses.is_empty()
    }

    pub fn mean_loss(&self) -> f64 {
        self.losses.iter().sum::<f64>() / self.losses.len() as f64
    }

    /// `Σᵢ wᵢ ∇Lᵢ`.
    pub fn weighted_grad(&self, weights: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_params];
        for (i, &w) in weights.iter().enumerate() {
            if w != 0.0 {
                for (o, g) in out.iter_mut().zip(self.grad(i)) {
                    *o += w * g;
                }
            }
        }
        out
    }
}

fn param_count(arch: Arch, input_dim: usize, output_dim: usize) -> usize {
    match arch {
        Arch::Linear => output_dim * input_dim + output_dim,
        Arch::Mlp { hidden } => hidden * input_dim + hidden + output_dim * hidden + output_dim,
    }
}

impl Model {
    /// Weights uniform on `±1/√fan_in`, biases zero.
    pub fn init(
        arch: Arch,
        input_dim: usize,
        output_dim: usize,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if input_dim == 0 || output_dim == 0 {
            return Err(Error::Input("model dimensions must be positive".into()));
        }
        let mut params = Vec::with_capacity(param_count(arch, input_dim, output_dim));
        let mut layer = |params: &mut Vec<f64>, fan_in: usize, fan_out: usize| {
            let bound = 1.0 / (fan_in as f64).sqrt();
            params.extend((0..fan_in * fan_out).map(|_| rng.random_range(-bound..=bound)));
            params.extend(std::iter::repeat_n(0.0, fan_out));
        };
        match arch {
            Arch::Linear => layer(&mut params, input_dim, output_dim),
            Arch::Mlp { hidden } => {
                layer(&mut params, input_dim, hidden);
                layer(&mut params, hidden, output_dim);
            }
        }
        Ok(Self {
            arch,
            input_dim,
            output_dim,
            params,
        })
    }

    pub fn from_params(
        arch: Arch,
        input_dim: usize,
        output_dim: usize,
        params: Vec<f64>,
    ) -> Result<Self> {
        let expected = param_count(arch, input_dim, output_dim);
        if params.len() != expected {
            return Err(Error::Input(format!(
                "{arch} model {input_dim}->{output_dim} needs {expected} params, got {}",
                params.len()
            )));
        }
        Ok(Self {
            arch,
            input_dim,
            output_dim,
            params,
        })
    }

    pub fn arch(&self) -> Arch {
        self.arch
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
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

    pub fn param_norm(&self) -> f64 {
        self.params.iter().map(|p| p * p).sum::<f64>().sqrt()
    }

    /// Output vector (`output_dim` entries) and, for the MLP, hidden pre-activations.
    fn forward_into(&self, x: &[f64], out: &mut [f64], pre: &mut [f64]) {
        let dense = |w: &[f64], b: &[f64], input: &[f64], out: &mut [f64]| {
            let n_in = input.len();
            for (j, o) in out.iter_mut().enumerate() {
                let row = &w[j * n_in..(j + 1) * n_in];
                *o = b[j] + row.iter().zip(input).map(|(a, b)| a * b).sum::<f64>();
            }
        };
        let (d, k) = (self.input_dim, self.output_dim);
        match self.arch {
            Arch::Linear => {
                let (w, b) = self.params.split_at(k * d);
                dense(w, b, x, out);
            }
            Arch::Mlp { hidden: h } => {
                let (w1, rest) = self.params.split_at(h * d);
                let (b1, rest) = rest.split_at(h);
                let (w2, b2) = rest.split_at(k * h);
                dense(w1, b1, x, pre);
                let act: Vec<f64> = pre.iter().map(|&z| z.max(0.0)).collect();
                dense(w2, b2, &act, out);
            }
        }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.output_dim];
        let mut pre = vec![0.0; self.hidden_width()];
        self.forward_into(x, &mut out, &mut pre);
        out
    }

    fn hidden_width(&self) -> usize {
        match self.arch {
            Arch::Linear => 0,
            Arch::Mlp { hidden } => hidden,
        }
    }

    /// Predicted label: `sign(s)` for a scalar score, else the first argmax.
    pub fn predict(&self, x: &[f64]) -> i32 {
        let out = self.forward(x);
        if self.output_dim == 1 {
            sign(out[0]) as i32
        } else {
            argmax(&out) as i32
        }
    }

    fn check_loss(&self, loss: LossKind) -> Result<()> {
        match (loss, self.output_dim) {
            (LossKind::Margin(_), 1) => Ok(()),
            (LossKind::CrossEntropy, k) if k >= 2 => Ok(()),
            _ => Err(Error::Input(format!(
                "loss `{loss}` does not fit a model with {} outputs",
                self.output_dim
            ))),
        }
    }

    /// Per-example losses and their gradients with respect to all parameters.
    pub fn loss_and_grad(
        &self,
        data: &Dataset,
        idx: &[usize],
        loss: LossKind,
    ) -> Result<PerExample> {
        self.check_loss(loss)?;
        if idx.is_empty() {
            return Err(Error::Input("empty batch".into()));
        }
        let p = self.n_params();
        let (d, k, h) = (self.input_dim, self.output_dim, self.hidden_width());
        let mut losses = Vec::with_capacity(idx.len());
        let mut grads = vec![0.0; idx.len() * p];
        let mut out = vec![0.0; k];
        let mut pre = vec![0.0; h];
        let mut delta = vec![0.0; k];
        for (row, &i) in idx.iter().enumerate() {
            let x = data.x(i);
            let y = data.y(i);
            self.forward_into(x, &mut out, &mut pre);
            let l = output_loss(loss, &out, y, &mut delta)?;
            losses.push(l);
            let g = &mut grads[row * p..(row + 1) * p];
            match self.arch {
                Arch::Linear => outer_into(g, &delta, x),
                Arch::Mlp { .. } => {
                    let act: Vec<f64> = pre.iter().map(|&z| z.max(0.0)).collect();
                    let (g1, g2) = g.split_at_mut(h * d + h);
                    outer_into(g2, &delta, &act);
                    let w2 = &self.params[h * d + h..h * d + h + k * h];
                    let dh: Vec<f64> = (0..h)
                        .map(|j| {
                            if pre[j] > 0.0 {
                                (0..k).map(|c| w2[c * h + j] * delta[c]).sum()
                            } else {
                                0.0
                            }
                        })
                        .collect();
                    outer_into(g1, &dh, x);
                }
            }
        }
        Ok(PerExample {
            losses,
            grads,
            n_params: p,
        })
    }

    /// Average loss and accuracy over a whole dataset.
    pub fn evaluate(&self, data: &Dataset, loss: LossKind) -> Result<(f64, f64)> {
        self.check_loss(loss)?;
        let n = data.len();
        if n == 0 {
            return Err(Error::Input("cannot evaluate on an empty dataset".into()));
        }
        let mut out = vec![0.0; self.output_dim];
        let mut pre = vec![0.0; self.hidden_width()];
        let mut delta = vec![0.0; self.output_dim];
        let (mut total, mut correct) = (0.0, 0usize);
        for i in 0..n {
            self.forward_into(data.x(i), &mut out, &mut pre);
            total += output_loss(loss, &out, data.y(i), &mut delta)?;
            let pred = if self.output_dim == 1 {
                sign(out[0]) as i32
            } else {
                argmax(&out) as i32
            };
            correct += usize::from(pred == data.y(i));
        }
        Ok((total / n as f64, correct as f64 / n as f64))
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Writes `[a ⊗ b, a]` (weights then biases) into `g`.
fn outer_into(g: &mut [f64], a: &[f64], b: &[f64]) {
    let n = b.len();
    for (j, &aj) in a.iter().enumerate() {
        for (gi, &bi) in g[j * n..(j + 1) * n].iter_mut().zip(b) {
            *gi = aj * bi;
        }
    }
    g[a.len() * n..a.len() * n + a.len()].copy_from_slice(a);
}

/// Loss on one output and its derivative with respect to the outputs.
fn output_loss(loss: LossKind, out: &[f64], y: i32, delta: &mut [f64]) -> Result<f64> {
    match loss {
        LossKind::Margin(phi) => {
            if y != 1 && y != -1 {
                return Err(Error::Input(format!(
                    "margin losses need ±1 labels, got {y}"
                )));
            }
            let y = f64::from(y);
            let m = y * out[0];
            let l = phi.value(m);
            if !l.is_finite() {
                return Err(Error::Overflow(format!("{phi} loss at margin {m}")));
            }
            delta[0] = y * phi.deriv(m);
            Ok(l)
        }
        LossKind::CrossEntropy => {
            if y < 0 || y as usize >= out.len() {
                return Err(Error::Input(format!("label {y} outside 0..{}", out.len())));
            }
            let max = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = out.iter().map(|z| (z - max).exp()).sum();
            let lse = max + sum.ln();
            for (dc, &z) in delta.iter_mut().zip(out) {
                *dc = (z - lse).exp();
            }
            delta[y as usize] -= 1.0;
            Ok(lse - out[y as usize])
        }
    }
}
