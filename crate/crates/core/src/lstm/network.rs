use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Affine block of one gate: `W x + U h + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    /// hidden × input, row-major.
    pub w: Vec<f64>,
    /// hidden × hidden, row-major.
    pub u: Vec<f64>,
    pub b: Vec<f64>,
}

impl Gate {
    fn zeros(hidden: usize, input: usize) -> Self {
        Self {
            w: vec![0.0; hidden * input],
            u: vec![0.0; hidden * hidden],
            b: vec![0.0; hidden],
        }
    }

    /// Pre-activation for every hidden unit.
    #[inline]
    pub(crate) fn affine(&self, x: &[f64], h: &[f64], out: &mut [f64]) {
        let ni = x.len();
        let nh = h.len();
        for (r, o) in out.iter_mut().enumerate() {
            let wr = &self.w[r * ni..(r + 1) * ni];
            let ur = &self.u[r * nh..(r + 1) * nh];
            let mut acc = self.b[r];
            for (a, b) in wr.iter().zip(x) {
                acc += a * b;
            }
            for (a, b) in ur.iter().zip(h) {
                acc += a * b;
            }
            *o = acc;
        }
    }
}

/// One LSTM layer: forget, input, candidate and output gates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmLayerParams {
    pub input: usize,
    pub hidden: usize,
    pub forget: Gate,
    pub input_gate: Gate,
    pub candidate: Gate,
    pub output: Gate,
}

impl LstmLayerParams {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        Self {
            input,
            hidden,
            forget: Gate::zeros(hidden, input),
            input_gate: Gate::zeros(hidden, input),
            candidate: Gate::zeros(hidden, input),
            output: Gate::zeros(hidden, input),
        }
    }

    pub fn gates(&self) -> [&Gate; 4] {
        [&self.forget, &self.input_gate, &self.candidate, &self.output]
    }

    pub fn gates_mut(&mut self) -> [&mut Gate; 4] {
        [
            &mut self.forget,
            &mut self.input_gate,
            &mut self.candidate,
            &mut self.output,
        ]
    }

    fn check(&self) -> Result<()> {
        for g in self.gates() {
            if g.w.len() != self.hidden * self.input
                || g.u.len() != self.hidden * self.hidden
                || g.b.len() != self.hidden
            {
                return Err(Error::Dimension(format!(
                    "gate shapes inconsistent with {}x{} layer",
                    self.hidden, self.input
                )));
            }
            if g.w.iter().chain(&g.u).chain(&g.b).any(|v| !v.is_finite()) {
                return Err(Error::Dimension("non-finite layer parameter".into()));
            }
        }
        Ok(())
    }
}

/// Hidden and cell state of one layer.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CellState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl CellState {
    pub fn zeros(hidden: usize) -> Self {
        Self {
            h: vec![0.0; hidden],
            c: vec![0.0; hidden],
        }
    }
}

/// Gate activations of one step, kept for backpropagation.
#[derive(Debug, Clone, Default)]
pub(crate) struct GateActivations {
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    pub f3: Vec<f64>,
    pub f4: Vec<f64>,
}

impl GateActivations {
    pub(crate) fn zeros(h: usize) -> Self {
        Self {
            f1: vec![0.0; h],
            f2: vec![0.0; h],
            f3: vec![0.0; h],
            f4: vec![0.0; h],
        }
    }
}

/// One step into preallocated buffers; `h`, `c` receive the new state.
pub(crate) fn cell_step(
    p: &LstmLayerParams,
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    act: &mut GateActivations,
    h: &mut [f64],
    c: &mut [f64],
) {
    p.forget.affine(x, h_prev, &mut act.f1);
    p.input_gate.affine(x, h_prev, &mut act.f2);
    p.candidate.affine(x, h_prev, &mut act.f3);
    p.output.affine(x, h_prev, &mut act.f4);
    for r in 0..p.hidden {
        let f1 = sigmoid(act.f1[r]);
        let f2 = sigmoid(act.f2[r]);
        let f3 = act.f3[r].tanh();
        let f4 = sigmoid(act.f4[r]);
        act.f1[r] = f1;
        act.f2[r] = f2;
        act.f3[r] = f3;
        act.f4[r] = f4;
        c[r] = f1 * c_prev[r] + f2 * f3;
        h[r] = f4 * c[r].tanh();
    }
}

/// Single LSTM cell update.
pub fn cell_forward(
    p: &LstmLayerParams,
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    if x.len() != p.input || h_prev.len() != p.hidden || c_prev.len() != p.hidden {
        return Err(Error::Dimension(format!(
            "cell expects x[{}], h[{}], c[{}]; got x[{}], h[{}], c[{}]",
            p.input,
            p.hidden,
            p.hidden,
            x.len(),
            h_prev.len(),
            c_prev.len()
        )));
    }
    let mut act = GateActivations::zeros(p.hidden);
    let mut h = vec![0.0; p.hidden];
    let mut c = vec![0.0; p.hidden];
    cell_step(p, x, h_prev, c_prev, &mut act, &mut h, &mut c);
    Ok((h, c))
}

/// Dense map from the last hidden state to the outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub input: usize,
    pub output: usize,
    /// output × input, row-major.
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Dense {
    pub fn zeros(input: usize, output: usize) -> Self {
        Self {
            input,
            output,
            w: vec![0.0; input * output],
            b: vec![0.0; output],
        }
    }

    pub(crate) fn apply(&self, h: &[f64], out: &mut [f64]) {
        for (o, y) in out.iter_mut().enumerate() {
            let row = &self.w[o * self.input..(o + 1) * self.input];
            *y = self.b[o] + row.iter().zip(h).map(|(a, b)| a * b).sum::<f64>();
        }
    }
}

/// Stacked LSTM layers followed by a dense output head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmNetwork {
    pub layers: Vec<LstmLayerParams>,
    pub dense: Dense,
}

impl LstmNetwork {
    pub fn zeros(input: usize, hidden: &[usize], output: usize) -> Self {
        let mut layers = Vec::with_capacity(hidden.len());
        let mut width = input;
        for &h in hidden {
            layers.push(LstmLayerParams::zeros(width, h));
            width = h;
        }
        Self {
            layers,
            dense: Dense::zeros(width, output),
        }
    }

    /// Uniform ±1/√hidden weights, zero biases, forget-gate bias +1.
    pub fn init<R: Rng + ?Sized>(
        input: usize,
        hidden: &[usize],
        output: usize,
        rng: &mut R,
    ) -> Self {
        let mut net = Self::zeros(input, hidden, output);
        for layer in &mut net.layers {
            let s = 1.0 / (layer.hidden as f64).sqrt();
            for g in layer.gates_mut() {
                for v in g.w.iter_mut().chain(g.u.iter_mut()) {
                    *v = rng.random_range(-s..s);
                }
            }
            layer.forget.b.iter_mut().for_each(|b| *b = 1.0);
        }
        let s = 1.0 / (net.dense.input as f64).sqrt();
        for v in &mut net.dense.w {
            *v = rng.random_range(-s..s);
        }
        net
    }

    pub fn input_width(&self) -> usize {
        self.layers.first().map(|l| l.input).unwrap_or(self.dense.input)
    }

    pub fn output_width(&self) -> usize {
        self.dense.output
    }

    pub fn hidden_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(|l| l.hidden).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let mut width = self.input_width();
        for (i, l) in self.layers.iter().enumerate() {
            if l.input != width {
                return Err(Error::Dimension(format!(
                    "layer {i} expects input {}, previous width is {width}",
                    l.input
                )));
            }
            l.check()?;
            width = l.hidden;
        }
        if self.dense.input != width
            || self.dense.w.len() != self.dense.input * self.dense.output
            || self.dense.b.len() != self.dense.output
        {
            return Err(Error::Dimension("dense head shape mismatch".into()));
        }
        Ok(())
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            layers: self
                .layers
                .iter()
                .map(|l| LstmLayerParams::zeros(l.input, l.hidden))
                .collect(),
            dense: Dense::zeros(self.dense.input, self.dense.output),
        }
    }

    /// Every parameter array in a fixed order.
    pub fn params(&self) -> Vec<&[f64]> {
        let mut v: Vec<&[f64]> = Vec::new();
        for l in &self.layers {
            for g in l.gates() {
                v.push(&g.w);
                v.push(&g.u);
                v.push(&g.b);
            }
        }
        v.push(&self.dense.w);
        v.push(&self.dense.b);
        v
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut v: Vec<&mut [f64]> = Vec::new();
        for l in &mut self.layers {
            for g in l.gates_mut() {
                v.push(&mut g.w);
                v.push(&mut g.u);
                v.push(&mut g.b);
            }
        }
        v.push(&mut self.dense.w);
        v.push(&mut self.dense.b);
        v
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    /// Element-wise `self += other`.
    pub fn add_assign(&mut self, other: &LstmNetwork) {
        for (a, b) in self.params_mut().into_iter().zip(other.params()) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        for p in self.params_mut() {
            p.iter_mut().for_each(|x| *x *= s);
        }
    }

    pub fn norm(&self) -> f64 {
        self.params()
            .iter()
            .flat_map(|p| p.iter())
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    pub fn zero_states(&self) -> Vec<CellState> {
        self.layers.iter().map(|l| CellState::zeros(l.hidden)).collect()
    }

    /// Runs a sequence (row-major, `len × input`) from `states`, updating them.
    pub fn forward_from(&self, input: &[f64], states: &mut [CellState]) -> Result<Vec<f64>> {
        let ni = self.input_width();
        if ni == 0 || input.len() % ni != 0 {
            return Err(Error::Dimension(format!(
                "input length {} is not a multiple of width {ni}",
                input.len()
            )));
        }
        if states.len() != self.layers.len() {
            return Err(Error::Dimension("state count differs from layer count".into()));
        }
        let len = input.len() / ni;
        let mut seq = input.to_vec();
        for (layer, st) in self.layers.iter().zip(states.iter_mut()) {
            let nh = layer.hidden;
            let mut out = vec![0.0; len * nh];
            let mut act = GateActivations::zeros(nh);
            let mut h = st.h.clone();
            let mut c = st.c.clone();
            let mut hn = vec![0.0; nh];
            let mut cn = vec![0.0; nh];
            for t in 0..len {
                let x = &seq[t * layer.input..(t + 1) * layer.input];
                cell_step(layer, x, &h, &c, &mut act, &mut hn, &mut cn);
                std::mem::swap(&mut h, &mut hn);
                std::mem::swap(&mut c, &mut cn);
                out[t * nh..(t + 1) * nh].copy_from_slice(&h);
            }
            st.h = h;
            st.c = c;
            seq = out;
        }
        let no = self.dense.output;
        let nh = self.dense.input;
        let mut y = vec![0.0; len * no];
        for t in 0..len {
            self.dense
                .apply(&seq[t * nh..(t + 1) * nh], &mut y[t * no..(t + 1) * no]);
        }
        Ok(y)
    }
}

/// Standardized input sequence to standardized outputs, states starting at zero.
pub fn network_forward(net: &LstmNetwork, input: &[f64]) -> Result<Vec<f64>> {
    let mut states = net.zero_states();
    net.forward_from(input, &mut states)
}
