//! LSTM cell and stacked bidirectional LSTM, with explicit caches for the
//! reverse-mode backward pass.
//!
//! Cell equations (standard forget-gate LSTM, no peepholes, gate order
//! [i, f, g, o]):
//!
//! ```text
//! z = W·x + U·h_prev + b          z split into quarters z_i, z_f, z_g, z_o
//! i = σ(z_i)   f = σ(z_f)   g = tanh(z_g)   o = σ(z_o)
//! c = f ⊙ c_prev + i ⊙ g
//! h = o ⊙ tanh(c)
//! ```
//!
//! Initial states are zero. Sequences run left-to-right; the bidirectional
//! wrapper feeds the reversed sequence to a second, independent cell and
//! concatenates outputs per timestep.

use super::params::ParamSet;
use super::tensor::Tensor2;
use super::{sigmoid, NnError};
use rand::Rng;

/// Parameters of one LSTM cell: input-to-gates `W` (4h × d),
/// hidden-to-gates `U` (4h × h), and gate bias `b` (4h).
#[derive(Debug, Clone, PartialEq)]
pub struct LstmCellParams {
    pub w: Tensor2,
    pub u: Tensor2,
    pub b: Vec<f64>,
}

/// Uniform(−r, r) with r = √(6 / (fan_in + fan_out)), the Xavier/Glorot
/// bound for a matrix with the given fan.
pub fn xavier_uniform(rng: &mut impl Rng, fan_in: usize, fan_out: usize) -> f64 {
    let r = (6.0 / (fan_in + fan_out) as f64).sqrt();
    rng.gen_range(-r..r)
}

impl LstmCellParams {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        LstmCellParams {
            w: Tensor2::zeros(4 * hidden, input),
            u: Tensor2::zeros(4 * hidden, hidden),
            b: vec![0.0; 4 * hidden],
        }
    }

    /// Seeded initialization: Xavier-uniform weights drawn in row-major
    /// order (W then U), zero biases except the forget-gate quarter at 1.0.
    pub fn init(input: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        let mut cell = LstmCellParams::zeros(input, hidden);
        for v in cell.w.data_mut() {
            *v = xavier_uniform(rng, input, 4 * hidden);
        }
        for v in cell.u.data_mut() {
            *v = xavier_uniform(rng, hidden, 4 * hidden);
        }
        cell.b[hidden..2 * hidden].fill(1.0);
        cell
    }

    pub fn input_size(&self) -> usize {
        self.w.cols()
    }

    pub fn hidden_size(&self) -> usize {
        self.u.cols()
    }
}

impl ParamSet for LstmCellParams {
    fn visit(&self, f: &mut dyn FnMut(&str, &[usize], &[f64])) {
        f("w", &[self.w.rows(), self.w.cols()], self.w.data());
        f("u", &[self.u.rows(), self.u.cols()], self.u.data());
        f("b", &[self.b.len()], &self.b);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&str, &[usize], &mut [f64])) {
        f("w", &[self.w.rows(), self.w.cols()], self.w.data_mut());
        f("u", &[self.u.rows(), self.u.cols()], self.u.data_mut());
        f("b", &[self.b.len()], &mut self.b);
    }

    fn zip_mut(
        &mut self,
        other: &Self,
        f: &mut dyn FnMut(&mut [f64], &[f64]),
    ) -> Result<(), NnError> {
        if self.w.rows() != other.w.rows()
            || self.w.cols() != other.w.cols()
            || self.u.cols() != other.u.cols()
            || self.b.len() != other.b.len()
        {
            return Err(NnError::ShapeMismatch {
                context: "LstmCellParams::zip_mut",
                expected: format!("W {}x{}", self.w.rows(), self.w.cols()),
                found: format!("W {}x{}", other.w.rows(), other.w.cols()),
            });
        }
        f(self.w.data_mut(), other.w.data());
        f(self.u.data_mut(), other.u.data());
        f(&mut self.b, &other.b);
        Ok(())
    }
}

/// Everything the backward pass needs from one forward step.
#[derive(Debug, Clone)]
pub(crate) struct CellStep {
    x: Vec<f64>,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    i: Vec<f64>,
    f: Vec<f64>,
    g: Vec<f64>,
    o: Vec<f64>,
    tanh_c: Vec<f64>,
}

fn cell_step(p: &LstmCellParams, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> (Vec<f64>, Vec<f64>, CellStep) {
    let h = p.hidden_size();
    let mut z = p.b.clone();
    p.w.matvec_into(x, &mut z);
    p.u.matvec_into(h_prev, &mut z);
    let mut i = vec![0.0; h];
    let mut f = vec![0.0; h];
    let mut g = vec![0.0; h];
    let mut o = vec![0.0; h];
    for k in 0..h {
        i[k] = sigmoid(z[k]);
        f[k] = sigmoid(z[h + k]);
        g[k] = z[2 * h + k].tanh();
        o[k] = sigmoid(z[3 * h + k]);
    }
    let mut c = vec![0.0; h];
    let mut tanh_c = vec![0.0; h];
    let mut h_out = vec![0.0; h];
    for k in 0..h {
        c[k] = f[k] * c_prev[k] + i[k] * g[k];
        tanh_c[k] = c[k].tanh();
        h_out[k] = o[k] * tanh_c[k];
    }
    let cache = CellStep {
        x: x.to_vec(),
        h_prev: h_prev.to_vec(),
        c_prev: c_prev.to_vec(),
        i,
        f,
        g,
        o,
        tanh_c,
    };
    (h_out, c, cache)
}

/// Single cell step with shape and finiteness checks — the public contract.
pub fn lstm_cell_forward(
    p: &LstmCellParams,
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), NnError> {
    let (d, h) = (p.input_size(), p.hidden_size());
    if x.len() != d || h_prev.len() != h || c_prev.len() != h {
        return Err(NnError::ShapeMismatch {
            context: "lstm_cell_forward",
            expected: format!("x[{d}] h_prev[{h}] c_prev[{h}]"),
            found: format!("x[{}] h_prev[{}] c_prev[{}]", x.len(), h_prev.len(), c_prev.len()),
        });
    }
    let (h_out, c_out, _) = cell_step(p, x, h_prev, c_prev);
    if !h_out.iter().chain(&c_out).all(|v| v.is_finite()) {
        return Err(NnError::NonFiniteActivation {
            context: "lstm_cell_forward",
        });
    }
    Ok((h_out, c_out))
}

/// One directional pass over a sequence from zero initial states. Returns
/// per-step hidden states and the cache for the backward pass.
pub(crate) fn lstm_run(p: &LstmCellParams, xs: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<CellStep>) {
    let h = p.hidden_size();
    let mut h_prev = vec![0.0; h];
    let mut c_prev = vec![0.0; h];
    let mut hs = Vec::with_capacity(xs.len());
    let mut steps = Vec::with_capacity(xs.len());
    for x in xs {
        let (h_out, c_out, cache) = cell_step(p, x, &h_prev, &c_prev);
        steps.push(cache);
        hs.push(h_out.clone());
        h_prev = h_out;
        c_prev = c_out;
    }
    (hs, steps)
}

/// Backward through one directional pass. `d_hs[t]` is ∂loss/∂h_t from
/// downstream consumers; parameter gradients accumulate into `grads` and the
/// per-step input gradients come back.
pub(crate) fn lstm_run_backward(
    p: &LstmCellParams,
    steps: &[CellStep],
    d_hs: &[Vec<f64>],
    grads: &mut LstmCellParams,
) -> Vec<Vec<f64>> {
    let h = p.hidden_size();
    let d = p.input_size();
    let t_len = steps.len();
    debug_assert_eq!(d_hs.len(), t_len);
    let mut d_xs = vec![vec![0.0; d]; t_len];
    let mut dh_next = vec![0.0; h];
    let mut dc_next = vec![0.0; h];
    let mut d_gates = vec![0.0; 4 * h];
    for t in (0..t_len).rev() {
        let s = &steps[t];
        for k in 0..h {
            let dh = d_hs[t][k] + dh_next[k];
            let dc = dh * s.o[k] * (1.0 - s.tanh_c[k] * s.tanh_c[k]) + dc_next[k];
            d_gates[k] = dc * s.g[k] * s.i[k] * (1.0 - s.i[k]); // input gate
            d_gates[h + k] = dc * s.c_prev[k] * s.f[k] * (1.0 - s.f[k]); // forget gate
            d_gates[2 * h + k] = dc * s.i[k] * (1.0 - s.g[k] * s.g[k]); // cell candidate
            d_gates[3 * h + k] = dh * s.tanh_c[k] * s.o[k] * (1.0 - s.o[k]); // output gate
            dc_next[k] = dc * s.f[k];
        }
        grads.w.add_outer(&d_gates, &s.x);
        grads.u.add_outer(&d_gates, &s.h_prev);
        for (bg, dg) in grads.b.iter_mut().zip(&d_gates) {
            *bg += dg;
        }
        d_xs[t] = p.w.matvec_t(&d_gates);
        dh_next = p.u.matvec_t(&d_gates);
    }
    d_xs
}

/// One bidirectional layer: independent forward and backward cells.
#[derive(Debug, Clone, PartialEq)]
pub struct BiLayer {
    pub fwd: LstmCellParams,
    pub bwd: LstmCellParams,
}

/// A stack of bidirectional LSTM layers. Layer l > 1 consumes the 2h-wide
/// concatenated output of layer l − 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BiLstmParams {
    pub layers: Vec<BiLayer>,
}

impl BiLstmParams {
    pub fn zeros(input: usize, hidden: usize, num_layers: usize) -> Self {
        let layers = (0..num_layers)
            .map(|l| {
                let d = if l == 0 { input } else { 2 * hidden };
                BiLayer {
                    fwd: LstmCellParams::zeros(d, hidden),
                    bwd: LstmCellParams::zeros(d, hidden),
                }
            })
            .collect();
        BiLstmParams { layers }
    }

    /// Seeded init; draw order is layer by layer, forward cell then backward.
    pub fn init(input: usize, hidden: usize, num_layers: usize, rng: &mut impl Rng) -> Self {
        let layers = (0..num_layers)
            .map(|l| {
                let d = if l == 0 { input } else { 2 * hidden };
                BiLayer {
                    fwd: LstmCellParams::init(d, hidden, rng),
                    bwd: LstmCellParams::init(d, hidden, rng),
                }
            })
            .collect();
        BiLstmParams { layers }
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].fwd.input_size()
    }

    pub fn hidden_size(&self) -> usize {
        self.layers[0].fwd.hidden_size()
    }

    /// Output width: forward and backward hidden states concatenated.
    pub fn output_size(&self) -> usize {
        2 * self.hidden_size()
    }
}

impl ParamSet for BiLstmParams {
    fn visit(&self, f: &mut dyn FnMut(&str, &[usize], &[f64])) {
        for (l, layer) in self.layers.iter().enumerate() {
            for (dir, cell) in [("fwd", &layer.fwd), ("bwd", &layer.bwd)] {
                cell.visit(&mut |name, shape, data| {
                    f(&format!("layer{l}.{dir}.{name}"), shape, data);
                });
            }
        }
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&str, &[usize], &mut [f64])) {
        for (l, layer) in self.layers.iter_mut().enumerate() {
            for (dir, cell) in [("fwd", &mut layer.fwd), ("bwd", &mut layer.bwd)] {
                cell.visit_mut(&mut |name, shape, data| {
                    f(&format!("layer{l}.{dir}.{name}"), shape, data);
                });
            }
        }
    }

    fn zip_mut(
        &mut self,
        other: &Self,
        f: &mut dyn FnMut(&mut [f64], &[f64]),
    ) -> Result<(), NnError> {
        if self.layers.len() != other.layers.len() {
            return Err(NnError::ShapeMismatch {
                context: "BiLstmParams::zip_mut",
                expected: format!("{} layers", self.layers.len()),
                found: format!("{} layers", other.layers.len()),
            });
        }
        for (mine, theirs) in self.layers.iter_mut().zip(&other.layers) {
            mine.fwd.zip_mut(&theirs.fwd, f)?;
            mine.bwd.zip_mut(&theirs.bwd, f)?;
        }
        Ok(())
    }
}

/// Per-layer caches for the backward pass.
pub(crate) struct BiCache {
    layers: Vec<LayerCache>,
}

struct LayerCache {
    fwd_steps: Vec<CellStep>,
    bwd_steps: Vec<CellStep>,
}

/// Runs the stack, returning the T × 2h output and the backward cache.
/// Fails with `NonFiniteValue` when an activation leaves f64 range — that
/// is a diverged model, not a programming error, so it must not panic.
pub(crate) fn bilstm_run(p: &BiLstmParams, xs: &[Vec<f64>]) -> Result<(Tensor2, BiCache), NnError> {
    let t_len = xs.len();
    let h = p.hidden_size();
    let mut cur: Vec<Vec<f64>> = xs.to_vec();
    let mut layers = Vec::with_capacity(p.layers.len());
    for layer in &p.layers {
        let (h_f, fwd_steps) = lstm_run(&layer.fwd, &cur);
        let rev: Vec<Vec<f64>> = cur.iter().rev().cloned().collect();
        let (h_b, bwd_steps) = lstm_run(&layer.bwd, &rev);
        cur = (0..t_len)
            .map(|t| {
                let mut row = Vec::with_capacity(2 * h);
                row.extend_from_slice(&h_f[t]);
                row.extend_from_slice(&h_b[t_len - 1 - t]);
                row
            })
            .collect();
        layers.push(LayerCache { fwd_steps, bwd_steps });
    }
    let out = Tensor2::from_rows(&cur)?;
    Ok((out, BiCache { layers }))
}

/// Backward through the stack; accumulates into `grads` and returns the
/// gradient with respect to the input sequence.
pub(crate) fn bilstm_backward(
    p: &BiLstmParams,
    cache: &BiCache,
    d_out: &Tensor2,
    grads: &mut BiLstmParams,
) -> Vec<Vec<f64>> {
    let t_len = d_out.rows();
    let h = p.hidden_size();
    let mut d_cur: Vec<Vec<f64>> = (0..t_len).map(|t| d_out.row(t).to_vec()).collect();
    for (l, layer) in p.layers.iter().enumerate().rev() {
        let lc = &cache.layers[l];
        let d_f: Vec<Vec<f64>> = (0..t_len).map(|t| d_cur[t][..h].to_vec()).collect();
        // The backward cell ran on the reversed sequence, so its step t
        // produced the block stored at output position T−1−t.
        let d_b: Vec<Vec<f64>> = (0..t_len)
            .map(|t| d_cur[t_len - 1 - t][h..].to_vec())
            .collect();
        let gl = &mut grads.layers[l];
        let d_x_f = lstm_run_backward(&layer.fwd, &lc.fwd_steps, &d_f, &mut gl.fwd);
        let d_x_b = lstm_run_backward(&layer.bwd, &lc.bwd_steps, &d_b, &mut gl.bwd);
        d_cur = (0..t_len)
            .map(|t| {
                d_x_f[t]
                    .iter()
                    .zip(&d_x_b[t_len - 1 - t])
                    .map(|(a, b)| a + b)
                    .collect()
            })
            .collect();
    }
    d_cur
}

/// Public forward pass: shape-checked stack run without a cache.
pub fn bilstm_forward(p: &BiLstmParams, xs: &[Vec<f64>]) -> Result<Tensor2, NnError> {
    if xs.is_empty() {
        return Err(NnError::ShapeMismatch {
            context: "bilstm_forward",
            expected: "sequence length >= 1".to_string(),
            found: "empty sequence".to_string(),
        });
    }
    let d = p.input_size();
    if let Some(bad) = xs.iter().find(|x| x.len() != d) {
        return Err(NnError::ShapeMismatch {
            context: "bilstm_forward",
            expected: format!("input vectors of length {d}"),
            found: format!("length {}", bad.len()),
        });
    }
    let (out, _) = bilstm_run(p, xs)?;
    Ok(out)
}
