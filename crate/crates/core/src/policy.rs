//! The autoregressive policy: a single-layer LSTM over tree context.
//!
//! At each position the network is fed one-hot encodings of the parent
//! and sibling of the node being sampled (an extra "empty" slot covers
//! the root and first arguments), and emits one raw logit per library
//! token. Parameters live in one flat `Vec<f64>` so gradient checks,
//! Adam, and checkpoints can treat the policy as a plain vector.
//!
//! Layout of the flat vector, in order:
//!
//! * `w_x` — input weights, `4H × I` row-major, `I = 2(|L|+1)`;
//! * `w_h` — recurrent weights, `4H × H` row-major;
//! * `b` — gate biases, `4H`;
//! * `w_out` — output projection, `|L| × H` row-major;
//! * `b_out` — output biases, `|L|`.
//!
//! Gate rows are stacked input/forget/candidate/output. The output
//! projection and all biases start at zero — so an untrained policy emits
//! exactly zero logits and sampling is driven purely by the priors — while
//! `w_x`/`w_h` start small-uniform to keep recurrent dynamics alive.

use alloc::vec;
use alloc::vec::Vec;

use crate::expr::TreeCursor;
use crate::library::{Library, TokenId};
use crate::math;
use crate::rng;

/// Weight scale for the uniform recurrent initialization.
pub const INIT_SCALE: f64 = 0.05;

/// Offsets into the flat parameter vector for a given shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Layout {
    pub hidden: usize,
    pub lib: usize,
}

impl Layout {
    pub fn input_width(&self) -> usize {
        2 * (self.lib + 1)
    }

    pub fn wx(&self) -> usize {
        0
    }

    pub fn wh(&self) -> usize {
        4 * self.hidden * self.input_width()
    }

    pub fn b(&self) -> usize {
        self.wh() + 4 * self.hidden * self.hidden
    }

    pub fn wout(&self) -> usize {
        self.b() + 4 * self.hidden
    }

    pub fn bout(&self) -> usize {
        self.wout() + self.lib * self.hidden
    }

    pub fn total(&self) -> usize {
        self.bout() + self.lib
    }
}

/// Recurrent state (hidden and cell vectors), zero before the first token.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmState {
    pub(crate) h: Vec<f64>,
    pub(crate) c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        Self { h: vec![0.0; hidden], c: vec![0.0; hidden] }
    }

    pub fn hidden(&self) -> &[f64] {
        &self.h
    }
}

/// Tree context for the next token: the operator whose argument slot is
/// being filled, and the root of that operator's previous argument.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepInput {
    pub parent: Option<TokenId>,
    pub sibling: Option<TokenId>,
}

impl StepInput {
    pub fn from_cursor(cursor: &TreeCursor) -> Self {
        Self { parent: cursor.parent(), sibling: cursor.sibling() }
    }

    /// Column of the parent one-hot; the slot after all tokens means "empty".
    pub fn parent_slot(&self, lib_size: usize) -> usize {
        self.parent.unwrap_or(lib_size)
    }

    /// Column of the sibling one-hot within the full input encoding.
    pub fn sibling_slot(&self, lib_size: usize) -> usize {
        (lib_size + 1) + self.sibling.unwrap_or(lib_size)
    }

    /// Dense encoding, for inspection and tests; the hot path uses slots.
    pub fn encode(&self, lib_size: usize) -> Vec<f64> {
        let mut x = vec![0.0; 2 * (lib_size + 1)];
        x[self.parent_slot(lib_size)] = 1.0;
        x[self.sibling_slot(lib_size)] = 1.0;
        x
    }
}

/// Tree context for the token following `partial`.
pub fn step_input(partial: &[TokenId], lib: &Library) -> StepInput {
    StepInput::from_cursor(&TreeCursor::from_prefix(partial, lib))
}

/// Per-step activation record kept when gradients will be needed.
#[derive(Clone, Debug)]
pub(crate) struct CellTrace {
    pub i: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub o: Vec<f64>,
    /// tanh of the new cell vector.
    pub u: Vec<f64>,
}

impl CellTrace {
    pub fn zeros(hidden: usize) -> Self {
        Self {
            i: vec![0.0; hidden],
            f: vec![0.0; hidden],
            g: vec![0.0; hidden],
            o: vec![0.0; hidden],
            u: vec![0.0; hidden],
        }
    }
}

/// All policy parameters as one flat vector plus its shape.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyParams {
    hidden: usize,
    lib_size: usize,
    theta: Vec<f64>,
}

impl PolicyParams {
    /// Fresh parameters: recurrent blocks uniform in ±[`INIT_SCALE`],
    /// biases and the output projection zero.
    pub fn init(hidden: usize, lib_size: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Self {
        let layout = Layout { hidden, lib: lib_size };
        let mut theta = vec![0.0; layout.total()];
        for slot in &mut theta[layout.wx()..layout.b()] {
            *slot = rng::uniform_in(rng, -INIT_SCALE, INIT_SCALE);
        }
        Self { hidden, lib_size, theta }
    }

    pub fn zeros(hidden: usize, lib_size: usize) -> Self {
        let layout = Layout { hidden, lib: lib_size };
        Self { hidden, lib_size, theta: vec![0.0; layout.total()] }
    }

    pub fn from_flat(hidden: usize, lib_size: usize, theta: Vec<f64>) -> Option<Self> {
        let layout = Layout { hidden, lib: lib_size };
        (theta.len() == layout.total()).then_some(Self { hidden, lib_size, theta })
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden
    }

    pub fn lib_size(&self) -> usize {
        self.lib_size
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn flat(&self) -> &[f64] {
        &self.theta
    }

    pub fn flat_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    pub(crate) fn layout(&self) -> Layout {
        Layout { hidden: self.hidden, lib: self.lib_size }
    }

    /// One recurrent step from the two-hot input columns `cols` (parent,
    /// sibling). Writes the new hidden/cell vectors; when `trace` is given,
    /// also records gate activations for backprop.
    pub(crate) fn cell_step(
        &self,
        cols: [usize; 2],
        h_prev: &[f64],
        c_prev: &[f64],
        h_out: &mut [f64],
        c_out: &mut [f64],
        mut trace: Option<&mut CellTrace>,
    ) {
        let layout = self.layout();
        let h = self.hidden;
        let width = layout.input_width();
        let wx = &self.theta[layout.wx()..layout.wh()];
        let wh = &self.theta[layout.wh()..layout.b()];
        let b = &self.theta[layout.b()..layout.wout()];

        for r in 0..4 * h {
            // Two-hot input: only the parent and sibling columns are 1.
            let mut a = b[r] + wx[r * width + cols[0]] + wx[r * width + cols[1]];
            let row = &wh[r * h..(r + 1) * h];
            for (w, hv) in row.iter().zip(h_prev) {
                a += w * hv;
            }
            let k = r % h;
            match r / h {
                0 => {
                    let iv = math::sigmoid(a);
                    c_out[k] = iv; // stash i·? no: store i temporarily in c_out
                    if let Some(t) = trace.as_deref_mut() {
                        t.i[k] = iv;
                    }
                }
                1 => {
                    let fv = math::sigmoid(a);
                    h_out[k] = fv; // stash f temporarily in h_out
                    if let Some(t) = trace.as_deref_mut() {
                        t.f[k] = fv;
                    }
                }
                2 => {
                    let gv = math::tanh(a);
                    // c = f·c_prev + i·g, with i in c_out and f in h_out.
                    c_out[k] = h_out[k] * c_prev[k] + c_out[k] * gv;
                    if let Some(t) = trace.as_deref_mut() {
                        t.g[k] = gv;
                    }
                }
                _ => {
                    let ov = math::sigmoid(a);
                    let u = math::tanh(c_out[k]);
                    h_out[k] = ov * u;
                    if let Some(t) = trace.as_deref_mut() {
                        t.o[k] = ov;
                        t.u[k] = u;
                    }
                }
            }
        }
    }

    /// Raw logits from a hidden vector: `w_out · h + b_out`.
    pub(crate) fn emit_logits(&self, h: &[f64], out: &mut [f64]) {
        let layout = self.layout();
        let wout = &self.theta[layout.wout()..layout.bout()];
        let bout = &self.theta[layout.bout()..];
        for (j, slot) in out.iter_mut().enumerate() {
            let row = &wout[j * self.hidden..(j + 1) * self.hidden];
            let mut v = bout[j];
            for (w, hv) in row.iter().zip(h) {
                v += w * hv;
            }
            *slot = v;
        }
    }

    /// One policy step: raw (pre-prior) logits and the next recurrent state.
    pub fn forward_step(&self, input: &StepInput, state: &LstmState) -> (Vec<f64>, LstmState) {
        assert_eq!(state.h.len(), self.hidden, "state width mismatch");
        let mut next = LstmState::zeros(self.hidden);
        self.cell_step(
            [input.parent_slot(self.lib_size), input.sibling_slot(self.lib_size)],
            &state.h,
            &state.c,
            &mut next.h,
            &mut next.c,
            None,
        );
        let mut logits = vec![0.0; self.lib_size];
        self.emit_logits(&next.h, &mut logits);
        (logits, next)
    }
}
