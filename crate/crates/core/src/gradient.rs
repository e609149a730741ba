//! Exact gradients of the training objective by backpropagation through
//! time.
//!
//! The surrogate objective over a kept batch of size K is
//!
//! ```text
//! J(θ) = (1/K) Σ_j [ (R_j − b) · Σ_i log π(τ_i | ·; θ) + η · R_H(τ_j) ]
//! ```
//!
//! where `R_H` is the per-sequence entropy term: a plain sum of step
//! entropies, or an exponentially decayed sum (weight γ^(i−1) at position
//! i) that keeps pressure on early tokens without encouraging long tails.
//! Everything is differentiated through the *effective* distribution —
//! priors are additive constants in logit space and masks are
//! stop-gradient, so both reshape probabilities without contributing
//! gradient terms of their own.
//!
//! Gradients are computed by re-running the forward pass over each stored
//! sequence (recomputing priors and masks from the prefix), recording the
//! activations, and backpropagating; sampling itself never stores a tape.

use alloc::vec;
use alloc::vec::Vec;

use crate::expr::TreeCursor;
use crate::library::Library;
use crate::policy::{CellTrace, PolicyParams, StepInput};
use crate::priors::{PriorConfig, PriorError, PriorTable};
use crate::sampling::{categorical_into, ScoredSample};

/// Entropy regularizer shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum EntropyMode {
    /// Unweighted sum of step entropies.
    #[serde(rename = "SE")]
    Standard,
    /// Exponentially decayed sum: position i is weighted by γ^(i−1).
    #[serde(rename = "HE")]
    Hierarchical,
}

impl core::fmt::Display for EntropyMode {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            EntropyMode::Standard => "SE",
            EntropyMode::Hierarchical => "HE",
        })
    }
}

/// Scalar knobs of the surrogate objective.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Objective {
    pub baseline: f64,
    pub entropy_weight: f64,
    pub entropy_decay: f64,
    pub mode: EntropyMode,
}

impl Objective {
    /// Entropy weight at 0-based step `t`, as a running product so the
    /// gradient and objective paths use bit-identical weights.
    fn decay_weights(&self, len: usize) -> Vec<f64> {
        let mut w = Vec::with_capacity(len);
        let mut cur = 1.0;
        for _ in 0..len {
            w.push(cur);
            if self.mode == EntropyMode::Hierarchical {
                cur *= self.entropy_decay;
            }
        }
        w
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GradientError {
    #[error("gradient requested for an empty batch")]
    EmptyBatch,
    #[error(transparent)]
    Prior(#[from] PriorError),
}

/// Replayed activations for one sequence.
struct Tape {
    inputs: Vec<(usize, usize)>,
    h: Vec<Vec<f64>>,
    c: Vec<Vec<f64>>,
    traces: Vec<CellTrace>,
    probs: Vec<Vec<f64>>,
    logps: Vec<Vec<f64>>,
    entropies: Vec<f64>,
}

fn replay_with_tape(
    params: &PolicyParams,
    sequence: &[usize],
    table: &PriorTable,
    lib: &Library,
) -> Tape {
    let hd = params.hidden_size();
    let n = lib.size();
    let t_len = sequence.len();
    let mut tape = Tape {
        inputs: Vec::with_capacity(t_len),
        h: vec![vec![0.0; hd]],
        c: vec![vec![0.0; hd]],
        traces: Vec::with_capacity(t_len),
        probs: Vec::with_capacity(t_len),
        logps: Vec::with_capacity(t_len),
        entropies: Vec::with_capacity(t_len),
    };
    let mut cursor = TreeCursor::new();
    let mut eff = vec![0.0; n];
    let mut mask = vec![0.0; n];
    for (t, &token) in sequence.iter().enumerate() {
        let input = StepInput::from_cursor(&cursor);
        let slots = (input.parent_slot(n), input.sibling_slot(n));
        let mut h_next = vec![0.0; hd];
        let mut c_next = vec![0.0; hd];
        let mut trace = CellTrace::zeros(hd);
        params.cell_step(
            [slots.0, slots.1],
            &tape.h[t],
            &tape.c[t],
            &mut h_next,
            &mut c_next,
            Some(&mut trace),
        );
        params.emit_logits(&h_next, &mut eff);
        table.mask_into(&cursor, lib, &mut mask);
        let prior = table.additive(t + 1);
        for j in 0..n {
            eff[j] += prior[j] + mask[j];
        }
        let mut probs = vec![0.0; n];
        let mut logps = vec![0.0; n];
        let entropy = categorical_into(&eff, &mut probs, &mut logps);
        debug_assert!(probs[token] > 0.0, "replayed token was masked");

        tape.inputs.push(slots);
        tape.h.push(h_next);
        tape.c.push(c_next);
        tape.traces.push(trace);
        tape.probs.push(probs);
        tape.logps.push(logps);
        tape.entropies.push(entropy);
        cursor.advance(token, lib);
    }
    tape
}

/// Exact gradient of the surrogate objective for a filtered batch,
/// normalized by the batch length it receives. Rewards must be filled.
pub fn compute_gradients(
    params: &PolicyParams,
    batch: &[ScoredSample],
    objective: &Objective,
    priors: &PriorConfig,
    lib: &Library,
) -> Result<Vec<f64>, GradientError> {
    if batch.is_empty() {
        return Err(GradientError::EmptyBatch);
    }
    assert!(objective.baseline.is_finite(), "baseline must be finite");
    let table = PriorTable::new(priors, lib)?;
    let layout = params.layout();
    let hd = params.hidden_size();
    let n = lib.size();
    let width = layout.input_width();
    let theta = params.flat();
    let wh = &theta[layout.wh()..layout.b()];
    let wout = &theta[layout.wout()..layout.bout()];

    let k_norm = batch.len() as f64;
    let mut grad = vec![0.0; layout.total()];
    let mut dpsi = vec![0.0; n];
    let mut dh = vec![0.0; hd];
    let mut dc = vec![0.0; hd];
    let mut dh_prev = vec![0.0; hd];
    let mut dc_prev = vec![0.0; hd];
    let mut da = vec![0.0; 4 * hd];

    for sample in batch {
        assert!(sample.reward.is_finite(), "reward not filled before gradient");
        let coef_advantage = (sample.reward - objective.baseline) / k_norm;
        let coef_entropy = objective.entropy_weight / k_norm;
        let weights = objective.decay_weights(sample.sequence.len());
        let tape = replay_with_tape(params, &sample.sequence, &table, lib);

        for v in dh.iter_mut().chain(dc.iter_mut()) {
            *v = 0.0;
        }
        for t in (0..sample.sequence.len()).rev() {
            let chosen = sample.sequence[t];
            let probs = &tape.probs[t];
            let logps = &tape.logps[t];
            let entropy = tape.entropies[t];
            let w_entropy = coef_entropy * weights[t];

            // d J / d logits: advantage pushes the chosen token up and the
            // distribution down; the entropy term pushes toward uniformity
            // over the unmasked set. Masked tokens have p = 0 and stay 0.
            for j in 0..n {
                let p = probs[j];
                if p == 0.0 {
                    dpsi[j] = 0.0;
                    continue;
                }
                let indicator = if j == chosen { 1.0 } else { 0.0 };
                let mut d = coef_advantage * (indicator - p);
                if w_entropy != 0.0 {
                    d -= w_entropy * p * (logps[j] + entropy);
                }
                dpsi[j] = d;
            }

            // Output projection: logits = w_out · h_t + b_out.
            let h_t = &tape.h[t + 1];
            for j in 0..n {
                let d = dpsi[j];
                if d == 0.0 {
                    continue;
                }
                grad[layout.bout() + j] += d;
                let row = &mut grad[layout.wout() + j * hd..layout.wout() + (j + 1) * hd];
                for (slot, hv) in row.iter_mut().zip(h_t) {
                    *slot += d * hv;
                }
                let wrow = &wout[j * hd..(j + 1) * hd];
                for (acc, w) in dh.iter_mut().zip(wrow) {
                    *acc += d * w;
                }
            }

            // LSTM cell backward.
            let trace = &tape.traces[t];
            let c_prev = &tape.c[t];
            for k in 0..hd {
                let o = trace.o[k];
                let u = trace.u[k];
                let dck = dc[k] + dh[k] * o * (1.0 - u * u);
                let iv = trace.i[k];
                let fv = trace.f[k];
                let gv = trace.g[k];
                da[k] = dck * gv * iv * (1.0 - iv); // input gate rows
                da[hd + k] = dck * c_prev[k] * fv * (1.0 - fv); // forget rows
                da[2 * hd + k] = dck * iv * (1.0 - gv * gv); // candidate rows
                da[3 * hd + k] = dh[k] * u * o * (1.0 - o); // output rows
                dc_prev[k] = dck * fv;
            }

            let (pcol, scol) = tape.inputs[t];
            let h_prev = &tape.h[t];
            for v in dh_prev.iter_mut() {
                *v = 0.0;
            }
            for r in 0..4 * hd {
                let d = da[r];
                grad[layout.b() + r] += d;
                grad[layout.wx() + r * width + pcol] += d;
                grad[layout.wx() + r * width + scol] += d;
                let gw = &mut grad[layout.wh() + r * hd..layout.wh() + (r + 1) * hd];
                for (slot, hv) in gw.iter_mut().zip(h_prev) {
                    *slot += d * hv;
                }
                let wrow = &wh[r * hd..(r + 1) * hd];
                for (acc, w) in dh_prev.iter_mut().zip(wrow) {
                    *acc += d * w;
                }
            }

            core::mem::swap(&mut dh, &mut dh_prev);
            core::mem::swap(&mut dc, &mut dc_prev);
        }
    }
    Ok(grad)
}

/// The surrogate objective itself, recomputed from scratch on the stored
/// sequences (log-probabilities and entropies are *not* taken from the
/// samples — they are replayed under the current `params`, which is what
/// makes this usable as a finite-difference oracle for
/// [`compute_gradients`]).
pub fn surrogate_objective(
    params: &PolicyParams,
    batch: &[ScoredSample],
    objective: &Objective,
    priors: &PriorConfig,
    lib: &Library,
) -> Result<f64, GradientError> {
    if batch.is_empty() {
        return Err(GradientError::EmptyBatch);
    }
    let table = PriorTable::new(priors, lib)?;
    let hd = params.hidden_size();
    let n = lib.size();
    let mut total = 0.0;
    let mut eff = vec![0.0; n];
    let mut mask = vec![0.0; n];
    let mut probs = vec![0.0; n];
    let mut logps = vec![0.0; n];
    let mut h_prev = vec![0.0; hd];
    let mut c_prev = vec![0.0; hd];
    let mut h_next = vec![0.0; hd];
    let mut c_next = vec![0.0; hd];

    for sample in batch {
        assert!(sample.reward.is_finite(), "reward not filled");
        let weights = objective.decay_weights(sample.sequence.len());
        let mut logprob_sum = 0.0;
        let mut entropy_sum = 0.0;
        let mut cursor = TreeCursor::new();
        for v in h_prev.iter_mut().chain(c_prev.iter_mut()) {
            *v = 0.0;
        }
        for (t, &token) in sample.sequence.iter().enumerate() {
            let input = StepInput::from_cursor(&cursor);
            params.cell_step(
                [input.parent_slot(n), input.sibling_slot(n)],
                &h_prev,
                &c_prev,
                &mut h_next,
                &mut c_next,
                None,
            );
            params.emit_logits(&h_next, &mut eff);
            table.mask_into(&cursor, lib, &mut mask);
            let prior = table.additive(t + 1);
            for j in 0..n {
                eff[j] += prior[j] + mask[j];
            }
            let entropy = categorical_into(&eff, &mut probs, &mut logps);
            logprob_sum += logps[token];
            entropy_sum += weights[t] * entropy;
            cursor.advance(token, lib);
            core::mem::swap(&mut h_prev, &mut h_next);
            core::mem::swap(&mut c_prev, &mut c_next);
        }
        total += (sample.reward - objective.baseline) * logprob_sum
            + objective.entropy_weight * entropy_sum;
    }
    Ok(total / batch.len() as f64)
}
