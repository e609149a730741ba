//! Autoregressive sampling of expressions from the policy.
//!
//! Each sample walks the policy one token at a time: raw logits are
//! shifted by the position prior, constrained by the length mask, turned
//! into a categorical distribution, and drawn from. The per-step
//! log-probability and entropy of the *effective* (post-prior, post-mask)
//! distribution are recorded, because those are the quantities the
//! training objective differentiates.
//!
//! Sample `j` of a batch uses stream `j` of the batch seed, so a batch is
//! reproducible regardless of how samples are scheduled across workers.

use alloc::vec;
use alloc::vec::Vec;

use crate::expr::{TokenSequence, TreeCursor};
use crate::library::Library;
use crate::math;
use crate::policy::{PolicyParams, StepInput};
use crate::priors::{PriorConfig, PriorError, PriorTable};
use crate::rng::{self, StreamSeed};

/// Raw logits plus the additive prior and mask applied at one step.
#[derive(Clone, Debug, PartialEq)]
pub struct Emission {
    pub raw: Vec<f64>,
    pub prior: Vec<f64>,
    pub mask: Vec<f64>,
}

impl Emission {
    /// Elementwise total: `raw + prior + mask` (−∞ where masked).
    pub fn effective(&self) -> Vec<f64> {
        self.raw.iter().zip(&self.prior).zip(&self.mask).map(|((r, p), m)| r + p + m).collect()
    }

    /// Probabilities, log-probabilities, and entropy of the effective
    /// distribution. Masked tokens get probability exactly 0.
    pub fn distribution(&self) -> (Vec<f64>, Vec<f64>, f64) {
        let eff = self.effective();
        let mut probs = vec![0.0; eff.len()];
        let mut logps = vec![0.0; eff.len()];
        let entropy = categorical_into(&eff, &mut probs, &mut logps);
        (probs, logps, entropy)
    }
}

/// Normalizes effective logits in place-free fashion: fills `probs` and
/// `logprobs` and returns the entropy. Masked (−∞) entries produce
/// probability exactly 0 and contribute nothing to the entropy
/// (0·log 0 = 0). At least one entry must be finite.
pub(crate) fn categorical_into(eff: &[f64], probs: &mut [f64], logprobs: &mut [f64]) -> f64 {
    let m = math::max_of(eff);
    debug_assert!(m.is_finite(), "all tokens masked");
    let mut z = 0.0;
    for (slot, &l) in probs.iter_mut().zip(eff) {
        let e = math::exp(l - m); // exp(−∞) = 0 for masked entries
        *slot = e;
        z += e;
    }
    let ln_z = math::ln(z);
    let mut entropy = 0.0;
    for ((p, lp), &l) in probs.iter_mut().zip(logprobs.iter_mut()).zip(eff) {
        *p /= z;
        *lp = l - m - ln_z;
        if *p > 0.0 {
            entropy -= *p * *lp;
        }
    }
    entropy
}

/// A sampled sequence with its training-relevant statistics. The reward
/// starts as NaN and is filled in by the trainer after evaluation.
#[derive(Clone, Debug)]
pub struct ScoredSample {
    pub sequence: TokenSequence,
    pub reward: f64,
    pub step_logprobs: Vec<f64>,
    pub step_entropies: Vec<f64>,
}

impl ScoredSample {
    /// Total log-probability of the sequence under the sampling distribution.
    pub fn log_prob(&self) -> f64 {
        self.step_logprobs.iter().sum()
    }
}

/// Scratch buffers reused across samples and steps.
struct SampleScratch {
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    h_next: Vec<f64>,
    c_next: Vec<f64>,
    eff: Vec<f64>,
    mask: Vec<f64>,
    probs: Vec<f64>,
    logps: Vec<f64>,
}

impl SampleScratch {
    fn new(hidden: usize, lib: usize) -> Self {
        Self {
            h_prev: vec![0.0; hidden],
            c_prev: vec![0.0; hidden],
            h_next: vec![0.0; hidden],
            c_next: vec![0.0; hidden],
            eff: vec![0.0; lib],
            mask: vec![0.0; lib],
            probs: vec![0.0; lib],
            logps: vec![0.0; lib],
        }
    }
}

fn sample_one(
    params: &PolicyParams,
    table: &PriorTable,
    lib: &Library,
    rng: &mut rand_chacha::ChaCha8Rng,
    scratch: &mut SampleScratch,
) -> Result<ScoredSample, PriorError> {
    let n = lib.size();
    let max_len = table.bounds().max;
    let mut cursor = TreeCursor::new();
    let mut sequence = TokenSequence::default();
    let mut step_logprobs = Vec::with_capacity(8);
    let mut step_entropies = Vec::with_capacity(8);
    for v in scratch.h_prev.iter_mut().chain(scratch.c_prev.iter_mut()) {
        *v = 0.0;
    }

    for position in 1..=max_len {
        let input = StepInput::from_cursor(&cursor);
        params.cell_step(
            [input.parent_slot(n), input.sibling_slot(n)],
            &scratch.h_prev,
            &scratch.c_prev,
            &mut scratch.h_next,
            &mut scratch.c_next,
            None,
        );
        params.emit_logits(&scratch.h_next, &mut scratch.eff);

        table.mask_into(&cursor, lib, &mut scratch.mask);
        let prior = table.additive(position);
        let mut any_open = false;
        for ((e, p), m) in scratch.eff.iter_mut().zip(prior).zip(&scratch.mask) {
            *e += p + m;
            any_open |= *e > f64::NEG_INFINITY;
        }
        if !any_open {
            return Err(PriorError::InfeasibleMask);
        }
        let entropy = categorical_into(&scratch.eff, &mut scratch.probs, &mut scratch.logps);

        let u = rng::uniform(rng);
        let mut choice = None;
        let mut acc = 0.0;
        let mut last_open = 0;
        for (t, &p) in scratch.probs.iter().enumerate() {
            if p > 0.0 {
                last_open = t;
                acc += p;
                if u < acc {
                    choice = Some(t);
                    break;
                }
            }
        }
        let token = choice.unwrap_or(last_open); // guard against rounding in the CDF

        sequence.push(token);
        step_logprobs.push(scratch.logps[token]);
        step_entropies.push(entropy);
        cursor.advance(token, lib);
        if cursor.is_complete() {
            break;
        }
        core::mem::swap(&mut scratch.h_prev, &mut scratch.h_next);
        core::mem::swap(&mut scratch.c_prev, &mut scratch.c_next);
    }

    if !cursor.is_complete() {
        // The length mask guarantees completion within max_len; reaching
        // here means the configuration was infeasible after all.
        return Err(PriorError::InfeasibleMask);
    }
    Ok(ScoredSample { sequence, reward: f64::NAN, step_logprobs, step_entropies })
}

/// Samples `m` complete sequences. Sample `j` draws from stream `j` of
/// `seed`, so the result is a pure function of
/// `(params, priors, lib, m, seed)`.
pub fn sample_batch(
    params: &PolicyParams,
    priors: &PriorConfig,
    lib: &Library,
    m: usize,
    seed: StreamSeed,
) -> Result<Vec<ScoredSample>, PriorError> {
    assert_eq!(params.lib_size(), lib.size(), "params built for a different library");
    let table = PriorTable::new(priors, lib)?;
    let mut scratch = SampleScratch::new(params.hidden_size(), lib.size());
    let mut batch = Vec::with_capacity(m);
    for j in 0..m {
        let mut rng = seed.stream_rng(j as u64);
        batch.push(sample_one(params, &table, lib, &mut rng, &mut scratch)?);
    }
    Ok(batch)
}
