//! The training loop: sample, score, keep the best few percent, ascend.
//!
//! Each step draws a batch from the policy, scores every sequence against
//! the dataset, sets the baseline to the empirical (1−ε)-quantile of the
//! batch rewards, and updates the policy with gradients computed only from
//! the kept top fraction — a risk-seeking estimator that optimizes for the
//! best expressions a batch can produce rather than the batch average. An
//! entropy bonus (uniform or position-decayed) keeps early tokens from
//! collapsing prematurely.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::adam::Adam;
use crate::eval::{recovery_check, reward, Dataset, EvalError};
use crate::expr::{to_infix, TokenSequence};
use crate::gradient::{compute_gradients, EntropyMode, GradientError, Objective};
use crate::library::Library;
use crate::math;
use crate::policy::PolicyParams;
use crate::priors::{LengthBounds, PriorConfig, PriorError, SoftLengthConfig};
use crate::rng;
use crate::sampling::{sample_batch, ScoredSample};

/// Number of leading positions whose mean entropy is traced per step.
pub const TRACED_POSITIONS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid config: {0}")]
    Invalid(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TrainError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Prior(#[from] PriorError),
    #[error(transparent)]
    Gradient(#[from] GradientError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("dataset has fewer input columns than the library has variables")]
    DatasetMismatch,
}

/// Everything one training run needs to be reproducible.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Batch size M sampled per step.
    pub batch_size: usize,
    /// Risk factor ε: the kept fraction of each batch.
    pub risk_factor: f64,
    /// Entropy bonus weight η.
    pub entropy_weight: f64,
    /// Entropy decay γ (only used in hierarchical mode).
    pub entropy_decay: f64,
    pub entropy_mode: EntropyMode,
    /// Class-balancing additive prior.
    pub equal_type_prior: bool,
    /// Soft length prior; `None` disables it.
    pub soft_length: Option<SoftLengthConfig>,
    pub length_bounds: LengthBounds,
    /// Optional structural mask: no sin/cos inside sin/cos.
    pub no_nested_trig: bool,
    pub hidden_size: usize,
    pub max_steps: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 5e-4,
            batch_size: 1000,
            risk_factor: 0.05,
            entropy_weight: 0.005,
            entropy_decay: 1.0,
            entropy_mode: EntropyMode::Standard,
            equal_type_prior: true,
            soft_length: None,
            length_bounds: LengthBounds::default(),
            no_nested_trig: false,
            hidden_size: 32,
            max_steps: 2000,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(ConfigError::Invalid("learning_rate must be positive"));
        }
        if self.batch_size < 2 {
            return Err(ConfigError::Invalid("batch_size must be at least 2"));
        }
        if !(self.risk_factor > 0.0 && self.risk_factor <= 1.0) {
            return Err(ConfigError::Invalid("risk_factor must be in (0, 1]"));
        }
        if !(self.entropy_weight >= 0.0 && self.entropy_weight.is_finite()) {
            return Err(ConfigError::Invalid("entropy_weight must be non-negative"));
        }
        if !(self.entropy_decay > 0.0 && self.entropy_decay <= 1.0) {
            return Err(ConfigError::Invalid("entropy_decay must be in (0, 1]"));
        }
        if self.hidden_size == 0 {
            return Err(ConfigError::Invalid("hidden_size must be positive"));
        }
        if let Some(slp) = &self.soft_length {
            slp.validate().map_err(|_| ConfigError::Invalid("soft_length"))?;
        }
        self.length_bounds.validate().map_err(|_| ConfigError::Invalid("length_bounds"))?;
        Ok(())
    }

    /// The prior stack this config induces during sampling.
    pub fn prior_config(&self) -> PriorConfig {
        PriorConfig {
            equal_type: self.equal_type_prior,
            soft_length: self.soft_length,
            bounds: Some(self.length_bounds),
            no_nested_trig: self.no_nested_trig,
        }
    }
}

/// Entropy regularizer value of one sample from its recorded step
/// entropies: plain sum in standard mode, γ^(i−1)-weighted sum in
/// hierarchical mode. Hierarchical with γ = 1 is exactly the standard sum.
pub fn entropy_term(sample: &ScoredSample, decay: f64, mode: EntropyMode) -> f64 {
    let mut total = 0.0;
    let mut weight = 1.0;
    for &h in &sample.step_entropies {
        total += weight * h;
        if mode == EntropyMode::Hierarchical {
            weight *= decay;
        }
    }
    total
}

/// Risk-seeking baseline and filter: `b` is the k-th largest reward with
/// `k = ⌈ε·M⌉`, and `keep` holds the indices of all rewards strictly above
/// `b` plus just enough samples equal to `b` (in batch order) to make
/// `|keep| = k` exactly.
pub fn risk_baseline(rewards: &[f64], risk_factor: f64) -> (f64, Vec<usize>) {
    assert!(!rewards.is_empty(), "empty reward batch");
    assert!(risk_factor > 0.0 && risk_factor <= 1.0, "risk factor out of range");
    let m = rewards.len();
    let k = (math::ceil(risk_factor * m as f64) as usize).clamp(1, m);
    let mut sorted = rewards.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let b = sorted[k - 1];
    let mut keep: Vec<usize> = (0..m).filter(|&i| rewards[i] > b).collect();
    for (i, &r) in rewards.iter().enumerate() {
        if keep.len() == k {
            break;
        }
        if r == b {
            keep.push(i);
        }
    }
    debug_assert_eq!(keep.len(), k);
    (b, keep)
}

/// Per-step telemetry for traces and progress reporting.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StepReport {
    /// 1-based training step index.
    pub step: usize,
    /// Best reward seen in the run so far (non-decreasing).
    pub best_reward: f64,
    /// Quantile baseline of this step's batch.
    pub baseline: f64,
    /// Mean entropy of sampling positions 1..=6 over the full batch;
    /// `None` where no sequence in the batch reached that depth.
    pub position_entropy: Vec<Option<f64>>,
    /// Sampled lengths this step: index `l-1` counts sequences of length `l`.
    pub length_histogram: Vec<u32>,
    /// Kept (filtered) sample count.
    pub kept: usize,
    /// Infix rendering of the best expression so far.
    pub best_expression: String,
}

/// Best expression of a run in a library-independent form.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BestExpression {
    pub tokens: Vec<String>,
    pub infix: String,
    pub reward: f64,
    pub length: usize,
}

/// Outcome of one full training run.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RunResult {
    pub recovered: bool,
    /// Step index at recovery, or the number of steps run when not recovered.
    pub steps_to_solve: usize,
    pub best: Option<BestExpression>,
}

impl RunResult {
    pub fn best_length(&self) -> usize {
        self.best.as_ref().map_or(0, |b| b.length)
    }
}

/// Ground truth and domain used to decide early stopping.
#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryTarget {
    pub truth: TokenSequence,
    pub domain: Vec<(f64, f64)>,
}

/// Owns the policy, optimizer, and progress of one training run.
pub struct Trainer {
    config: TrainConfig,
    lib: Library,
    dataset: Dataset,
    priors: PriorConfig,
    params: PolicyParams,
    optimizer: Adam,
    steps_done: usize,
    best_reward: f64,
    best_sequence: Option<TokenSequence>,
    last_batch_best: Option<TokenSequence>,
}

impl Trainer {
    pub fn new(config: TrainConfig, lib: Library, dataset: Dataset) -> Result<Self, TrainError> {
        config.validate()?;
        if dataset.inputs().cols() < lib.num_vars() {
            return Err(TrainError::DatasetMismatch);
        }
        if dataset.target_std() == 0.0 {
            return Err(TrainError::Eval(EvalError::DegenerateTarget));
        }
        let priors = config.prior_config();
        priors.validate()?;
        let mut init_rng = rng::init_seed(config.seed).rng();
        let params = PolicyParams::init(config.hidden_size, lib.size(), &mut init_rng);
        let dim = params.len();
        Ok(Self {
            config,
            lib,
            dataset,
            priors,
            params,
            optimizer: Adam::new(dim),
            steps_done: 0,
            best_reward: f64::NEG_INFINITY,
            best_sequence: None,
            last_batch_best: None,
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn library(&self) -> &Library {
        &self.lib
    }

    pub fn params(&self) -> &PolicyParams {
        &self.params
    }

    /// Replaces the policy parameters (checkpoint resume).
    pub fn set_params(&mut self, params: PolicyParams) -> Result<(), TrainError> {
        if params.len() != self.params.len()
            || params.hidden_size() != self.params.hidden_size()
            || params.lib_size() != self.params.lib_size()
        {
            return Err(TrainError::Config(ConfigError::Invalid("checkpoint shape mismatch")));
        }
        self.params = params;
        Ok(())
    }

    pub fn steps_done(&self) -> usize {
        self.steps_done
    }

    pub fn best_reward(&self) -> f64 {
        self.best_reward
    }

    /// This step's best-by-reward sequence, the recovery candidate.
    pub fn last_batch_best(&self) -> Option<&TokenSequence> {
        self.last_batch_best.as_ref()
    }

    /// Runs one training step: sample M, score, filter, update.
    pub fn step(&mut self) -> Result<StepReport, TrainError> {
        let step_index = self.steps_done + 1;
        let seed = rng::step_seed(self.config.seed, step_index as u64);
        let mut batch =
            sample_batch(&self.params, &self.priors, &self.lib, self.config.batch_size, seed)?;

        let mut rewards = Vec::with_capacity(batch.len());
        for sample in batch.iter_mut() {
            let r = reward(&sample.sequence, &self.dataset, &self.lib)?;
            sample.reward = r;
            rewards.push(r);
        }

        let (baseline, keep) = risk_baseline(&rewards, self.config.risk_factor);

        let mut batch_best = 0usize;
        for (i, &r) in rewards.iter().enumerate() {
            if r > rewards[batch_best] {
                batch_best = i;
            }
        }
        self.last_batch_best = Some(batch[batch_best].sequence.clone());
        if rewards[batch_best] > self.best_reward {
            self.best_reward = rewards[batch_best];
            self.best_sequence = Some(batch[batch_best].sequence.clone());
        }

        let position_entropy = mean_position_entropies(&batch);
        let mut length_histogram = vec![0u32; self.config.length_bounds.max];
        for sample in &batch {
            length_histogram[sample.sequence.len() - 1] += 1;
        }

        let kept: Vec<ScoredSample> = keep.iter().map(|&i| batch[i].clone()).collect();
        let objective = Objective {
            baseline,
            entropy_weight: self.config.entropy_weight,
            entropy_decay: self.config.entropy_decay,
            mode: self.config.entropy_mode,
        };
        let grad = compute_gradients(&self.params, &kept, &objective, &self.priors, &self.lib)?;
        self.optimizer.step(self.params.flat_mut(), &grad, self.config.learning_rate);
        self.steps_done = step_index;

        let best_expression = self
            .best_sequence
            .as_ref()
            .and_then(|s| to_infix(s, &self.lib).ok())
            .unwrap_or_default();
        Ok(StepReport {
            step: step_index,
            best_reward: self.best_reward,
            baseline,
            position_entropy,
            length_histogram,
            kept: keep.len(),
            best_expression,
        })
    }

    /// Runs up to `max_steps` steps, stopping early when the batch-best
    /// expression matches `target` exactly on the recovery grid. Every
    /// step's report is handed to `sink` before the recovery decision.
    pub fn run<F: FnMut(&StepReport)>(
        &mut self,
        target: Option<&RecoveryTarget>,
        mut sink: F,
    ) -> Result<RunResult, TrainError> {
        let mut recovered = false;
        while self.steps_done < self.config.max_steps {
            let report = self.step()?;
            sink(&report);
            if let Some(target) = target {
                let candidate = self.last_batch_best.as_ref().expect("step ran");
                if recovery_check(candidate, &target.truth, &self.lib, &target.domain) {
                    recovered = true;
                    break;
                }
            }
        }
        let best = self.best_sequence.as_ref().map(|s| BestExpression {
            tokens: s.names(&self.lib),
            infix: to_infix(s, &self.lib).unwrap_or_default(),
            reward: self.best_reward,
            length: s.len(),
        });
        Ok(RunResult { recovered, steps_to_solve: self.steps_done, best })
    }
}

fn mean_position_entropies(batch: &[ScoredSample]) -> Vec<Option<f64>> {
    let mut sums = [0.0; TRACED_POSITIONS];
    let mut counts = [0usize; TRACED_POSITIONS];
    for sample in batch {
        for (pos, &h) in sample.step_entropies.iter().take(TRACED_POSITIONS).enumerate() {
            sums[pos] += h;
            counts[pos] += 1;
        }
    }
    (0..TRACED_POSITIONS).map(|p| (counts[p] > 0).then(|| sums[p] / counts[p] as f64)).collect()
}
