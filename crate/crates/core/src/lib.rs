//! Symbolic regression by neural-guided search.
//!
//! A recurrent policy emits expressions as prefix-notation token sequences,
//! one token at a time. Each candidate is scored against a dataset, the
//! best few percent of a batch are kept, and the policy is updated with a
//! risk-seeking policy gradient so that probability mass concentrates on
//! the best expressions found rather than the average ones. Exploration is
//! shaped by logit priors (a class-balancing prior, a soft length prior)
//! and hard length masks applied before sampling.
//!
//! The crate is `no_std`-compatible (requires `alloc`); all float math goes
//! through [`math`] so results are bit-identical with or without `std`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod adam;
pub mod bench;
pub mod checkpoint;
pub mod eval;
pub mod expr;
pub mod gradient;
pub mod library;
pub mod math;
pub mod policy;
pub mod priors;
pub mod rng;
pub mod sampling;
pub mod trainer;

pub use adam::Adam;
pub use bench::{nguyen_suite, run_experiment, Benchmark, ExperimentSpec, Variant};
pub use eval::{evaluate, recovery_check, reward, Dataset, Inputs};
pub use expr::{required_count, to_infix, TokenSequence, TreeCursor};
pub use gradient::{compute_gradients, surrogate_objective, EntropyMode, Objective};
pub use library::{Library, TokenClass, TokenId, TokenKind};
pub use priors::{LengthBounds, PriorConfig, SoftLengthConfig};
pub use sampling::{sample_batch, ScoredSample};
pub use trainer::{RunResult, StepReport, TrainConfig, Trainer};
