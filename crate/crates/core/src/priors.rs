//! Additive logit priors and hard constraint masks.
//!
//! Before a token is sampled, the raw policy logits are shifted by
//! position-dependent priors and then masked:
//!
//! * the *class-balancing* prior makes the three arity classes (binary,
//!   unary, terminal) equally likely a priori, splitting each class's
//!   share uniformly among its members;
//! * the *soft length* prior pushes the sampled length toward a target:
//!   before the target position it penalizes terminals (stopping too
//!   early), after it it penalizes binaries (growing further);
//! * the *length mask* is an arity-aware lookahead that forbids any token
//!   which would make finishing within `max_length` impossible, and
//!   forbids terminals that would finish below `min_length`.
//!
//! Priors are additive constants in logit space: they reshape sampling but
//! contribute no gradient of their own.

use alloc::vec;
use alloc::vec::Vec;

use crate::expr::{required_count, TreeCursor};
use crate::library::{Library, TokenClass, TokenId};
use crate::math;

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PriorError {
    #[error("every token is masked; length bounds are infeasible for this library")]
    InfeasibleMask,
    #[error("invalid prior configuration")]
    InvalidConfig,
}

/// Soft length prior: target length and the variance of the quadratic
/// penalty around it.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SoftLengthConfig {
    pub target_length: usize,
    pub variance: f64,
}

impl Default for SoftLengthConfig {
    fn default() -> Self {
        Self { target_length: 10, variance: 5.0 }
    }
}

impl SoftLengthConfig {
    pub fn validate(&self) -> Result<(), PriorError> {
        if self.target_length >= 1 && self.variance > 0.0 && self.variance.is_finite() {
            Ok(())
        } else {
            Err(PriorError::InvalidConfig)
        }
    }
}

/// Hard length window for sampled expressions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct LengthBounds {
    pub min: usize,
    pub max: usize,
}

impl Default for LengthBounds {
    fn default() -> Self {
        Self { min: 4, max: 30 }
    }
}

impl LengthBounds {
    pub fn validate(&self) -> Result<(), PriorError> {
        if self.min >= 1 && self.min <= self.max {
            Ok(())
        } else {
            Err(PriorError::InvalidConfig)
        }
    }
}

/// Class-balancing prior: each token gets `−ln(size of its class)`, so the
/// softmax assigns equal mass to every nonempty class and uniform mass
/// within a class. (Any constant could be added without changing the
/// distribution; zero is used.) Empty classes simply contribute no
/// entries, leaving the remaining classes to share mass equally.
pub fn equal_type_prior(lib: &Library) -> Vec<f64> {
    let (n2, n1, n0) = lib.counts();
    let class_size = |class: TokenClass| match class {
        TokenClass::Binary => n2,
        TokenClass::Unary => n1,
        TokenClass::Terminal => n0,
    };
    (0..lib.size()).map(|id| -math::ln(class_size(lib.class(id)) as f64)).collect()
}

/// Soft length prior at 1-based position `i`: the quadratic penalty
/// `−(i − target)² / (2·variance)` is applied to binary tokens when
/// `i > target` and to terminal tokens when `i < target`; unary tokens are
/// never penalized (they do not change the number of open subtrees). At
/// `i = target` the vector is exactly zero.
pub fn soft_length_prior(i: usize, cfg: &SoftLengthConfig, lib: &Library) -> Vec<f64> {
    let target = cfg.target_length as f64;
    let gap = i as f64 - target;
    let penalty = -(gap * gap) / (2.0 * cfg.variance);
    (0..lib.size())
        .map(|id| match lib.class(id) {
            TokenClass::Binary if (i as f64) > target => penalty,
            TokenClass::Terminal if (i as f64) < target => penalty,
            _ => 0.0,
        })
        .collect()
}

/// Writes the length mask for the sampling state `(len, open)` — prefix
/// length and open subtree count — into `out` (0 = allowed, −∞ = masked).
///
/// A token of arity `a` is allowed iff the shortest possible completion
/// after choosing it still fits: `(len+1) + (open − 1 + a) ≤ max`.
/// Terminals are additionally masked when they would complete the whole
/// expression (`open == 1`) at total length `len + 1 < min`. Whenever the
/// prefix itself satisfies `len + open ≤ max`, terminals always pass the
/// max-length test, so a mixed library keeps at least one token available.
pub fn length_mask_into(
    len: usize,
    open: usize,
    bounds: &LengthBounds,
    lib: &Library,
    out: &mut [f64],
) {
    debug_assert!(open >= 1, "mask requested for a complete expression");
    for (id, slot) in out.iter_mut().enumerate() {
        let arity = lib.arity(id);
        let shortest_total = len + open + arity; // (len+1) + (open − 1 + a)
        let too_long = shortest_total > bounds.max;
        let too_short = arity == 0 && open == 1 && len + 1 < bounds.min;
        *slot = if too_long || too_short { f64::NEG_INFINITY } else { 0.0 };
    }
}

/// Length mask for an explicit prefix; see [`length_mask_into`].
pub fn length_mask(partial: &[TokenId], bounds: &LengthBounds, lib: &Library) -> Vec<f64> {
    let open = required_count(partial, lib);
    assert!(open > 0, "prefix already complete");
    let mut out = vec![0.0; lib.size()];
    length_mask_into(partial.len(), open as usize, bounds, lib, &mut out);
    out
}

/// Which priors and masks are active during sampling.
#[derive(Clone, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PriorConfig {
    pub equal_type: bool,
    pub soft_length: Option<SoftLengthConfig>,
    pub bounds: Option<LengthBounds>,
    /// Optional structural constraint: forbid sin/cos anywhere inside the
    /// argument of another sin/cos.
    pub no_nested_trig: bool,
}

impl PriorConfig {
    pub fn validate(&self) -> Result<(), PriorError> {
        if let Some(slp) = &self.soft_length {
            slp.validate()?;
        }
        if let Some(bounds) = &self.bounds {
            bounds.validate()?;
        }
        Ok(())
    }

    /// Total additive prior and total mask for sampling position `i`
    /// (1-based) after `partial`. The mask composes by elementwise
    /// minimum, so −∞ from any source wins. Errors only if composition
    /// masks every token, which valid length bounds never do on a library
    /// with a unary token.
    pub fn compose(
        &self,
        i: usize,
        partial: &[TokenId],
        lib: &Library,
    ) -> Result<(Vec<f64>, Vec<f64>), PriorError> {
        debug_assert_eq!(i, partial.len() + 1, "position is 1-based over the partial");
        let mut prior = vec![0.0; lib.size()];
        if self.equal_type {
            for (p, q) in prior.iter_mut().zip(equal_type_prior(lib)) {
                *p += q;
            }
        }
        if let Some(slp) = &self.soft_length {
            for (p, q) in prior.iter_mut().zip(soft_length_prior(i, slp, lib)) {
                *p += q;
            }
        }
        let mut mask = vec![0.0; lib.size()];
        if let Some(bounds) = &self.bounds {
            let open = required_count(partial, lib);
            assert!(open > 0, "prefix already complete");
            length_mask_into(partial.len(), open as usize, bounds, lib, &mut mask);
        }
        if self.no_nested_trig && TreeCursor::from_prefix(partial, lib).inside_trig() {
            for (id, slot) in mask.iter_mut().enumerate() {
                if matches!(
                    lib.token(id),
                    crate::library::TokenKind::Sin | crate::library::TokenKind::Cos
                ) {
                    *slot = f64::NEG_INFINITY;
                }
            }
        }
        if mask.iter().all(|&m| m == f64::NEG_INFINITY) {
            return Err(PriorError::InfeasibleMask);
        }
        Ok((prior, mask))
    }
}

/// Precomputed per-position priors for the sampling hot path: the additive
/// vector depends only on the position, so it is built once per run.
#[derive(Clone, Debug)]
pub struct PriorTable {
    by_position: Vec<Vec<f64>>,
    bounds: LengthBounds,
    no_nested_trig: bool,
}

impl PriorTable {
    /// Requires length bounds: unbounded sampling has no termination
    /// guarantee, so the training path always runs with a window.
    pub fn new(cfg: &PriorConfig, lib: &Library) -> Result<Self, PriorError> {
        cfg.validate()?;
        let bounds = cfg.bounds.ok_or(PriorError::InvalidConfig)?;
        let mut by_position = Vec::with_capacity(bounds.max);
        for i in 1..=bounds.max {
            let mut prior = vec![0.0; lib.size()];
            if cfg.equal_type {
                for (p, q) in prior.iter_mut().zip(equal_type_prior(lib)) {
                    *p += q;
                }
            }
            if let Some(slp) = &cfg.soft_length {
                for (p, q) in prior.iter_mut().zip(soft_length_prior(i, slp, lib)) {
                    *p += q;
                }
            }
            by_position.push(prior);
        }
        Ok(Self { by_position, bounds, no_nested_trig: cfg.no_nested_trig })
    }

    pub fn bounds(&self) -> &LengthBounds {
        &self.bounds
    }

    /// Additive prior for 1-based position `i ∈ [1, max_length]`.
    pub fn additive(&self, i: usize) -> &[f64] {
        &self.by_position[i - 1]
    }

    /// Writes the mask for the current sampling state into `out`.
    pub fn mask_into(&self, cursor: &TreeCursor, lib: &Library, out: &mut [f64]) {
        length_mask_into(cursor.len(), cursor.open_subtrees(), &self.bounds, lib, out);
        if self.no_nested_trig && cursor.inside_trig() {
            for (id, slot) in out.iter_mut().enumerate() {
                if matches!(
                    lib.token(id),
                    crate::library::TokenKind::Sin | crate::library::TokenKind::Cos
                ) {
                    *slot = f64::NEG_INFINITY;
                }
            }
        }
    }
}
