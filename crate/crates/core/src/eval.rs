//! Expression evaluation, reward, and exact-recovery checking.
//!
//! Operators are unprotected: division by zero, log of a non-positive,
//! sqrt of a negative, overflow — any non-finite intermediate marks that
//! input row as failed, and a failed row zeroes the whole reward.

use alloc::vec::Vec;

use crate::expr::TokenSequence;
use crate::library::{Library, TokenKind};
use crate::math;
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("expression is incomplete")]
    IncompleteExpression,
    #[error("target vector has zero variance")]
    DegenerateTarget,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DataError {
    #[error("value buffer does not match rows x cols")]
    ShapeMismatch,
    #[error("row counts of inputs and targets differ")]
    RowMismatch,
    #[error("dataset contains a non-finite value")]
    NonFinite,
    #[error("dataset is empty")]
    Empty,
}

/// Row-major input matrix: one row per sample, one column per variable.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Inputs {
    values: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl Inputs {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self, DataError> {
        if values.len() != rows * cols {
            return Err(DataError::ShapeMismatch);
        }
        Ok(Self { values, rows, cols })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    /// `rows` points drawn uniformly from per-dimension ranges.
    pub fn sample_uniform(
        rows: usize,
        domain: &[(f64, f64)],
        rng: &mut rand_chacha::ChaCha8Rng,
    ) -> Self {
        let cols = domain.len();
        let mut values = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            for &(lo, hi) in domain {
                values.push(rng::uniform_in(rng, lo, hi));
            }
        }
        Self { values, rows, cols }
    }
}

/// Training data: inputs plus targets, with the target spread cached for
/// the normalized error in [`reward`].
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Dataset {
    inputs: Inputs,
    targets: Vec<f64>,
    target_std: f64,
}

impl Dataset {
    pub fn new(inputs: Inputs, targets: Vec<f64>) -> Result<Self, DataError> {
        if inputs.rows() != targets.len() {
            return Err(DataError::RowMismatch);
        }
        if targets.is_empty() {
            return Err(DataError::Empty);
        }
        if !inputs.values.iter().chain(&targets).all(|v| v.is_finite()) {
            return Err(DataError::NonFinite);
        }
        let n = targets.len() as f64;
        let mean = targets.iter().sum::<f64>() / n;
        let var = targets.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n;
        Ok(Self { inputs, targets, target_std: math::sqrt(var) })
    }

    pub fn inputs(&self) -> &Inputs {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Population standard deviation of the targets.
    pub fn target_std(&self) -> f64 {
        self.target_std
    }
}

fn apply_unary(kind: TokenKind, a: f64) -> f64 {
    match kind {
        TokenKind::Sin => math::sin(a),
        TokenKind::Cos => math::cos(a),
        TokenKind::Exp => math::exp(a),
        TokenKind::Log => math::ln(a),
        TokenKind::Sqrt => math::sqrt(a),
        _ => unreachable!("not unary"),
    }
}

fn apply_binary(kind: TokenKind, a: f64, b: f64) -> f64 {
    match kind {
        TokenKind::Add => a + b,
        TokenKind::Sub => a - b,
        TokenKind::Mul => a * b,
        TokenKind::Div => a / b,
        _ => unreachable!("not binary"),
    }
}

/// Evaluates a complete prefix expression on every input row.
///
/// Returns `Some(value)` for rows where every intermediate stayed finite
/// and `None` for rows that hit a domain error or overflow anywhere in
/// the tree — even if later arithmetic would have cancelled it out.
pub fn evaluate(
    expr: &TokenSequence,
    inputs: &Inputs,
    lib: &Library,
) -> Result<Vec<Option<f64>>, EvalError> {
    if !expr.is_complete(lib) {
        return Err(EvalError::IncompleteExpression);
    }
    assert!(lib.num_vars() <= inputs.cols(), "inputs narrower than library variables");
    let mut out = Vec::with_capacity(inputs.rows());
    let mut stack: Vec<f64> = Vec::with_capacity(expr.len());
    for r in 0..inputs.rows() {
        let row = inputs.row(r);
        let mut bad = false;
        stack.clear();
        // Reverse pre-order: operands are on the stack when their operator arrives.
        for &id in expr.iter().rev() {
            let kind = lib.token(id);
            let v = match kind.arity() {
                0 => match kind {
                    TokenKind::Var(i) => row[i],
                    _ => unreachable!("terminals are variables"),
                },
                1 => {
                    let a = stack.pop().expect("operand");
                    apply_unary(kind, a)
                }
                _ => {
                    let a = stack.pop().expect("left operand");
                    let b = stack.pop().expect("right operand");
                    apply_binary(kind, a, b)
                }
            };
            bad |= !v.is_finite();
            stack.push(v);
        }
        let v = stack.pop().expect("result");
        out.push(if bad { None } else { Some(v) });
    }
    Ok(out)
}

/// Fitness in [0, 1]: `1 / (1 + NRMSE)` where NRMSE is the root mean
/// squared error divided by the target standard deviation. Any failed row
/// gives 0. Exact fit gives 1; predicting the target mean gives 0.5.
pub fn reward(expr: &TokenSequence, data: &Dataset, lib: &Library) -> Result<f64, EvalError> {
    if data.target_std == 0.0 {
        return Err(EvalError::DegenerateTarget);
    }
    let preds = evaluate(expr, &data.inputs, lib)?;
    let mut sq_sum = 0.0;
    for (pred, &y) in preds.iter().zip(&data.targets) {
        match pred {
            Some(p) => {
                let d = p - y;
                sq_sum += d * d;
            }
            None => return Ok(0.0),
        }
    }
    let nrmse = math::sqrt(sq_sum / data.targets.len() as f64) / data.target_std;
    Ok(1.0 / (1.0 + nrmse))
}

/// Maximum absolute error accepted by [`recovery_check`].
pub const RECOVERY_TOLERANCE: f64 = 1e-10;

/// Number of grid points used by [`recovery_check`].
pub const RECOVERY_GRID_POINTS: usize = 1000;

/// Decides exact symbolic recovery numerically: both expressions are
/// evaluated on a fixed-seed grid of 1000 points drawn uniformly from the
/// training domain (independent of the training data), and recovery holds
/// iff both are finite everywhere and agree within [`RECOVERY_TOLERANCE`].
/// Algebraically equivalent forms pass; close-but-different fits do not.
pub fn recovery_check(
    expr: &TokenSequence,
    truth: &TokenSequence,
    lib: &Library,
    domain: &[(f64, f64)],
) -> bool {
    let mut rng = rng::recovery_grid_seed().rng();
    let grid = Inputs::sample_uniform(RECOVERY_GRID_POINTS, domain, &mut rng);
    let (got, want) = match (evaluate(expr, &grid, lib), evaluate(truth, &grid, lib)) {
        (Ok(g), Ok(w)) => (g, w),
        _ => return false,
    };
    got.iter().zip(&want).all(|(g, w)| match (g, w) {
        (Some(a), Some(b)) => (a - b).abs() <= RECOVERY_TOLERANCE,
        _ => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library::Library;

    fn lib() -> Library {
        Library::standard(1)
    }

    fn seq(names: &[&str]) -> TokenSequence {
        TokenSequence::new(lib().ids_of(names).expect("known names"))
    }

    fn inputs(xs: &[f64]) -> Inputs {
        Inputs::new(xs.len(), 1, xs.to_vec()).unwrap()
    }

    #[test]
    fn evaluates_prefix_trees() {
        let lib = lib();
        let got = evaluate(&seq(&["+", "*", "x1", "x1", "x1"]), &inputs(&[2.0]), &lib).unwrap();
        assert_eq!(got, vec![Some(6.0)]);
        let got = evaluate(&seq(&["sin", "x1"]), &inputs(&[0.0]), &lib).unwrap();
        assert_eq!(got, vec![Some(0.0)]);
    }

    #[test]
    fn division_by_zero_flags_row() {
        let lib = lib();
        let e = seq(&["/", "x1", "-", "x1", "x1"]);
        assert_eq!(evaluate(&e, &inputs(&[1.0]), &lib).unwrap(), vec![None]);
    }

    #[test]
    fn non_finite_intermediate_flags_even_if_cancelled() {
        let lib = lib();
        // x / (x / (x - x)): inner division blows up, outer returns 0 — still flagged.
        let e = seq(&["/", "x1", "/", "x1", "-", "x1", "x1"]);
        assert_eq!(evaluate(&e, &inputs(&[3.0]), &lib).unwrap(), vec![None]);
    }

    #[test]
    fn subtraction_operand_order() {
        let lib = lib();
        // log(x) - x at x = 1 is -1, not 1.
        let e = seq(&["-", "log", "x1", "x1"]);
        assert_eq!(evaluate(&e, &inputs(&[1.0]), &lib).unwrap(), vec![Some(-1.0)]);
    }

    #[test]
    fn incomplete_expression_rejected() {
        let lib = lib();
        assert_eq!(
            evaluate(&seq(&["+", "x1"]), &inputs(&[1.0]), &lib),
            Err(EvalError::IncompleteExpression)
        );
    }

    #[test]
    fn dataset_validation() {
        assert_eq!(Inputs::new(2, 2, vec![0.0; 3]), Err(DataError::ShapeMismatch));
        let x = inputs(&[1.0, 2.0]);
        assert_eq!(Dataset::new(x.clone(), vec![1.0]), Err(DataError::RowMismatch));
        assert_eq!(Dataset::new(x.clone(), vec![1.0, f64::NAN]), Err(DataError::NonFinite));
        assert_eq!(Dataset::new(Inputs::new(0, 1, vec![]).unwrap(), vec![]), Err(DataError::Empty));
        let d = Dataset::new(x, vec![1.0, 3.0]).unwrap();
        assert_eq!(d.target_std(), 1.0);
    }

    #[test]
    fn reward_bounds_and_anchors() {
        let lib = lib();
        let x = inputs(&[0.5, 1.0, 2.0]);
        let truth = seq(&["*", "x1", "x1"]);
        let y: Vec<f64> = (0..3).map(|r| x.row(r)[0] * x.row(r)[0]).collect();
        let data = Dataset::new(x, y).unwrap();

        // Exact fit.
        assert_eq!(reward(&truth, &data, &lib).unwrap(), 1.0);
        // Predicting the target mean makes NRMSE exactly 1, so reward 1/2:
        // targets ±1 have mean 0 and x - x is identically 0.
        let x2 = inputs(&[1.0, -1.0]);
        let data0 = Dataset::new(x2, vec![1.0, -1.0]).unwrap();
        let zero = seq(&["-", "x1", "x1"]);
        assert!((reward(&zero, &data0, &lib).unwrap() - 0.5).abs() < 1e-15);

        // Non-finite prediction row zeroes the reward.
        let div0 = seq(&["/", "x1", "-", "x1", "x1"]);
        assert_eq!(reward(&div0, &data, &lib).unwrap(), 0.0);

        // Degenerate targets are rejected.
        let xc = inputs(&[1.0, 2.0]);
        let flat = Dataset::new(xc, vec![5.0, 5.0]);
        assert_eq!(reward(&truth, &flat.unwrap(), &lib), Err(EvalError::DegenerateTarget));
    }

    #[test]
    fn recovery_accepts_equivalent_rejects_close() {
        let lib = lib();
        let domain = [(-1.0, 1.0)];
        let truth = seq(&["+", "*", "x1", "x1", "x1"]);
        assert!(recovery_check(&truth, &truth, &lib, &domain));
        // Commuted form of the same function.
        let commuted = seq(&["+", "x1", "*", "x1", "x1"]);
        assert!(recovery_check(&commuted, &truth, &lib, &domain));
        // 2x vs x²: close on parts of the domain but not equal.
        assert!(!recovery_check(&seq(&["+", "x1", "x1"]), &seq(&["*", "x1", "x1"]), &lib, &domain));
        // Incomplete candidate can never count as recovered.
        assert!(!recovery_check(&seq(&["+", "x1"]), &truth, &lib, &domain));
    }

    #[test]
    fn recovery_requires_finite_grid_evaluation() {
        let lib = lib();
        // log(x) on a domain containing negatives: non-finite on the grid.
        let e = seq(&["log", "x1"]);
        assert!(!recovery_check(&e, &e, &lib, &[(-1.0, 1.0)]));
    }
}
