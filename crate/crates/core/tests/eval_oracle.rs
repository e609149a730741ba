//! Cross-checks the stack evaluator against an independent recursive
//! AST evaluator on randomly grown expressions.

use proptest::prelude::*;

use symreg_core::expr::required_count;
use symreg_core::library::{Library, TokenClass, TokenId, TokenKind};
use symreg_core::{evaluate, to_infix, Inputs, TokenSequence};

enum Ast {
    Op2(TokenKind, Box<Ast>, Box<Ast>),
    Op1(TokenKind, Box<Ast>),
    Leaf(usize),
}

fn parse(tokens: &[TokenId], lib: &Library, at: &mut usize) -> Ast {
    let kind = lib.token(tokens[*at]);
    *at += 1;
    match kind.arity() {
        2 => {
            let left = Box::new(parse(tokens, lib, at));
            let right = Box::new(parse(tokens, lib, at));
            Ast::Op2(kind, left, right)
        }
        1 => Ast::Op1(kind, Box::new(parse(tokens, lib, at))),
        _ => match kind {
            TokenKind::Var(i) => Ast::Leaf(i),
            other => panic!("unexpected terminal {other:?}"),
        },
    }
}

// Reference semantics: every intermediate must be finite. Scalar functions
// come from libm so the comparison can be bit-exact; what this checks is the
// tree walk itself (operand order, shape, flag propagation), where the two
// evaluators are genuinely independent.
fn eval_ast(ast: &Ast, row: &[f64], ok: &mut bool) -> f64 {
    let v = match ast {
        Ast::Leaf(i) => row[*i],
        Ast::Op1(kind, a) => {
            let x = eval_ast(a, row, ok);
            match kind {
                TokenKind::Sin => libm::sin(x),
                TokenKind::Cos => libm::cos(x),
                TokenKind::Exp => libm::exp(x),
                TokenKind::Log => libm::log(x),
                TokenKind::Sqrt => libm::sqrt(x),
                other => panic!("unexpected unary {other:?}"),
            }
        }
        Ast::Op2(kind, a, b) => {
            let x = eval_ast(a, row, ok);
            let y = eval_ast(b, row, ok);
            match kind {
                TokenKind::Add => x + y,
                TokenKind::Sub => x - y,
                TokenKind::Mul => x * y,
                TokenKind::Div => x / y,
                other => panic!("unexpected binary {other:?}"),
            }
        }
    };
    if !v.is_finite() {
        *ok = false;
    }
    v
}

/// Grows a complete prefix sequence from raw choice bytes, forcing
/// terminals once the minimal completion would hit `cap` tokens.
fn grow(choices: &[u8], lib: &Library, cap: usize) -> Vec<TokenId> {
    let terminals: Vec<TokenId> =
        (0..lib.size()).filter(|&id| lib.class(id) == TokenClass::Terminal).collect();
    let all: Vec<TokenId> = (0..lib.size()).collect();
    let mut seq = Vec::new();
    let mut open = 1usize;
    let mut next = 0usize;
    while open > 0 {
        let allowed = if seq.len() + open >= cap { &terminals } else { &all };
        let byte = choices.get(next).copied().unwrap_or(3) as usize;
        next += 1;
        let id = allowed[byte % allowed.len()];
        seq.push(id);
        open = open - 1 + lib.arity(id);
    }
    seq
}

proptest! {
    #[test]
    fn stack_evaluator_matches_recursive_reference(
        choices in proptest::collection::vec(any::<u8>(), 0..120),
        rows in proptest::collection::vec(
            proptest::collection::vec(-2.0f64..2.0, 2), 1..8),
    ) {
        let lib = Library::standard(2);
        let tokens = grow(&choices, &lib, 25);

        // Every proper prefix still needs tokens; the whole thing is closed.
        for cut in 0..tokens.len() {
            prop_assert!(required_count(&tokens[..cut], &lib) >= 1);
        }
        prop_assert_eq!(required_count(&tokens, &lib), 0);

        let seq = TokenSequence::new(tokens.clone());
        let n_rows = rows.len();
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let inputs = Inputs::new(n_rows, 2, flat).unwrap();
        let got = evaluate(&seq, &inputs, &lib).unwrap();

        let ast = {
            let mut at = 0;
            let ast = parse(&tokens, &lib, &mut at);
            prop_assert_eq!(at, tokens.len());
            ast
        };
        for (r, row) in rows.iter().enumerate() {
            let mut ok = true;
            let want = eval_ast(&ast, row, &mut ok);
            match got[r] {
                Some(v) => {
                    prop_assert!(ok, "row {} flagged only by reference", r);
                    prop_assert_eq!(v.to_bits(), want.to_bits(), "row {}: {} vs {}", r, v, want);
                }
                None => prop_assert!(!ok, "row {} flagged only by evaluate", r),
            }
        }

        // Infix rendering is balanced and non-empty for any complete tree.
        let infix = to_infix(&seq, &lib).unwrap();
        prop_assert!(!infix.is_empty());
        let opens = infix.matches('(').count();
        let closes = infix.matches(')').count();
        prop_assert_eq!(opens, closes);
    }
}
