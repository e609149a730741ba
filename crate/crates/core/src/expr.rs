//! Prefix-notation expressions and partial-tree bookkeeping.
//!
//! An expression is a pre-order traversal of its tree, stored as token
//! ids. While a sequence is being sampled, the number of still-dangling
//! subtrees (`required_count`) decides when it is complete, and a
//! [`TreeCursor`] tracks which node the next token will attach to so the
//! policy can be conditioned on that node's parent and sibling.

use alloc::string::String;
use alloc::vec::Vec;

use crate::library::{Library, TokenClass, TokenId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ExprError {
    #[error("expression is incomplete")]
    Incomplete,
}

/// A (possibly partial) expression as a pre-order token-id sequence.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct TokenSequence(Vec<TokenId>);

impl TokenSequence {
    pub fn new(ids: Vec<TokenId>) -> Self {
        Self(ids)
    }

    pub fn ids(&self) -> &[TokenId] {
        &self.0
    }

    pub fn push(&mut self, id: TokenId) {
        self.0.push(id);
    }

    /// True iff the sequence encodes exactly one complete tree: the
    /// dangling count hits zero at the last token and never earlier.
    pub fn is_complete(&self, lib: &Library) -> bool {
        if self.0.is_empty() {
            return false;
        }
        let mut open = 1i64;
        for (pos, &id) in self.0.iter().enumerate() {
            if open <= 0 {
                return false; // tokens beyond a finished tree
            }
            open += lib.arity(id) as i64 - 1;
            if open == 0 && pos + 1 < self.0.len() {
                return false;
            }
        }
        open == 0
    }

    /// Token names, for serialization that survives library reordering.
    pub fn names(&self, lib: &Library) -> Vec<String> {
        self.0.iter().map(|&id| lib.name(id)).collect()
    }
}

impl core::ops::Deref for TokenSequence {
    type Target = [TokenId];

    fn deref(&self) -> &[TokenId] {
        &self.0
    }
}

impl From<Vec<TokenId>> for TokenSequence {
    fn from(ids: Vec<TokenId>) -> Self {
        Self(ids)
    }
}

impl FromIterator<TokenId> for TokenSequence {
    fn from_iter<I: IntoIterator<Item = TokenId>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Number of subtrees still needed to complete the prefix: starts at 1
/// for the empty sequence, changes by `arity − 1` per token, and reaching
/// 0 means the expression is complete. Sampling must stop exactly there.
pub fn required_count(partial: &[TokenId], lib: &Library) -> i64 {
    let mut open = 1i64;
    for &id in partial {
        open += lib.arity(id) as i64 - 1;
    }
    open
}

#[derive(Clone, Copy, Debug)]
struct Frame {
    token: TokenId,
    arity: usize,
    args_done: usize,
    first_child: Option<TokenId>,
}

/// Incremental view of a partial expression tree during sampling.
///
/// After each [`advance`](Self::advance) the cursor points at the slot the
/// next token will fill: [`parent`](Self::parent) is the deepest operator
/// with unfilled arguments, and [`sibling`](Self::sibling) is the root of
/// that operator's most recently completed argument, if any.
#[derive(Clone, Debug)]
pub struct TreeCursor {
    stack: Vec<Frame>,
    len: usize,
    open: usize,
    trig_depth: usize,
}

impl TreeCursor {
    pub fn new() -> Self {
        Self { stack: Vec::with_capacity(16), len: 0, open: 1, trig_depth: 0 }
    }

    /// Replays an existing prefix.
    pub fn from_prefix(partial: &[TokenId], lib: &Library) -> Self {
        let mut cursor = Self::new();
        for &id in partial {
            cursor.advance(id, lib);
        }
        cursor
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Dangling-subtree count for the prefix consumed so far.
    pub fn open_subtrees(&self) -> usize {
        self.open
    }

    pub fn is_complete(&self) -> bool {
        self.open == 0
    }

    pub fn parent(&self) -> Option<TokenId> {
        self.stack.last().map(|f| f.token)
    }

    pub fn sibling(&self) -> Option<TokenId> {
        self.stack.last().and_then(|f| if f.args_done >= 1 { f.first_child } else { None })
    }

    /// True when the next token would sit inside sin/cos somewhere up the tree.
    pub fn inside_trig(&self) -> bool {
        self.trig_depth > 0
    }

    pub fn advance(&mut self, id: TokenId, lib: &Library) {
        assert!(self.open > 0, "advance on a complete expression");
        if let Some(top) = self.stack.last_mut() {
            if top.first_child.is_none() {
                top.first_child = Some(id);
            }
        }
        let arity = lib.arity(id);
        self.len += 1;
        self.open = self.open + arity - 1;
        if arity > 0 {
            if is_trig(id, lib) {
                self.trig_depth += 1;
            }
            self.stack.push(Frame { token: id, arity, args_done: 0, first_child: None });
        } else {
            // A terminal finishes a subtree; propagate completion upward.
            while let Some(top) = self.stack.last_mut() {
                top.args_done += 1;
                if top.args_done < top.arity {
                    break;
                }
                let done = self.stack.pop().expect("frame present");
                if is_trig(done.token, lib) {
                    self.trig_depth -= 1;
                }
            }
        }
    }
}

impl Default for TreeCursor {
    fn default() -> Self {
        Self::new()
    }
}

fn is_trig(id: TokenId, lib: &Library) -> bool {
    matches!(lib.token(id), crate::library::TokenKind::Sin | crate::library::TokenKind::Cos)
}

/// Fully parenthesized infix rendering of a complete expression.
pub fn to_infix(expr: &TokenSequence, lib: &Library) -> Result<String, ExprError> {
    if !expr.is_complete(lib) {
        return Err(ExprError::Incomplete);
    }
    fn render(ids: &[TokenId], pos: usize, lib: &Library, out: &mut String) -> usize {
        let id = ids[pos];
        match lib.class(id) {
            TokenClass::Binary => {
                out.push('(');
                let mid = render(ids, pos + 1, lib, out);
                out.push(' ');
                out.push_str(&lib.name(id));
                out.push(' ');
                let end = render(ids, mid, lib, out);
                out.push(')');
                end
            }
            TokenClass::Unary => {
                out.push_str(&lib.name(id));
                out.push('(');
                let end = render(ids, pos + 1, lib, out);
                out.push(')');
                end
            }
            TokenClass::Terminal => {
                out.push_str(&lib.name(id));
                pos + 1
            }
        }
    }
    let mut out = String::new();
    render(expr.ids(), 0, lib, &mut out);
    Ok(out)
}
