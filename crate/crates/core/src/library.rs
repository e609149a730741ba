//! Token library: the alphabet an expression is built from.
//!
//! Token ids are indices into a canonically ordered table — binary
//! operators first, then unary, then terminals, each group keeping its
//! construction order. Priors and masks are dense vectors over this
//! ordering, so the grouping lets class-level quantities be written as
//! contiguous runs.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

/// Index of a token within a [`Library`].
pub type TokenId = usize;

/// Arity class of a token.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TokenClass {
    Binary,
    Unary,
    Terminal,
}

/// One symbol: an operator or an input variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Add,
    Sub,
    Mul,
    Div,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    /// Input variable by 0-based column index; displayed 1-based (`x1`, `x2`).
    Var(usize),
}

impl TokenKind {
    pub fn arity(self) -> usize {
        match self {
            TokenKind::Add | TokenKind::Sub | TokenKind::Mul | TokenKind::Div => 2,
            TokenKind::Sin | TokenKind::Cos | TokenKind::Exp | TokenKind::Log | TokenKind::Sqrt => {
                1
            }
            TokenKind::Var(_) => 0,
        }
    }

    pub fn class(self) -> TokenClass {
        match self.arity() {
            2 => TokenClass::Binary,
            1 => TokenClass::Unary,
            _ => TokenClass::Terminal,
        }
    }

    pub fn name(self) -> String {
        match self {
            TokenKind::Add => String::from("+"),
            TokenKind::Sub => String::from("-"),
            TokenKind::Mul => String::from("*"),
            TokenKind::Div => String::from("/"),
            TokenKind::Sin => String::from("sin"),
            TokenKind::Cos => String::from("cos"),
            TokenKind::Exp => String::from("exp"),
            TokenKind::Log => String::from("log"),
            TokenKind::Sqrt => String::from("sqrt"),
            TokenKind::Var(i) => format!("x{}", i + 1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LibraryError {
    #[error("duplicate token in library")]
    DuplicateToken,
    #[error("library has no terminal token")]
    NoTerminal,
    #[error("library is empty")]
    Empty,
}

/// Immutable, canonically ordered token table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Library {
    tokens: Vec<TokenKind>,
    n_binary: usize,
    n_unary: usize,
    n_terminal: usize,
    num_vars: usize,
}

impl Library {
    /// Builds a library, sorting tokens into the canonical class order.
    /// Rejects duplicates and libraries without a terminal (nothing could
    /// ever complete an expression).
    pub fn new(kinds: impl IntoIterator<Item = TokenKind>) -> Result<Self, LibraryError> {
        let given: Vec<TokenKind> = kinds.into_iter().collect();
        if given.is_empty() {
            return Err(LibraryError::Empty);
        }
        for (i, a) in given.iter().enumerate() {
            if given[i + 1..].contains(a) {
                return Err(LibraryError::DuplicateToken);
            }
        }
        let mut tokens = Vec::with_capacity(given.len());
        for class in [TokenClass::Binary, TokenClass::Unary, TokenClass::Terminal] {
            tokens.extend(given.iter().copied().filter(|k| k.class() == class));
        }
        let n_binary = tokens.iter().filter(|k| k.class() == TokenClass::Binary).count();
        let n_unary = tokens.iter().filter(|k| k.class() == TokenClass::Unary).count();
        let n_terminal = tokens.len() - n_binary - n_unary;
        if n_terminal == 0 {
            return Err(LibraryError::NoTerminal);
        }
        let num_vars = tokens
            .iter()
            .filter_map(|k| match k {
                TokenKind::Var(i) => Some(i + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        Ok(Self { tokens, n_binary, n_unary, n_terminal, num_vars })
    }

    /// Standard operator set {+, -, *, /, sin, cos, exp, log} plus
    /// `num_vars` input variables.
    pub fn standard(num_vars: usize) -> Self {
        let mut kinds = alloc::vec![
            TokenKind::Add,
            TokenKind::Sub,
            TokenKind::Mul,
            TokenKind::Div,
            TokenKind::Sin,
            TokenKind::Cos,
            TokenKind::Exp,
            TokenKind::Log,
        ];
        kinds.extend((0..num_vars).map(TokenKind::Var));
        Self::new(kinds).expect("standard library is valid")
    }

    pub fn size(&self) -> usize {
        self.tokens.len()
    }

    pub fn token(&self, id: TokenId) -> TokenKind {
        self.tokens[id]
    }

    pub fn tokens(&self) -> &[TokenKind] {
        &self.tokens
    }

    pub fn arity(&self, id: TokenId) -> usize {
        self.tokens[id].arity()
    }

    pub fn class(&self, id: TokenId) -> TokenClass {
        self.tokens[id].class()
    }

    pub fn name(&self, id: TokenId) -> String {
        self.tokens[id].name()
    }

    /// Class sizes `(binary, unary, terminal)`.
    pub fn counts(&self) -> (usize, usize, usize) {
        (self.n_binary, self.n_unary, self.n_terminal)
    }

    /// Number of input variables the library references (max index + 1).
    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn id_of(&self, kind: TokenKind) -> Option<TokenId> {
        self.tokens.iter().position(|&k| k == kind)
    }

    /// Ids of `names`, for building reference expressions in tests and
    /// benchmark definitions.
    pub fn ids_of(&self, names: &[&str]) -> Option<Vec<TokenId>> {
        names.iter().map(|n| self.tokens.iter().position(|k| k.name() == *n)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_groups_classes() {
        let lib = Library::new([
            TokenKind::Var(0),
            TokenKind::Sin,
            TokenKind::Add,
            TokenKind::Var(1),
            TokenKind::Mul,
        ])
        .unwrap();
        let names: Vec<String> = (0..lib.size()).map(|i| lib.name(i)).collect();
        assert_eq!(names, ["+", "*", "sin", "x1", "x2"]);
        assert_eq!(lib.counts(), (2, 1, 2));
        assert_eq!(lib.num_vars(), 2);
    }

    #[test]
    fn rejects_duplicates_and_missing_terminals() {
        assert_eq!(
            Library::new([TokenKind::Add, TokenKind::Add, TokenKind::Var(0)]),
            Err(LibraryError::DuplicateToken)
        );
        assert_eq!(Library::new([TokenKind::Add, TokenKind::Sin]), Err(LibraryError::NoTerminal));
        assert_eq!(Library::new([]), Err(LibraryError::Empty));
    }

    #[test]
    fn standard_library_shape() {
        let lib = Library::standard(2);
        assert_eq!(lib.size(), 10);
        assert_eq!(lib.counts(), (4, 4, 2));
        assert_eq!(lib.id_of(TokenKind::Var(1)), Some(9));
        assert_eq!(lib.ids_of(&["sin", "x1"]), Some(vec![4, 8]));
        assert_eq!(lib.ids_of(&["nope"]), None);
    }

    #[test]
    fn var_names_are_one_based() {
        assert_eq!(TokenKind::Var(0).name(), "x1");
        assert_eq!(TokenKind::Var(2).name(), "x3");
    }
}
