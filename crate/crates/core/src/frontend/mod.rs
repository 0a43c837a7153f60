//! Grammar source text: lexing, parsing, macro expansion, and expansion of
//! descriptions into feature-structure templates.

pub mod ast;
mod empty;
mod expand;
mod lexer;
mod macros;
mod parser;

use std::fmt;

use thiserror::Error;

use crate::signature::SignatureError;

pub use empty::{expand_empty_categories, EmptyExpansion};
pub use expand::{expand_desc, infer_and_expand, unused_variables, RuleTemplate};
pub use lexer::{lex, Tok, Token};
pub use macros::expand_macros;
pub use parser::{parse_desc, parse_grammar};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub expected: String,
    pub found: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: expected {}", self.line, self.col, self.expected)?;
        if !self.found.is_empty() {
            write!(f, ", found {}", self.found)?;
        }
        Ok(())
    }
}

impl std::error::Error for SyntaxError {}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrontendError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("line {line}: unsupported construct: {construct}")]
    Unsupported { construct: String, line: usize },
    #[error("line {line}: unknown macro `{name}`")]
    UnknownMacro { name: String, line: usize },
    #[error("line {line}: macro `{name}` takes {expected} argument(s), got {found}")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
        line: usize,
    },
    #[error("recursive macro: {}", .0.join(" -> "))]
    RecursiveMacro(Vec<String>),
    #[error("macro `{0}` defined twice")]
    DuplicateMacro(String),
    #[error("signature: {0}")]
    Signature(#[from] SignatureError),
    #[error("line {line}: unknown type `{name}`")]
    UnknownType { name: String, line: usize },
    #[error("line {line}: unknown feature `{name}`")]
    UnknownFeature { name: String, line: usize },
    #[error("line {line}: inconsistent description at {path}: `{left}` and `{right}` have no common subtype")]
    InconsistentDescription {
        path: String,
        left: String,
        right: String,
        line: usize,
    },
}
