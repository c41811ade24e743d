//! Abstract syntax, concrete grammar and static checks for dHCSP.
//!
//! Concrete syntax summary:
//!
//! ```text
//! system WTS {
//!   Tank:
//!     d := 4.5;
//!     (<d' = 1 - d@0.1 & d < 10> |> [lvl!d -> (skip)])*{10}
//!   ||
//!   Ctrl:
//!     (wait 1; lvl?x)*{10}
//! }
//! ```
//!
//! Guards are `b -> P`, internal choice `P |~| Q`, communication choice
//! `select [ch?x -> (P), ch!e -> (Q)]` and boolean connectives `and`, `or`, `not`.

mod ast;
mod eval;
mod lexer;
mod parser;
mod printer;
mod validate;

pub use ast::*;
pub use eval::{eval_bool, eval_expr, EvalError, Valuation};
pub use parser::{parse, parse_program, KEYWORDS};
pub use printer::{bool_str, event_str, expr_str, num_str, print, print_program};
pub use validate::{validate, validate_with, Diagnostic, ValidateOptions};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("variable {var} is written by both {first} and {second}")]
    DuplicateVariable {
        var: String,
        first: String,
        second: String,
    },
    #[error("duplicate component name {0}")]
    DuplicateComponent(String),
}
