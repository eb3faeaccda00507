//! Front end for a small probabilistic programming language.
//!
//! Programs are Java-like: `void`, `bool` and bounded `int` procedures,
//! `if`/`while`, `prob { p: stmt ... }` blocks, `flip(p)`, `uniform(n)` and
//! probabilistic choice expressions `(p: e | q: f)`. Recursion is the only
//! source of unbounded state. [`translate`] turns a checked program into a
//! pPDA whose return probabilities give the result distribution of the
//! main block.
//!
//! ```
//! let program = ppl::parse_program(
//!     "void f() { if flip(1//2) { f(); f(); f(); } }\n{ f(); }",
//! ).unwrap();
//! let t = ppl::translate(&program, &ppl::Config::default()).unwrap();
//! assert_eq!(t.outcomes.len(), 1);
//! ```

mod ast;
mod check;
mod lexer;
mod lower;
mod parser;
mod translate;

use thiserror::Error;

pub use ast::{BinOp, Expr, ExprKind, Param, Pos, Procedure, Program, Stmt, StmtKind, Type};
pub use translate::{Translation, Value};

/// Procedure name under which the main block appears in stack symbols.
pub const MAIN: &str = "main";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PplError {
    #[error("{line}:{column}: syntax error: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{line}:{column}: type error: {message}")]
    Type { line: usize, column: usize, message: String },
    #[error("in `{procedure}`: {message}")]
    Runtime { procedure: String, message: String },
    #[error("translation needs more than {cap} stack symbols")]
    StateSpace { cap: usize },
}

impl PplError {
    pub(crate) fn syntax(pos: Pos, message: impl Into<String>) -> Self {
        PplError::Syntax {
            line: pos.line,
            column: pos.column,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    /// Integers range over `0..=int_max`; arithmetic wraps.
    pub int_max: u32,
    /// Upper limit on the number of stack symbols.
    pub symbol_cap: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            int_max: 255,
            symbol_cap: 1_000_000,
        }
    }
}

pub fn parse_program(text: &str) -> Result<Program, PplError> {
    parse_program_with(text, &Config::default())
}

pub fn parse_program_with(text: &str, config: &Config) -> Result<Program, PplError> {
    check::check(parser::parse_source(text)?, config)
}

pub fn translate(program: &Program, config: &Config) -> Result<Translation, PplError> {
    translate::translate_cfg(&lower::lower(program), config)
}
