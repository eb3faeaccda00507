//! Syntax tree of the probabilistic program language.

use ppscert::Rational;

pub use crate::lexer::Pos;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Type {
    Void,
    Bool,
    Int,
    /// Probability weights; not declarable.
    Prob,
}

impl Type {
    pub fn name(self) -> &'static str {
        match self {
            Type::Void => "void",
            Type::Bool => "bool",
            Type::Int => "int",
            Type::Prob => "probability",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub ty: Type,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Procedure {
    pub name: String,
    pub ret: Type,
    pub params: Vec<Param>,
    pub body: Vec<Stmt>,
    pub pos: Pos,
}

/// Procedures plus the main block. The main block's result type is
/// inferred from its `return` statements.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub procedures: Vec<Procedure>,
    pub main: Vec<Stmt>,
    pub main_ret: Type,
}

impl Program {
    pub fn procedure(&self, name: &str) -> Option<&Procedure> {
        self.procedures.iter().find(|p| p.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Decl { ty: Type, name: String, init: Option<Expr> },
    Assign { name: String, value: Expr },
    If { cond: Expr, then: Box<Stmt>, els: Option<Box<Stmt>> },
    While { cond: Expr, body: Box<Stmt> },
    Prob(Vec<(Expr, Stmt)>),
    Return(Option<Expr>),
    Expr(Expr),
    Block(Vec<Stmt>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mod,
    /// `a // b`, an exact ratio of two integers.
    Ratio,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Bool(bool),
    Int(u64),
    Prob(Rational),
    Var(String),
    Call(String, Vec<Expr>),
    Flip(Box<Expr>),
    Uniform(Box<Expr>),
    /// `(p1: e1 | p2: e2 | ...)`
    Choice(Vec<(Expr, Expr)>),
    Not(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    /// True if evaluating the expression samples or calls.
    pub fn is_impure(&self) -> bool {
        match &self.kind {
            ExprKind::Call(..) | ExprKind::Flip(_) | ExprKind::Uniform(_) | ExprKind::Choice(_) => true,
            ExprKind::Not(e) => e.is_impure(),
            ExprKind::Binary(_, a, b) => a.is_impure() || b.is_impure(),
            ExprKind::Bool(_) | ExprKind::Int(_) | ExprKind::Prob(_) | ExprKind::Var(_) => false,
        }
    }
}
