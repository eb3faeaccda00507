//! Static checks: name resolution, types, and constant probability weights.

use std::collections::HashMap;

use num_traits::{One, Zero};
use ppscert::Rational;

use crate::ast::{BinOp, Expr, ExprKind, Pos, Procedure, Program, Stmt, StmtKind, Type};
use crate::parser::Source;
use crate::{Config, PplError};

type Checked<T> = Result<T, PplError>;

struct Signature {
    ret: Type,
    params: Vec<Type>,
}

struct Checker<'a> {
    procs: HashMap<&'a str, Signature>,
    int_max: u32,
}

/// Where a `return` is checked against.
enum Ret {
    Fixed(Type),
    /// The main block; return types are collected and must agree.
    Infer(Option<(Type, Pos)>),
}

struct Scope<'s> {
    vars: HashMap<String, Type>,
    ret: &'s mut Ret,
}

fn type_error(pos: Pos, message: impl Into<String>) -> PplError {
    PplError::Type {
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
}

impl<'a> Checker<'a> {
    fn block(&self, stmts: &[Stmt], scope: &mut Scope) -> Checked<()> {
        stmts.iter().try_for_each(|s| self.stmt(s, scope))
    }

    fn stmt(&self, stmt: &Stmt, scope: &mut Scope) -> Checked<()> {
        let pos = stmt.pos;
        match &stmt.kind {
            StmtKind::Decl { ty, name, init } => {
                if let Some(e) = init {
                    self.expect(e, *ty, scope)?;
                }
                if scope.vars.insert(name.clone(), *ty).is_some() {
                    return Err(type_error(pos, format!("`{name}` is already declared")));
                }
            }
            StmtKind::Assign { name, value } => {
                let Some(&ty) = scope.vars.get(name) else {
                    return Err(type_error(pos, format!("undeclared variable `{name}`")));
                };
                self.expect(value, ty, scope)?;
            }
            StmtKind::If { cond, then, els } => {
                self.expect(cond, Type::Bool, scope)?;
                self.stmt(then, scope)?;
                if let Some(els) = els {
                    self.stmt(els, scope)?;
                }
            }
            StmtKind::While { cond, body } => {
                self.expect(cond, Type::Bool, scope)?;
                self.stmt(body, scope)?;
            }
            StmtKind::Prob(branches) => {
                self.weights(branches.iter().map(|(w, _)| w), pos, scope)?;
                for (_, s) in branches {
                    self.stmt(s, scope)?;
                }
            }
            StmtKind::Return(value) => {
                let found = match value {
                    Some(e) => self.expr(e, scope, false)?,
                    None => Type::Void,
                };
                match &mut *scope.ret {
                    Ret::Fixed(want) if *want != found => {
                        return Err(type_error(
                            pos,
                            format!("returns {} from a {} procedure", found.name(), want.name()),
                        ))
                    }
                    Ret::Fixed(_) => {}
                    Ret::Infer(None) => *scope.ret = Ret::Infer(Some((found, pos))),
                    Ret::Infer(Some((want, first))) if *want != found => {
                        return Err(type_error(
                            pos,
                            format!(
                                "main block returns {} here but {} at line {}",
                                found.name(),
                                want.name(),
                                first.line
                            ),
                        ))
                    }
                    Ret::Infer(Some(_)) => {}
                }
                if found == Type::Prob {
                    return Err(type_error(pos, "probabilities cannot be returned"));
                }
            }
            StmtKind::Expr(e) => {
                self.expr(e, scope, true)?;
            }
            StmtKind::Block(stmts) => self.block(stmts, scope)?,
        }
        Ok(())
    }

    /// Checks probability weights: each must be pure and, when constant,
    /// lie in [0, 1]; constant weights must sum to exactly 1.
    fn weights<'e>(&self, weights: impl Iterator<Item = &'e Expr>, pos: Pos, scope: &mut Scope) -> Checked<()> {
        let mut total = Some(Rational::zero());
        for w in weights {
            self.expect(w, Type::Prob, scope)?;
            if w.is_impure() {
                return Err(type_error(w.pos, "probability weights cannot call or sample"));
            }
            match const_prob(w) {
                Some(p) if p > Rational::one() => {
                    return Err(type_error(w.pos, format!("weight {p} exceeds 1")));
                }
                Some(p) => total = total.map(|t| t + p),
                None => total = None,
            }
        }
        match total {
            Some(t) if !t.is_one() => Err(type_error(pos, format!("probabilities sum to {t}, not 1"))),
            _ => Ok(()),
        }
    }

    fn expect(&self, e: &Expr, want: Type, scope: &mut Scope) -> Checked<()> {
        let found = self.expr(e, scope, false)?;
        if found == want || (want == Type::Prob && found == Type::Int) {
            Ok(())
        } else {
            Err(type_error(e.pos, format!("expected {}, found {}", want.name(), found.name())))
        }
    }

    fn expr(&self, e: &Expr, scope: &mut Scope, allow_void: bool) -> Checked<Type> {
        let pos = e.pos;
        let ty = match &e.kind {
            ExprKind::Bool(_) => Type::Bool,
            ExprKind::Int(n) => {
                if *n > u64::from(self.int_max) {
                    return Err(type_error(pos, format!("{n} is outside the int domain 0..{}", self.int_max)));
                }
                Type::Int
            }
            ExprKind::Prob(_) => Type::Prob,
            ExprKind::Var(name) => *scope
                .vars
                .get(name)
                .ok_or_else(|| type_error(pos, format!("undeclared variable `{name}`")))?,
            ExprKind::Call(name, args) => {
                let sig = self
                    .procs
                    .get(name.as_str())
                    .ok_or_else(|| type_error(pos, format!("unknown procedure `{name}`")))?;
                if sig.params.len() != args.len() {
                    return Err(type_error(
                        pos,
                        format!("`{name}` takes {} arguments, {} given", sig.params.len(), args.len()),
                    ));
                }
                for (a, &ty) in args.iter().zip(&sig.params) {
                    self.expect(a, ty, scope)?;
                }
                if sig.ret == Type::Void && !allow_void {
                    return Err(type_error(pos, format!("`{name}` returns no value")));
                }
                sig.ret
            }
            ExprKind::Flip(p) => {
                self.expect(p, Type::Prob, scope)?;
                if p.is_impure() {
                    return Err(type_error(p.pos, "probability weights cannot call or sample"));
                }
                if const_prob(p).is_some_and(|v| v > Rational::one()) {
                    return Err(type_error(p.pos, "flip probability exceeds 1"));
                }
                Type::Bool
            }
            ExprKind::Uniform(n) => {
                self.expect(n, Type::Int, scope)?;
                if let Some(k) = const_int(n) {
                    if k == 0 || k > u64::from(self.int_max) + 1 {
                        return Err(type_error(pos, format!("uniform({k}) is outside 1..{}", self.int_max + 1)));
                    }
                }
                Type::Int
            }
            ExprKind::Choice(arms) => {
                self.weights(arms.iter().map(|(w, _)| w), pos, scope)?;
                let first = self.expr(&arms[0].1, scope, false)?;
                if !matches!(first, Type::Bool | Type::Int) {
                    return Err(type_error(arms[0].1.pos, "choices must produce bool or int values"));
                }
                for (_, v) in &arms[1..] {
                    self.expect(v, first, scope)?;
                }
                first
            }
            ExprKind::Not(inner) => {
                self.expect(inner, Type::Bool, scope)?;
                Type::Bool
            }
            ExprKind::Binary(op, a, b) => match op {
                BinOp::Add | BinOp::Sub | BinOp::Mod => {
                    self.expect(a, Type::Int, scope)?;
                    self.expect(b, Type::Int, scope)?;
                    Type::Int
                }
                BinOp::Ratio => {
                    self.expect(a, Type::Int, scope)?;
                    self.expect(b, Type::Int, scope)?;
                    if const_int(b) == Some(0) {
                        return Err(type_error(pos, "division by zero"));
                    }
                    Type::Prob
                }
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    self.expect(a, Type::Int, scope)?;
                    self.expect(b, Type::Int, scope)?;
                    Type::Bool
                }
                BinOp::Eq | BinOp::Ne => {
                    let ta = self.expr(a, scope, false)?;
                    let tb = self.expr(b, scope, false)?;
                    let numeric = |t| matches!(t, Type::Int | Type::Prob);
                    if ta != tb && !(numeric(ta) && numeric(tb)) {
                        return Err(type_error(pos, format!("cannot compare {} with {}", ta.name(), tb.name())));
                    }
                    Type::Bool
                }
            },
        };
        Ok(ty)
    }
}

/// Value of an integer expression without variables, if it has one.
pub(crate) fn const_int(e: &Expr) -> Option<u64> {
    match &e.kind {
        ExprKind::Int(n) => Some(*n),
        _ => None,
    }
}

/// Value of a weight without variables, if it has one.
pub(crate) fn const_prob(e: &Expr) -> Option<Rational> {
    match &e.kind {
        ExprKind::Int(n) => Some(Rational::from_integer((*n).into())),
        ExprKind::Prob(p) => Some(p.clone()),
        ExprKind::Binary(BinOp::Ratio, a, b) => {
            let (a, b) = (const_int(a)?, const_int(b)?);
            (b != 0).then(|| Rational::new(a.into(), b.into()))
        }
        _ => None,
    }
}

pub(crate) fn check(source: Source, config: &Config) -> Checked<Program> {
    let mut procs = HashMap::new();
    for p in &source.procedures {
        if p.name == crate::MAIN {
            return Err(type_error(p.pos, format!("`{}` names the main block", crate::MAIN)));
        }
        let sig = Signature {
            ret: p.ret,
            params: p.params.iter().map(|q| q.ty).collect(),
        };
        if procs.insert(p.name.as_str(), sig).is_some() {
            return Err(type_error(p.pos, format!("procedure `{}` is defined twice", p.name)));
        }
    }
    let checker = Checker {
        procs,
        int_max: config.int_max,
    };
    for p in &source.procedures {
        check_procedure(&checker, p)?;
    }
    let mut ret = Ret::Infer(None);
    let mut scope = Scope {
        vars: HashMap::new(),
        ret: &mut ret,
    };
    checker.block(&source.main, &mut scope)?;
    let main_ret = match ret {
        Ret::Infer(Some((ty, _))) => ty,
        _ => Type::Void,
    };
    Ok(Program {
        procedures: source.procedures,
        main: source.main,
        main_ret,
    })
}

fn check_procedure(checker: &Checker, p: &Procedure) -> Checked<()> {
    let mut ret = Ret::Fixed(p.ret);
    let mut scope = Scope {
        vars: HashMap::new(),
        ret: &mut ret,
    };
    for param in &p.params {
        if scope.vars.insert(param.name.clone(), param.ty).is_some() {
            return Err(type_error(p.pos, format!("parameter `{}` is declared twice", param.name)));
        }
    }
    checker.block(&p.body, &mut scope)
}
