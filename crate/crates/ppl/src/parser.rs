//! Recursive-descent parser.
//!
//! ```text
//! program   = procedure* block
//! procedure = type IDENT "(" [type IDENT ("," type IDENT)*] ")" block
//! stmt      = block | type IDENT ["=" expr] ";" | IDENT "=" expr ";"
//!           | "if" expr stmt ["else" stmt] | "while" expr stmt
//!           | "prob" "{" (expr ":" stmt)* "}" | "return" [expr] ";" | expr ";" | ";"
//! expr      = sum [("<" | "<=" | ">" | ">=" | "==" | "!=") sum]
//! sum       = term (("+" | "-") term)*
//! term      = unary (("%" | "//") unary)*
//! unary     = "!" unary | primary
//! primary   = INT | DECIMAL | "true" | "false" | IDENT ["(" args ")"]
//!           | "flip" "(" expr ")" | "uniform" "(" expr ")"
//!           | "(" expr ")" | "(" expr ":" expr ("|" expr ":" expr)* ")"
//! ```

use ppscert::rational::parse_rational;

use crate::ast::{BinOp, Expr, ExprKind, Param, Procedure, Stmt, StmtKind, Type};
use crate::lexer::{tokenize, Pos, Tok};
use crate::PplError;

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

type Parsed<T> = Result<T, PplError>;

/// Procedures and main block as written, before type checking.
pub(crate) struct Source {
    pub procedures: Vec<Procedure>,
    pub main: Vec<Stmt>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let tok = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        tok
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn unexpected<T>(&self, wanted: &str) -> Parsed<T> {
        Err(PplError::syntax(
            self.pos(),
            format!("expected {wanted}, found {}", self.peek().describe()),
        ))
    }

    fn expect(&mut self, tok: Tok) -> Parsed<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            self.unexpected(&tok.describe())
        }
    }

    fn ident(&mut self) -> Parsed<String> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(name)
            }
            _ => self.unexpected("an identifier"),
        }
    }

    fn ty(&mut self) -> Option<Type> {
        let ty = match self.peek() {
            Tok::Void => Type::Void,
            Tok::Bool => Type::Bool,
            Tok::IntKw => Type::Int,
            _ => return None,
        };
        self.bump();
        Some(ty)
    }

    fn program(&mut self) -> Parsed<Source> {
        let mut procedures = Vec::new();
        while self.peek() != &Tok::LBrace {
            let pos = self.pos();
            let Some(ret) = self.ty() else {
                return self.unexpected("a procedure or the main block");
            };
            let name = self.ident()?;
            self.expect(Tok::LParen)?;
            let mut params = Vec::new();
            if !self.eat(&Tok::RParen) {
                loop {
                    let ty = match self.ty() {
                        Some(Type::Void) | None => return self.unexpected("a parameter type"),
                        Some(ty) => ty,
                    };
                    params.push(Param { ty, name: self.ident()? });
                    if self.eat(&Tok::RParen) {
                        break;
                    }
                    self.expect(Tok::Comma)?;
                }
            }
            let body = self.block()?;
            procedures.push(Procedure {
                name,
                ret,
                params,
                body,
                pos,
            });
        }
        let main = self.block()?;
        if self.peek() != &Tok::Eof {
            return self.unexpected("end of input after the main block");
        }
        Ok(Source { procedures, main })
    }

    fn block(&mut self) -> Parsed<Vec<Stmt>> {
        self.expect(Tok::LBrace)?;
        let mut stmts = Vec::new();
        while !self.eat(&Tok::RBrace) {
            if self.peek() == &Tok::Eof {
                return self.unexpected("`}`");
            }
            stmts.push(self.stmt()?);
        }
        Ok(stmts)
    }

    fn stmt(&mut self) -> Parsed<Stmt> {
        let pos = self.pos();
        let kind = match self.peek().clone() {
            Tok::LBrace => StmtKind::Block(self.block()?),
            Tok::Semi => {
                self.bump();
                StmtKind::Block(Vec::new())
            }
            Tok::Bool | Tok::IntKw => {
                let ty = self.ty().expect("peeked a type");
                let name = self.ident()?;
                let init = if self.eat(&Tok::Assign) { Some(self.expr()?) } else { None };
                self.expect(Tok::Semi)?;
                StmtKind::Decl { ty, name, init }
            }
            Tok::Ident(name) if self.peek2() == &Tok::Assign => {
                self.bump();
                self.bump();
                let value = self.expr()?;
                self.expect(Tok::Semi)?;
                StmtKind::Assign { name, value }
            }
            Tok::If => {
                self.bump();
                let cond = self.expr()?;
                let then = Box::new(self.stmt()?);
                let els = if self.eat(&Tok::Else) { Some(Box::new(self.stmt()?)) } else { None };
                StmtKind::If { cond, then, els }
            }
            Tok::While => {
                self.bump();
                let cond = self.expr()?;
                StmtKind::While {
                    cond,
                    body: Box::new(self.stmt()?),
                }
            }
            Tok::Prob => {
                self.bump();
                self.expect(Tok::LBrace)?;
                let mut branches = Vec::new();
                while !self.eat(&Tok::RBrace) {
                    let weight = self.expr()?;
                    self.expect(Tok::Colon)?;
                    branches.push((weight, self.stmt()?));
                }
                if branches.is_empty() {
                    return Err(PplError::syntax(pos, "empty `prob` block"));
                }
                StmtKind::Prob(branches)
            }
            Tok::Return => {
                self.bump();
                let value = if self.peek() == &Tok::Semi { None } else { Some(self.expr()?) };
                self.expect(Tok::Semi)?;
                StmtKind::Return(value)
            }
            Tok::Void => return self.unexpected("a statement"),
            _ => {
                let e = self.expr()?;
                self.expect(Tok::Semi)?;
                StmtKind::Expr(e)
            }
        };
        Ok(Stmt { kind, pos })
    }

    fn expr(&mut self) -> Parsed<Expr> {
        let lhs = self.sum()?;
        let op = match self.peek() {
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::Eq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            _ => return Ok(lhs),
        };
        let pos = self.pos();
        self.bump();
        let rhs = self.sum()?;
        Ok(binary(op, lhs, rhs, pos))
    }

    fn sum(&mut self) -> Parsed<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let pos = self.pos();
            self.bump();
            lhs = binary(op, lhs, self.term()?, pos);
        }
    }

    fn term(&mut self) -> Parsed<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Percent => BinOp::Mod,
                Tok::Ratio => BinOp::Ratio,
                _ => return Ok(lhs),
            };
            let pos = self.pos();
            self.bump();
            lhs = binary(op, lhs, self.unary()?, pos);
        }
    }

    fn unary(&mut self) -> Parsed<Expr> {
        let pos = self.pos();
        if self.eat(&Tok::Bang) {
            let inner = self.unary()?;
            return Ok(Expr {
                kind: ExprKind::Not(Box::new(inner)),
                pos,
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Parsed<Expr> {
        let pos = self.pos();
        let start = self.at;
        let kind = match self.bump() {
            Tok::Int(n) => ExprKind::Int(n),
            Tok::Decimal(text) => {
                ExprKind::Prob(parse_rational(&text).map_err(|e| PplError::syntax(pos, e.to_string()))?)
            }
            Tok::True => ExprKind::Bool(true),
            Tok::False => ExprKind::Bool(false),
            Tok::Ident(name) => {
                if self.eat(&Tok::LParen) {
                    let mut args = Vec::new();
                    if !self.eat(&Tok::RParen) {
                        loop {
                            args.push(self.expr()?);
                            if self.eat(&Tok::RParen) {
                                break;
                            }
                            self.expect(Tok::Comma)?;
                        }
                    }
                    ExprKind::Call(name, args)
                } else {
                    ExprKind::Var(name)
                }
            }
            tok @ (Tok::Flip | Tok::Uniform) => {
                self.expect(Tok::LParen)?;
                let arg = Box::new(self.expr()?);
                self.expect(Tok::RParen)?;
                if tok == Tok::Flip {
                    ExprKind::Flip(arg)
                } else {
                    ExprKind::Uniform(arg)
                }
            }
            Tok::LParen => {
                let first = self.expr()?;
                if self.eat(&Tok::Colon) {
                    let mut arms = vec![(first, self.expr()?)];
                    while self.eat(&Tok::Bar) {
                        let weight = self.expr()?;
                        self.expect(Tok::Colon)?;
                        arms.push((weight, self.expr()?));
                    }
                    self.expect(Tok::RParen)?;
                    ExprKind::Choice(arms)
                } else {
                    self.expect(Tok::RParen)?;
                    return Ok(first);
                }
            }
            _ => {
                self.at = start;
                return self.unexpected("an expression");
            }
        };
        Ok(Expr { kind, pos })
    }
}

fn binary(op: BinOp, lhs: Expr, rhs: Expr, pos: Pos) -> Expr {
    Expr {
        kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
        pos,
    }
}

pub(crate) fn parse_source(text: &str) -> Parsed<Source> {
    let toks = tokenize(text)?;
    Parser { toks, at: 0 }.program()
}
