//! Lowering to per-procedure control-flow graphs.
//!
//! Calls and sampling inside expressions are hoisted, left to right, into
//! fresh temporaries so that every remaining expression is deterministic.

use std::collections::HashMap;

use ppscert::Rational;

use crate::ast::{BinOp, Expr, ExprKind, Program, Stmt, StmtKind, Type};

pub(crate) type NodeId = usize;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum PExpr {
    Bool(bool),
    Int(u32),
    Prob(Rational),
    Var(usize),
    Not(Box<PExpr>),
    Bin(BinOp, Box<PExpr>, Box<PExpr>),
}

impl PExpr {
    fn vars(&self, out: &mut Vec<usize>) {
        match self {
            PExpr::Var(v) => out.push(*v),
            PExpr::Not(e) => e.vars(out),
            PExpr::Bin(_, a, b) => {
                a.vars(out);
                b.vars(out);
            }
            PExpr::Bool(_) | PExpr::Int(_) | PExpr::Prob(_) => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Dist {
    Flip(PExpr),
    Uniform(PExpr),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Assign {
        var: usize,
        value: PExpr,
        next: NodeId,
    },
    Branch {
        cond: PExpr,
        then: NodeId,
        els: NodeId,
    },
    Sample {
        var: usize,
        dist: Dist,
        next: NodeId,
    },
    Choice {
        branches: Vec<(PExpr, NodeId)>,
    },
    Call {
        callee: usize,
        args: Vec<PExpr>,
        dest: Option<usize>,
        next: NodeId,
    },
    Return(Option<PExpr>),
    /// End of a value-returning body reached without `return`.
    FallOff,
}

impl Node {
    fn successors(&self) -> Vec<NodeId> {
        match self {
            Node::Assign { next, .. } | Node::Sample { next, .. } | Node::Call { next, .. } => vec![*next],
            Node::Branch { then, els, .. } => vec![*then, *els],
            Node::Choice { branches } => branches.iter().map(|(_, n)| *n).collect(),
            Node::Return(_) | Node::FallOff => Vec::new(),
        }
    }

    fn uses_defs(&self) -> (Vec<usize>, Option<usize>) {
        let mut uses = Vec::new();
        let def = match self {
            Node::Assign { var, value, .. } => {
                value.vars(&mut uses);
                Some(*var)
            }
            Node::Branch { cond, .. } => {
                cond.vars(&mut uses);
                None
            }
            Node::Sample { var, dist, .. } => {
                match dist {
                    Dist::Flip(e) | Dist::Uniform(e) => e.vars(&mut uses),
                }
                Some(*var)
            }
            Node::Choice { branches } => {
                branches.iter().for_each(|(w, _)| w.vars(&mut uses));
                None
            }
            Node::Call { args, dest, .. } => {
                args.iter().for_each(|a| a.vars(&mut uses));
                *dest
            }
            Node::Return(value) => {
                if let Some(v) = value {
                    v.vars(&mut uses);
                }
                None
            }
            Node::FallOff => None,
        };
        (uses, def)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Local {
    pub name: String,
    pub ty: Type,
    pub temp: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct ProcCfg {
    pub name: String,
    pub locals: Vec<Local>,
    pub nodes: Vec<Node>,
    pub entry: NodeId,
    /// Temporaries live on entry to each node.
    pub live_temps: Vec<Vec<bool>>,
}

#[derive(Debug, Clone)]
pub(crate) struct Cfg {
    pub procs: Vec<ProcCfg>,
    pub main: usize,
}

/// Hoisted step that must run before a pure expression can be evaluated.
enum Pre {
    Assign {
        var: usize,
        value: PExpr,
    },
    Sample {
        var: usize,
        dist: Dist,
    },
    Call {
        callee: usize,
        args: Vec<PExpr>,
        dest: Option<usize>,
    },
    Choice {
        dest: usize,
        arms: Vec<(PExpr, Vec<Pre>, PExpr)>,
    },
}

const PLACEHOLDER: NodeId = usize::MAX;

struct Builder<'p> {
    proc_ids: &'p HashMap<&'p str, usize>,
    rets: &'p [Type],
    locals: Vec<Local>,
    names: HashMap<String, usize>,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn add(&mut self, node: Node) -> NodeId {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    fn local(&mut self, name: &str, ty: Type) -> usize {
        if let Some(&v) = self.names.get(name) {
            return v;
        }
        self.locals.push(Local {
            name: name.to_string(),
            ty,
            temp: false,
        });
        self.names.insert(name.to_string(), self.locals.len() - 1);
        self.locals.len() - 1
    }

    fn temp(&mut self, ty: Type) -> usize {
        let name = format!("${}", self.locals.len());
        self.locals.push(Local { name, ty, temp: true });
        self.locals.len() - 1
    }

    fn type_of(&self, e: &Expr) -> Type {
        match &e.kind {
            ExprKind::Bool(_) | ExprKind::Flip(_) | ExprKind::Not(_) => Type::Bool,
            ExprKind::Int(_) | ExprKind::Uniform(_) => Type::Int,
            ExprKind::Prob(_) => Type::Prob,
            ExprKind::Var(name) => self.locals[self.names[name]].ty,
            ExprKind::Call(name, _) => self.rets[self.proc_ids[name.as_str()]],
            ExprKind::Choice(arms) => self.type_of(&arms[0].1),
            ExprKind::Binary(op, ..) => match op {
                BinOp::Add | BinOp::Sub | BinOp::Mod => Type::Int,
                BinOp::Ratio => Type::Prob,
                _ => Type::Bool,
            },
        }
    }

    fn pure(&mut self, e: &Expr, pre: &mut Vec<Pre>) -> PExpr {
        match &e.kind {
            ExprKind::Bool(b) => PExpr::Bool(*b),
            ExprKind::Int(n) => PExpr::Int(u32::try_from(*n).expect("checked against the int domain")),
            ExprKind::Prob(p) => PExpr::Prob(p.clone()),
            ExprKind::Var(name) => PExpr::Var(self.names[name]),
            ExprKind::Not(inner) => PExpr::Not(Box::new(self.pure(inner, pre))),
            ExprKind::Binary(op, a, b) => {
                let a = self.pure(a, pre);
                let b = self.pure(b, pre);
                PExpr::Bin(*op, Box::new(a), Box::new(b))
            }
            ExprKind::Call(..) | ExprKind::Flip(_) | ExprKind::Uniform(_) | ExprKind::Choice(_) => {
                let t = self.temp(self.type_of(e));
                self.impure(e, Some(t), pre);
                PExpr::Var(t)
            }
        }
    }

    /// Lowers a call or sampling expression whose result goes to `dest`.
    fn impure(&mut self, e: &Expr, dest: Option<usize>, pre: &mut Vec<Pre>) {
        let dest_or_temp = |b: &mut Self| dest.unwrap_or_else(|| b.temp(b.type_of(e)));
        match &e.kind {
            ExprKind::Call(name, args) => {
                let args = args.iter().map(|a| self.pure(a, pre)).collect();
                pre.push(Pre::Call {
                    callee: self.proc_ids[name.as_str()],
                    args,
                    dest,
                });
            }
            ExprKind::Flip(p) => {
                let p = self.pure(p, pre);
                let var = dest_or_temp(self);
                pre.push(Pre::Sample { var, dist: Dist::Flip(p) });
            }
            ExprKind::Uniform(n) => {
                let n = self.pure(n, pre);
                let var = dest_or_temp(self);
                pre.push(Pre::Sample {
                    var,
                    dist: Dist::Uniform(n),
                });
            }
            ExprKind::Choice(arms) => {
                let dest = dest_or_temp(self);
                let arms = arms
                    .iter()
                    .map(|(w, v)| {
                        let w = self.pure(w, &mut Vec::new());
                        let mut arm_pre = Vec::new();
                        let v = self.pure(v, &mut arm_pre);
                        (w, arm_pre, v)
                    })
                    .collect();
                pre.push(Pre::Choice { dest, arms });
            }
            _ => {
                let value = self.pure(e, pre);
                if let Some(var) = dest {
                    pre.push(Pre::Assign { var, value });
                }
            }
        }
    }

    /// Prepends the hoisted steps to `last`.
    fn chain(&mut self, pre: Vec<Pre>, last: NodeId) -> NodeId {
        let mut cur = last;
        for p in pre.into_iter().rev() {
            cur = match p {
                Pre::Sample { var, dist } => self.add(Node::Sample { var, dist, next: cur }),
                Pre::Call { callee, args, dest } => self.add(Node::Call {
                    callee,
                    args,
                    dest,
                    next: cur,
                }),
                Pre::Assign { var, value } => self.add(Node::Assign { var, value, next: cur }),
                Pre::Choice { dest, arms } => {
                    let branches = arms
                        .into_iter()
                        .map(|(w, arm_pre, value)| {
                            let assign = self.add(Node::Assign {
                                var: dest,
                                value,
                                next: cur,
                            });
                            (w, self.chain(arm_pre, assign))
                        })
                        .collect();
                    self.add(Node::Choice { branches })
                }
            };
        }
        cur
    }

    /// Assigns `value` to `var` and continues at `next`.
    fn assign(&mut self, var: usize, value: &Expr, next: NodeId) -> NodeId {
        let mut pre = Vec::new();
        self.impure(value, Some(var), &mut pre);
        self.chain(pre, next)
    }

    fn block(&mut self, stmts: &[Stmt], next: NodeId) -> NodeId {
        // declarations must be registered in source order before lowering
        // backwards
        self.declare(stmts);
        stmts.iter().rev().fold(next, |cur, s| self.stmt(s, cur))
    }

    fn declare(&mut self, stmts: &[Stmt]) {
        for s in stmts {
            match &s.kind {
                StmtKind::Decl { ty, name, .. } => {
                    self.local(name, *ty);
                }
                StmtKind::If { then, els, .. } => {
                    self.declare(std::slice::from_ref(then));
                    if let Some(els) = els {
                        self.declare(std::slice::from_ref(els));
                    }
                }
                StmtKind::While { body, .. } => self.declare(std::slice::from_ref(body)),
                StmtKind::Prob(branches) => {
                    for (_, s) in branches {
                        self.declare(std::slice::from_ref(s));
                    }
                }
                StmtKind::Block(inner) => self.declare(inner),
                _ => {}
            }
        }
    }

    fn stmt(&mut self, s: &Stmt, next: NodeId) -> NodeId {
        match &s.kind {
            StmtKind::Decl { ty, name, init } => {
                let var = self.names[name];
                match init {
                    Some(e) => self.assign(var, e, next),
                    None => {
                        let zero = if *ty == Type::Bool { PExpr::Bool(false) } else { PExpr::Int(0) };
                        self.add(Node::Assign {
                            var,
                            value: zero,
                            next,
                        })
                    }
                }
            }
            StmtKind::Assign { name, value } => {
                let var = self.names[name];
                self.assign(var, value, next)
            }
            StmtKind::If { cond, then, els } => {
                let then = self.stmt(then, next);
                let els = match els {
                    Some(e) => self.stmt(e, next),
                    None => next,
                };
                let mut pre = Vec::new();
                let cond = self.pure(cond, &mut pre);
                let branch = self.add(Node::Branch { cond, then, els });
                self.chain(pre, branch)
            }
            StmtKind::While { cond, body } => {
                let mut pre = Vec::new();
                let cond = self.pure(cond, &mut pre);
                let branch = self.add(Node::Branch {
                    cond,
                    then: PLACEHOLDER,
                    els: next,
                });
                let head = self.chain(pre, branch);
                let body = self.stmt(body, head);
                if let Node::Branch { then, .. } = &mut self.nodes[branch] {
                    *then = body;
                }
                head
            }
            StmtKind::Prob(branches) => {
                let branches = branches
                    .iter()
                    .map(|(w, s)| {
                        let w = self.pure(w, &mut Vec::new());
                        (w, self.stmt(s, next))
                    })
                    .collect();
                self.add(Node::Choice { branches })
            }
            StmtKind::Return(value) => {
                let mut pre = Vec::new();
                let value = value.as_ref().map(|e| self.pure(e, &mut pre));
                let ret = self.add(Node::Return(value));
                self.chain(pre, ret)
            }
            StmtKind::Expr(e) => {
                let mut pre = Vec::new();
                if e.is_impure() && !matches!(e.kind, ExprKind::Not(_) | ExprKind::Binary(..)) {
                    self.impure(e, None, &mut pre);
                } else {
                    self.pure(e, &mut pre);
                }
                self.chain(pre, next)
            }
            StmtKind::Block(stmts) => self.block(stmts, next),
        }
    }
}

fn live_temps(locals: &[Local], nodes: &[Node]) -> Vec<Vec<bool>> {
    let n = locals.len();
    let facts: Vec<(Vec<usize>, Option<usize>)> = nodes.iter().map(Node::uses_defs).collect();
    let succs: Vec<Vec<NodeId>> = nodes.iter().map(Node::successors).collect();
    let mut live = vec![vec![false; n]; nodes.len()];
    let mut changed = true;
    while changed {
        changed = false;
        for i in (0..nodes.len()).rev() {
            let mut out = vec![false; n];
            for &s in &succs[i] {
                for (o, l) in out.iter_mut().zip(&live[s]) {
                    *o |= *l;
                }
            }
            if let Some(d) = facts[i].1 {
                out[d] = false;
            }
            for &u in &facts[i].0 {
                out[u] = true;
            }
            if out != live[i] {
                live[i] = out;
                changed = true;
            }
        }
    }
    for row in &mut live {
        for (flag, local) in row.iter_mut().zip(locals) {
            *flag &= local.temp;
        }
    }
    live
}

pub(crate) fn lower(program: &Program) -> Cfg {
    let mut proc_ids: HashMap<&str, usize> = HashMap::new();
    let mut rets = Vec::new();
    for (i, p) in program.procedures.iter().enumerate() {
        proc_ids.insert(&p.name, i);
        rets.push(p.ret);
    }
    rets.push(program.main_ret);
    let bodies = program
        .procedures
        .iter()
        .map(|p| (p.name.as_str(), p.ret, &p.params[..], &p.body[..]))
        .chain([(crate::MAIN, program.main_ret, &[][..], &program.main[..])]);
    let mut procs = Vec::new();
    for (name, ret, params, body) in bodies {
        let mut b = Builder {
            proc_ids: &proc_ids,
            rets: &rets,
            locals: Vec::new(),
            names: HashMap::new(),
            nodes: Vec::new(),
        };
        for p in params {
            b.local(&p.name, p.ty);
        }
        let end = b.add(if ret == Type::Void { Node::Return(None) } else { Node::FallOff });
        let entry = b.block(body, end);
        let live = live_temps(&b.locals, &b.nodes);
        procs.push(ProcCfg {
            name: name.to_string(),
            locals: b.locals,
            nodes: b.nodes,
            entry,
            live_temps: live,
        });
    }
    let main = procs.len() - 1;
    Cfg { procs, main }
}
