//! Translation of lowered programs to pPDA by explicit-state exploration.
//!
//! Stack symbols are program points with their local store, written
//! `proc@node{v1;v2;...}`. State `run` executes the symbol on top; a
//! `return v` pops into state `ret_v`, where the caller's symbol below reads
//! the value and resumes. A call replaces the caller's symbol `Z` by `C Z`
//! with the callee entry `C` on top. Deterministic steps are executed during
//! translation, so every symbol sits at a call, a random choice, or a
//! deterministic loop that never exits.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use num_traits::{One, Zero};
use ppscert::ppda::{Ppda, Rule};
use ppscert::Rational;

use crate::ast::{BinOp, Type};
use crate::lower::{Cfg, Dist, Node, NodeId, PExpr, ProcCfg};
use crate::{Config, PplError};

/// A value returned by a procedure or the main block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Unit,
    Bool(bool),
    Int(u32),
}

impl Value {
    /// Name of the pPDA state that carries this return value.
    pub fn state_name(self) -> String {
        match self {
            Value::Unit => "ret".into(),
            Value::Bool(b) => format!("ret_{b}"),
            Value::Int(n) => format!("ret_{n}"),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Unit => write!(f, "()"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(n) => write!(f, "{n}"),
        }
    }
}

/// The pPDA of a program. Its initial configuration runs the main block;
/// `outcomes` lists the states in which the stack empties, one per possible
/// result of the main block.
#[derive(Debug, Clone)]
pub struct Translation {
    pub ppda: Ppda,
    pub outcomes: Vec<(usize, Value)>,
}

impl Translation {
    pub fn outcome_state(&self, value: Value) -> Option<usize> {
        self.outcomes.iter().find(|(_, v)| *v == value).map(|(q, _)| *q)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Val {
    Bool(bool),
    Int(u32),
    Prob(Rational),
}

impl Val {
    fn raw(&self) -> u32 {
        match self {
            Val::Bool(b) => u32::from(*b),
            Val::Int(n) => *n,
            Val::Prob(_) => unreachable!("probabilities are never stored"),
        }
    }

    fn prob(self) -> Rational {
        match self {
            Val::Int(n) => Rational::from_integer(n.into()),
            Val::Prob(p) => p,
            Val::Bool(_) => unreachable!("checked: weights are numeric"),
        }
    }

    fn as_bool(&self) -> bool {
        matches!(self, Val::Bool(true))
    }

    fn as_int(&self) -> u32 {
        match self {
            Val::Int(n) => *n,
            _ => unreachable!("checked: integer operand"),
        }
    }
}

type Key = (usize, NodeId, Vec<u32>);

#[derive(Debug, Clone, PartialEq)]
enum Target {
    Symbol(usize),
    Pop(Value),
}

enum Work {
    Run(usize),
    Resume(usize, Value),
}

const RUN: usize = 0;

struct Explorer<'c> {
    cfg: &'c Cfg,
    int_max: u32,
    cap: usize,
    symbols: HashMap<Key, usize>,
    keys: Vec<Key>,
    names: Vec<String>,
    states: Vec<String>,
    state_ids: HashMap<Value, usize>,
    rules: Vec<Rule>,
    returns: Vec<Vec<Value>>,
    waiting: Vec<Vec<usize>>,
    queue: VecDeque<Work>,
}

fn runtime(p: &ProcCfg, message: impl Into<String>) -> PplError {
    PplError::Runtime {
        procedure: p.name.clone(),
        message: message.into(),
    }
}

impl<'c> Explorer<'c> {
    fn eval(&self, p: &ProcCfg, e: &PExpr, store: &[u32]) -> Result<Val, PplError> {
        let domain = u64::from(self.int_max) + 1;
        Ok(match e {
            PExpr::Bool(b) => Val::Bool(*b),
            PExpr::Int(n) => Val::Int(*n),
            PExpr::Prob(q) => Val::Prob(q.clone()),
            PExpr::Var(v) => match p.locals[*v].ty {
                Type::Bool => Val::Bool(store[*v] != 0),
                _ => Val::Int(store[*v]),
            },
            PExpr::Not(inner) => Val::Bool(!self.eval(p, inner, store)?.as_bool()),
            PExpr::Bin(op, a, b) => {
                let a = self.eval(p, a, store)?;
                let b = self.eval(p, b, store)?;
                let wrap = |x: u64| Val::Int(u32::try_from(x % domain).expect("below the domain size"));
                match op {
                    BinOp::Add => wrap(u64::from(a.as_int()) + u64::from(b.as_int())),
                    BinOp::Sub => wrap(u64::from(a.as_int()) + domain - u64::from(b.as_int())),
                    BinOp::Mod => match b.as_int() {
                        0 => return Err(runtime(p, "modulo by zero")),
                        m => Val::Int(a.as_int() % m),
                    },
                    BinOp::Ratio => match b.as_int() {
                        0 => return Err(runtime(p, "division by zero")),
                        d => Val::Prob(Rational::new(a.as_int().into(), d.into())),
                    },
                    BinOp::Lt => Val::Bool(a.as_int() < b.as_int()),
                    BinOp::Le => Val::Bool(a.as_int() <= b.as_int()),
                    BinOp::Gt => Val::Bool(a.as_int() > b.as_int()),
                    BinOp::Ge => Val::Bool(a.as_int() >= b.as_int()),
                    BinOp::Eq | BinOp::Ne => {
                        let equal = match (&a, &b) {
                            (Val::Bool(x), Val::Bool(y)) => x == y,
                            _ => a.prob() == b.prob(),
                        };
                        Val::Bool(equal == (*op == BinOp::Eq))
                    }
                }
            }
        })
    }

    fn weight(&self, p: &ProcCfg, e: &PExpr, store: &[u32]) -> Result<Rational, PplError> {
        let w = self.eval(p, e, store)?.prob();
        if w > Rational::one() {
            return Err(runtime(p, format!("probability {w} exceeds 1")));
        }
        Ok(w)
    }

    fn canonical(p: &ProcCfg, node: NodeId, store: &mut [u32]) {
        for (v, local) in p.locals.iter().enumerate() {
            if local.temp && !p.live_temps[node][v] {
                store[v] = 0;
            }
        }
    }

    fn state(&mut self, value: Value) -> usize {
        if let Some(&q) = self.state_ids.get(&value) {
            return q;
        }
        self.states.push(value.state_name());
        self.state_ids.insert(value, self.states.len() - 1);
        self.states.len() - 1
    }

    fn intern(&mut self, key: Key) -> Result<usize, PplError> {
        if let Some(&z) = self.symbols.get(&key) {
            return Ok(z);
        }
        if self.keys.len() >= self.cap {
            return Err(PplError::StateSpace { cap: self.cap });
        }
        let p = &self.cfg.procs[key.0];
        let mut name = format!("{}@{}", p.name, key.1);
        if !key.2.is_empty() {
            let values: Vec<String> = key.2.iter().map(u32::to_string).collect();
            name.push_str(&format!("{{{}}}", values.join(";")));
        }
        let z = self.keys.len();
        self.symbols.insert(key.clone(), z);
        self.keys.push(key);
        self.names.push(name);
        self.queue.push_back(Work::Run(z));
        Ok(z)
    }

    fn note_return(&mut self, proc: usize, value: Value) {
        if self.returns[proc].contains(&value) {
            return;
        }
        self.state(value);
        self.returns[proc].push(value);
        for &z in &self.waiting[proc] {
            self.queue.push_back(Work::Resume(z, value));
        }
    }

    /// Runs deterministic steps from `node` and returns where control
    /// rests: a symbol, or a return. A deterministic cycle rests at the
    /// first repeated point.
    fn target(&mut self, proc: usize, mut node: NodeId, mut store: Vec<u32>) -> Result<Target, PplError> {
        let cfg = self.cfg;
        let p = &cfg.procs[proc];
        let mut seen = std::collections::HashSet::new();
        loop {
            Self::canonical(p, node, &mut store);
            let next = match &p.nodes[node] {
                Node::Assign { var, value, next } => {
                    if !seen.insert((node, store.clone())) {
                        break;
                    }
                    store[*var] = self.eval(p, value, &store)?.raw();
                    *next
                }
                Node::Branch { cond, then, els } => {
                    if !seen.insert((node, store.clone())) {
                        break;
                    }
                    if self.eval(p, cond, &store)?.as_bool() {
                        *then
                    } else {
                        *els
                    }
                }
                Node::Return(value) => {
                    let value = match value {
                        None => Value::Unit,
                        Some(e) => match self.eval(p, e, &store)? {
                            Val::Bool(b) => Value::Bool(b),
                            Val::Int(n) => Value::Int(n),
                            Val::Prob(_) => unreachable!("checked: no probability results"),
                        },
                    };
                    self.note_return(proc, value);
                    return Ok(Target::Pop(value));
                }
                Node::FallOff => {
                    return Err(runtime(p, format!("`{}` can end without returning a value", p.name)));
                }
                Node::Sample { .. } | Node::Choice { .. } | Node::Call { .. } => break,
            };
            node = next;
        }
        Ok(Target::Symbol(self.intern((proc, node, store))?))
    }

    fn emit(&mut self, state: usize, symbol: usize, outcomes: Vec<(Rational, Target)>, below: Option<usize>) {
        let mut merged: Vec<(Rational, Target)> = Vec::new();
        for (prob, target) in outcomes {
            if prob.is_zero() {
                continue;
            }
            match merged.iter_mut().find(|(_, t)| *t == target) {
                Some((p, _)) => *p += prob,
                None => merged.push((prob, target)),
            }
        }
        for (prob, target) in merged {
            let (to, push) = match target {
                Target::Symbol(z) => (RUN, std::iter::once(z).chain(below).collect()),
                Target::Pop(v) => (self.state(v), below.into_iter().collect()),
            };
            self.rules.push(Rule {
                state,
                symbol,
                prob,
                target: to,
                push,
            });
        }
    }

    fn run(&mut self, z: usize) -> Result<(), PplError> {
        let (proc, node, store) = self.keys[z].clone();
        let cfg = self.cfg;
        let p = &cfg.procs[proc];
        match &p.nodes[node] {
            Node::Sample { var, dist, next } => {
                let outcomes: Vec<(Rational, u32)> = match dist {
                    Dist::Flip(e) => {
                        let w = self.weight(p, e, &store)?;
                        vec![(w.clone(), 1), (Rational::one() - w, 0)]
                    }
                    Dist::Uniform(e) => {
                        let n = self.eval(p, e, &store)?.as_int();
                        if n == 0 || u64::from(n) > u64::from(self.int_max) + 1 {
                            return Err(runtime(p, format!("uniform({n}) is outside 1..{}", self.int_max + 1)));
                        }
                        (0..n).map(|k| (Rational::new(1.into(), n.into()), k)).collect()
                    }
                };
                let mut targets = Vec::with_capacity(outcomes.len());
                for (prob, value) in outcomes {
                    if prob.is_zero() {
                        continue;
                    }
                    let mut s = store.clone();
                    s[*var] = value;
                    targets.push((prob, self.target(proc, *next, s)?));
                }
                self.emit(RUN, z, targets, None);
            }
            Node::Choice { branches } => {
                let mut total = Rational::zero();
                let mut targets = Vec::with_capacity(branches.len());
                for (w, entry) in branches {
                    let w = self.weight(p, w, &store)?;
                    total += &w;
                    if !w.is_zero() {
                        targets.push((w, self.target(proc, *entry, store.clone())?));
                    }
                }
                if !total.is_one() {
                    return Err(runtime(p, format!("probabilities sum to {total}, not 1")));
                }
                self.emit(RUN, z, targets, None);
            }
            Node::Call { callee, args, .. } => {
                let callee = *callee;
                let q = &cfg.procs[callee];
                let mut entry_store = vec![0; q.locals.len()];
                for (slot, a) in entry_store.iter_mut().zip(args) {
                    *slot = self.eval(p, a, &store)?.raw();
                }
                let entry = self.target(callee, q.entry, entry_store)?;
                self.emit(RUN, z, vec![(Rational::one(), entry)], Some(z));
                self.waiting[callee].push(z);
                for v in self.returns[callee].clone() {
                    self.queue.push_back(Work::Resume(z, v));
                }
            }
            // deterministic cycle
            Node::Assign { .. } | Node::Branch { .. } => {
                self.emit(RUN, z, vec![(Rational::one(), Target::Symbol(z))], None);
            }
            Node::Return(_) | Node::FallOff => unreachable!("returns never rest as symbols"),
        }
        Ok(())
    }

    fn resume(&mut self, z: usize, value: Value) -> Result<(), PplError> {
        let (proc, node, mut store) = self.keys[z].clone();
        let cfg = self.cfg;
        let Node::Call { dest, next, .. } = &cfg.procs[proc].nodes[node] else {
            unreachable!("only call sites wait for results")
        };
        if let Some(d) = dest {
            store[*d] = match value {
                Value::Unit => 0,
                Value::Bool(b) => u32::from(b),
                Value::Int(n) => n,
            };
        }
        let target = self.target(proc, *next, store)?;
        let q = self.state(value);
        self.emit(q, z, vec![(Rational::one(), target)], None);
        Ok(())
    }
}

pub(crate) fn translate_cfg(cfg: &Cfg, config: &Config) -> Result<Translation, PplError> {
    let n = cfg.procs.len();
    let mut ex = Explorer {
        cfg,
        int_max: config.int_max,
        cap: config.symbol_cap,
        symbols: HashMap::new(),
        keys: Vec::new(),
        names: Vec::new(),
        states: vec!["run".into()],
        state_ids: HashMap::new(),
        rules: Vec::new(),
        returns: vec![Vec::new(); n],
        waiting: vec![Vec::new(); n],
        queue: VecDeque::new(),
    };
    let main = &cfg.procs[cfg.main];
    let init = match ex.target(cfg.main, main.entry, vec![0; main.locals.len()])? {
        Target::Symbol(z) => z,
        Target::Pop(v) => {
            // the main block finishes without randomness
            let z = ex.keys.len();
            ex.keys.push((cfg.main, usize::MAX, Vec::new()));
            ex.names.push(format!("{}@start", main.name));
            let q = ex.state(v);
            ex.rules.push(Rule {
                state: RUN,
                symbol: z,
                prob: Rational::one(),
                target: q,
                push: Vec::new(),
            });
            z
        }
    };
    while let Some(work) = ex.queue.pop_front() {
        match work {
            Work::Run(z) => ex.run(z)?,
            Work::Resume(z, v) => ex.resume(z, v)?,
        }
    }
    let outcomes = ex.returns[cfg.main].iter().map(|&v| (ex.state_ids[&v], v)).collect();
    let ppda = Ppda::new(ex.states, ex.names, ex.rules, (RUN, init))
        .map_err(|e| runtime(main, format!("internal: invalid automaton: {e}")))?;
    Ok(Translation { ppda, outcomes })
}
