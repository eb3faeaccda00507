//! Probabilistic pushdown automata and the polynomial systems derived from
//! them: return probabilities, bad-state reachability, output distributions
//! and expected rewards.
//!
//! A rule `q Z -> p r α` pops `Z` in state `q` and, with probability `p`,
//! moves to `r` and pushes the word `α` of length at most two. In a pushed
//! word `Y X`, `Y` ends up on top.

mod text;

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::ovi::OviParams;
use crate::pps::{Monomial, PolySystem, VarId};
use crate::solve::{solve, SolveError, Solved};
use crate::{Certificate, Rational};

pub use text::parse_ppda;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PpdaError {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown stack symbol `{0}`")]
    UnknownSymbol(String),
    #[error("`{0}` is not a valid state or stack symbol name")]
    InvalidName(String),
    #[error("`{0}` is declared twice")]
    DuplicateName(String),
    #[error("rule {rule} pushes {len} symbols; at most 2 are allowed")]
    PushTooLong { rule: usize, len: usize },
    #[error("rule {rule} has a probability outside (0, 1]")]
    BadProbability { rule: usize },
    #[error("rules for ({state}, {symbol}) have total probability {total} > 1")]
    Overfull { state: String, symbol: String, total: String },
    #[error("rules for ({state}, {symbol}) have total probability {total} != 1")]
    NotStochastic { state: String, symbol: String, total: String },
    #[error("rule `{0}` pushes exactly one symbol; expected rewards need pushes of 0 or 2 symbols")]
    ArityViolation(String),
    #[error("bounds sum to {0} < 1, contradicting almost-sure termination")]
    SlackNegative(String),
    #[error("certificate lacks a bound for `{0}`")]
    MissingBound(String),
    #[error("reward for `{0}` is negative")]
    NegativeReward(String),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// `state symbol -> prob target push`, with `push[0]` on top.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub state: usize,
    pub symbol: usize,
    pub prob: Rational,
    pub target: usize,
    pub push: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ppda {
    states: Vec<String>,
    stack: Vec<String>,
    rules: Vec<Rule>,
    init: (usize, usize),
    /// Rule ids per head `(state, symbol)`, at `state * |stack| + symbol`.
    heads: Vec<Vec<usize>>,
}

pub(crate) fn is_valid_name(name: &str) -> bool {
    !name.is_empty()
        && name != "->"
        && name != "eps"
        && !name
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '<' | '>' | '#' | ','))
}

impl Ppda {
    /// Validates names, rule shapes and that no head has total probability
    /// above 1. Heads without full mass are allowed; the missing mass gets
    /// stuck.
    pub fn new(
        states: Vec<String>,
        stack: Vec<String>,
        rules: Vec<Rule>,
        init: (usize, usize),
    ) -> Result<Self, PpdaError> {
        let mut seen = std::collections::HashSet::new();
        for name in states.iter().chain(&stack) {
            if !is_valid_name(name) {
                return Err(PpdaError::InvalidName(name.clone()));
            }
        }
        for name in &states {
            if !seen.insert(name) {
                return Err(PpdaError::DuplicateName(name.clone()));
            }
        }
        seen.clear();
        for name in &stack {
            if !seen.insert(name) {
                return Err(PpdaError::DuplicateName(name.clone()));
            }
        }
        let (nq, ng) = (states.len(), stack.len());
        if init.0 >= nq {
            return Err(PpdaError::UnknownState(format!("#{}", init.0)));
        }
        if init.1 >= ng {
            return Err(PpdaError::UnknownSymbol(format!("#{}", init.1)));
        }
        let mut heads = vec![Vec::new(); nq * ng];
        for (i, rule) in rules.iter().enumerate() {
            if rule.state >= nq || rule.target >= nq {
                return Err(PpdaError::UnknownState(format!("#{}", rule.state.max(rule.target))));
            }
            if let Some(&z) = rule.push.iter().chain([&rule.symbol]).find(|&&z| z >= ng) {
                return Err(PpdaError::UnknownSymbol(format!("#{z}")));
            }
            if rule.push.len() > 2 {
                return Err(PpdaError::PushTooLong {
                    rule: i,
                    len: rule.push.len(),
                });
            }
            if !rule.prob.is_positive() || rule.prob > Rational::one() {
                return Err(PpdaError::BadProbability { rule: i });
            }
            heads[rule.state * ng + rule.symbol].push(i);
        }
        let ppda = Ppda {
            states,
            stack,
            rules,
            init,
            heads,
        };
        for q in 0..nq {
            for z in 0..ng {
                let total = ppda.head_mass(q, z);
                if total > Rational::one() {
                    return Err(PpdaError::Overfull {
                        state: ppda.states[q].clone(),
                        symbol: ppda.stack[z].clone(),
                        total: crate::rational::format_compact(&total),
                    });
                }
            }
        }
        Ok(ppda)
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn stack(&self) -> &[String] {
        &self.stack
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn init(&self) -> (usize, usize) {
        self.init
    }

    pub fn state_id(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn symbol_id(&self, name: &str) -> Option<usize> {
        self.stack.iter().position(|s| s == name)
    }

    pub fn rules_for(&self, state: usize, symbol: usize) -> impl Iterator<Item = &Rule> + '_ {
        self.heads[state * self.stack.len() + symbol]
            .iter()
            .map(move |&i| &self.rules[i])
    }

    /// Total probability of the rules with head `(state, symbol)`.
    pub fn head_mass(&self, state: usize, symbol: usize) -> Rational {
        self.rules_for(state, symbol)
            .fold(Rational::zero(), |acc, r| acc + &r.prob)
    }

    /// Requires every head with at least one rule to have mass exactly 1.
    pub fn check_stochastic(&self) -> Result<(), PpdaError> {
        for q in 0..self.states.len() {
            for z in 0..self.stack.len() {
                if self.heads[q * self.stack.len() + z].is_empty() {
                    continue;
                }
                let total = self.head_mass(q, z);
                if !total.is_one() {
                    return Err(PpdaError::NotStochastic {
                        state: self.states[q].clone(),
                        symbol: self.stack[z].clone(),
                        total: crate::rational::format_compact(&total),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn with_init(mut self, init: (usize, usize)) -> Self {
        assert!(init.0 < self.states.len() && init.1 < self.stack.len());
        self.init = init;
        self
    }

    pub fn describe_rule(&self, rule: &Rule) -> String {
        let mut out = format!(
            "{} {} -> {} {}",
            self.states[rule.state],
            self.stack[rule.symbol],
            crate::rational::format_compact(&rule.prob),
            self.states[rule.target]
        );
        if rule.push.is_empty() {
            out.push_str(" eps");
        }
        for &z in &rule.push {
            out.push(' ');
            out.push_str(&self.stack[z]);
        }
        out
    }

    pub fn to_text(&self) -> String {
        text::to_text(self)
    }
}

/// Bijection between triples `(q, Z, r)` and variables `<q,Z,r>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReturnVarIndex {
    states: usize,
    symbols: usize,
}

impl ReturnVarIndex {
    pub fn new(states: usize, symbols: usize) -> Self {
        ReturnVarIndex { states, symbols }
    }

    pub fn len(&self) -> usize {
        self.states * self.states * self.symbols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn var(&self, q: usize, z: usize, r: usize) -> VarId {
        debug_assert!(q < self.states && z < self.symbols && r < self.states);
        (q * self.symbols + z) * self.states + r
    }

    pub fn triple(&self, var: VarId) -> (usize, usize, usize) {
        let r = var % self.states;
        let qz = var / self.states;
        (qz / self.symbols, qz % self.symbols, r)
    }
}

pub fn return_var_name(a: &Ppda, q: usize, z: usize, r: usize) -> String {
    format!("<{},{},{}>", a.states[q], a.stack[z], a.states[r])
}

/// The return-probability system: one variable `<q,Z,r>` per triple with
/// `<qZr> = Σ_{qZ→p sYX} p Σ_t <sYt><tXr> + Σ_{qZ→p sY} p <sYr> + Σ_{qZ→p rε} p`.
pub fn return_pps(a: &Ppda) -> (PolySystem, ReturnVarIndex) {
    let (nq, ng) = (a.states.len(), a.stack.len());
    let idx = ReturnVarIndex::new(nq, ng);
    let mut names = Vec::with_capacity(idx.len());
    let mut equations = Vec::with_capacity(idx.len());
    for q in 0..nq {
        for z in 0..ng {
            for r in 0..nq {
                names.push(return_var_name(a, q, z, r));
                let mut poly = Vec::new();
                for rule in a.rules_for(q, z) {
                    let s = rule.target;
                    match rule.push[..] {
                        [y, x] => {
                            for t in 0..nq {
                                poly.extend(Monomial::new(
                                    rule.prob.clone(),
                                    [(idx.var(s, y, t), 1), (idx.var(t, x, r), 1)],
                                ));
                            }
                        }
                        [y] => poly.extend(Monomial::new(rule.prob.clone(), [(idx.var(s, y, r), 1)])),
                        [] if s == r => poly.extend(Monomial::constant(rule.prob.clone())),
                        _ => {}
                    }
                }
                equations.push(poly);
            }
        }
    }
    let sys = PolySystem::new(names, equations).expect("return system is well-formed");
    (sys, idx)
}

/// Certified upper bounds on all return probabilities.
pub fn basic_certificate(a: &Ppda, params: &OviParams) -> Result<(Solved, ReturnVarIndex), SolveError> {
    let (sys, idx) = return_pps(a);
    solve(&sys, params).map(|s| (s, idx))
}

/// Makes `r_bad` absorbing: its rules are replaced by `r_bad Z -> 1 r_bad ε`
/// for every `Z`. The bound on `<q,Z,r_bad>` then bounds the probability of
/// ever reaching `r_bad` from `qZ`.
pub fn bad_state_transform(a: &Ppda, r_bad: &str) -> Result<Ppda, PpdaError> {
    let bad = a
        .state_id(r_bad)
        .ok_or_else(|| PpdaError::UnknownState(r_bad.to_string()))?;
    let mut rules: Vec<Rule> = a.rules.iter().filter(|r| r.state != bad).cloned().collect();
    for z in 0..a.stack.len() {
        rules.push(Rule {
            state: bad,
            symbol: z,
            prob: Rational::one(),
            target: bad,
            push: Vec::new(),
        });
    }
    Ppda::new(a.states.clone(), a.stack.clone(), rules, a.init)
}

/// Interval for the probability that a run from `(q, Z)` empties the stack
/// in each state.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeBounds {
    pub state: String,
    pub lower: Rational,
    pub upper: Rational,
}

/// Upper bounds are the certificate entries `u_{qZr}`. Under almost-sure
/// termination the lower bounds are `u_{qZr}` minus the total excess
/// `Σ_r u_{qZr} − 1`, clamped at 0; otherwise they are 0.
pub fn output_distribution_bounds(
    a: &Ppda,
    init: (usize, usize),
    cert: &Certificate,
    assume_ast: bool,
) -> Result<Vec<OutcomeBounds>, PpdaError> {
    let (q, z) = init;
    let mut uppers = Vec::with_capacity(a.states.len());
    for r in 0..a.states.len() {
        let name = return_var_name(a, q, z, r);
        let u = cert.value(&name).ok_or(PpdaError::MissingBound(name))?;
        uppers.push(u.clone());
    }
    let total: Rational = uppers.iter().fold(Rational::zero(), |acc, u| acc + u);
    let slack = &total - Rational::one();
    if assume_ast && slack.is_negative() {
        return Err(PpdaError::SlackNegative(crate::rational::format_compact(&total)));
    }
    Ok(uppers
        .into_iter()
        .enumerate()
        .map(|(r, upper)| {
            let lower = if assume_ast {
                let l = &upper - &slack;
                if l.is_negative() {
                    Rational::zero()
                } else {
                    l
                }
            } else {
                Rational::zero()
            };
            OutcomeBounds {
                state: a.states[r].clone(),
                lower,
                upper,
            }
        })
        .collect())
}

/// Non-negative reward per state.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardModel {
    pub reward: Vec<Rational>,
}

impl RewardModel {
    pub fn constant(a: &Ppda, value: Rational) -> Self {
        RewardModel {
            reward: vec![value; a.states.len()],
        }
    }

    /// Lines `state value`; unlisted states get reward 0.
    pub fn parse(a: &Ppda, text: &str) -> Result<Self, PpdaError> {
        let mut reward = vec![Rational::zero(); a.states.len()];
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |message: &str| PpdaError::Syntax {
                line: i + 1,
                message: message.to_string(),
            };
            let mut parts = line.split_whitespace();
            let (Some(state), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(syntax("expected `<state> <reward>`"));
            };
            let q = a
                .state_id(state)
                .ok_or_else(|| PpdaError::UnknownState(state.to_string()))?;
            let value = crate::rational::parse_rational(value).map_err(|e| syntax(&e.to_string()))?;
            if value.is_negative() {
                return Err(PpdaError::NegativeReward(state.to_string()));
            }
            reward[q] = value;
        }
        Ok(RewardModel { reward })
    }
}

pub fn reward_var_name(a: &Ppda, q: usize, z: usize, r: usize) -> String {
    format!("<E,{},{},{}>", a.states[q], a.stack[z], a.states[r])
}

/// The linear expected-reward system over variables `<E,q,Z,r>`, with the
/// certificate's bounds substituted for return probabilities:
/// `E_qZr = Σ_{qZ→p sYX} p Σ_t u_sYt u_tXr (R(r) + E_sYt + E_tXr) + Σ_{qZ→p rε} p R(r)`.
pub fn reward_pps(
    a: &Ppda,
    rewards: &RewardModel,
    cert: &Certificate,
) -> Result<(PolySystem, ReturnVarIndex), PpdaError> {
    if let Some(rule) = a.rules.iter().find(|r| r.push.len() == 1) {
        return Err(PpdaError::ArityViolation(a.describe_rule(rule)));
    }
    let (nq, ng) = (a.states.len(), a.stack.len());
    let idx = ReturnVarIndex::new(nq, ng);
    let lookup: HashMap<&str, &Rational> = cert
        .names
        .iter()
        .map(String::as_str)
        .zip(cert.upper.iter())
        .collect();
    let u = |q: usize, z: usize, r: usize| -> Result<Rational, PpdaError> {
        let name = return_var_name(a, q, z, r);
        lookup
            .get(name.as_str())
            .map(|v| (*v).clone())
            .ok_or(PpdaError::MissingBound(name))
    };
    let mut names = Vec::with_capacity(idx.len());
    let mut equations = Vec::with_capacity(idx.len());
    for q in 0..nq {
        for z in 0..ng {
            for r in 0..nq {
                names.push(reward_var_name(a, q, z, r));
                let reward = &rewards.reward[r];
                let mut poly = Vec::new();
                for rule in a.rules_for(q, z) {
                    let s = rule.target;
                    match rule.push[..] {
                        [y, x] => {
                            for t in 0..nq {
                                let w = &rule.prob * u(s, y, t)? * u(t, x, r)?;
                                poly.extend(Monomial::constant(&w * reward));
                                poly.extend(Monomial::new(w.clone(), [(idx.var(s, y, t), 1)]));
                                poly.extend(Monomial::new(w, [(idx.var(t, x, r), 1)]));
                            }
                        }
                        [] if s == r => poly.extend(Monomial::constant(&rule.prob * reward)),
                        _ => {}
                    }
                }
                equations.push(poly);
            }
        }
    }
    let sys = PolySystem::new(names, equations).expect("reward system is well-formed");
    Ok((sys, idx))
}

/// Name of the fresh symbol introduced by [`normalize_unary`].
pub const BOTTOM: &str = "_bot";

/// Rewrites every rule `qZ -> p sY` into `qZ -> p sY⊥` with a fresh symbol
/// `⊥` that every state pops immediately. Return probabilities are
/// unchanged; each rewritten rule adds one pop step to the runs through it.
pub fn normalize_unary(a: &Ppda) -> Result<Ppda, PpdaError> {
    if a.rules.iter().all(|r| r.push.len() != 1) {
        return Ok(a.clone());
    }
    let mut stack = a.stack.clone();
    let mut bottom = BOTTOM.to_string();
    while stack.contains(&bottom) {
        bottom.push('_');
    }
    let b = stack.len();
    stack.push(bottom);
    let mut rules: Vec<Rule> = a
        .rules
        .iter()
        .map(|r| {
            let mut r = r.clone();
            if r.push.len() == 1 {
                r.push.push(b);
            }
            r
        })
        .collect();
    for q in 0..a.states.len() {
        rules.push(Rule {
            state: q,
            symbol: b,
            prob: Rational::one(),
            target: q,
            push: Vec::new(),
        });
    }
    Ppda::new(a.states.clone(), stack, rules, a.init)
}
