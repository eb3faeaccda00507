//! Seeded generators for random systems and automata, used by the property
//! tests and the scale benchmarks.

use num_bigint::BigInt;
use rand::Rng;

use crate::ppda::{Ppda, Rule};
use crate::pps::{Monomial, PolySystem};
use crate::rational::{int, ratio};
use crate::Rational;

/// Shape of a random positive polynomial system.
#[derive(Debug, Clone)]
pub struct SystemShape {
    pub vars: usize,
    /// Non-constant monomials per equation.
    pub terms_per_eq: usize,
    pub max_degree: u32,
    /// Probability that an equation gets a constant term.
    pub constant_prob: f64,
    /// Exact sum of all coefficients of each equation. Below 1 the all-ones
    /// vector is strictly inductive, so the system is feasible.
    pub mass: Rational,
    /// Put `x_{i+1 mod n}` into the first monomial of `f_i`, which makes the
    /// dependency graph one cycle-connected component.
    pub strongly_connected: bool,
}

impl SystemShape {
    pub fn new(vars: usize) -> Self {
        SystemShape {
            vars,
            terms_per_eq: 2,
            max_degree: 2,
            constant_prob: 1.0,
            mass: ratio(9, 10),
            strongly_connected: false,
        }
    }
}

/// Random system with integer weights in `1..=100` normalized to `shape.mass`.
pub fn random_system<R: Rng>(rng: &mut R, shape: &SystemShape) -> PolySystem {
    let n = shape.vars;
    assert!(n > 0, "need at least one variable");
    let mut equations = Vec::with_capacity(n);
    for i in 0..n {
        let mut monomials: Vec<Vec<(usize, u32)>> = Vec::new();
        if rng.gen_bool(shape.constant_prob) {
            monomials.push(Vec::new());
        }
        for k in 0..shape.terms_per_eq {
            let degree = rng.gen_range(1..=shape.max_degree.max(1));
            let mut powers: Vec<(usize, u32)> = Vec::new();
            let mut remaining = degree;
            if k == 0 && shape.strongly_connected {
                powers.push(((i + 1) % n, 1));
                remaining -= 1;
            }
            while remaining > 0 {
                let e = rng.gen_range(1..=remaining);
                powers.push((rng.gen_range(0..n), e));
                remaining -= e;
            }
            monomials.push(powers);
        }
        let weights: Vec<i64> = monomials.iter().map(|_| rng.gen_range(1..=100)).collect();
        let total: i64 = weights.iter().sum();
        let poly = monomials
            .into_iter()
            .zip(weights)
            .filter_map(|(powers, w)| Monomial::new(&shape.mass * ratio(w, total), powers))
            .collect();
        equations.push(poly);
    }
    let names = (0..n).map(|i| format!("x{i}")).collect();
    PolySystem::new(names, equations).expect("generated system is valid")
}

/// Shape of a random pPDA.
#[derive(Debug, Clone)]
pub struct PpdaShape {
    pub states: usize,
    pub stack: usize,
    pub max_rules: usize,
    /// Probability that a rule group loses some mass (sum strictly below 1).
    pub leak_prob: f64,
    /// Allow pushes of exactly one symbol.
    pub allow_unary: bool,
}

impl PpdaShape {
    pub fn new(states: usize, stack: usize) -> Self {
        PpdaShape {
            states,
            stack,
            max_rules: 3,
            leak_prob: 0.0,
            allow_unary: true,
        }
    }
}

/// Random pPDA whose every `(q, Z)` has between one and `max_rules` rules.
pub fn random_ppda<R: Rng>(rng: &mut R, shape: &PpdaShape) -> Ppda {
    let states: Vec<String> = (0..shape.states).map(|i| format!("q{i}")).collect();
    let stack: Vec<String> = (0..shape.stack).map(|i| format!("Z{i}")).collect();
    let mut rules = Vec::new();
    for q in 0..shape.states {
        for z in 0..shape.stack {
            let count = rng.gen_range(1..=shape.max_rules.max(1));
            let weights: Vec<i64> = (0..count).map(|_| rng.gen_range(1..=20)).collect();
            let mut total: i64 = weights.iter().sum();
            if rng.gen_bool(shape.leak_prob) {
                total += rng.gen_range(1..=10);
            }
            for w in weights {
                let len = loop {
                    let len = rng.gen_range(0..=2usize);
                    if len != 1 || shape.allow_unary {
                        break len;
                    }
                };
                let push = (0..len).map(|_| rng.gen_range(0..shape.stack)).collect();
                rules.push(Rule {
                    state: q,
                    symbol: z,
                    prob: Rational::new(BigInt::from(w), BigInt::from(total)),
                    target: rng.gen_range(0..shape.states),
                    push,
                });
            }
        }
    }
    Ppda::new(states, stack, rules, (0, 0)).expect("generated automaton is valid")
}

/// A point with small-denominator rational entries in `[0, hi]`.
pub fn random_rational_point<R: Rng>(rng: &mut R, dim: usize, hi: i64) -> Vec<Rational> {
    (0..dim)
        .map(|_| {
            let den = rng.gen_range(1..=64);
            ratio(rng.gen_range(0..=hi * den), den)
        })
        .collect()
}

/// All-zero rational vector.
pub fn zeros(dim: usize) -> Vec<Rational> {
    vec![int(0); dim]
}
