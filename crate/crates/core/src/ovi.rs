//! Optimistic value iteration on one strongly connected clean system.
//!
//! Lower bounds are improved until the last step moved them by at most the
//! tolerance `τ`. Then upper bounds are guessed from the lower bound, either
//! along the Perron–Frobenius direction of the Jacobian (`Eigenvector`) or
//! proportionally to it (`Relative`), and accepted once they are inductive in
//! binary64. Every failed round tightens `τ` and allows one more guess.

use num_bigint::BigInt;
use thiserror::Error;

use crate::cert::RoundingGrain;
use crate::eigen::{approx_eigenvec, DEFAULT_MAX_ITERS};
use crate::lower::{improve_until, IterState, LowerError, UpdateKind, DEFAULT_BUDGET};
use crate::pps::Polys;
use crate::rational::ratio;
use crate::{PolySystem, Rational, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    #[default]
    Eigenvector,
    Relative,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Eigenvector => "eigenvector",
            Strategy::Relative => "relative",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OviParams {
    pub epsilon: Rational,
    pub c: f64,
    pub d: f64,
    pub max_guess_rounds: usize,
    pub strategy: Strategy,
    pub update: UpdateKind,
    pub k_max: u32,
    pub grain: RoundingGrain,
    /// Lower-bound steps allowed per strongly connected component.
    pub budget: u64,
    pub eigen_max_iters: usize,
    /// Worker threads for independent components; 1 solves sequentially.
    pub jobs: usize,
}

impl Default for OviParams {
    fn default() -> Self {
        OviParams {
            epsilon: ratio(1, 1000),
            c: 0.1,
            d: 0.5,
            max_guess_rounds: 10,
            strategy: Strategy::Eigenvector,
            update: UpdateKind::GaussSeidel,
            k_max: 10,
            grain: RoundingGrain::default(),
            budget: DEFAULT_BUDGET,
            eigen_max_iters: DEFAULT_MAX_ITERS,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid parameter: {0}")]
pub struct InvalidParams(pub String);

impl OviParams {
    pub fn validate(&self) -> Result<(), InvalidParams> {
        let bad = |m: &str| Err(InvalidParams(m.to_string()));
        if self.epsilon <= Rational::from_integer(BigInt::from(0)) {
            return bad("epsilon must be positive");
        }
        if !(self.c > 0.0 && self.c < 1.0) {
            return bad("c must lie strictly between 0 and 1");
        }
        if !(self.d > 0.0 && self.d < 1.0) {
            return bad("d must lie strictly between 0 and 1");
        }
        if self.max_guess_rounds < 1 {
            return bad("at least one guess round is required");
        }
        if self.k_max < 1 {
            return bad("k-induction depth must be at least 1");
        }
        if self.grain.denominator_bound < BigInt::from(2) {
            return bad("denominator bound must be at least 2");
        }
        if self.budget == 0 || self.eigen_max_iters == 0 || self.jobs == 0 {
            return bad("budgets and job count must be positive");
        }
        Ok(())
    }

    pub fn epsilon_f64(&self) -> f64 {
        self.epsilon.to_f64()
    }
}

/// `u = l + d^k · ε · v`.
pub fn guess<T: Scalar>(l: &[T], v: &[T], epsilon: &T, d: &T, k: u32) -> Vec<T> {
    assert_eq!(l.len(), v.len(), "dimension mismatch");
    let scale = d.powu(k) * epsilon.clone();
    l.iter()
        .zip(v)
        .map(|(li, vi)| li.clone() + scale.clone() * vi.clone())
        .collect()
}

/// `u = (1 + d^k · ε) · l`, the update rule of standard OVI.
pub fn guess_relative<T: Scalar>(l: &[T], epsilon: &T, d: &T, k: u32) -> Vec<T> {
    let factor = T::one() + d.powu(k) * epsilon.clone();
    l.iter().map(|li| factor.clone() * li.clone()).collect()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OviError {
    #[error("no inductive guess after {rounds} rounds (spectral radius estimate {spectral_radius:.6})")]
    GuessBudgetExhausted { rounds: usize, spectral_radius: f64 },
    #[error(transparent)]
    Lower(#[from] LowerError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SccSolution {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Guesses tried, including the accepted one.
    pub guesses_used: usize,
    pub rounds: usize,
    pub iterations: u64,
    pub strategy_used: Strategy,
    pub tau: f64,
}

/// Resumable run of the algorithm; [`OviRun::tighten`] lets the caller ask
/// for a fresh guess after an exact check rejected the previous one.
pub struct OviRun<'a> {
    f: Polys<f64>,
    params: &'a OviParams,
    state: IterState<f64>,
    tau: f64,
    n: u32,
    rounds: usize,
    guesses: usize,
    v: Option<Vec<f64>>,
}

impl<'a> OviRun<'a> {
    pub fn new(sys: &PolySystem, params: &'a OviParams) -> Self {
        OviRun {
            f: sys.view(),
            params,
            state: IterState::zero(sys.dim()),
            tau: params.epsilon_f64(),
            n: 0,
            rounds: 0,
            guesses: 0,
            v: None,
        }
    }

    fn end_round(&mut self) {
        self.rounds += 1;
        self.n += 1;
        self.tau = self.params.epsilon_f64() * self.params.c.powi(self.rounds as i32);
    }

    /// Counts the previous result as a failed round.
    pub fn tighten(&mut self) {
        self.end_round();
    }

    fn spectral_radius(&self) -> f64 {
        let j = self.f.jacobian(&self.state.current);
        approx_eigenvec(&j, 1e-9, self.v.as_deref(), self.params.eigen_max_iters).eigenvalue
    }

    pub fn next(&mut self) -> Result<SccSolution, OviError> {
        let p = self.params;
        let eps = p.epsilon_f64();
        while self.rounds < p.max_guess_rounds {
            let used = self.state.rounds;
            if used >= p.budget {
                return Err(LowerError::BudgetExhausted {
                    budget: p.budget,
                    last_delta: self.state.last_delta,
                }
                .into());
            }
            improve_until(&self.f, &mut self.state, p.update, self.tau, p.budget - used).map_err(
                |e| match e {
                    LowerError::BudgetExhausted { last_delta, .. } => LowerError::BudgetExhausted {
                        budget: p.budget,
                        last_delta,
                    },
                    other => other,
                },
            )?;
            let l = &self.state.current;
            if p.strategy == Strategy::Eigenvector {
                let j = self.f.jacobian(l);
                let est = approx_eigenvec(&j, self.tau, self.v.as_deref(), p.eigen_max_iters);
                self.v = Some(est.vector);
            }
            for k in 0..=self.n {
                let u = match p.strategy {
                    Strategy::Eigenvector => {
                        guess(l, self.v.as_deref().expect("eigenvector computed"), &eps, &p.d, k)
                    }
                    Strategy::Relative => guess_relative(l, &eps, &p.d, k),
                };
                self.guesses += 1;
                if self.f.is_inductive(&u) {
                    return Ok(SccSolution {
                        lower: l.clone(),
                        upper: u,
                        guesses_used: self.guesses,
                        rounds: self.rounds + 1,
                        iterations: self.state.rounds,
                        strategy_used: p.strategy,
                        tau: self.tau,
                    });
                }
            }
            self.end_round();
        }
        Err(OviError::GuessBudgetExhausted {
            rounds: self.rounds,
            spectral_radius: self.spectral_radius(),
        })
    }

    pub fn guesses(&self) -> usize {
        self.guesses
    }

    pub fn iterations(&self) -> u64 {
        self.state.rounds
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

/// Runs the algorithm on a strongly connected clean system.
pub fn ovi_scc(sys: &PolySystem, params: &OviParams) -> Result<SccSolution, OviError> {
    OviRun::new(sys, params).next()
}
