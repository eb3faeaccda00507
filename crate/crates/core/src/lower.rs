//! Lower bounds on the least fixpoint by Kleene and Gauss–Seidel iteration.

use thiserror::Error;

use crate::pps::Polys;
use crate::Scalar;

/// Iterates above this value are taken as evidence of an infinite lfp.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// Default step budget per strongly connected component.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateKind {
    #[default]
    GaussSeidel,
    Kleene,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LowerError {
    #[error("step budget of {budget} exhausted (last improvement {last_delta:e})")]
    BudgetExhausted { budget: u64, last_delta: f64 },
    #[error("iterates diverge in variable {var}")]
    Infeasible { var: usize },
}

/// `f(l)`.
pub fn kleene_step<T: Scalar>(f: &Polys<T>, l: &[T]) -> Vec<T> {
    f.evaluate(l)
}

/// One sweep in variable order, reading already-updated components.
pub fn gauss_seidel_step<T: Scalar>(f: &Polys<T>, l: &[T]) -> Vec<T> {
    let mut x = l.to_vec();
    for i in 0..x.len() {
        x[i] = f.eval_row(i, &x);
    }
    x
}

pub fn step<T: Scalar>(kind: UpdateKind, f: &Polys<T>, l: &[T]) -> Vec<T> {
    match kind {
        UpdateKind::GaussSeidel => gauss_seidel_step(f, l),
        UpdateKind::Kleene => kleene_step(f, l),
    }
}

fn dist_inf<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| {
        let d = if x > y { x.clone() - y.clone() } else { y.clone() - x.clone() };
        acc.max_of(d)
    })
}

/// The sequence `l_0 = 0, l_1, l_2, ...` of lower bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct IterState<T> {
    pub current: Vec<T>,
    pub rounds: u64,
    /// Max-norm of the last improvement; infinite before the first step.
    pub last_delta: f64,
}

impl<T: Scalar> IterState<T> {
    pub fn zero(dim: usize) -> Self {
        IterState {
            current: vec![T::zero(); dim],
            rounds: 0,
            last_delta: f64::INFINITY,
        }
    }

    /// Applies one step and returns the new max-norm delta.
    pub fn advance(&mut self, kind: UpdateKind, f: &Polys<T>) -> Result<f64, LowerError> {
        let next = step(kind, f, &self.current);
        if let Some(var) = next
            .iter()
            .position(|v| !(v.to_f64() <= DIVERGENCE_THRESHOLD))
        {
            return Err(LowerError::Infeasible { var });
        }
        self.last_delta = dist_inf(&next, &self.current).to_f64();
        self.current = next;
        self.rounds += 1;
        Ok(self.last_delta)
    }
}

/// Steps until the last improvement is at most `tol`, or `budget` steps of
/// this call are used up.
pub fn improve_until<T: Scalar>(
    f: &Polys<T>,
    state: &mut IterState<T>,
    kind: UpdateKind,
    tol: f64,
    budget: u64,
) -> Result<(), LowerError> {
    assert!(tol > 0.0 && budget > 0, "tolerance and budget must be positive");
    for _ in 0..budget {
        if state.advance(kind, f)? <= tol {
            return Ok(());
        }
    }
    Err(LowerError::BudgetExhausted {
        budget,
        last_delta: state.last_delta,
    })
}
