//! Sparse positive polynomial systems `x = f(x)`.

mod clean;
mod graph;
pub mod text;

use std::collections::HashMap;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::{Rational, Scalar, SparseMatrix};

pub use clean::Cleaned;
pub use graph::DepGraph;

/// Index of a variable in declaration order.
pub type VarId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PpsError {
    #[error("dimension mismatch: system has {expected} variables, point has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("variable `{0}` is defined more than once")]
    DuplicateVariable(String),
    #[error("variable `{0}` is used but never defined")]
    UndefinedVariable(String),
    #[error("`{0}` is not a valid variable name")]
    InvalidName(String),
    #[error("equation {equation} references variable id {var} out of range")]
    VarOutOfRange { equation: usize, var: usize },
    #[error("negative coefficient in the equation of `{0}`")]
    NegativeCoefficient(String),
    #[error("monomial of degree {degree} in the equation of `{var}` exceeds the cap {cap}")]
    DegreeCap { var: String, degree: u32, cap: u32 },
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
}

/// A term `coefficient * prod x_j^e_j` with a strictly positive coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    coeff: Rational,
    powers: Vec<(VarId, u32)>,
}

impl Monomial {
    /// Builds a monomial, merging repeated variables. Returns `None` for a
    /// zero coefficient, since zero terms are never stored.
    pub fn new(coeff: Rational, powers: impl IntoIterator<Item = (VarId, u32)>) -> Option<Self> {
        if coeff.is_zero() {
            return None;
        }
        let mut powers: Vec<(VarId, u32)> = powers.into_iter().filter(|(_, e)| *e > 0).collect();
        powers.sort_unstable();
        let mut merged: Vec<(VarId, u32)> = Vec::with_capacity(powers.len());
        for (v, e) in powers {
            match merged.last_mut() {
                Some((last, acc)) if *last == v => *acc += e,
                _ => merged.push((v, e)),
            }
        }
        Some(Monomial {
            coeff,
            powers: merged,
        })
    }

    pub fn constant(coeff: Rational) -> Option<Self> {
        Self::new(coeff, [])
    }

    pub fn coeff(&self) -> &Rational {
        &self.coeff
    }

    pub fn powers(&self) -> &[(VarId, u32)] {
        &self.powers
    }

    pub fn degree(&self) -> u32 {
        self.powers.iter().map(|(_, e)| e).sum()
    }

    pub fn is_constant(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn mentions(&self, var: VarId) -> bool {
        self.powers.iter().any(|(v, _)| *v == var)
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.powers.iter().map(|(v, _)| *v)
    }
}

/// An n-dimensional positive polynomial system with one equation per
/// variable, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolySystem {
    names: Vec<String>,
    equations: Vec<Vec<Monomial>>,
    index: HashMap<String, VarId>,
}

pub(crate) fn is_valid_name(name: &str) -> bool {
    if let Some(inner) = name.strip_prefix('<').and_then(|s| s.strip_suffix('>')) {
        return !inner.is_empty()
            && inner
                .chars()
                .all(|c| !c.is_whitespace() && c != '<' && c != '>' && c != '#');
    }
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '\'')
}

impl PolySystem {
    /// Validates and normalizes a system: monomials with identical powers are
    /// merged and each polynomial is sorted canonically.
    pub fn new(names: Vec<String>, equations: Vec<Vec<Monomial>>) -> Result<Self, PpsError> {
        if names.len() != equations.len() {
            return Err(PpsError::DimensionMismatch {
                expected: names.len(),
                got: equations.len(),
            });
        }
        let n = names.len();
        let mut index = HashMap::with_capacity(n);
        for (i, name) in names.iter().enumerate() {
            if !is_valid_name(name) {
                return Err(PpsError::InvalidName(name.clone()));
            }
            if index.insert(name.clone(), i).is_some() {
                return Err(PpsError::DuplicateVariable(name.clone()));
            }
        }
        let mut normalized = Vec::with_capacity(n);
        for (i, poly) in equations.into_iter().enumerate() {
            let mut merged: HashMap<Vec<(VarId, u32)>, Rational> = HashMap::new();
            for m in poly {
                if let Some((var, _)) = m.powers.iter().find(|(v, _)| *v >= n) {
                    return Err(PpsError::VarOutOfRange {
                        equation: i,
                        var: *var,
                    });
                }
                if m.coeff.is_negative() {
                    return Err(PpsError::NegativeCoefficient(names[i].clone()));
                }
                *merged.entry(m.powers).or_insert_with(Rational::zero) += m.coeff;
            }
            let mut poly: Vec<Monomial> = merged
                .into_iter()
                .filter_map(|(powers, coeff)| Monomial::new(coeff, powers))
                .collect();
            poly.sort_by(|a, b| a.powers.cmp(&b.powers));
            normalized.push(poly);
        }
        Ok(PolySystem {
            names,
            equations: normalized,
            index,
        })
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, var: VarId) -> &str {
        &self.names[var]
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied()
    }

    pub fn equation(&self, var: VarId) -> &[Monomial] {
        &self.equations[var]
    }

    pub fn equations(&self) -> &[Vec<Monomial>] {
        &self.equations
    }

    pub fn num_terms(&self) -> usize {
        self.equations.iter().map(Vec::len).sum()
    }

    pub fn max_degree(&self) -> u32 {
        self.equations
            .iter()
            .flatten()
            .map(Monomial::degree)
            .max()
            .unwrap_or(0)
    }

    /// Rejects systems containing a monomial of total degree above `cap`.
    pub fn check_degree_cap(&self, cap: u32) -> Result<(), PpsError> {
        for (i, poly) in self.equations.iter().enumerate() {
            if let Some(m) = poly.iter().find(|m| m.degree() > cap) {
                return Err(PpsError::DegreeCap {
                    var: self.names[i].clone(),
                    degree: m.degree(),
                    cap,
                });
            }
        }
        Ok(())
    }

    /// Typed view with coefficients converted once to `T`.
    pub fn view<T: Scalar>(&self) -> Polys<T> {
        Polys {
            equations: self
                .equations
                .iter()
                .map(|poly| {
                    poly.iter()
                        .map(|m| Term {
                            coeff: T::from_rational(&m.coeff),
                            powers: m.powers.iter().map(|&(v, e)| (v as u32, e)).collect(),
                        })
                        .collect()
                })
                .collect(),
        }
    }

    /// `f(point)`, term by term. Exact when `T` is [`Rational`].
    pub fn evaluate<T: Scalar>(&self, point: &[T]) -> Result<Vec<T>, PpsError> {
        self.check_dim(point.len())?;
        Ok(self.view::<T>().evaluate(point))
    }

    /// Jacobi matrix `f'(point)`.
    pub fn jacobian_at<T: Scalar>(&self, point: &[T]) -> Result<SparseMatrix<T>, PpsError> {
        self.check_dim(point.len())?;
        Ok(self.view::<T>().jacobian(point))
    }

    pub fn dep_graph(&self) -> DepGraph {
        DepGraph::build(self)
    }

    pub fn clean(&self) -> Cleaned {
        clean::clean(self)
    }

    pub(crate) fn check_dim(&self, got: usize) -> Result<(), PpsError> {
        if got != self.dim() {
            return Err(PpsError::DimensionMismatch {
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }

    /// Subsystem over `keep` (in the given order) where every other variable
    /// is replaced by the constant `fixed(var)`.
    ///
    /// Panics if a referenced variable outside `keep` has no fixed value.
    pub fn restrict(&self, keep: &[VarId], fixed: impl Fn(VarId) -> Rational) -> PolySystem {
        let mut local = HashMap::with_capacity(keep.len());
        for (pos, &v) in keep.iter().enumerate() {
            local.insert(v, pos);
        }
        let equations = keep
            .iter()
            .map(|&v| {
                self.equations[v]
                    .iter()
                    .filter_map(|m| {
                        let mut coeff = m.coeff.clone();
                        let mut powers = Vec::with_capacity(m.powers.len());
                        for &(var, e) in &m.powers {
                            match local.get(&var) {
                                Some(&pos) => powers.push((pos, e)),
                                None => coeff *= fixed(var).powu(e),
                            }
                        }
                        Monomial::new(coeff, powers)
                    })
                    .collect()
            })
            .collect();
        let names = keep.iter().map(|&v| self.names[v].clone()).collect();
        PolySystem::new(names, equations).expect("restriction of a valid system is valid")
    }

    /// The all-ones vector, handy for sub-stochastic checks.
    pub fn ones<T: Scalar>(&self) -> Vec<T> {
        vec![T::one(); self.dim()]
    }
}

struct Term<T> {
    coeff: T,
    powers: Box<[(u32, u32)]>,
}

/// Evaluation view of a [`PolySystem`] over a fixed scalar type.
pub struct Polys<T> {
    equations: Vec<Vec<Term<T>>>,
}

impl<T: Scalar> Polys<T> {
    pub fn dim(&self) -> usize {
        self.equations.len()
    }

    /// `f_i(x)`.
    pub fn eval_row(&self, i: usize, x: &[T]) -> T {
        self.equations[i].iter().fold(T::zero(), |acc, term| {
            let value = term
                .powers
                .iter()
                .fold(term.coeff.clone(), |p, &(v, e)| p * pow(&x[v as usize], e));
            acc + value
        })
    }

    pub fn evaluate(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.dim(), "dimension mismatch");
        (0..self.dim()).map(|i| self.eval_row(i, x)).collect()
    }

    pub fn jacobian(&self, x: &[T]) -> SparseMatrix<T> {
        assert_eq!(x.len(), self.dim(), "dimension mismatch");
        let rows = self
            .equations
            .iter()
            .map(|poly| {
                let mut row = Vec::new();
                for term in poly {
                    for (k, &(var, exp)) in term.powers.iter().enumerate() {
                        let mut d = term.coeff.clone() * T::from_u32(exp);
                        if exp > 1 {
                            d = d * pow(&x[var as usize], exp - 1);
                        }
                        for (k2, &(v2, e2)) in term.powers.iter().enumerate() {
                            if k2 != k {
                                d = d * pow(&x[v2 as usize], e2);
                            }
                        }
                        row.push((var as usize, d));
                    }
                }
                row
            })
            .collect();
        SparseMatrix::from_rows(rows)
    }

    /// `f(x) <= x` componentwise.
    pub fn is_inductive(&self, x: &[T]) -> bool {
        (0..self.dim()).all(|i| self.eval_row(i, x) <= x[i])
    }
}

#[inline]
fn pow<T: Scalar>(x: &T, e: u32) -> T {
    if e == 1 {
        x.clone()
    } else {
        x.powu(e)
    }
}

/// Convenience constructor used throughout the tests: the polynomial
/// `sum c * prod x^e` from `(coefficient, [(var, exp)])` pairs.
pub fn poly(terms: impl IntoIterator<Item = (Rational, Vec<(VarId, u32)>)>) -> Vec<Monomial> {
    terms
        .into_iter()
        .filter_map(|(c, p)| Monomial::new(c, p))
        .collect()
}
