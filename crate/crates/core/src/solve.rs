//! Whole-system solving: clean, decompose, solve components bottom-up with
//! the bounds of lower components substituted, then verify the assembled
//! bound exactly.

use std::fmt;
use std::time::{Duration, Instant};

use num_traits::Zero;
use rayon::prelude::*;

use crate::cert::{k_induction_check, rationalize, Certificate, Provenance};
use crate::lower::LowerError;
use crate::ovi::{OviError, OviParams, OviRun};
use crate::pps::VarId;
use crate::{PolySystem, Rational, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct SccStats {
    /// Index in the component order of the cleaned system.
    pub index: usize,
    pub size: usize,
    pub trivial: bool,
    /// Guesses tried, G.
    pub guesses: usize,
    pub rounds: usize,
    pub iterations: u64,
    pub k_used: u32,
    pub retried: bool,
    pub time: Duration,
    pub exact_time: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    InvalidParams,
    GuessBudgetExhausted,
    Infeasible,
    ExactCheckFailed,
}

impl fmt::Display for FailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailureKind::InvalidParams => "InvalidParams",
            FailureKind::GuessBudgetExhausted => "GuessBudgetExhausted",
            FailureKind::Infeasible => "Infeasible",
            FailureKind::ExactCheckFailed => "ExactCheckFailed",
        })
    }
}

/// Why no certificate was produced, with the statistics gathered so far.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveError {
    pub kind: FailureKind,
    /// Variables of the failing component, empty for whole-system failures.
    pub scc: Vec<String>,
    pub detail: String,
    pub stats: Vec<SccStats>,
    pub time: Duration,
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.detail)?;
        if !self.scc.is_empty() {
            let shown: Vec<&str> = self.scc.iter().take(5).map(String::as_str).collect();
            write!(f, " (component {{{}", shown.join(", "))?;
            if self.scc.len() > 5 {
                write!(f, ", ... {} more", self.scc.len() - 5)?;
            }
            write!(f, "}})")?;
        }
        Ok(())
    }
}

impl std::error::Error for SolveError {}

#[derive(Debug, Clone)]
pub struct Solved {
    pub certificate: Certificate,
    pub stats: Vec<SccStats>,
    pub zero_vars: usize,
    pub time: Duration,
    /// Time spent in exact rational arithmetic.
    pub exact_time: Duration,
}

impl Solved {
    pub fn total_guesses(&self) -> usize {
        self.stats.iter().map(|s| s.guesses).sum()
    }

    /// Largest gap between the certified upper bound and the lower witness.
    pub fn gap(&self) -> f64 {
        let lower = self.certificate.lower_witness.as_deref().unwrap_or(&[]);
        self.certificate
            .upper
            .iter()
            .zip(lower)
            .map(|(u, l)| u.to_f64() - l)
            .fold(0.0, f64::max)
    }
}

struct SccResult {
    upper: Vec<Rational>,
    lower: Vec<f64>,
    stats: SccStats,
}

struct SccFailure {
    kind: FailureKind,
    detail: String,
    stats: SccStats,
}

fn solve_trivial(
    sys: &PolySystem,
    index: usize,
    v: VarId,
    upper: &[Option<Rational>],
    lower: &[f64],
    params: &OviParams,
) -> SccResult {
    let start = Instant::now();
    let mut exact = Rational::zero();
    let mut float = 0.0;
    for m in sys.equation(v) {
        let mut term = m.coeff().clone();
        let mut fterm = m.coeff().to_f64();
        for &(w, e) in m.powers() {
            term *= upper[w].as_ref().expect("dependencies are solved first").powu(e);
            fterm *= lower[w].powu(e);
        }
        exact += term;
        float += fterm;
    }
    let value = crate::rational::ceil_bounded(&exact, &params.grain.denominator_bound);
    let time = start.elapsed();
    SccResult {
        upper: vec![value],
        lower: vec![float],
        stats: SccStats {
            index,
            size: 1,
            trivial: true,
            guesses: 0,
            rounds: 0,
            iterations: 0,
            k_used: 1,
            retried: false,
            time,
            exact_time: time,
        },
    }
}

fn solve_nontrivial(
    sys: &PolySystem,
    index: usize,
    vars: &[VarId],
    upper: &[Option<Rational>],
    params: &OviParams,
) -> Result<SccResult, SccFailure> {
    let start = Instant::now();
    let sub = sys.restrict(vars, |w| upper[w].clone().expect("dependencies are solved first"));
    let mut run = OviRun::new(&sub, params);
    let mut stats = SccStats {
        index,
        size: vars.len(),
        trivial: false,
        guesses: 0,
        rounds: 0,
        iterations: 0,
        k_used: 0,
        retried: false,
        time: Duration::ZERO,
        exact_time: Duration::ZERO,
    };
    for attempt in 0..2 {
        let outcome = run.next();
        stats.guesses = run.guesses();
        stats.iterations = run.iterations();
        let sol = match outcome {
            Ok(sol) => sol,
            Err(e) => {
                stats.time = start.elapsed();
                let kind = match e {
                    OviError::GuessBudgetExhausted { .. } => FailureKind::GuessBudgetExhausted,
                    OviError::Lower(LowerError::Infeasible { .. })
                    | OviError::Lower(LowerError::BudgetExhausted { .. }) => FailureKind::Infeasible,
                };
                return Err(SccFailure {
                    kind,
                    detail: e.to_string(),
                    stats,
                });
            }
        };
        stats.rounds = sol.rounds;
        let exact_start = Instant::now();
        let checked = rationalize(&sub, &sol.upper, &params.grain, params.k_max);
        stats.exact_time += exact_start.elapsed();
        match checked {
            Ok(r) => {
                stats.k_used = r.k_used;
                stats.time = start.elapsed();
                return Ok(SccResult {
                    upper: r.upper,
                    lower: sol.lower,
                    stats,
                });
            }
            Err(_) if attempt == 0 => {
                stats.retried = true;
                run.tighten();
            }
            Err(e) => {
                stats.time = start.elapsed();
                return Err(SccFailure {
                    kind: FailureKind::ExactCheckFailed,
                    detail: e.to_string(),
                    stats,
                });
            }
        }
    }
    unreachable!("the loop returns on its second attempt")
}

/// Computes a verified rational inductive upper bound on the lfp of `sys`.
pub fn solve(sys: &PolySystem, params: &OviParams) -> Result<Solved, SolveError> {
    let start = Instant::now();
    let fail = |kind, scc: Vec<String>, detail: String, stats: Vec<SccStats>| SolveError {
        kind,
        scc,
        detail,
        stats,
        time: start.elapsed(),
    };
    params
        .validate()
        .map_err(|e| fail(FailureKind::InvalidParams, vec![], e.to_string(), vec![]))?;

    let n = sys.dim();
    let cleaned = sys.clean();
    let cs = &cleaned.system;
    let graph = cs.dep_graph();
    let mut upper: Vec<Option<Rational>> = vec![None; cs.dim()];
    let mut lower = vec![0.0; cs.dim()];
    let mut provenance_clean = vec![Provenance::Trivial; cs.dim()];
    let mut stats: Vec<SccStats> = Vec::with_capacity(graph.sccs().len());

    let pool = (params.jobs > 1)
        .then(|| rayon::ThreadPoolBuilder::new().num_threads(params.jobs).build().ok())
        .flatten();

    for level in graph.levels() {
        let work = |&k: &usize| -> Result<SccResult, SccFailure> {
            let vars = &graph.sccs()[k];
            if graph.is_trivial(k) {
                Ok(solve_trivial(cs, k, vars[0], &upper, &lower, params))
            } else {
                solve_nontrivial(cs, k, vars, &upper, params)
            }
        };
        let results: Vec<Result<SccResult, SccFailure>> = match &pool {
            Some(pool) if level.len() > 1 => pool.install(|| level.par_iter().map(work).collect()),
            _ => level.iter().map(work).collect(),
        };
        let mut failure = None;
        for (&k, result) in level.iter().zip(results) {
            match result {
                Ok(r) => {
                    for (pos, &v) in graph.sccs()[k].iter().enumerate() {
                        upper[v] = Some(r.upper[pos].clone());
                        lower[v] = r.lower[pos];
                        if !r.stats.trivial {
                            provenance_clean[v] = Provenance::Ovi { scc: k };
                        }
                    }
                    stats.push(r.stats);
                }
                Err(f) => {
                    stats.push(f.stats);
                    failure.get_or_insert((k, f.kind, f.detail));
                }
            }
        }
        if let Some((k, kind, detail)) = failure {
            let names = graph.sccs()[k].iter().map(|&v| cs.name(v).to_string()).collect();
            return Err(fail(kind, names, detail, stats));
        }
    }

    let mut full_upper = vec![Rational::zero(); n];
    let mut full_lower = vec![0.0; n];
    let mut provenance = vec![Provenance::ZeroCleaned; n];
    for (local, &orig) in cleaned.kept.iter().enumerate() {
        full_upper[orig] = upper[local].take().expect("every component solved");
        full_lower[orig] = lower[local];
        provenance[orig] = provenance_clean[local];
    }

    let exact_start = Instant::now();
    let (ok, k_used) = k_induction_check(sys, &full_upper, params.k_max);
    let final_check = exact_start.elapsed();
    if !ok {
        return Err(fail(
            FailureKind::ExactCheckFailed,
            vec![],
            "assembled bound fails the whole-system check".into(),
            stats,
        ));
    }
    let mut certificate = Certificate::new(sys, params.epsilon.clone(), k_used, full_upper);
    certificate.lower_witness = Some(full_lower);
    certificate.provenance = Some(provenance);
    let exact_time = stats.iter().map(|s| s.exact_time).sum::<Duration>() + final_check;
    Ok(Solved {
        certificate,
        stats,
        zero_vars: cleaned.zero_set.len(),
        time: start.elapsed(),
        exact_time,
    })
}
