//! Run reports. Times are in milliseconds; `t_q` is the percentage of the
//! solve time spent in exact rational arithmetic.

use std::fmt::Write as _;
use std::time::Duration;

use ppscert::rational::{decimal_digits, format_compact};
use ppscert::solve::{FailureKind, SccStats};
use ppscert::{Certificate, Scalar, SolveError, Solved};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Certified,
    GuessBudgetExhausted,
    Infeasible,
    ExactCheckFailed,
}

impl Outcome {
    pub fn from_failure(kind: FailureKind) -> Option<Self> {
        match kind {
            FailureKind::GuessBudgetExhausted => Some(Outcome::GuessBudgetExhausted),
            FailureKind::Infeasible => Some(Outcome::Infeasible),
            FailureKind::ExactCheckFailed => Some(Outcome::ExactCheckFailed),
            FailureKind::InvalidParams => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SccReport {
    pub index: usize,
    pub size: usize,
    pub trivial: bool,
    pub guesses: usize,
    pub rounds: usize,
    pub iterations: u64,
    pub k_used: u32,
    pub retried: bool,
    pub time_ms: f64,
    pub exact_time_ms: f64,
}

impl From<&SccStats> for SccReport {
    fn from(s: &SccStats) -> Self {
        SccReport {
            index: s.index,
            size: s.size,
            trivial: s.trivial,
            guesses: s.guesses,
            rounds: s.rounds,
            iterations: s.iterations,
            k_used: s.k_used,
            retried: s.retried,
            time_ms: ms(s.time),
            exact_time_ms: ms(s.exact_time),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Totals {
    pub components: usize,
    /// Total number of guesses, G.
    pub guesses: usize,
    pub rounds: usize,
    pub iterations: u64,
    pub time_ms: f64,
    pub exact_time_ms: f64,
    pub t_q: f64,
}

/// Result of solving one system.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub outcome: Outcome,
    pub detail: Option<String>,
    pub failing_component: Vec<String>,
    pub certificate: Option<String>,
    pub k_used: Option<u32>,
    /// Average number of decimal digits per certificate entry, D.
    pub digits_per_rational: Option<f64>,
    pub zero_vars: usize,
    pub max_gap: Option<f64>,
    pub sccs: Vec<SccReport>,
    pub totals: Totals,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn totals(stats: &[SccStats], time: Duration, exact: Duration) -> Totals {
    let t = ms(time);
    let e = ms(exact);
    Totals {
        components: stats.len(),
        guesses: stats.iter().map(|s| s.guesses).sum(),
        rounds: stats.iter().map(|s| s.rounds).sum(),
        iterations: stats.iter().map(|s| s.iterations).sum(),
        time_ms: t,
        exact_time_ms: e,
        t_q: if t > 0.0 { 100.0 * e / t } else { 0.0 },
    }
}

pub fn digits_per_rational(cert: &Certificate) -> f64 {
    if cert.upper.is_empty() {
        return 0.0;
    }
    let total: usize = cert.upper.iter().map(decimal_digits).sum();
    total as f64 / cert.upper.len() as f64
}

impl SolveReport {
    pub fn certified(solved: &Solved, path: Option<String>) -> Self {
        SolveReport {
            outcome: Outcome::Certified,
            detail: None,
            failing_component: Vec::new(),
            certificate: path,
            k_used: Some(solved.certificate.k_used),
            digits_per_rational: Some(digits_per_rational(&solved.certificate)),
            zero_vars: solved.zero_vars,
            max_gap: Some(solved.gap()),
            sccs: solved.stats.iter().map(SccReport::from).collect(),
            totals: totals(&solved.stats, solved.time, solved.exact_time),
        }
    }

    pub fn failed(outcome: Outcome, err: &SolveError) -> Self {
        let exact = err.stats.iter().map(|s| s.exact_time).sum();
        SolveReport {
            outcome,
            detail: Some(err.detail.clone()),
            failing_component: err.scc.clone(),
            certificate: None,
            k_used: None,
            digits_per_rational: None,
            zero_vars: 0,
            max_gap: None,
            sccs: err.stats.iter().map(SccReport::from).collect(),
            totals: totals(&err.stats, err.time, exact),
        }
    }
}

/// Bound on one result of an automaton or program.
#[derive(Debug, Clone, Serialize)]
pub struct OutcomeReport {
    /// Final state for automata, returned value for programs.
    pub label: String,
    pub lower: String,
    pub upper: String,
    pub lower_f64: f64,
    pub upper_f64: f64,
}

impl OutcomeReport {
    pub fn new(label: String, lower: &ppscert::Rational, upper: &ppscert::Rational) -> Self {
        OutcomeReport {
            label,
            lower: format_compact(lower),
            upper: format_compact(upper),
            lower_f64: lower.to_f64(),
            upper_f64: upper.to_f64(),
        }
    }
}

/// Upper bound on an expected reward `<E,q0,Z0,r>`.
#[derive(Debug, Clone, Serialize)]
pub struct RewardBound {
    pub variable: String,
    pub upper: String,
    pub upper_f64: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RewardReport {
    #[serde(flatten)]
    pub solve: SolveReport,
    pub bounds: Vec<RewardBound>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub input: String,
    pub format: String,
    pub variables: usize,
    pub terms: usize,
    pub epsilon: String,
    pub strategy: String,
    pub update: String,
    #[serde(flatten)]
    pub solve: SolveReport,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub outcomes: Vec<OutcomeReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reward: Option<RewardReport>,
}

impl RunReport {
    /// Exit code: 0 iff every requested certificate was produced.
    pub fn exit_code(&self) -> i32 {
        let reward_ok = self.reward.as_ref().is_none_or(|r| r.solve.outcome == Outcome::Certified);
        if self.solve.outcome == Outcome::Certified && reward_ok {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "input       {} ({})", self.input, self.format);
        let _ = writeln!(out, "system      {} variables, {} terms", self.variables, self.terms);
        let _ = writeln!(
            out,
            "parameters  epsilon {}, strategy {}, update {}",
            self.epsilon, self.strategy, self.update
        );
        write_solve(&mut out, "", &self.solve);
        if !self.outcomes.is_empty() {
            let _ = writeln!(out, "outcomes");
            for o in &self.outcomes {
                let _ = writeln!(out, "  {:<12} [{:.6}, {:.6}]", o.label, o.lower_f64, o.upper_f64);
            }
        }
        if let Some(r) = &self.reward {
            let _ = writeln!(out, "reward");
            write_solve(&mut out, "  ", &r.solve);
            for b in &r.bounds {
                let _ = writeln!(out, "  {:<20} <= {:.6}", b.variable, b.upper_f64);
            }
        }
        out
    }
}

fn write_solve(out: &mut String, indent: &str, s: &SolveReport) {
    let _ = writeln!(out, "{indent}outcome     {:?}", s.outcome);
    if let Some(d) = &s.detail {
        let _ = writeln!(out, "{indent}detail      {d}");
    }
    if !s.failing_component.is_empty() {
        let shown: Vec<&str> = s.failing_component.iter().take(8).map(String::as_str).collect();
        let _ = writeln!(out, "{indent}component   {}", shown.join(" "));
    }
    if let Some(path) = &s.certificate {
        let _ = writeln!(out, "{indent}certificate {path}");
    }
    if let (Some(k), Some(d)) = (s.k_used, s.digits_per_rational) {
        let _ = writeln!(out, "{indent}k {k}, D {d:.1}, zero variables {}", s.zero_vars);
    }
    let t = &s.totals;
    let _ = writeln!(
        out,
        "{indent}totals      {} components, G {}, {} iterations, {:.1} ms, t_Q {:.1}%",
        t.components, t.guesses, t.iterations, t.time_ms, t.t_q
    );
}
