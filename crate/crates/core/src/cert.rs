//! Rational upper bounds: rounding float candidates up, exact inductivity and
//! k-induction checks, and the certificate file format.
//!
//! ```text
//! ppscert v1
//! system-sha256 <hex>
//! epsilon <num>/<den>
//! k <k_used>
//! <varname> <num>/<den>
//! ...
//! ```

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::pps::text::fingerprint;
use crate::pps::Polys;
use crate::rational::{ceil_bounded, format_ratio, from_f64_exact};
use crate::{PolySystem, Rational};

/// Dimension above which exact evaluation is spread over the rayon pool.
const PARALLEL_DIM: usize = 256;

/// Policy for turning binary64 candidates into rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundingGrain {
    pub denominator_bound: BigInt,
    /// Added to every entry before rounding up.
    pub headroom: Rational,
}

impl Default for RoundingGrain {
    fn default() -> Self {
        RoundingGrain {
            denominator_bound: BigInt::one() << 32,
            headroom: Rational::zero(),
        }
    }
}

impl RoundingGrain {
    pub fn with_headroom(&self, headroom: Rational) -> Self {
        RoundingGrain {
            denominator_bound: self.denominator_bound.clone(),
            headroom,
        }
    }
}

/// Headroom of the single retry in [`rationalize`].
pub fn retry_headroom() -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << 20)
}

/// Smallest rational `>= x + headroom` with bounded denominator.
pub fn round_up(x: f64, grain: &RoundingGrain) -> Rational {
    assert!(x.is_finite() && x >= 0.0, "candidate entries must be finite and non-negative");
    let exact = from_f64_exact(x).expect("finite") + &grain.headroom;
    ceil_bounded(&exact, &grain.denominator_bound)
}

pub fn to_rational(u: &[f64], grain: &RoundingGrain) -> Vec<Rational> {
    u.iter().map(|&x| round_up(x, grain)).collect()
}

fn evaluate_exact(f: &Polys<Rational>, x: &[Rational]) -> Vec<Rational> {
    if x.len() >= PARALLEL_DIM {
        (0..x.len()).into_par_iter().map(|i| f.eval_row(i, x)).collect()
    } else {
        f.evaluate(x)
    }
}

/// `f(u) <= u` in exact arithmetic.
pub fn check_inductive(sys: &PolySystem, u: &[Rational]) -> bool {
    sys.check_dim(u.len()).expect("dimension mismatch");
    let f = sys.view::<Rational>();
    evaluate_exact(&f, u).iter().zip(u).all(|(fu, ui)| fu <= ui)
}

/// Tests `f(w_k) <= u` for `w_1 = u`, `w_{j+1} = u ⊓ f(w_j)` and
/// `k = 1..=k_max`. Returns the first depth that passes, or `(false, k_max)`.
pub fn k_induction_check(sys: &PolySystem, u: &[Rational], k_max: u32) -> (bool, u32) {
    assert!(k_max >= 1, "k_max must be at least 1");
    sys.check_dim(u.len()).expect("dimension mismatch");
    let f = sys.view::<Rational>();
    let mut w = u.to_vec();
    for k in 1..=k_max {
        let fw = evaluate_exact(&f, &w);
        if fw.iter().zip(u).all(|(a, b)| a <= b) {
            return (true, k);
        }
        w = fw
            .into_iter()
            .zip(u)
            .map(|(a, b)| if &a < b { a } else { b.clone() })
            .collect();
    }
    (false, k_max)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertError {
    #[error("exact check failed after rounding and one retry with extra headroom")]
    ExactCheckFailed,
}

/// Outcome of [`rationalize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Rationalized {
    pub upper: Vec<Rational>,
    pub k_used: u32,
    pub used_headroom: bool,
}

/// Rounds up and checks with k-induction; retries once with headroom `2^-20`.
pub fn rationalize(
    sys: &PolySystem,
    u: &[f64],
    grain: &RoundingGrain,
    k_max: u32,
) -> Result<Rationalized, CertError> {
    let upper = to_rational(u, grain);
    if let (true, k_used) = k_induction_check(sys, &upper, k_max) {
        return Ok(Rationalized {
            upper,
            k_used,
            used_headroom: false,
        });
    }
    let grain = grain.with_headroom(&grain.headroom + retry_headroom());
    let upper = to_rational(u, &grain);
    match k_induction_check(sys, &upper, k_max) {
        (true, k_used) => Ok(Rationalized {
            upper,
            k_used,
            used_headroom: true,
        }),
        (false, _) => Err(CertError::ExactCheckFailed),
    }
}

/// [`rationalize`] followed by assembling a certificate for `sys`.
pub fn rationalize_and_verify(
    sys: &PolySystem,
    u: &[f64],
    grain: &RoundingGrain,
    k_max: u32,
    epsilon: &Rational,
) -> Result<Certificate, CertError> {
    let r = rationalize(sys, u, grain, k_max)?;
    let mut cert = Certificate::new(sys, epsilon.clone(), r.k_used, r.upper);
    cert.lower_witness = Some(u.to_vec());
    Ok(cert)
}

/// Where the bound of a variable came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Solved by optimistic value iteration in the given component of the
    /// cleaned system.
    Ovi { scc: usize },
    /// Single variable without a self-loop, solved by substitution.
    Trivial,
    /// Removed by cleaning; the bound is exactly 0.
    ZeroCleaned,
}

/// A rational upper bound bound to one system by its fingerprint.
///
/// Only the fields written to the file take part in equality; the lower
/// witness and provenance are informational.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub fingerprint: String,
    pub epsilon: Rational,
    pub k_used: u32,
    pub names: Vec<String>,
    pub upper: Vec<Rational>,
    pub lower_witness: Option<Vec<f64>>,
    pub provenance: Option<Vec<Provenance>>,
}

impl PartialEq for Certificate {
    fn eq(&self, other: &Self) -> bool {
        self.fingerprint == other.fingerprint
            && self.epsilon == other.epsilon
            && self.k_used == other.k_used
            && self.names == other.names
            && self.upper == other.upper
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct CertParseError {
    pub line: usize,
    pub message: String,
}

pub const HEADER: &str = "ppscert v1";

impl Certificate {
    pub fn new(sys: &PolySystem, epsilon: Rational, k_used: u32, upper: Vec<Rational>) -> Self {
        assert_eq!(upper.len(), sys.dim(), "dimension mismatch");
        Certificate {
            fingerprint: fingerprint(sys),
            epsilon,
            k_used,
            names: sys.names().to_vec(),
            upper,
            lower_witness: None,
            provenance: None,
        }
    }

    pub fn value(&self, name: &str) -> Option<&Rational> {
        self.names.iter().position(|n| n == name).map(|i| &self.upper[i])
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{HEADER}");
        let _ = writeln!(out, "system-sha256 {}", self.fingerprint);
        let _ = writeln!(out, "epsilon {}", format_ratio(&self.epsilon));
        let _ = writeln!(out, "k {}", self.k_used);
        for (name, value) in self.names.iter().zip(&self.upper) {
            let _ = writeln!(out, "{name} {}", format_ratio(value));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, CertParseError> {
        let err = |line: usize, message: &str| CertParseError {
            line,
            message: message.to_string(),
        };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut field = |key: &str| -> Result<(usize, String), CertParseError> {
            let (no, line) = lines.next().ok_or_else(|| err(0, "unexpected end of file"))?;
            let rest = line
                .strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .ok_or_else(|| err(no, &format!("expected `{key} ...`")))?;
            Ok((no, rest.to_string()))
        };
        let (_, version) = field("ppscert")?;
        if version != "v1" {
            return Err(err(1, "unsupported certificate version"));
        }
        let (_, fingerprint) = field("system-sha256")?;
        let (no, eps) = field("epsilon")?;
        let epsilon = parse_fraction(&eps).ok_or_else(|| err(no, "malformed rational"))?;
        let (no, k) = field("k")?;
        let k_used: u32 = k.parse().map_err(|_| err(no, "malformed depth"))?;
        let mut names = Vec::new();
        let mut upper = Vec::new();
        for (no, line) in lines {
            if line.is_empty() {
                continue;
            }
            let (name, value) = line
                .rsplit_once(' ')
                .ok_or_else(|| err(no, "expected `<name> <num>/<den>`"))?;
            names.push(name.to_string());
            upper.push(parse_fraction(value).ok_or_else(|| err(no, "malformed rational"))?);
        }
        Ok(Certificate {
            fingerprint,
            epsilon,
            k_used,
            names,
            upper,
            lower_witness: None,
            provenance: None,
        })
    }
}

fn parse_fraction(s: &str) -> Option<Rational> {
    let (n, d) = s.split_once('/')?;
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Rational::new(n, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pps::text::parse_pps;
    use crate::rational::{int, ratio};

    fn two_state() -> PolySystem {
        parse_pps(
            "<q,Z,q> = 1/4 <q,Z,q>^2 + 1/4 <q,Z,r> <r,Z,q> + 1/2\n\
             <q,Z,r> = 1/4 <q,Z,q> <q,Z,r> + 1/4 <q,Z,r> <r,Z,r> + 1/4\n\
             <r,Z,q> =\n\
             <r,Z,r> = 1\n",
        )
        .unwrap()
    }

    fn bound(n: i64) -> RoundingGrain {
        RoundingGrain {
            denominator_bound: BigInt::from(n),
            headroom: int(0),
        }
    }

    #[test]
    fn rounding_examples() {
        let grain = RoundingGrain::default();
        assert_eq!(to_rational(&[0.5, 0.0], &grain), vec![ratio(1, 2), int(0)]);
        assert_eq!(to_rational(&[0.6], &bound(10)), vec![ratio(3, 5)]);
        let up = to_rational(&[0.6], &grain)[0].clone();
        assert!(up >= from_f64_exact(0.6).unwrap());
        assert!(up.denom() <= &grain.denominator_bound);
    }

    #[test]
    fn inductivity_examples() {
        let u = vec![ratio(3, 5), ratio(1, 2), int(0), int(1)];
        assert!(check_inductive(&two_state(), &u));
        let sys = parse_pps("x = 0.5 x^2 + 0.5").unwrap();
        assert!(check_inductive(&sys, &[int(1)]));
        assert!(!check_inductive(&sys, &[ratio(9, 10)]));
        assert_eq!(sys.evaluate(&[ratio(9, 10)]).unwrap(), vec![ratio(181, 200)]);
    }

    #[test]
    fn k_induction_examples() {
        let sys = parse_pps("x = 0.5 y + 0.25\ny = 0.5 x + 0.25").unwrap();
        let u = vec![ratio(1, 2), ratio(3, 5)];
        assert_eq!(sys.evaluate(&u).unwrap(), vec![ratio(11, 20), ratio(1, 2)]);
        assert_eq!(k_induction_check(&sys, &u, 1), (false, 1));
        assert_eq!(k_induction_check(&sys, &u, 10), (true, 2));
        let plain = vec![ratio(3, 5), ratio(3, 5)];
        assert_eq!(k_induction_check(&sys, &plain, 10), (true, 1));
        let sing = parse_pps("x = 0.5 x^2 + 0.5").unwrap();
        assert_eq!(k_induction_check(&sing, &[ratio(9, 10)], 10), (false, 10));
    }

    #[test]
    fn rationalize_examples() {
        let sys = parse_pps("x = 0.5 y + 0.25\ny = 0.5 x + 0.1").unwrap();
        // f(3/5, 1/2) = (1/2, 2/5) <= (3/5, 1/2)
        let r = rationalize(&sys, &[0.6, 0.5], &bound(10), 10).unwrap();
        assert_eq!((r.upper, r.k_used), (vec![ratio(3, 5), ratio(1, 2)], 1));
        let cert =
            rationalize_and_verify(&sys, &[0.75, 0.5], &RoundingGrain::default(), 10, &ratio(1, 10))
                .unwrap();
        assert_eq!(cert.upper, vec![ratio(3, 4), ratio(1, 2)]);
        assert_eq!(cert.k_used, 1);
        // lfp of x = 0.5 x^2 + 0.5 is 1
        let sing = parse_pps("x = 0.5 x^2 + 0.5").unwrap();
        assert_eq!(
            rationalize(&sing, &[0.99], &RoundingGrain::default(), 10),
            Err(CertError::ExactCheckFailed)
        );
    }

    #[test]
    fn headroom_retry_rescues_rounding_failures() {
        // f(x) = x/2 + 1/3 has lfp 2/3, which no dyadic value reaches
        let sys = parse_pps("x = 0.5 x + 1/3").unwrap();
        let below = 2.0f64 / 3.0;
        assert!(from_f64_exact(below).unwrap() < ratio(2, 3));
        let r = rationalize(&sys, &[below], &RoundingGrain::default(), 1).unwrap();
        assert!(r.upper[0] >= ratio(2, 3));
        let r = rationalize(&sys, &[below], &bound(1 << 60), 1).unwrap();
        assert!(r.used_headroom);
    }

    #[test]
    fn file_round_trip() {
        let sys = two_state();
        let mut cert = Certificate::new(&sys, ratio(1, 1000), 1, vec![ratio(3, 5), ratio(1, 2), int(0), int(1)]);
        let text = cert.to_text();
        assert!(text.starts_with("ppscert v1\nsystem-sha256 "));
        assert!(text.ends_with("epsilon 1/1000\nk 1\n<q,Z,q> 3/5\n<q,Z,r> 1/2\n<r,Z,q> 0/1\n<r,Z,r> 1/1\n"));
        cert.provenance = Some(vec![Provenance::Trivial; 4]);
        assert_eq!(Certificate::parse(&text).unwrap(), cert);
        assert_eq!(cert.value("<q,Z,r>"), Some(&ratio(1, 2)));
        assert!(Certificate::parse("ppscert v2\n").is_err());
        assert!(Certificate::parse(&text.replace("3/5", "3/0")).is_err());
        assert!(Certificate::parse(&text.replace("k 1", "k one")).is_err());
    }
}
