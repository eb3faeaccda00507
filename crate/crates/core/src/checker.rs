//! Trusted certificate verifier.
//!
//! Shares nothing with the solver except system evaluation: it parses the
//! certificate text itself, recomputes the fingerprint and replays the
//! k-fold check at the recorded depth in exact arithmetic. No cleaning and
//! no decomposition.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::pps::text::fingerprint;
use crate::{Certificate, PolySystem, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InvalidReason {
    Malformed(String),
    Fingerprint { expected: String, found: String },
    /// Variable list differs from the system's declaration order.
    Variables(String),
    NegativeEntry { var: String },
    /// `f(w_k)` exceeds `u` at this variable.
    Inductivity { var: String, index: usize },
}

impl fmt::Display for InvalidReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InvalidReason::Malformed(m) => write!(f, "malformed certificate: {m}"),
            InvalidReason::Fingerprint { expected, found } => {
                write!(f, "fingerprint mismatch: system is {expected}, certificate names {found}")
            }
            InvalidReason::Variables(m) => write!(f, "variable mismatch: {m}"),
            InvalidReason::NegativeEntry { var } => write!(f, "negative bound for `{var}`"),
            InvalidReason::Inductivity { var, .. } => write!(f, "inductivity fails at `{var}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Invalid(InvalidReason),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Valid => write!(f, "valid"),
            Verdict::Invalid(reason) => write!(f, "invalid: {reason}"),
        }
    }
}

struct Parsed {
    fingerprint: String,
    k: u32,
    entries: Vec<(String, Rational)>,
}

fn parse_ratio(s: &str) -> Option<Rational> {
    let (n, d) = s.split_once('/')?;
    let digits = |t: &str| !t.is_empty() && t.trim_start_matches('-').bytes().all(|b| b.is_ascii_digit());
    if !digits(n) || !digits(d) {
        return None;
    }
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    (!d.is_zero()).then(|| Rational::new(n, d))
}

fn parse(text: &str) -> Result<Parsed, String> {
    let mut lines = text.lines();
    let mut next = |what: &str| lines.next().ok_or_else(|| format!("missing {what} line"));
    if next("header")? != "ppscert v1" {
        return Err("first line must be `ppscert v1`".into());
    }
    let fingerprint = next("fingerprint")?
        .strip_prefix("system-sha256 ")
        .ok_or("second line must be `system-sha256 <hex>`")?
        .to_string();
    let eps = next("epsilon")?
        .strip_prefix("epsilon ")
        .ok_or("third line must be `epsilon <num>/<den>`")?;
    parse_ratio(eps).ok_or("malformed epsilon")?;
    let k: u32 = next("depth")?
        .strip_prefix("k ")
        .and_then(|k| k.parse().ok())
        .ok_or("fourth line must be `k <depth>`")?;
    if k == 0 {
        return Err("depth must be at least 1".into());
    }
    let mut entries = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let (name, value) = line
            .rsplit_once(' ')
            .ok_or_else(|| format!("line {}: expected `<name> <num>/<den>`", i + 5))?;
        let value = parse_ratio(value).ok_or_else(|| format!("line {}: malformed rational `{value}`", i + 5))?;
        entries.push((name.to_string(), value));
    }
    Ok(Parsed {
        fingerprint,
        k,
        entries,
    })
}

fn check(sys: &PolySystem, parsed: Parsed) -> Verdict {
    let invalid = |r| Verdict::Invalid(r);
    let expected = fingerprint(sys);
    if parsed.fingerprint != expected {
        return invalid(InvalidReason::Fingerprint {
            expected,
            found: parsed.fingerprint,
        });
    }
    if parsed.entries.len() != sys.dim() {
        return invalid(InvalidReason::Variables(format!(
            "system has {} variables, certificate has {}",
            sys.dim(),
            parsed.entries.len()
        )));
    }
    let mut u = Vec::with_capacity(sys.dim());
    for (i, (name, value)) in parsed.entries.into_iter().enumerate() {
        if name != sys.name(i) {
            return invalid(InvalidReason::Variables(format!(
                "entry {} is `{name}`, expected `{}`",
                i + 1,
                sys.name(i)
            )));
        }
        if value.is_negative() {
            return invalid(InvalidReason::NegativeEntry { var: name });
        }
        u.push(value);
    }
    // w_1 = u, w_{j+1} = min(u, f(w_j)); accept iff f(w_k) <= u
    let mut w = u.clone();
    for _ in 1..parsed.k {
        let fw = sys.evaluate(&w).expect("dimension checked");
        for ((wi, fi), ui) in w.iter_mut().zip(fw).zip(&u) {
            *wi = if &fi < ui { fi } else { ui.clone() };
        }
    }
    let fw = sys.evaluate(&w).expect("dimension checked");
    match fw.iter().zip(&u).position(|(a, b)| a > b) {
        None => Verdict::Valid,
        Some(index) => invalid(InvalidReason::Inductivity {
            var: sys.name(index).to_string(),
            index,
        }),
    }
}

/// Verifies certificate text against `sys`.
pub fn verify_certificate_text(sys: &PolySystem, text: &str) -> Verdict {
    match parse(text) {
        Ok(parsed) => check(sys, parsed),
        Err(m) => Verdict::Invalid(InvalidReason::Malformed(m)),
    }
}

/// Verifies an in-memory certificate through its file form.
pub fn verify_certificate(sys: &PolySystem, cert: &Certificate) -> Verdict {
    verify_certificate_text(sys, &cert.to_text())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pps::text::parse_pps;

    const TWO_STATE: &str = "<q,Z,q> = 1/4 <q,Z,q>^2 + 1/4 <q,Z,r> <r,Z,q> + 1/2\n\
                            <q,Z,r> = 1/4 <q,Z,q> <q,Z,r> + 1/4 <q,Z,r> <r,Z,r> + 1/4\n\
                            <r,Z,q> =\n\
                            <r,Z,r> = 1\n";

    fn hand_certificate(sys: &PolySystem) -> String {
        format!(
            "ppscert v1\nsystem-sha256 {}\nepsilon 1/10\nk 1\n<q,Z,q> 3/5\n<q,Z,r> 1/2\n<r,Z,q> 0/1\n<r,Z,r> 1/1\n",
            fingerprint(sys)
        )
    }

    #[test]
    fn hand_certificate_is_valid() {
        let sys = parse_pps(TWO_STATE).unwrap();
        let text = hand_certificate(&sys);
        assert_eq!(verify_certificate_text(&sys, &text), Verdict::Valid);
        assert_eq!(verify_certificate_text(&sys, &text), Verdict::Valid);
    }

    #[test]
    fn tampered_entries_fail() {
        let sys = parse_pps(TWO_STATE).unwrap();
        let text = hand_certificate(&sys).replace("<q,Z,q> 3/5", "<q,Z,q> 11/20");
        assert_eq!(
            verify_certificate_text(&sys, &text),
            Verdict::Invalid(InvalidReason::Inductivity {
                var: "<q,Z,q>".into(),
                index: 0
            })
        );
        let text = hand_certificate(&sys).replace("<r,Z,r> 1/1", "<r,Z,r> -1/1");
        assert!(matches!(
            verify_certificate_text(&sys, &text),
            Verdict::Invalid(InvalidReason::NegativeEntry { .. })
        ));
    }

    #[test]
    fn wrong_system_or_format() {
        let sys = parse_pps(TWO_STATE).unwrap();
        let other = parse_pps("x = 0.5 x^2 + 0.5").unwrap();
        let text = hand_certificate(&sys);
        assert!(matches!(
            verify_certificate_text(&other, &text),
            Verdict::Invalid(InvalidReason::Fingerprint { .. })
        ));
        for broken in [
            text.replace("ppscert v1", "ppscert"),
            text.replace("k 1", "k 0"),
            text.replace("3/5", "0.6"),
            text.replace("1/2", "1/0"),
            String::new(),
        ] {
            assert!(matches!(
                verify_certificate_text(&sys, &broken),
                Verdict::Invalid(InvalidReason::Malformed(_))
            ));
        }
        let missing = text.replace("<r,Z,r> 1/1\n", "");
        assert!(matches!(
            verify_certificate_text(&sys, &missing),
            Verdict::Invalid(InvalidReason::Variables(_))
        ));
    }

    #[test]
    fn depth_is_replayed() {
        let sys = parse_pps("x = 0.5 y + 0.25\ny = 0.5 x + 0.25").unwrap();
        let body = format!("ppscert v1\nsystem-sha256 {}\nepsilon 1/10\n", fingerprint(&sys));
        let at = |k: u32| format!("{body}k {k}\nx 1/2\ny 3/5\n");
        assert!(!verify_certificate_text(&sys, &at(1)).is_valid());
        assert!(verify_certificate_text(&sys, &at(2)).is_valid());
        assert!(verify_certificate_text(&sys, &at(5)).is_valid());
    }
}
