//! The `.ppda` text format.
//!
//! ```text
//! ppda
//! states q r
//! stack Z
//! init q Z
//! q Z -> 1/4 q Z Z
//! q Z -> 1/2 q eps
//! q Z -> 1/4 r eps
//! r Z -> 1 r eps
//! ```
//!
//! `init` also accepts the two names written together (`init qZ`) when the
//! split is unambiguous.

use std::fmt::Write as _;

use super::{Ppda, PpdaError, Rule};
use crate::rational::parse_rational;

fn syntax(line: usize, message: impl Into<String>) -> PpdaError {
    PpdaError::Syntax {
        line,
        message: message.into(),
    }
}

pub fn parse_ppda(text: &str) -> Result<Ppda, PpdaError> {
    let mut states: Option<Vec<String>> = None;
    let mut stack: Option<Vec<String>> = None;
    let mut init: Option<(usize, Vec<String>)> = None;
    let mut rule_lines: Vec<(usize, Vec<String>)> = Vec::new();
    let mut header = false;
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let line = raw.split('#').next().unwrap_or("");
        let words: Vec<String> = line.split_whitespace().map(str::to_string).collect();
        let Some(first) = words.first() else { continue };
        if !header {
            if words != ["ppda"] {
                return Err(syntax(no, "expected the header `ppda`"));
            }
            header = true;
            continue;
        }
        match first.as_str() {
            "states" if states.is_none() => states = Some(words[1..].to_vec()),
            "stack" if stack.is_none() => stack = Some(words[1..].to_vec()),
            "init" if init.is_none() => init = Some((no, words[1..].to_vec())),
            "states" | "stack" | "init" => return Err(syntax(no, format!("duplicate `{first}` line"))),
            _ => rule_lines.push((no, words)),
        }
    }
    if !header {
        return Err(syntax(1, "expected the header `ppda`"));
    }
    let states = states.ok_or_else(|| syntax(0, "missing `states` line"))?;
    let stack = stack.ok_or_else(|| syntax(0, "missing `stack` line"))?;
    let state_id = |name: &str| states.iter().position(|s| s == name);
    let symbol_id = |name: &str| stack.iter().position(|s| s == name);

    let (init_line, init_words) = init.ok_or_else(|| syntax(0, "missing `init` line"))?;
    let init = match init_words.as_slice() {
        [q, z] => (
            state_id(q).ok_or_else(|| PpdaError::UnknownState(q.clone()))?,
            symbol_id(z).ok_or_else(|| PpdaError::UnknownSymbol(z.clone()))?,
        ),
        [joined] => {
            let splits: Vec<(usize, usize)> = (1..joined.len())
                .filter(|&k| joined.is_char_boundary(k))
                .filter_map(|k| Some((state_id(&joined[..k])?, symbol_id(&joined[k..])?)))
                .collect();
            match splits.as_slice() {
                [one] => *one,
                [] => return Err(syntax(init_line, format!("cannot split `{joined}` into state and symbol"))),
                _ => return Err(syntax(init_line, format!("`{joined}` splits ambiguously"))),
            }
        }
        _ => return Err(syntax(init_line, "expected `init <state> <symbol>`")),
    };

    let mut rules = Vec::with_capacity(rule_lines.len());
    for (no, words) in rule_lines {
        // q Z -> p r alpha...
        if words.len() < 6 || words[2] != "->" {
            return Err(syntax(no, "expected `<state> <symbol> -> <prob> <state> <push>`"));
        }
        let state = state_id(&words[0]).ok_or_else(|| PpdaError::UnknownState(words[0].clone()))?;
        let symbol = symbol_id(&words[1]).ok_or_else(|| PpdaError::UnknownSymbol(words[1].clone()))?;
        let prob = parse_rational(&words[3]).map_err(|e| syntax(no, e.to_string()))?;
        let target = state_id(&words[4]).ok_or_else(|| PpdaError::UnknownState(words[4].clone()))?;
        let push = match &words[5..] {
            [eps] if eps == "eps" => Vec::new(),
            alpha => alpha
                .iter()
                .map(|z| symbol_id(z).ok_or_else(|| PpdaError::UnknownSymbol(z.clone())))
                .collect::<Result<Vec<_>, _>>()?,
        };
        if push.len() > 2 {
            return Err(syntax(no, "at most two symbols may be pushed"));
        }
        rules.push(Rule {
            state,
            symbol,
            prob,
            target,
            push,
        });
    }
    Ppda::new(states, stack, rules, init)
}

pub(super) fn to_text(a: &Ppda) -> String {
    let mut out = String::from("ppda\n");
    let _ = writeln!(out, "states {}", a.states.join(" "));
    let _ = writeln!(out, "stack {}", a.stack.join(" "));
    let _ = writeln!(out, "init {} {}", a.states[a.init.0], a.stack[a.init.1]);
    for rule in &a.rules {
        out.push_str(&a.describe_rule(rule));
        out.push('\n');
    }
    out
}
