//! The `.pps` text format.
//!
//! ```text
//! # comment
//! x = 0.5 + 0.5 x y^2
//! y = 1/3 + 1/3 x + 1/3 y^2
//! z =
//! ```
//!
//! One declaration per line, `name = term + term + ...`. A term is a product
//! of factors, optionally separated by `*`; a factor is a non-negative
//! number (`3`, `0.25`, `1e-3`, `3/5`, `3//5`) or a variable with an
//! optional integer exponent (`y^2`). Variable names are identifiers
//! (`[A-Za-z_][A-Za-z0-9_.']*`) or any run of non-blank characters wrapped
//! in angle brackets (`<q,Z,r>`). An empty right-hand side is the zero
//! polynomial. Variables may be used before their declaration line.
//!
//! [`serialize`] produces the canonical form: declaration order, merged and
//! sorted monomials, lowest-terms coefficients always printed.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_traits::One;
use sha2::{Digest, Sha256};

use super::{Monomial, PolySystem, PpsError, VarId};
use crate::rational::{format_compact, parse_rational};
use crate::Rational;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Eq,
    Plus,
    Star,
    Caret,
    Slash,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> PpsError {
    PpsError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn tokenize(text: &str, line: usize) -> Result<Vec<(Tok, usize)>, PpsError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            '#' => break,
            c if c.is_whitespace() => i += 1,
            '=' => {
                out.push((Tok::Eq, col));
                i += 1;
            }
            '+' => {
                out.push((Tok::Plus, col));
                i += 1;
            }
            '*' => {
                out.push((Tok::Star, col));
                i += 1;
            }
            '^' => {
                out.push((Tok::Caret, col));
                i += 1;
            }
            '/' => {
                i += if chars.get(i + 1) == Some(&'/') { 2 } else { 1 };
                out.push((Tok::Slash, col));
            }
            '<' => {
                let start = i;
                i += 1;
                while i < chars.len() && chars[i] != '>' {
                    if chars[i].is_whitespace() || chars[i] == '<' || chars[i] == '#' {
                        return Err(syntax(line, i + 1, "unterminated `<...>` name"));
                    }
                    i += 1;
                }
                if i == chars.len() {
                    return Err(syntax(line, col, "unterminated `<...>` name"));
                }
                i += 1;
                let name: String = chars[start..i].iter().collect();
                if name.len() == 2 {
                    return Err(syntax(line, col, "empty `<>` name"));
                }
                out.push((Tok::Ident(name), col));
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                // exponent only when digits follow, so `2e` stays number + variable
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                out.push((Tok::Number(chars[start..i].iter().collect()), col));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric()
                        || chars[i] == '_'
                        || chars[i] == '.'
                        || chars[i] == '\'')
                {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), col));
            }
            other => return Err(syntax(line, col, format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct Decl {
    line: usize,
    name_col: usize,
    name: String,
    rhs: Vec<(Tok, usize)>,
}

/// Parses the `.pps` format into a system with exact coefficients.
pub fn parse_pps(text: &str) -> Result<PolySystem, PpsError> {
    let mut decls = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks = tokenize(raw, line)?;
        if toks.is_empty() {
            continue;
        }
        let mut it = toks.into_iter();
        let (name, name_col) = match it.next() {
            Some((Tok::Ident(name), col)) => (name, col),
            Some((_, col)) => return Err(syntax(line, col, "expected a variable name")),
            None => unreachable!(),
        };
        match it.next() {
            Some((Tok::Eq, _)) => {}
            Some((_, col)) => return Err(syntax(line, col, "expected `=`")),
            None => return Err(syntax(line, raw.len() + 1, "expected `=`")),
        }
        decls.push(Decl {
            line,
            name_col,
            name,
            rhs: it.collect(),
        });
    }

    let mut index: HashMap<&str, VarId> = HashMap::new();
    for (i, d) in decls.iter().enumerate() {
        if index.insert(d.name.as_str(), i).is_some() {
            return Err(syntax(
                d.line,
                d.name_col,
                format!("variable `{}` is defined more than once", d.name),
            ));
        }
    }

    let mut equations = Vec::with_capacity(decls.len());
    for d in &decls {
        equations.push(parse_poly(&d.rhs, d.line, &index)?);
    }
    let names = decls.into_iter().map(|d| d.name).collect();
    PolySystem::new(names, equations)
}

fn parse_poly(
    toks: &[(Tok, usize)],
    line: usize,
    index: &HashMap<&str, VarId>,
) -> Result<Vec<Monomial>, PpsError> {
    let mut poly = Vec::new();
    if toks.is_empty() {
        return Ok(poly);
    }
    let mut pos = 0;
    loop {
        let mut coeff = Rational::one();
        let mut powers: Vec<(VarId, u32)> = Vec::new();
        let mut factors = 0;
        loop {
            match toks.get(pos) {
                Some((Tok::Number(lit), col)) => {
                    let mut value = parse_rational(lit)
                        .map_err(|e| syntax(line, *col, e.to_string()))?;
                    pos += 1;
                    if let Some((Tok::Slash, _)) = toks.get(pos) {
                        match toks.get(pos + 1) {
                            Some((Tok::Number(den), dcol)) => {
                                let den = parse_rational(den)
                                    .map_err(|e| syntax(line, *dcol, e.to_string()))?;
                                if den == Rational::from_integer(0.into()) {
                                    return Err(syntax(line, *dcol, "division by zero"));
                                }
                                value /= den;
                                pos += 2;
                            }
                            Some((_, c)) => return Err(syntax(line, *c, "expected a denominator")),
                            None => return Err(syntax(line, *col, "expected a denominator")),
                        }
                    }
                    coeff *= value;
                }
                Some((Tok::Ident(name), col)) => {
                    let var = *index.get(name.as_str()).ok_or_else(|| {
                        syntax(line, *col, format!("variable `{name}` is used but never defined"))
                    })?;
                    pos += 1;
                    let mut exp = 1u32;
                    if let Some((Tok::Caret, ccol)) = toks.get(pos) {
                        match toks.get(pos + 1) {
                            Some((Tok::Number(lit), ecol)) => {
                                exp = lit
                                    .parse()
                                    .map_err(|_| syntax(line, *ecol, "exponent must be a positive integer"))?;
                                if exp == 0 {
                                    return Err(syntax(line, *ecol, "exponent must be a positive integer"));
                                }
                                pos += 2;
                            }
                            _ => return Err(syntax(line, *ccol, "expected an exponent after `^`")),
                        }
                    }
                    powers.push((var, exp));
                }
                Some((_, col)) => return Err(syntax(line, *col, "expected a number or a variable")),
                None => {
                    let col = toks.last().map_or(1, |(_, c)| *c);
                    return Err(syntax(line, col, "expected a number or a variable"));
                }
            }
            factors += 1;
            match toks.get(pos) {
                Some((Tok::Star, _)) => pos += 1,
                Some((Tok::Number(_), _)) | Some((Tok::Ident(_), _)) => {}
                _ => break,
            }
        }
        debug_assert!(factors > 0);
        poly.extend(Monomial::new(coeff, powers));
        match toks.get(pos) {
            None => break,
            Some((Tok::Plus, _)) => pos += 1,
            Some((_, col)) => return Err(syntax(line, *col, "expected `+` or end of line")),
        }
    }
    Ok(poly)
}

fn write_monomial(out: &mut String, sys: &PolySystem, m: &Monomial) {
    out.push_str(&format_compact(m.coeff()));
    for &(v, e) in m.powers() {
        out.push(' ');
        out.push_str(sys.name(v));
        if e > 1 {
            let _ = write!(out, "^{e}");
        }
    }
}

/// Canonical text form; `parse_pps(&serialize(s)) == s`.
pub fn serialize(sys: &PolySystem) -> String {
    let mut out = String::new();
    for (i, poly) in sys.equations().iter().enumerate() {
        out.push_str(sys.name(i));
        out.push_str(" =");
        for (k, m) in poly.iter().enumerate() {
            out.push_str(if k == 0 { " " } else { " + " });
            write_monomial(&mut out, sys, m);
        }
        out.push('\n');
    }
    out
}

/// Lower-case hex SHA-256 of the canonical serialization.
pub fn fingerprint(sys: &PolySystem) -> String {
    hex::encode(Sha256::digest(serialize(sys).as_bytes()))
}
