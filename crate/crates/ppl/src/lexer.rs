use crate::PplError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(u64),
    /// Decimal literal such as `0.499`, kept as text.
    Decimal(String),
    Void,
    Bool,
    IntKw,
    If,
    Else,
    While,
    Prob,
    Return,
    True,
    False,
    Flip,
    Uniform,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Semi,
    Colon,
    Comma,
    Bar,
    Assign,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Percent,
    Ratio,
    Bang,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(n) => format!("number `{n}`"),
            Tok::Decimal(s) => format!("number `{s}`"),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::Void => "void",
            Tok::Bool => "bool",
            Tok::IntKw => "int",
            Tok::If => "if",
            Tok::Else => "else",
            Tok::While => "while",
            Tok::Prob => "prob",
            Tok::Return => "return",
            Tok::True => "true",
            Tok::False => "false",
            Tok::Flip => "flip",
            Tok::Uniform => "uniform",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Comma => ",",
            Tok::Bar => "|",
            Tok::Assign => "=",
            Tok::Eq => "==",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Percent => "%",
            Tok::Ratio => "//",
            Tok::Bang => "!",
            Tok::Ident(_) | Tok::Int(_) | Tok::Decimal(_) | Tok::Eof => "",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "void" => Tok::Void,
        "bool" => Tok::Bool,
        "int" => Tok::IntKw,
        "if" => Tok::If,
        "else" => Tok::Else,
        "while" => Tok::While,
        "prob" => Tok::Prob,
        "return" => Tok::Return,
        "true" => Tok::True,
        "false" => Tok::False,
        "flip" => Tok::Flip,
        "uniform" => Tok::Uniform,
        _ => return None,
    })
}

pub fn tokenize(text: &str) -> Result<Vec<(Tok, Pos)>, PplError> {
    let mut out = Vec::new();
    for (l, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let pos = Pos {
                line: l + 1,
                column: i + 1,
            };
            let next = chars.get(i + 1).copied();
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                out.push((keyword(&word).unwrap_or(Tok::Ident(word)), pos));
                continue;
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let decimal = i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit();
                if decimal {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                let word: String = chars[start..i].iter().collect();
                let tok = if decimal {
                    Tok::Decimal(word)
                } else {
                    Tok::Int(word.parse().map_err(|_| PplError::syntax(pos, format!("number `{word}` is too large")))?)
                };
                out.push((tok, pos));
                continue;
            }
            let (tok, len) = match (c, next) {
                ('=', Some('=')) => (Tok::Eq, 2),
                ('!', Some('=')) => (Tok::Ne, 2),
                ('<', Some('=')) => (Tok::Le, 2),
                ('>', Some('=')) => (Tok::Ge, 2),
                ('/', Some('/')) => (Tok::Ratio, 2),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('{', _) => (Tok::LBrace, 1),
                ('}', _) => (Tok::RBrace, 1),
                (';', _) => (Tok::Semi, 1),
                (':', _) => (Tok::Colon, 1),
                (',', _) => (Tok::Comma, 1),
                ('|', _) => (Tok::Bar, 1),
                ('=', _) => (Tok::Assign, 1),
                ('<', _) => (Tok::Lt, 1),
                ('>', _) => (Tok::Gt, 1),
                ('+', _) => (Tok::Plus, 1),
                ('-', _) => (Tok::Minus, 1),
                ('%', _) => (Tok::Percent, 1),
                ('!', _) => (Tok::Bang, 1),
                _ => return Err(PplError::syntax(pos, format!("unexpected character `{c}`"))),
            };
            out.push((tok, pos));
            i += len;
        }
    }
    let end = Pos {
        line: text.lines().count().max(1),
        column: text.lines().last().map_or(1, |l| l.chars().count() + 1),
    };
    out.push((Tok::Eof, end));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(text: &str) -> Vec<Tok> {
        tokenize(text).unwrap().into_iter().map(|(t, _)| t).collect()
    }

    #[test]
    fn ratios_comments_and_positions() {
        assert_eq!(
            toks("flip(1//2) # coin\n"),
            vec![Tok::Flip, Tok::LParen, Tok::Int(1), Tok::Ratio, Tok::Int(2), Tok::RParen, Tok::Eof]
        );
        assert_eq!(toks("0.499 y>=1"), vec![
            Tok::Decimal("0.499".into()),
            Tok::Ident("y".into()),
            Tok::Ge,
            Tok::Int(1),
            Tok::Eof
        ]);
        let with_pos = tokenize("{\n  x = 1;").unwrap();
        assert_eq!(with_pos[1].1, Pos { line: 2, column: 3 });
    }

    #[test]
    fn rejects_stray_characters() {
        assert!(matches!(tokenize("x = 1 / 2"), Err(PplError::Syntax { line: 1, column: 7, .. })));
    }
}
