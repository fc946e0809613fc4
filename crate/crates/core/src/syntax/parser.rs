use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use super::Term;

/// 1-based line and column of a character in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {position}: {message}")]
    Syntax { position: Position, message: String },
    #[error("bit label {0} is used more than once")]
    DuplicateBitLabel(u32),
    #[error("pattern at {position} binds `{name}` twice")]
    DuplicatePatternVariable { position: Position, name: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Lambda,
    Lt,
    Gt,
    Comma,
    Dot,
    LParen,
    RParen,
    Star,
    Ident(String),
    GateName(String),
    Bit { value: bool, label: Option<u32> },
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Lambda => f.write_str("`\\`"),
            Tok::Lt => f.write_str("`<`"),
            Tok::Gt => f.write_str("`>`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Ident(x) => write!(f, "variable `{x}`"),
            Tok::GateName(g) => write!(f, "gate `{g}`"),
            Tok::Bit { value, .. } => write!(f, "bit `|{}>`", u8::from(*value)),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Position)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, column, message: String| ParseError::Syntax {
        position: Position { line, column },
        message,
    };
    while i < chars.len() {
        let c = chars[i];
        let pos = Position { line, column: col };
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => advance(1, &mut i, &mut col),
            '-' if chars.get(i + 1) == Some(&'-') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '\\' | 'λ' => {
                out.push((Tok::Lambda, pos));
                advance(1, &mut i, &mut col);
            }
            '<' => {
                out.push((Tok::Lt, pos));
                advance(1, &mut i, &mut col);
            }
            '>' => {
                out.push((Tok::Gt, pos));
                advance(1, &mut i, &mut col);
            }
            ',' => {
                out.push((Tok::Comma, pos));
                advance(1, &mut i, &mut col);
            }
            '.' => {
                out.push((Tok::Dot, pos));
                advance(1, &mut i, &mut col);
            }
            '(' => {
                out.push((Tok::LParen, pos));
                advance(1, &mut i, &mut col);
            }
            ')' => {
                out.push((Tok::RParen, pos));
                advance(1, &mut i, &mut col);
            }
            '*' | '⊗' => {
                out.push((Tok::Star, pos));
                advance(1, &mut i, &mut col);
            }
            '|' => {
                let value = match chars.get(i + 1) {
                    Some('0') => false,
                    Some('1') => true,
                    _ => return Err(err(line, col, "expected `|0>` or `|1>`".into())),
                };
                if chars.get(i + 2) != Some(&'>') {
                    return Err(err(line, col, "unterminated bit literal".into()));
                }
                advance(3, &mut i, &mut col);
                let mut label = None;
                if chars.get(i) == Some(&'_') {
                    let start = i + 1;
                    let mut end = start;
                    while end < chars.len() && chars[end].is_ascii_digit() {
                        end += 1;
                    }
                    if end == start {
                        return Err(err(line, col, "expected a label after `_`".into()));
                    }
                    let digits: String = chars[start..end].iter().collect();
                    let n = digits
                        .parse::<u32>()
                        .map_err(|_| err(line, col, format!("bit label `{digits}` is too large")))?;
                    label = Some(n);
                    advance(end - i, &mut i, &mut col);
                }
                out.push((Tok::Bit { value, label }, pos));
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
                {
                    i += 1;
                }
                col += i - start;
                let word: String = chars[start..i].iter().collect();
                if c.is_uppercase() {
                    out.push((Tok::GateName(word), pos));
                } else {
                    out.push((Tok::Ident(word), pos));
                }
            }
            other => return Err(err(line, col, format!("unexpected character `{other}`"))),
        }
    }
    out.push((Tok::Eof, Position { line, column: col }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Position)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Position {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            position: self.pos(),
            message: format!("expected {expected}, found {}", self.peek()),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.fail(what)
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(x) => {
                self.bump();
                Ok(x)
            }
            _ => self.fail("a variable name"),
        }
    }

    fn term(&mut self) -> Result<PTerm, ParseError> {
        if *self.peek() == Tok::Lambda {
            return self.lambda();
        }
        let left = self.app()?;
        if *self.peek() == Tok::Star {
            self.bump();
            let right = self.term()?;
            return Ok(PTerm::Tensor(Box::new(left), Box::new(right)));
        }
        Ok(left)
    }

    fn lambda(&mut self) -> Result<PTerm, ParseError> {
        self.expect(Tok::Lambda, "`\\`")?;
        if *self.peek() == Tok::Lt {
            self.bump();
            let pos = self.pos();
            let x = self.ident()?;
            self.expect(Tok::Comma, "`,`")?;
            let y = self.ident()?;
            self.expect(Tok::Gt, "`>`")?;
            if x == y {
                return Err(ParseError::DuplicatePatternVariable { position: pos, name: x });
            }
            self.expect(Tok::Dot, "`.`")?;
            let body = self.term()?;
            Ok(PTerm::LamPair(x, y, Box::new(body)))
        } else {
            let x = self.ident()?;
            self.expect(Tok::Dot, "`.`")?;
            let body = self.term()?;
            Ok(PTerm::Lam(x, Box::new(body)))
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Ident(_) | Tok::GateName(_) | Tok::Bit { .. } | Tok::LParen
        )
    }

    fn app(&mut self) -> Result<PTerm, ParseError> {
        let mut head = self.atom()?;
        loop {
            if self.starts_atom() {
                let arg = self.atom()?;
                head = PTerm::App(Box::new(head), Box::new(arg));
            } else if *self.peek() == Tok::Lambda {
                let arg = self.lambda()?;
                return Ok(PTerm::App(Box::new(head), Box::new(arg)));
            } else {
                return Ok(head);
            }
        }
    }

    fn atom(&mut self) -> Result<PTerm, ParseError> {
        match self.peek().clone() {
            Tok::Ident(x) => {
                self.bump();
                Ok(PTerm::Var(x))
            }
            Tok::GateName(g) => {
                self.bump();
                Ok(PTerm::Gate(g))
            }
            Tok::Bit { value, label } => {
                self.bump();
                Ok(PTerm::Bit { value, label })
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => self.fail("a term"),
        }
    }
}

/// Parse tree before bit labels are resolved.
enum PTerm {
    Var(String),
    Bit { value: bool, label: Option<u32> },
    Gate(String),
    Tensor(Box<PTerm>, Box<PTerm>),
    App(Box<PTerm>, Box<PTerm>),
    Lam(String, Box<PTerm>),
    LamPair(String, String, Box<PTerm>),
}

impl PTerm {
    fn explicit_labels(&self, seen: &mut BTreeSet<u32>) -> Result<(), ParseError> {
        match self {
            PTerm::Bit { label: Some(l), .. } => {
                if !seen.insert(*l) {
                    return Err(ParseError::DuplicateBitLabel(*l));
                }
                Ok(())
            }
            PTerm::Tensor(a, b) | PTerm::App(a, b) => {
                a.explicit_labels(seen)?;
                b.explicit_labels(seen)
            }
            PTerm::Lam(_, body) | PTerm::LamPair(_, _, body) => body.explicit_labels(seen),
            _ => Ok(()),
        }
    }

    /// Unlabelled bits get the smallest labels not written explicitly
    /// anywhere in the term, in left-to-right order.
    fn resolve(self, used: &BTreeSet<u32>, next: &mut u32) -> Term {
        match self {
            PTerm::Var(x) => Term::Var(x),
            PTerm::Gate(g) => Term::Gate(g),
            PTerm::Bit { value, label } => {
                let label = label.unwrap_or_else(|| {
                    while used.contains(next) {
                        *next += 1;
                    }
                    let l = *next;
                    *next += 1;
                    l
                });
                Term::Bit { value, label }
            }
            PTerm::Tensor(a, b) => {
                let a = a.resolve(used, next);
                Term::tensor(a, b.resolve(used, next))
            }
            PTerm::App(a, b) => {
                let a = a.resolve(used, next);
                Term::app(a, b.resolve(used, next))
            }
            PTerm::Lam(x, body) => Term::lam(x, body.resolve(used, next)),
            PTerm::LamPair(x, y, body) => Term::lam_pair(x, y, body.resolve(used, next)),
        }
    }
}

/// Parses one term. Missing bit labels are filled in left to right.
pub fn parse(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser { toks: lex(src)?, at: 0 };
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        return p.fail("end of input");
    }
    let mut used = BTreeSet::new();
    t.explicit_labels(&mut used)?;
    Ok(t.resolve(&used, &mut 1))
}
