//! Register text grammar:
//!
//! ```text
//! register ::= sign? term (('+' | '-') term)*
//! term     ::= coeff? '|' bit* '>'
//! coeff    ::= real 'i'? | 'i' | '(' sign? real 'i'? (('+' | '-') real 'i'?)* ')'
//! real     ::= decimal ('/' (decimal | 'sqrt(' decimal ')'))?
//! ```
//!
//! Whitespace is insignificant. Repeated basis states are summed.

use num_complex::Complex64;

use super::{basis_index, index_bits, QuantumError, Register};

/// Maximum deviation of the written norm from 1 that is silently corrected.
const NORMALIZATION_SLACK: f64 = 1e-6;

struct Cursor<'a> {
    src: &'a [u8],
    at: usize,
}

impl Cursor<'_> {
    fn skip_ws(&mut self) {
        while self.at < self.src.len() && self.src[self.at].is_ascii_whitespace() {
            self.at += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.at).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        self.skip_ws();
        if self.src[self.at..].starts_with(w.as_bytes()) {
            self.at += w.len();
            true
        } else {
            false
        }
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, QuantumError> {
        Err(QuantumError::MalformedAmplitude { offset: self.at, message: message.into() })
    }

    fn decimal(&mut self) -> Result<f64, QuantumError> {
        self.skip_ws();
        let start = self.at;
        while self.at < self.src.len()
            && (self.src[self.at].is_ascii_digit() || self.src[self.at] == b'.')
        {
            self.at += 1;
        }
        // exponent
        if self.at > start
            && self.at < self.src.len()
            && (self.src[self.at] == b'e' || self.src[self.at] == b'E')
        {
            let save = self.at;
            self.at += 1;
            if self.at < self.src.len() && (self.src[self.at] == b'-' || self.src[self.at] == b'+') {
                self.at += 1;
            }
            let digits = self.at;
            while self.at < self.src.len() && self.src[self.at].is_ascii_digit() {
                self.at += 1;
            }
            if self.at == digits {
                self.at = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.at]).unwrap_or("");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => {
                self.at = start;
                self.fail("expected a number")
            }
        }
    }

    fn real(&mut self) -> Result<f64, QuantumError> {
        let num = self.decimal()?;
        if !self.eat(b'/') {
            return Ok(num);
        }
        let den = if self.eat_word("sqrt") {
            if !self.eat(b'(') {
                return self.fail("expected `(` after sqrt");
            }
            let k = self.decimal()?;
            if !self.eat(b')') {
                return self.fail("expected `)`");
            }
            k.sqrt()
        } else {
            self.decimal()?
        };
        if den == 0.0 {
            return self.fail("division by zero");
        }
        Ok(num / den)
    }

    /// `real 'i'?` or a bare `i`.
    fn signed_part(&mut self, sign: f64) -> Result<Complex64, QuantumError> {
        if self.eat(b'i') {
            return Ok(Complex64::new(0.0, sign));
        }
        let x = sign * self.real()?;
        if self.eat(b'i') {
            Ok(Complex64::new(0.0, x))
        } else {
            Ok(Complex64::new(x, 0.0))
        }
    }

    fn coefficient(&mut self, sign: f64) -> Result<Complex64, QuantumError> {
        match self.peek() {
            Some(b'|') => Ok(Complex64::new(sign, 0.0)),
            Some(b'(') => {
                self.at += 1;
                let mut s = if self.eat(b'-') { -1.0 } else { self.eat(b'+'); 1.0 };
                let mut acc = Complex64::new(0.0, 0.0);
                loop {
                    acc += self.signed_part(s)?;
                    if self.eat(b'+') {
                        s = 1.0;
                    } else if self.eat(b'-') {
                        s = -1.0;
                    } else {
                        break;
                    }
                }
                if !self.eat(b')') {
                    return self.fail("expected `)`");
                }
                Ok(acc * sign)
            }
            _ => self.signed_part(sign),
        }
    }

    fn ket(&mut self) -> Result<Vec<bool>, QuantumError> {
        if !self.eat(b'|') {
            return self.fail("expected `|`");
        }
        let mut bits = Vec::new();
        loop {
            match self.peek() {
                Some(b'0') => bits.push(false),
                Some(b'1') => bits.push(true),
                Some(b'>') => {
                    self.at += 1;
                    return Ok(bits);
                }
                _ => return self.fail("expected a bit or `>`"),
            }
            self.at += 1;
        }
    }
}

/// Parses a register, normalizing it when its norm is within `1e-6` of 1.
pub fn parse_register(text: &str) -> Result<Register, QuantumError> {
    let mut cur = Cursor { src: text.as_bytes(), at: 0 };
    let mut sign = if cur.eat(b'-') { -1.0 } else { cur.eat(b'+'); 1.0 };
    let mut terms: Vec<(Complex64, Vec<bool>)> = Vec::new();
    loop {
        let coeff = cur.coefficient(sign)?;
        let bits = cur.ket()?;
        if let Some((_, first)) = terms.first() {
            if first.len() != bits.len() {
                return Err(QuantumError::InconsistentBitWidth { first: first.len(), other: bits.len() });
            }
        }
        terms.push((coeff, bits));
        if cur.eat(b'+') {
            sign = 1.0;
        } else if cur.eat(b'-') {
            sign = -1.0;
        } else {
            break;
        }
    }
    if cur.peek().is_some() {
        return cur.fail("unexpected trailing input");
    }
    let n = terms[0].1.len();
    if n > 24 {
        return cur.fail(format!("{n} qubits is too many for a dense register"));
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    for (c, bits) in &terms {
        amps[basis_index(bits)] += c;
    }
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > NORMALIZATION_SLACK {
        return Err(QuantumError::NotNormalized { norm });
    }
    for a in &mut amps {
        *a /= norm;
    }
    Register::new(amps)
}

fn trim_decimal(x: f64, precision: usize) -> String {
    let s = format!("{x:.precision$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Magnitude of a real coefficient; exact forms for `k^(-1/2)`, `k ≤ 16`.
fn format_magnitude(x: f64, precision: usize) -> String {
    debug_assert!(x >= 0.0);
    for k in 2..=16u32 {
        if (x - 1.0 / f64::from(k).sqrt()).abs() < 1e-9 {
            let root = f64::from(k).sqrt().round() as u32;
            if root * root == k {
                return match root {
                    2 => "0.5".into(),
                    4 => "0.25".into(),
                    _ => format!("1/{root}"),
                };
            }
            return format!("1/sqrt({k})");
        }
    }
    trim_decimal(x, precision)
}

/// Formats one amplitude as a coefficient, returning whether it is written
/// with a leading minus so the caller can turn it into a separator.
fn coefficient(a: Complex64, precision: usize) -> (bool, String) {
    let eps = 1e-12;
    if a.im.abs() < eps {
        let mag = a.re.abs();
        let text = if (mag - 1.0).abs() < 1e-9 { String::new() } else { format_magnitude(mag, precision) };
        return (a.re < 0.0, text);
    }
    if a.re.abs() < eps {
        let mag = a.im.abs();
        let text = if (mag - 1.0).abs() < 1e-9 {
            "i".to_string()
        } else {
            format!("{}i", format_magnitude(mag, precision))
        };
        return (a.im < 0.0, text);
    }
    let re = if a.re < 0.0 { format!("-{}", format_magnitude(-a.re, precision)) } else { format_magnitude(a.re, precision) };
    let op = if a.im < 0.0 { '-' } else { '+' };
    (false, format!("({re}{op}{}i)", format_magnitude(a.im.abs(), precision)))
}

/// A single amplitude in coefficient syntax (`1/sqrt(2)`, `-0.5i`, …).
pub fn format_amplitude(a: Complex64, precision: usize) -> String {
    let (neg, text) = coefficient(a, precision);
    let text = if text.is_empty() { "1".to_string() } else { text };
    if neg {
        format!("-{text}")
    } else {
        text
    }
}

/// Formats the non-zero amplitudes of `r` in the register grammar.
pub fn format_register(r: &Register, precision: usize) -> String {
    let n = r.qubit_count();
    let mut out = String::new();
    for (idx, a) in r.amplitudes().iter().enumerate() {
        if a.norm() < 1e-12 {
            continue;
        }
        let (neg, text) = coefficient(*a, precision);
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        out.push_str(&text);
        out.push('|');
        for b in index_bits(idx, n) {
            out.push(if b { '1' } else { '0' });
        }
        out.push('>');
    }
    out
}
