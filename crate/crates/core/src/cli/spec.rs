//! Plain-text register description.
//!
//! ```text
//! # comment
//! n = 4
//! f3 = x0 + x1 + x2 + x1*x3
//! ```
//!
//! `+` is XOR, `*` is AND and `1` the constant term. Each `fI` line gives the
//! complete feedback of bit `I`; omitted bits are pure shifts.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::anf::{Anf, Monomial};
use crate::error::Error;
use crate::register::Nlfsr;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct SpecError {
    pub line: usize,
    pub column: usize,
    pub kind: SpecErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("missing `n = ...` declaration")]
    MissingLength,
    #[error("register length declared twice")]
    DuplicateLength,
    #[error("index {index} is out of range 0..{n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("bit {0} is defined twice")]
    DuplicateBit(usize),
    #[error("feedback of bit {bit} must not depend on x{var} outside its shift tap")]
    Singularity { bit: usize, var: usize },
    #[error("{0}")]
    Register(Error),
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
    /// 1-based column of `text[0]` within the line.
    base: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str, line: usize, base: usize) -> Self {
        Cursor {
            text,
            pos: 0,
            line,
            base,
        }
    }

    fn column(&self) -> usize {
        self.base + self.pos
    }

    fn err(&self, kind: SpecErrorKind) -> SpecError {
        SpecError {
            line: self.line,
            column: self.column(),
            kind,
        }
    }

    fn syntax(&self, msg: impl Into<String>) -> SpecError {
        self.err(SpecErrorKind::Syntax(msg.into()))
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.text[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), SpecError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.syntax(format!("expected `{c}`")))
        }
    }

    fn number(&mut self) -> Result<usize, SpecError> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let len = rest.bytes().take_while(u8::is_ascii_digit).count();
        if len == 0 {
            return Err(self.syntax("expected a number"));
        }
        let value = rest[..len]
            .parse()
            .map_err(|_| self.syntax("number too large"))?;
        self.pos += len;
        Ok(value)
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    /// One product-term: `1` or `xI*xJ*...`.
    fn term(&mut self, n: usize) -> Result<Monomial, SpecError> {
        let mut mask = 0u64;
        loop {
            self.skip_ws();
            let column = self.column();
            match self.peek() {
                Some('x') => {
                    self.pos += 1;
                    let index = self.number()?;
                    if index >= n {
                        return Err(SpecError {
                            line: self.line,
                            column,
                            kind: SpecErrorKind::IndexOutOfRange { index, n },
                        });
                    }
                    mask |= 1 << index;
                }
                Some('1') => self.pos += 1,
                _ => return Err(self.syntax("expected `x<index>` or `1`")),
            }
            if !self.eat('*') {
                return Ok(Monomial::from_mask(mask));
            }
        }
    }

    fn expression(&mut self, n: usize) -> Result<Anf, SpecError> {
        let mut f = Anf::zero();
        loop {
            f ^= self.term(n)?;
            if !self.eat('+') {
                break;
            }
        }
        if !self.at_end() {
            return Err(self.syntax("expected `+`, `*` or end of line"));
        }
        Ok(f)
    }
}

/// Parses an ANF expression such as `x0 + x1*x3` over `n` variables.
pub fn parse_anf(text: &str, n: usize) -> Result<Anf, SpecError> {
    Cursor::new(text, 1, 1).expression(n)
}

/// Parses a single product-term such as `x1*x3`.
pub fn parse_term(text: &str, n: usize) -> Result<Monomial, SpecError> {
    let mut c = Cursor::new(text, 1, 1);
    let t = c.term(n)?;
    if !c.at_end() {
        return Err(c.syntax("expected a single product-term"));
    }
    Ok(t)
}

pub fn parse_spec(text: &str) -> Result<Nlfsr, SpecError> {
    let mut n: Option<usize> = None;
    // bit -> (feedback, line, column of the expression)
    let mut defs: BTreeMap<usize, (Anf, usize, usize)> = BTreeMap::new();
    let mut last_line = 1;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("");
        let mut c = Cursor::new(content, line, 1);
        match c.peek() {
            None => continue,
            Some('n') => {
                c.pos += 1;
                c.expect('=')?;
                let column = c.column();
                let value = c.number()?;
                if !c.at_end() {
                    return Err(c.syntax("expected end of line"));
                }
                if n.is_some() {
                    return Err(c.err(SpecErrorKind::DuplicateLength));
                }
                if !defs.is_empty() {
                    return Err(c.syntax("`n` must be declared before feedback functions"));
                }
                if !(2..=crate::register::MAX_LEN).contains(&value) {
                    return Err(SpecError {
                        line,
                        column,
                        kind: SpecErrorKind::Register(Error::InvalidLength(value)),
                    });
                }
                n = Some(value);
            }
            Some('f') => {
                let Some(len) = n else {
                    return Err(c.err(SpecErrorKind::MissingLength));
                };
                c.pos += 1;
                let column = c.column();
                let bit = c.number()?;
                if bit >= len {
                    return Err(SpecError {
                        line,
                        column,
                        kind: SpecErrorKind::IndexOutOfRange { index: bit, n: len },
                    });
                }
                c.expect('=')?;
                c.skip_ws();
                let expr_column = c.column();
                let f = c.expression(len)?;
                if defs.contains_key(&bit) {
                    return Err(SpecError {
                        line,
                        column,
                        kind: SpecErrorKind::DuplicateBit(bit),
                    });
                }
                defs.insert(bit, (f, line, expr_column));
            }
            Some(_) => return Err(c.syntax("expected `n = ...` or `f<bit> = ...`")),
        }
    }

    let Some(n) = n else {
        return Err(SpecError {
            line: last_line,
            column: 1,
            kind: SpecErrorKind::MissingLength,
        });
    };
    let lines: BTreeMap<usize, (usize, usize)> =
        defs.iter().map(|(&b, (_, l, c))| (b, (*l, *c))).collect();
    Nlfsr::from_feedback(n, defs.into_iter().map(|(b, (f, _, _))| (b, f))).map_err(|e| {
        let locate = |bit: usize| lines.get(&bit).copied().unwrap_or((last_line, 1));
        match e {
            Error::Singularity { bit, var } => {
                let (line, column) = locate(bit);
                SpecError {
                    line,
                    column,
                    kind: SpecErrorKind::Singularity { bit, var },
                }
            }
            other => SpecError {
                line: last_line,
                column: 1,
                kind: SpecErrorKind::Register(other),
            },
        }
    })
}

/// Feedback of `bit` written with the shift tap first, followed by the
/// terms of `g_bit` in degree-then-index order.
pub fn format_feedback(r: &Nlfsr, bit: usize) -> String {
    let mut parts = vec![format!("x{}", r.tap(bit))];
    parts.extend(r.g(bit).terms().map(|t| t.to_string()));
    parts.join(" + ")
}

/// Canonical text form; only non-pure bits are listed, highest first.
pub fn format_spec(r: &Nlfsr) -> String {
    let mut out = format!("n = {}\n", r.len());
    for bit in r.nonpure_bits().rev() {
        out.push_str(&format!("f{bit} = {}\n", format_feedback(r, bit)));
    }
    out
}
