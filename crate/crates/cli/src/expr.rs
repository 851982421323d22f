//! Barrier formulas over `t`, `S1` and `defaulted`.
//!
//! ```text
//! expr  := term (("+" | "-") term)*
//! term  := unary ("*" unary)*
//! unary := "-" unary | atom
//! atom  := number | "t" | "S1" | "defaulted" | "(" expr ")"
//!        | "max(" expr "," expr ")" | "min(" expr "," expr ")" | "pos(" expr ")"
//! ```
//!
//! `Display` prints a canonical form that parses back to the same tree.

use std::fmt;
use std::str::FromStr;

use gamehedge::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Time,
    S1,
    /// 1 after default, 0 before.
    Defaulted,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Pos(Box<Expr>),
}

impl Expr {
    pub fn eval(&self, t: f64, s1: f64, defaulted: bool) -> f64 {
        let ev = |e: &Expr| e.eval(t, s1, defaulted);
        match self {
            Expr::Num(v) => *v,
            Expr::Time => t,
            Expr::S1 => s1,
            Expr::Defaulted => defaulted as u8 as f64,
            Expr::Neg(a) => -ev(a),
            Expr::Add(a, b) => ev(a) + ev(b),
            Expr::Sub(a, b) => ev(a) - ev(b),
            Expr::Mul(a, b) => ev(a) * ev(b),
            Expr::Max(a, b) => ev(a).max(ev(b)),
            Expr::Min(a, b) => ev(a).min(ev(b)),
            Expr::Pos(a) => ev(a).max(0.0),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if *v < 0.0 => write!(f, "-{}", -v),
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Time => f.write_str("t"),
            Expr::S1 => f.write_str("S1"),
            Expr::Defaulted => f.write_str("defaulted"),
            Expr::Neg(a) => write!(f, "-{a}"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Max(a, b) => write!(f, "max({a}, {b})"),
            Expr::Min(a, b) => write!(f, "min({a}, {b})"),
            Expr::Pos(a) => write!(f, "pos({a})"),
        }
    }
}

impl FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser {
            src: s.as_bytes(),
            pos: 0,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} at offset {}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self
                    .src
                    .get(self.pos)
                    .is_some_and(|c| c.is_ascii_alphanumeric())
                {
                    self.pos += 1;
                }
                let word = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
                match word {
                    "t" => Ok(Expr::Time),
                    "S1" => Ok(Expr::S1),
                    "defaulted" => Ok(Expr::Defaulted),
                    "max" | "min" => {
                        self.expect(b'(')?;
                        let a = Box::new(self.expr()?);
                        self.expect(b',')?;
                        let b = Box::new(self.expr()?);
                        self.expect(b')')?;
                        Ok(if word == "max" {
                            Expr::Max(a, b)
                        } else {
                            Expr::Min(a, b)
                        })
                    }
                    "pos" => {
                        self.expect(b'(')?;
                        let a = self.expr()?;
                        self.expect(b')')?;
                        Ok(Expr::Pos(Box::new(a)))
                    }
                    _ => {
                        self.pos = start;
                        Err(self.error(&format!("unknown identifier '{word}'")))
                    }
                }
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.src.get(p.pos).is_some_and(u8::is_ascii_digit) {
                p.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            digits(self);
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Expr::Num(v)),
            _ => {
                self.pos = start;
                Err(self.error(&format!("bad number '{text}'")))
            }
        }
    }
}
