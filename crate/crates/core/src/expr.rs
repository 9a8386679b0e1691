//! Parser for coefficient expressions such as `(1 - L^-1)/(1 - L^-4)`,
//! `1/2*L^3 - L` or `L^(-3*k - 1)`, and for affine forms like `3*k + r`.
//!
//! Identifiers are integer parameters and may only appear in exponents of
//! `L` (or anywhere, for affine forms). `ord(x)` is accepted as a single
//! identifier.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::arith::Q;
use crate::presburger::{AffineForm, LSum};
use crate::symring::SymA;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprError {
    pub col: usize,
    pub msg: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "col {}: {}", self.col, self.msg)
    }
}

impl std::error::Error for ExprError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    L,
    Op(char),
}

fn lex(s: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let cs: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let st = i;
            while i < cs.len() && cs[i].is_ascii_digit() {
                i += 1;
            }
            let t: String = cs[st..i].iter().collect();
            out.push((Tok::Num(t.parse().unwrap()), col));
        } else if c.is_alphabetic() || c == '_' {
            let st = i;
            while i < cs.len() && (cs[i].is_alphanumeric() || cs[i] == '_') {
                i += 1;
            }
            let mut t: String = cs[st..i].iter().collect();
            if t == "ord" || t == "ac" {
                // ord(x) is one identifier
                let rest: String = cs[i..].iter().collect();
                if let Some(close) = rest.find(')') {
                    let inner: String = rest[..close].chars().filter(|c| !c.is_whitespace()).collect();
                    if inner.starts_with('(') && inner[1..].chars().all(|c| c.is_alphanumeric() || c == '_') {
                        t = format!("{t}{inner})");
                        i += close + 1;
                    }
                }
            }
            out.push((if t == "L" { Tok::L } else { Tok::Ident(t) }, col));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), col));
            i += 1;
        } else {
            return Err(ExprError { col, msg: format!("unexpected character '{c}'") });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
enum Ex {
    Num(BigInt),
    Ident(String),
    L,
    Add(Box<Ex>, Box<Ex>),
    Sub(Box<Ex>, Box<Ex>),
    Mul(Box<Ex>, Box<Ex>),
    Div(Box<Ex>, Box<Ex>),
    Pow(Box<Ex>, Box<Ex>),
    Neg(Box<Ex>),
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.1)
    }

    fn err<T>(&self, msg: &str) -> Result<T, ExprError> {
        Err(ExprError { col: self.col(), msg: msg.to_string() })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Ex, ExprError> {
        let mut a = self.term()?;
        loop {
            if self.eat('+') {
                a = Ex::Add(Box::new(a), Box::new(self.term()?));
            } else if self.eat('-') {
                a = Ex::Sub(Box::new(a), Box::new(self.term()?));
            } else {
                return Ok(a);
            }
        }
    }

    fn term(&mut self) -> Result<Ex, ExprError> {
        let mut a = self.unary()?;
        loop {
            if self.eat('*') {
                a = Ex::Mul(Box::new(a), Box::new(self.unary()?));
            } else if self.eat('/') {
                a = Ex::Div(Box::new(a), Box::new(self.unary()?));
            } else {
                return Ok(a);
            }
        }
    }

    fn unary(&mut self) -> Result<Ex, ExprError> {
        if self.eat('-') {
            return Ok(Ex::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        let base = self.primary()?;
        if self.eat('^') {
            let e = self.exponent()?;
            return Ok(Ex::Pow(Box::new(base), Box::new(e)));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Ex, ExprError> {
        if self.eat('-') {
            return Ok(Ex::Neg(Box::new(self.exponent()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Ex, ExprError> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Ex::Num(n))
            }
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(Ex::Ident(s))
            }
            Some(Tok::L) => {
                self.pos += 1;
                Ok(Ex::L)
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected ')'");
                }
                Ok(e)
            }
            Some(_) => self.err("unexpected token"),
            None => self.err("unexpected end of input"),
        }
    }
}

fn parse_ast(s: &str) -> Result<Ex, ExprError> {
    let toks = lex(s)?;
    let mut p = Parser { toks, pos: 0, end: s.chars().count() + 1 };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

fn err<T>(msg: String) -> Result<T, ExprError> {
    Err(ExprError { col: 0, msg })
}

fn small(n: &BigInt) -> Result<i64, ExprError> {
    n.to_i64().map_or_else(|| err(format!("{n} is too large")), Ok)
}

fn eval_affine(e: &Ex) -> Result<AffineForm, ExprError> {
    Ok(match e {
        Ex::Num(n) => AffineForm::constant(small(n)?),
        Ex::Ident(s) => AffineForm::var(s),
        Ex::L => return err("L cannot appear in an integer expression".into()),
        Ex::Add(a, b) => eval_affine(a)?.add(&eval_affine(b)?),
        Ex::Sub(a, b) => eval_affine(a)?.sub(&eval_affine(b)?),
        Ex::Neg(a) => eval_affine(a)?.neg(),
        Ex::Mul(a, b) => {
            let (x, y) = (eval_affine(a)?, eval_affine(b)?);
            match (x.as_constant(), y.as_constant()) {
                (Some(c), _) => y.scale(c),
                (_, Some(c)) => x.scale(c),
                _ => return err("product of two parameters is not affine".into()),
            }
        }
        Ex::Div(a, b) => {
            let (x, y) = (eval_affine(a)?, eval_affine(b)?);
            match y.as_constant() {
                Some(d) if d != 0 => match x.div_exact(d) {
                    Some(r) => r,
                    None => return err(format!("{x} is not divisible by {d}")),
                },
                _ => return err("division by a non-constant or zero".into()),
            }
        }
        Ex::Pow(a, b) => {
            let (x, y) = (eval_affine(a)?, eval_affine(b)?);
            match (x.as_constant(), y.as_constant()) {
                (Some(c), Some(k)) if k >= 0 => AffineForm::constant(c.pow(k as u32)),
                _ => return err("non-constant power in an integer expression".into()),
            }
        }
    })
}

/// Inverse of a single-term sum with a unit coefficient.
fn invert(s: &LSum) -> Result<LSum, ExprError> {
    let mut it = s.terms();
    match (it.next(), it.next()) {
        (Some((e, c)), None) => {
            let ci = c.inverse().map_err(|e| ExprError { col: 0, msg: e.to_string() })?;
            Ok(LSum::term(ci, &e.neg()))
        }
        (None, _) => err("division by zero".into()),
        _ => err("cannot divide by a sum depending on a parameter".into()),
    }
}

fn eval_lsum(e: &Ex) -> Result<LSum, ExprError> {
    Ok(match e {
        Ex::Num(n) => LSum::constant(SymA::from_q(Q::from_integer(n.clone()))),
        Ex::Ident(s) => return err(format!("parameter {s} outside an exponent of L")),
        Ex::L => LSum::term(SymA::one(), &AffineForm::constant(1)),
        Ex::Add(a, b) => eval_lsum(a)?.add(&eval_lsum(b)?),
        Ex::Sub(a, b) => eval_lsum(a)?.sub(&eval_lsum(b)?),
        Ex::Neg(a) => eval_lsum(a)?.neg(),
        Ex::Mul(a, b) => eval_lsum(a)?.mul(&eval_lsum(b)?),
        Ex::Div(a, b) => {
            let (x, y) = (eval_lsum(a)?, eval_lsum(b)?);
            // rational division keeps exact fractions like 1/2
            if let (Some(xc), Some(yc)) = (x.as_constant(), y.as_constant()) {
                if let (Some(p), Some(q)) = (xc.as_constant(), yc.as_constant()) {
                    if q.is_zero() {
                        return err("division by zero".into());
                    }
                    return Ok(LSum::constant(SymA::from_q(p / q)));
                }
            }
            x.mul(&invert(&y)?)
        }
        Ex::Pow(a, b) => {
            if matches!(**a, Ex::L) {
                return Ok(LSum::term(SymA::one(), &eval_affine(b)?));
            }
            let n = eval_affine(b)?
                .as_constant()
                .map_or_else(|| err("symbolic power of a non-L base".into()), Ok)?;
            let x = eval_lsum(a)?;
            let base = if n < 0 { invert(&x)? } else { x };
            (0..n.unsigned_abs()).fold(LSum::constant(SymA::one()), |acc, _| acc.mul(&base))
        }
    })
}

pub fn parse_lsum(s: &str) -> Result<LSum, ExprError> {
    eval_lsum(&parse_ast(s)?)
}

pub fn parse_affine(s: &str) -> Result<AffineForm, ExprError> {
    eval_affine(&parse_ast(s)?)
}

/// Parse a rational literal expression such as `3/4` or `-2`.
pub fn parse_rational(s: &str) -> Result<Q, ExprError> {
    let x = parse_lsum(s)?;
    x.as_constant().and_then(|c| c.as_constant()).map_or_else(|| err(format!("{s} is not a rational")), Ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{q_frac, q_int};

    #[test]
    fn parses_ring_elements() {
        let x = parse_lsum("(1 - L^-1)/(1 - L^-4)").unwrap().as_constant().unwrap();
        assert_eq!(x.nu(3), q_frac(27, 40));
        let y = parse_lsum("1/2*L^3 - 1/2*L").unwrap().as_constant().unwrap();
        assert_eq!(y.nu(5), q_int(60));
        let z = parse_lsum("-L^2").unwrap().as_constant().unwrap();
        assert_eq!(z.nu(3), q_int(-9));
        let w = parse_lsum("(1 - L^-2)^-1").unwrap().as_constant().unwrap();
        assert_eq!(w.nu(2), q_frac(4, 3));
        assert_eq!(parse_rational("3/6").unwrap(), q_frac(1, 2));
        assert!(parse_lsum("1/(L - 2)").is_err());
        assert!(parse_lsum("L^").is_err());
        assert!(parse_lsum("2 $ 3").is_err());
    }

    #[test]
    fn parses_parametric_exponents() {
        let s = parse_lsum("L^(-3*k - 1) - L^(-2*k)*L^-2").unwrap();
        assert_eq!(s.params().into_iter().collect::<Vec<_>>(), vec!["k".to_string()]);
        let mut vals = std::collections::BTreeMap::new();
        vals.insert("k".to_string(), 1);
        assert_eq!(s.eval(&vals).unwrap(), SymA::zero());
        let a = parse_affine("3*ord(x) + 1 - r").unwrap();
        assert_eq!(a.coeff("ord(x)"), 3);
        assert_eq!(a.coeff("r"), -1);
        assert_eq!(a.constant, 1);
        assert!(parse_affine("k*k").is_err());
        assert!(parse_lsum("k + 1").is_err());
        assert_eq!(LSum::parse(&s.to_string()).unwrap(), s);
    }
}
