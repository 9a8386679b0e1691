//! The three-sorted valued-field language: parsing, printing, finite
//! precision interpretation and residue-field point counting.

mod ast;
mod eval;
mod json;
mod mvpoly;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{prime_divisors, Q};
use crate::localfield::LocalFieldError;

pub use ast::{Cmp, Node, RfLeaf, RfTerm, Sort, VfLeaf, VfTerm, ZzTerm};
pub use eval::{
    count_rf_points, count_rf_points_with, eval_vf, interpret, interpret_with, Compiled, EvalOptions, Truth3, Value,
    DEFAULT_BUDGET,
};
pub use mvpoly::{Monomial, MvPoly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("sort error at {var}: {msg}")]
    Sort { var: String, msg: String },
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("quantifier over the valued-field variable {0} needs oracle mode")]
    VfQuantifier(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("enumeration of {0} cases exceeds the budget")]
    TooLarge(String),
    #[error(transparent)]
    LocalField(#[from] LocalFieldError),
}

pub(crate) fn mismatch(var: impl Into<String>, expected: Sort, found: Sort) -> FormulaError {
    FormulaError::Sort { var: var.into(), msg: format!("expected sort {expected}, found {found}") }
}

/// Primes at which a formula or a derived result is not guaranteed,
/// with a reason for each. Only ever grows; merging is commutative.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadPrimes(BTreeMap<u64, BTreeSet<String>>);

impl BadPrimes {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, p: u64, why: impl Into<String>) {
        self.0.entry(p).or_default().insert(why.into());
    }

    /// Record every prime divisor of `n` (zero and units record nothing).
    pub fn insert_divisors(&mut self, n: &BigInt, why: &str) {
        if n.is_zero() {
            return;
        }
        for p in prime_divisors(n) {
            self.insert(p, why);
        }
    }

    pub fn merge(&mut self, o: &BadPrimes) {
        for (p, ws) in &o.0 {
            self.0.entry(*p).or_default().extend(ws.iter().cloned());
        }
    }

    pub fn contains(&self, p: u64) -> bool {
        self.0.contains_key(&p)
    }

    pub fn primes(&self) -> Vec<u64> {
        self.0.keys().copied().collect()
    }

    pub fn reasons(&self, p: u64) -> Vec<String> {
        self.0.get(&p).map(|s| s.iter().cloned().collect()).unwrap_or_default()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &BTreeSet<String>)> {
        self.0.iter().map(|(p, s)| (*p, s))
    }
}

impl fmt::Display for BadPrimes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ps: Vec<String> = self.primes().iter().map(|p| p.to_string()).collect();
        write!(f, "{{{}}}", ps.join(", "))
    }
}

/// A parsed, well-sorted formula with its free variables.
#[derive(Debug, Clone)]
pub struct Formula {
    free: Vec<(String, Sort)>,
    body: Node,
    bad: BadPrimes,
}

impl PartialEq for Formula {
    fn eq(&self, o: &Self) -> bool {
        self.free == o.free && self.body == o.body
    }
}

impl Formula {
    pub(crate) fn new(free: Vec<(String, Sort)>, body: Node) -> Self {
        let mut bad = BadPrimes::new();
        collect_bad(&body, &mut bad);
        Self { free, body, bad }
    }

    /// Parse; variables whose sort cannot be inferred are VF.
    pub fn parse(src: &str) -> Result<Self, FormulaError> {
        parse::parse_formula(src, Sort::Vf)
    }

    /// Parse with a chosen sort for variables left open by inference.
    pub fn parse_with_default(src: &str, default: Sort) -> Result<Self, FormulaError> {
        parse::parse_formula(src, default)
    }

    /// Build from a typed tree; free variables are listed by sort and name.
    pub fn from_node(body: Node) -> Self {
        let [vf, rf, zz] = body.free_vars();
        let mut free = Vec::new();
        for (set, s) in [(vf, Sort::Vf), (rf, Sort::Rf), (zz, Sort::Zz)] {
            free.extend(set.into_iter().map(|v| (v, s)));
        }
        Self::new(free, body)
    }

    pub fn free(&self) -> &[(String, Sort)] {
        &self.free
    }

    pub fn body(&self) -> &Node {
        &self.body
    }

    pub fn sort_of(&self, v: &str) -> Option<Sort> {
        self.free.iter().find(|(n, _)| n == v).map(|(_, s)| *s)
    }

    pub fn bad_primes(&self) -> &BadPrimes {
        &self.bad
    }

    /// Append to the bad-prime accumulator.
    pub fn note_bad_prime(&mut self, p: u64, why: impl Into<String>) {
        self.bad.insert(p, why);
    }

    pub fn has_vf_quantifier(&self) -> bool {
        fn go(n: &Node) -> bool {
            match n {
                Node::Exists(_, Sort::Vf, _) => true,
                Node::Exists(_, _, b) | Node::Not(b) => go(b),
                Node::And(a, b) | Node::Or(a, b) => go(a) || go(b),
                _ => false,
            }
        }
        go(&self.body)
    }

    /// Source text that reparses to this formula.
    pub fn pretty(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in [Sort::Vf, Sort::Rf, Sort::Zz] {
            let names: Vec<&str> = self.free.iter().filter(|(_, t)| *t == s).map(|(n, _)| n.as_str()).collect();
            if !names.is_empty() {
                write!(f, "{s} {}; ", names.join(", "))?;
            }
        }
        write!(f, "{}", self.body)
    }
}

impl std::str::FromStr for Formula {
    type Err = FormulaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Formula::parse(s)
    }
}

/// Clear denominators of a polynomial difference; returns the integral
/// coefficients in monomial order.
fn integral_coeffs<K: Ord + Clone>(p: &MvPoly<K>, bad: &mut BadPrimes) -> Vec<BigInt> {
    let mut den = BigInt::one();
    for (_, c) in p.terms() {
        bad.insert_divisors(c.denom(), &format!("denominator {} not invertible", c.denom()));
        den = den.lcm(c.denom());
    }
    p.terms().map(|(_, c)| (c * Q::from_integer(den.clone())).to_integer()).collect()
}

/// Leading coefficient: the one on the monomial of highest total degree
/// (ties broken by monomial order).
fn leading<K: Ord + Clone>(p: &MvPoly<K>, ints: &[BigInt]) -> Option<BigInt> {
    let deg = |m: &Monomial<K>| m.iter().map(|(_, e)| *e).sum::<u32>();
    p.terms().zip(ints).max_by_key(|((m, _), _)| deg(m)).map(|(_, c)| c.abs())
}

fn note_poly<K: Ord + Clone>(p: &MvPoly<K>, bad: &mut BadPrimes) {
    if p.as_constant().is_some() {
        return;
    }
    let ints = integral_coeffs(p, bad);
    if let Some(lc) = leading(p, &ints) {
        bad.insert_divisors(&lc, &format!("coefficient {lc} not invertible"));
    }
}

fn note_vf(t: &VfTerm, bad: &mut BadPrimes) {
    match t {
        VfTerm::Div(a, d) => {
            bad.insert_divisors(d, &format!("denominator {} not invertible", d.abs()));
            note_vf(a, bad);
        }
        VfTerm::Add(a, b) | VfTerm::Sub(a, b) | VfTerm::Mul(a, b) => {
            note_vf(a, bad);
            note_vf(b, bad);
        }
        VfTerm::Neg(a) | VfTerm::Pow(a, _) => note_vf(a, bad),
        VfTerm::Var(_) | VfTerm::Const(_) | VfTerm::Unif => {}
    }
}

fn note_rf(t: &RfTerm, bad: &mut BadPrimes) {
    match t {
        RfTerm::Ac(a) => {
            note_vf(a, bad);
            note_poly(&a.to_poly(), bad);
        }
        RfTerm::Add(a, b) | RfTerm::Sub(a, b) | RfTerm::Mul(a, b) => {
            note_rf(a, bad);
            note_rf(b, bad);
        }
        RfTerm::Neg(a) | RfTerm::Pow(a, _) => note_rf(a, bad),
        RfTerm::Var(_) | RfTerm::Const(_) => {}
    }
}

fn note_zz(t: &ZzTerm, bad: &mut BadPrimes) {
    match t {
        ZzTerm::Ord(a) => {
            note_vf(a, bad);
            note_poly(&a.to_poly(), bad);
        }
        ZzTerm::Add(a, b) | ZzTerm::Sub(a, b) => {
            note_zz(a, bad);
            note_zz(b, bad);
        }
        ZzTerm::Neg(a) | ZzTerm::Scale(_, a) => note_zz(a, bad),
        ZzTerm::Var(_) | ZzTerm::Const(_) | ZzTerm::Inf => {}
    }
}

fn collect_bad(n: &Node, bad: &mut BadPrimes) {
    match n {
        Node::True | Node::False => {}
        Node::VfEq(a, b) => {
            note_vf(a, bad);
            note_vf(b, bad);
            note_poly(&a.to_poly().sub(&b.to_poly()), bad);
        }
        Node::RfEq(a, b) => {
            note_rf(a, bad);
            note_rf(b, bad);
            note_poly(&a.to_poly().sub(&b.to_poly()), bad);
        }
        Node::ZzCmp(a, _, b) | Node::ZzCong(a, b, _) => {
            note_zz(a, bad);
            note_zz(b, bad);
        }
        Node::Not(a) | Node::Exists(_, _, a) => collect_bad(a, bad),
        Node::And(a, b) | Node::Or(a, b) => {
            collect_bad(a, bad);
            collect_bad(b, bad);
        }
    }
}
