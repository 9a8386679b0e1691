//! Sums of `c * L^(affine)` over iterated (triangular) Presburger domains.
//!
//! A domain lists its summation variables outermost first. Each variable has
//! optional affine lower/upper bounds in the outer variables and in free
//! parameters, plus a congruence `i ≡ c (mod d)`. Sums are taken innermost
//! first; each step is a finite or infinite geometric series. Results that
//! still depend on free parameters are returned as an [`LSum`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{self, Q};
use crate::symring::{SpecTarget, SymA};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PresError {
    #[error("not summable: {0}")]
    NotSummable(String),
    #[error("pieces overlap: {0}")]
    OverlapDetected(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("unbound parameter {0}")]
    UnboundParameter(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// `constant + sum coeffs[v] * v`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct AffineForm {
    pub constant: i64,
    pub coeffs: BTreeMap<String, i64>,
}

impl AffineForm {
    pub fn constant(c: i64) -> Self {
        Self { constant: c, coeffs: BTreeMap::new() }
    }

    pub fn var(name: &str) -> Self {
        Self::term(1, name)
    }

    pub fn term(c: i64, name: &str) -> Self {
        let mut f = Self::constant(0);
        if c != 0 {
            f.coeffs.insert(name.to_string(), c);
        }
        f
    }

    pub fn parse(s: &str) -> Result<Self, PresError> {
        crate::expr::parse_affine(s).map_err(|e| PresError::Parse(e.to_string()))
    }

    pub fn coeff(&self, v: &str) -> i64 {
        self.coeffs.get(v).copied().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn as_constant(&self) -> Option<i64> {
        self.is_constant().then_some(self.constant)
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.coeffs.keys().map(|s| s.as_str())
    }

    pub fn without(&self, v: &str) -> Self {
        let mut f = self.clone();
        f.coeffs.remove(v);
        f
    }

    pub fn without_constant(&self) -> Self {
        Self { constant: 0, coeffs: self.coeffs.clone() }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut f = self.clone();
        f.constant += o.constant;
        for (v, c) in &o.coeffs {
            *f.coeffs.entry(v.clone()).or_insert(0) += c;
        }
        f.coeffs.retain(|_, c| *c != 0);
        f
    }

    pub fn add_const(&self, c: i64) -> Self {
        Self { constant: self.constant + c, coeffs: self.coeffs.clone() }
    }

    pub fn scale(&self, k: i64) -> Self {
        if k == 0 {
            return Self::constant(0);
        }
        Self { constant: self.constant * k, coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), c * k)).collect() }
    }

    pub fn neg(&self) -> Self {
        self.scale(-1)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    /// Exact division by `d`, if every coefficient is divisible.
    pub fn div_exact(&self, d: i64) -> Option<Self> {
        if self.constant % d != 0 || self.coeffs.values().any(|c| c % d != 0) {
            return None;
        }
        Some(Self { constant: self.constant / d, coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), c / d)).collect() })
    }

    /// Replace `v` by the form `by`.
    pub fn substitute(&self, v: &str, by: &Self) -> Self {
        let c = self.coeff(v);
        if c == 0 {
            return self.clone();
        }
        self.without(v).add(&by.scale(c))
    }

    /// Substitute the given integer values, leaving other variables alone.
    pub fn partial_eval(&self, vals: &BTreeMap<String, i64>) -> Self {
        let mut f = Self::constant(self.constant);
        for (v, c) in &self.coeffs {
            match vals.get(v) {
                Some(x) => f.constant += c * x,
                None => {
                    f.coeffs.insert(v.clone(), *c);
                }
            }
        }
        f
    }

    pub fn eval(&self, vals: &BTreeMap<String, i64>) -> Result<i64, PresError> {
        let f = self.partial_eval(vals);
        match f.coeffs.keys().next() {
            Some(v) => Err(PresError::UnboundParameter(v.clone())),
            None => Ok(f.constant),
        }
    }
}

impl fmt::Display for AffineForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, &c) in &self.coeffs {
            let sign = if c < 0 { "-" } else { "+" };
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if c.abs() == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{}*{v}", c.abs())?;
            }
            first = false;
        }
        if first {
            write!(f, "{}", self.constant)
        } else if self.constant != 0 {
            let sign = if self.constant < 0 { "-" } else { "+" };
            write!(f, " {sign} {}", self.constant.abs())
        } else {
            Ok(())
        }
    }
}

impl Serialize for AffineForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for AffineForm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Self::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// One summation variable of a [`PresDomain`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarRange {
    pub name: String,
    pub lower: Option<AffineForm>,
    pub upper: Option<AffineForm>,
    pub modulus: i64,
    pub residue: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PresDomain {
    pub vars: Vec<VarRange>,
}

impl PresDomain {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append an inner variable.
    pub fn var(mut self, name: &str, lower: Option<AffineForm>, upper: Option<AffineForm>) -> Self {
        self.vars.push(VarRange { name: name.to_string(), lower, upper, modulus: 1, residue: 0 });
        self
    }

    /// Restrict the innermost variable to `i ≡ c (mod d)`.
    pub fn congruence(mut self, d: i64, c: i64) -> Self {
        let v = self.vars.last_mut().expect("congruence needs a variable");
        v.modulus = d;
        v.residue = c;
        self
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn validate(&self) -> Result<(), PresError> {
        for (k, v) in self.vars.iter().enumerate() {
            if v.modulus < 1 || v.residue < 0 || v.residue >= v.modulus {
                return Err(PresError::InvalidDomain(format!("bad congruence on {}", v.name)));
            }
            let later: BTreeSet<&str> = self.vars[k..].iter().map(|w| w.name.as_str()).collect();
            for b in v.lower.iter().chain(v.upper.iter()) {
                if let Some(bad) = b.vars().find(|x| later.contains(x)) {
                    return Err(PresError::InvalidDomain(format!("bound on {} refers to {bad}", v.name)));
                }
            }
        }
        Ok(())
    }

    /// Substitute integer values for free parameters in every bound.
    pub fn with_params(&self, vals: &BTreeMap<String, i64>) -> Self {
        let f = |b: &Option<AffineForm>| b.as_ref().map(|x| x.partial_eval(vals));
        Self {
            vars: self
                .vars
                .iter()
                .map(|v| VarRange { lower: f(&v.lower), upper: f(&v.upper), ..v.clone() })
                .collect(),
        }
    }

    fn var_names(&self) -> BTreeSet<&str> {
        self.vars.iter().map(|v| v.name.as_str()).collect()
    }

    /// Free parameters mentioned by the bounds.
    pub fn params(&self) -> BTreeSet<String> {
        let own = self.var_names();
        self.vars
            .iter()
            .flat_map(|v| v.lower.iter().chain(v.upper.iter()))
            .flat_map(|b| b.vars())
            .filter(|x| !own.contains(x))
            .map(|s| s.to_string())
            .collect()
    }
}

/// `coefficient * L^exponent`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PresTerm {
    pub coefficient: SymA,
    pub exponent: AffineForm,
}

impl PresTerm {
    pub fn new(coefficient: SymA, exponent: AffineForm) -> Self {
        Self { coefficient, exponent }
    }
}

/// A finite sum `sum_j c_j * L^(e_j)` with `c_j` in `A` and `e_j` affine in
/// free integer parameters (stored without constant term).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LSum {
    terms: BTreeMap<AffineForm, SymA>,
}

impl LSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: SymA) -> Self {
        Self::term(c, &AffineForm::constant(0))
    }

    pub fn term(c: SymA, exponent: &AffineForm) -> Self {
        let mut s = Self::zero();
        s.push(c.a_mul(&SymA::l_pow(exponent.constant)), exponent.without_constant());
        s
    }

    fn push(&mut self, c: SymA, e: AffineForm) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e.clone()).or_default();
        *slot = slot.a_add(&c);
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&AffineForm, &SymA)> {
        self.terms.iter()
    }

    pub fn as_constant(&self) -> Option<SymA> {
        match self.terms.len() {
            0 => Some(SymA::zero()),
            1 => self.terms.get(&AffineForm::constant(0)).cloned(),
            _ => None,
        }
    }

    pub fn params(&self) -> BTreeSet<String> {
        self.terms.keys().flat_map(|e| e.vars().map(|s| s.to_string())).collect()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut s = self.clone();
        for (e, c) in &o.terms {
            s.push(c.clone(), e.clone());
        }
        s
    }

    pub fn neg(&self) -> Self {
        Self { terms: self.terms.iter().map(|(e, c)| (e.clone(), c.a_neg())).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut s = Self::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                s.push(c1.a_mul(c2), e1.add(e2));
            }
        }
        s
    }

    pub fn scale(&self, c: &SymA) -> Self {
        self.mul(&Self::constant(c.clone()))
    }

    /// Multiply by `L^e`.
    pub fn shift(&self, e: &AffineForm) -> Self {
        self.mul(&Self::term(SymA::one(), e))
    }

    /// Replace parameter `v` by an affine form.
    pub fn substitute(&self, v: &str, by: &AffineForm) -> Self {
        let mut s = Self::zero();
        for (e, c) in &self.terms {
            let ne = e.substitute(v, by);
            s.push(c.a_mul(&SymA::l_pow(ne.constant)), ne.without_constant());
        }
        s
    }

    /// Substitute integer values for parameters (others stay symbolic).
    pub fn partial_eval(&self, vals: &BTreeMap<String, i64>) -> Self {
        let mut s = Self::zero();
        for (e, c) in &self.terms {
            let ne = e.partial_eval(vals);
            s.push(c.a_mul(&SymA::l_pow(ne.constant)), ne.without_constant());
        }
        s
    }

    /// Value in `A` once every parameter is given.
    pub fn eval(&self, vals: &BTreeMap<String, i64>) -> Result<SymA, PresError> {
        let s = self.partial_eval(vals);
        s.as_constant().ok_or_else(|| PresError::UnboundParameter(s.params().into_iter().next().unwrap_or_default()))
    }

    pub fn nu_q(&self, vals: &BTreeMap<String, i64>, t: &SpecTarget) -> Result<Q, PresError> {
        Ok(self.eval(vals)?.nu_q(t))
    }

    /// Parse the textual form produced by `Display`.
    pub fn parse(s: &str) -> Result<Self, PresError> {
        crate::expr::parse_lsum(s).map_err(|e| PresError::Parse(e.to_string()))
    }
}

impl fmt::Display for LSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                if e.is_constant() {
                    c.to_string()
                } else if *c == SymA::one() {
                    format!("L^({e})")
                } else {
                    format!("({c})*L^({e})")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Serialize for LSum {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `1 / (1 - L^s)` for `s != 0`.
fn geometric_factor(s: i64) -> SymA {
    if s < 0 {
        SymA::inv_one_minus_l_inv((-s) as u32)
    } else {
        SymA::l_pow(-s).a_mul(&SymA::inv_one_minus_l_inv(s as u32)).a_neg()
    }
}

fn align_up(lo: &AffineForm, d: i64, c: i64, name: &str) -> Result<AffineForm, PresError> {
    if d == 1 {
        return Ok(lo.clone());
    }
    if lo.coeffs.values().any(|k| k % d != 0) {
        return Err(PresError::Unsupported(format!("bound {lo} on {name} not aligned with modulus {d}")));
    }
    Ok(lo.add_const((c - lo.constant).rem_euclid(d)))
}

fn align_down(hi: &AffineForm, d: i64, c: i64, name: &str) -> Result<AffineForm, PresError> {
    if d == 1 {
        return Ok(hi.clone());
    }
    if hi.coeffs.values().any(|k| k % d != 0) {
        return Err(PresError::Unsupported(format!("bound {hi} on {name} not aligned with modulus {d}")));
    }
    Ok(hi.add_const(-(hi.constant - c).rem_euclid(d)))
}

/// Sum an [`LSum`] integrand over one variable.
fn sum_var(f: &LSum, v: &VarRange) -> Result<LSum, PresError> {
    let (d, c, name) = (v.modulus, v.residue, v.name.as_str());
    let first = v.lower.as_ref().map(|lo| align_up(lo, d, c, name)).transpose()?;
    let last = v.upper.as_ref().map(|hi| align_down(hi, d, c, name)).transpose()?;
    let mut out = LSum::zero();
    for (exp, coeff) in f.terms() {
        let a = exp.coeff(name);
        let rest = exp.without(name);
        let s = a * d;
        match (&first, &last) {
            (Some(first), Some(last)) => {
                let n = last
                    .sub(first)
                    .div_exact(d)
                    .ok_or_else(|| PresError::Unsupported(format!("range of {name} not aligned")))?
                    .add_const(1);
                if let Some(n) = n.as_constant() {
                    if n <= 0 {
                        continue;
                    }
                    if a == 0 {
                        out = out.add(&LSum::term(coeff.scale(&arith::q_int(n)), &rest));
                        continue;
                    }
                } else if a == 0 {
                    return Err(PresError::Unsupported(format!(
                        "term constant in {name} over a range of length {n}"
                    )));
                }
                // L^(rest + a*first) * (1 - L^(s*n)) / (1 - L^s)
                let g = coeff.a_mul(&geometric_factor(s));
                let e0 = rest.add(&first.scale(a));
                out = out.add(&LSum::term(g.clone(), &e0));
                out = out.sub(&LSum::term(g, &e0.add(&n.scale(s))));
            }
            (Some(first), None) => {
                if a >= 0 {
                    return Err(PresError::NotSummable(format!("exponent coefficient {a} on {name} as {name} -> +inf")));
                }
                out = out.add(&LSum::term(coeff.a_mul(&geometric_factor(s)), &rest.add(&first.scale(a))));
            }
            (None, Some(last)) => {
                if a <= 0 {
                    return Err(PresError::NotSummable(format!("exponent coefficient {a} on {name} as {name} -> -inf")));
                }
                out = out.add(&LSum::term(coeff.a_mul(&geometric_factor(-s)), &rest.add(&last.scale(a))));
            }
            (None, None) => {
                return Err(PresError::NotSummable(format!("{name} is unbounded in both directions")));
            }
        }
    }
    Ok(out)
}

/// Sum of an [`LSum`] integrand over a domain, innermost variable first.
///
/// Finite ranges whose length depends on a parameter are assumed nonempty
/// or empty-by-length (length `>= 0`) for the parameter values of interest.
pub fn sum_lsum(domain: &PresDomain, f: &LSum) -> Result<LSum, PresError> {
    domain.validate()?;
    let mut acc = f.clone();
    for v in domain.vars.iter().rev() {
        acc = sum_var(&acc, v)?;
    }
    Ok(acc)
}

pub fn sum(domain: &PresDomain, term: &PresTerm) -> Result<LSum, PresError> {
    sum_lsum(domain, &LSum::term(term.coefficient.clone(), &term.exponent))
}

/// Whether two 1-variable ranges provably share no point.
fn disjoint_1d(a: &VarRange, b: &VarRange) -> Result<bool, PresError> {
    let g = a.modulus.gcd(&b.modulus);
    if (a.residue - b.residue).rem_euclid(g) != 0 {
        return Ok(true);
    }
    let below = |hi: &Option<AffineForm>, lo: &Option<AffineForm>| match (hi, lo) {
        (Some(h), Some(l)) => h.sub(l).as_constant().map(|k| k < 0),
        _ => Some(false),
    };
    let sep = below(&a.upper, &b.lower).unwrap_or(false) || below(&b.upper, &a.lower).unwrap_or(false);
    if sep {
        return Ok(true);
    }
    // constant bounds: look for a common point explicitly
    let lo = [&a.lower, &b.lower].into_iter().flatten().map(|x| x.as_constant()).collect::<Option<Vec<_>>>();
    let hi = [&a.upper, &b.upper].into_iter().flatten().map(|x| x.as_constant()).collect::<Option<Vec<_>>>();
    if let (Some(lo), Some(hi)) = (lo, hi) {
        let l = lo.into_iter().max();
        let h = hi.into_iter().min();
        let m = a.modulus.lcm(&b.modulus);
        if let (Some(l), Some(h)) = (l, h) {
            return Ok(!(l..=h.min(l + m)).any(|i| {
                i.rem_euclid(a.modulus) == a.residue && i.rem_euclid(b.modulus) == b.residue
            }));
        }
    }
    Ok(false)
}

/// Additive sum over pieces. One-variable pieces are checked for overlap;
/// higher-dimensional pieces are trusted to be disjoint.
pub fn sum_piecewise(pieces: &[(PresDomain, PresTerm)]) -> Result<LSum, PresError> {
    for (i, (d1, _)) in pieces.iter().enumerate() {
        for (d2, _) in &pieces[i + 1..] {
            if d1.dim() == 1 && d2.dim() == 1 && d1.vars[0].name == d2.vars[0].name && !disjoint_1d(&d1.vars[0], &d2.vars[0])? {
                return Err(PresError::OverlapDetected(format!("pieces {i} and a later piece share points")));
            }
        }
    }
    pieces.iter().try_fold(LSum::zero(), |acc, (d, t)| Ok(acc.add(&sum(d, t)?)))
}

fn enumerate_points(
    domain: &PresDomain,
    k: usize,
    cutoff: i64,
    vals: &mut BTreeMap<String, i64>,
    visit: &mut dyn FnMut(&BTreeMap<String, i64>) -> Result<(), PresError>,
) -> Result<(), PresError> {
    if k == domain.vars.len() {
        return visit(vals);
    }
    let v = &domain.vars[k];
    let lo = match &v.lower {
        Some(b) => b.eval(vals)?.max(-cutoff),
        None => -cutoff,
    };
    let hi = match &v.upper {
        Some(b) => b.eval(vals)?.min(cutoff),
        None => cutoff,
    };
    for i in lo..=hi {
        if i.rem_euclid(v.modulus) != v.residue {
            continue;
        }
        vals.insert(v.name.clone(), i);
        enumerate_points(domain, k + 1, cutoff, vals, visit)?;
    }
    vals.remove(&v.name);
    Ok(())
}

/// Partial sum of `nu_q(term)` over the points with all coordinates in
/// `[-cutoff, cutoff]`, and an upper bound on the absolute value of the rest.
///
/// For one variable the bound is the explicit geometric tail; for more
/// variables it is the closed form of the absolute series minus the
/// absolute partial sum.
pub fn evaluate_truncated(
    domain: &PresDomain,
    term: &PresTerm,
    q: &Q,
    cutoff: u32,
    params: &BTreeMap<String, i64>,
) -> Result<(Q, Q), PresError> {
    let t = SpecTarget::new(q.clone()).map_err(|e| PresError::Unsupported(e.to_string()))?;
    domain.validate()?;
    let dom = domain.with_params(params);
    let exp = term.exponent.partial_eval(params);
    let c = term.coefficient.nu_q(&t);
    let cutoff = cutoff as i64;
    let mut partial = Q::zero();
    let mut partial_abs = Q::zero();
    enumerate_points(&dom, 0, cutoff, &mut BTreeMap::new(), &mut |pt| {
        let x = arith::q_pow(q, exp.eval(pt)?);
        partial_abs += &x;
        partial += &c * x;
        Ok(())
    })?;
    partial_abs *= c.abs();

    let tail = if dom.dim() == 1 {
        let v = &dom.vars[0];
        let a = exp.coeff(&v.name);
        let b = exp.without(&v.name).eval(&BTreeMap::new())?;
        let side = |lo: Option<i64>, hi: Option<i64>, up: bool| -> Result<Q, PresError> {
            // the part of the range beyond the cutoff on one side
            let (lo, hi) = if up {
                (Some(lo.map_or(cutoff + 1, |l| l.max(cutoff + 1))), hi)
            } else {
                (lo, Some(hi.map_or(-cutoff - 1, |h| h.min(-cutoff - 1))))
            };
            match (lo, hi) {
                (Some(l), Some(h)) => Ok((l..=h)
                    .filter(|i| i.rem_euclid(v.modulus) == v.residue)
                    .map(|i| arith::q_pow(q, a * i + b))
                    .fold(Q::zero(), |s, x| s + x)),
                (Some(l), None) if a < 0 => Ok(arith::q_pow(q, a * l + b) / (Q::from_integer(1.into()) - arith::q_pow(q, a))),
                (None, Some(h)) if a > 0 => Ok(arith::q_pow(q, a * h + b) / (Q::from_integer(1.into()) - arith::q_pow(q, -a))),
                _ => Err(PresError::NotSummable(format!("tail in {}", v.name))),
            }
        };
        let lo = v.lower.as_ref().map(|x| x.eval(&BTreeMap::new())).transpose()?;
        let hi = v.upper.as_ref().map(|x| x.eval(&BTreeMap::new())).transpose()?;
        let up = if hi.is_some_and(|h| h <= cutoff) { Q::zero() } else { side(lo, hi, true)? };
        let down = if lo.is_some_and(|l| l >= -cutoff) { Q::zero() } else { side(lo, hi, false)? };
        c.abs() * (up + down)
    } else {
        let whole = sum(&dom, &PresTerm::new(SymA::one(), exp.clone()))?.eval(&BTreeMap::new())?.nu_q(&t);
        c.abs() * whole - partial_abs
    };
    Ok((partial, tail))
}

#[cfg(test)]
mod tests;
