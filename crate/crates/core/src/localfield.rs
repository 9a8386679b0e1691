//! Precision-budgeted arithmetic in `Q_p` and `F_p((t))`.
//!
//! An [`LFElem`] is either *exact* (the image of a rational number, or a
//! finite Laurent polynomial in `t`) or known only modulo a power of the
//! uniformizer. Inexact elements carry their significant digits explicitly,
//! so every operation propagates precision and refuses to invent digits:
//! when cancellation leaves nothing determined the result is
//! [`LocalFieldError::PrecisionExhausted`].
//!
//! The uniformizer is `p` in `Q_p` and `t` in `F_p((t))`.

use std::cmp::min;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{self, Q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LocalFieldError {
    #[error("{0} is not a prime")]
    InvalidPrime(u64),
    #[error("precision must be at least 1")]
    InvalidPrecision,
    #[error("division by zero")]
    DivisionByZero,
    #[error("no significant digit determined (value is O(uniformizer^{ord_at_least}))")]
    PrecisionExhausted { ord_at_least: i64 },
    #[error("no simple root to lift: {0}")]
    NoSimpleRoot(String),
    #[error("{0} has no image in the residue characteristic")]
    NotIntegral(String),
    #[error("elements live in different fields")]
    FieldMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldKind {
    /// `Q_p`
    CharZero,
    /// `F_p((t))`
    EqualChar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LocalFieldSpec {
    pub kind: FieldKind,
    pub prime: u64,
    pub precision: u32,
}

impl LocalFieldSpec {
    pub fn new(kind: FieldKind, prime: u64, precision: u32) -> Result<Self, LocalFieldError> {
        if !arith::is_prime(prime) {
            return Err(LocalFieldError::InvalidPrime(prime));
        }
        if precision == 0 {
            return Err(LocalFieldError::InvalidPrecision);
        }
        Ok(Self { kind, prime, precision })
    }

    pub fn qp(prime: u64, precision: u32) -> Result<Self, LocalFieldError> {
        Self::new(FieldKind::CharZero, prime, precision)
    }

    pub fn fpt(prime: u64, precision: u32) -> Result<Self, LocalFieldError> {
        Self::new(FieldKind::EqualChar, prime, precision)
    }

    pub fn with_precision(self, precision: u32) -> Self {
        Self { precision, ..self }
    }

    fn compatible(&self, other: &Self) -> bool {
        self.kind == other.kind && self.prime == other.prime
    }
}

impl fmt::Display for LocalFieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FieldKind::CharZero => write!(f, "Q_{} (N={})", self.prime, self.precision),
            FieldKind::EqualChar => write!(f, "F_{}((t)) (N={})", self.prime, self.precision),
        }
    }
}

/// An integer extended by `+∞` as its maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ExtInt {
    Fin(i64),
    Inf,
}

impl ExtInt {
    pub fn finite(self) -> Option<i64> {
        match self {
            ExtInt::Fin(v) => Some(v),
            ExtInt::Inf => None,
        }
    }
}

impl fmt::Display for ExtInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtInt::Fin(v) => write!(f, "{v}"),
            ExtInt::Inf => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum ExactVal {
    /// Characteristic zero: the rational itself.
    Rat(Q),
    /// Equal characteristic: finite digit string starting at the valuation.
    Series(Vec<u32>),
}

/// A truncated local-field element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LFElem {
    spec: LocalFieldSpec,
    valuation: ExtInt,
    digits: Vec<u32>,
    exact: Option<ExactVal>,
}

fn digits_to_int(d: &[u32], p: u64) -> BigInt {
    let bp = BigInt::from(p);
    d.iter().rev().fold(BigInt::zero(), |acc, &x| acc * &bp + BigInt::from(x))
}

fn int_to_digits(n: &BigInt, p: u64, count: usize) -> Vec<u32> {
    let bp = BigInt::from(p);
    let mut n = n.mod_floor(&arith::int_pow(p, count as u32));
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let (q, r) = n.div_mod_floor(&bp);
        out.push(r.to_u32().unwrap());
        n = q;
    }
    out
}

/// Strip leading zero digits; returns the shift and the remaining digits.
fn normalize_digits(d: &[u32]) -> Option<(usize, Vec<u32>)> {
    let first = d.iter().position(|&x| x != 0)?;
    Some((first, d[first..].to_vec()))
}

fn series_mul(a: &[u32], b: &[u32], p: u64, len: Option<usize>) -> Vec<u32> {
    let n = len.unwrap_or(a.len() + b.len() - 1);
    let mut out = vec![0u64; n];
    for (i, &x) in a.iter().enumerate() {
        if i >= n {
            break;
        }
        for (j, &y) in b.iter().enumerate() {
            if i + j >= n {
                break;
            }
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p;
        }
    }
    out.into_iter().map(|x| x as u32).collect()
}

fn inv_mod_p(a: u64, p: u64) -> u64 {
    arith::mod_inv(&BigInt::from(a), &BigInt::from(p))
        .and_then(|x| x.to_u64())
        .expect("unit digit is invertible")
}

/// Power-series inverse of a unit series modulo t^len.
fn series_inv(a: &[u32], p: u64, len: usize) -> Vec<u32> {
    let a0inv = inv_mod_p(a[0] as u64, p);
    let mut out = vec![0u32; len];
    for k in 0..len {
        let mut s: u64 = if k == 0 { 1 } else { 0 };
        for i in 1..=k {
            if i < a.len() {
                s = (s + p * p - (a[i] as u64 * out[k - i] as u64) % p) % p;
            }
        }
        out[k] = (s * a0inv % p) as u32;
    }
    out
}

impl LFElem {
    pub fn zero(spec: LocalFieldSpec) -> Self {
        Self { spec, valuation: ExtInt::Inf, digits: Vec::new(), exact: Some(ExactVal::Rat(Q::zero())) }
            .fix_zero()
    }

    fn fix_zero(mut self) -> Self {
        if self.spec.kind == FieldKind::EqualChar && self.valuation == ExtInt::Inf {
            self.exact = Some(ExactVal::Series(Vec::new()));
        }
        self
    }

    pub fn one(spec: LocalFieldSpec) -> Self {
        Self::embed_rational(&Q::one(), spec).expect("1 embeds everywhere")
    }

    /// Image of a rational number; exact. In `F_p((t))` the rational is
    /// reduced modulo `p` first.
    pub fn embed_rational(r: &Q, spec: LocalFieldSpec) -> Result<Self, LocalFieldError> {
        if !arith::is_prime(spec.prime) {
            return Err(LocalFieldError::InvalidPrime(spec.prime));
        }
        match spec.kind {
            FieldKind::CharZero => Ok(Self::from_exact_rat(r.clone(), spec)),
            FieldKind::EqualChar => {
                let c = arith::rat_mod_p(r, spec.prime)
                    .ok_or_else(|| LocalFieldError::NotIntegral(arith::fmt_q(r)))?;
                Ok(Self::from_series(0, vec![c as u32], spec))
            }
        }
    }

    pub fn embed_int(n: i64, spec: LocalFieldSpec) -> Result<Self, LocalFieldError> {
        Self::embed_rational(&arith::q_int(n), spec)
    }

    /// The uniformizer: `p` in `Q_p`, `t` in `F_p((t))`.
    pub fn uniformizer(spec: LocalFieldSpec) -> Self {
        match spec.kind {
            FieldKind::CharZero => Self::from_exact_rat(arith::q_int(spec.prime as i64), spec),
            FieldKind::EqualChar => Self::from_series(1, vec![1], spec),
        }
    }

    fn from_exact_rat(r: Q, spec: LocalFieldSpec) -> Self {
        if r.is_zero() {
            return Self { spec, valuation: ExtInt::Inf, digits: Vec::new(), exact: Some(ExactVal::Rat(r)) };
        }
        let v = arith::rat_val(&r, spec.prime);
        let mut e = Self { spec, valuation: ExtInt::Fin(v), digits: Vec::new(), exact: Some(ExactVal::Rat(r)) };
        e.digits = e.unit_digits(spec.precision as usize);
        e
    }

    /// Exact element `t^v * (d0 + d1 t + ...)` of `F_p((t))`.
    fn from_series(v: i64, d: Vec<u32>, spec: LocalFieldSpec) -> Self {
        match normalize_digits(&d) {
            None => Self {
                spec,
                valuation: ExtInt::Inf,
                digits: Vec::new(),
                exact: Some(ExactVal::Series(Vec::new())),
            },
            Some((shift, mut rest)) => {
                while rest.last() == Some(&0) {
                    rest.pop();
                }
                let mut e = Self {
                    spec,
                    valuation: ExtInt::Fin(v + shift as i64),
                    digits: Vec::new(),
                    exact: Some(ExactVal::Series(rest)),
                };
                e.digits = e.unit_digits(spec.precision as usize);
                e
            }
        }
    }

    /// Exact element of `F_p((t))` given by a Laurent polynomial in `t`
    /// with integer coefficients (reduced mod p), lowest power `low`.
    pub fn series_exact(low: i64, coeffs: &[i64], spec: LocalFieldSpec) -> Self {
        let p = spec.prime as i64;
        let d: Vec<u32> = coeffs.iter().map(|c| c.rem_euclid(p) as u32).collect();
        Self::from_series(low, d, spec)
    }

    /// Exact representative of the residue class `n mod ϖ^abs`: the integer
    /// `n` in characteristic zero, the digit polynomial of `n` in base `p` otherwise.
    pub fn residue_rep(n: &BigInt, abs: u32, spec: LocalFieldSpec) -> Self {
        match spec.kind {
            FieldKind::CharZero => Self::embed_rational(&Q::from_integer(n.clone()), spec).expect("integers embed"),
            FieldKind::EqualChar => {
                let d = int_to_digits(n, spec.prime, abs as usize);
                Self::series_exact(0, &d.iter().map(|&x| x as i64).collect::<Vec<_>>(), spec)
            }
        }
    }

    /// Inexact element `uniformizer^v * (d0 + d1 ϖ + ...) + O(ϖ^(v+len))`.
    /// Leading zeros are absorbed into the valuation; all-zero digits give
    /// `PrecisionExhausted`.
    pub fn from_digits(valuation: i64, digits: &[u32], spec: LocalFieldSpec) -> Result<Self, LocalFieldError> {
        let p = spec.prime as u32;
        if digits.iter().any(|&d| d >= p) {
            return Err(LocalFieldError::NotIntegral(format!("digit >= {p}")));
        }
        let abs = valuation + digits.len() as i64;
        match normalize_digits(digits) {
            None => Err(LocalFieldError::PrecisionExhausted { ord_at_least: abs }),
            Some((shift, rest)) => {
                let v = valuation + shift as i64;
                let keep = min(rest.len(), spec.precision as usize);
                Ok(Self { spec, valuation: ExtInt::Fin(v), digits: rest[..keep].to_vec(), exact: None })
            }
        }
    }

    /// Inexact element from an integer known modulo `p^abs_prec`
    /// (characteristic zero) or from its digit expansion (equal characteristic).
    pub fn from_residue(n: &BigInt, abs_prec: u32, spec: LocalFieldSpec) -> Result<Self, LocalFieldError> {
        let d = int_to_digits(n, spec.prime, abs_prec as usize);
        Self::from_digits(0, &d, spec)
    }

    pub fn spec(&self) -> LocalFieldSpec {
        self.spec
    }

    pub fn valuation(&self) -> ExtInt {
        self.valuation
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// True only for the exact zero.
    pub fn is_zero(&self) -> bool {
        self.valuation == ExtInt::Inf
    }

    pub fn ord(&self) -> ExtInt {
        self.valuation
    }

    /// Angular component: the leading digit, with `ac(0) = 0`.
    pub fn ac(&self) -> u32 {
        self.digits.first().copied().unwrap_or(0)
    }

    /// Number of significant digits known, `None` when exact.
    pub fn relative_precision(&self) -> Option<usize> {
        if self.exact.is_some() {
            None
        } else {
            Some(self.digits.len())
        }
    }

    /// Absolute precision: the element is known modulo `ϖ^abs`.
    pub fn absolute_precision(&self) -> Option<i64> {
        match (self.relative_precision(), self.valuation) {
            (Some(r), ExtInt::Fin(v)) => Some(v + r as i64),
            _ => None,
        }
    }

    /// The exact rational value, for exact characteristic-zero elements.
    pub fn as_rational(&self) -> Option<&Q> {
        match &self.exact {
            Some(ExactVal::Rat(r)) => Some(r),
            _ => None,
        }
    }

    fn val_fin(&self) -> i64 {
        self.valuation.finite().expect("nonzero element")
    }

    /// First `count` digits of the unit part (exact elements expand lazily).
    fn unit_digits(&self, count: usize) -> Vec<u32> {
        match &self.exact {
            None => {
                debug_assert!(count <= self.digits.len());
                self.digits[..count].to_vec()
            }
            Some(ExactVal::Rat(r)) => {
                let p = self.spec.prime;
                let v = self.val_fin();
                let u = r * arith::q_pow(&arith::q_int(p as i64), -v);
                let m = arith::int_pow(p, count as u32);
                let inv = arith::mod_inv(&u.denom().mod_floor(&m), &m).expect("unit denominator");
                int_to_digits(&(u.numer() * inv), p, count)
            }
            Some(ExactVal::Series(d)) => {
                let mut out = d.clone();
                out.resize(count.max(d.len()), 0);
                out.truncate(count);
                out
            }
        }
    }

    /// Digits of the value modulo `ϖ^abs`, aligned to start at `lo`.
    fn aligned_digits(&self, lo: i64, abs: i64) -> Vec<u32> {
        let width = (abs - lo) as usize;
        let mut out = vec![0u32; width];
        if let ExtInt::Fin(v) = self.valuation {
            if v < abs {
                let count = (abs - v) as usize;
                let u = self.unit_digits(count);
                for (i, d) in u.into_iter().enumerate() {
                    out[(v - lo) as usize + i] = d;
                }
            }
        }
        out
    }

    fn check(&self, other: &Self) -> Result<(), LocalFieldError> {
        if self.spec.compatible(&other.spec) {
            Ok(())
        } else {
            Err(LocalFieldError::FieldMismatch)
        }
    }

    fn result_spec(&self, other: &Self) -> LocalFieldSpec {
        self.spec.with_precision(self.spec.precision.max(other.spec.precision))
    }

    pub fn add(&self, other: &Self) -> Result<Self, LocalFieldError> {
        self.check(other)?;
        let spec = self.result_spec(other);
        if self.is_zero() && self.is_exact() {
            return Ok(Self { spec, ..other.clone() });
        }
        if other.is_zero() && other.is_exact() {
            return Ok(Self { spec, ..self.clone() });
        }
        match (&self.exact, &other.exact) {
            (Some(ExactVal::Rat(a)), Some(ExactVal::Rat(b))) => return Ok(Self::from_exact_rat(a + b, spec)),
            (Some(ExactVal::Series(a)), Some(ExactVal::Series(b))) => {
                let (va, vb) = (self.val_fin(), other.val_fin());
                let lo = va.min(vb);
                let len = ((va + a.len() as i64).max(vb + b.len() as i64) - lo) as usize;
                let p = spec.prime as u32;
                let mut out = vec![0u32; len];
                for (i, &d) in a.iter().enumerate() {
                    out[(va - lo) as usize + i] = d;
                }
                for (i, &d) in b.iter().enumerate() {
                    let k = (vb - lo) as usize + i;
                    out[k] = (out[k] + d) % p;
                }
                return Ok(Self::from_series(lo, out, spec));
            }
            _ => {}
        }
        let abs = match (self.absolute_precision(), other.absolute_precision()) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => unreachable!("exact cases handled above"),
        };
        let lo = self.val_fin().min(other.val_fin());
        let (da, db) = (self.aligned_digits(lo, abs), other.aligned_digits(lo, abs));
        let p = spec.prime;
        let sum: Vec<u32> = match spec.kind {
            FieldKind::CharZero => {
                let s = digits_to_int(&da, p) + digits_to_int(&db, p);
                int_to_digits(&s, p, da.len())
            }
            FieldKind::EqualChar => da.iter().zip(&db).map(|(x, y)| (x + y) % p as u32).collect(),
        };
        Self::from_digits(lo, &sum, spec)
    }

    pub fn neg(&self) -> Self {
        let spec = self.spec;
        match &self.exact {
            Some(ExactVal::Rat(r)) => Self::from_exact_rat(-r, spec),
            Some(ExactVal::Series(d)) => {
                if self.is_zero() {
                    return self.clone();
                }
                let p = spec.prime as u32;
                Self::from_series(self.val_fin(), d.iter().map(|&x| (p - x) % p).collect(), spec)
            }
            None => {
                let p = spec.prime;
                let r = self.digits.len();
                let digits = match spec.kind {
                    FieldKind::CharZero => int_to_digits(&-digits_to_int(&self.digits, p), p, r),
                    FieldKind::EqualChar => self.digits.iter().map(|&x| (p as u32 - x) % p as u32).collect(),
                };
                Self { spec, valuation: self.valuation, digits, exact: None }
            }
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LocalFieldError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, LocalFieldError> {
        self.check(other)?;
        let spec = self.result_spec(other);
        if (self.is_zero() && self.is_exact()) || (other.is_zero() && other.is_exact()) {
            return Ok(Self::zero(spec));
        }
        match (&self.exact, &other.exact) {
            (Some(ExactVal::Rat(a)), Some(ExactVal::Rat(b))) => return Ok(Self::from_exact_rat(a * b, spec)),
            (Some(ExactVal::Series(a)), Some(ExactVal::Series(b))) => {
                let d = series_mul(a, b, spec.prime, None);
                return Ok(Self::from_series(self.val_fin() + other.val_fin(), d, spec));
            }
            _ => {}
        }
        let r = [self.relative_precision(), other.relative_precision(), Some(spec.precision as usize)]
            .into_iter()
            .flatten()
            .min()
            .unwrap();
        let v = self.val_fin() + other.val_fin();
        let (ua, ub) = (self.unit_digits(r), other.unit_digits(r));
        let p = spec.prime;
        let digits = match spec.kind {
            FieldKind::CharZero => int_to_digits(&(digits_to_int(&ua, p) * digits_to_int(&ub, p)), p, r),
            FieldKind::EqualChar => series_mul(&ua, &ub, p, Some(r)),
        };
        Ok(Self { spec, valuation: ExtInt::Fin(v), digits, exact: None })
    }

    pub fn inv(&self) -> Result<Self, LocalFieldError> {
        if self.is_zero() {
            return Err(LocalFieldError::DivisionByZero);
        }
        let spec = self.spec;
        let p = spec.prime;
        let v = self.val_fin();
        match &self.exact {
            Some(ExactVal::Rat(r)) => return Ok(Self::from_exact_rat(r.recip(), spec)),
            Some(ExactVal::Series(d)) if d.len() == 1 => {
                return Ok(Self::from_series(-v, vec![inv_mod_p(d[0] as u64, p) as u32], spec));
            }
            _ => {}
        }
        let r = self.relative_precision().unwrap_or(spec.precision as usize).min(spec.precision as usize);
        let u = self.unit_digits(r);
        let digits = match spec.kind {
            FieldKind::CharZero => {
                let m = arith::int_pow(p, r as u32);
                let inv = arith::mod_inv(&digits_to_int(&u, p), &m).expect("unit");
                int_to_digits(&inv, p, r)
            }
            FieldKind::EqualChar => series_inv(&u, p, r),
        };
        Ok(Self { spec, valuation: ExtInt::Fin(-v), digits, exact: None })
    }

    pub fn pow(&self, n: u32) -> Result<Self, LocalFieldError> {
        let mut acc = Self::one(self.spec);
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Forget everything beyond absolute precision `abs` (requires `abs > ord`).
    pub fn truncate(&self, abs: i64) -> Result<Self, LocalFieldError> {
        match self.valuation {
            ExtInt::Inf => Err(LocalFieldError::PrecisionExhausted { ord_at_least: abs }),
            ExtInt::Fin(v) if abs <= v => Err(LocalFieldError::PrecisionExhausted { ord_at_least: abs }),
            ExtInt::Fin(v) => {
                let have = self.relative_precision().unwrap_or(usize::MAX);
                let count = min(have, (abs - v) as usize).min(self.spec.precision as usize);
                Ok(Self { spec: self.spec, valuation: self.valuation, digits: self.unit_digits(count), exact: None })
            }
        }
    }

    /// The value modulo `ϖ^abs` as an integer (characteristic zero) or as
    /// the digit-encoded integer `Σ d_i p^i` (equal characteristic).
    /// Requires the element to be integral and known to `abs`.
    pub fn residue_int(&self, abs: u32) -> Option<BigInt> {
        match self.valuation {
            ExtInt::Inf => Some(BigInt::zero()),
            ExtInt::Fin(v) if v < 0 => None,
            ExtInt::Fin(_) => {
                if let Some(a) = self.absolute_precision() {
                    if a < abs as i64 {
                        return None;
                    }
                }
                Some(digits_to_int(&self.aligned_digits(0, abs as i64), self.spec.prime))
            }
        }
    }

    /// Compare on the commonly determined prefix of absolute digits.
    pub fn agrees_with(&self, other: &Self) -> bool {
        let abs = match (self.absolute_precision(), other.absolute_precision()) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => return self.sub(other).map(|d| d.is_zero()).unwrap_or(false),
        };
        let lo = [self.valuation, other.valuation, ExtInt::Fin(abs)]
            .into_iter()
            .filter_map(ExtInt::finite)
            .min()
            .unwrap();
        self.aligned_digits(lo, abs) == other.aligned_digits(lo, abs)
    }
}

impl fmt::Display for LFElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sym = match self.spec.kind {
            FieldKind::CharZero => self.spec.prime.to_string(),
            FieldKind::EqualChar => "t".to_string(),
        };
        match self.valuation {
            ExtInt::Inf => write!(f, "0"),
            ExtInt::Fin(v) => {
                let ds: Vec<String> = self.digits.iter().map(|d| d.to_string()).collect();
                write!(f, "{sym}^{v}*[{}]", ds.join(" "))?;
                match self.absolute_precision() {
                    Some(a) => write!(f, " + O({sym}^{a})"),
                    None => Ok(()),
                }
            }
        }
    }
}

/// A valued-field value as seen by finite-precision interpretation:
/// either a known element or merely "divisible by ϖ^a".
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Approx {
    Known(LFElem),
    AtLeast(i64),
}

impl From<LFElem> for Approx {
    fn from(e: LFElem) -> Self {
        Approx::Known(e)
    }
}

fn lift(r: Result<LFElem, LocalFieldError>) -> Result<Approx, LocalFieldError> {
    match r {
        Ok(e) => Ok(Approx::Known(e)),
        Err(LocalFieldError::PrecisionExhausted { ord_at_least }) => Ok(Approx::AtLeast(ord_at_least)),
        Err(e) => Err(e),
    }
}

impl Approx {
    /// The ball `n + ϖ^abs O` for an integral residue `n`
    /// (for `F_p((t))`, `n` encodes digits in base `p`).
    pub fn ball(n: &BigInt, abs: u32, spec: LocalFieldSpec) -> Self {
        lift(LFElem::from_residue(n, abs, spec)).expect("digits are in range")
    }

    pub fn add(&self, other: &Self) -> Result<Self, LocalFieldError> {
        match (self, other) {
            (Approx::Known(a), Approx::Known(b)) => lift(a.add(b)),
            (Approx::AtLeast(a), Approx::AtLeast(b)) => Ok(Approx::AtLeast(*a.min(b))),
            (Approx::AtLeast(a), Approx::Known(b)) | (Approx::Known(b), Approx::AtLeast(a)) => match b.valuation {
                ExtInt::Fin(v) if v < *a => lift(b.truncate(*a)),
                _ => Ok(Approx::AtLeast(*a)),
            },
        }
    }

    pub fn neg(&self) -> Self {
        match self {
            Approx::Known(a) => Approx::Known(a.neg()),
            Approx::AtLeast(a) => Approx::AtLeast(*a),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LocalFieldError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, LocalFieldError> {
        match (self, other) {
            (Approx::Known(a), Approx::Known(b)) => lift(a.mul(b)),
            (Approx::AtLeast(a), Approx::AtLeast(b)) => Ok(Approx::AtLeast(a + b)),
            (Approx::AtLeast(a), Approx::Known(b)) | (Approx::Known(b), Approx::AtLeast(a)) => match b.valuation {
                ExtInt::Inf if b.is_exact() => Ok(Approx::Known(b.clone())),
                ExtInt::Fin(v) => Ok(Approx::AtLeast(a + v)),
                ExtInt::Inf => Ok(Approx::AtLeast(*a)),
            },
        }
    }

    pub fn pow(&self, n: u32) -> Result<Self, LocalFieldError> {
        match self {
            Approx::Known(a) => lift(a.pow(n)),
            Approx::AtLeast(a) if n == 0 => {
                let _ = a;
                Err(LocalFieldError::PrecisionExhausted { ord_at_least: 0 })
            }
            Approx::AtLeast(a) => Ok(Approx::AtLeast(a * n as i64)),
        }
    }

    /// Bounds `(lo, hi)` on the valuation of every point of the ball.
    pub fn ord_bounds(&self) -> (ExtInt, ExtInt) {
        match self {
            Approx::Known(e) => (e.ord(), e.ord()),
            Approx::AtLeast(a) => (ExtInt::Fin(*a), ExtInt::Inf),
        }
    }

    pub fn ac(&self) -> Option<u32> {
        match self {
            Approx::Known(e) => Some(e.ac()),
            Approx::AtLeast(_) => None,
        }
    }
}

/// Integer-coefficient polynomial, ascending coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPoly(pub Vec<BigInt>);

impl IntPoly {
    pub fn from_i64(c: &[i64]) -> Self {
        IntPoly(c.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn eval_mod(&self, x: &BigInt, m: &BigInt) -> BigInt {
        self.0.iter().rev().fold(BigInt::zero(), |acc, c| (acc * x + c).mod_floor(m))
    }

    pub fn derivative(&self) -> IntPoly {
        IntPoly(self.0.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect())
    }
}

/// Lift a simple root `x0` of `f` modulo `p` to a root modulo `ϖ^N` by
/// Newton iteration with doubling precision.
pub fn hensel_lift(f: &IntPoly, x0: u64, spec: LocalFieldSpec) -> Result<LFElem, LocalFieldError> {
    if !arith::is_prime(spec.prime) {
        return Err(LocalFieldError::InvalidPrime(spec.prime));
    }
    let p = spec.prime;
    let bp = BigInt::from(p);
    let x0b = BigInt::from(x0 % p);
    let df = f.derivative();
    if !f.eval_mod(&x0b, &bp).is_zero() {
        return Err(LocalFieldError::NoSimpleRoot(format!("f({x0}) is not 0 mod {p}")));
    }
    if df.eval_mod(&x0b, &bp).is_zero() {
        return Err(LocalFieldError::NoSimpleRoot(format!("f'({x0}) is 0 mod {p}")));
    }
    match spec.kind {
        // f has constant coefficients, so a root mod p is already a root in F_p.
        FieldKind::EqualChar => LFElem::embed_int(x0b.to_i64().unwrap(), spec),
        FieldKind::CharZero => {
            let n = spec.precision;
            let mut y = x0b;
            let mut prec = 1u32;
            while prec < n {
                prec = (prec * 2).min(n);
                let m = arith::int_pow(p, prec);
                let fy = f.eval_mod(&y, &m);
                let dfy = df.eval_mod(&y, &m);
                let inv = arith::mod_inv(&dfy, &m).expect("derivative is a unit");
                y = (&y - fy * inv).mod_floor(&m);
            }
            let m = arith::int_pow(p, n);
            debug_assert!(f.eval_mod(&y, &m).is_zero());
            LFElem::from_residue(&y, n, spec)
        }
    }
}

/// All roots of `f` in `F_p` that are simple, for convenience.
pub fn simple_roots_mod_p(f: &IntPoly, p: u64) -> Vec<u64> {
    let bp = BigInt::from(p);
    let df = f.derivative();
    (0..p)
        .filter(|&x| {
            let bx = BigInt::from(x);
            f.eval_mod(&bx, &bp).is_zero() && !df.eval_mod(&bx, &bp).is_zero()
        })
        .collect()
}
