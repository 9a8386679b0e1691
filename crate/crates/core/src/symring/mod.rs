//! The value ring `A = Z[L, L^-1, 1/(1 - L^-i)]`, tensored with `Q`.
//!
//! Elements are stored as `L^low * P(L) / prod_d Phi_d(L)^e_d` where `Phi_d`
//! is the d-th cyclotomic polynomial, `P(0) != 0` and no `Phi_d` with
//! `e_d > 0` divides `P`. Since the `Phi_d` are irreducible this is a unique
//! representation, so structural equality is equality in `A`.
//!
//! Display re-expresses the denominator as a product of `(1 - L^-i)`
//! factors.

pub mod poly;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::arith::{self, Q};
use poly::{cyclotomic, isolate_roots_above, squarefree_decomposition, QPoly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymError {
    #[error("{0} is not invertible in A")]
    NotInvertibleInA(String),
    #[error("specialization requires q > 1, got {0}")]
    BadTarget(String),
    #[error("cannot parse ring element: {0}")]
    Parse(String),
}

/// An element of `A ⊗ Q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymA {
    low: i64,
    num: QPoly,
    den: BTreeMap<u32, u32>,
}

/// A specialization point `q > 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecTarget {
    q: Q,
}

impl SpecTarget {
    pub fn new(q: Q) -> Result<Self, SymError> {
        if q > Q::one() {
            Ok(Self { q })
        } else {
            Err(SymError::BadTarget(arith::fmt_q(&q)))
        }
    }

    pub fn int(q: u64) -> Result<Self, SymError> {
        Self::new(arith::q_int(q as i64))
    }

    pub fn q(&self) -> &Q {
        &self.q
    }
}

impl SymA {
    pub fn zero() -> Self {
        Self { low: 0, num: QPoly::zero(), den: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::from_q(Q::one())
    }

    pub fn from_q(c: Q) -> Self {
        Self { low: 0, num: QPoly::constant(c), den: BTreeMap::new() }.canonical()
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_q(arith::q_int(n))
    }

    /// `L^k`
    pub fn l_pow(k: i64) -> Self {
        Self { low: k, num: QPoly::one(), den: BTreeMap::new() }
    }

    /// `c * L^k`
    pub fn monomial(c: Q, k: i64) -> Self {
        Self { low: k, num: QPoly::constant(c), den: BTreeMap::new() }.canonical()
    }

    /// `1 - L^-i`, `i >= 1`.
    pub fn one_minus_l_inv(i: u32) -> Self {
        let p = QPoly::monomial(Q::one(), i as usize).sub(&QPoly::one());
        Self { low: -(i as i64), num: p, den: BTreeMap::new() }.canonical()
    }

    /// `1 / (1 - L^-i)`, `i >= 1`.
    pub fn inv_one_minus_l_inv(i: u32) -> Self {
        let den = (1..=i).filter(|d| i.is_multiple_of(*d)).map(|d| (d, 1)).collect();
        Self { low: i as i64, num: QPoly::one(), den }.canonical()
    }

    /// Laurent polynomial `sum c_k L^k` from `(k, c_k)` pairs.
    pub fn laurent(terms: &[(i64, Q)]) -> Self {
        terms.iter().fold(Self::zero(), |acc, (k, c)| acc.a_add(&Self::monomial(c.clone(), *k)))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The value as a rational constant, if it is one.
    pub fn as_constant(&self) -> Option<Q> {
        if self.is_zero() {
            return Some(Q::zero());
        }
        (self.low == 0 && self.num.degree() == Some(0) && self.den.is_empty()).then(|| self.num.lead())
    }

    /// Upper bound on the number of points where a nonzero element can
    /// vanish: the degree of its cleared numerator.
    pub fn cleared_degree(&self) -> usize {
        self.num.degree().unwrap_or(0)
    }

    fn canonical(mut self) -> Self {
        if self.num.is_zero() {
            return Self::zero();
        }
        let k = self.num.low_order();
        if k > 0 {
            self.num = self.num.shift_down(k);
            self.low += k as i64;
        }
        let ds: Vec<u32> = self.den.keys().copied().collect();
        for d in ds {
            let phi = cyclotomic(d);
            loop {
                let e = self.den[&d];
                if e == 0 {
                    break;
                }
                match self.num.exact_div(&phi) {
                    Some(q) => {
                        self.num = q;
                        self.den.insert(d, e - 1);
                    }
                    None => break,
                }
            }
        }
        self.den.retain(|_, e| *e > 0);
        self
    }

    /// Numerator polynomial of `self` over the common denominator `den`.
    fn lift_to(&self, den: &BTreeMap<u32, u32>) -> QPoly {
        let mut p = self.num.clone();
        for (&d, &e) in den {
            let have = self.den.get(&d).copied().unwrap_or(0);
            if e > have {
                p = p.mul(&cyclotomic(d).pow(e - have));
            }
        }
        p
    }

    pub fn a_add(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let mut den = self.den.clone();
        for (&d, &e) in &o.den {
            let slot = den.entry(d).or_insert(0);
            *slot = (*slot).max(e);
        }
        let low = self.low.min(o.low);
        let a = self.lift_to(&den).shift_up((self.low - low) as usize);
        let b = o.lift_to(&den).shift_up((o.low - low) as usize);
        Self { low, num: a.add(&b), den }.canonical()
    }

    pub fn a_neg(&self) -> Self {
        Self { low: self.low, num: self.num.neg(), den: self.den.clone() }
    }

    pub fn a_sub(&self, o: &Self) -> Self {
        self.a_add(&o.a_neg())
    }

    pub fn a_mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut den = self.den.clone();
        for (&d, &e) in &o.den {
            *den.entry(d).or_insert(0) += e;
        }
        Self { low: self.low + o.low, num: self.num.mul(&o.num), den }.canonical()
    }

    pub fn scale(&self, c: &Q) -> Self {
        self.a_mul(&Self::from_q(c.clone()))
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::one(), |acc, _| acc.a_mul(self))
    }

    /// Cyclotomic factorization `c * prod Phi_d^f_d` of the numerator
    /// polynomial, if it has one.
    fn cyclotomic_numerator(&self) -> Option<BTreeMap<u32, u32>> {
        let mut p = self.num.clone();
        let mut out = BTreeMap::new();
        let deg = p.degree()?;
        let limit = 2 * (deg as u32) * (deg as u32) + 2;
        let mut d = 1;
        while p.degree()? > 0 && d <= limit {
            if poly::totient(d) as usize > p.degree()? {
                d += 1;
                continue;
            }
            let phi = cyclotomic(d);
            while let Some(q) = p.exact_div(&phi) {
                p = q;
                *out.entry(d).or_insert(0) += 1;
            }
            d += 1;
        }
        (p.degree()? == 0).then_some(out)
    }

    /// Whether `self` is a unit: `c * L^k * prod (1 - L^-i)^(±m_i)`.
    pub fn is_unit(&self) -> bool {
        !self.is_zero() && self.cyclotomic_numerator().is_some()
    }

    pub fn inverse(&self) -> Result<Self, SymError> {
        let f = self.cyclotomic_numerator().filter(|_| !self.is_zero());
        let f = f.ok_or_else(|| SymError::NotInvertibleInA(self.to_string()))?;
        let mut num = QPoly::constant(self.num.lead().recip());
        for (&d, &e) in &self.den {
            num = num.mul(&cyclotomic(d).pow(e));
        }
        // self.num = lead * prod Phi_d^f_d
        Ok(Self { low: -self.low, num, den: f }.canonical())
    }

    /// `x / d` for a unit `d`.
    pub fn a_div_by_unit(&self, d: &Self) -> Result<Self, SymError> {
        Ok(self.a_mul(&d.inverse()?))
    }

    /// `nu_q`: evaluate at `L = q`.
    pub fn nu_q(&self, t: &SpecTarget) -> Q {
        if self.is_zero() {
            return Q::zero();
        }
        let q = &t.q;
        let mut v = self.num.eval(q) * arith::q_pow(q, self.low);
        for (&d, &e) in &self.den {
            v /= arith::q_pow(&cyclotomic(d).eval(q), e as i64);
        }
        v
    }

    /// `nu_q` at an integer `q >= 2`.
    pub fn nu(&self, q: u64) -> Q {
        self.nu_q(&SpecTarget::int(q).expect("q >= 2"))
    }

    pub fn nu_f64(&self, q: f64) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let ev = |p: &QPoly| p.coeffs().iter().rev().fold(0.0, |acc, c| acc * q + c.to_f64().unwrap_or(f64::NAN));
        let mut v = ev(&self.num) * q.powi(self.low as i32);
        for (&d, &e) in &self.den {
            v /= ev(&cyclotomic(d)).powi(e as i32);
        }
        v
    }

    /// `nu_q(self) >= 0` for every real `q > 1`.
    ///
    /// The denominator is positive on `(1, inf)`, so only the numerator
    /// polynomial matters. Its roots above 1 are isolated with Sturm
    /// sequences and the sign is checked between consecutive roots.
    pub fn is_nonneg(&self) -> bool {
        if self.is_zero() {
            return true;
        }
        let one = Q::one();
        let mut s = squarefree_decomposition(&self.num).into_iter().fold(QPoly::one(), |a, b| a.mul(&b));
        if s.degree().unwrap_or(0) == 0 {
            return self.num.lead().is_positive();
        }
        let x_minus_1 = QPoly::from_ints(&[-1, 1]);
        if s.sign_at(&one) == 0 {
            s = s.exact_div(&x_minus_1).unwrap();
        }
        let roots = if s.degree().unwrap_or(0) == 0 { Vec::new() } else { isolate_roots_above(&s, &one) };
        let mut samples = Vec::new();
        match roots.first() {
            None => samples.push(arith::q_int(2)),
            Some((lo, hi)) => {
                let (mut lo, mut hi) = (lo.clone(), hi.clone());
                let two = arith::q_int(2);
                // a point strictly between 1 and the first root
                loop {
                    if lo > one {
                        samples.push(lo);
                        break;
                    }
                    let mid = (&lo + &hi) / &two;
                    if s.sign_at(&mid) == 0 {
                        samples.push((&one + &mid) / &two);
                        break;
                    }
                    if poly::roots_between(&s, &lo, &mid) == 1 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
            }
        }
        samples.extend(roots.iter().map(|(_, hi)| hi.clone()));
        samples.iter().all(|x| self.num.sign_at(x) > 0)
    }

    /// `self >= other` in the partial order.
    pub fn ge(&self, other: &Self) -> bool {
        self.a_sub(other).is_nonneg()
    }

    /// Denominator as `(1 - L^-i)^m` factors plus the matching numerator
    /// `L^low' * P'(L)`.
    fn display_parts(&self) -> (Vec<(u32, u32)>, i64, QPoly) {
        let mut e: BTreeMap<u32, i64> = self.den.iter().map(|(&d, &m)| (d, m as i64)).collect();
        let mut factors: BTreeMap<u32, u32> = BTreeMap::new();
        let mut shift = 0i64;
        while let Some((&d, _)) = e.iter().rev().find(|(_, &m)| m > 0) {
            *factors.entry(d).or_insert(0) += 1;
            shift += d as i64;
            for k in 1..=d {
                if d % k == 0 {
                    *e.entry(k).or_insert(0) -= 1;
                }
            }
        }
        let mut num = self.num.clone();
        for (&d, &m) in &e {
            if m < 0 {
                num = num.mul(&cyclotomic(d).pow((-m) as u32));
            }
        }
        let k = num.low_order();
        (factors.into_iter().collect(), self.low - shift + k as i64, num.shift_down(k))
    }

    pub fn parse(s: &str) -> Result<Self, SymError> {
        let sum = crate::expr::parse_lsum(s).map_err(|e| SymError::Parse(e.to_string()))?;
        sum.as_constant().ok_or_else(|| SymError::Parse(format!("{s} depends on a parameter")))
    }
}

fn fmt_coeff_term(c: &Q, k: i64, first: bool, out: &mut String) {
    let neg = c.is_negative();
    let a = c.abs();
    if first {
        if neg {
            out.push('-');
        }
    } else {
        out.push_str(if neg { " - " } else { " + " });
    }
    let pow = match k {
        0 => String::new(),
        1 => "L".to_string(),
        _ => format!("L^{k}"),
    };
    let coef = if a.is_integer() { a.numer().to_string() } else { format!("{}/{}", a.numer(), a.denom()) };
    if k == 0 {
        out.push_str(&coef);
    } else if a.is_one() {
        out.push_str(&pow);
    } else {
        out.push_str(&format!("{coef}*{pow}"));
    }
}

/// Laurent polynomial `L^low * p(L)` in descending powers.
fn fmt_laurent(low: i64, p: &QPoly) -> (String, usize) {
    let mut s = String::new();
    let mut n = 0;
    for (i, c) in p.coeffs().iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        fmt_coeff_term(c, low + i as i64, n == 0, &mut s);
        n += 1;
    }
    (s, n)
}

fn fmt_factor(i: u32) -> String {
    if i == 1 {
        "(1 - L^-1)".to_string()
    } else {
        format!("(1 - L^-{i})")
    }
}

impl fmt::Display for SymA {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let (factors, low, num) = self.display_parts();
        let (ns, nterms) = fmt_laurent(low, &num);
        if factors.is_empty() {
            return write!(f, "{ns}");
        }
        let num_s = if nterms > 1 { format!("({ns})") } else { ns };
        let parts: Vec<String> = factors
            .iter()
            .map(|&(i, m)| if m == 1 { fmt_factor(i) } else { format!("{}^{m}", fmt_factor(i)) })
            .collect();
        if parts.len() == 1 {
            write!(f, "{num_s}/{}", parts[0])
        } else {
            write!(f, "{num_s}/({})", parts.join("*"))
        }
    }
}

impl FromStr for SymA {
    type Err = SymError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl Serialize for SymA {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SymA {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Self::parse(&s).map_err(serde::de::Error::custom)
    }
}

impl Add for &SymA {
    type Output = SymA;
    fn add(self, o: &SymA) -> SymA {
        self.a_add(o)
    }
}

impl Add for SymA {
    type Output = SymA;
    fn add(self, o: SymA) -> SymA {
        self.a_add(&o)
    }
}

impl Sub for &SymA {
    type Output = SymA;
    fn sub(self, o: &SymA) -> SymA {
        self.a_sub(o)
    }
}

impl Sub for SymA {
    type Output = SymA;
    fn sub(self, o: SymA) -> SymA {
        self.a_sub(&o)
    }
}

impl Mul for &SymA {
    type Output = SymA;
    fn mul(self, o: &SymA) -> SymA {
        self.a_mul(o)
    }
}

impl Mul for SymA {
    type Output = SymA;
    fn mul(self, o: SymA) -> SymA {
        self.a_mul(&o)
    }
}

impl Neg for SymA {
    type Output = SymA;
    fn neg(self) -> SymA {
        self.a_neg()
    }
}

impl Neg for &SymA {
    type Output = SymA;
    fn neg(self) -> SymA {
        self.a_neg()
    }
}

impl Default for SymA {
    fn default() -> Self {
        Self::zero()
    }
}

#[cfg(test)]
mod tests;
