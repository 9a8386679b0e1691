//! Small exact-arithmetic helpers shared by the other modules.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// `base^exp` for a possibly negative exponent.
pub fn q_pow(base: &Q, exp: i64) -> Q {
    if exp >= 0 {
        num_traits::pow(base.clone(), exp as usize)
    } else {
        num_traits::pow(base.recip(), (-exp) as usize)
    }
}

pub fn int_pow(base: u64, exp: u32) -> BigInt {
    num_traits::pow(BigInt::from(base), exp as usize)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    (2..=n).filter(|&k| is_prime(k)).collect()
}

/// Distinct prime divisors of |n| (empty for 0 and ±1).
pub fn prime_divisors(n: &BigInt) -> Vec<u64> {
    let mut n = n.abs();
    let mut out = Vec::new();
    if n.is_zero() {
        return out;
    }
    let mut d = 2u64;
    while BigInt::from(d) * BigInt::from(d) <= n {
        let bd = BigInt::from(d);
        if (&n % &bd).is_zero() {
            out.push(d);
            while (&n % &bd).is_zero() {
                n /= &bd;
            }
        }
        d += 1;
        if d > 1_000_000 {
            break;
        }
    }
    if n > BigInt::one() {
        if let Some(v) = n.to_u64() {
            out.push(v);
        }
    }
    out
}

/// p-adic valuation of a nonzero integer.
pub fn int_val(n: &BigInt, p: u64) -> i64 {
    debug_assert!(!n.is_zero());
    let bp = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    while (&n % &bp).is_zero() {
        n /= &bp;
        v += 1;
    }
    v
}

/// p-adic valuation of a nonzero rational.
pub fn rat_val(r: &Q, p: u64) -> i64 {
    int_val(r.numer(), p) - int_val(r.denom(), p)
}

pub fn mod_floor(a: &BigInt, m: &BigInt) -> BigInt {
    a.mod_floor(m)
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inv(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let g = a.extended_gcd(m);
    if g.gcd.is_one() {
        Some(g.x.mod_floor(m))
    } else if (-g.gcd.clone()).is_one() {
        Some((-g.x).mod_floor(m))
    } else {
        None
    }
}

/// Rational as the string "num/den" (always with a slash).
pub fn fmt_q(r: &Q) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(Q::new(n, d))
    } else {
        let n: BigInt = s.parse().ok()?;
        Some(Q::from_integer(n))
    }
}

/// Residue of a p-integral rational modulo p.
pub fn rat_mod_p(r: &Q, p: u64) -> Option<u64> {
    let bp = BigInt::from(p);
    let inv = mod_inv(&r.denom().mod_floor(&bp), &bp)?;
    (r.numer().mod_floor(&bp) * inv).mod_floor(&bp).to_u64()
}

/// Whether `a` is a square in F_p (zero counts as a square).
pub fn is_square_mod(a: u64, p: u64) -> bool {
    let a = a % p;
    (0..p).any(|x| x * x % p == a)
}

pub fn nonsquares(p: u64) -> Vec<u64> {
    (1..p).filter(|&a| !is_square_mod(a, p)).collect()
}

pub fn is_cube_mod(a: u64, p: u64) -> bool {
    let a = a % p;
    (0..p).any(|x| x * x % p * x % p == a)
}

pub fn q_abs(r: &Q) -> Q {
    r.abs()
}
