//! Dense univariate polynomials over Q.

use num_traits::{One, Signed, Zero};

use crate::arith::Q;

/// Coefficients in ascending order, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct QPoly(Vec<Q>);

impl QPoly {
    pub fn new(mut c: Vec<Q>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        QPoly(c)
    }

    pub fn zero() -> Self {
        QPoly(Vec::new())
    }

    pub fn constant(c: Q) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    /// `c * x^k`
    pub fn monomial(c: Q, k: usize) -> Self {
        let mut v = vec![Q::zero(); k + 1];
        v[k] = c;
        Self::new(v)
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| Q::from_integer(x.into())).collect())
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; the zero polynomial has degree `None`.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn lead(&self) -> Q {
        self.0.last().cloned().unwrap_or_else(Q::zero)
    }

    /// Multiplicity of the root 0.
    pub fn low_order(&self) -> usize {
        self.0.iter().position(|c| !c.is_zero()).unwrap_or(0)
    }

    /// Divide by `x^k` (the caller ensures divisibility).
    pub fn shift_down(&self, k: usize) -> Self {
        Self::new(self.0[k.min(self.0.len())..].to_vec())
    }

    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut v = vec![Q::zero(); k];
        v.extend(self.0.iter().cloned());
        Self::new(v)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.0.len().max(o.0.len());
        let z = Q::zero();
        Self::new((0..n).map(|i| self.0.get(i).unwrap_or(&z) + o.0.get(i).unwrap_or(&z)).collect())
    }

    pub fn neg(&self) -> Self {
        QPoly(self.0.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self::new(self.0.iter().map(|x| x * c).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut v = vec![Q::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.0.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        Self::new(v)
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::one(), |acc, _| acc.mul(self))
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn divrem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let dd = d.0.len() - 1;
        let lc = d.lead();
        let mut r = self.0.clone();
        if r.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut q = vec![Q::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = &r[k + dd] / &lc;
            if !c.is_zero() {
                for (j, dj) in d.0.iter().enumerate() {
                    r[k + j] -= &c * dj;
                }
            }
            q[k] = c;
        }
        r.truncate(dd);
        (Self::new(q), Self::new(r))
    }

    pub fn exact_div(&self, d: &Self) -> Option<Self> {
        let (q, r) = self.divrem(d);
        r.is_zero().then_some(q)
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.lead().recip())
    }

    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.divrem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> Self {
        Self::new(self.0.iter().enumerate().skip(1).map(|(i, c)| c * Q::from_integer((i as i64).into())).collect())
    }

    pub fn eval(&self, x: &Q) -> Q {
        self.0.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
    }

    /// Sign of the value at `x` as -1, 0 or 1.
    pub fn sign_at(&self, x: &Q) -> i32 {
        let v = self.eval(x);
        if v.is_zero() {
            0
        } else if v.is_positive() {
            1
        } else {
            -1
        }
    }
}

pub fn totient(n: u32) -> u32 {
    (1..=n).filter(|&k| num_integer::gcd(k, n) == 1).count() as u32
}

fn mobius(n: u32) -> i32 {
    let (mut n, mut k, mut sign) = (n, 2, 1);
    while k * k <= n {
        if n % k == 0 {
            n /= k;
            if n % k == 0 {
                return 0;
            }
            sign = -sign;
        }
        k += 1;
    }
    if n > 1 {
        -sign
    } else {
        sign
    }
}

/// The d-th cyclotomic polynomial, `prod_{k | d} (x^k - 1)^mu(d/k)`.
pub fn cyclotomic(d: u32) -> QPoly {
    let (mut num, mut den) = (QPoly::one(), QPoly::one());
    for k in 1..=d {
        if !d.is_multiple_of(k) {
            continue;
        }
        let f = QPoly::monomial(Q::one(), k as usize).sub(&QPoly::one());
        match mobius(d / k) {
            1 => num = num.mul(&f),
            -1 => den = den.mul(&f),
            _ => {}
        }
    }
    num.exact_div(&den).expect("cyclotomic divisibility")
}

/// Yun's square-free decomposition: `out[i]` is the product of the
/// irreducible factors of multiplicity `i + 1` (monic).
pub fn squarefree_decomposition(f: &QPoly) -> Vec<QPoly> {
    let mut out = Vec::new();
    if f.degree().unwrap_or(0) == 0 {
        return out;
    }
    let df = f.derivative();
    let a0 = f.gcd(&df);
    let mut b = f.exact_div(&a0).unwrap();
    let c = df.exact_div(&a0).unwrap();
    let mut d = c.sub(&b.derivative());
    while b.degree().unwrap_or(0) > 0 {
        let a = b.gcd(&d);
        let nb = b.exact_div(&a).unwrap();
        let nc = d.exact_div(&a).unwrap();
        d = nc.sub(&nb.derivative());
        b = nb;
        out.push(a);
    }
    out
}

/// Sturm sequence of a square-free polynomial.
pub fn sturm_sequence(f: &QPoly) -> Vec<QPoly> {
    let mut seq = vec![f.clone(), f.derivative()];
    while !seq.last().unwrap().is_zero() {
        let n = seq.len();
        let r = seq[n - 2].divrem(&seq[n - 1]).1.neg();
        if r.is_zero() {
            break;
        }
        seq.push(r);
    }
    seq.retain(|p| !p.is_zero());
    seq
}

fn sign_changes(signs: impl Iterator<Item = i32>) -> usize {
    let mut last = 0;
    let mut n = 0;
    for s in signs.filter(|&s| s != 0) {
        if last != 0 && s != last {
            n += 1;
        }
        last = s;
    }
    n
}

/// Number of distinct real roots of `f` in `(a, +inf)`, `f(a) != 0`.
pub fn roots_above(f: &QPoly, a: &Q) -> usize {
    let seq = sturm_sequence(f);
    let at_a = sign_changes(seq.iter().map(|p| p.sign_at(a)));
    let at_inf = sign_changes(seq.iter().map(|p| if p.lead().is_positive() { 1 } else { -1 }));
    at_a - at_inf
}

/// Number of distinct real roots of `f` in `(a, b]`, `f(a) != 0`.
pub fn roots_between(f: &QPoly, a: &Q, b: &Q) -> usize {
    let seq = sturm_sequence(f);
    let va = sign_changes(seq.iter().map(|p| p.sign_at(a)));
    let vb = sign_changes(seq.iter().map(|p| p.sign_at(b)));
    va - vb
}

/// Isolating intervals `(lo, hi)` for the real roots of the square-free
/// `f` in `(a, +inf)`; endpoints are not roots.
pub fn isolate_roots_above(f: &QPoly, a: &Q) -> Vec<(Q, Q)> {
    let n = roots_above(f, a);
    if n == 0 {
        return Vec::new();
    }
    // Cauchy bound
    let lc = f.lead();
    let bound = Q::one()
        + f.coeffs()
            .iter()
            .map(|c| (c / &lc).abs())
            .fold(Q::zero(), |m, x| if x > m { x } else { m });
    let mut hi = if &bound > a { bound } else { a + Q::one() };
    while f.sign_at(&hi) == 0 {
        hi += Q::one();
    }
    let mut out = Vec::new();
    let mut stack = vec![(a.clone(), hi)];
    while let Some((lo, hi)) = stack.pop() {
        let k = roots_between(f, &lo, &hi);
        if k == 0 {
            continue;
        }
        if k == 1 {
            out.push((lo, hi));
            continue;
        }
        let mut mid = (&lo + &hi) / Q::from_integer(2.into());
        let step = (&hi - &lo) / Q::from_integer(7.into());
        while f.sign_at(&mid) == 0 {
            mid += &step / Q::from_integer(3.into());
        }
        stack.push((mid.clone(), hi));
        stack.push((lo, mid));
    }
    out.sort_by(|x, y| x.0.cmp(&y.0));
    out
}
