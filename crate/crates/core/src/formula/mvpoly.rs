//! Sparse multivariate polynomials over Q with ordered leaf symbols.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::arith::Q;

/// A monomial: sorted `(leaf, exponent)` pairs with positive exponents.
pub type Monomial<K> = Vec<(K, u32)>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MvPoly<K: Ord + Clone> {
    terms: BTreeMap<Monomial<K>, Q>,
}

impl<K: Ord + Clone> Default for MvPoly<K> {
    fn default() -> Self {
        Self { terms: BTreeMap::new() }
    }
}

fn mono_mul<K: Ord + Clone>(a: &Monomial<K>, b: &Monomial<K>) -> Monomial<K> {
    let mut m: BTreeMap<K, u32> = a.iter().cloned().collect();
    for (k, e) in b {
        *m.entry(k.clone()).or_insert(0) += e;
    }
    m.into_iter().collect()
}

impl<K: Ord + Clone> MvPoly<K> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Q) -> Self {
        let mut p = Self::zero();
        p.push(Vec::new(), c);
        p
    }

    pub fn leaf(k: K) -> Self {
        let mut p = Self::zero();
        p.push(vec![(k, 1)], Q::one());
        p
    }

    fn push(&mut self, m: Monomial<K>, c: Q) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m.clone()).or_insert_with(Q::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial<K>, &Q)> {
        self.terms.iter()
    }

    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut p = self.clone();
        for (m, c) in &o.terms {
            p.push(m.clone(), c.clone());
        }
        p
    }

    pub fn neg(&self) -> Self {
        Self { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut p = Self::zero();
        for (m, x) in &self.terms {
            p.push(m.clone(), x * c);
        }
        p
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut p = Self::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                p.push(mono_mul(m1, m2), c1 * c2);
            }
        }
        p
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::constant(Q::one()), |acc, _| acc.mul(self))
    }

    pub fn leaves(&self) -> Vec<K> {
        let mut v: Vec<K> = self.terms.keys().flat_map(|m| m.iter().map(|(k, _)| k.clone())).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Total degree in the given leaf.
    pub fn degree_in(&self, k: &K) -> u32 {
        self.terms
            .keys()
            .map(|m| m.iter().find(|(x, _)| x == k).map_or(0, |(_, e)| *e))
            .max()
            .unwrap_or(0)
    }

    /// Coefficients as a polynomial in `k`: `out[i]` is the coefficient of `k^i`.
    pub fn coefficients_in(&self, k: &K) -> Vec<Self> {
        let d = self.degree_in(k) as usize;
        let mut out = vec![Self::zero(); d + 1];
        for (m, c) in &self.terms {
            let e = m.iter().find(|(x, _)| x == k).map_or(0, |(_, e)| *e) as usize;
            let rest: Monomial<K> = m.iter().filter(|(x, _)| x != k).cloned().collect();
            out[e].push(rest, c.clone());
        }
        out
    }

    /// Substitute polynomials for leaves (leaves not in the map stay).
    pub fn substitute(&self, f: &dyn Fn(&K) -> Option<Self>) -> Self {
        let mut p = Self::zero();
        for (m, c) in &self.terms {
            let mut t = Self::constant(c.clone());
            for (k, e) in m {
                let base = f(k).unwrap_or_else(|| Self::leaf(k.clone()));
                t = t.mul(&base.pow(*e));
            }
            p = p.add(&t);
        }
        p
    }

    /// Evaluate in any ring given embeddings of constants and leaves.
    pub fn eval<T, E>(
        &self,
        zero: T,
        constant: &dyn Fn(&Q) -> Result<T, E>,
        leaf: &dyn Fn(&K) -> Result<T, E>,
        add: &dyn Fn(&T, &T) -> Result<T, E>,
        mul: &dyn Fn(&T, &T) -> Result<T, E>,
    ) -> Result<T, E> {
        let mut acc = zero;
        for (m, c) in &self.terms {
            let mut t = constant(c)?;
            for (k, e) in m {
                let x = leaf(k)?;
                for _ in 0..*e {
                    t = mul(&t, &x)?;
                }
            }
            acc = add(&acc, &t)?;
        }
        Ok(acc)
    }
}
