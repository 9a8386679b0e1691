//! Constructible motivic functions, cells and the one-variable integrator.
//!
//! A constructible function is a finite sum of residue-field classes, each
//! carried as a formula in RF variables, tensored with an `A`-valued
//! coefficient that may still depend on integer parameters. Specialization
//! counts the class over `F_q` and evaluates the coefficient at `L = q`.

mod appendix2;
mod cells;
pub mod compare;
mod linear;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::arith::{is_prime, Q};
use crate::formula::{count_rf_points_with, BadPrimes, Formula, FormulaError, Node, Sort, DEFAULT_BUDGET};
use crate::presburger::{LSum, PresError};
use crate::symring::{SpecTarget, SymA};

pub use appendix2::{
    appendix2_steps, appendix2_symbolic, appendix2_volume, phi_eta, step3_split_count, EtaMode, PHI_ETA, PHI_UPPER,
};
pub use cells::{integrate_cells, Binding, Cell, CellData, CellKind, Center, OracleSetup};
pub use linear::{integrate_linear_product, parse_linear_product, LinearFactor};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MotivicError {
    #[error("duplicate center {0}")]
    DuplicateCenter(String),
    #[error("cell {0}: unsupported zero cell: {1}")]
    UnsupportedZeroCell(String, String),
    #[error("cell {0}: not summable: {1}")]
    NotSummable(String, String),
    #[error("cell {0}: {1}")]
    InvalidCell(String, String),
    #[error("cells {0} and {1} may overlap")]
    CellOverlap(String, String),
    #[error("{0} is a bad prime for this result")]
    BadPrime(u64),
    #[error("unbound parameter {0}")]
    UnboundParameter(String),
    #[error("invalid prime {0}")]
    InvalidPrime(u64),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Pres(PresError),
}

impl From<PresError> for MotivicError {
    fn from(e: PresError) -> Self {
        match e {
            PresError::UnboundParameter(v) => MotivicError::UnboundParameter(v),
            e => MotivicError::Pres(e),
        }
    }
}

/// Values for the parameter slots of a constructible function.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Params {
    pub rf: BTreeMap<String, u64>,
    pub zz: BTreeMap<String, i64>,
}

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rf(mut self, k: &str, v: u64) -> Self {
        self.rf.insert(k.to_string(), v);
        self
    }

    pub fn zz(mut self, k: &str, v: i64) -> Self {
        self.zz.insert(k.to_string(), v);
        self
    }
}

/// One summand `[class] ⊗ coeff`.
#[derive(Debug, Clone)]
pub struct ClassTerm {
    /// Formula in RF variables; its free variables that are not parameters
    /// are the fibre coordinates being counted.
    pub class: Formula,
    /// Symbolic class, valid away from the bad primes, when known.
    pub count: Option<SymA>,
    pub coeff: LSum,
}

#[derive(Debug, Clone, Default)]
pub struct ConstructibleFn {
    terms: BTreeMap<String, ClassTerm>,
}

impl PartialEq for ConstructibleFn {
    fn eq(&self, o: &Self) -> bool {
        self.terms.len() == o.terms.len()
            && self.terms.iter().zip(&o.terms).all(|((k, a), (l, b))| k == l && a.coeff == b.coeff)
    }
}

impl ConstructibleFn {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The point class tensored with `c`.
    pub fn constant(c: LSum) -> Self {
        Self::term(Formula::from_node(Node::True), Some(SymA::one()), c)
    }

    pub fn term(class: Formula, count: Option<SymA>, coeff: LSum) -> Self {
        let mut f = Self::zero();
        f.push(ClassTerm { class, count, coeff });
        f
    }

    fn push(&mut self, t: ClassTerm) {
        if t.coeff.is_zero() {
            return;
        }
        let key = t.class.pretty();
        match self.terms.get_mut(&key) {
            Some(s) => {
                s.coeff = s.coeff.add(&t.coeff);
                if s.count != t.count {
                    s.count = None;
                }
                if s.coeff.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, t);
            }
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut f = self.clone();
        for t in o.terms.values() {
            f.push(t.clone());
        }
        f
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = &ClassTerm> {
        self.terms.values()
    }

    /// Integer parameters left in the coefficients.
    pub fn zz_params(&self) -> BTreeSet<String> {
        self.terms.values().flat_map(|t| t.coeff.params()).collect()
    }

    /// `Σ count · coeff` when every class has a known symbolic count.
    pub fn symbolic(&self) -> Option<LSum> {
        let mut s = LSum::zero();
        for t in self.terms.values() {
            s = s.add(&t.coeff.scale(t.count.as_ref()?));
        }
        Some(s)
    }
}

impl fmt::Display for ConstructibleFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> =
            self.terms.values().map(|t| format!("[{}] ⊗ ({})", t.class.body(), t.coeff)).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Serialize for ClassTerm {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ClassTerm", 3)?;
        st.serialize_field("class", &self.class.pretty())?;
        st.serialize_field("count", &self.count.as_ref().map(|c| c.to_string()))?;
        st.serialize_field("coeff", &self.coeff)?;
        st.end()
    }
}

impl Serialize for ConstructibleFn {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let terms: Vec<&ClassTerm> = self.terms.values().collect();
        terms.serialize(s)
    }
}

/// Specialize at `q`: count each class over `F_q` with the RF parameters
/// fixed and evaluate its coefficient at `L = q`.
pub fn specialize(f: &ConstructibleFn, q: u64, params: &Params) -> Result<Q, MotivicError> {
    if !is_prime(q) {
        return Err(MotivicError::InvalidPrime(q));
    }
    let target = SpecTarget::int(q).map_err(|e| MotivicError::Invalid(e.to_string()))?;
    let mut total = Q::from_integer(0.into());
    for t in f.terms.values() {
        let mut fixed = BTreeMap::new();
        for (v, s) in t.class.free() {
            if *s == Sort::Rf {
                if let Some(x) = params.rf.get(v) {
                    fixed.insert(v.clone(), *x);
                }
            }
        }
        let n = count_rf_points_with(&t.class, q, &fixed, DEFAULT_BUDGET)?;
        let c = t.coeff.nu_q(&params.zz, &target)?;
        total += c * Q::from_integer(n.into());
    }
    Ok(total)
}

/// A per-cell contribution kept for audit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contribution {
    pub cell: String,
    pub value: ConstructibleFn,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationResult {
    pub value: ConstructibleFn,
    pub bad_primes: BadPrimes,
    pub derivation: Vec<Contribution>,
}

impl IntegrationResult {
    /// The value as an element of `A`, when it has no parameters and all
    /// class counts are known.
    pub fn symbolic(&self) -> Option<SymA> {
        self.value.symbolic()?.as_constant()
    }

    /// Parametric symbolic value.
    pub fn symbolic_lsum(&self) -> Option<LSum> {
        self.value.symbolic()
    }

    pub fn specialize(&self, q: u64, params: &Params) -> Result<Q, MotivicError> {
        if self.bad_primes.contains(q) {
            return Err(MotivicError::BadPrime(q));
        }
        specialize(&self.value, q, params)
    }
}

impl Serialize for IntegrationResult {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("IntegrationResult", 4)?;
        st.serialize_field("value", &self.value.to_string())?;
        st.serialize_field("symbolic", &self.symbolic_lsum().map(|x| x.to_string()))?;
        st.serialize_field("bad_primes", &self.bad_primes.primes())?;
        st.serialize_field("derivation", &self.derivation)?;
        st.end()
    }
}


#[cfg(test)]
mod tests;
