//! `∫_O ∏ |t - c_j|^(e·m_j) |dt|` through annulus cells around each center.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::cells::{integrate_cells, Cell, Center};
use super::{IntegrationResult, MotivicError};
use crate::arith::{parse_q, Q};
use crate::formula::{BadPrimes, Cmp, Formula, Node, RfTerm, Sort, VfTerm, ZzTerm};
use crate::presburger::{AffineForm, LSum};
use crate::symring::SymA;

/// A center `c` with multiplicity `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearFactor {
    pub center: Q,
    pub multiplicity: u32,
}

/// Parse `"c:m,c:m,..."`; a bare `c` has multiplicity one.
pub fn parse_linear_product(s: &str) -> Result<Vec<LinearFactor>, MotivicError> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let (c, m) = item.rsplit_once(':').unwrap_or((item, "1"));
        let center = parse_q(c.trim()).ok_or_else(|| MotivicError::Invalid(format!("bad center {c}")))?;
        let multiplicity: u32 = m.trim().parse().map_err(|_| MotivicError::Invalid(format!("bad multiplicity {m}")))?;
        if multiplicity == 0 {
            return Err(MotivicError::Invalid(format!("multiplicity of {c} must be positive")));
        }
        out.push(LinearFactor { center, multiplicity });
    }
    if out.is_empty() {
        return Err(MotivicError::Invalid("empty product".into()));
    }
    Ok(out)
}

fn rf_int(n: &BigInt) -> RfTerm {
    if n.is_negative() {
        RfTerm::Neg(Box::new(RfTerm::Const(-n)))
    } else {
        RfTerm::Const(n.clone())
    }
}

fn vf_const(c: &Q) -> VfTerm {
    let num = if c.numer().is_negative() {
        VfTerm::Neg(Box::new(VfTerm::Const(-c.numer())))
    } else {
        VfTerm::Const(c.numer().clone())
    };
    if c.denom() == &BigInt::from(1) {
        num
    } else {
        VfTerm::Div(Box::new(num), c.denom().clone())
    }
}

fn basis(rf: &[&str], zz: &[&str], body: Node) -> Formula {
    let mut free: Vec<(String, Sort)> = rf.iter().map(|v| (v.to_string(), Sort::Rf)).collect();
    free.extend(zz.iter().map(|v| (v.to_string(), Sort::Zz)));
    Formula::new(free, body)
}

/// Annulus `ord(t - c) = γ ≥ 1` around `c`, any nonzero `ac`.
fn around(id: &str, center: VfTerm, exponent: i64) -> Cell {
    let body = Node::ZzCmp(ZzTerm::Const(1), Cmp::Le, ZzTerm::Var("g".into()));
    let psi = LSum::term(SymA::one(), &AffineForm::term(-exponent, "g"));
    Cell::one(id, basis(&["e"], &["g"], body), Center::Term(center), AffineForm::var("g"), RfTerm::Var("e".into()), psi)
        .with_count(SymA::laurent(&[(1, Q::from_integer(1.into())), (0, Q::from_integer((-1).into()))]))
}

/// Integrate `∏ |t - c_j|^(e·m_j)` over the valuation ring.
///
/// The ring is cut into the annuli around each center, the units whose
/// residue avoids every center, and (when 0 is not a center) the ideal.
/// Results hold at primes where the centers are integral, nonzero unless
/// equal to 0, and pairwise distinct mod p; all others are bad primes.
pub fn integrate_linear_product(factors: &[LinearFactor], e: u32) -> Result<IntegrationResult, MotivicError> {
    if e == 0 {
        return Err(MotivicError::Invalid("exponent must be positive".into()));
    }
    for (i, a) in factors.iter().enumerate() {
        if factors[..i].iter().any(|b| b.center == a.center) {
            return Err(MotivicError::DuplicateCenter(a.center.to_string()));
        }
    }
    let mut bad = BadPrimes::new();
    for (i, a) in factors.iter().enumerate() {
        bad.insert_divisors(a.center.denom(), &format!("center {} not integral", a.center));
        bad.insert_divisors(a.center.numer(), &format!("center {} meets 0 mod p", a.center));
        for b in &factors[..i] {
            let d = &a.center - &b.center;
            bad.insert_divisors(d.numer(), &format!("centers {} and {} meet mod p", b.center, a.center));
        }
    }
    let mut cells = Vec::new();
    for (j, f) in factors.iter().enumerate() {
        cells.push(around(&format!("c{j}"), vf_const(&f.center), (e * f.multiplicity) as i64));
    }
    let zero_is_center = factors.iter().any(|f| f.center.is_zero());
    // units avoiding every nonzero center residue: α = 0, ac = e
    let mut parts = Vec::new();
    let mut avoided = 0i64;
    for f in factors.iter().filter(|f| !f.center.is_zero()) {
        let lhs = RfTerm::Mul(Box::new(rf_int(f.center.denom())), Box::new(RfTerm::Var("e".into())));
        parts.push(Node::not(Node::RfEq(lhs, rf_int(f.center.numer()))));
        avoided += 1;
    }
    let generic = Cell::one(
        "generic",
        basis(&["e"], &[], Node::conjunction(parts)),
        Center::Term(VfTerm::Const(BigInt::from(0))),
        AffineForm::constant(0),
        RfTerm::Var("e".into()),
        LSum::constant(SymA::one()),
    )
    .with_count(SymA::laurent(&[(1, Q::from_integer(1.into())), (0, Q::from_integer((-1 - avoided).into()))]));
    cells.push(generic);
    if !zero_is_center {
        cells.push(around("ideal", VfTerm::Const(BigInt::from(0)), 0));
    }
    let mut r = integrate_cells(&cells, &[])?;
    r.bad_primes.merge(&bad);
    Ok(r)
}
