//! Numeric ground truth by enumerating residue boxes.
//!
//! Boxes are the balls `r + ϖ^j O^m` for `j = 0..=N`. A box is refined only
//! while the formula (or the order of the integrand) is undecided on it, so a
//! box decided at level `j` stands for all `p^((N-j)m)` of its level-`N`
//! sub-boxes. The budget bounds the number of boxes examined.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::arith::{fmt_q, int_pow, q_pow, rat_val, Q};
use crate::formula::{
    eval_vf, Cmp, Compiled, EvalOptions, Formula, FormulaError, MvPoly, Node, Sort, Truth3, Value, VfLeaf, VfTerm,
    ZzTerm, DEFAULT_BUDGET,
};
use crate::localfield::{Approx, ExtInt, LFElem, LocalFieldError, LocalFieldSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("box budget of {0} exceeded")]
    BudgetExceeded(u64),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    LocalField(#[from] LocalFieldError),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// Box budget: `DPCALC_BOX_BUDGET` if set, otherwise `10^8`.
pub fn box_budget() -> u64 {
    std::env::var("DPCALC_BOX_BUDGET").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_BUDGET)
}

/// Rigorous bracket of a volume or integral.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VolumeInterval {
    pub lower: Q,
    pub upper: Q,
    pub precision: u32,
    /// Number of level-`N` boxes, `p^(N m)`.
    pub boxes_total: u128,
    /// Level-`N` boxes on which the formula holds and the integrand is determined.
    pub boxes_true: u128,
    /// Level-`N` boxes left undecided.
    pub boxes_undecided: u128,
    /// Boxes actually examined.
    pub boxes_examined: u64,
}

impl VolumeInterval {
    pub fn undecided_mass(&self) -> Q {
        &self.upper - &self.lower
    }

    pub fn contains(&self, v: &Q) -> bool {
        &self.lower <= v && v <= &self.upper
    }

    pub fn width(&self) -> Q {
        self.undecided_mass()
    }

    pub fn overlaps(&self, o: &VolumeInterval) -> bool {
        self.lower <= o.upper && o.lower <= self.upper
    }

    /// Whether `self` lies inside `o`.
    pub fn within(&self, o: &VolumeInterval) -> bool {
        o.lower <= self.lower && self.upper <= o.upper
    }
}

impl Serialize for VolumeInterval {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serde_json::json!({
            "lower": fmt_q(&self.lower),
            "upper": fmt_q(&self.upper),
            "precision": self.precision,
            "undecided_mass": fmt_q(&self.undecided_mass()),
            "boxes_total": self.boxes_total.to_string(),
            "boxes_true": self.boxes_true.to_string(),
            "boxes_undecided": self.boxes_undecided.to_string(),
            "boxes_examined": self.boxes_examined,
        })
        .serialize(s)
    }
}

/// The function being integrated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Integrand {
    One,
    /// `|f|^e`, i.e. `q^(-e ord f)`.
    AbsPow(VfTerm, u32),
}

/// What a box contributes, keyed by level and order of the integrand.
#[derive(Debug, Default)]
struct Tally {
    exact: BTreeMap<(u32, i64), u128>,
    upper_only: BTreeMap<(u32, i64), u128>,
    true_n: u128,
    undecided_n: u128,
}

impl Tally {
    fn merge(&mut self, o: Tally) {
        for (k, v) in o.exact {
            *self.exact.entry(k).or_default() += v;
        }
        for (k, v) in o.upper_only {
            *self.upper_only.entry(k).or_default() += v;
        }
        self.true_n += o.true_n;
        self.undecided_n += o.undecided_n;
    }
}

/// The `p^m` sub-boxes of a level-`level` box.
fn children(p: u64, rs: &[BigInt], level: u32) -> Vec<Vec<BigInt>> {
    let step = int_pow(p, level);
    let mut out = vec![rs.to_vec()];
    for i in 0..rs.len() {
        out = out
            .into_iter()
            .flat_map(|c| {
                let step = step.clone();
                (0..p).map(move |d| {
                    let mut c = c.clone();
                    c[i] = &c[i] + BigInt::from(d) * &step;
                    c
                })
            })
            .collect();
    }
    out
}

struct Job<'a> {
    phi: &'a Compiled,
    spec: LocalFieldSpec,
    vars: Vec<String>,
    base: BTreeMap<String, Value>,
    integrand: Option<(MvPoly<VfLeaf>, u32, i64)>,
    /// Variable index whose box value is multiplied by this element.
    scale: Option<(usize, LFElem)>,
    opts: EvalOptions,
    budget: u64,
    examined: AtomicU64,
}

enum OrdF {
    Exact(ExtInt),
    AtLeast(i64),
}

impl Job<'_> {
    fn dims(&self) -> u32 {
        self.vars.len() as u32
    }

    fn assignment(&self, rs: &[BigInt], level: u32) -> Result<BTreeMap<String, Value>, OracleError> {
        let mut a = self.base.clone();
        for (i, (v, r)) in self.vars.iter().zip(rs).enumerate() {
            let mut ball = Approx::ball(r, level, self.spec);
            if let Some((k, c)) = &self.scale {
                if *k == i {
                    ball = Approx::Known(c.clone()).mul(&ball)?;
                }
            }
            a.insert(v.clone(), Value::Vf(ball));
        }
        Ok(a)
    }

    fn ord_f(&self, a: &BTreeMap<String, Value>) -> Result<OrdF, OracleError> {
        let Some((f, _, floor)) = &self.integrand else { return Ok(OrdF::Exact(ExtInt::Fin(0))) };
        Ok(match eval_vf(f, self.spec, a) {
            Ok(Approx::Known(e)) if e.is_exact() || !e.is_zero() => OrdF::Exact(e.ord()),
            Ok(Approx::Known(e)) => OrdF::AtLeast(e.absolute_precision().unwrap_or(*floor)),
            Ok(Approx::AtLeast(k)) => OrdF::AtLeast(k.max(*floor)),
            Err(FormulaError::LocalField(LocalFieldError::PrecisionExhausted { ord_at_least })) => {
                OrdF::AtLeast(ord_at_least.max(*floor))
            }
            Err(e) => return Err(e.into()),
        })
    }

    fn visit(&self, rs: &[BigInt], level: u32) -> Result<Tally, OracleError> {
        if self.examined.fetch_add(1, Ordering::Relaxed) >= self.budget {
            return Err(OracleError::BudgetExceeded(self.budget));
        }
        let n = self.spec.precision;
        let m = self.dims();
        let a = self.assignment(rs, level)?;
        let truth = match self.phi.eval(self.spec, &a, &self.opts) {
            Err(FormulaError::TooLarge(_)) => return Err(OracleError::BudgetExceeded(self.budget)),
            r => r?,
        };
        let mut t = Tally::default();
        if truth == Truth3::False {
            return Ok(t);
        }
        let sub_boxes = (self.spec.prime as u128).saturating_pow((n - level) * m);
        let ord = self.ord_f(&a)?;
        if truth == Truth3::True {
            if let OrdF::Exact(v) = ord {
                if let ExtInt::Fin(v) = v {
                    *t.exact.entry((level, v)).or_default() += 1;
                }
                t.true_n += sub_boxes;
                return Ok(t);
            }
        }
        if level == n {
            let lo = match ord {
                OrdF::Exact(ExtInt::Fin(v)) | OrdF::AtLeast(v) => v,
                OrdF::Exact(ExtInt::Inf) => return Ok(t),
            };
            *t.upper_only.entry((level, lo)).or_default() += 1;
            t.undecided_n += 1;
            return Ok(t);
        }
        let children = children(self.spec.prime, rs, level);
        let go = |c: &Vec<BigInt>| self.visit(c, level + 1);
        #[cfg(feature = "parallel")]
        let parts: Vec<Result<Tally, OracleError>> = if level == 0 {
            use rayon::prelude::*;
            children.par_iter().map(go).collect()
        } else {
            children.iter().map(go).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let parts: Vec<Result<Tally, OracleError>> = children.iter().map(go).collect();
        for p in parts {
            t.merge(p?);
        }
        Ok(t)
    }

    fn run(&self) -> Result<VolumeInterval, OracleError> {
        let m = self.dims();
        let t = self.visit(&vec![BigInt::zero(); m as usize], 0)?;
        let q = Q::from_integer(BigInt::from(self.spec.prime));
        let e = self.integrand.as_ref().map_or(0, |(_, e, _)| *e as i64);
        let mass = |(level, ord): (u32, i64), count: u128| {
            Q::from_integer(BigInt::from(count)) * q_pow(&q, -(level as i64) * m as i64 - e * ord)
        };
        let lower: Q = t.exact.into_iter().map(|(k, c)| mass(k, c)).sum();
        let upper = &lower + t.upper_only.into_iter().map(|(k, c)| mass(k, c)).sum::<Q>();
        Ok(VolumeInterval {
            lower,
            upper,
            precision: self.spec.precision,
            boxes_total: (self.spec.prime as u128).saturating_pow(self.spec.precision * m),
            boxes_true: t.true_n,
            boxes_undecided: t.undecided_n,
            boxes_examined: self.examined.load(Ordering::Relaxed).min(self.budget),
        })
    }
}

/// Caller-side settings for an oracle run.
#[derive(Debug, Clone)]
pub struct OracleConfig {
    /// Values for free variables that are not integrated (RF, ZZ, and VF parameters).
    pub params: BTreeMap<String, Value>,
    pub budget: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { params: BTreeMap::new(), budget: box_budget() }
    }
}

fn integration_vars(phi: &Formula, params: &BTreeMap<String, Value>) -> Result<Vec<String>, OracleError> {
    let mut vars = Vec::new();
    for (v, s) in phi.free() {
        match (s, params.contains_key(v)) {
            (_, true) => {}
            (Sort::Vf, false) => vars.push(v.clone()),
            (_, false) => return Err(FormulaError::UnboundVariable(v.clone()).into()),
        }
    }
    Ok(vars)
}

/// Lowest order an integrand can take on `O^m`, from its coefficients.
fn integrand_floor(f: &MvPoly<VfLeaf>, p: u64) -> i64 {
    f.terms().map(|(_, c)| rat_val(c, p)).min().unwrap_or(0).min(0)
}

fn run(
    phi: &Formula,
    integrand: &Integrand,
    spec: LocalFieldSpec,
    cfg: &OracleConfig,
    scale: Option<(String, LFElem)>,
) -> Result<VolumeInterval, OracleError> {
    let vars = integration_vars(phi, &cfg.params)?;
    let integrand = match integrand {
        Integrand::One => None,
        Integrand::AbsPow(f, e) => {
            if *e == 0 {
                return Err(OracleError::Unsupported("the exponent must be positive".into()));
            }
            let poly = f.to_poly();
            let floor = integrand_floor(&poly, spec.prime);
            Some((poly, *e, floor))
        }
    };
    let scale = match scale {
        Some((v, c)) => {
            let i = vars.iter().position(|x| *x == v).ok_or_else(|| FormulaError::UnboundVariable(v.clone()))?;
            Some((i, c))
        }
        None => None,
    };
    let compiled = Compiled::new(phi);
    let job = Job {
        phi: &compiled,
        spec,
        vars,
        base: cfg.params.clone(),
        integrand,
        scale,
        opts: EvalOptions { oracle_vf: true, zz_window: None, budget: cfg.budget },
        budget: cfg.budget,
        examined: AtomicU64::new(0),
    };
    job.run()
}

/// Volume of the set cut out by `phi` in `O^m`, `m` the free VF variables
/// not fixed by the configuration.
pub fn volume(phi: &Formula, spec: LocalFieldSpec) -> Result<VolumeInterval, OracleError> {
    volume_with(phi, spec, &OracleConfig::default())
}

pub fn volume_with(phi: &Formula, spec: LocalFieldSpec, cfg: &OracleConfig) -> Result<VolumeInterval, OracleError> {
    run(phi, &Integrand::One, spec, cfg, None)
}

/// Integral of the integrand over the set cut out by `phi` in `O^m`.
pub fn integrate(
    integrand: &Integrand,
    phi: &Formula,
    spec: LocalFieldSpec,
    cfg: &OracleConfig,
) -> Result<VolumeInterval, OracleError> {
    run(phi, integrand, spec, cfg, None)
}

/// Volumes of `S` and of `aS` (scaling the variable `var`), where `S` is
/// the set cut out by `phi`. The second must equal `|a|` times the first.
pub fn jacobian_check(
    a: &LFElem,
    phi: &Formula,
    var: &str,
    spec: LocalFieldSpec,
    cfg: &OracleConfig,
) -> Result<(VolumeInterval, VolumeInterval), OracleError> {
    if a.is_zero() {
        return Err(LocalFieldError::DivisionByZero.into());
    }
    let first = volume_with(phi, spec, cfg)?;
    // aS = { y : y/a in O and phi(y/a) }; the box variable y is fed to phi as y/a
    let in_o = Node::ZzCmp(ZzTerm::Const(0), Cmp::Le, ZzTerm::Ord(Box::new(VfTerm::var(var))));
    let scaled = Formula::from_node(Node::and(phi.body().clone(), in_o));
    let second = run(&scaled, &Integrand::One, spec, cfg, Some((var.to_string(), a.inv()?)))?;
    Ok((first, second))
}

/// `|a|`, for an element with finite order.
pub fn abs_value(a: &LFElem) -> Option<Q> {
    let q = Q::from_integer(BigInt::from(a.spec().prime));
    a.ord().finite().map(|v| q_pow(&q, -v))
}

/// Whether two intervals are compatible with `second = factor * first`.
pub fn scaled_overlap(first: &VolumeInterval, second: &VolumeInterval, factor: &Q) -> bool {
    second.lower <= factor * &first.upper && factor * &first.lower <= second.upper
}

/// Number of solutions of a polynomial system modulo `ϖ^N` divided by `q^(N d)`.
///
/// `phi` must be a conjunction of VF equations; its free VF variables are the
/// unknowns. Solutions are counted by lifting level by level.
pub fn serre_oesterle_count(phi: &Formula, d: u32, spec: LocalFieldSpec, budget: u64) -> Result<Q, OracleError> {
    let vars = integration_vars(phi, &BTreeMap::new())?;
    let mut polys = Vec::new();
    for c in phi.body().conjuncts() {
        match c {
            Node::VfEq(a, b) => polys.push(a.to_poly().sub(&b.to_poly())),
            other => {
                return Err(OracleError::Unsupported(format!("{other} is not a polynomial equation")));
            }
        }
    }
    let p = spec.prime;
    for f in &polys {
        if let Some((_, c)) = f.terms().find(|(_, c)| rat_val(c, p) < 0) {
            return Err(OracleError::Unsupported(format!("coefficient {c} is not integral at {p}")));
        }
    }
    let n = spec.precision;
    let m = vars.len() as u32;
    let exact = spec.with_precision(n + 1);
    let mut level: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); m as usize]];
    let mut examined = 0u64;
    for j in 0..n {
        let mut next = Vec::new();
        for r in &level {
            for c in children(p, r, j) {
                examined += 1;
                if examined > budget {
                    return Err(OracleError::BudgetExceeded(budget));
                }
                let a: BTreeMap<String, Value> = vars
                    .iter()
                    .zip(&c)
                    .map(|(v, x)| (v.clone(), Value::from(LFElem::residue_rep(x, j + 1, exact))))
                    .collect();
                let mut ok = true;
                for f in &polys {
                    let val = eval_vf(f, exact, &a)?;
                    let (lo, _) = val.ord_bounds();
                    if lo < ExtInt::Fin(j as i64 + 1) {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    next.push(c);
                }
            }
        }
        level = next;
    }
    let q = Q::from_integer(BigInt::from(p));
    Ok(Q::from_integer(BigInt::from(level.len())) * q_pow(&q, -((n * d) as i64)))
}

/// Convenience: `p^-n` as a rational.
pub fn p_pow_neg(p: u64, n: u32) -> Q {
    Q::one() / Q::from_integer(int_pow(p, n))
}

#[cfg(test)]
mod tests;
