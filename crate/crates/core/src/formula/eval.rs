//! Finite-precision interpretation and residue-field point counting.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::ast::{Cmp, Node, RfLeaf, Sort, VfLeaf, VfTerm, ZzTerm};
use super::mvpoly::MvPoly;
use super::{mismatch, Formula, FormulaError};
use crate::arith::{int_pow, rat_mod_p};
use crate::localfield::{Approx, ExtInt, LFElem, LocalFieldError, LocalFieldSpec};

/// Default cap on enumerated cases (points times quantifier instances).
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Kleene three-valued truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Truth3 {
    True,
    False,
    Undecided,
}

impl Truth3 {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Truth3::True
        } else {
            Truth3::False
        }
    }

    pub fn not(self) -> Self {
        match self {
            Truth3::True => Truth3::False,
            Truth3::False => Truth3::True,
            Truth3::Undecided => Truth3::Undecided,
        }
    }

    pub fn and(self, o: Self) -> Self {
        match (self, o) {
            (Truth3::False, _) | (_, Truth3::False) => Truth3::False,
            (Truth3::True, Truth3::True) => Truth3::True,
            _ => Truth3::Undecided,
        }
    }

    pub fn or(self, o: Self) -> Self {
        self.not().and(o.not()).not()
    }

    pub fn is_decided(self) -> bool {
        self != Truth3::Undecided
    }
}

/// A sort-tagged value for a variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Vf(Approx),
    Rf(u64),
    Zz(ExtInt),
}

impl Value {
    pub fn sort(&self) -> Sort {
        match self {
            Value::Vf(_) => Sort::Vf,
            Value::Rf(_) => Sort::Rf,
            Value::Zz(_) => Sort::Zz,
        }
    }
}

impl From<LFElem> for Value {
    fn from(e: LFElem) -> Self {
        Value::Vf(Approx::Known(e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    /// Search VF quantifiers over the residue boxes of `O` at the working precision.
    pub oracle_vf: bool,
    /// Half-width of the window for unbounded ZZ quantifiers (default: the precision).
    pub zz_window: Option<i64>,
    /// Cap on quantifier instances explored in one evaluation.
    pub budget: u64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { oracle_vf: false, zz_window: None, budget: DEFAULT_BUDGET }
    }
}

#[derive(Debug, Clone)]
enum CZ {
    Var(String),
    Const(i64),
    Inf,
    Ord(MvPoly<VfLeaf>),
    Add(Box<CZ>, Box<CZ>),
    Sub(Box<CZ>, Box<CZ>),
    Neg(Box<CZ>),
    Scale(i64, Box<CZ>),
}

#[derive(Debug, Clone)]
enum CN {
    Lit(Truth3),
    Vf(MvPoly<VfLeaf>),
    Rf(MvPoly<RfLeaf>, BTreeMap<VfTerm, MvPoly<VfLeaf>>),
    Zz(CZ, Cmp, CZ),
    Cong(CZ, CZ, u64),
    Not(Box<CN>),
    And(Box<CN>, Box<CN>),
    Or(Box<CN>, Box<CN>),
    /// Bound variable, sort, body, and syntactic bounds for ZZ variables.
    Exists(String, Sort, Box<CN>, Option<(CZ, CZ)>),
}

fn compile_z(t: &ZzTerm) -> CZ {
    let b = |x: &ZzTerm| Box::new(compile_z(x));
    match t {
        ZzTerm::Var(v) => CZ::Var(v.clone()),
        ZzTerm::Const(c) => CZ::Const(*c),
        ZzTerm::Inf => CZ::Inf,
        ZzTerm::Ord(a) => CZ::Ord(a.to_poly()),
        ZzTerm::Add(x, y) => CZ::Add(b(x), b(y)),
        ZzTerm::Sub(x, y) => CZ::Sub(b(x), b(y)),
        ZzTerm::Neg(x) => CZ::Neg(b(x)),
        ZzTerm::Scale(c, x) => CZ::Scale(*c, b(x)),
    }
}

fn mentions(t: &ZzTerm, x: &str) -> bool {
    let mut zz = Default::default();
    let mut vf = Default::default();
    t.free_vars(&mut zz, &mut vf);
    zz.contains(x)
}

/// Inclusive bounds on `x` read off the top-level conjuncts of `body`.
fn syntactic_bounds(x: &str, body: &Node) -> Option<(CZ, CZ)> {
    let is_x = |t: &ZzTerm| matches!(t, ZzTerm::Var(v) if v == x);
    let shift = |t: &ZzTerm, d: i64| {
        if d == 0 {
            compile_z(t)
        } else {
            CZ::Add(Box::new(compile_z(t)), Box::new(CZ::Const(d)))
        }
    };
    let (mut lo, mut hi) = (None, None);
    for c in body.conjuncts() {
        if let Node::ZzCmp(a, op, b) = c {
            if is_x(b) && !mentions(a, x) && lo.is_none() {
                lo = Some(shift(a, if *op == Cmp::Lt { 1 } else { 0 }));
                if *op == Cmp::Eq {
                    hi = Some(compile_z(a));
                }
            }
            if is_x(a) && !mentions(b, x) && hi.is_none() {
                hi = Some(shift(b, if *op == Cmp::Lt { -1 } else { 0 }));
                if *op == Cmp::Eq && lo.is_none() {
                    lo = Some(compile_z(b));
                }
            }
        }
    }
    Some((lo?, hi?))
}

fn compile(n: &Node) -> CN {
    let b = |x: &Node| Box::new(compile(x));
    match n {
        Node::True => CN::Lit(Truth3::True),
        Node::False => CN::Lit(Truth3::False),
        Node::VfEq(x, y) => {
            let d = x.to_poly().sub(&y.to_poly());
            if d.is_zero() {
                CN::Lit(Truth3::True)
            } else {
                CN::Vf(d)
            }
        }
        Node::RfEq(x, y) => {
            let d = x.to_poly().sub(&y.to_poly());
            let acs = d
                .leaves()
                .into_iter()
                .filter_map(|l| match l {
                    RfLeaf::Ac(t) => Some((t.clone(), t.to_poly())),
                    RfLeaf::Var(_) => None,
                })
                .collect();
            CN::Rf(d, acs)
        }
        Node::ZzCmp(x, c, y) => CN::Zz(compile_z(x), *c, compile_z(y)),
        Node::ZzCong(x, y, d) => CN::Cong(compile_z(x), compile_z(y), *d),
        Node::Not(a) => CN::Not(b(a)),
        Node::And(x, y) => CN::And(b(x), b(y)),
        Node::Or(x, y) => CN::Or(b(x), b(y)),
        Node::Exists(x, s, body) => {
            let bounds = if *s == Sort::Zz { syntactic_bounds(x, body) } else { None };
            CN::Exists(x.clone(), *s, b(body), bounds)
        }
    }
}

fn count_rf_quantifiers(n: &CN) -> u32 {
    match n {
        CN::Exists(_, s, b, _) => count_rf_quantifiers(b) + u32::from(*s == Sort::Rf),
        CN::Not(a) => count_rf_quantifiers(a),
        CN::And(a, b) | CN::Or(a, b) => count_rf_quantifiers(a).max(count_rf_quantifiers(b)),
        _ => 0,
    }
}

/// Extended integers with both infinities, for interval bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum B {
    NegInf,
    Fin(i128),
    PosInf,
}

type Iv = (B, B);

fn badd(x: B, y: B, upper: bool) -> B {
    match (x, y) {
        (B::Fin(a), B::Fin(b)) => B::Fin(a + b),
        (B::PosInf, B::NegInf) | (B::NegInf, B::PosInf) => {
            if upper {
                B::PosInf
            } else {
                B::NegInf
            }
        }
        (B::PosInf, _) | (_, B::PosInf) => B::PosInf,
        _ => B::NegInf,
    }
}

fn bneg(x: B) -> B {
    match x {
        B::NegInf => B::PosInf,
        B::PosInf => B::NegInf,
        B::Fin(a) => B::Fin(-a),
    }
}

fn bscale(c: i64, x: B) -> B {
    match (c.signum(), x) {
        (0, _) => B::Fin(0),
        (_, B::Fin(a)) => B::Fin(c as i128 * a),
        (1, x) => x,
        (_, x) => bneg(x),
    }
}

fn point(iv: Iv) -> Option<B> {
    (iv.0 == iv.1).then_some(iv.0)
}

fn exhausted(e: &FormulaError) -> bool {
    matches!(e, FormulaError::LocalField(LocalFieldError::PrecisionExhausted { .. }))
}

/// A formula prepared for repeated evaluation.
#[derive(Debug, Clone)]
pub struct Compiled {
    free: Vec<(String, Sort)>,
    root: CN,
}

struct Ctx<'a> {
    spec: LocalFieldSpec,
    opts: &'a EvalOptions,
    env: Vec<(String, Value)>,
    spent: u64,
}

impl Ctx<'_> {
    fn lookup(&self, v: &str) -> Result<&Value, FormulaError> {
        self.env
            .iter()
            .rev()
            .find(|(n, _)| n == v)
            .map(|(_, x)| x)
            .ok_or_else(|| FormulaError::UnboundVariable(v.to_string()))
    }

    fn tick(&mut self, n: u64) -> Result<(), FormulaError> {
        self.spent = self.spent.saturating_add(n);
        if self.spent > self.opts.budget {
            return Err(FormulaError::TooLarge(format!("{} quantifier instances", self.spent)));
        }
        Ok(())
    }

    fn vf(&self, p: &MvPoly<VfLeaf>) -> Result<Approx, FormulaError> {
        let spec = self.spec;
        p.eval(
            Approx::Known(LFElem::zero(spec)),
            &|c| Ok(Approx::Known(LFElem::embed_rational(c, spec)?)),
            &|l| match l {
                VfLeaf::Unif => Ok(Approx::Known(LFElem::uniformizer(spec))),
                VfLeaf::Var(v) => match self.lookup(v)? {
                    Value::Vf(a) => Ok(a.clone()),
                    other => Err(mismatch(v.clone(), Sort::Vf, other.sort())),
                },
            },
            &|a, b| Ok(a.add(b)?),
            &|a, b| Ok(a.mul(b)?),
        )
    }

    fn ord(&self, p: &MvPoly<VfLeaf>) -> Result<Iv, FormulaError> {
        let a = match self.vf(p) {
            Err(e) if exhausted(&e) => return Ok((B::NegInf, B::PosInf)),
            r => r?,
        };
        Ok(match a {
            Approx::Known(e) => match (e.ord(), e.is_exact()) {
                (ExtInt::Fin(v), _) => (B::Fin(v as i128), B::Fin(v as i128)),
                (ExtInt::Inf, true) => (B::PosInf, B::PosInf),
                (ExtInt::Inf, false) => {
                    (e.absolute_precision().map_or(B::NegInf, |x| B::Fin(x as i128)), B::PosInf)
                }
            },
            Approx::AtLeast(k) => (B::Fin(k as i128), B::PosInf),
        })
    }

    fn zz(&self, t: &CZ) -> Result<Iv, FormulaError> {
        Ok(match t {
            CZ::Var(v) => match self.lookup(v)? {
                Value::Zz(ExtInt::Fin(n)) => (B::Fin(*n as i128), B::Fin(*n as i128)),
                Value::Zz(ExtInt::Inf) => (B::PosInf, B::PosInf),
                other => return Err(mismatch(v.clone(), Sort::Zz, other.sort())),
            },
            CZ::Const(c) => (B::Fin(*c as i128), B::Fin(*c as i128)),
            CZ::Inf => (B::PosInf, B::PosInf),
            CZ::Ord(p) => self.ord(p)?,
            CZ::Add(a, b) => {
                let (x, y) = (self.zz(a)?, self.zz(b)?);
                (badd(x.0, y.0, false), badd(x.1, y.1, true))
            }
            CZ::Sub(a, b) => {
                let (x, y) = (self.zz(a)?, self.zz(b)?);
                (badd(x.0, bneg(y.1), false), badd(x.1, bneg(y.0), true))
            }
            CZ::Neg(a) => {
                let x = self.zz(a)?;
                (bneg(x.1), bneg(x.0))
            }
            CZ::Scale(c, a) => {
                let x = self.zz(a)?;
                let (l, h) = (bscale(*c, x.0), bscale(*c, x.1));
                (l.min(h), l.max(h))
            }
        })
    }

    fn rf(&self, p: &MvPoly<RfLeaf>, acs: &BTreeMap<VfTerm, MvPoly<VfLeaf>>) -> Result<Option<u64>, FormulaError> {
        let q = self.spec.prime;
        let mut leaves = BTreeMap::new();
        for l in p.leaves() {
            let v = match &l {
                RfLeaf::Var(v) => match self.lookup(v)? {
                    Value::Rf(u) => u % q,
                    other => return Err(mismatch(v.clone(), Sort::Rf, other.sort())),
                },
                RfLeaf::Ac(t) => match self.vf(&acs[t]) {
                    Err(e) if exhausted(&e) => return Ok(None),
                    r => match r?.ac() {
                        Some(a) => a as u64,
                        None => return Ok(None),
                    },
                },
            };
            leaves.insert(l, v);
        }
        let mut acc: u128 = 0;
        for (m, c) in p.terms() {
            let c = rat_mod_p(c, q)
                .ok_or_else(|| FormulaError::Unsupported(format!("coefficient {c} has no residue mod {q}")))?;
            let mut t = c as u128;
            for (l, e) in m {
                let x = leaves[l] as u128;
                for _ in 0..*e {
                    t = t * x % q as u128;
                }
            }
            acc = (acc + t) % q as u128;
        }
        Ok(Some(acc as u64))
    }

    fn eval(&mut self, n: &CN) -> Result<Truth3, FormulaError> {
        match n {
            CN::Lit(t) => Ok(*t),
            CN::Vf(p) => Ok(match self.vf(p) {
                Err(e) if exhausted(&e) => Truth3::Undecided,
                r => match r? {
                    Approx::Known(e) if e.is_zero() && e.is_exact() => Truth3::True,
                    Approx::Known(e) if !e.is_zero() => Truth3::False,
                    _ => Truth3::Undecided,
                },
            }),
            CN::Rf(p, acs) => Ok(match self.rf(p, acs)? {
                Some(v) => Truth3::from_bool(v == 0),
                None => Truth3::Undecided,
            }),
            CN::Zz(a, op, b) => {
                let (x, y) = (self.zz(a)?, self.zz(b)?);
                Ok(match op {
                    Cmp::Eq => match (point(x), point(y)) {
                        (Some(u), Some(v)) => Truth3::from_bool(u == v),
                        _ if x.1 < y.0 || y.1 < x.0 => Truth3::False,
                        _ => Truth3::Undecided,
                    },
                    Cmp::Le if x.1 <= y.0 => Truth3::True,
                    Cmp::Le if x.0 > y.1 => Truth3::False,
                    Cmp::Lt if x.1 < y.0 => Truth3::True,
                    Cmp::Lt if x.0 >= y.1 => Truth3::False,
                    _ => Truth3::Undecided,
                })
            }
            CN::Cong(a, b, d) => {
                let (x, y) = (self.zz(a)?, self.zz(b)?);
                Ok(match (point(x), point(y)) {
                    (Some(B::Fin(u)), Some(B::Fin(v))) => Truth3::from_bool((u - v).rem_euclid(*d as i128) == 0),
                    (Some(u), Some(v)) => Truth3::from_bool(u == v),
                    _ => Truth3::Undecided,
                })
            }
            CN::Not(a) => Ok(self.eval(a)?.not()),
            CN::And(a, b) => {
                let x = self.eval(a)?;
                if x == Truth3::False {
                    return Ok(x);
                }
                Ok(x.and(self.eval(b)?))
            }
            CN::Or(a, b) => {
                let x = self.eval(a)?;
                if x == Truth3::True {
                    return Ok(x);
                }
                Ok(x.or(self.eval(b)?))
            }
            CN::Exists(x, s, body, bounds) => self.exists(x, *s, body, bounds.as_ref()),
        }
    }

    /// Kleene disjunction of `body` over the candidate values, stopping at the first True.
    fn search(
        &mut self,
        x: &str,
        body: &CN,
        values: impl Iterator<Item = Value>,
    ) -> Result<Truth3, FormulaError> {
        let mut acc = Truth3::False;
        for v in values {
            self.tick(1)?;
            self.env.push((x.to_string(), v));
            let r = self.eval(body);
            self.env.pop();
            acc = acc.or(r?);
            if acc == Truth3::True {
                break;
            }
        }
        Ok(acc)
    }

    fn exists(&mut self, x: &str, s: Sort, body: &CN, bounds: Option<&(CZ, CZ)>) -> Result<Truth3, FormulaError> {
        match s {
            Sort::Rf => {
                let q = self.spec.prime;
                self.search(x, body, (0..q).map(Value::Rf))
            }
            Sort::Zz => {
                if let Some((lo, hi)) = bounds {
                    if let (Some(B::Fin(l)), Some(B::Fin(h))) = (point(self.zz(lo)?), point(self.zz(hi)?)) {
                        if h < l {
                            return Ok(Truth3::False);
                        }
                        if (h - l) as u128 > self.opts.budget as u128 {
                            return Err(FormulaError::TooLarge(format!("range {l}..={h} for {x}")));
                        }
                        let vals = (l..=h).map(|n| Value::Zz(ExtInt::Fin(n as i64)));
                        return self.search(x, body, vals);
                    }
                }
                let w = self.opts.zz_window.unwrap_or(self.spec.precision as i64);
                let r = self.search(x, body, (-w..=w).map(|n| Value::Zz(ExtInt::Fin(n))))?;
                Ok(if r == Truth3::True { r } else { Truth3::Undecided })
            }
            Sort::Vf => {
                if !self.opts.oracle_vf {
                    return Err(FormulaError::VfQuantifier(x.to_string()));
                }
                let n = self.spec.precision;
                let boxes = (self.spec.prime as f64).powi(n as i32);
                if boxes > self.opts.budget as f64 {
                    return Err(FormulaError::TooLarge(format!("{boxes} residue boxes for {x}")));
                }
                let spec = self.spec;
                let count = int_pow(spec.prime, n);
                let mut i = BigInt::from(0);
                let vals = std::iter::from_fn(move || {
                    (i < count).then(|| {
                        let v = Value::from(LFElem::residue_rep(&i, n, spec));
                        i += 1;
                        v
                    })
                });
                let r = self.search(x, body, vals)?;
                Ok(if r == Truth3::True { r } else { Truth3::Undecided })
            }
        }
    }
}

impl Compiled {
    pub fn new(phi: &Formula) -> Self {
        Self { free: phi.free().to_vec(), root: compile(phi.body()) }
    }

    pub fn free(&self) -> &[(String, Sort)] {
        &self.free
    }

    /// Evaluate under an assignment covering every free variable.
    pub fn eval(
        &self,
        spec: LocalFieldSpec,
        asg: &BTreeMap<String, Value>,
        opts: &EvalOptions,
    ) -> Result<Truth3, FormulaError> {
        let mut env = Vec::with_capacity(self.free.len());
        for (v, s) in &self.free {
            let val = asg.get(v).ok_or_else(|| FormulaError::UnboundVariable(v.clone()))?;
            if val.sort() != *s {
                return Err(mismatch(v.clone(), *s, val.sort()));
            }
            env.push((v.clone(), val.clone()));
        }
        let mut ctx = Ctx { spec, opts, env, spent: 0 };
        match ctx.eval(&self.root) {
            Err(e) if exhausted(&e) => Ok(Truth3::Undecided),
            r => r,
        }
    }
}

/// Evaluate a VF polynomial under an assignment.
pub fn eval_vf(p: &MvPoly<VfLeaf>, spec: LocalFieldSpec, asg: &BTreeMap<String, Value>) -> Result<Approx, FormulaError> {
    let opts = EvalOptions::default();
    let env = asg.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    Ctx { spec, opts: &opts, env, spent: 0 }.vf(p)
}

/// Interpret a formula over a local field at its working precision.
pub fn interpret(phi: &Formula, spec: LocalFieldSpec, asg: &BTreeMap<String, Value>) -> Result<Truth3, FormulaError> {
    interpret_with(phi, spec, asg, &EvalOptions::default())
}

pub fn interpret_with(
    phi: &Formula,
    spec: LocalFieldSpec,
    asg: &BTreeMap<String, Value>,
    opts: &EvalOptions,
) -> Result<Truth3, FormulaError> {
    Compiled::new(phi).eval(spec, asg, opts)
}

/// Number of points in `F_q^n` satisfying an RF formula in `n` free variables.
pub fn count_rf_points(phi: &Formula, q: u64) -> Result<u64, FormulaError> {
    count_rf_points_with(phi, q, &BTreeMap::new(), DEFAULT_BUDGET)
}

/// As [`count_rf_points`], with some RF variables held at fixed residues.
pub fn count_rf_points_with(
    phi: &Formula,
    q: u64,
    fixed: &BTreeMap<String, u64>,
    budget: u64,
) -> Result<u64, FormulaError> {
    let spec = LocalFieldSpec::fpt(q, 1)?;
    let mut vars = Vec::new();
    for (v, s) in phi.free() {
        if *s != Sort::Rf {
            return Err(FormulaError::Unsupported(format!("counting needs residue variables only, {v} is {s}")));
        }
        if !fixed.contains_key(v) {
            vars.push(v.clone());
        }
    }
    let c = Compiled::new(phi);
    let depth = vars.len() as u32 + count_rf_quantifiers(&c.root);
    let cost = (q as f64).powi(depth as i32);
    if cost > budget as f64 {
        return Err(FormulaError::TooLarge(format!("{q}^{depth} residue points")));
    }
    let opts = EvalOptions { budget, ..EvalOptions::default() };
    let base: BTreeMap<String, Value> = fixed.iter().map(|(k, v)| (k.clone(), Value::Rf(*v % q))).collect();

    let count_from = |first: Option<u64>| -> Result<u64, FormulaError> {
        let mut asg = base.clone();
        let rest = if first.is_some() { &vars[1..] } else { &vars[..] };
        if let Some(u) = first {
            asg.insert(vars[0].clone(), Value::Rf(u));
        }
        let mut digits = vec![0u64; rest.len()];
        let mut n = 0u64;
        loop {
            for (v, d) in rest.iter().zip(&digits) {
                asg.insert(v.clone(), Value::Rf(*d));
            }
            match c.eval(spec, &asg, &opts)? {
                Truth3::True => n += 1,
                Truth3::False => {}
                Truth3::Undecided => {
                    return Err(FormulaError::Unsupported("residue formula did not decide".into()));
                }
            }
            let mut i = 0;
            loop {
                if i == digits.len() {
                    return Ok(n);
                }
                digits[i] += 1;
                if digits[i] < q {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
        }
    };

    if vars.is_empty() {
        return count_from(None);
    }
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..q).into_par_iter().map(|u| count_from(Some(u))).sum()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..q).map(|u| count_from(Some(u))).sum()
    }
}
