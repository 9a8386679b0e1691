//! Cells over a basis and the pushforward along one valued-field variable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use serde::Deserialize;

use super::{Contribution, ConstructibleFn, IntegrationResult, MotivicError, Params};
use crate::formula::{count_rf_points, BadPrimes, Cmp, Formula, Node, RfTerm, Sort, VfLeaf, VfTerm, ZzTerm};
use crate::presburger::{sum_lsum, AffineForm, LSum, PresDomain};
use crate::symring::SymA;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum CellKind {
    #[serde(alias = "zero", alias = "ZeroCell")]
    Zero,
    #[serde(alias = "one", alias = "OneCell")]
    One,
}

/// The center of a cell: an explicit term, or a definable function given
/// only by its description (allowed for 1-cells).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Center {
    Term(VfTerm),
    Definable(String),
}

impl fmt::Display for Center {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Center::Term(t) => write!(f, "{t}"),
            Center::Definable(s) => write!(f, "{s}"),
        }
    }
}

/// A 0-cell `{z = c(y)}` or a 1-cell
/// `{z : ord(z - c(y)) = α(y), ac(z - c(y)) = ξ(y)}` over the basis `C`.
#[derive(Debug, Clone)]
pub struct Cell {
    pub id: String,
    pub kind: CellKind,
    pub basis: Formula,
    pub center: Center,
    pub alpha: Option<AffineForm>,
    pub xi: Option<RfTerm>,
    /// Coefficient `ψ` on the basis.
    pub psi: LSum,
    /// Symbolic class of the counted fibre, if known.
    pub count: Option<SymA>,
    pub note: String,
}

impl Cell {
    pub fn one(id: &str, basis: Formula, center: Center, alpha: AffineForm, xi: RfTerm, psi: LSum) -> Self {
        Self {
            id: id.to_string(),
            kind: CellKind::One,
            basis,
            center,
            alpha: Some(alpha),
            xi: Some(xi),
            psi,
            count: None,
            note: String::new(),
        }
    }

    pub fn zero(id: &str, basis: Formula, center: Center, psi: LSum) -> Self {
        Self {
            id: id.to_string(),
            kind: CellKind::Zero,
            basis,
            center,
            alpha: None,
            xi: None,
            psi,
            count: None,
            note: String::new(),
        }
    }

    pub fn with_count(mut self, c: SymA) -> Self {
        self.count = Some(c);
        self
    }

    fn bad(&self, msg: impl Into<String>) -> MotivicError {
        MotivicError::InvalidCell(self.id.clone(), msg.into())
    }

    fn vars_of(&self, s: Sort) -> BTreeSet<String> {
        self.basis.free().iter().filter(|(_, t)| *t == s).map(|(n, _)| n.clone()).collect()
    }

    /// Extra value-group variables of the basis, in declaration order.
    fn extra_zz(&self, params: &[(String, Sort)]) -> Vec<String> {
        self.basis
            .free()
            .iter()
            .filter(|(n, s)| *s == Sort::Zz && !params.iter().any(|(p, _)| p == n))
            .map(|(n, _)| n.clone())
            .collect()
    }

    fn check(&self, params: &[(String, Sort)]) -> Result<(), MotivicError> {
        if self.basis.free().iter().any(|(_, s)| *s == Sort::Vf) {
            return Err(self.bad("basis mentions valued-field variables; pass their ac/ord as parameters"));
        }
        let zz = self.vars_of(Sort::Zz);
        let rf = self.vars_of(Sort::Rf);
        for v in self.psi.params() {
            if !zz.contains(&v) {
                return Err(self.bad(format!("psi refers to {v}, not a value-group variable of the basis")));
            }
        }
        match self.kind {
            CellKind::Zero => {
                if self.alpha.is_some() || self.xi.is_some() {
                    return Err(self.bad("a 0-cell has no alpha and no xi"));
                }
                if let Some(v) = self.extra_zz(params).first() {
                    return Err(self.bad(format!("a 0-cell admits no extra value-group variable, found {v}")));
                }
            }
            CellKind::One => {
                let (Some(a), Some(xi)) = (&self.alpha, &self.xi) else {
                    return Err(self.bad("a 1-cell needs alpha and xi"));
                };
                if let Some(v) = a.vars().find(|v| !zz.contains(*v)) {
                    return Err(self.bad(format!("alpha refers to {v}, not a value-group variable of the basis")));
                }
                let (mut r, mut f) = (BTreeSet::new(), BTreeSet::new());
                xi.free_vars(&mut r, &mut f);
                if let Some(v) = r.iter().find(|v| !rf.contains(*v)) {
                    return Err(self.bad(format!("xi refers to {v}, not a residue variable of the basis")));
                }
                if !f.is_empty() {
                    return Err(self.bad("xi mentions valued-field variables"));
                }
            }
        }
        Ok(())
    }

    /// Split the basis into its residue-field part and a summation domain.
    fn split(&self, params: &[(String, Sort)]) -> Result<(Vec<Node>, PresDomain), MotivicError> {
        let mut rf_parts = Vec::new();
        let mut zz_parts = Vec::new();
        for c in self.basis.body().conjuncts() {
            let [vf, rf, zz] = c.free_vars();
            if !vf.is_empty() {
                return Err(self.bad("basis mentions valued-field variables"));
            }
            match (rf.is_empty(), zz.is_empty()) {
                (_, true) => rf_parts.push(c.clone()),
                (true, false) => zz_parts.push(c),
                (false, false) => return Err(self.bad(format!("conjunct {c} mixes residue and value-group variables"))),
            }
        }
        let domain = build_domain(&self.extra_zz(params), &zz_parts).map_err(|m| self.bad(m))?;
        Ok((rf_parts, domain))
    }

    /// Residue class counted by this cell: the RF part of the basis with
    /// `ξ ≠ 0`, over all declared fibre variables.
    fn class(&self, rf_parts: Vec<Node>, params: &[(String, Sort)]) -> Formula {
        let mut parts = rf_parts;
        if let Some(xi) = &self.xi {
            parts.push(Node::not(Node::RfEq(xi.clone(), RfTerm::Const(BigInt::from(0)))));
        }
        let node = Node::conjunction(parts);
        let [_, used, _] = node.free_vars();
        let free: Vec<(String, Sort)> = self
            .basis
            .free()
            .iter()
            .filter(|(n, s)| *s == Sort::Rf && (used.contains(n) || !params.iter().any(|(p, _)| p == n)))
            .cloned()
            .collect();
        Formula::new(free, node)
    }

    fn integrate(&self, params: &[(String, Sort)]) -> Result<ConstructibleFn, MotivicError> {
        self.check(params)?;
        match self.kind {
            CellKind::Zero => {
                // a point fibre has measure zero; only affine centers are handled
                match &self.center {
                    Center::Term(t) if is_affine(t) => Ok(ConstructibleFn::zero()),
                    c => Err(MotivicError::UnsupportedZeroCell(self.id.clone(), format!("center {c} is not affine"))),
                }
            }
            CellKind::One => {
                let alpha = self.alpha.as_ref().expect("checked");
                let (rf_parts, domain) = self.split(params)?;
                let class = self.class(rf_parts, params);
                let f = self.psi.shift(&alpha.neg().add_const(-1));
                let s = sum_lsum(&domain, &f).map_err(|e| MotivicError::NotSummable(self.id.clone(), e.to_string()))?;
                Ok(ConstructibleFn::term(class, self.count.clone(), s))
            }
        }
    }

    /// Bounds on `α` as affine forms in the parameters, when readable.
    fn alpha_range(&self, params: &[(String, Sort)]) -> (Option<AffineForm>, Option<AffineForm>) {
        let Some(a) = &self.alpha else { return (None, None) };
        let extra = self.extra_zz(params);
        let inner: Vec<&str> = a.vars().filter(|v| extra.iter().any(|e| e == v)).collect();
        match inner.as_slice() {
            [] => (Some(a.clone()), Some(a.clone())),
            [v] if a.coeff(v) == 1 => {
                let Ok((_, d)) = self.split(params) else { return (None, None) };
                let Some(r) = d.vars.iter().find(|r| r.name == *v) else { return (None, None) };
                let rest = a.without(v);
                (r.lower.as_ref().map(|l| l.add(&rest)), r.upper.as_ref().map(|u| u.add(&rest)))
            }
            _ => (None, None),
        }
    }
}

fn is_affine(t: &VfTerm) -> bool {
    // the uniformizer is a constant
    t.to_poly().terms().all(|(m, _)| m.iter().filter(|(l, _)| *l != VfLeaf::Unif).map(|(_, e)| *e).sum::<u32>() <= 1)
}

fn zz_affine(t: &ZzTerm) -> Result<AffineForm, String> {
    Ok(match t {
        ZzTerm::Var(v) => AffineForm::var(v),
        ZzTerm::Const(c) => AffineForm::constant(*c),
        ZzTerm::Add(a, b) => zz_affine(a)?.add(&zz_affine(b)?),
        ZzTerm::Sub(a, b) => zz_affine(a)?.sub(&zz_affine(b)?),
        ZzTerm::Neg(a) => zz_affine(a)?.neg(),
        ZzTerm::Scale(k, a) => zz_affine(a)?.scale(*k),
        ZzTerm::Inf | ZzTerm::Ord(_) => return Err(format!("{t} is not affine in the basis variables")),
    })
}

#[derive(Default)]
struct Bounds {
    lower: Option<AffineForm>,
    upper: Option<AffineForm>,
    cong: Option<(i64, i64)>,
}

fn set_once<T: PartialEq + fmt::Debug>(slot: &mut Option<T>, v: T, what: &str, name: &str) -> Result<(), String> {
    match slot {
        Some(old) if *old != v => Err(format!("several {what} bounds on {name}")),
        _ => {
            *slot = Some(v);
            Ok(())
        }
    }
}

/// Pivot: the last extra variable with a nonzero coefficient.
fn pivot(d: &AffineForm, extra: &[String]) -> Result<(String, i64), String> {
    let v = extra.iter().rev().find(|v| d.coeff(v) != 0).ok_or_else(|| format!("constraint {d} has no summation variable"))?;
    let c = d.coeff(v);
    if c.abs() != 1 {
        return Err(format!("coefficient {c} on {v} is not a unit"));
    }
    Ok((v.clone(), c))
}

/// `d ≤ -slack`, i.e. `c·v + rest ≤ -slack`.
fn add_le(b: &mut BTreeMap<String, Bounds>, d: &AffineForm, slack: i64, extra: &[String]) -> Result<(), String> {
    let (v, c) = pivot(d, extra)?;
    let rest = d.without(&v);
    let e = b.entry(v.clone()).or_default();
    if c == 1 {
        set_once(&mut e.upper, rest.neg().add_const(-slack), "upper", &v)
    } else {
        set_once(&mut e.lower, rest.add_const(slack), "lower", &v)
    }
}

fn build_domain(extra: &[String], parts: &[&Node]) -> Result<PresDomain, String> {
    let mut b: BTreeMap<String, Bounds> = BTreeMap::new();
    for n in parts {
        match n {
            Node::ZzCmp(x, cmp, y) => {
                let d = zz_affine(x)?.sub(&zz_affine(y)?);
                match cmp {
                    Cmp::Le => add_le(&mut b, &d, 0, extra)?,
                    Cmp::Lt => add_le(&mut b, &d, 1, extra)?,
                    Cmp::Eq => {
                        add_le(&mut b, &d, 0, extra)?;
                        add_le(&mut b, &d.neg(), 0, extra)?;
                    }
                }
            }
            Node::Not(inner) => match &**inner {
                Node::ZzCmp(x, Cmp::Le, y) => add_le(&mut b, &zz_affine(y)?.sub(&zz_affine(x)?), 1, extra)?,
                Node::ZzCmp(x, Cmp::Lt, y) => add_le(&mut b, &zz_affine(y)?.sub(&zz_affine(x)?), 0, extra)?,
                _ => return Err(format!("cannot read {n} as a bound")),
            },
            Node::ZzCong(x, y, m) => {
                let d = zz_affine(x)?.sub(&zz_affine(y)?);
                let (v, c) = pivot(&d, extra)?;
                let rest = d.without(&v);
                let r = rest.as_constant().ok_or_else(|| format!("congruence {n} has a parametric offset"))?;
                let m = *m as i64;
                set_once(&mut b.entry(v.clone()).or_default().cong, (m, (-r * c).rem_euclid(m)), "congruence", &v)?;
            }
            _ => return Err(format!("cannot read {n} as a bound")),
        }
    }
    let mut d = PresDomain::new();
    for v in extra {
        let e = b.remove(v).unwrap_or_default();
        d = d.var(v, e.lower, e.upper);
        if let Some((m, r)) = e.cong {
            d = d.congruence(m, r);
        }
    }
    d.validate().map_err(|e| e.to_string())?;
    Ok(d)
}

fn rename_rf_term(t: &RfTerm, map: &BTreeMap<String, String>) -> RfTerm {
    let r = |x: &RfTerm| Box::new(rename_rf_term(x, map));
    match t {
        RfTerm::Var(v) => RfTerm::Var(map.get(v).cloned().unwrap_or_else(|| v.clone())),
        RfTerm::Const(_) | RfTerm::Ac(_) => t.clone(),
        RfTerm::Add(a, b) => RfTerm::Add(r(a), r(b)),
        RfTerm::Sub(a, b) => RfTerm::Sub(r(a), r(b)),
        RfTerm::Mul(a, b) => RfTerm::Mul(r(a), r(b)),
        RfTerm::Neg(a) => RfTerm::Neg(r(a)),
        RfTerm::Pow(a, n) => RfTerm::Pow(r(a), *n),
    }
}

fn rename_rf(n: &Node, map: &BTreeMap<String, String>) -> Node {
    match n {
        Node::RfEq(a, b) => Node::RfEq(rename_rf_term(a, map), rename_rf_term(b, map)),
        Node::Not(a) => Node::not(rename_rf(a, map)),
        Node::And(a, b) => Node::and(rename_rf(a, map), rename_rf(b, map)),
        Node::Or(a, b) => Node::or(rename_rf(a, map), rename_rf(b, map)),
        Node::Exists(v, s, b) => {
            let mut inner = map.clone();
            inner.remove(v);
            Node::Exists(v.clone(), *s, Box::new(rename_rf(b, &inner)))
        }
        _ => n.clone(),
    }
}

/// Check that two 1-cells around the same center have separated `(α, ξ)`
/// signatures: provably disjoint `α` ranges, or `ξ` classes with no common
/// point over small residue fields.
fn check_separated(a: &Cell, b: &Cell, params: &[(String, Sort)]) -> Result<(), MotivicError> {
    let below = |hi: &Option<AffineForm>, lo: &Option<AffineForm>| match (hi, lo) {
        (Some(h), Some(l)) => h.sub(l).as_constant().is_some_and(|c| c < 0),
        _ => false,
    };
    let (alo, ahi) = a.alpha_range(params);
    let (blo, bhi) = b.alpha_range(params);
    if below(&ahi, &blo) || below(&bhi, &alo) {
        return Ok(());
    }
    let overlap = || MotivicError::CellOverlap(a.id.clone(), b.id.clone());
    let (ra, _) = a.split(params)?;
    let (rb, _) = b.split(params)?;
    let own: BTreeMap<String, String> = b
        .vars_of(Sort::Rf)
        .into_iter()
        .filter(|v| !params.iter().any(|(p, _)| p == v))
        .map(|v| (v.clone(), format!("{v}__b")))
        .collect();
    let (xa, xb) = (a.xi.clone().expect("1-cell"), rename_rf_term(b.xi.as_ref().expect("1-cell"), &own));
    let mut parts = ra;
    parts.extend(rb.iter().map(|n| rename_rf(n, &own)));
    parts.push(Node::RfEq(xa.clone(), xb));
    parts.push(Node::not(Node::RfEq(xa, RfTerm::Const(BigInt::from(0)))));
    let joint = Formula::from_node(Node::conjunction(parts));
    if joint.free().iter().any(|(_, s)| *s != Sort::Rf) {
        return Err(overlap());
    }
    for q in [5, 7] {
        if count_rf_points(&joint, q).map_err(|_| overlap())? > 0 {
            return Err(overlap());
        }
    }
    Ok(())
}

/// Integrate over a disjoint union of cells: each 1-cell contributes
/// `[C] ⊗ Σ L^(-α-1) ψ`, summed over its value-group variables.
pub fn integrate_cells(cells: &[Cell], params: &[(String, Sort)]) -> Result<IntegrationResult, MotivicError> {
    let mut seen = BTreeSet::new();
    for c in cells {
        if !seen.insert(c.id.clone()) {
            return Err(MotivicError::Invalid(format!("duplicate cell id {}", c.id)));
        }
        c.check(params)?;
    }
    let ones: Vec<&Cell> = cells.iter().filter(|c| c.kind == CellKind::One).collect();
    for (i, a) in ones.iter().enumerate() {
        for b in &ones[i + 1..] {
            if a.center == b.center {
                check_separated(a, b, params)?;
            }
        }
    }
    let mut value = ConstructibleFn::zero();
    let mut bad = BadPrimes::new();
    let mut derivation = Vec::new();
    for c in cells {
        let v = c.integrate(params)?;
        bad.merge(c.basis.bad_primes());
        value = value.add(&v);
        derivation.push(Contribution { cell: c.id.clone(), value: v });
    }
    Ok(IntegrationResult { value, bad_primes: bad, derivation })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCell {
    id: Option<String>,
    kind: CellKind,
    basis: String,
    center: String,
    alpha: Option<String>,
    xi: Option<String>,
    psi: Option<String>,
    count: Option<String>,
    #[serde(default)]
    note: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParam {
    name: String,
    sort: Sort,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBad {
    prime: u64,
    reason: String,
}

/// A valued-field parameter bound to `unit · ϖ^exponent` for the oracle.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Binding {
    #[serde(default = "one")]
    pub unit: i64,
    pub unif_pow: AffineForm,
}

fn one() -> i64 {
    1
}

fn one_u32() -> u32 {
    1
}

/// How to check a cell file against the oracle: the domain formula, the
/// integrand `|g|^power`, and bindings for valued-field parameters.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSetup {
    pub domain: String,
    pub integrand: String,
    #[serde(default = "one_u32")]
    pub power: u32,
    #[serde(default)]
    pub bindings: BTreeMap<String, Binding>,
    /// Extra precision per unit of each integer parameter.
    #[serde(default)]
    pub precision_step: BTreeMap<String, u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawData {
    #[serde(default)]
    description: String,
    #[serde(default)]
    parameters: Vec<RawParam>,
    #[serde(default)]
    presets: BTreeMap<String, BTreeMap<String, i64>>,
    #[serde(default)]
    bad_primes: Vec<RawBad>,
    cells: Vec<RawCell>,
    oracle: Option<OracleSetup>,
}

/// A cell-data file: parameters, cells, declared bad primes and an
/// optional oracle setup.
#[derive(Debug, Clone)]
pub struct CellData {
    pub description: String,
    pub parameters: Vec<(String, Sort)>,
    pub presets: BTreeMap<String, BTreeMap<String, i64>>,
    pub bad_primes: BadPrimes,
    pub cells: Vec<Cell>,
    pub oracle: Option<OracleSetup>,
}

impl CellData {
    pub fn from_json(src: &str) -> Result<Self, MotivicError> {
        let raw: RawData = serde_json::from_str(src).map_err(|e| MotivicError::Invalid(e.to_string()))?;
        let parameters: Vec<(String, Sort)> = raw.parameters.iter().map(|p| (p.name.clone(), p.sort)).collect();
        let mut bad = BadPrimes::new();
        for b in &raw.bad_primes {
            bad.insert(b.prime, b.reason.clone());
        }
        let mut cells = Vec::new();
        for (i, rc) in raw.cells.iter().enumerate() {
            cells.push(build_cell(rc, i, &parameters)?);
        }
        Ok(Self { description: raw.description, parameters, presets: raw.presets, bad_primes: bad, cells, oracle: raw.oracle })
    }

    pub fn integrate(&self) -> Result<IntegrationResult, MotivicError> {
        let mut r = integrate_cells(&self.cells, &self.parameters)?;
        r.bad_primes.merge(&self.bad_primes);
        Ok(r)
    }

    /// Parse `name=value` items and preset names, comma separated.
    pub fn params_from_str(&self, s: &str) -> Result<Params, MotivicError> {
        let mut out = Params::new();
        let mut put = |name: &str, v: i64| -> Result<(), MotivicError> {
            match self.parameters.iter().find(|(n, _)| n == name).map(|(_, s)| *s) {
                Some(Sort::Rf) if v >= 0 => {
                    out.rf.insert(name.to_string(), v as u64);
                }
                Some(Sort::Zz) => {
                    out.zz.insert(name.to_string(), v);
                }
                Some(_) => return Err(MotivicError::Invalid(format!("bad value {v} for {name}"))),
                None => return Err(MotivicError::UnboundParameter(name.to_string())),
            }
            Ok(())
        };
        for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            if let Some((k, v)) = item.split_once('=') {
                let v: i64 = v.trim().parse().map_err(|_| MotivicError::Invalid(format!("bad value in {item}")))?;
                put(k.trim(), v)?;
            } else {
                let preset =
                    self.presets.get(item).ok_or_else(|| MotivicError::Invalid(format!("unknown preset {item}")))?;
                for (k, v) in preset {
                    put(k, *v)?;
                }
            }
        }
        Ok(out)
    }
}

fn decls(params: &[(String, Sort)], only: Option<Sort>) -> String {
    let mut s = String::new();
    for sort in [Sort::Vf, Sort::Rf, Sort::Zz] {
        if only.is_some_and(|o| o != sort) {
            continue;
        }
        let names: Vec<&str> = params.iter().filter(|(_, t)| *t == sort).map(|(n, _)| n.as_str()).collect();
        if !names.is_empty() {
            s.push_str(&format!("{sort} {}; ", names.join(", ")));
        }
    }
    s
}

fn build_cell(rc: &RawCell, i: usize, params: &[(String, Sort)]) -> Result<Cell, MotivicError> {
    let id = rc.id.clone().unwrap_or_else(|| format!("cell{i}"));
    let bad = |m: String| MotivicError::InvalidCell(id.clone(), m);
    // parameters other than VF ones are visible in the basis
    let visible: Vec<(String, Sort)> = params.iter().filter(|(_, s)| *s != Sort::Vf).cloned().collect();
    let basis = Formula::parse(&format!("{}{}", decls(&visible, None), rc.basis))
        .map_err(|e| bad(format!("basis: {e}")))?;
    let center = parse_center(&rc.center, params);
    let psi = LSum::parse(rc.psi.as_deref().unwrap_or("1")).map_err(|e| bad(format!("psi: {e}")))?;
    let count = rc.count.as_deref().map(SymA::parse).transpose().map_err(|e| bad(format!("count: {e}")))?;
    let mut cell = match rc.kind {
        CellKind::Zero => {
            if rc.alpha.is_some() || rc.xi.is_some() {
                return Err(bad("a 0-cell has no alpha and no xi".into()));
            }
            Cell::zero(&id, basis, center, psi)
        }
        CellKind::One => {
            let alpha = AffineForm::parse(rc.alpha.as_deref().ok_or_else(|| bad("missing alpha".into()))?)
                .map_err(|e| bad(format!("alpha: {e}")))?;
            let xi_src = rc.xi.as_deref().ok_or_else(|| bad("missing xi".into()))?;
            let rf_decls: Vec<(String, Sort)> = basis.free().iter().filter(|(_, s)| *s == Sort::Rf).cloned().collect();
            let xf = Formula::parse(&format!("{}({xi_src}) == 0", decls(&rf_decls, Some(Sort::Rf))))
                .map_err(|e| bad(format!("xi: {e}")))?;
            let Node::RfEq(xi, _) = xf.body() else {
                return Err(bad(format!("xi {xi_src} is not a residue term")));
            };
            Cell::one(&id, basis, center, alpha, xi.clone(), psi)
        }
    };
    cell.count = count;
    cell.note = rc.note.clone();
    Ok(cell)
}

/// A term over the valued-field parameters, else a described function.
fn parse_center(src: &str, params: &[(String, Sort)]) -> Center {
    let vf: Vec<(String, Sort)> = params.iter().filter(|(_, s)| *s == Sort::Vf).cloned().collect();
    if let Ok(f) = Formula::parse(&format!("{}({src}) == 0", decls(&vf, None))) {
        if f.free().iter().all(|(n, _)| vf.iter().any(|(p, _)| p == n)) {
            if let Node::VfEq(t, _) = f.body() {
                return Center::Term(t.clone());
            }
        }
    }
    Center::Definable(src.trim().to_string())
}
