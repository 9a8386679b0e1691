//! Typed syntax trees and the pretty-printer.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use super::mvpoly::MvPoly;
use crate::arith::Q;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sort {
    Vf,
    Rf,
    Zz,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Vf => "vf",
            Sort::Rf => "rf",
            Sort::Zz => "zz",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VfTerm {
    Var(String),
    Const(BigInt),
    /// The uniformizer symbol `t`.
    Unif,
    Add(Box<VfTerm>, Box<VfTerm>),
    Sub(Box<VfTerm>, Box<VfTerm>),
    Mul(Box<VfTerm>, Box<VfTerm>),
    Neg(Box<VfTerm>),
    Pow(Box<VfTerm>, u32),
    /// Division by a nonzero integer literal.
    Div(Box<VfTerm>, BigInt),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RfTerm {
    Var(String),
    Const(BigInt),
    Ac(Box<VfTerm>),
    Add(Box<RfTerm>, Box<RfTerm>),
    Sub(Box<RfTerm>, Box<RfTerm>),
    Mul(Box<RfTerm>, Box<RfTerm>),
    Neg(Box<RfTerm>),
    Pow(Box<RfTerm>, u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ZzTerm {
    Var(String),
    Const(i64),
    Inf,
    Ord(Box<VfTerm>),
    Add(Box<ZzTerm>, Box<ZzTerm>),
    Sub(Box<ZzTerm>, Box<ZzTerm>),
    Neg(Box<ZzTerm>),
    Scale(i64, Box<ZzTerm>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cmp {
    Eq,
    Le,
    Lt,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    True,
    False,
    VfEq(VfTerm, VfTerm),
    RfEq(RfTerm, RfTerm),
    ZzCmp(ZzTerm, Cmp, ZzTerm),
    /// `a == b mod d`
    ZzCong(ZzTerm, ZzTerm, u64),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Exists(String, Sort, Box<Node>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VfLeaf {
    Var(String),
    Unif,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RfLeaf {
    Var(String),
    Ac(VfTerm),
}

fn qi(n: &BigInt) -> Q {
    Q::from_integer(n.clone())
}

impl VfTerm {
    pub fn var(s: &str) -> Self {
        VfTerm::Var(s.to_string())
    }

    pub fn to_poly(&self) -> MvPoly<VfLeaf> {
        match self {
            VfTerm::Var(v) => MvPoly::leaf(VfLeaf::Var(v.clone())),
            VfTerm::Const(c) => MvPoly::constant(qi(c)),
            VfTerm::Unif => MvPoly::leaf(VfLeaf::Unif),
            VfTerm::Add(a, b) => a.to_poly().add(&b.to_poly()),
            VfTerm::Sub(a, b) => a.to_poly().sub(&b.to_poly()),
            VfTerm::Mul(a, b) => a.to_poly().mul(&b.to_poly()),
            VfTerm::Neg(a) => a.to_poly().neg(),
            VfTerm::Pow(a, n) => a.to_poly().pow(*n),
            VfTerm::Div(a, d) => a.to_poly().scale(&qi(d).recip()),
        }
    }

    pub fn free_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            VfTerm::Var(v) => {
                out.insert(v.clone());
            }
            VfTerm::Const(_) | VfTerm::Unif => {}
            VfTerm::Add(a, b) | VfTerm::Sub(a, b) | VfTerm::Mul(a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
            VfTerm::Neg(a) | VfTerm::Pow(a, _) | VfTerm::Div(a, _) => a.free_vars(out),
        }
    }

    /// Substitute a VF term for a variable.
    pub fn subst(&self, v: &str, by: &VfTerm) -> VfTerm {
        let s = |t: &VfTerm| Box::new(t.subst(v, by));
        match self {
            VfTerm::Var(x) if x == v => by.clone(),
            VfTerm::Var(_) | VfTerm::Const(_) | VfTerm::Unif => self.clone(),
            VfTerm::Add(a, b) => VfTerm::Add(s(a), s(b)),
            VfTerm::Sub(a, b) => VfTerm::Sub(s(a), s(b)),
            VfTerm::Mul(a, b) => VfTerm::Mul(s(a), s(b)),
            VfTerm::Neg(a) => VfTerm::Neg(s(a)),
            VfTerm::Pow(a, n) => VfTerm::Pow(s(a), *n),
            VfTerm::Div(a, d) => VfTerm::Div(s(a), d.clone()),
        }
    }

    fn prec(&self) -> u8 {
        match self {
            VfTerm::Add(..) | VfTerm::Sub(..) => 1,
            VfTerm::Mul(..) | VfTerm::Div(..) => 2,
            VfTerm::Neg(_) => 3,
            VfTerm::Pow(..) => 4,
            VfTerm::Const(c) if c.is_negative() => 0,
            _ => 5,
        }
    }
}

impl RfTerm {
    pub fn to_poly(&self) -> MvPoly<RfLeaf> {
        match self {
            RfTerm::Var(v) => MvPoly::leaf(RfLeaf::Var(v.clone())),
            RfTerm::Const(c) => MvPoly::constant(qi(c)),
            RfTerm::Ac(a) => MvPoly::leaf(RfLeaf::Ac((**a).clone())),
            RfTerm::Add(a, b) => a.to_poly().add(&b.to_poly()),
            RfTerm::Sub(a, b) => a.to_poly().sub(&b.to_poly()),
            RfTerm::Mul(a, b) => a.to_poly().mul(&b.to_poly()),
            RfTerm::Neg(a) => a.to_poly().neg(),
            RfTerm::Pow(a, n) => a.to_poly().pow(*n),
        }
    }

    pub fn free_vars(&self, rf: &mut BTreeSet<String>, vf: &mut BTreeSet<String>) {
        match self {
            RfTerm::Var(v) => {
                rf.insert(v.clone());
            }
            RfTerm::Const(_) => {}
            RfTerm::Ac(a) => a.free_vars(vf),
            RfTerm::Add(a, b) | RfTerm::Sub(a, b) | RfTerm::Mul(a, b) => {
                a.free_vars(rf, vf);
                b.free_vars(rf, vf);
            }
            RfTerm::Neg(a) | RfTerm::Pow(a, _) => a.free_vars(rf, vf),
        }
    }

    pub fn subst_vf(&self, v: &str, by: &VfTerm) -> RfTerm {
        let s = |t: &RfTerm| Box::new(t.subst_vf(v, by));
        match self {
            RfTerm::Var(_) | RfTerm::Const(_) => self.clone(),
            RfTerm::Ac(a) => RfTerm::Ac(Box::new(a.subst(v, by))),
            RfTerm::Add(a, b) => RfTerm::Add(s(a), s(b)),
            RfTerm::Sub(a, b) => RfTerm::Sub(s(a), s(b)),
            RfTerm::Mul(a, b) => RfTerm::Mul(s(a), s(b)),
            RfTerm::Neg(a) => RfTerm::Neg(s(a)),
            RfTerm::Pow(a, n) => RfTerm::Pow(s(a), *n),
        }
    }

    fn prec(&self) -> u8 {
        match self {
            RfTerm::Add(..) | RfTerm::Sub(..) => 1,
            RfTerm::Mul(..) => 2,
            RfTerm::Neg(_) => 3,
            RfTerm::Pow(..) => 4,
            RfTerm::Const(c) if c.is_negative() => 0,
            _ => 5,
        }
    }
}

impl ZzTerm {
    pub fn free_vars(&self, zz: &mut BTreeSet<String>, vf: &mut BTreeSet<String>) {
        match self {
            ZzTerm::Var(v) => {
                zz.insert(v.clone());
            }
            ZzTerm::Const(_) | ZzTerm::Inf => {}
            ZzTerm::Ord(a) => a.free_vars(vf),
            ZzTerm::Add(a, b) | ZzTerm::Sub(a, b) => {
                a.free_vars(zz, vf);
                b.free_vars(zz, vf);
            }
            ZzTerm::Neg(a) | ZzTerm::Scale(_, a) => a.free_vars(zz, vf),
        }
    }

    pub fn subst_vf(&self, v: &str, by: &VfTerm) -> ZzTerm {
        let s = |t: &ZzTerm| Box::new(t.subst_vf(v, by));
        match self {
            ZzTerm::Var(_) | ZzTerm::Const(_) | ZzTerm::Inf => self.clone(),
            ZzTerm::Ord(a) => ZzTerm::Ord(Box::new(a.subst(v, by))),
            ZzTerm::Add(a, b) => ZzTerm::Add(s(a), s(b)),
            ZzTerm::Sub(a, b) => ZzTerm::Sub(s(a), s(b)),
            ZzTerm::Neg(a) => ZzTerm::Neg(s(a)),
            ZzTerm::Scale(c, a) => ZzTerm::Scale(*c, s(a)),
        }
    }

    fn prec(&self) -> u8 {
        match self {
            ZzTerm::Add(..) | ZzTerm::Sub(..) => 1,
            ZzTerm::Scale(..) => 2,
            ZzTerm::Neg(_) => 3,
            ZzTerm::Const(c) if *c < 0 => 0,
            _ => 5,
        }
    }
}

/// Print `child` with parentheses unless its precedence is at least `min`.
fn wrap(f: &mut fmt::Formatter<'_>, child: &dyn fmt::Display, prec: u8, min: u8) -> fmt::Result {
    if prec >= min {
        write!(f, "{child}")
    } else {
        write!(f, "({child})")
    }
}

macro_rules! binop {
    ($f:expr, $a:expr, $op:expr, $b:expr, $p:expr) => {{
        wrap($f, $a, $a.prec(), $p)?;
        write!($f, "{}", $op)?;
        wrap($f, $b, $b.prec(), $p + 1)
    }};
}

impl fmt::Display for VfTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VfTerm::Var(v) => write!(f, "{v}"),
            VfTerm::Const(c) => write!(f, "{c}"),
            VfTerm::Unif => write!(f, "t"),
            VfTerm::Add(a, b) => binop!(f, a.as_ref(), " + ", b.as_ref(), 1),
            VfTerm::Sub(a, b) => binop!(f, a.as_ref(), " - ", b.as_ref(), 1),
            VfTerm::Mul(a, b) => binop!(f, a.as_ref(), "*", b.as_ref(), 2),
            VfTerm::Div(a, d) => {
                wrap(f, a.as_ref(), a.prec(), 2)?;
                if d.is_negative() {
                    write!(f, "/({d})")
                } else {
                    write!(f, "/{d}")
                }
            }
            VfTerm::Neg(a) => {
                write!(f, "-")?;
                wrap(f, a.as_ref(), a.prec(), 4)
            }
            VfTerm::Pow(a, n) => {
                wrap(f, a.as_ref(), a.prec(), 5)?;
                write!(f, "^{n}")
            }
        }
    }
}

impl fmt::Display for RfTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RfTerm::Var(v) => write!(f, "{v}"),
            RfTerm::Const(c) => write!(f, "{c}"),
            RfTerm::Ac(a) => write!(f, "ac({a})"),
            RfTerm::Add(a, b) => binop!(f, a.as_ref(), " + ", b.as_ref(), 1),
            RfTerm::Sub(a, b) => binop!(f, a.as_ref(), " - ", b.as_ref(), 1),
            RfTerm::Mul(a, b) => binop!(f, a.as_ref(), "*", b.as_ref(), 2),
            RfTerm::Neg(a) => {
                write!(f, "-")?;
                wrap(f, a.as_ref(), a.prec(), 4)
            }
            RfTerm::Pow(a, n) => {
                wrap(f, a.as_ref(), a.prec(), 5)?;
                write!(f, "^{n}")
            }
        }
    }
}

impl fmt::Display for ZzTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZzTerm::Var(v) => write!(f, "{v}"),
            ZzTerm::Const(c) => write!(f, "{c}"),
            ZzTerm::Inf => write!(f, "inf"),
            ZzTerm::Ord(a) => write!(f, "ord({a})"),
            ZzTerm::Add(a, b) => binop!(f, a.as_ref(), " + ", b.as_ref(), 1),
            ZzTerm::Sub(a, b) => binop!(f, a.as_ref(), " - ", b.as_ref(), 1),
            ZzTerm::Scale(c, a) => {
                if *c < 0 {
                    write!(f, "({c})*")?;
                } else {
                    write!(f, "{c}*")?;
                }
                wrap(f, a.as_ref(), a.prec(), 3)
            }
            ZzTerm::Neg(a) => {
                write!(f, "-")?;
                wrap(f, a.as_ref(), a.prec(), 4)
            }
        }
    }
}

impl Node {
    fn prec(&self) -> u8 {
        match self {
            Node::Or(..) => 1,
            Node::And(..) => 2,
            Node::Exists(..) => 0,
            _ => 4,
        }
    }

    pub fn and(a: Node, b: Node) -> Node {
        Node::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Node, b: Node) -> Node {
        Node::Or(Box::new(a), Box::new(b))
    }

    pub fn not(a: Node) -> Node {
        Node::Not(Box::new(a))
    }

    /// Top-level conjuncts.
    pub fn conjuncts(&self) -> Vec<&Node> {
        match self {
            Node::And(a, b) => {
                let mut v = a.conjuncts();
                v.extend(b.conjuncts());
                v
            }
            Node::True => Vec::new(),
            n => vec![n],
        }
    }

    pub fn conjunction(parts: Vec<Node>) -> Node {
        parts.into_iter().reduce(Node::and).unwrap_or(Node::True)
    }

    /// Substitute a VF term for a free VF variable.
    pub fn subst_vf(&self, v: &str, by: &VfTerm) -> Node {
        match self {
            Node::True | Node::False => self.clone(),
            Node::VfEq(a, b) => Node::VfEq(a.subst(v, by), b.subst(v, by)),
            Node::RfEq(a, b) => Node::RfEq(a.subst_vf(v, by), b.subst_vf(v, by)),
            Node::ZzCmp(a, c, b) => Node::ZzCmp(a.subst_vf(v, by), *c, b.subst_vf(v, by)),
            Node::ZzCong(a, b, d) => Node::ZzCong(a.subst_vf(v, by), b.subst_vf(v, by), *d),
            Node::Not(a) => Node::not(a.subst_vf(v, by)),
            Node::And(a, b) => Node::and(a.subst_vf(v, by), b.subst_vf(v, by)),
            Node::Or(a, b) => Node::or(a.subst_vf(v, by), b.subst_vf(v, by)),
            Node::Exists(x, s, body) if x != v => Node::Exists(x.clone(), *s, Box::new(body.subst_vf(v, by))),
            Node::Exists(..) => self.clone(),
        }
    }

    /// Free variables by sort.
    pub fn free_vars(&self) -> [BTreeSet<String>; 3] {
        let mut out: [BTreeSet<String>; 3] = Default::default();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut [BTreeSet<String>; 3]) {
        let [vf, rf, zz] = out;
        match self {
            Node::True | Node::False => {}
            Node::VfEq(a, b) => {
                a.free_vars(vf);
                b.free_vars(vf);
            }
            Node::RfEq(a, b) => {
                a.free_vars(rf, vf);
                b.free_vars(rf, vf);
            }
            Node::ZzCmp(a, _, b) | Node::ZzCong(a, b, _) => {
                a.free_vars(zz, vf);
                b.free_vars(zz, vf);
            }
            Node::Not(a) => a.collect_free(out),
            Node::And(a, b) | Node::Or(a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
            Node::Exists(x, s, body) => {
                let mut inner: [BTreeSet<String>; 3] = Default::default();
                body.collect_free(&mut inner);
                let k = match s {
                    Sort::Vf => 0,
                    Sort::Rf => 1,
                    Sort::Zz => 2,
                };
                inner[k].remove(x);
                for (o, i) in out.iter_mut().zip(inner) {
                    o.extend(i);
                }
            }
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::True => write!(f, "true"),
            Node::False => write!(f, "false"),
            Node::VfEq(a, b) => write!(f, "{a} == {b}"),
            Node::RfEq(a, b) => write!(f, "{a} == {b}"),
            Node::ZzCmp(a, c, b) => {
                let op = match c {
                    Cmp::Eq => "==",
                    Cmp::Le => "<=",
                    Cmp::Lt => "<",
                };
                write!(f, "{a} {op} {b}")
            }
            Node::ZzCong(a, b, d) => write!(f, "{a} == {b} mod {d}"),
            Node::Not(a) => {
                write!(f, "!")?;
                write!(f, "({a})")
            }
            Node::And(a, b) => {
                wrap(f, a.as_ref(), a.prec(), 2)?;
                write!(f, " && ")?;
                wrap(f, b.as_ref(), b.prec(), 3)
            }
            Node::Or(a, b) => {
                wrap(f, a.as_ref(), a.prec(), 1)?;
                write!(f, " || ")?;
                wrap(f, b.as_ref(), b.prec(), 2)
            }
            Node::Exists(x, s, body) => write!(f, "exists {x}:{s}. {body}"),
        }
    }
}
