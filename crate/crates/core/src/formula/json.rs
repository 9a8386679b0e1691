//! JSON dump of the syntax tree.

use serde_json::{json, Value};

use super::ast::{Cmp, Node, RfTerm, VfTerm, ZzTerm};
use super::Formula;

fn bin(op: &str, a: Value, b: Value) -> Value {
    json!({ "op": op, "args": [a, b] })
}

fn vf(t: &VfTerm) -> Value {
    match t {
        VfTerm::Var(v) => json!({ "var": v }),
        VfTerm::Const(c) => json!({ "const": c.to_string() }),
        VfTerm::Unif => json!({ "op": "t" }),
        VfTerm::Add(a, b) => bin("+", vf(a), vf(b)),
        VfTerm::Sub(a, b) => bin("-", vf(a), vf(b)),
        VfTerm::Mul(a, b) => bin("*", vf(a), vf(b)),
        VfTerm::Neg(a) => json!({ "op": "neg", "args": [vf(a)] }),
        VfTerm::Pow(a, n) => json!({ "op": "^", "args": [vf(a)], "exp": n }),
        VfTerm::Div(a, d) => json!({ "op": "/", "args": [vf(a)], "den": d.to_string() }),
    }
}

fn rf(t: &RfTerm) -> Value {
    match t {
        RfTerm::Var(v) => json!({ "var": v }),
        RfTerm::Const(c) => json!({ "const": c.to_string() }),
        RfTerm::Ac(a) => json!({ "op": "ac", "args": [vf(a)] }),
        RfTerm::Add(a, b) => bin("+", rf(a), rf(b)),
        RfTerm::Sub(a, b) => bin("-", rf(a), rf(b)),
        RfTerm::Mul(a, b) => bin("*", rf(a), rf(b)),
        RfTerm::Neg(a) => json!({ "op": "neg", "args": [rf(a)] }),
        RfTerm::Pow(a, n) => json!({ "op": "^", "args": [rf(a)], "exp": n }),
    }
}

fn zz(t: &ZzTerm) -> Value {
    match t {
        ZzTerm::Var(v) => json!({ "var": v }),
        ZzTerm::Const(c) => json!({ "const": c.to_string() }),
        ZzTerm::Inf => json!({ "op": "inf" }),
        ZzTerm::Ord(a) => json!({ "op": "ord", "args": [vf(a)] }),
        ZzTerm::Add(a, b) => bin("+", zz(a), zz(b)),
        ZzTerm::Sub(a, b) => bin("-", zz(a), zz(b)),
        ZzTerm::Neg(a) => json!({ "op": "neg", "args": [zz(a)] }),
        ZzTerm::Scale(k, a) => json!({ "op": "scale", "factor": k.to_string(), "args": [zz(a)] }),
    }
}

fn node(n: &Node) -> Value {
    match n {
        Node::True => json!({ "op": "true" }),
        Node::False => json!({ "op": "false" }),
        Node::VfEq(a, b) => json!({ "op": "==", "sort": "vf", "args": [vf(a), vf(b)] }),
        Node::RfEq(a, b) => json!({ "op": "==", "sort": "rf", "args": [rf(a), rf(b)] }),
        Node::ZzCmp(a, c, b) => {
            let op = match c {
                Cmp::Eq => "==",
                Cmp::Le => "<=",
                Cmp::Lt => "<",
            };
            json!({ "op": op, "sort": "zz", "args": [zz(a), zz(b)] })
        }
        Node::ZzCong(a, b, m) => json!({ "op": "mod", "modulus": m.to_string(), "args": [zz(a), zz(b)] }),
        Node::Not(a) => json!({ "op": "!", "args": [node(a)] }),
        Node::And(a, b) => bin("&&", node(a), node(b)),
        Node::Or(a, b) => bin("||", node(a), node(b)),
        Node::Exists(v, s, b) => json!({ "op": "exists", "var": v, "sort": s, "args": [node(b)] }),
    }
}

impl Formula {
    /// The syntax tree as JSON; integers are strings.
    pub fn to_json(&self) -> Value {
        let free: Vec<Value> = self.free().iter().map(|(v, s)| json!({ "name": v, "sort": s })).collect();
        json!({ "free": free, "body": node(self.body()), "bad_primes": self.bad_primes().primes() })
    }
}
