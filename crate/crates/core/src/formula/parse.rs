//! Lexer, parser and sort inference.
//!
//! Parsing is untyped. Sorts are then solved by unification: every
//! identifier and every atom gets a sort variable, `ord`/`ac` force their
//! argument into VF, comparisons other than equality force ZZ. Identifiers
//! whose sort stays open get the caller's default sort. An undeclared,
//! unbound `t` is the uniformizer.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::ast::{Cmp, Node, RfTerm, Sort, VfTerm, ZzTerm};
use super::{mismatch, Formula, FormulaError};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Sym(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    col: usize,
}

const SYMS: [&str; 21] = [
    "==", "!=", "<=", ">=", "&&", "||", "<", ">", "!", "(", ")", "+", "-", "*", "/", "^", ",", ";", ":", ".", "=",
];

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, FormulaError> {
    let mut out = Vec::new();
    for (ln, line) in src.lines().enumerate() {
        if line.trim_start().starts_with('#') {
            continue;
        }
        let cs: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < cs.len() {
            let pos = Pos { line: ln + 1, col: i + 1 };
            let c = cs[i];
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() {
                let st = i;
                while i < cs.len() && cs[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = cs[st..i].iter().collect();
                out.push((Tok::Num(s.parse().unwrap()), pos));
            } else if c.is_alphabetic() || c == '_' {
                let st = i;
                while i < cs.len() && (cs[i].is_alphanumeric() || cs[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(cs[st..i].iter().collect()), pos));
            } else {
                let rest: String = cs[i..].iter().take(2).collect();
                match SYMS.iter().find(|s| rest.starts_with(*s)) {
                    Some(&"=") => return Err(syntax(pos, "single '=' (use '==')")),
                    Some(s) => {
                        out.push((Tok::Sym(s), pos));
                        i += s.len();
                    }
                    None => return Err(syntax(pos, &format!("unexpected character '{c}'"))),
                }
            }
        }
    }
    Ok(out)
}

fn syntax(p: Pos, msg: &str) -> FormulaError {
    FormulaError::Syntax { line: p.line, col: p.col, msg: msg.to_string() }
}

/// Untyped term.
#[derive(Debug, Clone)]
enum UT {
    Num(BigInt),
    Id(String),
    Inf,
    Ord(Box<UT>),
    Ac(Box<UT>),
    Bin(char, Box<UT>, Box<UT>),
    Neg(Box<UT>),
    Pow(Box<UT>, u32),
}

/// Untyped formula.
#[derive(Debug, Clone)]
enum UF {
    True,
    False,
    Atom(UT, &'static str, UT, Option<u64>),
    Not(Box<UF>),
    And(Box<UF>, Box<UF>),
    Or(Box<UF>, Box<UF>),
    Quant(bool, String, Option<Sort>, Box<UF>),
}

const KEYWORDS: [&str; 11] = ["vf", "rf", "zz", "exists", "forall", "mod", "inf", "true", "false", "ord", "ac"];

struct Parser {
    toks: Vec<(Tok, Pos)>,
    pos: usize,
    end: Pos,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn here(&self) -> Pos {
        self.toks.get(self.pos).map_or(self.end, |t| t.1)
    }

    fn fail<T>(&self, msg: &str) -> Result<T, FormulaError> {
        Err(syntax(self.here(), msg))
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(x)) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), FormulaError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.fail(&format!("expected '{s}'"))
        }
    }

    fn ident(&mut self) -> Result<String, FormulaError> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => {
                self.pos += 1;
                Ok(s)
            }
            _ => self.fail("expected an identifier"),
        }
    }

    fn sort_kw(&mut self) -> Option<Sort> {
        let s = match self.peek() {
            Some(Tok::Ident(x)) if x == "vf" => Sort::Vf,
            Some(Tok::Ident(x)) if x == "rf" => Sort::Rf,
            Some(Tok::Ident(x)) if x == "zz" => Sort::Zz,
            _ => return None,
        };
        self.pos += 1;
        Some(s)
    }

    fn decls(&mut self) -> Result<Vec<(String, Sort)>, FormulaError> {
        let mut out = Vec::new();
        loop {
            let save = self.pos;
            let Some(sort) = self.sort_kw() else { break };
            if !matches!(self.peek(), Some(Tok::Ident(_))) {
                self.pos = save;
                break;
            }
            loop {
                out.push((self.ident()?, sort));
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym(";")?;
        }
        Ok(out)
    }

    fn or(&mut self) -> Result<UF, FormulaError> {
        let mut a = self.and()?;
        while self.eat_sym("||") {
            a = UF::Or(Box::new(a), Box::new(self.and()?));
        }
        Ok(a)
    }

    fn and(&mut self) -> Result<UF, FormulaError> {
        let mut a = self.not()?;
        while self.eat_sym("&&") {
            a = UF::And(Box::new(a), Box::new(self.not()?));
        }
        Ok(a)
    }

    fn not(&mut self) -> Result<UF, FormulaError> {
        if self.eat_sym("!") {
            return Ok(UF::Not(Box::new(self.not()?)));
        }
        let forall = self.is_kw("forall");
        if forall || self.is_kw("exists") {
            self.pos += 1;
            let name = self.ident()?;
            let sort = if self.eat_sym(":") {
                match self.sort_kw() {
                    Some(s) => Some(s),
                    None => return self.fail("expected a sort (vf, rf or zz)"),
                }
            } else {
                None
            };
            self.expect_sym(".")?;
            let body = self.or()?;
            return Ok(UF::Quant(forall, name, sort, Box::new(body)));
        }
        self.prim()
    }

    fn prim(&mut self) -> Result<UF, FormulaError> {
        if self.is_kw("true") {
            self.pos += 1;
            return Ok(UF::True);
        }
        if self.is_kw("false") {
            self.pos += 1;
            return Ok(UF::False);
        }
        if self.is_sym("(") {
            let save = self.pos;
            self.pos += 1;
            if let Ok(f) = self.or() {
                if self.eat_sym(")") && !self.continues_term() {
                    return Ok(f);
                }
            }
            self.pos = save;
        }
        self.atom()
    }

    /// Whether the next token continues an arithmetic term or comparison.
    fn continues_term(&self) -> bool {
        matches!(self.peek(), Some(Tok::Sym(s)) if ["+", "-", "*", "/", "^", "==", "!=", "<=", "<", ">=", ">"].contains(s))
            || self.is_kw("mod")
    }

    fn atom(&mut self) -> Result<UF, FormulaError> {
        let l = self.term()?;
        let op = match self.peek() {
            Some(Tok::Sym(s)) if ["==", "!=", "<=", "<", ">=", ">"].contains(s) => *s,
            _ => return self.fail("expected a comparison"),
        };
        self.pos += 1;
        let r = self.term()?;
        let mut m = None;
        if self.is_kw("mod") {
            if op != "==" {
                return self.fail("'mod' only follows '=='");
            }
            self.pos += 1;
            match self.peek().cloned() {
                Some(Tok::Num(n)) if n > BigInt::zero() => {
                    self.pos += 1;
                    m = Some(n.to_u64().ok_or_else(|| syntax(self.here(), "modulus too large"))?);
                }
                _ => return self.fail("expected a positive modulus"),
            }
        }
        Ok(UF::Atom(l, op, r, m))
    }

    fn term(&mut self) -> Result<UT, FormulaError> {
        let mut a = self.product()?;
        loop {
            let op = if self.eat_sym("+") {
                '+'
            } else if self.eat_sym("-") {
                '-'
            } else {
                return Ok(a);
            };
            a = UT::Bin(op, Box::new(a), Box::new(self.product()?));
        }
    }

    fn product(&mut self) -> Result<UT, FormulaError> {
        let mut a = self.unary()?;
        loop {
            let op = if self.eat_sym("*") {
                '*'
            } else if self.eat_sym("/") {
                '/'
            } else {
                return Ok(a);
            };
            a = UT::Bin(op, Box::new(a), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<UT, FormulaError> {
        if self.eat_sym("-") {
            return Ok(UT::Neg(Box::new(self.unary()?)));
        }
        let base = self.primary()?;
        if self.eat_sym("^") {
            match self.peek().cloned() {
                Some(Tok::Num(n)) => {
                    self.pos += 1;
                    let n = n.to_u32().ok_or_else(|| syntax(self.here(), "exponent too large"))?;
                    return Ok(UT::Pow(Box::new(base), n));
                }
                _ => return self.fail("expected a nonnegative integer exponent"),
            }
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<UT, FormulaError> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(UT::Num(n))
            }
            Some(Tok::Ident(s)) if s == "inf" => {
                self.pos += 1;
                Ok(UT::Inf)
            }
            Some(Tok::Ident(s)) if s == "ord" || s == "ac" => {
                self.pos += 1;
                self.expect_sym("(")?;
                let a = self.term()?;
                self.expect_sym(")")?;
                Ok(if s == "ord" { UT::Ord(Box::new(a)) } else { UT::Ac(Box::new(a)) })
            }
            Some(Tok::Ident(_)) => Ok(UT::Id(self.ident()?)),
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let a = self.term()?;
                self.expect_sym(")")?;
                Ok(a)
            }
            Some(_) => self.fail("expected a term"),
            None => self.fail("unexpected end of input"),
        }
    }
}

/// Union-find over sort variables.
#[derive(Default)]
struct Sorts {
    parent: Vec<usize>,
    fixed: Vec<Option<Sort>>,
    names: Vec<Option<String>>,
}

impl Sorts {
    fn fresh(&mut self, name: Option<&str>) -> usize {
        self.parent.push(self.parent.len());
        self.fixed.push(None);
        self.names.push(name.map(|s| s.to_string()));
        self.parent.len() - 1
    }

    fn find(&mut self, x: usize) -> usize {
        let p = self.parent[x];
        if p == x {
            return x;
        }
        let r = self.find(p);
        self.parent[x] = r;
        r
    }

    fn name(&self, r: usize) -> String {
        self.names[r].clone().unwrap_or_else(|| "<term>".to_string())
    }

    fn fix(&mut self, x: usize, s: Sort) -> Result<(), FormulaError> {
        let r = self.find(x);
        match self.fixed[r] {
            Some(t) if t != s => Err(mismatch(self.name(r), s, t)),
            _ => {
                self.fixed[r] = Some(s);
                Ok(())
            }
        }
    }

    fn unify(&mut self, a: usize, b: usize) -> Result<(), FormulaError> {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return Ok(());
        }
        match (self.fixed[ra], self.fixed[rb]) {
            (Some(x), Some(y)) if x != y => {
                let who = if self.names[ra].is_some() { ra } else { rb };
                let (expected, found) = if who == ra { (y, x) } else { (x, y) };
                return Err(mismatch(self.name(who), expected, found));
            }
            _ => {}
        }
        self.parent[ra] = rb;
        if self.fixed[rb].is_none() {
            self.fixed[rb] = self.fixed[ra];
        }
        if self.names[rb].is_none() {
            self.names[rb] = self.names[ra].clone();
        }
        Ok(())
    }
}

struct Binding {
    src: String,
    slot: usize,
}

struct Infer {
    sorts: Sorts,
    scope: Vec<Binding>,
    free: Vec<(String, usize)>,
    atoms: Vec<usize>,
    bound_slots: Vec<(usize, String)>,
    used_names: BTreeSet<String>,
}

impl Infer {
    fn lookup(&self, name: &str) -> Option<&Binding> {
        self.scope.iter().rev().find(|b| b.src == name)
    }

    fn term(&mut self, t: &UT) -> Result<usize, FormulaError> {
        Ok(match t {
            UT::Num(_) => self.sorts.fresh(None),
            UT::Inf => {
                let v = self.sorts.fresh(None);
                self.sorts.fix(v, Sort::Zz)?;
                v
            }
            UT::Id(name) => match self.lookup(name) {
                Some(b) => b.slot,
                None if name == "t" => {
                    let v = self.sorts.fresh(None);
                    self.sorts.fix(v, Sort::Vf)?;
                    v
                }
                None => {
                    let v = self.sorts.fresh(Some(name));
                    self.free.push((name.clone(), v));
                    self.scope.insert(0, Binding { src: name.clone(), slot: v });
                    v
                }
            },
            UT::Ord(a) | UT::Ac(a) => {
                let inner = self.term(a)?;
                self.sorts.fix(inner, Sort::Vf)?;
                let v = self.sorts.fresh(None);
                self.sorts.fix(v, if matches!(t, UT::Ord(_)) { Sort::Zz } else { Sort::Rf })?;
                v
            }
            UT::Bin(_, a, b) => {
                let (x, y) = (self.term(a)?, self.term(b)?);
                self.sorts.unify(x, y)?;
                x
            }
            UT::Neg(a) | UT::Pow(a, _) => self.term(a)?,
        })
    }

    fn formula(&mut self, f: &UF) -> Result<(), FormulaError> {
        match f {
            UF::True | UF::False => Ok(()),
            UF::Atom(l, op, r, m) => {
                let (x, y) = (self.term(l)?, self.term(r)?);
                self.sorts.unify(x, y)?;
                if m.is_some() || !["==", "!="].contains(op) {
                    self.sorts.fix(x, Sort::Zz)?;
                }
                self.atoms.push(x);
                Ok(())
            }
            UF::Not(a) => self.formula(a),
            UF::And(a, b) | UF::Or(a, b) => {
                self.formula(a)?;
                self.formula(b)
            }
            UF::Quant(_, name, sort, body) => {
                let slot = self.sorts.fresh(Some(name));
                if let Some(s) = sort {
                    self.sorts.fix(slot, *s)?;
                }
                let shadows = self.lookup(name).is_some();
                let out = if shadows {
                    let mut k = 1;
                    while self.used_names.contains(&format!("{name}_{k}")) {
                        k += 1;
                    }
                    let n = format!("{name}_{k}");
                    self.used_names.insert(n.clone());
                    n
                } else {
                    name.clone()
                };
                self.bound_slots.push((slot, out));
                self.scope.push(Binding { src: name.clone(), slot });
                let r = self.formula(body);
                self.scope.pop();
                r
            }
        }
    }
}

fn collect_names(f: &UF, out: &mut BTreeSet<String>) {
    fn term(t: &UT, out: &mut BTreeSet<String>) {
        match t {
            UT::Id(s) => {
                out.insert(s.clone());
            }
            UT::Num(_) | UT::Inf => {}
            UT::Ord(a) | UT::Ac(a) | UT::Neg(a) | UT::Pow(a, _) => term(a, out),
            UT::Bin(_, a, b) => {
                term(a, out);
                term(b, out);
            }
        }
    }
    match f {
        UF::True | UF::False => {}
        UF::Atom(l, _, r, _) => {
            term(l, out);
            term(r, out);
        }
        UF::Not(a) => collect_names(a, out),
        UF::And(a, b) | UF::Or(a, b) => {
            collect_names(a, out);
            collect_names(b, out);
        }
        UF::Quant(_, n, _, b) => {
            out.insert(n.clone());
            collect_names(b, out);
        }
    }
}

/// Second pass: build typed trees using the solved sorts.
struct Build<'a> {
    inf: &'a mut Infer,
    default: Sort,
    atom_ix: usize,
    bound_ix: usize,
    scope: Vec<(String, String, Sort)>,
}

fn first_var(t: &UT) -> Option<String> {
    match t {
        UT::Id(s) => Some(s.clone()),
        UT::Num(_) | UT::Inf => None,
        UT::Ord(a) | UT::Ac(a) | UT::Neg(a) | UT::Pow(a, _) => first_var(a),
        UT::Bin(_, a, b) => first_var(a).or_else(|| first_var(b)),
    }
}

/// Integer value of a constant term, if it is one.
fn const_int(t: &UT) -> Option<BigInt> {
    match t {
        UT::Num(n) => Some(n.clone()),
        UT::Neg(a) => const_int(a).map(|x| -x),
        UT::Pow(a, n) => const_int(a).map(|x| num_traits::pow(x, *n as usize)),
        UT::Bin('+', a, b) => Some(const_int(a)? + const_int(b)?),
        UT::Bin('-', a, b) => Some(const_int(a)? - const_int(b)?),
        UT::Bin('*', a, b) => Some(const_int(a)? * const_int(b)?),
        _ => None,
    }
}

impl Build<'_> {
    fn sort_of_slot(&mut self, slot: usize) -> Sort {
        let r = self.inf.sorts.find(slot);
        self.inf.sorts.fixed[r].unwrap_or(self.default)
    }

    fn resolve(&self, name: &str) -> Option<(String, Sort)> {
        self.scope.iter().rev().find(|b| b.0 == name).map(|b| (b.1.clone(), b.2))
    }

    fn sort_err(&self, t: &UT, expected: Sort, found: Sort) -> FormulaError {
        mismatch(first_var(t).unwrap_or_else(|| "<term>".into()), expected, found)
    }

    fn var(&self, name: &str, want: Sort, t: &UT) -> Result<Option<String>, FormulaError> {
        match self.resolve(name) {
            Some((out, s)) if s == want => Ok(Some(out)),
            Some((_, s)) => Err(self.sort_err(t, want, s)),
            None if name == "t" && want == Sort::Vf => Ok(None),
            None => Err(FormulaError::UnboundVariable(name.to_string())),
        }
    }

    fn vf(&self, t: &UT) -> Result<VfTerm, FormulaError> {
        let b = |x: &UT| self.vf(x).map(Box::new);
        Ok(match t {
            UT::Num(n) => VfTerm::Const(n.clone()),
            UT::Id(name) => match self.var(name, Sort::Vf, t)? {
                Some(v) => VfTerm::Var(v),
                None => VfTerm::Unif,
            },
            UT::Inf => return Err(self.sort_err(t, Sort::Vf, Sort::Zz)),
            UT::Ord(_) => return Err(self.sort_err(t, Sort::Vf, Sort::Zz)),
            UT::Ac(_) => return Err(self.sort_err(t, Sort::Vf, Sort::Rf)),
            UT::Bin('+', x, y) => VfTerm::Add(b(x)?, b(y)?),
            UT::Bin('-', x, y) => VfTerm::Sub(b(x)?, b(y)?),
            UT::Bin('*', x, y) => VfTerm::Mul(b(x)?, b(y)?),
            UT::Bin(_, x, y) => match const_int(y) {
                Some(d) if d.is_zero() => return Err(FormulaError::DivisionByZero),
                Some(d) => VfTerm::Div(b(x)?, d),
                None => {
                    return Err(FormulaError::Unsupported(format!(
                        "division by the non-constant {}",
                        first_var(y).unwrap_or_default()
                    )))
                }
            },
            UT::Neg(x) => match self.vf(x)? {
                VfTerm::Const(c) => VfTerm::Const(-c),
                v => VfTerm::Neg(Box::new(v)),
            },
            UT::Pow(x, n) => VfTerm::Pow(b(x)?, *n),
        })
    }

    fn rf(&self, t: &UT) -> Result<RfTerm, FormulaError> {
        let b = |x: &UT| self.rf(x).map(Box::new);
        Ok(match t {
            UT::Num(n) => RfTerm::Const(n.clone()),
            UT::Id(name) => RfTerm::Var(self.var(name, Sort::Rf, t)?.expect("rf variable")),
            UT::Inf | UT::Ord(_) => return Err(self.sort_err(t, Sort::Rf, Sort::Zz)),
            UT::Ac(x) => RfTerm::Ac(Box::new(self.vf(x)?)),
            UT::Bin('+', x, y) => RfTerm::Add(b(x)?, b(y)?),
            UT::Bin('-', x, y) => RfTerm::Sub(b(x)?, b(y)?),
            UT::Bin('*', x, y) => RfTerm::Mul(b(x)?, b(y)?),
            UT::Bin(..) => return Err(FormulaError::Unsupported("division in the residue field".into())),
            UT::Neg(x) => match self.rf(x)? {
                RfTerm::Const(c) => RfTerm::Const(-c),
                v => RfTerm::Neg(Box::new(v)),
            },
            UT::Pow(x, n) => RfTerm::Pow(b(x)?, *n),
        })
    }

    fn zz(&self, t: &UT) -> Result<ZzTerm, FormulaError> {
        let b = |x: &UT| self.zz(x).map(Box::new);
        let no_mul = |x: &UT| FormulaError::Sort {
            var: first_var(x).unwrap_or_else(|| "<term>".into()),
            msg: "value-group terms admit no multiplication, division or powers".into(),
        };
        let small = |n: &BigInt| n.to_i64().ok_or_else(|| FormulaError::Unsupported(format!("{n} is too large")));
        Ok(match t {
            UT::Num(n) => ZzTerm::Const(small(n)?),
            UT::Inf => ZzTerm::Inf,
            UT::Id(name) => ZzTerm::Var(self.var(name, Sort::Zz, t)?.expect("zz variable")),
            UT::Ord(x) => ZzTerm::Ord(Box::new(self.vf(x)?)),
            UT::Ac(_) => return Err(self.sort_err(t, Sort::Zz, Sort::Rf)),
            UT::Bin('+', x, y) => ZzTerm::Add(b(x)?, b(y)?),
            UT::Bin('-', x, y) => ZzTerm::Sub(b(x)?, b(y)?),
            UT::Bin('*', x, y) => match (const_int(x), const_int(y)) {
                (Some(_), Some(_)) => ZzTerm::Const(small(&const_int(t).unwrap())?),
                (Some(c), None) => ZzTerm::Scale(small(&c)?, b(y)?),
                (None, Some(c)) => ZzTerm::Scale(small(&c)?, b(x)?),
                (None, None) => return Err(no_mul(t)),
            },
            UT::Bin(..) | UT::Pow(..) => {
                if let (UT::Pow(..), Some(c)) = (t, const_int(t)) {
                    ZzTerm::Const(small(&c)?)
                } else {
                    return Err(no_mul(t));
                }
            }
            UT::Neg(x) => match self.zz(x)? {
                ZzTerm::Const(c) => ZzTerm::Const(-c),
                v => ZzTerm::Neg(Box::new(v)),
            },
        })
    }

    fn formula(&mut self, f: &UF) -> Result<Node, FormulaError> {
        Ok(match f {
            UF::True => Node::True,
            UF::False => Node::False,
            UF::Atom(l, op, r, m) => {
                let slot = self.inf.atoms[self.atom_ix];
                self.atom_ix += 1;
                let sort = self.sort_of_slot(slot);
                match sort {
                    Sort::Vf => {
                        let eq = Node::VfEq(self.vf(l)?, self.vf(r)?);
                        match *op {
                            "==" => eq,
                            "!=" => Node::not(eq),
                            _ => return Err(self.sort_err(l, Sort::Zz, Sort::Vf)),
                        }
                    }
                    Sort::Rf => {
                        let eq = Node::RfEq(self.rf(l)?, self.rf(r)?);
                        match *op {
                            "==" => eq,
                            "!=" => Node::not(eq),
                            _ => return Err(self.sort_err(l, Sort::Zz, Sort::Rf)),
                        }
                    }
                    Sort::Zz => {
                        let (a, b) = (self.zz(l)?, self.zz(r)?);
                        if let Some(d) = m {
                            return Ok(Node::ZzCong(a, b, *d));
                        }
                        match *op {
                            "==" => Node::ZzCmp(a, Cmp::Eq, b),
                            "!=" => Node::not(Node::ZzCmp(a, Cmp::Eq, b)),
                            "<=" => Node::ZzCmp(a, Cmp::Le, b),
                            "<" => Node::ZzCmp(a, Cmp::Lt, b),
                            ">=" => Node::ZzCmp(b, Cmp::Le, a),
                            _ => Node::ZzCmp(b, Cmp::Lt, a),
                        }
                    }
                }
            }
            UF::Not(a) => Node::not(self.formula(a)?),
            UF::And(a, b) => Node::and(self.formula(a)?, self.formula(b)?),
            UF::Or(a, b) => Node::or(self.formula(a)?, self.formula(b)?),
            UF::Quant(forall, name, _, body) => {
                let (slot, out) = self.inf.bound_slots[self.bound_ix].clone();
                self.bound_ix += 1;
                let sort = self.sort_of_slot(slot);
                self.scope.push((name.clone(), out.clone(), sort));
                let inner = self.formula(body);
                self.scope.pop();
                let inner = inner?;
                if *forall {
                    Node::not(Node::Exists(out, sort, Box::new(Node::not(inner))))
                } else {
                    Node::Exists(out, sort, Box::new(inner))
                }
            }
        })
    }
}

pub fn parse_formula(src: &str, default: Sort) -> Result<Formula, FormulaError> {
    let toks = lex(src)?;
    let last_line = src.lines().count().max(1);
    let end = Pos { line: last_line, col: src.lines().last().map_or(0, |l| l.chars().count()) + 1 };
    let mut p = Parser { toks, pos: 0, end };
    let decls = p.decls()?;
    let body = p.or()?;
    if p.pos != p.toks.len() {
        return p.fail("unexpected trailing input");
    }

    let mut used = BTreeSet::new();
    collect_names(&body, &mut used);
    let mut inf = Infer {
        sorts: Sorts::default(),
        scope: Vec::new(),
        free: Vec::new(),
        atoms: Vec::new(),
        bound_slots: Vec::new(),
        used_names: used,
    };
    let mut seen = BTreeMap::new();
    for (name, sort) in &decls {
        if seen.insert(name.clone(), *sort).is_some() {
            return Err(FormulaError::Syntax { line: 1, col: 1, msg: format!("{name} declared twice") });
        }
        let v = inf.sorts.fresh(Some(name));
        inf.sorts.fix(v, *sort)?;
        inf.free.push((name.clone(), v));
        inf.scope.push(Binding { src: name.clone(), slot: v });
    }
    inf.formula(&body)?;

    let free_slots = inf.free.clone();
    let mut b = Build { inf: &mut inf, default, atom_ix: 0, bound_ix: 0, scope: Vec::new() };
    let mut free = Vec::new();
    for (name, slot) in &free_slots {
        let s = b.sort_of_slot(*slot);
        b.scope.push((name.clone(), name.clone(), s));
        free.push((name.clone(), s));
    }
    let node = b.formula(&body)?;
    Ok(Formula::new(free, node))
}
