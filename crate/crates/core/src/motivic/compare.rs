//! Symbolic results against the box oracle, prime by prime.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::Serialize;

use super::cells::{Binding, CellData};
use super::linear::LinearFactor;
use super::{integrate_linear_product, IntegrationResult, MotivicError, Params};
use crate::arith::{fmt_q, Q};
use crate::formula::{Formula, Node, Value, VfTerm};
use crate::localfield::{FieldKind, LFElem, LocalFieldSpec};
use crate::oracle::{integrate, Integrand, OracleConfig, OracleError, VolumeInterval};

/// Everything needed to check one symbolic result.
#[derive(Debug, Clone)]
pub struct CompareJob {
    pub name: String,
    pub result: IntegrationResult,
    pub params: Params,
    pub domain: Formula,
    pub integrand: Integrand,
    pub bindings: BTreeMap<String, Binding>,
    pub precision_step: BTreeMap<String, u32>,
}

#[derive(Debug, thiserror::Error)]
pub enum CompareError {
    #[error(transparent)]
    Motivic(#[from] MotivicError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

impl CompareJob {
    /// `∫_O ∏ |y - c_j|^(e·m_j)` over the whole valuation ring.
    pub fn linear_product(factors: &[LinearFactor], e: u32) -> Result<Self, MotivicError> {
        let result = integrate_linear_product(factors, e)?;
        let y = || Box::new(VfTerm::var("y"));
        let mut g: Option<VfTerm> = None;
        for f in factors {
            let num = VfTerm::Sub(
                Box::new(VfTerm::Mul(Box::new(VfTerm::Const(f.center.denom().clone())), y())),
                Box::new(VfTerm::Const(f.center.numer().clone())),
            );
            let lin = if f.center.denom() == &BigInt::from(1) {
                VfTerm::Sub(y(), Box::new(VfTerm::Const(f.center.numer().clone())))
            } else {
                VfTerm::Div(Box::new(num), f.center.denom().clone())
            };
            let pw = if f.multiplicity == 1 { lin } else { VfTerm::Pow(Box::new(lin), f.multiplicity) };
            g = Some(match g {
                None => pw,
                Some(acc) => VfTerm::Mul(Box::new(acc), Box::new(pw)),
            });
        }
        let g = g.ok_or_else(|| MotivicError::Invalid("empty product".into()))?;
        let domain = Formula::from_node(Node::VfEq(VfTerm::var("y"), VfTerm::var("y")));
        let name = factors.iter().map(|f| format!("{}:{}", f.center, f.multiplicity)).collect::<Vec<_>>().join(",");
        Ok(Self {
            name,
            result,
            params: Params::new(),
            domain,
            integrand: Integrand::AbsPow(g, e),
            bindings: BTreeMap::new(),
            precision_step: BTreeMap::new(),
        })
    }

    /// A cell file with its oracle setup, at the given parameters.
    pub fn cells(name: &str, data: &CellData, params: Params) -> Result<Self, MotivicError> {
        let setup = data.oracle.clone().ok_or_else(|| MotivicError::Invalid(format!("{name} has no oracle setup")))?;
        let result = data.integrate()?;
        let domain = Formula::parse(&setup.domain)?;
        let decls: Vec<String> = domain.free().iter().map(|(n, s)| format!("{s} {n}; ")).collect();
        let g = Formula::parse(&format!("{}({}) == 0", decls.concat(), setup.integrand))?;
        let Node::VfEq(g, _) = g.body() else {
            return Err(MotivicError::Invalid(format!("integrand {} is not a field term", setup.integrand)));
        };
        Ok(Self {
            name: name.to_string(),
            result,
            params,
            domain,
            integrand: Integrand::AbsPow(g.clone(), setup.power),
            bindings: setup.bindings,
            precision_step: setup.precision_step,
        })
    }

    /// Oracle precision for a base precision `n`.
    pub fn precision(&self, n: u32) -> u32 {
        let extra: i64 = self
            .precision_step
            .iter()
            .map(|(k, s)| *s as i64 * self.params.zz.get(k).copied().unwrap_or(0))
            .sum();
        (n as i64 + extra).max(1) as u32
    }

    fn oracle_params(&self, spec: LocalFieldSpec) -> Result<BTreeMap<String, Value>, MotivicError> {
        let mut out = BTreeMap::new();
        for (name, b) in &self.bindings {
            let k = b.unif_pow.eval(&self.params.zz)?;
            let k = u32::try_from(k).map_err(|_| MotivicError::Invalid(format!("{name}: negative exponent {k}")))?;
            let le = |e: crate::localfield::LocalFieldError| MotivicError::Invalid(e.to_string());
            let x = LFElem::embed_int(b.unit, spec).map_err(le)?.mul(&LFElem::uniformizer(spec).pow(k).map_err(le)?).map_err(le)?;
            out.insert(name.clone(), Value::from(x));
        }
        Ok(out)
    }

    fn bracket(&self, kind: FieldKind, p: u64, n: u32, budget: u64) -> Result<VolumeInterval, CompareError> {
        let spec = LocalFieldSpec::new(kind, p, self.precision(n)).map_err(|e| MotivicError::Invalid(e.to_string()))?;
        let cfg = OracleConfig { params: self.oracle_params(spec)?, budget };
        Ok(integrate(&self.integrand, &self.domain, spec, &cfg)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Contained,
    Failed,
    SkippedBadPrime,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub prime: u64,
    pub status: RowStatus,
    #[serde(serialize_with = "ser_opt_q")]
    pub symbolic: Option<Q>,
    pub qp: Option<VolumeInterval>,
    pub fpt: Option<VolumeInterval>,
}

fn ser_opt_q<S: serde::Serializer>(q: &Option<Q>, s: S) -> Result<S::Ok, S::Error> {
    match q {
        Some(x) => s.serialize_some(&fmt_q(x)),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub name: String,
    pub rows: Vec<CompareRow>,
    pub failing: Vec<u64>,
}

impl CompareReport {
    pub fn ok(&self) -> bool {
        self.failing.is_empty()
    }
}

/// Specialize at each good prime and check that the oracle brackets of
/// `Q_p` (and `F_p((t))` when asked) contain the value.
pub fn run(job: &CompareJob, primes: &[u64], n: u32, both: bool, budget: u64) -> Result<CompareReport, CompareError> {
    let mut rows = Vec::new();
    let mut failing = Vec::new();
    let mut ps = primes.to_vec();
    ps.sort_unstable();
    ps.dedup();
    for p in ps {
        if job.result.bad_primes.contains(p) {
            rows.push(CompareRow { prime: p, status: RowStatus::SkippedBadPrime, symbolic: None, qp: None, fpt: None });
            continue;
        }
        let v = job.result.specialize(p, &job.params)?;
        let qp = job.bracket(FieldKind::CharZero, p, n, budget)?;
        let fpt = if both { Some(job.bracket(FieldKind::EqualChar, p, n, budget)?) } else { None };
        let ok = qp.contains(&v) && fpt.as_ref().is_none_or(|f| f.contains(&v));
        if !ok {
            failing.push(p);
        }
        let status = if ok { RowStatus::Contained } else { RowStatus::Failed };
        rows.push(CompareRow { prime: p, status, symbolic: Some(v), qp: Some(qp), fpt });
    }
    Ok(CompareReport { name: job.name.clone(), rows, failing })
}

#[derive(Debug, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJob {
    linear_product: Option<String>,
    exponent: Option<u32>,
    cells: Option<String>,
    params: Option<String>,
}

#[derive(Debug, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCorpus {
    jobs: Vec<RawJob>,
}

/// Load a cell file and build its job.
pub fn cells_job(path: &std::path::Path, params: &str) -> Result<CompareJob, MotivicError> {
    let src = std::fs::read_to_string(path).map_err(|e| MotivicError::Invalid(format!("{}: {e}", path.display())))?;
    let data = CellData::from_json(&src)?;
    let name = format!("{} [{params}]", path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into()));
    CompareJob::cells(&name, &data, data.params_from_str(params)?)
}

/// Load a corpus file; cell paths are relative to it.
pub fn load_corpus(path: &std::path::Path) -> Result<Vec<CompareJob>, MotivicError> {
    let src = std::fs::read_to_string(path).map_err(|e| MotivicError::Invalid(format!("{}: {e}", path.display())))?;
    let raw: RawCorpus = serde_json::from_str(&src).map_err(|e| MotivicError::Invalid(e.to_string()))?;
    let dir = path.parent().unwrap_or(std::path::Path::new("."));
    let mut out = Vec::new();
    for j in raw.jobs {
        match (j.linear_product, j.cells) {
            (Some(lp), None) => {
                out.push(CompareJob::linear_product(&super::parse_linear_product(&lp)?, j.exponent.unwrap_or(1))?)
            }
            (None, Some(c)) => out.push(cells_job(&dir.join(c), j.params.as_deref().unwrap_or(""))?),
            _ => return Err(MotivicError::Invalid("a job names exactly one of linear_product and cells".into())),
        }
    }
    Ok(out)
}
