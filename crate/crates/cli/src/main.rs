//! `dpcalc`: parse formulas, integrate cells, specialize and check against the box oracle.
//!
//! Exit codes: 0 ok, 1 other errors, 2 parse, 3 unsupported fragment,
//! 4 comparison failure, 5 box budget.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use dpcalc_core::arith::{fmt_q, is_prime, parse_q};
use dpcalc_core::formula::{Formula, FormulaError, Sort, Value};
use dpcalc_core::localfield::{ExtInt, FieldKind, LFElem, LocalFieldSpec};
use dpcalc_core::motivic::compare::{self, CompareError, CompareJob};
use dpcalc_core::motivic::{
    appendix2_steps, appendix2_symbolic, appendix2_volume, integrate_linear_product, parse_linear_product, CellData,
    EtaMode, IntegrationResult, MotivicError, Params, PHI_ETA, PHI_UPPER,
};
use dpcalc_core::oracle::{box_budget, integrate, volume_with, Integrand, OracleConfig, OracleError};

#[derive(Parser)]
#[command(name = "dpcalc", version, about = "Symbolic p-adic and motivic integration")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a formula file and dump its syntax tree.
    Parse {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        emit: Emit,
    },
    /// Integrate a cell file or a product of linear factors.
    Integrate {
        file: Option<PathBuf>,
        #[command(flatten)]
        input: SymInput,
        /// Primes at which to specialize.
        #[arg(long, value_delimiter = ',')]
        primes: Option<Vec<u64>>,
    },
    /// Compare symbolic results with oracle brackets prime by prime.
    Compare {
        file: Option<PathBuf>,
        #[command(flatten)]
        input: SymInput,
        /// A corpus of jobs instead of a single input.
        #[arg(long, conflicts_with_all = ["file", "linear_product"])]
        corpus: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "5,7,11,13")]
        primes: Vec<u64>,
        #[arg(long, default_value_t = 6)]
        precision: u32,
        /// Also run the oracle over F_p((t)).
        #[arg(long)]
        both_characteristics: bool,
    },
    /// Count the Appendix 2 locus over F_q for every non-square η.
    Appendix2 {
        #[arg(long, value_delimiter = ',', default_value = "5,7,11,13,17")]
        primes: Vec<u64>,
    },
    /// Bracket the volume of a formula, or an integral over it, with the box oracle.
    Oracle {
        file: PathBuf,
        #[arg(long)]
        prime: u64,
        #[arg(long, default_value_t = 6)]
        precision: u32,
        #[arg(long = "char", value_enum, default_value = "zero")]
        characteristic: Char,
        /// Integrand `f`, integrating |f|^exponent.
        #[arg(long)]
        integrand: Option<String>,
        #[arg(long, default_value_t = 1)]
        exponent: u32,
        /// Parameter values `name=value,...` (integers).
        #[arg(long, default_value = "")]
        param: String,
    },
}

#[derive(Args)]
struct SymInput {
    /// Product `"c:m,..."` of `|t - c|^(e·m)` over the valuation ring.
    #[arg(long)]
    linear_product: Option<String>,
    /// The exponent `e` for `--linear-product`.
    #[arg(long, default_value_t = 1)]
    exponent: u32,
    /// Parameters of a cell file: presets and `name=value` items.
    #[arg(long, default_value = "")]
    param: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Json,
    Pretty,
}

#[derive(Clone, Copy, ValueEnum)]
enum Char {
    /// Q_p
    Zero,
    /// F_p((t))
    Equal,
}

struct Fail {
    code: u8,
    msg: String,
}

impl Fail {
    fn new(code: u8, msg: impl Into<String>) -> Self {
        Self { code, msg: msg.into() }
    }
}

fn formula_code(e: &FormulaError) -> u8 {
    match e {
        FormulaError::Syntax { .. } | FormulaError::Sort { .. } => 2,
        _ => 1,
    }
}

impl From<FormulaError> for Fail {
    fn from(e: FormulaError) -> Self {
        Fail::new(formula_code(&e), e.to_string())
    }
}

impl From<MotivicError> for Fail {
    fn from(e: MotivicError) -> Self {
        let code = match &e {
            MotivicError::UnsupportedZeroCell(..) | MotivicError::NotSummable(..) => 3,
            MotivicError::Formula(f) => formula_code(f),
            _ => 1,
        };
        Fail::new(code, e.to_string())
    }
}

impl From<OracleError> for Fail {
    fn from(e: OracleError) -> Self {
        let code = match &e {
            OracleError::BudgetExceeded(_) => 5,
            OracleError::Formula(f) => formula_code(f),
            _ => 1,
        };
        Fail::new(code, e.to_string())
    }
}

impl From<CompareError> for Fail {
    fn from(e: CompareError) -> Self {
        match e {
            CompareError::Motivic(m) => m.into(),
            CompareError::Oracle(o) => o.into(),
        }
    }
}

fn read(path: &Path) -> Result<String, Fail> {
    std::fs::read_to_string(path).map_err(|e| Fail::new(1, format!("{}: {e}", path.display())))
}

fn check_primes(ps: &[u64]) -> Result<(), Fail> {
    match ps.iter().find(|p| !is_prime(**p)) {
        Some(p) => Err(Fail::new(1, format!("{p} is not prime"))),
        None => Ok(()),
    }
}

fn cmd_parse(file: &Path, emit: Emit) -> Result<Json, Fail> {
    let src = read(file)?;
    let f = Formula::parse(&src).map_err(|e| Fail::new(formula_code(&e), format!("{}: {e}", file.display())))?;
    match emit {
        Emit::Pretty => {
            print_out(&f.pretty());
            Ok(Json::Null)
        }
        Emit::Json => Ok(json!({ "pretty": f.pretty(), "ast": f.to_json() })),
    }
}

/// The symbolic result named by a file or `--linear-product`, with its parameters.
fn sym_result(file: Option<&Path>, input: &SymInput) -> Result<(IntegrationResult, Params), Fail> {
    match (file, &input.linear_product) {
        (Some(f), None) => {
            let data = CellData::from_json(&read(f)?)?;
            let params = data.params_from_str(&input.param)?;
            Ok((data.integrate()?, params))
        }
        (None, Some(lp)) => Ok((integrate_linear_product(&parse_linear_product(lp)?, input.exponent)?, Params::new())),
        _ => Err(Fail::new(1, "give exactly one of a cell file and --linear-product")),
    }
}

fn cmd_integrate(file: Option<&Path>, input: &SymInput, primes: Option<&[u64]>) -> Result<Json, Fail> {
    let (r, params) = sym_result(file, input)?;
    let mut out = serde_json::to_value(&r).map_err(|e| Fail::new(1, e.to_string()))?;
    if !params.zz.is_empty() {
        let at = r.symbolic_lsum().map(|s| s.eval(&params.zz)).transpose().map_err(MotivicError::from)?;
        out["symbolic_at_params"] = json!(at.map(|s| s.to_string()));
        let mut parts = Vec::new();
        for t in r.value.terms() {
            let c = t.coeff.eval(&params.zz).map_err(MotivicError::from)?;
            parts.push(format!("[{}] ⊗ ({c})", t.class.body()));
        }
        out["value_at_params"] = json!(parts.join(" + "));
    }
    let default = [5, 7, 11, 13];
    let primes = primes.unwrap_or(if params.rf.is_empty() && params.zz.is_empty() { &[] } else { &default });
    check_primes(primes)?;
    let mut rows = Vec::new();
    for &p in primes {
        let row = match r.specialize(p, &params) {
            Ok(v) => json!({ "prime": p, "value": fmt_q(&v) }),
            Err(MotivicError::BadPrime(_)) => json!({ "prime": p, "value": null, "status": "skipped (bad prime)" }),
            Err(e) => return Err(e.into()),
        };
        rows.push(row);
    }
    if !rows.is_empty() {
        out["specializations"] = Json::Array(rows);
    }
    Ok(out)
}

fn cmd_compare(
    file: Option<&Path>,
    input: &SymInput,
    corpus: Option<&Path>,
    primes: &[u64],
    precision: u32,
    both: bool,
) -> Result<Json, Fail> {
    check_primes(primes)?;
    if precision == 0 {
        return Err(Fail::new(1, "precision must be at least 1"));
    }
    let jobs = match (corpus, file, &input.linear_product) {
        (Some(c), None, None) => compare::load_corpus(c)?,
        (None, Some(f), None) => vec![compare::cells_job(f, &input.param)?],
        (None, None, Some(lp)) => vec![CompareJob::linear_product(&parse_linear_product(lp)?, input.exponent)?],
        _ => return Err(Fail::new(1, "give exactly one of a cell file, --linear-product and --corpus")),
    };
    let budget = box_budget();
    let mut reports = Vec::new();
    let mut failing = Vec::new();
    for job in &jobs {
        let rep = compare::run(job, primes, precision, both, budget)?;
        if !rep.ok() {
            let ps: Vec<String> = rep.failing.iter().map(u64::to_string).collect();
            failing.push(format!("{}: {}", rep.name, ps.join(", ")));
        }
        reports.push(rep);
    }
    let out = json!({ "ok": failing.is_empty(), "reports": reports });
    if failing.is_empty() {
        Ok(out)
    } else {
        print_out(&pretty(&out));
        Err(Fail::new(4, format!("failing primes: {}", failing.join("; "))))
    }
}

fn cmd_appendix2(primes: &[u64]) -> Result<Json, Fail> {
    let sym = appendix2_symbolic();
    let mut rows = Vec::new();
    let mut bad = Vec::new();
    for &q in primes {
        let expect = q * (q - 1) * (q + 1) / 2;
        let per = |src: &str| -> Result<Vec<(u64, u64)>, Fail> {
            Ok(appendix2_volume(src, EtaMode::PerEta, q)?.into_iter().map(|(e, n)| (e.unwrap_or(0), n)).collect())
        };
        let eta = per(PHI_ETA)?;
        let upper = per(PHI_UPPER)?;
        let ok = eta.iter().chain(&upper).all(|(_, n)| *n == expect);
        if !ok {
            bad.push(q.to_string());
        }
        let counts = |v: &[(u64, u64)]| v.iter().map(|(e, n)| json!({ "eta": e, "count": n })).collect::<Vec<_>>();
        rows.push(json!({
            "prime": q,
            "expected": expect,
            "symbolic_at_q": fmt_q(&sym.nu(q)),
            "phi_eta": counts(&eta),
            "phi_upper": counts(&upper),
            "eta_independent": eta.windows(2).all(|w| w[0].1 == w[1].1),
            "formulas_agree": eta == upper,
            "ok": ok,
        }));
    }
    let steps: Vec<Json> = appendix2_steps().into_iter().map(|(n, v)| json!({ "step": n, "value": v.to_string() })).collect();
    let out = json!({ "symbolic": sym.to_string(), "steps": steps, "rows": rows });
    if bad.is_empty() {
        Ok(out)
    } else {
        print_out(&pretty(&out));
        Err(Fail::new(4, format!("count mismatch at q = {}", bad.join(", "))))
    }
}

fn oracle_params(phi: &Formula, items: &str, spec: LocalFieldSpec) -> Result<BTreeMap<String, Value>, Fail> {
    let mut out = BTreeMap::new();
    for item in items.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item.split_once('=').ok_or_else(|| Fail::new(1, format!("expected name=value, got {item}")))?;
        let (k, v) = (k.trim(), v.trim());
        let sort = phi.sort_of(k).ok_or_else(|| Fail::new(1, format!("{k} is not a free variable")))?;
        let bad = || Fail::new(1, format!("bad value {v} for {k}"));
        let val = match sort {
            Sort::Zz => Value::Zz(ExtInt::Fin(v.parse().map_err(|_| bad())?)),
            Sort::Rf => Value::Rf(v.parse().map_err(|_| bad())?),
            Sort::Vf => {
                let q = parse_q(v).ok_or_else(bad)?;
                Value::from(LFElem::embed_rational(&q, spec).map_err(|e| Fail::new(1, e.to_string()))?)
            }
        };
        out.insert(k.to_string(), val);
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_oracle(
    file: &Path,
    prime: u64,
    precision: u32,
    ch: Char,
    integrand: Option<&str>,
    exponent: u32,
    param: &str,
) -> Result<Json, Fail> {
    let kind = match ch {
        Char::Zero => FieldKind::CharZero,
        Char::Equal => FieldKind::EqualChar,
    };
    let spec = LocalFieldSpec::new(kind, prime, precision).map_err(|e| Fail::new(1, e.to_string()))?;
    let phi = Formula::parse(&read(file)?)?;
    let cfg = OracleConfig { params: oracle_params(&phi, param, spec)?, budget: box_budget() };
    let v = match integrand {
        None => volume_with(&phi, spec, &cfg)?,
        Some(g) => {
            let decls: Vec<String> = phi.free().iter().map(|(n, s)| format!("{s} {n}; ")).collect();
            let t = Formula::parse(&format!("{}({g}) == 0", decls.concat()))?;
            let dpcalc_core::formula::Node::VfEq(t, _) = t.body() else {
                return Err(Fail::new(2, format!("integrand {g} is not a field term")));
            };
            integrate(&Integrand::AbsPow(t.clone(), exponent), &phi, spec, &cfg)?
        }
    };
    serde_json::to_value(&v).map_err(|e| Fail::new(1, e.to_string()))
}

fn pretty(v: &Json) -> String {
    serde_json::to_string_pretty(v).expect("json")
}

fn print_out(s: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{s}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match &cli.cmd {
        Cmd::Parse { file, emit } => cmd_parse(file, *emit),
        Cmd::Integrate { file, input, primes } => cmd_integrate(file.as_deref(), input, primes.as_deref()),
        Cmd::Compare { file, input, corpus, primes, precision, both_characteristics } => {
            cmd_compare(file.as_deref(), input, corpus.as_deref(), primes, *precision, *both_characteristics)
        }
        Cmd::Appendix2 { primes } => cmd_appendix2(primes),
        Cmd::Oracle { file, prime, precision, characteristic, integrand, exponent, param } => {
            cmd_oracle(file, *prime, *precision, *characteristic, integrand.as_deref(), *exponent, param)
        }
    };
    match r {
        Ok(Json::Null) => ExitCode::SUCCESS,
        Ok(v) => {
            print_out(&pretty(&v));
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
