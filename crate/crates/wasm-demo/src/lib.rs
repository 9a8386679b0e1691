//! Browser bindings: linear-product integration, specialization and the box oracle.

use serde_json::json;
use wasm_bindgen::prelude::*;

use dpcalc_core::arith::{fmt_q, is_prime};
use dpcalc_core::formula::Formula;
use dpcalc_core::localfield::{FieldKind, LocalFieldSpec};
use dpcalc_core::motivic::{integrate_linear_product, parse_linear_product, MotivicError, Params};
use dpcalc_core::oracle::{volume_with, OracleConfig};

/// Box budget for the page; small enough to keep the tab responsive.
const BUDGET: u64 = 2_000_000;

fn err(e: impl ToString) -> String {
    e.to_string()
}

/// `∫ ∏ |t - c|^(e·m)` for `"c:m,..."`, with its values at the primes up to 31.
#[wasm_bindgen]
pub fn integrate(product: &str, exponent: u32) -> Result<String, String> {
    let r = integrate_linear_product(&parse_linear_product(product).map_err(err)?, exponent).map_err(err)?;
    let mut values = Vec::new();
    for q in (2..=31).filter(|q| is_prime(*q)) {
        let v = match r.specialize(q, &Params::new()) {
            Ok(v) => json!(fmt_q(&v)),
            Err(MotivicError::BadPrime(_)) => json!(null),
            Err(e) => return Err(err(e)),
        };
        values.push(json!({ "prime": q, "value": v }));
    }
    let out = json!({
        "symbolic": r.symbolic().map(|s| s.to_string()),
        "bad_primes": r.bad_primes.primes(),
        "values": values,
    });
    Ok(out.to_string())
}

/// The value of the same integral at one prime, as `"num/den"`.
#[wasm_bindgen]
pub fn specialize(product: &str, exponent: u32, prime: u64) -> Result<String, String> {
    let r = integrate_linear_product(&parse_linear_product(product).map_err(err)?, exponent).map_err(err)?;
    Ok(fmt_q(&r.specialize(prime, &Params::new()).map_err(err)?))
}

/// Bracket the volume of a formula in `O^m` by residue boxes.
#[wasm_bindgen]
pub fn oracle_volume(formula: &str, prime: u64, precision: u32, equal_char: bool) -> Result<String, String> {
    let kind = if equal_char { FieldKind::EqualChar } else { FieldKind::CharZero };
    let spec = LocalFieldSpec::new(kind, prime, precision).map_err(err)?;
    let phi = Formula::parse(formula).map_err(err)?;
    let cfg = OracleConfig { budget: BUDGET, ..OracleConfig::default() };
    let v = volume_with(&phi, spec, &cfg).map_err(err)?;
    serde_json::to_string(&v).map_err(err)
}
