//! Volume of `{ad - bc = 1, b̄² - d̄²η a square}` for a non-square `η`:
//! symbolic bookkeeping in `A` and brute-force counts over `F_q`.

use std::collections::BTreeMap;

use super::MotivicError;
use crate::arith::{is_prime, nonsquares, Q};
use crate::formula::{count_rf_points_with, Formula, Sort, DEFAULT_BUDGET};
use crate::symring::SymA;

/// The family `φ_η`, with the reductions of `a, b, c, d` as residue variables.
pub const PHI_ETA: &str = "rf a, b, c, d, eta; a*d - b*c == 1 && exists xi:rf. b^2 - d^2*eta == xi^2";

/// The total formula `Φ` over all non-squares, with its own sign convention.
pub const PHI_UPPER: &str = "rf a, b, c, d, eta; a*d - b*c == 1 && (exists xi:rf. !(xi == 0) && d^2 - b^2*eta == xi^2) && !(exists be:rf. eta == be^2)";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtaMode {
    /// One count per non-square `η`.
    PerEta,
    /// One count with `η` ranging over all non-squares.
    SummedOverNonsquares,
}

pub fn phi_eta(src: &str) -> Result<Formula, MotivicError> {
    Ok(Formula::parse_with_default(src, Sort::Rf)?)
}

fn l(k: i64) -> SymA {
    SymA::l_pow(k)
}

fn c(n: i64, d: i64) -> SymA {
    SymA::from_q(Q::new(n.into(), d.into()))
}

/// The assembly step by step, as `(name, value)`.
pub fn appendix2_steps() -> Vec<(&'static str, SymA)> {
    let one = SymA::one();
    let lm1 = &l(1) - &one;
    // the (t, s)-plane splits into non-square, nonzero-square and cone loci
    let cone = &(&c(2, 1) * &lm1) + &one;
    let split = &c(1, 2) * &lm1.pow(2);
    let nonsplit = &(&l(2) - &split) - &cone;
    let m1 = &nonsplit * &lm1;
    // Φ ∧ ord b = 0 is a double cover times the free fibre of c
    let upper_unit = &(&c(1, 2) * &l(1)) * &m1;
    // constant fibres over the (L - 1)/2 non-squares: 2/(L - 1) · ½ L M₁ = L · nonsplit
    let unit_part = &l(1) * &nonsplit;
    let ideal_part = &l(1) * &lm1;
    let total = &unit_part + &ideal_part;
    vec![
        ("cone", cone),
        ("split", split),
        ("nonsplit", nonsplit),
        ("m1", m1),
        ("upper_unit", upper_unit),
        ("unit_part", unit_part),
        ("ideal_part", ideal_part),
        ("total", total),
    ]
}

/// `½ L (L - 1)(L + 1)`, assembled from the steps.
pub fn appendix2_symbolic() -> SymA {
    appendix2_steps().pop().expect("nonempty").1
}

fn check_q(q: u64) -> Result<(), MotivicError> {
    if q < 5 || !is_prime(q) {
        return Err(MotivicError::InvalidPrime(q));
    }
    Ok(())
}

/// Counts over `F_q^4` of the formula `src` (with free `eta`).
pub fn appendix2_volume(src: &str, mode: EtaMode, q: u64) -> Result<Vec<(Option<u64>, u64)>, MotivicError> {
    check_q(q)?;
    let phi = phi_eta(src)?;
    match mode {
        EtaMode::PerEta => {
            let mut out = Vec::new();
            for eta in nonsquares(q) {
                let fixed = BTreeMap::from([("eta".to_string(), eta)]);
                out.push((Some(eta), count_rf_points_with(&phi, q, &fixed, DEFAULT_BUDGET)?));
            }
            Ok(out)
        }
        EtaMode::SummedOverNonsquares => {
            let mut total = 0;
            for eta in nonsquares(q) {
                let fixed = BTreeMap::from([("eta".to_string(), eta)]);
                total += count_rf_points_with(&phi, q, &fixed, DEFAULT_BUDGET)?;
            }
            Ok(vec![(None, total)])
        }
    }
}

/// `#{(t, s) : t² - s² is a nonzero square}` over `F_q`.
pub fn step3_split_count(q: u64) -> Result<u64, MotivicError> {
    check_q(q)?;
    let f = phi_eta("rf t, s; exists be:rf. !(be == 0) && t^2 - s^2 == be^2")?;
    Ok(count_rf_points_with(&f, q, &BTreeMap::new(), DEFAULT_BUDGET)?)
}
