use super::*;
use crate::arith::{q_frac, q_int};
use proptest::prelude::*;

fn l() -> SymA {
    SymA::l_pow(1)
}

#[test]
fn closed_form_from_geometric_tail() {
    // 1 + L^-4/(1 - L^-4), times (1 - L^-1)
    let tail = SymA::l_pow(-4).a_mul(&SymA::inv_one_minus_l_inv(4));
    let x = SymA::one().a_add(&tail).a_mul(&SymA::one_minus_l_inv(1));
    let y = SymA::one_minus_l_inv(1).a_div_by_unit(&SymA::one_minus_l_inv(4)).unwrap();
    assert_eq!(x, y);
    assert_eq!(x.to_string(), "(1 - L^-1)/(1 - L^-4)");
    // (p - 1)/p / (1 - p^-4) at p = 3
    assert_eq!(x.nu(3), q_frac(27, 40));
}

#[test]
fn trivial_ring_facts() {
    let x = l().a_mul(&l()).a_sub(&SymA::from_int(3));
    assert!(x.a_add(&x.a_neg()).is_zero());
    assert_eq!(l().a_mul(&SymA::l_pow(-1)), SymA::one());
    assert_eq!(x.a_div_by_unit(&SymA::one()).unwrap(), x);
    assert_eq!(l().nu(7), q_int(7));
    assert_eq!(SymA::zero().nu(11), q_int(0));
    assert_eq!(SymA::zero().to_string(), "0");
}

#[test]
fn non_units() {
    let l_minus_2 = l().a_sub(&SymA::from_int(2));
    assert!(matches!(SymA::one().a_div_by_unit(&l_minus_2), Err(SymError::NotInvertibleInA(_))));
    assert!(SymA::one().a_div_by_unit(&SymA::zero()).is_err());
    // L + 1 = (1 - L^-2) / (1 - L^-1) * L is a unit
    let l_plus_1 = l().a_add(&SymA::one());
    let inv = SymA::one().a_div_by_unit(&l_plus_1).unwrap();
    assert_eq!(inv.a_mul(&l_plus_1), SymA::one());
    assert!(SpecTarget::new(q_int(1)).is_err());
}

#[test]
fn order_examples() {
    assert!(!l().a_sub(&SymA::from_int(2)).is_nonneg());
    assert!(l().pow(2).a_sub(&l()).is_nonneg());
    assert!(SymA::inv_one_minus_l_inv(2).is_nonneg());
    assert!(SymA::l_pow(3).a_sub(&SymA::l_pow(-2)).is_nonneg());
    // (L - 3/2)^2 touches zero but stays nonnegative
    let t = l().a_sub(&SymA::from_q(q_frac(3, 2)));
    assert!(t.pow(2).is_nonneg());
    assert!(!t.pow(3).is_nonneg());
    // (L - 2)(L - 3) is negative between the roots
    let u = l().a_sub(&SymA::from_int(2)).a_mul(&l().a_sub(&SymA::from_int(3)));
    assert!(!u.is_nonneg());
    // (L - 1/2)(L - 1) is positive on (1, inf) even though 1 is a root
    let w = l().a_sub(&SymA::from_q(q_frac(1, 2))).a_mul(&l().a_sub(&SymA::one()));
    assert!(w.is_nonneg());
    assert!(!w.a_neg().is_nonneg());
}

#[test]
fn rendering() {
    assert_eq!(SymA::one_minus_l_inv(1).to_string(), "1 - L^-1");
    assert_eq!(l().to_string(), "L");
    assert_eq!(SymA::monomial(q_frac(1, 2), 3).to_string(), "1/2*L^3");
    assert_eq!(SymA::inv_one_minus_l_inv(1).to_string(), "1/(1 - L^-1)");
    assert_eq!(SymA::inv_one_minus_l_inv(4).pow(2).to_string(), "1/(1 - L^-4)^2");
    let x = SymA::inv_one_minus_l_inv(1).a_mul(&SymA::inv_one_minus_l_inv(2).pow(2));
    assert_eq!(x.to_string(), "1/((1 - L^-1)*(1 - L^-2)^2)");
    let y = SymA::l_pow(-3).a_sub(&SymA::from_int(2)).a_mul(&SymA::inv_one_minus_l_inv(3));
    assert_eq!(y.to_string(), "(-2 + L^-3)/(1 - L^-3)");
}

#[test]
fn parse_round_trip() {
    for s in ["(1 - L^-1)/(1 - L^-4)", "1/2*L^3 - 1/2*L", "L^-2/(1 - L^-2)", "0", "-3"] {
        let x = SymA::parse(s).unwrap();
        assert_eq!(SymA::parse(&x.to_string()).unwrap(), x, "{s}");
    }
    assert_eq!(SymA::parse("L^2 - L").unwrap(), l().pow(2).a_sub(&l()));
    assert!(SymA::parse("L^k").is_err());
}

fn arb_atom() -> impl Strategy<Value = SymA> {
    prop_oneof![
        (-6i64..7, -4i64..5).prop_map(|(c, k)| SymA::monomial(q_int(c), k)),
        (1u32..5).prop_map(SymA::inv_one_minus_l_inv),
        (1u32..5).prop_map(SymA::one_minus_l_inv),
        (-5i64..6, 1i64..4).prop_map(|(n, d)| SymA::from_q(q_frac(n, d))),
    ]
}

fn arb_sym() -> impl Strategy<Value = SymA> {
    prop::collection::vec(prop::collection::vec(arb_atom(), 1..4), 1..4).prop_map(|terms| {
        terms
            .into_iter()
            .map(|f| f.into_iter().fold(SymA::one(), |a, b| a.a_mul(&b)))
            .fold(SymA::zero(), |a, b| a.a_add(&b))
    })
}

/// Elements that are nonnegative by construction.
fn arb_nonneg() -> impl Strategy<Value = SymA> {
    let atom = prop_oneof![
        (0i64..5, -3i64..4).prop_map(|(c, k)| SymA::monomial(q_int(c), k)),
        (1u32..5).prop_map(SymA::inv_one_minus_l_inv),
        (1u32..5).prop_map(SymA::one_minus_l_inv),
        (-3i64..4, 1i64..4).prop_map(|(j, d)| SymA::l_pow(j + d).a_sub(&SymA::l_pow(j))),
    ];
    prop::collection::vec(prop::collection::vec(atom, 1..3), 1..3).prop_map(|terms| {
        terms
            .into_iter()
            .map(|f| f.into_iter().fold(SymA::one(), |a, b| a.a_mul(&b)))
            .fold(SymA::zero(), |a, b| a.a_add(&b))
    })
}

fn arb_q() -> impl Strategy<Value = SpecTarget> {
    (1i64..20, 1i64..8).prop_map(|(a, b)| SpecTarget::new(q_int(1) + q_frac(a * 19, b * 19 + 1)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nu_is_a_ring_homomorphism(x in arb_sym(), y in arb_sym(), t in arb_q()) {
        prop_assert!(t.q() > &q_int(1) && t.q() <= &q_int(20));
        prop_assert_eq!(x.a_add(&y).nu_q(&t), x.nu_q(&t) + y.nu_q(&t));
        prop_assert_eq!(x.a_mul(&y).nu_q(&t), x.nu_q(&t) * y.nu_q(&t));
    }

    #[test]
    fn normal_form_is_stable(x in arb_sym()) {
        let again = SymA::parse(&x.to_string()).unwrap();
        prop_assert_eq!(&again, &x);
        prop_assert_eq!(again.canonical(), x);
    }

    #[test]
    fn equality_matches_pointwise_agreement(x in arb_sym(), y in arb_sym()) {
        let d = x.a_sub(&y);
        let pts = d.cleared_degree() + 1;
        let agree = (2..2 + pts as u64).all(|q| x.nu(q) == y.nu(q));
        prop_assert_eq!(agree, x == y);
        prop_assert_eq!(x.a_sub(&x), SymA::zero());
    }

    #[test]
    fn order_is_antisymmetric(x in arb_sym()) {
        if x.is_nonneg() && x.a_neg().is_nonneg() {
            prop_assert!(x.is_zero());
        }
    }

    #[test]
    fn order_is_compatible(x in arb_nonneg(), y in arb_nonneg()) {
        prop_assert!(x.is_nonneg());
        prop_assert!(y.is_nonneg());
        prop_assert!(x.a_add(&y).is_nonneg());
        prop_assert!(x.a_mul(&y).is_nonneg());
    }

    #[test]
    fn nonneg_agrees_with_sampling(x in arb_sym()) {
        if x.is_nonneg() {
            for k in 1..40 {
                let t = SpecTarget::new(q_int(1) + q_frac(k, 4)).unwrap();
                prop_assert!(x.nu_q(&t) >= q_int(0));
            }
        }
    }
}
