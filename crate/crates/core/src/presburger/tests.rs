use super::*;
use crate::arith::{q_frac, q_int};
use proptest::prelude::*;

fn af(s: &str) -> AffineForm {
    AffineForm::parse(s).unwrap()
}

fn sym(s: &str) -> SymA {
    SymA::parse(s).unwrap()
}

fn ray(name: &str, lo: &str) -> PresDomain {
    PresDomain::new().var(name, Some(af(lo)), None)
}

fn no_params() -> BTreeMap<String, i64> {
    BTreeMap::new()
}

#[test]
fn geometric_examples() {
    let s = sum(&ray("i", "0"), &PresTerm::new(SymA::one(), af("-i"))).unwrap();
    assert_eq!(s.as_constant().unwrap(), sym("1/(1 - L^-1)"));

    let d = ray("i", "0").congruence(3, 1);
    let s = sum(&d, &PresTerm::new(SymA::one(), af("-i"))).unwrap();
    assert_eq!(s.as_constant().unwrap(), sym("L^-1/(1 - L^-3)"));
    assert_eq!(s.as_constant().unwrap().to_string(), "L^-1/(1 - L^-3)");

    let r = sum(&ray("i", "0"), &PresTerm::new(SymA::one(), af("i")));
    assert!(matches!(r, Err(PresError::NotSummable(_))));
    let r = sum(&ray("i", "0"), &PresTerm::new(SymA::one(), af("0")));
    assert!(matches!(r, Err(PresError::NotSummable(_))));
}

#[test]
fn parametric_tail_sum() {
    // sum_{m >= k+1} L^-m L^-2k (L^-m - L^-(m+1))
    let term = PresTerm::new(sym("1 - L^-1"), af("-2*m - 2*k"));
    let s = sum(&ray("m", "k + 1"), &term).unwrap();
    let expected = LSum::parse("((1 - L^-1)/(1 - L^-2))*L^(-2*k)*L^(-2*(k + 1))").unwrap();
    assert_eq!(s, expected);
    let mut vals = no_params();
    vals.insert("k".into(), 0);
    // independent: (1 - 1/7) 7^-2 / (1 - 7^-2) at k = 0
    let v = s.eval(&vals).unwrap().nu(7);
    assert_eq!(v, q_frac(6, 7) * q_frac(1, 49) / (q_int(1) - q_frac(1, 49)));
}

#[test]
fn finite_and_piecewise() {
    let n_dom = PresDomain::new().var("i", Some(af("0")), Some(af("n - 1")));
    let pieces = vec![
        (n_dom, PresTerm::new(SymA::one(), af("-i"))),
        (ray("i", "n"), PresTerm::new(SymA::one(), af("-i"))),
    ];
    let s = sum_piecewise(&pieces).unwrap();
    assert_eq!(s.as_constant().unwrap(), sym("1/(1 - L^-1)"));
    assert!(sum_piecewise(&[]).unwrap().is_zero());

    // |t^3| over annuli split by ord mod 3
    let pieces: Vec<_> = (0..3)
        .map(|c| (ray("g", "0").congruence(3, c), PresTerm::new(sym("1 - L^-1"), af("-4*g"))))
        .collect();
    assert_eq!(sum_piecewise(&pieces).unwrap().as_constant().unwrap(), sym("(1 - L^-1)/(1 - L^-4)"));

    let overlapping = vec![
        (PresDomain::new().var("i", Some(af("0")), Some(af("5"))), PresTerm::new(SymA::one(), af("-i"))),
        (ray("i", "3"), PresTerm::new(SymA::one(), af("-i"))),
    ];
    assert!(matches!(sum_piecewise(&overlapping), Err(PresError::OverlapDetected(_))));

    let empty = PresDomain::new().var("i", Some(af("3")), Some(af("1")));
    assert!(sum(&empty, &PresTerm::new(SymA::one(), af("i"))).unwrap().is_zero());
}

#[test]
fn truncated_examples() {
    let t = PresTerm::new(SymA::one(), af("-i"));
    let (p, tail) = evaluate_truncated(&ray("i", "0"), &t, &q_int(2), 20, &no_params()).unwrap();
    let two = q_int(2);
    assert_eq!(p, &two - crate::arith::q_pow(&two, -20));
    // the remaining mass is exactly 2^-20 and the bound must cover it
    assert!(tail >= crate::arith::q_pow(&two, -20));
    assert!(tail <= crate::arith::q_pow(&two, -19));

    let (p, tail) = evaluate_truncated(&ray("i", "0"), &t, &q_int(3), 0, &no_params()).unwrap();
    assert_eq!(p, q_int(1));
    assert!(tail <= q_frac(1, 2));

    // parametric tail sum at q = 7, k = 0, cutoff 30
    let term = PresTerm::new(sym("1 - L^-1"), af("-2*m - 2*k"));
    let mut vals = no_params();
    vals.insert("k".into(), 0);
    let exact = sum(&ray("m", "k + 1"), &term).unwrap().eval(&vals).unwrap().nu(7);
    let (p, tail) = evaluate_truncated(&ray("m", "k + 1"), &term, &q_int(7), 30, &vals).unwrap();
    assert!((exact - p).abs() <= tail);
}

/// Summable one-variable test corpus: (domain, term, parameter values).
fn corpus() -> Vec<(PresDomain, PresTerm, BTreeMap<String, i64>)> {
    let mut k1 = no_params();
    k1.insert("k".into(), 1);
    vec![
        (ray("i", "0"), PresTerm::new(SymA::one(), af("-i")), no_params()),
        (ray("i", "0").congruence(3, 1), PresTerm::new(sym("2"), af("-i")), no_params()),
        (ray("m", "k + 1"), PresTerm::new(sym("1 - L^-1"), af("-2*m - 2*k")), k1.clone()),
        (PresDomain::new().var("i", None, Some(af("-2"))), PresTerm::new(sym("L"), af("3*i")), no_params()),
        (PresDomain::new().var("i", Some(af("-3")), Some(af("4"))), PresTerm::new(sym("-1/2"), af("2*i + 1")), no_params()),
        (ray("g", "0").congruence(4, 3), PresTerm::new(sym("1/(1 - L^-2)"), af("-5*g + k")), k1),
    ]
}

#[test]
fn specialization_within_tail_bound() {
    for (d, t, vals) in corpus() {
        let s = sum(&d, &t).unwrap().eval(&vals).unwrap();
        for q in [q_int(2), q_int(3), q_frac(5, 2), q_int(7)] {
            let exact = s.nu_q(&SpecTarget::new(q.clone()).unwrap());
            for cutoff in [10, 20, 40] {
                let (p, tail) = evaluate_truncated(&d, &t, &q, cutoff, &vals).unwrap();
                assert!((&exact - &p).abs() <= tail, "{d:?} {q} {cutoff}");
            }
        }
    }
}

#[test]
fn two_dimensional_tail_bound() {
    let d = ray("i", "0").var("j", Some(af("i")), None);
    let t = PresTerm::new(SymA::one(), af("-i - 2*j"));
    let s = sum(&d, &t).unwrap().as_constant().unwrap();
    // independent: sum_i q^-i q^-2i / (1 - q^-2) = 1 / ((1 - q^-3)(1 - q^-2))
    assert_eq!(s, sym("1/((1 - L^-2)*(1 - L^-3))"));
    let (p, tail) = evaluate_truncated(&d, &t, &q_int(3), 10, &no_params()).unwrap();
    assert!((s.nu(3) - p).abs() <= tail);
}

fn swap_box(lo1: i64, hi1: i64, lo2: i64, hi2: i64, a: i64, b: i64) -> (LSum, LSum) {
    let t = PresTerm::new(SymA::one(), AffineForm::term(a, "i").add(&AffineForm::term(b, "j")));
    let c = |x: i64| Some(AffineForm::constant(x));
    let d1 = PresDomain::new().var("i", c(lo1), c(hi1)).var("j", c(lo2), c(hi2));
    let d2 = PresDomain::new().var("j", c(lo2), c(hi2)).var("i", c(lo1), c(hi1));
    (sum(&d1, &t).unwrap(), sum(&d2, &t).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fubini_on_boxes(lo1 in -3i64..3, n1 in 0i64..4, lo2 in -3i64..3, n2 in 0i64..4, a in -3i64..4, b in -3i64..4) {
        let (x, y) = swap_box(lo1, lo1 + n1, lo2, lo2 + n2, a, b);
        prop_assert_eq!(x, y);
    }

    #[test]
    fn fubini_on_rays(lo1 in -3i64..3, lo2 in -3i64..3, a in 1i64..4, b in 1i64..4) {
        let t = PresTerm::new(SymA::one(), AffineForm::term(-a, "i").add(&AffineForm::term(-b, "j")));
        let c = |x: i64| Some(AffineForm::constant(x));
        let d1 = PresDomain::new().var("i", c(lo1), None).var("j", c(lo2), None);
        let d2 = PresDomain::new().var("j", c(lo2), None).var("i", c(lo1), None);
        let x = sum(&d1, &t).unwrap();
        prop_assert_eq!(&x, &sum(&d2, &t).unwrap());
        // product of two independent geometric series
        let g = |lo: i64, a: i64| SymA::l_pow(-a * lo).a_mul(&SymA::inv_one_minus_l_inv(a as u32));
        prop_assert_eq!(x.as_constant().unwrap(), g(lo1, a).a_mul(&g(lo2, b)));
    }

    #[test]
    fn shift_invariance(lo in -4i64..4, a in 1i64..5, b in -3i64..3, c in -5i64..6, m in 1i64..4) {
        let r = lo.rem_euclid(m);
        let d = ray("i", &lo.to_string()).congruence(m, r);
        let t = PresTerm::new(SymA::one(), AffineForm::term(-a, "i").add_const(b));
        let shifted_d = ray("i", &(lo + c).to_string()).congruence(m, (r + c).rem_euclid(m));
        let shifted_t = PresTerm::new(SymA::one(), AffineForm::term(-a, "i").add_const(b + a * c));
        prop_assert_eq!(sum(&d, &t).unwrap(), sum(&shifted_d, &shifted_t).unwrap());
    }

    #[test]
    fn congruence_splitting(d in 2i64..5, a in 1i64..5, lo in -3i64..3) {
        let t = PresTerm::new(SymA::one(), AffineForm::term(-a, "i"));
        let whole = sum(&ray("i", &lo.to_string()), &t).unwrap();
        let parts: Vec<_> = (0..d).map(|c| (ray("i", &lo.to_string()).congruence(d, c), t.clone())).collect();
        prop_assert_eq!(sum_piecewise(&parts).unwrap(), whole);
    }

    #[test]
    fn finite_sum_matches_enumeration(lo in -5i64..5, n in 0i64..8, a in -3i64..4, q in 2u64..6) {
        let d = PresDomain::new().var("i", Some(AffineForm::constant(lo)), Some(AffineForm::constant(lo + n - 1)));
        let t = PresTerm::new(SymA::one(), AffineForm::term(a, "i"));
        let s = sum(&d, &t).unwrap().as_constant().unwrap();
        let brute = (lo..lo + n).map(|i| crate::arith::q_pow(&q_int(q as i64), a * i)).fold(q_int(0), |x, y| x + y);
        prop_assert_eq!(s.nu(q), brute);
    }
}
