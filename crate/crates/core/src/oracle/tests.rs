use super::*;
use crate::arith::{q_frac, q_int};
use crate::formula::count_rf_points;
use crate::localfield::FieldKind;
use proptest::prelude::*;

fn f(src: &str) -> Formula {
    Formula::parse(src).unwrap()
}

fn both(p: u64, n: u32) -> [LocalFieldSpec; 2] {
    [LocalFieldSpec::qp(p, n).unwrap(), LocalFieldSpec::fpt(p, n).unwrap()]
}

fn cfg() -> OracleConfig {
    OracleConfig { params: BTreeMap::new(), budget: DEFAULT_BUDGET }
}

fn exactly(v: &VolumeInterval, x: &Q) -> bool {
    &v.lower == x && &v.upper == x
}

#[test]
fn haar_measure_of_balls() {
    for p in [2, 3, 5, 7] {
        for spec in both(p, 5) {
            for n in 0..5 {
                let v = volume(&f(&format!("ord(x) >= {n}")), spec).unwrap();
                assert!(exactly(&v, &p_pow_neg(p, n)), "{spec} {n} {v:?}");
            }
            assert!(exactly(&volume(&f("x == x"), spec).unwrap(), &q_int(1)));
        }
    }
}

#[test]
fn point_sets_leave_undecided_mass() {
    let spec = LocalFieldSpec::qp(3, 4).unwrap();
    let v = volume(&f("x == 1"), spec).unwrap();
    assert_eq!(v.lower, q_int(0));
    assert_eq!(v.upper, p_pow_neg(3, 4));
    assert_eq!(v.boxes_undecided, 1);
    assert_eq!(v.boxes_total, 81);
}

#[test]
fn cube_integral_brackets_closed_form() {
    for p in [5u64, 7] {
        let exact = q_frac(p as i64 - 1, p as i64) / (q_int(1) - p_pow_neg(p, 4));
        for spec in both(p, 6) {
            let v = integrate(&Integrand::AbsPow(VfTerm::Pow(Box::new(VfTerm::var("y")), 3), 1), &f("y == y"), spec, &cfg())
                .unwrap();
            assert!(v.contains(&exact), "{spec}");
            assert!(v.width() <= p_pow_neg(p, 4));
        }
    }
}

#[test]
fn cube_domain_at_a_cube() {
    // |t^3 - 1| over the units at p = 7: three simple roots of t^3 = 1
    let p = 7i64;
    let pq = q_int(p);
    let exact = q_int(3) * (q_int(1) - pq.recip()) * q_pow(&pq, -2) / (q_int(1) - q_pow(&pq, -2)) + q_int(1)
        - q_int(4) / &pq;
    let phi = f("ord(y) == 0");
    let g = Integrand::AbsPow(VfTerm::Sub(Box::new(VfTerm::Pow(Box::new(VfTerm::var("y")), 3)), Box::new(VfTerm::Const(BigInt::from(1)))), 1);
    for spec in both(7, 6) {
        let v = integrate(&g, &phi, spec, &cfg()).unwrap();
        assert!(v.contains(&exact), "{spec} {v:?}");
        assert!(v.width() <= p_pow_neg(7, 5));
    }
}

#[test]
fn plain_integral_of_one() {
    let v = integrate(&Integrand::One, &f("ord(x) >= 2"), LocalFieldSpec::qp(5, 4).unwrap(), &cfg()).unwrap();
    assert!(exactly(&v, &q_frac(1, 25)));
}

#[test]
fn serre_oesterle_stabilizes_on_smooth_fixtures() {
    let circle = f("x^2 + y^2 == 1");
    for p in [5u64, 13] {
        let rf = Formula::parse_with_default("x^2 + y^2 == 1", Sort::Rf).unwrap();
        let expect = Q::new(BigInt::from(count_rf_points(&rf, p).unwrap()), BigInt::from(p));
        for n in 1..=3 {
            for spec in both(p, n) {
                assert_eq!(serre_oesterle_count(&circle, 1, spec, DEFAULT_BUDGET).unwrap(), expect);
            }
        }
    }
    let line = f("x == 0");
    for n in 1..=3 {
        assert_eq!(serre_oesterle_count(&line, 0, LocalFieldSpec::qp(5, n).unwrap(), DEFAULT_BUDGET).unwrap(), q_int(1));
    }
    let node = f("x*y == 0");
    let vals: Vec<Q> =
        (1..=3).map(|n| serre_oesterle_count(&node, 1, LocalFieldSpec::qp(5, n).unwrap(), DEFAULT_BUDGET).unwrap()).collect();
    // independent: solutions of xy = 0 mod 5^n number (n+1) 5^n - n 5^(n-1)
    for (i, v) in vals.iter().enumerate() {
        let n = i as i64 + 1;
        let count = (n + 1) * 5i64.pow(n as u32) - n * 5i64.pow(n as u32 - 1);
        assert_eq!(*v, q_frac(count, 5i64.pow(n as u32)));
    }
    assert_ne!(vals[0], vals[1]);
}

#[test]
fn jacobian_examples() {
    for spec in both(5, 5) {
        let p = LFElem::uniformizer(spec);
        let (a, b) = jacobian_check(&p, &f("ord(x) >= 0"), "x", spec, &cfg()).unwrap();
        assert!(exactly(&a, &q_int(1)));
        assert!(exactly(&b, &q_frac(1, 5)));

        let p2 = p.pow(2).unwrap();
        let (a, b) = jacobian_check(&p2, &f("ord(x) == 1"), "x", spec, &cfg()).unwrap();
        assert!(exactly(&a, &(q_frac(1, 5) - q_frac(1, 25))));
        assert!(exactly(&b, &(q_frac(1, 25) * (q_frac(1, 5) - q_frac(1, 25)))));

        let unit = LFElem::embed_int(3, spec).unwrap();
        let (a, b) = jacobian_check(&unit, &f("ord(x - 2) >= 1 || ord(x) >= 3"), "x", spec, &cfg()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn budget_is_enforced() {
    let c = OracleConfig { params: BTreeMap::new(), budget: 50 };
    let r = volume_with(&f("x^2 + y^2 == 1"), LocalFieldSpec::qp(3, 9).unwrap(), &c);
    assert_eq!(r, Err(OracleError::BudgetExceeded(50)));
    let r = serre_oesterle_count(&f("x^2 + y^2 == 1"), 1, LocalFieldSpec::qp(3, 9).unwrap(), 50);
    assert_eq!(r, Err(OracleError::BudgetExceeded(50)));
}

#[test]
fn json_shape() {
    let v = volume(&f("ord(x) >= 2"), LocalFieldSpec::qp(5, 4).unwrap()).unwrap();
    let j = serde_json::to_value(&v).unwrap();
    assert_eq!(j["lower"], "1/25");
    assert_eq!(j["upper"], "1/25");
    assert_eq!(j["precision"], 4);
    assert_eq!(j["boxes_total"], "625");
    assert_eq!(j["boxes_true"], "25");
}

#[test]
fn vf_quantifier_semidecision() {
    // x is a square unit: witnesses exist for residues 1 and 4 mod 5
    let phi = f("vf x; ord(x) == 0 && exists y:vf. ord(y^2 - x) >= 2");
    let v = volume(&phi, LocalFieldSpec::qp(5, 2).unwrap()).unwrap();
    assert!(v.lower > q_int(0));
    assert!(v.contains(&q_frac(2, 5)));
    // an exact equation is never witnessed on a ball
    let v = volume(&f("vf x; exists y:vf. y^2 == x"), LocalFieldSpec::qp(5, 2).unwrap()).unwrap();
    assert_eq!(v.lower, q_int(0));
}

/// A random finite union of balls `ord(x - c) >= k`.
fn ball_union(cs: &[(i64, u32)]) -> Formula {
    let parts: Vec<String> = cs.iter().map(|(c, k)| format!("ord(x - {c}) >= {k}")).collect();
    f(&parts.join(" || "))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn refinement_is_monotone(cs in prop::collection::vec((0i64..30, 0u32..4), 1..4), p in prop::sample::select(vec![2u64, 3, 5])) {
        let phi = f(&format!("{} && !(x == {})", ball_union(&cs).body(), cs[0].0));
        for kind in [FieldKind::CharZero, FieldKind::EqualChar] {
            let mut prev: Option<VolumeInterval> = None;
            for n in 1..5 {
                let v = volume(&phi, LocalFieldSpec::new(kind, p, n).unwrap()).unwrap();
                if let Some(w) = &prev {
                    prop_assert!(v.within(w));
                }
                prev = Some(v);
            }
        }
    }

    #[test]
    fn volume_is_additive(a in prop::collection::vec((0i64..30, 0u32..4), 1..3), b in prop::collection::vec((0i64..30, 0u32..4), 1..3)) {
        let spec = LocalFieldSpec::qp(3, 4).unwrap();
        let (fa, fb) = (ball_union(&a), ball_union(&b));
        let or = Formula::from_node(Node::or(fa.body().clone(), fb.body().clone()));
        let and = Formula::from_node(Node::and(fa.body().clone(), fb.body().clone()));
        let [va, vb, vo, vn] = [&fa, &fb, &or, &and].map(|x| volume(x, spec).unwrap());
        prop_assert_eq!(&vo.lower + &vn.lower, &va.lower + &vb.lower);
        prop_assert_eq!(&vo.upper + &vn.upper, &va.upper + &vb.upper);
    }

    #[test]
    fn jacobian_scaling_on_ball_unions(cs in prop::collection::vec((0i64..30, 0u32..3), 1..4), k in 0u32..3, unit in 1i64..4, char_zero in any::<bool>()) {
        let kind = if char_zero { FieldKind::CharZero } else { FieldKind::EqualChar };
        let spec = LocalFieldSpec::new(kind, 5, 4).unwrap();
        let phi = ball_union(&cs);
        let a = LFElem::uniformizer(spec).pow(k).unwrap().mul(&LFElem::embed_int(unit, spec).unwrap()).unwrap();
        let (v1, v2) = jacobian_check(&a, &phi, "x", spec, &cfg()).unwrap();
        prop_assert!(scaled_overlap(&v1, &v2, &abs_value(&a).unwrap()));
        // ball unions are decided exactly
        prop_assert_eq!(&v2.lower, &(&v1.lower * abs_value(&a).unwrap()));
    }

    #[test]
    fn transfer_between_characteristics(cs in prop::collection::vec((0i64..12, 0u32..4), 1..4), r in 1i64..5, p in prop::sample::select(vec![29u64, 31])) {
        // small constants and a square with integral roots: no carries in either family
        let phi = f(&format!("({}) && ord(x^2 - {}) <= 1", ball_union(&cs).body(), r * r));
        let [a, b] = both(p, 3).map(|s| volume(&phi, s).unwrap());
        prop_assert!(a.overlaps(&b));
        prop_assert_eq!((&a.lower, &a.upper), (&b.lower, &b.upper));
    }
}
