use super::*;
use crate::arith::{q_frac, q_int, q_pow};
use crate::formula::{RfTerm, VfTerm};
use crate::presburger::{sum, AffineForm, PresDomain, PresTerm};
use proptest::prelude::*;

fn a(s: &str) -> SymA {
    SymA::parse(s).unwrap()
}

fn lf(c: i64, m: u32) -> LinearFactor {
    LinearFactor { center: q_int(c), multiplicity: m }
}

fn cube_file() -> CellData {
    CellData::from_json(include_str!("../../fixtures/cube.cells.json")).unwrap()
}

fn cube_full_file() -> CellData {
    CellData::from_json(include_str!("../../fixtures/cube_full.cells.json")).unwrap()
}

/// Independent closed form of the cube-domain integral at a cube `x`.
fn cube_domain(q: u64, k: i64) -> Q {
    let qq = q_int(q as i64);
    let roots = if q % 3 == 1 { 3 } else { 1 };
    q_int(roots) * (q_int(1) - qq.recip()) * q_pow(&qq, -4 * k - 2) / (q_int(1) - q_pow(&qq, -2))
        + q_pow(&qq, -4 * k)
        - q_int(roots + 1) * q_pow(&qq, -4 * k - 1)
}

#[test]
fn linear_product_examples() {
    let r = integrate_linear_product(&[lf(0, 3)], 1).unwrap();
    assert_eq!(r.symbolic().unwrap(), a("(1 - L^-1)/(1 - L^-4)"));
    assert!(r.bad_primes.is_empty());

    let r = integrate_linear_product(&[lf(0, 1)], 1).unwrap();
    assert_eq!(r.symbolic().unwrap(), a("(1 - L^-1)/(1 - L^-2)"));

    let r = integrate_linear_product(&[lf(0, 1), lf(1, 1), lf(3, 1)], 1).unwrap();
    assert_eq!(r.symbolic().unwrap(), a("(L - 3)/L + 3*(1 - L^-1)*L^-2/(1 - L^-2)"));
    assert_eq!(r.bad_primes.primes(), vec![2, 3]);

    assert_eq!(
        integrate_linear_product(&[lf(1, 1), lf(1, 2)], 1),
        Err(MotivicError::DuplicateCenter("1".into()))
    );
    assert!(parse_linear_product("0:0").is_err());
    assert_eq!(parse_linear_product("1/2:2, 3").unwrap(), vec![
        LinearFactor { center: q_frac(1, 2), multiplicity: 2 },
        lf(3, 1)
    ]);
}

#[test]
fn linear_product_matches_three_piece_sum() {
    // Σ_{i ≥ 0} L^{-3i} · L^{-(i+1)} (L - 1), summed directly
    let d = PresDomain::new().var("i", Some(AffineForm::constant(0)), None);
    let t = PresTerm::new(a("L - 1"), AffineForm::parse("-4*i - 1").unwrap());
    let direct = sum(&d, &t).unwrap().as_constant().unwrap();
    assert_eq!(integrate_linear_product(&[lf(0, 3)], 1).unwrap().symbolic().unwrap(), direct);
}

#[test]
fn specialization_examples() {
    let one = ConstructibleFn::constant(LSum::constant(SymA::one()));
    for q in [2, 5, 7, 31] {
        assert_eq!(specialize(&one, q, &Params::new()).unwrap(), q_int(1));
    }
    let u = Formula::parse("rf u; !(u == 0)").unwrap();
    let f = ConstructibleFn::term(u, None, LSum::constant(SymA::l_pow(-1)));
    assert_eq!(specialize(&f, 7, &Params::new()).unwrap(), q_frac(6, 7));
    assert_eq!(specialize(&f, 8, &Params::new()), Err(MotivicError::InvalidPrime(8)));

    let r = integrate_linear_product(&[lf(0, 1), lf(1, 1), lf(3, 1)], 1).unwrap();
    assert_eq!(r.specialize(3, &Params::new()), Err(MotivicError::BadPrime(3)));
    for q in [5u64, 7, 11, 13] {
        assert_eq!(r.specialize(q, &Params::new()).unwrap(), r.symbolic().unwrap().nu(q));
    }
}

#[test]
fn empty_and_total_cells() {
    let r = integrate_cells(&[], &[]).unwrap();
    assert!(r.value.is_zero());

    let basis = Formula::parse("rf e; zz g; g >= 0").unwrap();
    let c = Cell::one("line", basis, Center::Term(VfTerm::Const(0.into())), AffineForm::var("g"), RfTerm::Var("e".into()), LSum::constant(SymA::one()))
        .with_count(a("L - 1"));
    let r = integrate_cells(&[c], &[]).unwrap();
    assert_eq!(r.symbolic().unwrap(), SymA::one());
    for q in [2, 3, 5] {
        assert_eq!(r.specialize(q, &Params::new()).unwrap(), q_int(1));
    }
}

#[test]
fn zero_cells() {
    let b = Formula::parse("true").unwrap();
    let affine = Cell::zero("p", b.clone(), Center::Term(VfTerm::Const(2.into())), LSum::constant(SymA::one()));
    assert!(integrate_cells(&[affine], &[]).unwrap().value.is_zero());
    let curved = Cell::zero("q", b.clone(), Center::Definable("a root of z^2 - 2".into()), LSum::constant(SymA::one()));
    assert!(matches!(integrate_cells(&[curved], &[]), Err(MotivicError::UnsupportedZeroCell(id, _)) if id == "q"));
    let zz = Formula::parse("zz g; g >= 0").unwrap();
    let extra = Cell::zero("r", zz, Center::Term(VfTerm::Const(0.into())), LSum::constant(SymA::one()));
    assert!(matches!(integrate_cells(&[extra], &[]), Err(MotivicError::InvalidCell(..))));
}

#[test]
fn overlapping_cells_are_rejected() {
    let mk = |id: &str, basis: &str| {
        Cell::one(
            id,
            Formula::parse(basis).unwrap(),
            Center::Term(VfTerm::Const(0.into())),
            AffineForm::var("g"),
            RfTerm::Var("e".into()),
            LSum::constant(SymA::one()),
        )
    };
    let low = mk("low", "rf e; zz g; 0 <= g && g <= 3");
    let high = mk("high", "rf e; zz g; g >= 3");
    assert_eq!(integrate_cells(&[low.clone(), high], &[]).err(), Some(MotivicError::CellOverlap("low".into(), "high".into())));
    // same α range, separated by ξ
    let one = mk("one", "rf e; zz g; g >= 4 && e == 1");
    let other = mk("other", "rf e; zz g; g >= 4 && !(e == 1)");
    assert!(integrate_cells(&[low, one, other], &[]).is_ok());
}

#[test]
fn non_summable_is_reported_per_cell() {
    let c = Cell::one(
        "up",
        Formula::parse("rf e; zz g; g >= 0").unwrap(),
        Center::Term(VfTerm::Const(0.into())),
        AffineForm::var("g"),
        RfTerm::Var("e".into()),
        LSum::parse("L^(2*g)").unwrap(),
    );
    assert!(matches!(integrate_cells(&[c], &[]), Err(MotivicError::NotSummable(id, _)) if id == "up"));
}

#[test]
fn cube_cells_reproduce_the_annulus_sum() {
    let d = cube_file();
    let r = d.integrate().unwrap();
    assert_eq!(r.bad_primes.primes(), vec![3]);
    let near = r.derivation.iter().find(|c| c.cell == "near_roots").unwrap();
    let coeff = near.value.terms().next().unwrap().coeff.clone();
    assert_eq!(coeff, LSum::parse("L^(-2*k - 1)*L^(-2*k - 2)*(1 - L^-2)^-1").unwrap());
    for k in [0, 1, 2] {
        for q in [5u64, 7, 11, 13, 31] {
            let ps = d.params_from_str(&format!("x:cube,k={k}")).unwrap();
            assert_eq!(r.specialize(q, &ps).unwrap(), cube_domain(q, k), "q={q} k={k}");
        }
    }
}

#[test]
fn cube_full_cells_add_up() {
    let d = cube_full_file();
    let r = d.integrate().unwrap();
    for k in [0i64, 1, 2] {
        for q in [5u64, 7, 13] {
            let qq = q_int(q as i64);
            let inner = (q_int(1) - qq.recip()) * (q_int(1) - q_pow(&qq, -4 * k)) / (q_int(1) - q_pow(&qq, -4));
            let outer = q_pow(&qq, -4 * k - 1);
            let ps = d.params_from_str(&format!("x:cube,k={k}")).unwrap();
            assert_eq!(r.specialize(q, &ps).unwrap(), inner + outer + cube_domain(q, k));
        }
    }
    // at x = 1 the result agrees with the linear product over the cube roots
    let lp = integrate_linear_product(&[lf(1, 1)], 1).unwrap();
    let ps = d.params_from_str("x:cube,k=0").unwrap();
    assert_eq!(r.specialize(5, &ps).unwrap(), lp.specialize(5, &Params::new()).unwrap());
}

#[test]
fn param_strings() {
    let d = cube_file();
    let p = d.params_from_str("x:cube, k=2").unwrap();
    assert_eq!(p, Params::new().rf("a", 1).zz("k", 2));
    assert!(d.params_from_str("x:square").is_err());
    assert_eq!(d.params_from_str("m=1"), Err(MotivicError::UnboundParameter("m".into())));
    let r = d.integrate().unwrap();
    assert!(matches!(r.specialize(7, &Params::new().rf("a", 1)), Err(MotivicError::UnboundParameter(_))));
}

#[test]
fn cell_file_errors() {
    assert!(CellData::from_json("{}").is_err());
    let bad_kind = r#"{"cells":[{"kind":"two","basis":"true","center":"0"}]}"#;
    assert!(CellData::from_json(bad_kind).is_err());
    let no_alpha = r#"{"cells":[{"kind":"one","basis":"rf e; true","center":"0","xi":"e"}]}"#;
    assert!(matches!(CellData::from_json(no_alpha), Err(MotivicError::InvalidCell(..))));
    let bad_xi = r#"{"cells":[{"kind":"one","basis":"rf e; true","center":"0","alpha":"0","xi":"w"}]}"#;
    assert!(matches!(CellData::from_json(bad_xi).and_then(|d| d.integrate()), Err(MotivicError::InvalidCell(..))));
}

#[test]
fn appendix2_symbolic_assembly() {
    assert_eq!(appendix2_symbolic(), a("1/2*L^3 - 1/2*L"));
    let steps: std::collections::BTreeMap<&str, SymA> = appendix2_steps().into_iter().collect();
    assert_eq!(steps["nonsplit"], a("1/2*L^2 - L + 1/2"));
    assert_eq!(steps["m1"], a("1/2*(L - 1)^3"));
    assert_eq!(steps["unit_part"], a("1/2*L*(L - 1)^2"));
    assert_eq!(steps["upper_unit"], a("1/4*L*(L - 1)^3"));
}

#[test]
fn appendix2_counts() {
    for q in [5u64, 7] {
        let expect = q * (q - 1) * (q + 1) / 2;
        for src in [PHI_ETA, PHI_UPPER] {
            let counts = appendix2_volume(src, EtaMode::PerEta, q).unwrap();
            assert_eq!(counts.len() as u64, (q - 1) / 2);
            assert!(counts.iter().all(|(_, n)| *n == expect), "{q} {counts:?}");
        }
        let total = appendix2_volume(PHI_ETA, EtaMode::SummedOverNonsquares, q).unwrap();
        assert_eq!(total, vec![(None, expect * (q - 1) / 2)]);
        assert_eq!(appendix2_symbolic().nu(q), q_int(expect as i64));
    }
    assert_eq!(appendix2_volume(PHI_ETA, EtaMode::PerEta, 3), Err(MotivicError::InvalidPrime(3)));
    for q in [5u64, 7, 11] {
        assert_eq!(step3_split_count(q).unwrap(), (q - 1) * (q - 1) / 2);
    }
}

#[test]
fn compare_linear_and_cells() {
    let job = compare::CompareJob::linear_product(&[lf(0, 3)], 1).unwrap();
    let rep = compare::run(&job, &[5, 7], 6, true, DEFAULT_BUDGET).unwrap();
    assert!(rep.ok(), "{rep:?}");
    let job = compare::CompareJob::linear_product(&[lf(0, 1), lf(1, 1), lf(3, 1)], 1).unwrap();
    let rep = compare::run(&job, &[2, 3, 5], 4, true, DEFAULT_BUDGET).unwrap();
    assert_eq!(rep.rows[0].status, compare::RowStatus::SkippedBadPrime);
    assert!(rep.ok());

    let d = cube_file();
    let job = compare::CompareJob::cells("cube", &d, d.params_from_str("x:cube,k=0").unwrap()).unwrap();
    assert!(compare::run(&job, &[5, 7], 6, true, DEFAULT_BUDGET).unwrap().ok());

    let bad = CellData::from_json(include_str!("../../fixtures/corrupted.cells.json")).unwrap();
    let job = compare::CompareJob::cells("bad", &bad, bad.params_from_str("x:cube,k=0").unwrap()).unwrap();
    let rep = compare::run(&job, &[5, 7], 6, false, DEFAULT_BUDGET).unwrap();
    assert_eq!(rep.failing, vec![5, 7]);
}

fn centers() -> impl Strategy<Value = Vec<(i64, u32)>> {
    prop::collection::btree_map(-6i64..7, 1u32..4, 1..4).prop_map(|m| m.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn linear_product_closed_form(cs in centers(), e in 1u32..3) {
        let fs: Vec<LinearFactor> = cs.iter().map(|&(c, m)| lf(c, m)).collect();
        let r = integrate_linear_product(&fs, e).unwrap();
        let n = fs.len() as i64;
        let mut expect = &(&SymA::l_pow(1) - &SymA::from_int(n)) * &SymA::l_pow(-1);
        for f in &fs {
            let k = (e * f.multiplicity + 1) as i64;
            expect = &expect + &(&(&a("1 - L^-1") * &SymA::l_pow(-k)) * &SymA::inv_one_minus_l_inv(k as u32));
        }
        prop_assert_eq!(r.symbolic().unwrap(), expect.clone());
        for q in [5u64, 7, 11, 13, 17] {
            if !r.bad_primes.contains(q) {
                prop_assert_eq!(r.specialize(q, &Params::new()).unwrap(), expect.nu(q));
            }
        }
    }

    #[test]
    fn integrate_cells_is_additive(split in 0usize..5) {
        let d = cube_full_file();
        let (x, y) = d.cells.split_at(split.min(d.cells.len()));
        let whole = integrate_cells(&d.cells, &d.parameters).unwrap();
        let l = integrate_cells(x, &d.parameters).unwrap();
        let r = integrate_cells(y, &d.parameters).unwrap();
        prop_assert_eq!(whole.value, l.value.add(&r.value));
    }
}
