use albker::padic::{is_pth_power, FieldElement, LocalField};
use albker::units::{graded_quotient_order, is_norm, is_norm_by_enumeration, norm_group, Level, UnitsModP};
use num_bigint::BigInt;
use proptest::prelude::*;

fn eis(p: u64, f: usize, c: &[i64], cap: i64) -> LocalField {
    LocalField::new(p, f, Some(&c.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>()), cap).unwrap()
}

fn fields() -> Vec<LocalField> {
    vec![
        LocalField::qp(2, 40).unwrap(),
        eis(3, 1, &[3, 3, 1], 40),
        eis(2, 1, &[-2, 0, 1], 40),
        LocalField::new(2, 2, None, 30).unwrap(),
        eis(5, 1, &[5, 10, 10, 5, 1], 40),
        LocalField::qp(3, 30).unwrap(),
        eis(3, 1, &[-3, 0, 1], 40),
        eis(2, 2, &[2, 0, 0, 1], 40),
    ]
}

fn element(k: &LocalField, coeffs: &[i64], shift: i64) -> FieldElement {
    let n = k.degree();
    let c: Vec<BigInt> = (0..n).map(|i| BigInt::from(coeffs[i % coeffs.len()])).collect();
    let x = k.from_ok(c, shift, k.cap());
    if x.is_zero() {
        k.one()
    } else {
        x
    }
}

fn add_mod(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    a.iter().zip(b).map(|(x, y)| (x + y) % p).collect()
}

#[test]
fn basis_sizes_and_graded_orders() {
    for k in fields() {
        let u = UnitsModP::new(&k).unwrap();
        let d = k.degree();
        let p = k.p();
        if u.has_mu_p() {
            assert_eq!(u.dim(), d + 2);
            let top = u.top_level().unwrap();
            assert_eq!(u.levels().iter().filter(|l| **l == Level::Unit(top)).count(), 1);
            let mut prod: u64 = 1;
            for i in 0..=top + 2 {
                let a = graded_quotient_order(&k, i).unwrap();
                assert_eq!(a, u.graded_order_from_basis(i), "level {i}");
                prod *= a;
            }
            assert_eq!(prod, p.pow(d as u32 + 1));
            for l in u.levels() {
                if let Level::Unit(i) = l {
                    assert!(i % p != 0 || i == top);
                }
            }
        } else {
            assert_eq!(u.dim(), d + 1);
        }
        assert_eq!(u.levels().iter().filter(|l| **l == Level::Uniformizer).count(), 1);
    }
}

#[test]
fn basis_vectors_sit_at_their_levels() {
    for k in fields() {
        let u = UnitsModP::new(&k).unwrap();
        for (i, b) in u.basis().iter().enumerate() {
            let c = u.decompose(&b.element).unwrap();
            let mut expect = vec![0; u.dim()];
            expect[i] = 1;
            assert_eq!(c, expect);
            if let Level::Unit(_) = b.level {
                assert_eq!(u.ubar_level(&b.element).unwrap(), b.level);
            }
        }
    }
}

fn arb() -> impl Strategy<Value = (usize, Vec<i64>, i64, Vec<i64>, i64)> {
    (
        0usize..8,
        prop::collection::vec(-500i64..500, 8),
        -3i64..4,
        prop::collection::vec(-500i64..500, 8),
        -3i64..4,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn decomposition_is_a_homomorphism((fi, a, sa, b, sb) in arb()) {
        let k = &fields()[fi];
        let u = UnitsModP::new(k).unwrap();
        let x = element(k, &a, sa);
        let y = element(k, &b, sb);
        let cx = u.decompose(&x).unwrap();
        let cy = u.decompose(&y).unwrap();
        prop_assert_eq!(u.decompose(&x.mul(&y)).unwrap(), add_mod(&cx, &cy, k.p()));
        prop_assert!(u.decompose(&x.pow_u(k.p())).unwrap().iter().all(|&c| c == 0));
        let back = u.compose(&cx).div(&x).unwrap();
        prop_assert!(is_pth_power(&back).unwrap().is_some());
    }

    #[test]
    fn pth_powers_have_trivial_level((fi, a, _sa, _b, _sb) in arb()) {
        let k = &fields()[fi];
        let u = UnitsModP::new(k).unwrap();
        let x = element(k, &a, 0);
        let x = x.shift(-x.valuation().unwrap());
        prop_assert_eq!(u.ubar_level(&x.pow_u(k.p())).unwrap(), Level::Trivial);
        let lvl = u.ubar_level(&x).unwrap();
        prop_assert!(lvl != Level::Unit(0));
    }
}

#[test]
fn norms_agree_with_enumeration() {
    let cases = [fields()[0].clone(), fields()[1].clone(), fields()[2].clone()];
    for k in cases {
        let u = UnitsModP::new(&k).unwrap();
        let reps: Vec<FieldElement> = u.basis().iter().map(|b| b.element.clone()).collect();
        let mut ys = reps.clone();
        ys.push(reps[1].mul(&reps[0]));
        let mut xs = reps.clone();
        xs.push(reps[reps.len() - 1].mul(&reps[1]));
        for y in &ys {
            let g = norm_group(&u, y).unwrap();
            for x in &xs {
                let fast = g.contains(&u.decompose(x).unwrap());
                let slow = is_norm_by_enumeration(&k, y, x, 1 << 16).unwrap();
                assert_eq!(fast, slow, "{:?} {:?}", x, y);
                assert_eq!(fast, is_norm(&k, x, y).unwrap(), "symmetry");
            }
            let one_minus = k.one().sub(y);
            if one_minus.valuation().is_some() {
                assert!(g.contains(&u.decompose(&one_minus).unwrap()));
            }
        }
    }
}

#[test]
fn q2_norm_examples() {
    let k = LocalField::qp(2, 40).unwrap();
    assert!(is_norm(&k, &k.from_int(-1), &k.from_int(2)).unwrap());
    assert!(!is_norm(&k, &k.from_int(-1), &k.from_int(-1)).unwrap());
    assert!(is_norm(&k, &k.from_int(5), &k.from_int(-1)).unwrap());
    assert!(!is_norm(&k, &k.from_int(5), &k.from_int(2)).unwrap());
    assert!(is_norm(&k, &k.from_int(9), &k.from_int(2)).unwrap());
}
