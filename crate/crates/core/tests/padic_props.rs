use albker::padic::{adjoin_root, is_pth_power, FieldElement, LocalField, Poly, Segment};
use num_bigint::BigInt;
use num_rational::Ratio;
use proptest::prelude::*;

fn fields() -> Vec<LocalField> {
    vec![
        LocalField::qp(2, 40).unwrap(),
        LocalField::qp(5, 30).unwrap(),
        LocalField::new(2, 1, Some(&[-2, 0, 1].map(BigInt::from)), 40).unwrap(),
        LocalField::new(3, 1, Some(&[3, 3, 1].map(BigInt::from)), 40).unwrap(),
        LocalField::new(2, 2, None, 30).unwrap(),
        LocalField::new(2, 2, Some(&[2, 0, 0, 1].map(BigInt::from)), 40).unwrap(),
    ]
}

fn element(k: &LocalField, coeffs: &[i64], shift: i64) -> FieldElement {
    let n = k.degree();
    let c: Vec<BigInt> = (0..n).map(|i| BigInt::from(coeffs[i % coeffs.len()])).collect();
    k.from_ok(c, shift, k.cap())
}

fn arb() -> impl Strategy<Value = (usize, Vec<i64>, i64, Vec<i64>, i64, Vec<i64>)> {
    (
        0usize..6,
        prop::collection::vec(-1000i64..1000, 6),
        -3i64..4,
        prop::collection::vec(-1000i64..1000, 6),
        -3i64..4,
        prop::collection::vec(-1000i64..1000, 6),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn valuation_is_additive((fi, a, sa, b, sb, c) in arb()) {
        let k = &fields()[fi];
        let x = element(k, &a, sa);
        let y = element(k, &b, sb);
        let z = element(k, &c, 0);
        if let (Some(vx), Some(vy)) = (x.valuation(), y.valuation()) {
            prop_assert_eq!(x.mul(&y).valuation(), Some(vx + vy));
            let s = x.add(&y);
            if vx != vy {
                prop_assert_eq!(s.valuation(), Some(vx.min(vy)));
            } else {
                prop_assert!(s.val_or_prec() >= vx);
            }
        }
        let l = x.mul(&y).mul(&z);
        let r = x.mul(&y.mul(&z));
        prop_assert!(l.eq_approx(&r));
        let d1 = x.mul(&y.add(&z));
        let d2 = x.mul(&y).add(&x.mul(&z));
        prop_assert!(d1.eq_approx(&d2));
    }

    #[test]
    fn inverse_round_trip((fi, a, sa, _b, _sb, _c) in arb()) {
        let k = &fields()[fi];
        let x = element(k, &a, sa);
        if x.valuation().is_some() {
            let y = x.inv().unwrap();
            prop_assert!(x.mul(&y).eq_approx(&k.one()));
        }
    }

    #[test]
    fn pth_powers_detected((fi, a, sa, _b, _sb, _c) in arb()) {
        let k = &fields()[fi];
        let x = element(k, &a, sa);
        if x.valuation().is_some() {
            let y = x.pow_u(k.p());
            let r = is_pth_power(&y).unwrap();
            prop_assert!(r.is_some());
            prop_assert!(r.unwrap().pow_u(k.p()).eq_approx(&y));
            let unit = x.shift(-x.valuation().unwrap());
            prop_assert!(is_pth_power(&unit.mul(&k.uniformizer())).unwrap().is_none());
        }
    }

    #[test]
    fn polygon_of_product_is_union(r1 in prop::collection::vec((0i64..4, 1i64..50), 1..4),
                                   r2 in prop::collection::vec((0i64..4, 1i64..50), 1..4)) {
        let k = LocalField::qp(3, 60).unwrap();
        let build = |roots: &[(i64, i64)]| {
            roots.iter().fold(Poly::from_ints(&k, &[1]), |acc, &(v, u)| {
                let u = if u % 3 == 0 { u + 1 } else { u };
                acc.mul(&Poly::from_ints(&k, &[-(3i64.pow(v as u32) * u), 1]))
            })
        };
        let f = build(&r1);
        let g = build(&r2);
        let expand = |segs: Vec<Segment>| {
            let mut v: Vec<Ratio<i64>> = segs.iter().flat_map(|s| std::iter::repeat(s.slope).take(s.length)).collect();
            v.sort();
            v
        };
        let mut union = expand(f.newton_polygon().unwrap());
        union.extend(expand(g.newton_polygon().unwrap()));
        union.sort();
        prop_assert_eq!(expand(f.mul(&g).newton_polygon().unwrap()), union);
    }
}

#[test]
fn norm_of_root_is_constant_term() {
    let cases: Vec<(u64, Vec<i64>)> = vec![
        (2, vec![1, 0, 1]),
        (2, vec![2, 2, 1]),
        (3, vec![-2, 0, 1]),
        (3, vec![3, 0, 0, 1]),
        (5, vec![5, 0, 1]),
        (2, vec![1, 1, 1]),
    ];
    for (p, c) in cases {
        let k = LocalField::qp(p, 40).unwrap();
        let g = Poly::from_ints(&k, &c);
        let ext = adjoin_root(&k, &g).unwrap();
        let sign = if g.deg() % 2 == 0 { 1 } else { -1 };
        assert!(ext.norm(ext.root()).unwrap().eq_approx(&k.from_int(sign * c[0])));
        assert_eq!(ext.e_rel() * ext.f_rel(), g.deg());
        assert_eq!(ext.top().degree(), g.deg());
    }
}

#[test]
fn ramification_is_multiplicative_in_towers() {
    let k = LocalField::qp(2, 40).unwrap();
    let l1 = adjoin_root(&k, &Poly::from_ints(&k, &[-5, 0, 1])).unwrap();
    let m = l1.top().clone();
    let g = Poly::new(&m, vec![m.from_int(-2), m.zero(), m.one()]);
    let l2 = adjoin_root(&m, &g).unwrap();
    let top = l2.top();
    assert_eq!(top.e(), l2.e_rel() * l1.e_rel());
    assert_eq!(top.f(), l2.f_rel() * l1.f_rel());
    assert_eq!((top.e(), top.f()), (2, 2));
    // norm-restriction composite is the degree power
    let x = l2.embed(&m.from_int(3)).unwrap();
    assert!(l2.norm(&x).unwrap().eq_approx(&m.from_int(9)));
    assert_eq!(top.tower().len(), 3);
}
