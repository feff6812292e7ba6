use albker::padic::{FieldElement, LocalField};
use albker::symbols::{build_gram, gram_from_steinberg};
use albker::units::{is_norm, Level};
use num_bigint::BigInt;
use proptest::prelude::*;
use std::sync::OnceLock;

fn eis(p: u64, f: usize, c: &[i64], cap: i64) -> LocalField {
    LocalField::new(p, f, Some(&c.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>()), cap).unwrap()
}

fn fields() -> &'static Vec<LocalField> {
    static F: OnceLock<Vec<LocalField>> = OnceLock::new();
    F.get_or_init(|| {
        vec![
            LocalField::qp(2, 40).unwrap(),
            eis(3, 1, &[3, 3, 1], 40),
            eis(2, 1, &[-2, 0, 1], 40),
            LocalField::new(2, 2, None, 30).unwrap(),
            eis(5, 1, &[5, 10, 10, 5, 1], 40),
            eis(2, 2, &[2, 0, 0, 1], 40),
        ]
    })
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

#[test]
fn perfect_and_skew() {
    for k in fields() {
        let g = build_gram(k).unwrap();
        assert_eq!(g.rank(), g.dim(), "{}", k.description());
        let m = g.matrix();
        let p = k.p();
        for i in 0..g.dim() {
            for j in 0..g.dim() {
                assert_eq!((m[i][j] + m[j][i]) % p, 0);
            }
        }
    }
}

#[test]
fn norm_route_matches_steinberg_route() {
    for k in fields() {
        let g = build_gram(k).unwrap();
        let s = gram_from_steinberg(g.units(), 100_000).unwrap();
        let sm: Vec<Vec<u64>> = (0..g.dim()).map(|i| s.row(i)).collect();
        assert_eq!(g.matrix(), sm, "{}", k.description());
    }
}

#[test]
fn wild_jumps_are_orthogonal_to_high_levels() {
    for k in fields() {
        let g = build_gram(k).unwrap();
        let u = g.units();
        let top = u.top_level().unwrap();
        for (a, ba) in u.basis().iter().enumerate() {
            let Level::Unit(i) = ba.level else { continue };
            if i % k.p() == 0 {
                continue;
            }
            for (b, bb) in u.basis().iter().enumerate() {
                if let Level::Unit(j) = bb.level {
                    if j > top - i {
                        assert!(g.entry(a, b).is_zero(), "levels {i} {j}");
                    }
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn symbol_vanishes_iff_norm(fi in 0usize..6, a in prop::collection::vec(-300i64..300, 8), sa in -2i64..3,
                                b in prop::collection::vec(-300i64..300, 8), sb in -2i64..3) {
        let k = &fields()[fi];
        let g = build_gram(k).unwrap();
        let x = element(k, &a, sa);
        let y = element(k, &b, sb);
        let v = g.gp(&x, &y).unwrap();
        prop_assert_eq!(v.is_zero(), is_norm(k, &y, &x).unwrap());
        let xy = x.mul(&y);
        prop_assert_eq!(g.gp(&xy, &y).unwrap(), g.gp(&x, &y).unwrap().add(&g.gp(&y, &y).unwrap()));
        let one_minus = k.one().sub(&x);
        if one_minus.valuation().is_some() {
            prop_assert!(g.gp(&x, &one_minus).unwrap().is_zero());
        }
        prop_assert!(g.gp(&x, &x.neg()).unwrap().is_zero());
    }
}
