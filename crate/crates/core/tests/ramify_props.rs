use albker::padic::LocalField;
use albker::ramify::{
    extract_second_level, level_after_proot, level_after_proot_computed, psi_kummer_unit_raw, psi_tower_closed_form,
    PsiFunction,
};
use albker::units::Level;
use num_bigint::BigInt;
use num_rational::Ratio;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = (i64, i64, i64)> {
    (prop::sample::select(vec![2i64, 3, 5]), 1i64..6, 1i64..40).prop_map(|(p, e0, i)| {
        let top = p * e0;
        let mut i = 1 + (i - 1) % (top - 1);
        if i % p == 0 {
            i -= 1;
        }
        (p, e0 * (p - 1), i)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tower_composite_matches_closed_form((p, e_k, i) in params()) {
        let inner = psi_kummer_unit_raw(p, e_k, i).unwrap();
        let outer = psi_kummer_unit_raw(p, p * e_k, i).unwrap();
        let comp = PsiFunction::compose(&outer, &inner);
        prop_assert_eq!(&comp, &psi_tower_closed_form(p, e_k, i).unwrap());
        prop_assert_eq!(extract_second_level(&comp, &inner, p, e_k).unwrap(), i);
        prop_assert!(comp.well_formed(p));
        prop_assert_eq!(inner.breaks()[0] + i, Ratio::from_integer(p * e_k / (p - 1)));
    }

    #[test]
    fn composition_is_associative((p, e_k, i) in params(), j in 1i64..100, l in 1i64..100) {
        let f = psi_kummer_unit_raw(p, e_k, i).unwrap();
        let pick = |n: i64, e: i64| {
            let top = p * e / (p - 1);
            let mut n = 1 + (n - 1) % (top - 1);
            if n % p == 0 { n -= 1; }
            psi_kummer_unit_raw(p, e, n).unwrap()
        };
        let g = pick(j, p * e_k);
        let h = pick(l, p * p * e_k);
        let a = PsiFunction::compose(&h, &PsiFunction::compose(&g, &f));
        let b = PsiFunction::compose(&PsiFunction::compose(&h, &g), &f);
        prop_assert_eq!(a, b);
    }
}

#[test]
fn level_is_preserved_by_pth_roots() {
    let k = LocalField::new(2, 1, Some(&[2, 2, 1].map(BigInt::from)), 40).unwrap();
    for i in [1i64, 3] {
        assert_eq!(level_after_proot(&k, i).unwrap(), i);
        let u = k.one().add(&k.uniformizer().pow(i).unwrap());
        assert_eq!(level_after_proot_computed(&k, &u).unwrap(), Level::Unit(i as u64));
    }
    assert!(level_after_proot(&k, 4).is_err());
    assert!(level_after_proot(&LocalField::qp(2, 20).unwrap(), 1).is_err());
}
