//! Reduction type of a minimal model, read off point counts over the residue field.

use serde::Serialize;

use super::weierstrass::WeierstrassCurve;
use crate::error::{Error, Result};
use crate::padic::{Res, ResidueField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ReductionType {
    GoodOrdinary,
    GoodSupersingular,
    SplitMultiplicative,
}

impl ReductionType {
    pub fn is_good(&self) -> bool {
        !matches!(self, ReductionType::SplitMultiplicative)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionData {
    #[serde(rename = "type")]
    pub kind: ReductionType,
    /// q + 1 - |E(k)| for good reduction
    pub a_q: Option<i64>,
    pub point_count: u64,
    pub point_count_quadratic: Option<u64>,
    pub nonsingular_count: Option<u64>,
    pub j_valuation: Option<i64>,
    pub discriminant_valuation: i64,
    pub minimalized: bool,
}

const COUNT_CAP: u64 = 1 << 20;

/// Residue-field coefficients of an integral model.
fn reduced(e: &WeierstrassCurve) -> Result<[Res; 5]> {
    let c: Vec<Res> = e.coeffs().iter().map(|a| a.residue()).collect::<Result<_>>()?;
    Ok([c[0].clone(), c[1].clone(), c[2].clone(), c[3].clone(), c[4].clone()])
}

/// |E(F)| including the point at infinity, by enumerating x and y.
pub fn count_points(kk: &ResidueField, a: &[Res; 5]) -> Result<u64> {
    let q = kk.order();
    if q.saturating_mul(q) > COUNT_CAP {
        return Err(Error::CapExceeded("residue field too large for point counting".into()));
    }
    let elems: Vec<Res> = kk.elements()?.collect();
    let mut n = 1;
    for x in &elems {
        let x2 = kk.mul(x, x);
        let rhs = kk.add(&kk.add(&kk.mul(&x2, x), &kk.mul(&a[1], &x2)), &kk.add(&kk.mul(&a[3], x), &a[4]));
        let b = kk.add(&kk.mul(&a[0], x), &a[2]);
        for y in &elems {
            let lhs = kk.add(&kk.mul(y, y), &kk.mul(&b, y));
            if kk.sub(&lhs, &rhs).iter().all(|&c| c == 0) {
                n += 1;
            }
        }
    }
    Ok(n)
}

/// The residue field of degree 2f and the images of the coefficients in it.
fn quadratic_lift(kr: &ResidueField, a: &[Res; 5]) -> Result<(ResidueField, [Res; 5])> {
    let k2 = ResidueField::new(kr.p(), 2 * kr.degree());
    let mk: Vec<Res> = kr.modulus().iter().map(|&c| k2.from_int(c as i64)).collect();
    let w = k2.poly_roots(&mk)?.into_iter().next().ok_or_else(|| Error::Unsupported("residue embedding".into()))?;
    let map = |x: &Res| -> Res {
        let mut acc = k2.zero();
        let mut pw = k2.one();
        for &c in x.iter().take(kr.degree()) {
            acc = k2.add(&acc, &k2.scale(&pw, c));
            pw = k2.mul(&pw, &w);
        }
        acc
    };
    let b = [map(&a[0]), map(&a[1]), map(&a[2]), map(&a[3]), map(&a[4])];
    Ok((k2, b))
}

pub fn classify_reduction(e: &WeierstrassCurve) -> Result<(ReductionData, WeierstrassCurve)> {
    let (m, minimalized) = e.minimal_model(1 << 18)?;
    let k = m.field();
    let kr = k.residue_field();
    let q = kr.order() as i64;
    let p = k.p() as i64;
    let vd = m.discriminant().val_checked("discriminant")?;
    let a = reduced(&m)?;
    let count = count_points(kr, &a)?;
    if vd == 0 {
        let a_q = q + 1 - count as i64;
        let ss = a_q.rem_euclid(p) == 0;
        let mut count2 = None;
        if p <= 3 {
            let (k2, b) = quadratic_lift(kr, &a)?;
            let c2 = count_points(&k2, &b)? as i64;
            if c2 != q * q + 1 - (a_q * a_q - 2 * q) {
                return Err(Error::Unsupported("point counts over k and its quadratic extension disagree".into()));
            }
            // in characteristic 2 and 3 the only supersingular j-invariant is 0
            let jbar_zero = m.c4().valuation().map_or(true, |v| v > 0);
            if jbar_zero != ss {
                return Err(Error::Unsupported("supersingularity tests disagree".into()));
            }
            count2 = Some(c2 as u64);
        }
        let j_valuation = m.j_invariant().ok().and_then(|j| j.valuation());
        let kind = if ss { ReductionType::GoodSupersingular } else { ReductionType::GoodOrdinary };
        let data = ReductionData {
            kind,
            a_q: Some(a_q),
            point_count: count,
            point_count_quadratic: count2,
            nonsingular_count: None,
            j_valuation,
            discriminant_valuation: vd,
            minimalized,
        };
        return Ok((data, m));
    }
    let c4_unit = m.c4().valuation() == Some(0);
    if !c4_unit {
        return Err(Error::UnsupportedReduction("additive reduction".into()));
    }
    // one node among the affine points
    let ns = count - 1;
    if ns as i64 != q - 1 {
        return Err(Error::UnsupportedReduction("non-split multiplicative reduction".into()));
    }
    let data = ReductionData {
        kind: ReductionType::SplitMultiplicative,
        a_q: None,
        point_count: count,
        point_count_quadratic: None,
        nonsingular_count: Some(ns),
        j_valuation: Some(-vd),
        discriminant_valuation: vd,
        minimalized,
    };
    Ok((data, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::LocalField;

    #[test]
    fn small_examples() {
        let k3 = LocalField::qp(3, 30).unwrap();
        let e = WeierstrassCurve::from_ints(&k3, [0, 0, 0, 1, 0]).unwrap();
        let (d, _) = classify_reduction(&e).unwrap();
        assert_eq!(d.kind, ReductionType::GoodSupersingular);
        assert_eq!(d.point_count, 4);
        assert_eq!(d.a_q, Some(0));

        let k5 = LocalField::qp(5, 30).unwrap();
        let e = WeierstrassCurve::from_ints(&k5, [0, 0, 0, -1, 0]).unwrap();
        let (d, _) = classify_reduction(&e).unwrap();
        assert_eq!(d.kind, ReductionType::GoodOrdinary);
        assert_eq!(d.point_count, 8);
        assert_eq!(d.a_q, Some(-2));

        let k2 = LocalField::qp(2, 30).unwrap();
        let e = WeierstrassCurve::from_ints(&k2, [0, 0, 1, 0, 0]).unwrap();
        assert_eq!(classify_reduction(&e).unwrap().0.kind, ReductionType::GoodSupersingular);
        let e = WeierstrassCurve::from_ints(&k2, [1, 0, 0, 1, 0]).unwrap();
        assert_eq!(classify_reduction(&e).unwrap().0.kind, ReductionType::GoodOrdinary);
    }

    #[test]
    fn multiplicative_cases() {
        let k = LocalField::qp(5, 30).unwrap();
        // y^2 = x^3 + x^2 + 5: node at the origin with tangents y = +-x
        let e = WeierstrassCurve::from_ints(&k, [0, 1, 0, 0, 5]).unwrap();
        let (d, _) = classify_reduction(&e).unwrap();
        assert_eq!(d.kind, ReductionType::SplitMultiplicative);
        assert_eq!(d.nonsingular_count, Some(4));
        // y^2 = x^3 + 2x^2 + 5: tangents y^2 = 2x^2, 2 is not a square mod 5
        let e = WeierstrassCurve::from_ints(&k, [0, 2, 0, 0, 5]).unwrap();
        assert!(matches!(classify_reduction(&e), Err(Error::UnsupportedReduction(_))));
        // cusp
        let e = WeierstrassCurve::from_ints(&k, [0, 0, 0, 5, 5]).unwrap();
        assert!(matches!(classify_reduction(&e), Err(Error::UnsupportedReduction(_))));
    }
}
