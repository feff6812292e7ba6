//! The formal group of a Weierstrass model: w(z), the group law and [p](z).

use num_rational::Ratio;
use serde::Serialize;

use super::series::{Series, Series2};
use super::weierstrass::WeierstrassCurve;
use crate::error::{Error, Result};
use crate::padic::{Poly, Segment};

/// w(z) = z^3 + a1 z^4 + ... with y = -1/w, x = z/w.
pub fn w_series(e: &WeierstrassCurve, n: usize) -> Series {
    let k = e.field();
    let z = Series::var(k, n);
    let z3 = z.pow(3);
    let mut w = Series::zero(k, n);
    for _ in 0..n {
        let w2 = w.mul(&w);
        w = z3
            .add(&z.mul(&w).scale(e.a1()))
            .add(&z.pow(2).mul(&w).scale(e.a2()))
            .add(&w2.scale(e.a3()))
            .add(&z.mul(&w2).scale(e.a4()))
            .add(&w2.mul(&w).scale(e.a6()));
    }
    w
}

/// The formal inverse i(z) = z / (a1 z + a3 w(z) - 1).
fn inverse_series(e: &WeierstrassCurve, w: &Series) -> Result<Series> {
    let k = e.field();
    let n = w.order();
    let z = Series::var(k, n);
    let den = z.scale(e.a1()).add(&w.scale(e.a3())).add(&Series::constant(&k.one().neg(), n));
    Ok(z.mul(&den.inv_unit()?))
}

/// F(z, g(z)) for a series g without constant term.
fn add_one_var(e: &WeierstrassCurve, w: &Series, a_coeffs: &Series, inv: &Series, g: &Series) -> Result<Series> {
    let k = e.field();
    let n = w.order();
    let z = Series::var(k, n);
    // lambda = sum_m A_m h_{m-1}(z, g) with h_j complete homogeneous of degree j
    let mut lam = Series::zero(k, n);
    let mut h = Series::constant(&k.one(), n);
    let mut gp = Series::constant(&k.one(), n);
    for m in 1..n {
        gp = gp.mul(g);
        h = h.mul(&z).add(&gp);
        let a = a_coeffs.coeff(m + 1);
        if !a.is_zero() {
            lam = lam.add(&h.scale(&a));
        }
    }
    combine(e, w, inv, &z, g, &lam)
}

fn combine(e: &WeierstrassCurve, w: &Series, inv: &Series, z1: &Series, z2: &Series, lam: &Series) -> Result<Series> {
    let k = e.field();
    let n = w.order();
    let nu = w.compose(z1).sub(&lam.mul(z1));
    let lam2 = lam.mul(lam);
    let num = lam
        .scale(e.a1())
        .add(&lam2.scale(e.a3()))
        .add(&nu.scale(e.a2()))
        .add(&lam.mul(&nu).scale(&e.a4().mul_int(2)))
        .add(&lam2.mul(&nu).scale(&e.a6().mul_int(3)));
    let den = Series::constant(&k.one(), n)
        .add(&lam.scale(e.a2()))
        .add(&lam2.scale(e.a4()))
        .add(&lam2.mul(lam).scale(e.a6()));
    let z3 = z1.neg().sub(z2).sub(&num.mul(&den.inv_unit()?));
    Ok(inv.compose(&z3))
}

/// [m](z) to order n.
pub fn mult_series(e: &WeierstrassCurve, m: u64, n: usize) -> Result<Series> {
    let w = w_series(e, n);
    let a_coeffs = w_series(e, n + 1);
    let inv = inverse_series(e, &w)?;
    let z = Series::var(e.field(), n);
    let mut acc = z.clone();
    for _ in 1..m {
        acc = add_one_var(e, &w, &a_coeffs, &inv, &acc)?;
    }
    Ok(acc)
}

/// The two-variable law F(X, Y) to total degree n.
pub fn formal_law(e: &WeierstrassCurve, n: usize) -> Result<Series2> {
    let k = e.field();
    let w = w_series(e, n);
    let a_coeffs = w_series(e, n + 1);
    let inv = inverse_series(e, &w)?;
    let x = Series2::x(k, n);
    let y = Series2::y(k, n);
    let mut lam = Series2::zero(k, n);
    let mut h = Series2::zero(k, n).add_const(&k.one());
    let mut yp = h.clone();
    for m in 1..n {
        yp = yp.mul(&y);
        h = h.mul(&x).add(&yp);
        let a = a_coeffs.coeff(m + 1);
        if !a.is_zero() {
            lam = lam.add(&h.scale(&a));
        }
    }
    let nu = x.substitute_into(&w).sub(&lam.mul(&x));
    let lam2 = lam.mul(&lam);
    let num = lam
        .scale(e.a1())
        .add(&lam2.scale(e.a3()))
        .add(&nu.scale(e.a2()))
        .add(&lam.mul(&nu).scale(&e.a4().mul_int(2)))
        .add(&lam2.mul(&nu).scale(&e.a6().mul_int(3)));
    let den = Series2::zero(k, n)
        .add_const(&k.one())
        .add(&lam.scale(e.a2()))
        .add(&lam2.scale(e.a4()))
        .add(&lam2.mul(&lam).scale(e.a6()));
    let z3 = x.neg().sub(&y).sub(&num.mul(&den.inv_unit()?));
    Ok(z3.substitute_into(&inv))
}

#[derive(Clone, Debug)]
pub struct FormalGroup {
    pub law: Series2,
    pub mult_by_p: Series,
    pub height: u32,
    /// Newton polygon of [p](X)/X up to the first unit coefficient
    pub torsion_polygon: Vec<Segment>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FormalGroupReport {
    pub height: u32,
    pub series_order: usize,
    pub torsion_polygon: Vec<Segment>,
}

impl FormalGroup {
    pub fn report(&self) -> FormalGroupReport {
        FormalGroupReport {
            height: self.height,
            series_order: self.mult_by_p.order(),
            torsion_polygon: self.torsion_polygon.clone(),
        }
    }
}

/// Height and the polygon of [p](X)/X truncated at its first unit coefficient.
pub fn height_and_polygon(mp: &Series, p: u64) -> Result<(u32, Vec<Segment>)> {
    let c = mp.coeffs();
    for h in 1..=2u32 {
        let idx = p.pow(h) as usize;
        if idx >= c.len() {
            return Err(Error::OrderTooLow(format!("need the coefficient of X^{idx}")));
        }
        if c[idx].valuation() == Some(0) {
            if c[1..idx].iter().any(|x| x.valuation() == Some(0)) {
                return Err(Error::OrderTooLow("unit coefficient before X^p^h".into()));
            }
            let poly = Poly::new(mp.coeffs()[0].field(), c[1..=idx].to_vec());
            return Ok((h, poly.newton_polygon()?));
        }
    }
    Err(Error::OrderTooLow("no unit coefficient of [p](X) at X^p or X^p^2".into()))
}

pub fn formal_group(e: &WeierstrassCurve, law_order: usize) -> Result<FormalGroup> {
    let p = e.field().p();
    let n = (p * p) as usize + 2;
    let mult_by_p = mult_series(e, p, n)?;
    let (height, torsion_polygon) = height_and_polygon(&mult_by_p, p)?;
    let law = formal_law(e, law_order)?;
    Ok(FormalGroup { law, mult_by_p, height, torsion_polygon })
}

/// The smallest valuation of a nonzero p-torsion point of the formal group, read from the polygon.
pub fn min_torsion_valuation(poly: &[Segment]) -> Option<Ratio<i64>> {
    poly.first().map(|s| s.slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::LocalField;

    #[test]
    fn law_axioms() {
        let k = LocalField::qp(5, 30).unwrap();
        let e = WeierstrassCurve::from_ints(&k, [1, 2, 3, 4, 6]).unwrap();
        let n = 7;
        let f = formal_law(&e, n).unwrap();
        for i in 0..n {
            for j in 0..n - i {
                let expect = if (i, j) == (1, 0) { k.one() } else { k.zero() };
                if j == 0 {
                    assert!(f.coeff(i, 0).eq_approx(&expect), "F(X,0) at {i}");
                }
                assert!(f.coeff(i, j).eq_approx(&f.coeff(j, i)));
            }
        }
        // [2](z) from the one-variable route agrees with F(z, z)
        let two = mult_series(&e, 2, n).unwrap();
        let diag = f.restrict(&Series::var(&k, n));
        for i in 0..n {
            assert!(two.coeff(i).eq_approx(&diag.coeff(i)));
        }
        // [3] = F([2], id)
        let three = mult_series(&e, 3, n).unwrap();
        let via = f.swap().restrict(&two);
        for i in 0..n {
            assert!(three.coeff(i).eq_approx(&via.coeff(i)), "coefficient {i}");
        }
        assert!(three.coeff(1).eq_approx(&k.from_int(3)));
    }

    #[test]
    fn heights() {
        let k5 = LocalField::qp(5, 30).unwrap();
        let e = WeierstrassCurve::from_ints(&k5, [0, 0, 0, -1, 0]).unwrap();
        let g = formal_group(&e, 4).unwrap();
        assert_eq!(g.height, 1);
        assert_eq!(g.torsion_polygon.iter().map(|s| s.length).sum::<usize>(), 4);
        let k3 = LocalField::qp(3, 30).unwrap();
        let e = WeierstrassCurve::from_ints(&k3, [0, 0, 0, 1, 0]).unwrap();
        let g = formal_group(&e, 4).unwrap();
        assert_eq!(g.height, 2);
        assert_eq!(g.torsion_polygon.iter().map(|s| s.length).sum::<usize>(), 8);
    }
}
