//! Division polynomials, rational torsion, and the fields generated by p-power torsion.

use serde::Serialize;

use super::weierstrass::{Point, WeierstrassCurve};
use crate::error::{Error, Result};
use crate::padic::poly::{deep_split, is_regular_irreducible, residual_polynomial};
use crate::padic::{adjoin_root, unramified_extension, Extension, FieldElement, LocalField, Poly};

/// g_0 .. g_n, where psi_n = g_n for odd n and psi_n = psi_2 g_n for even n.
pub fn division_polys(e: &WeierstrassCurve, n: usize) -> Vec<Poly> {
    let k = e.field();
    let (b2, b4, b6, b8) = (e.b2(), e.b4(), e.b6(), e.b8());
    let beta = e.two_division();
    let beta2 = beta.mul(&beta);
    let mut g = vec![Poly::new(k, vec![]), Poly::constant(k.one()), Poly::constant(k.one())];
    let g3 = Poly::new(k, vec![b8.clone(), b6.mul_int(3), b4.mul_int(3), b2.clone(), k.from_int(3)]);
    let g4 = Poly::new(
        k,
        vec![
            b4.mul(&b8).sub(&b6.square()),
            b2.mul(&b8).sub(&b4.mul(&b6)),
            b8.mul_int(10),
            b6.mul_int(10),
            b4.mul_int(5),
            b2.clone(),
            k.from_int(2),
        ],
    );
    g.push(g3);
    g.push(g4);
    for idx in 5..=n {
        let m = idx / 2;
        let gm = |i: usize| g[i].clone();
        let next = if idx % 2 == 1 {
            let a = gm(m + 2).mul(&gm(m).pow(3));
            let b = gm(m - 1).mul(&gm(m + 1).pow(3));
            if m % 2 == 0 {
                beta2.mul(&a).sub(&b)
            } else {
                a.sub(&beta2.mul(&b))
            }
        } else {
            let inner = gm(m + 2).mul(&gm(m - 1).pow(2)).sub(&gm(m - 2).mul(&gm(m + 1).pow(2)));
            gm(m).mul(&inner)
        };
        g.push(next);
    }
    g.truncate(n + 1);
    g
}

/// (num, den) with x([m]Q) = num(x) / den(x).
pub fn multiplication_x(e: &WeierstrassCurve, m: usize) -> (Poly, Poly) {
    let k = e.field();
    if m == 1 {
        return (Poly::x(k), Poly::constant(k.one()));
    }
    let g = division_polys(e, m + 1);
    let beta = e.two_division();
    let den = if m % 2 == 0 { g[m].pow(2).mul(&beta) } else { g[m].pow(2) };
    let cross = g[m - 1].mul(&g[m + 1]);
    let cross = if m % 2 == 1 { cross.mul(&beta) } else { cross };
    (Poly::x(k).mul(&den).sub(&cross), den)
}

/// Polynomial whose roots are the x-coordinates of the nonzero points of E[p].
pub fn p_torsion_x(e: &WeierstrassCurve, p: u64) -> Poly {
    if p == 2 {
        e.two_division()
    } else {
        division_polys(e, p as usize).pop().unwrap()
    }
}

/// Polynomial whose roots are the x-coordinates of the points Q with [p]Q = +-T.
pub fn division_point_x(e: &WeierstrassCurve, p: u64, t: &Point) -> Result<Poly> {
    let order_two = p == 2 && !t.is_zero() && e.mul(2, t)?.is_zero();
    halving_x(e, p, t, order_two)
}

fn halving_x(e: &WeierstrassCurve, p: u64, t: &Point, order_two: bool) -> Result<Poly> {
    let (num, den) = multiplication_x(e, p as usize);
    match t {
        Point::Zero => Ok(p_torsion_x(e, p)),
        Point::Affine(xt, _) => {
            let f = num.sub(&den.scale(xt));
            // for p = 2 and T of order 2 every x-coordinate occurs twice
            if order_two {
                return monic_sqrt(&f.monic()?)
                    .ok_or_else(|| Error::PrecisionExhausted("halving polynomial is not a square to precision".into()));
            }
            Ok(f)
        }
    }
}

/// h monic with h^2 = f, for f monic of even degree.
fn monic_sqrt(f: &Poly) -> Option<Poly> {
    let k = f.field();
    let n = f.deg();
    if n % 2 == 1 {
        return None;
    }
    let m = n / 2;
    let mut h = vec![k.zero(); m + 1];
    h[m] = k.one();
    let two_inv = k.from_int(2).inv().ok()?;
    for d in 1..=m {
        let mut s = f.coeff(n - d);
        for i in (m - d + 1)..m {
            let j = n - d - i;
            if j > m - d && j < m + 1 && j != m {
                s = s.sub(&h[i].mul(&h[j]));
            }
        }
        h[m - d] = s.mul(&two_inv);
    }
    let h = Poly::new(k, h);
    let sq = h.mul(&h);
    (0..=n).all(|i| sq.coeff(i).eq_approx(&f.coeff(i))).then_some(h)
}

/// The rational points with x among the roots of f.
fn points_over_roots(e: &WeierstrassCurve, f: &Poly) -> Result<Vec<Point>> {
    let mut out = Vec::new();
    for x in f.roots()? {
        out.extend(e.lift_x(&x)?);
    }
    Ok(out)
}

/// E(K)[p], including the identity.
pub fn rational_p_torsion(e: &WeierstrassCurve) -> Result<Vec<Point>> {
    let p = e.field().p();
    let mut pts = vec![Point::Zero];
    for q in points_over_roots(e, &p_torsion_x(e, p))? {
        if e.mul(p as i64, &q)?.is_zero() {
            pts.push(q);
        }
    }
    Ok(pts)
}

/// A basis of E[p] from a full list of its points.
pub fn basis_of(e: &WeierstrassCurve, pts: &[Point], order: u64) -> Result<Option<(Point, Point)>> {
    let Some(t1) = pts.iter().find(|q| !q.is_zero()).cloned() else { return Ok(None) };
    let mut multiples = vec![Point::Zero];
    let mut acc = Point::Zero;
    for _ in 1..order {
        acc = e.add(&acc, &t1)?;
        multiples.push(acc.clone());
    }
    let t2 = pts.iter().find(|q| !multiples.iter().any(|m| m.eq_approx(q))).cloned();
    Ok(t2.map(|t2| (t1, t2)))
}

/// A rational Q with [p]Q = t, if one exists.
pub fn rational_division_point(e: &WeierstrassCurve, t: &Point) -> Result<Option<Point>> {
    let p = e.field().p();
    division_point_from(e, t, division_point_x(e, p, t)?)
}

fn division_point_from(e: &WeierstrassCurve, t: &Point, f: Poly) -> Result<Option<Point>> {
    let p = e.field().p();
    for q in points_over_roots(e, &f)? {
        if e.mul(p as i64, &q)?.eq_approx(t) {
            return Ok(Some(q));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug)]
pub struct RationalTorsion {
    /// largest n <= cap with E[p^n] in E(K)
    pub n: u32,
    pub capped: bool,
    /// a basis of E[p^n](K) when n >= 1
    pub basis: Option<(Point, Point)>,
    /// E(K)[p] including the identity
    pub p_torsion: Vec<Point>,
}

pub fn rationality_level(e: &WeierstrassCurve, n_cap: u32) -> Result<RationalTorsion> {
    if n_cap == 0 {
        return Err(Error::Unsupported("n_cap must be at least 1".into()));
    }
    let p = e.field().p();
    let pts = rational_p_torsion(e)?;
    let full = pts.len() as u64 == p * p;
    let Some(mut basis) = (if full { basis_of(e, &pts, p)? } else { None }) else {
        return Ok(RationalTorsion { n: 0, capped: false, basis: None, p_torsion: pts });
    };
    let mut n = 1;
    while n < n_cap {
        let q1 = rational_division_point(e, &basis.0)?;
        let q2 = rational_division_point(e, &basis.1)?;
        match (q1, q2) {
            (Some(a), Some(b)) => {
                basis = (a, b);
                n += 1;
            }
            _ => return Ok(RationalTorsion { n, capped: false, basis: Some(basis), p_torsion: pts }),
        }
    }
    Ok(RationalTorsion { n, capped: true, basis: Some(basis), p_torsion: pts })
}

/// A field reached from K by a chain of simple extensions.
#[derive(Clone, Debug)]
pub struct Tower {
    pub base: LocalField,
    pub steps: Vec<Extension>,
}

impl Tower {
    pub fn new(k: &LocalField) -> Self {
        Tower { base: k.clone(), steps: Vec::new() }
    }
    pub fn top(&self) -> &LocalField {
        self.steps.last().map_or(&self.base, |s| s.top())
    }
    pub fn degree(&self) -> usize {
        self.top().degree() / self.base.degree()
    }
    pub fn e(&self) -> usize {
        self.top().e() / self.base.e()
    }
    pub fn f(&self) -> usize {
        self.top().f() / self.base.f()
    }
    pub fn embed(&self, x: &FieldElement) -> Result<FieldElement> {
        let mut y = x.clone();
        for s in &self.steps {
            y = s.embed(&y)?;
        }
        Ok(y)
    }
    pub fn embed_from(&self, level: usize, x: &FieldElement) -> Result<FieldElement> {
        let mut y = x.clone();
        for s in &self.steps[level..] {
            y = s.embed(&y)?;
        }
        Ok(y)
    }
    pub fn push(&mut self, ext: Extension) {
        self.steps.push(ext);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TorsionFieldProfile {
    pub e: usize,
    pub f: usize,
    pub degree: usize,
    pub wild: bool,
}

fn embed_curve(e: &WeierstrassCurve, ext: &Extension) -> Result<WeierstrassCurve> {
    e.base_change(ext)
}

fn embed_point(e: &WeierstrassCurve, ext: &Extension, p: &Point) -> Result<Point> {
    e.map_point(ext, p)
}

/// Extend until every root of each polynomial, with its y-coordinates, is rational.
/// Polynomials and points are carried along to the new field.
pub fn split_x_polys(
    tower: &mut Tower,
    e: &mut WeierstrassCurve,
    polys: &mut Vec<Poly>,
    carried: &mut Vec<Point>,
    degree_cap: usize,
) -> Result<()> {
    'outer: loop {
        for f in polys.iter() {
            let need = first_obstruction(e, f)?;
            if let Some(g) = need {
                let ext = match residue_extension_needed(&g)? {
                    Some(d) => {
                        if tower.degree() * d > degree_cap {
                            return Err(Error::CapExceeded(format!("torsion field degree exceeds {degree_cap}")));
                        }
                        unramified_extension(e.field(), d)?
                    }
                    None => {
                        if tower.degree() * g.deg() > degree_cap {
                            return Err(Error::CapExceeded(format!("torsion field degree exceeds {degree_cap}")));
                        }
                        adjoin_root(e.field(), &g)?
                    }
                };
                *polys = polys.iter().map(|f| ext.embed_poly(f)).collect::<Result<_>>()?;
                *carried = carried.iter().map(|q| embed_point(e, &ext, q)).collect::<Result<_>>()?;
                *e = embed_curve(e, &ext)?;
                tower.push(ext);
                continue 'outer;
            }
        }
        return Ok(());
    }
}

/// Degree of the residue extension to adjoin first when the residual polynomial of g is a
/// proper power of an irreducible of degree > 1.
fn residue_extension_needed(g: &Poly) -> Result<Option<usize>> {
    if g.deg() <= 1 || is_regular_irreducible(g)? {
        return Ok(None);
    }
    let r = residual_polynomial(g)?;
    let fac = g.field().residue_field().factor(&r.poly)?;
    Ok(match fac.as_slice() {
        [(phi, mult)] if *mult > 1 && phi.len() > 2 => Some(phi.len() - 1),
        _ => None,
    })
}

/// An irreducible polynomial to adjoin next, or None when f splits with rational points.
fn first_obstruction(e: &WeierstrassCurve, f: &Poly) -> Result<Option<Poly>> {
    let k = e.field();
    for g in deep_split(f)? {
        let roots = g.roots()?;
        if roots.len() < g.deg() {
            let mut rest = g.clone();
            for r in &roots {
                let lin = Poly::new(k, vec![r.neg(), k.one()]);
                rest = rest.divrem(&lin)?.0;
            }
            if roots.is_empty() {
                return Ok(Some(g));
            }
            return Ok(Some(rest));
        }
        for x in roots {
            if e.lift_x(&x)?.is_empty() {
                let b = e.a1().mul(&x).add(e.a3());
                return Ok(Some(Poly::new(k, vec![e.rhs(&x).neg(), b, k.one()])));
            }
        }
    }
    Ok(None)
}

/// The tower K(E[p^m]) / K, built by splitting E[p] and then p-division points of a basis.
pub fn torsion_tower(e: &WeierstrassCurve, m: u32, degree_cap: usize) -> Result<(Tower, WeierstrassCurve, Option<(Point, Point)>)> {
    let k = e.field();
    let p = k.p();
    let mut tower = Tower::new(k);
    let mut cur = e.clone();
    if m == 0 {
        return Ok((tower, cur, None));
    }
    let mut polys = vec![p_torsion_x(&cur, p)];
    let mut carried = Vec::new();
    split_x_polys(&mut tower, &mut cur, &mut polys, &mut carried, degree_cap)?;
    let pts = rational_p_torsion(&cur)?;
    let mut basis = basis_of(&cur, &pts, p)?.ok_or_else(|| Error::PrecisionExhausted("E[p] did not split".into()))?;
    for level in 1..m {
        // the basis has exact order p before the first division
        let order_two = p == 2 && level == 1;
        let mut polys = vec![halving_x(&cur, p, &basis.0, order_two)?, halving_x(&cur, p, &basis.1, order_two)?];
        let mut carried = vec![basis.0.clone(), basis.1.clone()];
        split_x_polys(&mut tower, &mut cur, &mut polys, &mut carried, degree_cap)?;
        let b0 = division_point_from(&cur, &carried[0], halving_x(&cur, p, &carried[0], order_two)?)?;
        let b1 = division_point_from(&cur, &carried[1], halving_x(&cur, p, &carried[1], order_two)?)?;
        match (b0, b1) {
            (Some(a), Some(b)) => basis = (a, b),
            _ => return Err(Error::PrecisionExhausted("division points did not become rational".into())),
        }
    }
    Ok((tower, cur, Some(basis)))
}

pub fn torsion_field_profile(e: &WeierstrassCurve, m: u32, degree_cap: usize) -> Result<TorsionFieldProfile> {
    let (tower, _, _) = torsion_tower(e, m, degree_cap)?;
    let p = e.field().p() as usize;
    Ok(TorsionFieldProfile { e: tower.e(), f: tower.f(), degree: tower.degree(), wild: tower.e() % p == 0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_polys_vanish_on_torsion() {
        let k = LocalField::qp(7, 30).unwrap();
        let e = WeierstrassCurve::from_ints(&k, [1, -1, 1, 2, 3]).unwrap();
        let g = division_polys(&e, 8);
        assert_eq!(g[3].deg(), 4);
        assert_eq!(g[4].deg(), 6);
        assert_eq!(g[5].deg(), 12);
        assert_eq!(g[6].deg(), 16);
        assert_eq!(g[7].deg(), 24);
        assert_eq!(g[8].deg(), 30);
        // x([m]Q) from the division polynomials matches the group law
        let pts = e.lift_x(&k.from_int(1)).unwrap();
        let q = pts.first().cloned().or_else(|| e.lift_x(&k.from_int(2)).unwrap().first().cloned()).unwrap();
        for m in 2..6 {
            let (num, den) = multiplication_x(&e, m);
            let x = q.x().unwrap();
            let via = num.eval(x).div(&den.eval(x)).unwrap();
            let direct = e.mul(m as i64, &q).unwrap();
            assert!(via.eq_approx(direct.x().unwrap()), "m = {m}");
        }
    }

    #[test]
    fn rationality_examples() {
        let k = LocalField::qp(17, 30).unwrap();
        let e = WeierstrassCurve::from_ints(&k, [0, 0, 0, -1, 0]).unwrap();
        // p = 17 is the residue characteristic here; use the Q_5 and Q_2 examples for p-torsion
        assert_eq!(rationality_level(&e, 2).unwrap().n, 0);
        let k5 = LocalField::qp(5, 30).unwrap();
        let e = WeierstrassCurve::from_ints(&k5, [0, 0, 0, -1, 0]).unwrap();
        assert_eq!(rationality_level(&e, 2).unwrap().n, 0);
        let k2 = LocalField::qp(2, 40).unwrap();
        let e = WeierstrassCurve::from_ints(&k2, [1, 0, 0, 1, 0]).unwrap();
        let r = rationality_level(&e, 3).unwrap();
        assert_eq!(r.n, 1);
        assert_eq!(r.p_torsion.len(), 4);
    }

    #[test]
    fn torsion_fields_over_q2() {
        let k = LocalField::qp(2, 40).unwrap();
        // Serre-Tate class 5: K(E[2]) is the unramified quadratic extension
        let e = WeierstrassCurve::from_ints(&k, [1, 0, 0, 0, -5]).unwrap();
        let pr = torsion_field_profile(&e, 1, 64).unwrap();
        assert_eq!((pr.e, pr.f, pr.wild), (1, 2, false));
        let e = WeierstrassCurve::from_ints(&k, [1, 0, 0, 0, -3]).unwrap();
        let pr = torsion_field_profile(&e, 1, 64).unwrap();
        assert_eq!((pr.e, pr.f, pr.wild), (2, 1, true));
        let e = WeierstrassCurve::from_ints(&k, [1, 0, 0, 1, 0]).unwrap();
        assert_eq!(torsion_field_profile(&e, 1, 64).unwrap().degree, 1);
        let pr = torsion_field_profile(&e, 2, 64).unwrap();
        assert!(pr.wild);
    }
}
