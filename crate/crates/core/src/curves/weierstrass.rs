//! Weierstrass models over a local field and their group law.

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::padic::{Extension, FieldElement, LocalField, Poly};

#[derive(Clone, Debug)]
pub enum Point {
    Zero,
    Affine(FieldElement, FieldElement),
}

impl Point {
    pub fn is_zero(&self) -> bool {
        matches!(self, Point::Zero)
    }
    pub fn x(&self) -> Option<&FieldElement> {
        match self {
            Point::Zero => None,
            Point::Affine(x, _) => Some(x),
        }
    }
    pub fn y(&self) -> Option<&FieldElement> {
        match self {
            Point::Zero => None,
            Point::Affine(_, y) => Some(y),
        }
    }
    pub fn eq_approx(&self, o: &Point) -> bool {
        match (self, o) {
            (Point::Zero, Point::Zero) => true,
            (Point::Affine(x1, y1), Point::Affine(x2, y2)) => x1.eq_approx(x2) && y1.eq_approx(y2),
            _ => false,
        }
    }
    /// The formal-group parameter z = -x/y.
    pub fn z(&self) -> Result<FieldElement> {
        match self {
            Point::Zero => Err(Error::Unsupported("z of the identity".into())),
            Point::Affine(x, y) => x.neg().div(y),
        }
    }
}

#[derive(Clone, Debug)]
pub struct WeierstrassCurve {
    field: LocalField,
    a: [FieldElement; 5],
}

fn all_integral(a: &[FieldElement]) -> bool {
    a.iter().all(|c| c.valuation().map_or(c.val_or_prec() >= 0, |v| v >= 0))
}

impl WeierstrassCurve {
    /// y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 with integral coefficients.
    pub fn new(k: &LocalField, a: [FieldElement; 5]) -> Result<Self> {
        if a.iter().any(|c| c.field() != k) {
            return Err(Error::FieldMismatch);
        }
        if !all_integral(&a) {
            return Err(Error::NotIntegral("Weierstrass coefficients must be integral".into()));
        }
        let e = WeierstrassCurve { field: k.clone(), a };
        if e.discriminant().is_zero() {
            return Err(Error::Singular);
        }
        Ok(e)
    }

    pub fn from_ints(k: &LocalField, a: [i64; 5]) -> Result<Self> {
        WeierstrassCurve::new(k, a.map(|c| k.from_int(c)))
    }

    pub fn from_bigints(k: &LocalField, a: &[BigInt; 5]) -> Result<Self> {
        WeierstrassCurve::new(k, std::array::from_fn(|i| k.from_bigint(&a[i])))
    }

    pub fn field(&self) -> &LocalField {
        &self.field
    }
    pub fn coeffs(&self) -> &[FieldElement; 5] {
        &self.a
    }
    pub fn a1(&self) -> &FieldElement {
        &self.a[0]
    }
    pub fn a2(&self) -> &FieldElement {
        &self.a[1]
    }
    pub fn a3(&self) -> &FieldElement {
        &self.a[2]
    }
    pub fn a4(&self) -> &FieldElement {
        &self.a[3]
    }
    pub fn a6(&self) -> &FieldElement {
        &self.a[4]
    }

    pub fn b2(&self) -> FieldElement {
        self.a1().square().add(&self.a2().mul_int(4))
    }
    pub fn b4(&self) -> FieldElement {
        self.a1().mul(self.a3()).add(&self.a4().mul_int(2))
    }
    pub fn b6(&self) -> FieldElement {
        self.a3().square().add(&self.a6().mul_int(4))
    }
    pub fn b8(&self) -> FieldElement {
        let [a1, a2, a3, a4, a6] = &self.a;
        a1.square()
            .mul(a6)
            .add(&a2.mul(a6).mul_int(4))
            .sub(&a1.mul(a3).mul(a4))
            .add(&a2.mul(&a3.square()))
            .sub(&a4.square())
    }
    pub fn c4(&self) -> FieldElement {
        self.b2().square().sub(&self.b4().mul_int(24))
    }
    pub fn c6(&self) -> FieldElement {
        let b2 = self.b2();
        b2.pow_u(3).neg().add(&b2.mul(&self.b4()).mul_int(36)).sub(&self.b6().mul_int(216))
    }
    pub fn discriminant(&self) -> FieldElement {
        let (b2, b4, b6, b8) = (self.b2(), self.b4(), self.b6(), self.b8());
        b2.square()
            .mul(&b8)
            .neg()
            .sub(&b4.pow_u(3).mul_int(8))
            .sub(&b6.square().mul_int(27))
            .add(&b2.mul(&b4).mul(&b6).mul_int(9))
    }
    pub fn j_invariant(&self) -> Result<FieldElement> {
        self.c4().pow_u(3).div(&self.discriminant())
    }

    /// 4x^3 + b2 x^2 + 2 b4 x + b6, whose roots are the x-coordinates of the points of order 2.
    pub fn two_division(&self) -> Poly {
        Poly::new(&self.field, vec![self.b6(), self.b4().mul_int(2), self.b2(), self.field.from_int(4)])
    }

    /// x^3 + a2 x^2 + a4 x + a6.
    pub fn rhs(&self, x: &FieldElement) -> FieldElement {
        x.pow_u(3).add(&self.a2().mul(&x.square())).add(&self.a4().mul(x)).add(self.a6())
    }

    pub fn base_change(&self, ext: &Extension) -> Result<WeierstrassCurve> {
        let a = [0, 1, 2, 3, 4].map(|i| ext.embed(&self.a[i]));
        let a: Vec<FieldElement> = a.into_iter().collect::<Result<_>>()?;
        WeierstrassCurve::new(ext.top(), [a[0].clone(), a[1].clone(), a[2].clone(), a[3].clone(), a[4].clone()])
    }

    pub fn map_point(&self, ext: &Extension, p: &Point) -> Result<Point> {
        Ok(match p {
            Point::Zero => Point::Zero,
            Point::Affine(x, y) => Point::Affine(ext.embed(x)?, ext.embed(y)?),
        })
    }

    pub fn contains(&self, p: &Point) -> bool {
        match p {
            Point::Zero => true,
            Point::Affine(x, y) => {
                let lhs = y.square().add(&self.a1().mul(x).mul(y)).add(&self.a3().mul(y));
                lhs.eq_approx(&self.rhs(x))
            }
        }
    }

    pub fn neg(&self, p: &Point) -> Point {
        match p {
            Point::Zero => Point::Zero,
            Point::Affine(x, y) => Point::Affine(x.clone(), y.neg().sub(&self.a1().mul(x)).sub(self.a3())),
        }
    }

    fn chord(&self, x1: &FieldElement, lam: &FieldElement, nu: &FieldElement, x2: &FieldElement) -> Point {
        let x3 = lam.square().add(&self.a1().mul(lam)).sub(self.a2()).sub(x1).sub(x2);
        let y3 = lam.add(self.a1()).mul(&x3).neg().sub(nu).sub(self.a3());
        Point::Affine(x3, y3)
    }

    /// Slope and intercept of the line through p and q (tangent when equal); None for a vertical line.
    pub fn line(&self, p: &Point, q: &Point) -> Result<Option<(FieldElement, FieldElement)>> {
        let (Point::Affine(x1, y1), Point::Affine(x2, y2)) = (p, q) else {
            return Ok(None);
        };
        if x1.eq_approx(x2) {
            let s = y1.add(y2).add(&self.a1().mul(x2)).add(self.a3());
            if s.is_zero() {
                return Ok(None);
            }
            let num = x1.square().mul_int(3).add(&self.a2().mul(x1).mul_int(2)).add(self.a4()).sub(&self.a1().mul(y1));
            let den = y1.mul_int(2).add(&self.a1().mul(x1)).add(self.a3());
            let lam = num.div(&den)?;
            let nu = y1.sub(&lam.mul(x1));
            return Ok(Some((lam, nu)));
        }
        let lam = y2.sub(y1).div(&x2.sub(x1))?;
        let nu = y1.sub(&lam.mul(x1));
        Ok(Some((lam, nu)))
    }

    pub fn add(&self, p: &Point, q: &Point) -> Result<Point> {
        match (p, q) {
            (Point::Zero, _) => Ok(q.clone()),
            (_, Point::Zero) => Ok(p.clone()),
            (Point::Affine(x1, _), Point::Affine(x2, _)) => match self.line(p, q)? {
                None => Ok(Point::Zero),
                Some((lam, nu)) => Ok(self.chord(x1, &lam, &nu, x2)),
            },
        }
    }

    pub fn sub(&self, p: &Point, q: &Point) -> Result<Point> {
        self.add(p, &self.neg(q))
    }

    pub fn mul(&self, n: i64, p: &Point) -> Result<Point> {
        let base = if n < 0 { self.neg(p) } else { p.clone() };
        let mut k = n.unsigned_abs();
        let mut acc = Point::Zero;
        let mut b = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(&acc, &b)?;
            }
            k >>= 1;
            if k > 0 {
                b = self.add(&b, &b)?;
            }
        }
        Ok(acc)
    }

    /// The points of E(K) with the given x-coordinate.
    pub fn lift_x(&self, x: &FieldElement) -> Result<Vec<Point>> {
        let b = self.a1().mul(x).add(self.a3());
        let c = self.rhs(x);
        let disc = b.square().add(&c.mul_int(4));
        let two = self.field.from_int(2);
        if disc.is_zero() {
            let y = b.neg().div(&two)?;
            return Ok(vec![Point::Affine(x.clone(), y)]);
        }
        // y = (-b +- sqrt(disc)) / 2
        let Some(s) = crate::padic::kummer::nth_root(&disc, 2)? else {
            return Ok(Vec::new());
        };
        let y1 = b.neg().add(&s).div(&two)?;
        let y2 = b.neg().sub(&s).div(&two)?;
        Ok(vec![Point::Affine(x.clone(), y1), Point::Affine(x.clone(), y2)])
    }

    /// The model with x = u^2 x' + r, y = u^3 y' + s u^2 x' + t, without the integrality check.
    pub fn transform_unchecked(&self, u: &FieldElement, r: &FieldElement, s: &FieldElement, t: &FieldElement) -> Result<[FieldElement; 5]> {
        let [a1, a2, a3, a4, a6] = &self.a;
        let ui = u.inv()?;
        let n1 = a1.add(&s.mul_int(2));
        let n2 = a2.sub(&s.mul(a1)).add(&r.mul_int(3)).sub(&s.square());
        let n3 = a3.add(&r.mul(a1)).add(&t.mul_int(2));
        let n4 = a4
            .sub(&s.mul(a3))
            .add(&r.mul(a2).mul_int(2))
            .sub(&t.add(&r.mul(s)).mul(a1))
            .add(&r.square().mul_int(3))
            .sub(&s.mul(t).mul_int(2));
        let n6 = a6
            .add(&r.mul(a4))
            .add(&r.square().mul(a2))
            .add(&r.pow_u(3))
            .sub(&t.mul(a3))
            .sub(&t.square())
            .sub(&r.mul(t).mul(a1));
        Ok([n1.mul(&ui), n2.mul(&ui.pow_u(2)), n3.mul(&ui.pow_u(3)), n4.mul(&ui.pow_u(4)), n6.mul(&ui.pow_u(6))])
    }

    pub fn transform(&self, u: &FieldElement, r: &FieldElement, s: &FieldElement, t: &FieldElement) -> Result<WeierstrassCurve> {
        WeierstrassCurve::new(&self.field, self.transform_unchecked(u, r, s, t)?)
    }

    /// A minimal model, searching translations with u = pi while v(Delta) >= 12.
    pub fn minimal_model(&self, cap: u64) -> Result<(WeierstrassCurve, bool)> {
        let mut cur = self.clone();
        let mut changed = false;
        loop {
            let vd = cur.discriminant().val_checked("discriminant")?;
            if vd < 12 {
                return Ok((cur, changed));
            }
            match cur.scale_down_once(cap)? {
                Some(next) => {
                    cur = next;
                    changed = true;
                }
                None => return Ok((cur, changed)),
            }
        }
    }

    fn residue_reps(&self, k: u32) -> Result<Vec<FieldElement>> {
        let kf = &self.field;
        let q = kf.residue_order();
        let total = q.checked_pow(k).filter(|&t| t <= 1 << 16).ok_or_else(|| Error::CapExceeded("minimal model search".into()))?;
        let rf = kf.residue_field();
        let pi = kf.uniformizer();
        Ok((0..total)
            .map(|mut idx| {
                let mut acc = kf.zero();
                let mut pw = kf.one();
                for _ in 0..k {
                    acc = acc.add(&kf.lift_residue(&rf.from_index(idx % q)).mul(&pw));
                    idx /= q;
                    pw = pw.mul(&pi);
                }
                acc
            })
            .collect())
    }

    fn scale_down_once(&self, cap: u64) -> Result<Option<WeierstrassCurve>> {
        let kf = &self.field;
        let pi = kf.uniformizer();
        let zero = kf.zero();
        let mut tried: u64 = 0;
        let ok = |c: &FieldElement| c.valuation().map_or(true, |v| v >= 0);
        for s in self.residue_reps(1)? {
            let t1 = self.transform_unchecked(&pi, &zero, &s, &zero)?;
            if !ok(&t1[0]) {
                continue;
            }
            for r in self.residue_reps(2)? {
                let t2 = self.transform_unchecked(&pi, &r, &s, &zero)?;
                if !ok(&t2[1]) {
                    continue;
                }
                for t in self.residue_reps(3)? {
                    tried += 1;
                    if tried > cap {
                        return Err(Error::CapExceeded("minimal model search".into()));
                    }
                    let a = self.transform_unchecked(&pi, &r, &s, &t)?;
                    if all_integral(&a) {
                        return Ok(Some(WeierstrassCurve::new(kf, a)?));
                    }
                }
            }
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_law_on_q5() {
        let k = LocalField::qp(5, 30).unwrap();
        let e = WeierstrassCurve::from_ints(&k, [0, 0, 0, -1, 0]).unwrap();
        assert_eq!(e.discriminant().to_bigint().unwrap(), BigInt::from(64));
        let t = Point::Affine(k.from_int(0), k.from_int(0));
        assert!(e.mul(2, &t).unwrap().is_zero());
        let pts = e.lift_x(&k.from_int(2)).unwrap();
        assert_eq!(pts.len(), 2);
        let p = &pts[0];
        assert!(e.contains(p));
        let q = e.add(p, &t).unwrap();
        assert!(e.contains(&q));
        let lhs = e.add(&e.add(p, &q).unwrap(), &t).unwrap();
        let rhs = e.add(p, &e.add(&q, &t).unwrap()).unwrap();
        assert!(lhs.eq_approx(&rhs));
        assert!(e.mul(7, p).unwrap().eq_approx(&e.add(&e.mul(3, p).unwrap(), &e.mul(4, p).unwrap()).unwrap()));
    }

    #[test]
    fn minimalization() {
        let k = LocalField::qp(2, 40).unwrap();
        let e = WeierstrassCurve::from_ints(&k, [1, 0, 0, 1, 0]).unwrap();
        let (m, changed) = e.minimal_model(1 << 16).unwrap();
        assert!(!changed);
        assert_eq!(m.discriminant().valuation(), e.discriminant().valuation());
        let big = e.transform(&k.from_int(2).inv().unwrap(), &k.from_int(3), &k.from_int(1), &k.from_int(5)).unwrap();
        assert_eq!(big.discriminant().valuation(), Some(e.discriminant().valuation().unwrap() + 12));
        let (m, changed) = big.minimal_model(1 << 16).unwrap();
        assert!(changed);
        assert_eq!(m.discriminant().valuation(), e.discriminant().valuation());
        assert!(m.j_invariant().unwrap().eq_approx(&e.j_invariant().unwrap()));
    }
}
