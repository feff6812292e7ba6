//! Kummer classes of points when E[p] is rational, the decomposition of E(K)/p inside
//! (K^x/p)^2, the t-invariant and the Serre-Tate parameter.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::formal::{w_series, FormalGroup};
use super::torsion::{basis_of, rational_p_torsion, split_x_polys, p_torsion_x, Tower};
use super::weierstrass::{Point, WeierstrassCurve};
use crate::arith::{FpMatrix, Span};
use crate::error::{Error, Result};
use crate::padic::{adjoin_pth_root, contains_mu_p, e0, is_pth_power, FieldElement};
use crate::units::{Level, UnitsModP};

/// Evaluates f_T at P, where div f_T = p(T) - p(O) and f_T has leading coefficient +-1 at O.
pub fn miller_value(e: &WeierstrassCurve, t: &Point, pt: &Point) -> Result<FieldElement> {
    let p = e.field().p() as i64;
    let (Point::Affine(xp, yp), Point::Affine(xt, _)) = (pt, t) else {
        return Err(Error::DegeneratePairing("the identity is in the support".into()));
    };
    let k = e.field();
    let mut f = k.one();
    let mut r = t.clone();
    for i in 1..p {
        let factor = if i == p - 1 {
            xp.sub(xt)
        } else {
            let (lam, nu) = e
                .line(&r, t)?
                .ok_or_else(|| Error::DegeneratePairing("vertical line before the last step".into()))?;
            let next = e.add(&r, t)?;
            let num = yp.sub(&lam.mul(xp)).sub(&nu);
            let den = xp.sub(next.x().ok_or_else(|| Error::DegeneratePairing("early identity".into()))?);
            r = next;
            if den.is_zero() {
                return Err(Error::DegeneratePairing("P meets a multiple of T".into()));
            }
            num.div(&den)?
        };
        if factor.is_zero() {
            return Err(Error::DegeneratePairing("P meets a multiple of T".into()));
        }
        f = f.mul(&factor);
    }
    Ok(f)
}

/// A deterministic stream of points of E(K), alternating integral x and formal-group points.
pub struct PointSampler {
    curve: WeierstrassCurve,
    rng: ChaCha8Rng,
    w: Vec<FieldElement>,
    count: u64,
}

impl PointSampler {
    pub fn new(e: &WeierstrassCurve, seed: u64) -> Self {
        let k = e.field();
        let n = 2 * (k.e() + 4);
        PointSampler { curve: e.clone(), rng: ChaCha8Rng::seed_from_u64(seed), w: w_series(e, n).coeffs().to_vec(), count: 0 }
    }

    fn random_ok(&mut self) -> Vec<BigInt> {
        let k = self.curve.field();
        let bound = k.p().pow(4);
        (0..k.degree()).map(|_| BigInt::from(self.rng.gen_range(0..bound))).collect()
    }

    /// Next point, or None when the attempt produced no point.
    pub fn attempt(&mut self) -> Result<Option<Point>> {
        let k = self.curve.field().clone();
        self.count += 1;
        let x = if self.count % 2 == 1 {
            k.from_ok(self.random_ok(), 0, k.cap())
        } else {
            let depth = self.rng.gen_range(1..=3);
            let z = k.from_ok(self.random_ok(), depth, k.cap());
            if z.is_zero() {
                return Ok(None);
            }
            let mut w = k.zero();
            for c in self.w.iter().rev() {
                w = w.mul(&z).add(c);
            }
            z.div(&w)?
        };
        let pts = self.curve.lift_x(&x)?;
        if pts.is_empty() {
            return Ok(None);
        }
        let pick = self.rng.gen_range(0..pts.len());
        Ok(Some(pts[pick].clone()))
    }
}

/// Kummer coordinates of points: P -> (f_{T1}(P), f_{T2}(P)) in (K^x/p)^2, or a single
/// coordinate f_T(P) when only one rational torsion point is used.
#[derive(Clone)]
pub struct KummerMap {
    curve: WeierstrassCurve,
    points: Vec<Point>,
    units: UnitsModP,
    aux: Vec<Point>,
}

impl KummerMap {
    pub fn new(e: &WeierstrassCurve, basis: (Point, Point), units: UnitsModP, seed: u64) -> Result<Self> {
        Self::with_points(e, vec![basis.0, basis.1], units, seed)
    }

    pub fn single(e: &WeierstrassCurve, t: Point, units: UnitsModP, seed: u64) -> Result<Self> {
        Self::with_points(e, vec![t], units, seed)
    }

    fn with_points(e: &WeierstrassCurve, points: Vec<Point>, units: UnitsModP, seed: u64) -> Result<Self> {
        let mut sampler = PointSampler::new(e, seed ^ 0x5eed);
        let mut aux = Vec::new();
        for _ in 0..64 {
            if aux.len() >= 4 {
                break;
            }
            if let Some(q) = sampler.attempt()? {
                aux.push(q);
            }
        }
        Ok(KummerMap { curve: e.clone(), points, units, aux })
    }

    pub fn units(&self) -> &UnitsModP {
        &self.units
    }
    pub fn curve(&self) -> &WeierstrassCurve {
        &self.curve
    }
    pub fn points(&self) -> &[Point] {
        &self.points
    }
    pub fn dim(&self) -> usize {
        self.points.len() * self.units.dim()
    }

    fn coords_of(&self, t: &Point, pt: &Point) -> Result<Vec<u64>> {
        if pt.is_zero() {
            return Ok(vec![0; self.units.dim()]);
        }
        let direct = miller_value(&self.curve, t, pt).and_then(|v| self.units.decompose(&v));
        if direct.is_ok() {
            return direct;
        }
        // f(P + R) / f(R) evaluates f on a divisor equivalent to (P) - (O)
        let mut last = direct;
        for r in &self.aux {
            let shifted = self.curve.add(pt, r)?;
            let attempt = (|| {
                let a = self.units.decompose(&miller_value(&self.curve, t, &shifted)?)?;
                let b = self.units.decompose(&miller_value(&self.curve, t, r)?)?;
                let p = self.units.p();
                Ok(a.iter().zip(&b).map(|(x, y)| (x + p - y) % p).collect())
            })();
            if attempt.is_ok() {
                return attempt;
            }
            last = attempt;
        }
        last
    }

    pub fn class(&self, pt: &Point) -> Result<Vec<u64>> {
        let mut c = Vec::with_capacity(self.dim());
        for t in &self.points {
            c.extend(self.coords_of(t, pt)?);
        }
        Ok(c)
    }
}

#[derive(Clone, Debug)]
pub struct KummerImage {
    pub expected_dim: usize,
    pub span: Span,
    /// points whose classes are independent, in insertion order
    pub generators: Vec<(Point, Vec<u64>)>,
    pub sampled: usize,
}

/// Fill E(K)/p from the given points first, then from sampled points.
pub fn kummer_image(map: &KummerMap, seeds: &[Point], budget: usize, seed: u64) -> Result<KummerImage> {
    let k = map.curve.field();
    if map.points.len() != 2 {
        return Err(Error::HypothesisFailed("the full Kummer image needs a basis of E[p]".into()));
    }
    let expected_dim = k.degree() + 2;
    let mut span = Span::new(map.units.p(), map.dim());
    let mut generators = Vec::new();
    for q in seeds {
        let c = map.class(q)?;
        if span.insert(&c) {
            generators.push((q.clone(), c));
        }
    }
    let mut sampler = PointSampler::new(&map.curve, seed);
    let mut sampled = 0;
    let mut attempts = 0;
    while span.rank() < expected_dim {
        if sampled >= budget || attempts >= 8 * budget.max(1) {
            return Err(Error::BudgetExhausted(format!(
                "E(K)/p spans rank {} of {expected_dim} after {sampled} points",
                span.rank()
            )));
        }
        attempts += 1;
        let Some(q) = sampler.attempt()? else { continue };
        sampled += 1;
        let c = match map.class(&q) {
            Ok(c) => c,
            Err(Error::DegeneratePairing(_)) | Err(Error::PrecisionExhausted(_)) => continue,
            Err(e) => return Err(e),
        };
        if span.insert(&c) {
            generators.push((q, c));
        }
    }
    if span.rank() > expected_dim {
        return Err(Error::PrecisionExhausted("Kummer image larger than |E(K)/p|".into()));
    }
    Ok(KummerImage { expected_dim, span, generators, sampled })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    /// the two filtration levels the image was tested against
    pub levels: (u64, u64),
    /// rows (a, b) and (c, d) of a change of basis under which the image is U^{l1} + U^{l2} coordinatewise
    pub split_basis: Option<[[u64; 2]; 2]>,
    /// rows of a change of basis under which the second coordinate maps onto one level and the
    /// first coordinate of the kernel of that map is the other level
    pub flag_basis: Option<[[u64; 2]; 2]>,
    pub holds: bool,
}

fn project(v: &[u64], a: u64, b: u64, p: u64) -> Vec<u64> {
    let d = v.len() / 2;
    (0..d).map(|i| (a * v[i] + b * v[d + i]) % p).collect()
}

fn supported_at(units: &UnitsModP, v: &[u64], level: u64) -> bool {
    let ok = units.indices_at_least(level);
    v.iter().enumerate().all(|(i, &c)| c == 0 || ok.contains(&i))
}

fn rank_of(p: u64, cols: usize, rows: &[Vec<u64>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    FpMatrix::from_rows(p, cols, rows).rank()
}

/// Vectors of the span of `image` on which the projection (a, b) vanishes.
fn kernel_of_projection(image: &[Vec<u64>], a: u64, b: u64, p: u64) -> Vec<Vec<u64>> {
    if image.is_empty() {
        return Vec::new();
    }
    let d = image[0].len() / 2;
    let proj: Vec<Vec<u64>> = image.iter().map(|v| project(v, a, b, p)).collect();
    let rows: Vec<Vec<u64>> = (0..d).map(|i| proj.iter().map(|v| v[i]).collect()).collect();
    FpMatrix::from_rows(p, image.len(), &rows)
        .nullspace()
        .into_iter()
        .map(|c| {
            let mut out = vec![0u64; 2 * d];
            for (ci, v) in c.iter().zip(image) {
                for (o, x) in out.iter_mut().zip(v) {
                    *o = (*o + ci * x) % p;
                }
            }
            out
        })
        .collect()
}

/// Whether the image matches U^{l1} + U^{l2} after a change of basis of E[p], either as a
/// coordinatewise direct sum or as the adapted flag sub = U^{l1}, quotient = U^{l2} (in either order).
pub fn check_decomposition(units: &UnitsModP, image: &[Vec<u64>], l1: u64, l2: u64) -> Decomposition {
    let p = units.p();
    let d = units.dim();
    let dim_of = |l: u64| units.indices_at_least(l).len();
    let rank = rank_of(p, 2 * d, image);
    let dirs: Vec<(u64, u64)> = (0..p).map(|b| (1, b)).chain(std::iter::once((0, 1))).collect();
    let independent = |r1: (u64, u64), r2: (u64, u64)| (r1.0 * r2.1 + p * p - r1.1 * r2.0) % p != 0;
    let mut split = None;
    let mut flag = None;
    if rank == dim_of(l1) + dim_of(l2) {
        let fits = |(a, b): (u64, u64), l: u64| image.iter().all(|v| supported_at(units, &project(v, a, b, p), l));
        'search: for &r1 in &dirs {
            if !fits(r1, l1) {
                continue;
            }
            for &r2 in &dirs {
                if independent(r1, r2) && fits(r2, l2) {
                    split = Some([[r1.0, r1.1], [r2.0, r2.1]]);
                    break 'search;
                }
            }
        }
        'flag: for (sub, quot) in [(l1, l2), (l2, l1)] {
            for &r2 in &dirs {
                let q: Vec<Vec<u64>> = image.iter().map(|v| project(v, r2.0, r2.1, p)).collect();
                if !q.iter().all(|v| supported_at(units, v, quot)) || rank_of(p, d, &q) != dim_of(quot) {
                    continue;
                }
                let ker = kernel_of_projection(image, r2.0, r2.1, p);
                for &r1 in &dirs {
                    if !independent(r1, r2) {
                        continue;
                    }
                    let s: Vec<Vec<u64>> = ker.iter().map(|v| project(v, r1.0, r1.1, p)).collect();
                    if s.iter().all(|v| supported_at(units, v, sub)) && rank_of(p, d, &s) == dim_of(sub) {
                        flag = Some([[r1.0, r1.1], [r2.0, r2.1]]);
                        break 'flag;
                    }
                }
            }
        }
    }
    Decomposition { levels: (l1, l2), split_basis: split, flag_basis: flag, holds: split.is_some() || flag.is_some() }
}

/// The smallest level among the nonzero vectors of a projected subspace.
pub fn projected_level(units: &UnitsModP, image: &[Vec<u64>], a: u64, b: u64) -> Level {
    let p = units.p();
    image
        .iter()
        .map(|v| units.level_of_coords(&project(v, a, b, p)))
        .min()
        .unwrap_or(Level::Trivial)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TInvariant {
    pub t: i64,
    /// min v(z(P)) over the nonzero rational p-torsion points
    pub from_points: i64,
}

/// The depth of E-hat[p] in the filtration, read from the torsion polygon and checked on points.
pub fn t_invariant(e: &WeierstrassCurve, fg: &FormalGroup) -> Result<TInvariant> {
    let k = e.field();
    let p = k.p();
    if fg.height != 2 {
        return Err(Error::HypothesisFailed("the t-invariant needs supersingular reduction".into()));
    }
    let pts = rational_p_torsion(e)?;
    if pts.len() as u64 != p * p {
        return Err(Error::HypothesisFailed("E[p] is not contained in E(K)".into()));
    }
    let slope = fg.torsion_polygon.first().map(|s| s.slope).ok_or_else(|| Error::OrderTooLow("empty polygon".into()))?;
    if !slope.is_integer() {
        return Err(Error::PrecisionExhausted("torsion polygon slope is not integral".into()));
    }
    let t = slope.to_integer();
    let mut from_points = i64::MAX;
    for q in pts.iter().filter(|q| !q.is_zero()) {
        from_points = from_points.min(q.z()?.val_checked("z(P)")?);
    }
    if from_points != t {
        return Err(Error::PrecisionExhausted(format!("polygon gives t = {t} but the torsion points give {from_points}")));
    }
    let top = (p as i64) * e0(k)? as i64;
    if t < 1 || t >= top {
        return Err(Error::HypothesisFailed(format!("t = {t} outside [1, {top})")));
    }
    Ok(TInvariant { t, from_points })
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SerreTate {
    Trivial,
    Nontrivial {
        #[serde(skip)]
        u: FieldElement,
        coords: Vec<u64>,
        level: Level,
    },
}

/// The class u with K(E[p]) = K(u^{1/p}) for an ordinary curve with rational connected p-torsion.
pub fn serre_tate_parameter(e: &WeierstrassCurve, degree_cap: usize) -> Result<SerreTate> {
    let k = e.field();
    let p = k.p();
    if !contains_mu_p(k)? {
        return Err(Error::HypothesisFailed("mu_p is not contained in K".into()));
    }
    let pts = rational_p_torsion(e)?;
    if pts.len() as u64 == p * p {
        return Ok(SerreTate::Trivial);
    }
    let formal = pts.iter().filter(|q| q.x().is_some_and(|x| x.valuation().is_some_and(|v| v < 0))).count() + 1;
    if formal as u64 != p || pts.len() as u64 != p {
        return Err(Error::HypothesisFailed("the connected part of E[p] is not rational".into()));
    }
    let mut tower = Tower::new(k);
    let mut cur = e.clone();
    let mut polys = vec![p_torsion_x(e, p)];
    let mut carried = Vec::new();
    split_x_polys(&mut tower, &mut cur, &mut polys, &mut carried, degree_cap)?;
    if tower.degree() != p as usize {
        return Err(Error::HypothesisFailed(format!("[K(E[p]) : K] = {} instead of p", tower.degree())));
    }
    let m = tower.top().clone();
    let uk = UnitsModP::new(k)?;
    let um = UnitsModP::new(&m)?;
    let mut rows = vec![vec![0u64; uk.dim()]; um.dim()];
    for (j, b) in uk.basis().iter().enumerate() {
        let c = um.decompose(&tower.embed(&b.element)?)?;
        for (i, x) in c.into_iter().enumerate() {
            rows[i][j] = x;
        }
    }
    let kernel = FpMatrix::from_rows(p, uk.dim(), &rows).nullspace();
    if kernel.len() != 1 {
        return Err(Error::KernelNotFound(format!("kernel of restriction has dimension {}", kernel.len())));
    }
    let coords = kernel[0].clone();
    let u = uk.compose(&coords);
    if is_pth_power(&u)?.is_some() {
        return Err(Error::KernelNotFound("kernel generator is a p-th power".into()));
    }
    let ext = adjoin_pth_root(k, &u)?;
    let over = e.base_change(&ext)?;
    if rational_p_torsion(&over)?.len() as u64 != p * p {
        return Err(Error::KernelNotFound("E[p] does not split over K(u^(1/p))".into()));
    }
    let level = uk.level_of_coords(&coords);
    Ok(SerreTate::Nontrivial { u, coords, level })
}

/// A basis of E[p] when it is rational.
pub fn rational_p_basis(e: &WeierstrassCurve) -> Result<Option<(Point, Point)>> {
    let p = e.field().p();
    let pts = rational_p_torsion(e)?;
    if pts.len() as u64 != p * p {
        return Ok(None);
    }
    basis_of(e, &pts, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::formal::formal_group;
    use crate::padic::LocalField;
    use crate::padic::Poly;

    #[test]
    fn miller_for_two_is_a_vertical_line() {
        let k = LocalField::qp(2, 40).unwrap();
        let e = WeierstrassCurve::from_ints(&k, [1, 0, 0, 1, 0]).unwrap();
        let (t1, _) = rational_p_basis(&e).unwrap().unwrap();
        let mut s = PointSampler::new(&e, 1);
        let mut q = None;
        while q.is_none() {
            q = s.attempt().unwrap();
        }
        let q = q.unwrap();
        let v = miller_value(&e, &t1, &q).unwrap();
        assert!(v.eq_approx(&q.x().unwrap().sub(t1.x().unwrap())));
    }

    #[test]
    fn miller_is_a_homomorphism_mod_p_powers() {
        let k = LocalField::qp(3, 30).unwrap();
        // y^2 = x^3 + 1 has the rational 3-torsion point (0, 1)
        let e = WeierstrassCurve::from_ints(&k, [0, 0, 0, 0, 1]).unwrap();
        let t = Point::Affine(k.zero(), k.one());
        assert!(e.mul(3, &t).unwrap().is_zero());
        let units = UnitsModP::new(&k).unwrap();
        let mut s = PointSampler::new(&e, 7);
        let mut pts = Vec::new();
        while pts.len() < 4 {
            if let Some(q) = s.attempt().unwrap() {
                pts.push(q);
            }
        }
        let cls = |q: &Point| units.decompose(&miller_value(&e, &t, q).unwrap()).unwrap();
        for i in 0..2 {
            let (a, b) = (&pts[2 * i], &pts[2 * i + 1]);
            let sum = e.add(a, b).unwrap();
            let lhs = cls(&sum);
            let rhs: Vec<u64> = cls(a).iter().zip(cls(b)).map(|(x, y)| (x + y) % 3).collect();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn ordinary_decomposition_over_q2() {
        let k = LocalField::qp(2, 40).unwrap();
        let e = WeierstrassCurve::from_ints(&k, [1, 0, 0, 1, 0]).unwrap();
        let basis = rational_p_basis(&e).unwrap().unwrap();
        let units = UnitsModP::new(&k).unwrap();
        let map = KummerMap::new(&e, basis.clone(), units, 3).unwrap();
        // a p-multiple has trivial class
        let img = kummer_image(&map, &[basis.0.clone(), basis.1.clone()], 64, 11).unwrap();
        assert_eq!(img.span.rank(), 3);
        let two_r = e.mul(2, &img.generators.last().unwrap().0).unwrap();
        assert!(map.class(&two_r).unwrap().iter().all(|&c| c == 0));
        let top = map.units().top_level().unwrap();
        let d = check_decomposition(map.units(), &img.span.basis(), 0, top);
        assert!(d.split_basis.is_some() && d.flag_basis.is_some(), "{d:?}");
        assert!(!check_decomposition(map.units(), &img.span.basis(), top, top).holds);
    }

    #[test]
    fn serre_tate_examples_over_q2() {
        let k = LocalField::qp(2, 40).unwrap();
        let e = WeierstrassCurve::from_ints(&k, [1, 0, 0, 0, -3]).unwrap();
        match serre_tate_parameter(&e, 64).unwrap() {
            SerreTate::Nontrivial { u, .. } => {
                assert!(is_pth_power(&u.mul(&k.from_int(3))).unwrap().is_some());
            }
            SerreTate::Trivial => panic!("expected a nontrivial class"),
        }
        let e = WeierstrassCurve::from_ints(&k, [1, 0, 0, 0, -5]).unwrap();
        match serre_tate_parameter(&e, 64).unwrap() {
            SerreTate::Nontrivial { u, level, .. } => {
                assert!(is_pth_power(&u.mul(&k.from_int(5))).unwrap().is_some());
                assert_eq!(level, Level::Unit(2));
            }
            SerreTate::Trivial => panic!("expected a nontrivial class"),
        }
        let cm = WeierstrassCurve::from_ints(&k, [1, -1, 0, -2, -1]).unwrap();
        assert!(matches!(serre_tate_parameter(&cm, 64).unwrap(), SerreTate::Trivial));
    }

    #[test]
    fn t_invariant_supersingular() {
        let k = LocalField::new(2, 2, Some(&[BigInt::from(-2), BigInt::from(0), BigInt::from(0), BigInt::from(1)]), 20).unwrap();
        let e = WeierstrassCurve::from_ints(&k, [0, 0, 1, 0, 0]).unwrap();
        let fg = formal_group(&e, 3).unwrap();
        let t = t_invariant(&e, &fg).unwrap();
        assert_eq!(t.t, 1);
        let basis = rational_p_basis(&e).unwrap().unwrap();
        let map = KummerMap::new(&e, basis.clone(), UnitsModP::new(&k).unwrap(), 5).unwrap();
        let img = kummer_image(&map, &[basis.0, basis.1], 64, 9).unwrap();
        assert_eq!(img.span.rank(), 8);
        let e0 = map.units().top_level().unwrap() / 2;
        let d = check_decomposition(map.units(), &img.span.basis(), 2, 2 * (e0 - 1));
        assert!(d.holds, "{d:?}");
        assert!(d.split_basis.is_none());
    }

    #[test]
    fn t_scales_with_ramification() {
        let k = LocalField::new(2, 2, Some(&[BigInt::from(-2), BigInt::from(0), BigInt::from(0), BigInt::from(1)]), 24).unwrap();
        let e = WeierstrassCurve::from_ints(&k, [0, 0, 1, 0, 0]).unwrap();
        let t_k = t_invariant(&e, &formal_group(&e, 3).unwrap()).unwrap().t;
        let pi = k.uniformizer();
        let ext = crate::padic::adjoin_root(&k, &Poly::new(&k, vec![pi.neg(), k.zero(), k.one()])).unwrap();
        assert_eq!(ext.top().e(), 2 * k.e());
        let el = e.base_change(&ext).unwrap();
        let t_l = t_invariant(&el, &formal_group(&el, 3).unwrap()).unwrap().t;
        assert_eq!(t_l, 2 * t_k);
    }
}
