//! The filtration of K^x/p by the images of the higher unit groups, filtered bases,
//! and norm-group membership for degree-p Kummer extensions.

use num_rational::Ratio;
use serde::Serialize;

use crate::arith::{FpMatrix, Span};
use crate::error::{exhausted, Error, Result};
use crate::padic::ext::RelAlgebra;
use crate::padic::kummer::{adjoin_pth_root, contains_mu_p, is_pth_power};
use crate::padic::{FieldElement, LocalField, Poly, Res};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Uniformizer,
    Unit(u64),
    Trivial,
}

impl Level {
    pub fn index(&self) -> Option<u64> {
        match self {
            Level::Unit(i) => Some(*i),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BasisVector {
    pub element: FieldElement,
    pub level: Level,
}

/// A basis of K^x/p adapted to the unit filtration.
#[derive(Clone, Debug)]
pub struct UnitsModP {
    field: LocalField,
    p: u64,
    mu_p: bool,
    // p e_K / (p - 1)
    threshold: Ratio<i64>,
    basis: Vec<BasisVector>,
    inverses: Vec<FieldElement>,
    // first basis index of each level p-coprime level below the threshold
    level_start: Vec<(i64, usize)>,
    phi: FpMatrix,
    astar: Option<Res>,
}

impl UnitsModP {
    pub fn new(k: &LocalField) -> Result<Self> {
        let p = k.p();
        let (e, f) = (k.e() as i64, k.f());
        let kr = k.residue_field();
        let mu_p = contains_mu_p(k)?;
        let threshold = Ratio::new(p as i64 * e, p as i64 - 1);
        let one = k.one();
        let pi = k.uniformizer();
        let omega = k.omega();
        let mut basis = vec![BasisVector { element: pi.clone(), level: Level::Uniformizer }];
        let mut level_start = Vec::new();
        let mut i = 1i64;
        while Ratio::from_integer(i) < threshold {
            if i % p as i64 != 0 {
                level_start.push((i, basis.len()));
                let pii = pi.pow(i)?;
                let mut w = one.clone();
                for _ in 0..f {
                    basis.push(BasisVector { element: one.add(&w.mul(&pii)), level: Level::Unit(i as u64) });
                    w = w.mul(&omega);
                }
            }
            i += 1;
        }
        // phi(b) = b^p + eps b on the residue field, at level p e / (p - 1) when it is an integer
        let eps = k.from_int(p as i64).shift(-e).unit_residue()?;
        let mut phi = FpMatrix::zeros(p, f, f);
        let mut astar = None;
        if threshold.is_integer() {
            for j in 0..f {
                let mut bj = kr.zero();
                bj[j] = 1;
                let img = kr.add(&kr.pow(&bj, p), &kr.mul(&eps, &bj));
                for (r, c) in img.iter().enumerate() {
                    phi.set(r, j, *c);
                }
            }
            let rank = phi.rank();
            if rank < f {
                if !mu_p || rank + 1 != f {
                    return Err(exhausted("unexpected cokernel at the top level"));
                }
                for j in 0..f {
                    let mut cand = vec![0u64; f];
                    cand[j] = 1;
                    if phi.solve(&cand).is_none() {
                        astar = Some(cand);
                        break;
                    }
                }
                let a = astar.clone().unwrap();
                let top = threshold.to_integer();
                let el = one.add(&k.lift_residue(&a).mul(&pi.pow(top)?));
                basis.push(BasisVector { element: el, level: Level::Unit(top as u64) });
            }
        }
        let inverses = basis.iter().map(|b| b.element.inv()).collect::<Result<Vec<_>>>()?;
        let expected = k.degree() + if mu_p { 2 } else { 1 };
        if basis.len() != expected {
            return Err(exhausted(format!("filtered basis has size {} instead of {expected}", basis.len())));
        }
        Ok(UnitsModP { field: k.clone(), p, mu_p, threshold, basis, inverses, level_start, phi, astar })
    }

    pub fn field(&self) -> &LocalField {
        &self.field
    }
    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
    pub fn basis(&self) -> &[BasisVector] {
        &self.basis
    }
    pub fn has_mu_p(&self) -> bool {
        self.mu_p
    }
    pub fn levels(&self) -> Vec<Level> {
        self.basis.iter().map(|b| b.level).collect()
    }

    /// p e_0(K), the top nontrivial level when mu_p is contained in K.
    pub fn top_level(&self) -> Result<u64> {
        if !self.mu_p {
            return Err(Error::MuPNotContained);
        }
        Ok(self.threshold.to_integer() as u64)
    }

    /// Relative precision needed for a certified decomposition.
    pub fn required_precision(&self) -> i64 {
        self.threshold.to_integer() + 2
    }

    /// Coordinates of the class of x over the basis.
    pub fn decompose(&self, x: &FieldElement) -> Result<Vec<u64>> {
        let k = &self.field;
        if x.field() != k {
            return Err(Error::FieldMismatch);
        }
        let p = self.p;
        let v = x.valuation().ok_or(Error::DivisionByZero)?;
        let mut coords = vec![0u64; self.dim()];
        coords[0] = v.rem_euclid(p as i64) as u64;
        let u = x.shift(-v);
        let q = k.residue_order();
        let w = u.pow_u(q - 1);
        let c1 = self.decompose_one_unit(&w)?;
        for (a, b) in coords.iter_mut().zip(c1) {
            *a = (*a + (p - b) % p) % p;
        }
        Ok(coords)
    }

    fn decompose_one_unit(&self, u0: &FieldElement) -> Result<Vec<u64>> {
        let k = &self.field;
        let kr = k.residue_field();
        let p = self.p;
        let one = k.one();
        let pi = k.uniformizer();
        let mut coords = vec![0u64; self.dim()];
        let mut u = u0.clone();
        loop {
            let d = u.sub(&one);
            let i = match d.valuation() {
                None => {
                    if Ratio::from_integer(d.abs_prec()) > self.threshold {
                        break;
                    }
                    return Err(exhausted("unit known to too little precision for its class"));
                }
                Some(i) => i,
            };
            if i <= 0 {
                return Err(Error::BadLevel("expected a principal unit".into()));
            }
            let ri = Ratio::from_integer(i);
            if ri > self.threshold {
                break;
            }
            let a = d.shift(-i).residue()?;
            if ri == self.threshold {
                let top = i / p as i64;
                let (b, c) = self.solve_top(&a)?;
                if c != 0 {
                    let idx = self.dim() - 1;
                    coords[idx] = (coords[idx] + c) % p;
                    for _ in 0..c {
                        u = u.mul(&self.inverses[idx]);
                    }
                }
                if !kr.is_zero(&b) {
                    let base = one.add(&k.lift_residue(&b).mul(&pi.pow(top)?));
                    u = u.div(&base.pow_u(p))?;
                }
                continue;
            }
            if i % p as i64 == 0 {
                let b = kr.pth_root(&a);
                let base = one.add(&k.lift_residue(&b).mul(&pi.pow(i / p as i64)?));
                u = u.div(&base.pow_u(p))?;
                continue;
            }
            let start = self.level_start.iter().find(|(l, _)| *l == i).map(|(_, s)| *s).unwrap();
            for (j, &c) in a.iter().enumerate() {
                if c != 0 {
                    coords[start + j] = (coords[start + j] + c) % p;
                    for _ in 0..c {
                        u = u.mul(&self.inverses[start + j]);
                    }
                }
            }
        }
        Ok(coords)
    }

    /// Write a = phi(b) + c a* at the top level.
    fn solve_top(&self, a: &Res) -> Result<(Res, u64)> {
        let f = self.field.f();
        if let Some(b) = self.phi.solve(a) {
            return Ok((b, 0));
        }
        let astar = self.astar.as_ref().ok_or_else(|| exhausted("top level not solvable"))?;
        for c in 1..self.p {
            let t: Vec<u64> = (0..f).map(|r| (a[r] + self.p * self.p - c * astar[r] % self.p) % self.p).collect();
            if let Some(b) = self.phi.solve(&t) {
                return Ok((b, c));
            }
        }
        Err(exhausted("top level decomposition failed"))
    }

    pub fn compose(&self, coords: &[u64]) -> FieldElement {
        let mut acc = self.field.one();
        for (b, &c) in self.basis.iter().zip(coords) {
            for _ in 0..c {
                acc = acc.mul(&b.element);
            }
        }
        acc
    }

    /// Filtration level of a class given by coordinates.
    pub fn level_of_coords(&self, coords: &[u64]) -> Level {
        let mut best = Level::Trivial;
        for (b, &c) in self.basis.iter().zip(coords) {
            if c != 0 && b.level < best {
                best = b.level;
            }
        }
        best
    }

    /// Largest i with x in the image of U^i, for a unit x.
    pub fn ubar_level(&self, x: &FieldElement) -> Result<Level> {
        if x.valuation() != Some(0) {
            return Err(Error::BadLevel("ubar_level expects a unit".into()));
        }
        Ok(self.level_of_coords(&self.decompose(x)?))
    }

    /// Order of the graded piece at level i read off the basis.
    pub fn graded_order_from_basis(&self, i: u64) -> u64 {
        let n = self.basis.iter().filter(|b| b.level == Level::Unit(i)).count();
        self.p.pow(n as u32)
    }

    /// Basis indices spanning the image of U^i.
    pub fn indices_at_least(&self, i: u64) -> Vec<usize> {
        (0..self.dim())
            .filter(|&k| matches!(self.basis[k].level, Level::Unit(l) if l >= i))
            .collect()
    }
}

/// Order of the graded piece at level i from the closed-form description.
pub fn graded_quotient_order(k: &LocalField, i: u64) -> Result<u64> {
    if !contains_mu_p(k)? {
        return Err(Error::MuPNotContained);
    }
    let p = k.p();
    let top = p * k.e() as u64 / (p - 1);
    Ok(if i < top {
        if i % p != 0 {
            k.residue_order()
        } else {
            1
        }
    } else if i == top {
        p
    } else {
        1
    })
}

// ---------- norm groups ----------

/// The norm group of K(y^{1/p})/K modulo p-th powers.
#[derive(Clone, Debug)]
pub enum NormGroup {
    Everything,
    Hyperplane(Span),
}

impl NormGroup {
    pub fn contains(&self, coords: &[u64]) -> bool {
        match self {
            NormGroup::Everything => true,
            NormGroup::Hyperplane(s) => s.contains(coords),
        }
    }
}

fn normalized_kummer(y: &FieldElement) -> Result<FieldElement> {
    let p = y.field().p() as i64;
    let v = y.valuation().ok_or(Error::DivisionByZero)?;
    Ok(y.shift(-(v.div_euclid(p) * p)))
}

/// Span of the norms from K(y^{1/p}); codimension one when mu_p is in K and y is not a p-th power.
pub fn norm_group(units: &UnitsModP, y: &FieldElement) -> Result<NormGroup> {
    let k = units.field();
    let p = units.p();
    if !units.has_mu_p() {
        // a degree-p extension without an intermediate abelian subextension has full norm group
        return Ok(NormGroup::Everything);
    }
    let y = normalized_kummer(y)?;
    if is_pth_power(&y)?.is_some() {
        return Ok(NormGroup::Everything);
    }
    let d = units.dim();
    let mut span = Span::new(p, d);
    let mut c = vec![k.zero(); p as usize + 1];
    c[0] = y.neg();
    c[p as usize] = k.one();
    let alg = RelAlgebra::new(&Poly::new(k, c))?;
    let alpha = alg.gen();
    let pi = k.uniformizer();
    let omega = k.omega();
    let top = units.threshold.to_integer() + 1;
    let insert_norm = |span: &mut Span, z: &Vec<FieldElement>| -> Result<bool> {
        let n = alg.norm(z)?;
        if n.is_zero() {
            return Ok(false);
        }
        span.insert(&units.decompose(&n)?);
        Ok(span.rank() + 1 >= d)
    };
    if insert_norm(&mut span, &alpha)? {
        return finish(span, d);
    }
    let mut scalars = vec![k.one(), k.from_int(-1)];
    for a in 0..=top {
        let pa = pi.pow(a)?;
        let mut w = k.one();
        for _ in 0..k.f() {
            scalars.push(w.mul(&pa));
            scalars.push(k.one().add(&w.mul(&pa)));
            w = w.mul(&omega);
        }
    }
    for s in &scalars {
        let z = alg.sub(&alg.scalar(s), &alpha);
        if insert_norm(&mut span, &z)? {
            return finish(span, d);
        }
    }
    let am1 = alg.sub(&alpha, &alg.one());
    for base in [alpha.clone(), am1] {
        let mut pw = base.clone();
        for _ in 1..p {
            for s in &scalars {
                let z = alg.add(&alg.one(), &alg.scale(&pw, s));
                if insert_norm(&mut span, &z)? {
                    return finish(span, d);
                }
            }
            pw = alg.mul(&pw, &base);
        }
    }
    // fall back to norms of a full basis of L^x/p
    let ext = adjoin_pth_root(k, &y)?;
    let lu = UnitsModP::new(ext.top())?;
    for b in lu.basis() {
        let n = ext.norm(&b.element)?;
        span.insert(&units.decompose(&n)?);
    }
    finish(span, d)
}

fn finish(span: Span, d: usize) -> Result<NormGroup> {
    if span.rank() + 1 == d {
        Ok(NormGroup::Hyperplane(span))
    } else {
        Err(exhausted(format!("norm group has rank {} in dimension {d}", span.rank())))
    }
}

/// Whether x is a norm from K(y^{1/p}).
pub fn is_norm(k: &LocalField, y: &FieldElement, x: &FieldElement) -> Result<bool> {
    let units = UnitsModP::new(k)?;
    let g = norm_group(&units, y)?;
    Ok(g.contains(&units.decompose(x)?))
}

/// Exhaustive oracle: the norm classes of a full set of representatives of L^x/p.
pub fn is_norm_by_enumeration(k: &LocalField, y: &FieldElement, x: &FieldElement, cap: u64) -> Result<bool> {
    let units = UnitsModP::new(k)?;
    let y = normalized_kummer(y)?;
    if is_pth_power(&y)?.is_some() {
        return Ok(true);
    }
    let ext = adjoin_pth_root(k, &y)?;
    let lu = UnitsModP::new(ext.top())?;
    let p = k.p();
    let dl = lu.dim() as u32;
    let total = p.checked_pow(dl).filter(|&t| t <= cap).ok_or_else(|| {
        Error::CapExceeded(format!("{p}^{dl} representatives exceed the enumeration cap"))
    })?;
    let basis_norms: Vec<Vec<u64>> = lu
        .basis()
        .iter()
        .map(|b| units.decompose(&ext.norm(&b.element)?))
        .collect::<Result<_>>()?;
    let target = units.decompose(x)?;
    let d = units.dim();
    for idx in 0..total {
        let mut t = idx;
        let mut acc = vec![0u64; d];
        for bn in &basis_norms {
            let c = t % p;
            t /= p;
            for (a, b) in acc.iter_mut().zip(bn) {
                *a = (*a + c * b) % p;
            }
        }
        if acc == target {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q2() -> LocalField {
        LocalField::qp(2, 40).unwrap()
    }

    #[test]
    fn q2_basis_and_levels() {
        let k = q2();
        let u = UnitsModP::new(&k).unwrap();
        assert_eq!(u.dim(), 3);
        assert_eq!(u.levels(), vec![Level::Uniformizer, Level::Unit(1), Level::Unit(2)]);
        assert_eq!(u.ubar_level(&k.from_int(5)).unwrap(), Level::Unit(2));
        assert_eq!(u.ubar_level(&k.from_int(-1)).unwrap(), Level::Unit(1));
        assert_eq!(u.ubar_level(&k.from_int(9)).unwrap(), Level::Trivial);
        assert_eq!(u.ubar_level(&k.from_int(17)).unwrap(), Level::Trivial);
        assert_eq!(u.ubar_level(&k.from_int(-3)).unwrap(), Level::Unit(2));
        assert_eq!(u.decompose(&k.from_int(12)).unwrap(), vec![0, 1, 0]);
    }

    #[test]
    fn q2_graded_orders() {
        let k = q2();
        assert_eq!(graded_quotient_order(&k, 0).unwrap(), 1);
        assert_eq!(graded_quotient_order(&k, 1).unwrap(), 2);
        assert_eq!(graded_quotient_order(&k, 2).unwrap(), 2);
        assert_eq!(graded_quotient_order(&k, 3).unwrap(), 1);
    }

    #[test]
    fn without_mu_p() {
        let k = LocalField::qp(3, 30).unwrap();
        let u = UnitsModP::new(&k).unwrap();
        assert_eq!(u.dim(), 2);
        assert!(graded_quotient_order(&k, 1).is_err());
        assert!(is_norm(&k, &k.from_int(2), &k.from_int(3)).unwrap());
    }

    #[test]
    fn q2_norms() {
        let k = q2();
        let m1 = k.from_int(-1);
        assert!(is_norm(&k, &m1, &k.from_int(2)).unwrap());
        assert!(!is_norm(&k, &m1, &m1).unwrap());
        assert!(!is_norm_by_enumeration(&k, &m1, &m1, 1 << 12).unwrap());
        assert!(is_norm_by_enumeration(&k, &m1, &k.from_int(2), 1 << 12).unwrap());
    }

    #[test]
    fn cyclotomic_cube_root_field() {
        let k = LocalField::new(3, 1, Some(&[3, 3, 1].map(BigInt::from)), 40).unwrap();
        let u = UnitsModP::new(&k).unwrap();
        assert_eq!(u.dim(), 4);
        assert_eq!(u.top_level().unwrap(), 3);
        let mut prod = 1;
        for i in 0..6 {
            let a = graded_quotient_order(&k, i).unwrap();
            assert_eq!(a, u.graded_order_from_basis(i));
            prod *= a;
        }
        assert_eq!(prod, 27);
    }
}
