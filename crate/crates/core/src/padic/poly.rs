//! Polynomials over a local field: Newton polygons, roots and Hensel splitting.

use num_rational::Ratio;
use serde::Serialize;

use super::field::{FieldElement, LocalField};
use super::residue::Res;
use crate::error::{exhausted, Error, Result};

#[derive(Clone)]
pub struct Poly {
    field: LocalField,
    coeffs: Vec<FieldElement>,
}

impl std::fmt::Debug for Poly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.coeffs.iter()).finish()
    }
}

/// One segment of a Newton polygon; `slope` is the common valuation of the roots it accounts for.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Segment {
    #[serde(serialize_with = "ser_ratio")]
    pub slope: Ratio<i64>,
    pub length: usize,
}

fn ser_ratio<S: serde::Serializer>(r: &Ratio<i64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{r}"))
}

impl Poly {
    /// Trailing coefficients that are zero to precision are dropped.
    pub fn new(field: &LocalField, mut coeffs: Vec<FieldElement>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { field: field.clone(), coeffs }
    }

    pub fn from_ints(field: &LocalField, c: &[i64]) -> Self {
        Poly::new(field, c.iter().map(|&x| field.from_int(x)).collect())
    }

    pub fn x(field: &LocalField) -> Self {
        Poly::new(field, vec![field.zero(), field.one()])
    }

    pub fn constant(c: FieldElement) -> Self {
        let f = c.field().clone();
        Poly::new(&f, vec![c])
    }

    pub fn field(&self) -> &LocalField {
        &self.field
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> FieldElement {
        self.coeffs.get(i).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or -1 for the zero polynomial.
    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    pub fn deg(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn lead(&self) -> FieldElement {
        self.coeffs.last().cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new(&self.field, (0..n).map(|i| self.coeff(i).add(&o.coeff(i))).collect())
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new(&self.field, (0..n).map(|i| self.coeff(i).sub(&o.coeff(i))).collect())
    }

    pub fn neg(&self) -> Poly {
        Poly::new(&self.field, self.coeffs.iter().map(|c| c.neg()).collect())
    }

    pub fn scale(&self, c: &FieldElement) -> Poly {
        Poly::new(&self.field, self.coeffs.iter().map(|x| x.mul(c)).collect())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::new(&self.field, Vec::new());
        }
        let mut out = vec![self.field.zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_exact_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if !b.is_exact_zero() {
                    out[i + j] = out[i + j].add(&a.mul(b));
                }
            }
        }
        Poly::new(&self.field, out)
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut r = Poly::constant(self.field.one());
        for _ in 0..n {
            r = r.mul(self);
        }
        r
    }

    pub fn eval(&self, x: &FieldElement) -> FieldElement {
        let mut acc = self.field.zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            &self.field,
            self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c.mul_int(i as i64)).collect(),
        )
    }

    /// f(a + b X).
    pub fn compose_linear(&self, a: &FieldElement, b: &FieldElement) -> Poly {
        let lin = Poly::new(&self.field, vec![a.clone(), b.clone()]);
        let mut acc = Poly::new(&self.field, Vec::new());
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&lin).add(&Poly::constant(c.clone()));
        }
        acc
    }

    pub fn compose(&self, g: &Poly) -> Poly {
        let mut acc = Poly::new(&self.field, Vec::new());
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(g).add(&Poly::constant(c.clone()));
        }
        acc
    }

    /// X^deg f(1/X).
    pub fn reverse(&self) -> Poly {
        let mut c = self.coeffs.clone();
        c.reverse();
        Poly::new(&self.field, c)
    }

    pub fn monic(&self) -> Result<Poly> {
        let l = self.lead().inv()?;
        Ok(self.scale(&l))
    }

    /// Division with remainder by a polynomial with invertible leading coefficient.
    pub fn divrem(&self, d: &Poly) -> Result<(Poly, Poly)> {
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let dl = d.lead().inv()?;
        let dn = d.deg();
        let mut r = self.coeffs.clone();
        if r.len() <= dn {
            return Ok((Poly::new(&self.field, Vec::new()), self.clone()));
        }
        let mut q = vec![self.field.zero(); r.len() - dn];
        for k in (0..q.len()).rev() {
            let c = r[k + dn].mul(&dl);
            for (i, dc) in d.coeffs.iter().enumerate() {
                r[k + i] = r[k + i].sub(&c.mul(dc));
            }
            q[k] = c;
        }
        r.truncate(dn);
        Ok((Poly::new(&self.field, q), Poly::new(&self.field, r)))
    }

    /// Minimum coefficient valuation (certified coefficients only).
    pub fn min_valuation(&self) -> Option<i64> {
        self.coeffs.iter().filter_map(|c| c.valuation()).min()
    }

    /// Divide by the coefficient of minimal valuation's uniformizer power so the content is a unit.
    pub fn primitive(&self) -> Poly {
        match self.min_valuation() {
            None => self.clone(),
            Some(v) => Poly::new(&self.field, self.coeffs.iter().map(|c| c.shift(-v)).collect()),
        }
    }

    /// Reduction modulo pi of an integral polynomial (after making it primitive).
    pub fn residual_reduction(&self) -> Result<Vec<Res>> {
        let k = self.field.residue_field();
        let mut out: Vec<Res> = self
            .coeffs
            .iter()
            .map(|c| c.residue())
            .collect::<Result<Vec<_>>>()?;
        k.poly_trim(&mut out);
        Ok(out)
    }

    pub fn newton_polygon(&self) -> Result<Vec<Segment>> {
        Ok(self.hull()?.into_iter().map(|(s, l, _, _)| Segment { slope: s, length: l }).collect())
    }

    /// Hull segments as (root valuation, length, left index, right index), ascending root valuation.
    fn hull(&self) -> Result<Vec<(Ratio<i64>, usize, usize, usize)>> {
        if self.is_zero() {
            return Err(exhausted("Newton polygon of the zero polynomial"));
        }
        let n = self.deg();
        self.lead().val_checked("leading coefficient")?;
        let pts: Vec<(i64, i64)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.valuation().map(|v| (i as i64, v)))
            .collect();
        let mut hull: Vec<(i64, i64)> = Vec::new();
        for &pt in &pts {
            while hull.len() >= 2 {
                let (x1, y1) = hull[hull.len() - 2];
                let (x2, y2) = hull[hull.len() - 1];
                // remove middle point when it lies on or above the chord
                if (y2 - y1) * (pt.0 - x1) >= (pt.1 - y1) * (x2 - x1) {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(pt);
        }
        // Coefficients that are zero to precision must lie strictly above the hull.
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() && !c.is_exact_zero() && (i as i64) > hull[0].0 {
                let i = i as i64;
                let w = hull.windows(2).find(|w| w[0].0 <= i && i <= w[1].0);
                if let Some(w) = w {
                    let (x1, y1) = w[0];
                    let (x2, y2) = w[1];
                    // y on the hull at i is y1 + (y2-y1)(i-x1)/(x2-x1)
                    if (c.val_or_prec() - y1) * (x2 - x1) <= (y2 - y1) * (i - x1) {
                        return Err(exhausted(format!("coefficient {i} not certified above the Newton polygon")));
                    }
                }
            }
        }
        let _ = n;
        let mut segs: Vec<(Ratio<i64>, usize, usize, usize)> = hull
            .windows(2)
            .map(|w| {
                let (x1, y1) = w[0];
                let (x2, y2) = w[1];
                (Ratio::new(-(y2 - y1), x2 - x1), (x2 - x1) as usize, x1 as usize, x2 as usize)
            })
            .collect();
        segs.reverse();
        Ok(segs)
    }

    /// Number of low-order coefficients that are zero (roots at 0).
    pub fn low_zero_gap(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.is_zero()).count()
    }

    /// All roots in the field (each simple root once); errors if a root cluster cannot be resolved.
    pub fn roots(&self) -> Result<Vec<FieldElement>> {
        if self.deg() == 0 {
            return Ok(Vec::new());
        }
        let gap = self.low_zero_gap();
        let mut out = Vec::new();
        let trimmed = if gap > 0 {
            out.push(self.field.zero_to(self.coeffs[gap - 1].val_or_prec()));
            Poly::new(&self.field, self.coeffs[gap..].to_vec())
        } else {
            self.clone()
        };
        if trimmed.deg() == 0 {
            return Ok(out);
        }
        let segs = trimmed.hull()?;
        let has_neg = segs.iter().any(|s| s.0 < Ratio::from_integer(0));
        let has_nonneg = segs.iter().any(|s| s.0 >= Ratio::from_integer(0));
        if has_nonneg {
            out.extend(integral_roots(&trimmed, 0)?);
        }
        if has_neg {
            let rev = trimmed.reverse();
            for y in integral_roots(&rev, 0)? {
                if y.valuation().is_some_and(|v| v > 0) {
                    out.push(y.inv()?);
                }
            }
        }
        Ok(out)
    }

    pub fn has_root(&self) -> Result<bool> {
        Ok(!self.roots()?.is_empty())
    }

    pub fn map_coeffs(&self, target: &LocalField, f: impl Fn(&FieldElement) -> Result<FieldElement>) -> Result<Poly> {
        Ok(Poly::new(target, self.coeffs.iter().map(f).collect::<Result<Vec<_>>>()?))
    }
}

fn newton_lift(f: &Poly, start: &FieldElement) -> Result<FieldElement> {
    let df = f.derivative();
    let mut x = start.clone();
    let target = f.field().cap();
    for _ in 0..64 {
        let fx = f.eval(&x);
        if fx.is_zero() {
            return Ok(x);
        }
        let dfx = df.eval(&x);
        let step = fx.div(&dfx)?;
        if step.is_zero() || step.val_or_prec() >= target + x.val_or_prec().max(0) {
            return Ok(x.sub(&step));
        }
        x = x.sub(&step);
    }
    Err(exhausted("Newton iteration for a root did not converge"))
}

fn integral_roots(f: &Poly, depth: usize) -> Result<Vec<FieldElement>> {
    let field = f.field().clone();
    if depth > field.cap() as usize + 2 {
        return Err(exhausted("root cluster not separated at working precision"));
    }
    let g = f.primitive();
    let gbar = g.residual_reduction()?;
    if gbar.len() <= 1 {
        return Ok(Vec::new());
    }
    let k = field.residue_field();
    let factors = k.factor(&gbar)?;
    let mut out = Vec::new();
    let pi = field.uniformizer();
    for (fac, mult) in factors {
        if fac.len() != 2 {
            continue;
        }
        let rbar = k.neg(&fac[0]);
        let r = field.lift_residue(&rbar);
        if mult == 1 {
            out.push(newton_lift(&g, &r)?);
        } else {
            let h = g.compose_linear(&r, &pi);
            if h.is_zero() {
                return Err(exhausted("polynomial vanished under substitution"));
            }
            for y in integral_roots(&h, depth + 1)? {
                out.push(r.add(&pi.mul(&y)));
            }
        }
    }
    Ok(out)
}

// ---------------- factor splitting ----------------

/// Split f into factors: one per Newton polygon slope, refined by coprime residual factorizations.
pub fn hensel_split(f: &Poly) -> Result<Vec<Poly>> {
    let mut out = Vec::new();
    let lc = f.lead();
    let monic = f.monic()?;
    let gap = monic.low_zero_gap();
    let mut rest = monic.clone();
    if gap > 0 {
        out.push(Poly::x(f.field()).pow(gap as u32));
        rest = Poly::new(f.field(), monic.coeffs[gap..].to_vec());
    }
    for g in slope_split(&rest)? {
        out.extend(residual_split(&g)?);
    }
    if let Some(first) = out.first_mut() {
        *first = first.scale(&lc);
    }
    Ok(out)
}

/// Like `hensel_split`, but a factor whose roots all share one residue class is translated by a
/// lift of that class and split again.
pub fn deep_split(f: &Poly) -> Result<Vec<Poly>> {
    deep_split_at(f, 0)
}

fn deep_split_at(f: &Poly, depth: i64) -> Result<Vec<Poly>> {
    let mut out = Vec::new();
    for g in hensel_split(f)? {
        if g.deg() <= 1 || depth > 2 * f.field().cap() || g.low_zero_gap() > 0 {
            out.push(g);
            continue;
        }
        let r = residual_polynomial(&g)?;
        let k = g.field().residue_field();
        let fac = k.factor(&r.poly)?;
        let cluster = match fac.as_slice() {
            [(phi, m)] if r.e == 1 && *m > 1 && phi.len() == 2 => k.inv(&phi[1]).map(|i| k.neg(&k.mul(&phi[0], &i))),
            _ => None,
        };
        let Some(a) = cluster else {
            out.push(g);
            continue;
        };
        let field = g.field().clone();
        let c = field.lift_residue(&a).shift(r.h);
        let moved = g.compose_linear(&c, &field.one());
        let parts = deep_split_at(&moved, depth + 1)?;
        if parts.len() == 1 {
            out.push(g);
            continue;
        }
        for h in parts {
            out.push(h.compose_linear(&c.neg(), &field.one()).monic()?);
        }
    }
    Ok(out)
}

/// Monic factors of a monic polynomial, one per slope.
fn slope_split(f: &Poly) -> Result<Vec<Poly>> {
    if f.deg() == 0 {
        return Ok(Vec::new());
    }
    let segs = f.hull()?;
    if segs.len() == 1 {
        return Ok(vec![f.clone()]);
    }
    // segs ascending in root valuation; the last one is leftmost (indices 0..k)
    let (_, _, _, k) = segs[segs.len() - 1];
    let ak = f.coeff(k).inv()?;
    let g0 = Poly::new(f.field(), (0..=k).map(|i| f.coeff(i).mul(&ak)).collect());
    let g = refine_factor(f, g0)?;
    let (h, _) = f.divrem(&g)?;
    let mut out = slope_split(&h)?;
    out.push(g);
    Ok(out)
}

/// Residual polynomial data for a single-slope monic polynomial.
pub struct Residual {
    pub e: usize,
    pub h: i64,
    pub poly: Vec<Res>,
}

pub fn residual_polynomial(f: &Poly) -> Result<Residual> {
    let segs = f.hull()?;
    if segs.len() != 1 {
        return Err(Error::InvalidField("residual polynomial needs a single slope".into()));
    }
    let s = segs[0].0;
    let (h, e) = (*s.numer(), *s.denom() as usize);
    let n = f.deg();
    let m = n / e;
    let k = f.field().residue_field();
    let mut poly = Vec::with_capacity(m + 1);
    for j in 0..=m {
        let c = f.coeff(j * e);
        // the root product normalization: coefficient of X^{je} has valuation >= h (m - j)
        let shifted = c.shift(-(h * (m - j) as i64));
        poly.push(if c.is_zero() { k.zero() } else { shifted.residue()? });
    }
    Ok(Residual { e, h, poly })
}

fn residual_split(f: &Poly) -> Result<Vec<Poly>> {
    if f.deg() <= 1 {
        return Ok(vec![f.clone()]);
    }
    let r = residual_polynomial(f)?;
    let k = f.field().residue_field();
    let fac = k.factor(&r.poly)?;
    if fac.len() <= 1 {
        return Ok(vec![f.clone()]);
    }
    let mut out = Vec::new();
    let mut rest = f.clone();
    for (phi, mult) in fac.iter().take(fac.len() - 1) {
        let mut pw = vec![k.one()];
        for _ in 0..*mult {
            pw = k.poly_mul(&pw, phi);
        }
        let g0 = lift_residual(f.field(), &pw, r.e, r.h);
        let g = refine_factor(&rest, g0)?;
        rest = rest.divrem(&g)?.0;
        out.push(g);
    }
    out.push(rest);
    Ok(out)
}

/// Monic polynomial G(X) = pi^{h d} Phi(X^e / pi^h) for a residue polynomial Phi of degree d.
fn lift_residual(field: &LocalField, phi: &[Res], e: usize, h: i64) -> Poly {
    let d = phi.len() - 1;
    let mut c = vec![field.zero(); e * d + 1];
    for (j, a) in phi.iter().enumerate() {
        c[j * e] = field.lift_residue(a).shift(h * (d - j) as i64);
    }
    c[e * d] = field.one();
    Poly::new(field, c)
}

/// Newton iteration for a monic factor of f starting near g0.
fn refine_factor(f: &Poly, g0: Poly) -> Result<Poly> {
    let field = f.field().clone();
    let mut g = g0.monic()?;
    let k = g.deg();
    if k == 0 || k == f.deg() {
        return Ok(if k == 0 { g } else { f.monic()? });
    }
    let mut last_err = i64::MIN;
    for _ in 0..200 {
        let (h, r) = f.divrem(&g)?;
        let err = r.coeffs.iter().map(|c| c.val_or_prec()).min().unwrap_or(i64::MAX);
        if r.is_zero() {
            return Ok(g);
        }
        // multiplication by h on K[X]/(g) in the monomial basis
        let mut cols = Vec::with_capacity(k);
        let mut cur = h.divrem(&g)?.1;
        for _ in 0..k {
            cols.push((0..k).map(|i| cur.coeff(i)).collect::<Vec<_>>());
            cur = cur.mul(&Poly::x(&field)).divrem(&g)?.1;
        }
        let rhs: Vec<FieldElement> = (0..k).map(|i| r.coeff(i)).collect();
        let delta = solve_linear(&cols, &rhs)?;
        let dpoly = Poly::new(&field, delta);
        g = g.add(&dpoly);
        if err <= last_err && err > i64::MIN {
            // no progress in the certified error
            let (_, r2) = f.divrem(&g)?;
            if !r2.is_zero() && r2.coeffs.iter().map(|c| c.val_or_prec()).min().unwrap_or(i64::MAX) <= err {
                return Err(exhausted("Hensel lifting stalled"));
            }
        }
        last_err = err;
    }
    Err(exhausted("Hensel lifting did not converge"))
}

/// Solve sum_j cols[j] * x_j = rhs over a local field by valuation-pivoted elimination.
pub fn solve_linear(cols: &[Vec<FieldElement>], rhs: &[FieldElement]) -> Result<Vec<FieldElement>> {
    Ok(solve_many(cols, &[rhs.to_vec()])?.pop().unwrap())
}

/// Solve for several right-hand sides at once; the system must have full column rank.
pub fn solve_many(cols: &[Vec<FieldElement>], rhss: &[Vec<FieldElement>]) -> Result<Vec<Vec<FieldElement>>> {
    let m = cols.len();
    let n = cols[0].len();
    let nr = rhss.len();
    let mut a: Vec<Vec<FieldElement>> = (0..n)
        .map(|i| {
            let mut row: Vec<FieldElement> = (0..m).map(|j| cols[j][i].clone()).collect();
            row.extend(rhss.iter().map(|r| r[i].clone()));
            row
        })
        .collect();
    let mut piv_cols = Vec::new();
    let mut row = 0;
    for c in 0..m {
        let best = (row..n).filter(|&i| !a[i][c].is_zero()).min_by_key(|&i| a[i][c].val_or_prec());
        let Some(pr) = best else {
            return Err(exhausted("singular linear system"));
        };
        a.swap(row, pr);
        let inv = a[row][c].inv()?;
        for i in 0..n {
            if i != row && !a[i][c].is_zero() {
                let fct = a[i][c].mul(&inv);
                for j in c..m + nr {
                    let t = fct.mul(&a[row][j]);
                    a[i][j] = a[i][j].sub(&t);
                }
            }
        }
        piv_cols.push(c);
        row += 1;
    }
    let zero = a[0][0].field().zero();
    (0..nr)
        .map(|k| {
            let mut x = vec![zero.clone(); m];
            for (r, &c) in piv_cols.iter().enumerate() {
                x[c] = a[r][m + k].div(&a[r][c])?;
            }
            Ok(x)
        })
        .collect()
}

/// Determinant by valuation-pivoted elimination.
pub fn determinant(rows: &[Vec<FieldElement>]) -> Result<FieldElement> {
    let n = rows.len();
    let field = rows[0][0].field().clone();
    let mut a = rows.to_vec();
    let mut det = field.one();
    for c in 0..n {
        let best = (c..n).filter(|&i| !a[i][c].is_zero()).min_by_key(|&i| a[i][c].val_or_prec());
        let Some(pr) = best else {
            // column is zero to precision: determinant is zero to some precision
            let bound = (c..n).map(|i| a[i][c].val_or_prec()).min().unwrap_or(0);
            return Ok(field.zero_to(det.val_or_prec() + bound));
        };
        if pr != c {
            a.swap(pr, c);
            det = det.neg();
        }
        let inv = a[c][c].inv()?;
        det = det.mul(&a[c][c]);
        for i in c + 1..n {
            if !a[i][c].is_zero() {
                let fct = a[i][c].mul(&inv);
                for j in c..n {
                    let t = fct.mul(&a[c][j]);
                    a[i][j] = a[i][j].sub(&t);
                }
            }
        }
    }
    Ok(det)
}

/// Whether a monic single-slope polynomial is certified irreducible (residual polynomial irreducible).
pub fn is_regular_irreducible(f: &Poly) -> Result<bool> {
    if f.deg() <= 1 {
        return Ok(true);
    }
    let segs = f.hull()?;
    if segs.len() != 1 {
        return Ok(false);
    }
    let r = residual_polynomial(f)?;
    let k = f.field().residue_field();
    let fac = k.factor(&r.poly)?;
    Ok(fac.len() == 1 && fac[0].1 == 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: u64) -> LocalField {
        LocalField::qp(p, 30).unwrap()
    }

    #[test]
    fn polygon_examples() {
        let k = q(5);
        let f = Poly::from_ints(&k, &[-5, 0, 1]);
        assert_eq!(f.newton_polygon().unwrap(), vec![Segment { slope: Ratio::new(1, 2), length: 2 }]);
        let g = Poly::from_ints(&k, &[5, -6, 1]);
        assert_eq!(
            g.newton_polygon().unwrap(),
            vec![
                Segment { slope: Ratio::from_integer(0), length: 1 },
                Segment { slope: Ratio::from_integer(1), length: 1 }
            ]
        );
    }

    #[test]
    fn split_examples() {
        let k3 = q(3);
        let f = Poly::from_ints(&k3, &[-1, 0, 1]);
        let fac = hensel_split(&f).unwrap();
        assert_eq!(fac.len(), 2);
        let k7 = q(7);
        let g = Poly::from_ints(&k7, &[-2, 0, 1]);
        let fac = hensel_split(&g).unwrap();
        assert_eq!(fac.len(), 2);
        let prod = fac[0].mul(&fac[1]);
        assert!(prod.sub(&g).is_zero());
        let k5 = q(5);
        let h = Poly::from_ints(&k5, &[-2, 0, 1]);
        assert_eq!(hensel_split(&h).unwrap().len(), 1);
        assert!(is_regular_irreducible(&h).unwrap());
    }

    #[test]
    fn roots_of_unity_and_sqrt() {
        let k7 = q(7);
        let g = Poly::from_ints(&k7, &[-2, 0, 1]);
        let roots = g.roots().unwrap();
        assert_eq!(roots.len(), 2);
        for r in &roots {
            assert!(r.square().eq_approx(&k7.from_int(2)));
        }
        let k5 = q(5);
        let cyc = Poly::from_ints(&k5, &[-1, 0, 0, 0, 1]);
        assert_eq!(cyc.roots().unwrap().len(), 4);
    }

    #[test]
    fn roots_with_negative_valuation_and_clusters() {
        let k = q(3);
        // (3x - 1)(x - 1)(x - 10): roots 1/3, 1, 10 (1 and 10 agree mod 9)
        let f = Poly::from_ints(&k, &[-1, 3]).mul(&Poly::from_ints(&k, &[-1, 1])).mul(&Poly::from_ints(&k, &[-10, 1]));
        let roots = f.roots().unwrap();
        assert_eq!(roots.len(), 3);
        let mut vals: Vec<i64> = roots.iter().map(|r| r.valuation().unwrap()).collect();
        vals.sort();
        assert_eq!(vals, vec![-1, 0, 0]);
        for r in &roots {
            assert!(f.eval(r).is_zero());
        }
    }

    #[test]
    fn slope_split_mixed() {
        let k = q(2);
        // (x^2 - 2)(x - 4)(x - 1)
        let f = Poly::from_ints(&k, &[-2, 0, 1]).mul(&Poly::from_ints(&k, &[-4, 1])).mul(&Poly::from_ints(&k, &[-1, 1]));
        let fac = hensel_split(&f).unwrap();
        let degs: Vec<usize> = fac.iter().map(|g| g.deg()).collect();
        assert_eq!(degs.iter().sum::<usize>(), 4);
        assert_eq!(fac.len(), 3);
        let prod = fac.iter().skip(1).fold(fac[0].clone(), |a, b| a.mul(b));
        assert!(prod.sub(&f).is_zero());
    }

    #[test]
    fn residual_split_same_slope() {
        let k = q(3);
        // x^2 - 3 and x^2 - 6 share slope 1/2 with residual polynomials Z - 1 and Z - 2
        let f = Poly::from_ints(&k, &[-3, 0, 1]).mul(&Poly::from_ints(&k, &[-6, 0, 1]));
        let fac = hensel_split(&f).unwrap();
        assert_eq!(fac.len(), 2);
        assert!(fac.iter().all(|g| g.deg() == 2));
        assert!(fac[0].mul(&fac[1]).sub(&f).is_zero());
    }

    #[test]
    fn determinant_small() {
        let k = q(5);
        let m = vec![
            vec![k.from_int(2), k.from_int(5)],
            vec![k.from_int(1), k.from_int(3)],
        ];
        assert!(determinant(&m).unwrap().eq_approx(&k.from_int(1)));
    }
}
