//! p-th powers, roots of unity and the standard extension constructors.

use super::ext::{adjoin_root_as, Extension};
use super::field::{FieldElement, LocalField, StepKind};
use super::poly::{hensel_split, Poly};
use super::residue::Res;
use crate::error::{Error, Result};

/// A p-th root of x when x is a p-th power in K.
pub fn is_pth_power(x: &FieldElement) -> Result<Option<FieldElement>> {
    nth_root(x, x.field().p())
}

pub fn nth_root(x: &FieldElement, n: u64) -> Result<Option<FieldElement>> {
    let k = x.field();
    let v = x.valuation().ok_or(Error::DivisionByZero)?;
    if v.rem_euclid(n as i64) != 0 {
        return Ok(None);
    }
    let mut c = vec![k.zero(); n as usize + 1];
    c[0] = x.neg();
    c[n as usize] = k.one();
    let roots = Poly::new(k, c).roots()?;
    Ok(roots.into_iter().next())
}

pub fn contains_mu_p(k: &LocalField) -> Result<bool> {
    Ok(zeta_p(k).is_ok())
}

fn cyclotomic_p(k: &LocalField) -> Poly {
    Poly::new(k, vec![k.one(); k.p() as usize])
}

/// A primitive p-th root of unity in K.
pub fn zeta_p(k: &LocalField) -> Result<FieldElement> {
    let p = k.p();
    if p == 2 {
        return Ok(k.from_int(-1));
    }
    if k.e() % (p as usize - 1) != 0 {
        return Err(Error::MuPNotContained);
    }
    cyclotomic_p(k).roots()?.into_iter().next().ok_or(Error::MuPNotContained)
}

/// e_K / (p - 1), defined when mu_p is contained in K.
pub fn e0(k: &LocalField) -> Result<usize> {
    if !contains_mu_p(k)? {
        return Err(Error::MuPNotContained);
    }
    Ok(k.e() / (k.p() as usize - 1))
}

/// K(u^{1/p}) for u not a p-th power.
pub fn adjoin_pth_root(k: &LocalField, u: &FieldElement) -> Result<Extension> {
    let p = k.p() as usize;
    let mut c = vec![k.zero(); p + 1];
    c[0] = u.neg();
    c[p] = k.one();
    adjoin_root_as(k, &Poly::new(k, c), StepKind::Kummer, format!("p-th root of {u:?}"))
}

/// A monic irreducible polynomial of degree d over the residue field of K, smallest in index order.
pub fn residue_irreducible(k: &LocalField, d: usize) -> Result<Vec<Res>> {
    let kr = k.residue_field();
    let q = kr.order();
    let total = q.checked_pow(d as u32).ok_or_else(|| Error::CapExceeded("residue search".into()))?;
    for idx in 0..total {
        let mut c: Vec<Res> = Vec::with_capacity(d + 1);
        let mut t = idx;
        for _ in 0..d {
            c.push(kr.from_index(t % q));
            t /= q;
        }
        c.push(kr.one());
        if kr.is_zero(&c[0]) {
            continue;
        }
        let fac = kr.factor(&c)?;
        if fac.len() == 1 && fac[0].1 == 1 && fac[0].0.len() == d + 1 {
            return Ok(c);
        }
    }
    Err(Error::CapExceeded("no irreducible residue polynomial found".into()))
}

/// The unramified extension of K of degree d.
pub fn unramified_extension(k: &LocalField, d: usize) -> Result<Extension> {
    let c = residue_irreducible(k, d)?;
    let g = Poly::new(k, c.iter().map(|r| k.lift_residue(r)).collect());
    adjoin_root_as(k, &g, StepKind::Unramified, format!("unramified of degree {d}"))
}

/// K(mu_p), or `None` when mu_p is already contained in K.
pub fn adjoin_mu_p(k: &LocalField) -> Result<Option<Extension>> {
    if contains_mu_p(k)? {
        return Ok(None);
    }
    let phi = cyclotomic_p(k);
    let factors = hensel_split(&phi)?;
    let g = factors.into_iter().max_by_key(|f| f.deg()).unwrap();
    Ok(Some(adjoin_root_as(k, &g, StepKind::MuP, "p-th roots of unity".into())?))
}

/// (N_{L/K}(x), Tr_{L/K}(x)).
pub fn norm_trace(ext: &Extension, x: &FieldElement) -> Result<(FieldElement, FieldElement)> {
    Ok((ext.norm(x)?, ext.trace(x)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q3_zeta3(n: i64) -> LocalField {
        LocalField::new(3, 1, Some(&[3, 3, 1].map(BigInt::from)), n).unwrap()
    }

    #[test]
    fn pth_powers() {
        let k = LocalField::qp(3, 30).unwrap();
        let r = is_pth_power(&k.from_int(28)).unwrap().unwrap();
        assert!(r.pow_u(3).eq_approx(&k.from_int(28)));
        assert!(is_pth_power(&k.from_int(3)).unwrap().is_none());
        assert!(is_pth_power(&k.from_int(2)).unwrap().is_none());
        let k2 = LocalField::qp(2, 30).unwrap();
        assert!(is_pth_power(&k2.from_int(17)).unwrap().is_some());
        assert!(is_pth_power(&k2.from_int(5)).unwrap().is_none());
        assert!(is_pth_power(&k2.from_int(-1)).unwrap().is_none());
    }

    #[test]
    fn roots_of_unity() {
        assert_eq!(e0(&LocalField::qp(2, 20).unwrap()).unwrap(), 1);
        assert_eq!(e0(&q3_zeta3(30)).unwrap(), 1);
        assert_eq!(e0(&LocalField::qp(3, 20).unwrap()).unwrap_err(), Error::MuPNotContained);
        let k = q3_zeta3(30);
        let z = zeta_p(&k).unwrap();
        assert!(z.pow_u(3).eq_approx(&k.one()));
        assert_eq!(z.sub(&k.one()).valuation(), Some(1));
    }

    #[test]
    fn constructors() {
        let k = LocalField::qp(3, 30).unwrap();
        let ext = adjoin_mu_p(&k).unwrap().unwrap();
        assert_eq!((ext.e_rel(), ext.f_rel()), (2, 1));
        assert!(contains_mu_p(ext.top()).unwrap());
        let u = unramified_extension(&k, 3).unwrap();
        assert_eq!((u.e_rel(), u.f_rel()), (1, 3));
        let k2 = LocalField::qp(2, 30).unwrap();
        let kum = adjoin_pth_root(&k2, &k2.from_int(5)).unwrap();
        assert_eq!((kum.e_rel(), kum.f_rel()), (1, 2));
        let five = kum.embed(&k2.from_int(5)).unwrap();
        assert!(is_pth_power(&five).unwrap().is_some());
        assert_eq!(adjoin_pth_root(&k2, &k2.from_int(9)).unwrap_err(), Error::Reducible);
    }
}
