//! Tate curves E_q : y^2 + xy = x^3 + a4(q) x + a6(q) and recovery of q from j.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use super::weierstrass::WeierstrassCurve;
use crate::error::{Error, Result};
use crate::padic::{contains_mu_p, is_pth_power, zeta_p, FieldElement, LocalField};

fn sigma(n: u64, k: u32) -> BigInt {
    let mut s = BigInt::zero();
    for d in 1..=n {
        if n % d == 0 {
            s += BigInt::from(d).pow(k);
        }
    }
    s
}

/// Number of q-expansion terms that matter at the field's precision.
fn terms(k: &LocalField, q: &FieldElement) -> Result<u64> {
    let v = q.val_checked("q")?;
    if v <= 0 {
        return Err(Error::HypothesisFailed("q must lie in the maximal ideal".into()));
    }
    Ok((k.cap() / v + 2) as u64)
}

/// sum_{n >= 1} c(n) q^n
fn q_sum(k: &LocalField, q: &FieldElement, c: impl Fn(u64) -> BigInt) -> Result<FieldElement> {
    let n = terms(k, q)?;
    let mut acc = k.zero();
    let mut qn = k.one();
    for i in 1..=n {
        qn = qn.mul(q);
        if qn.is_zero() {
            break;
        }
        acc = acc.add(&qn.mul(&k.from_bigint(&c(i))));
    }
    Ok(acc)
}

pub fn tate_coefficients(k: &LocalField, q: &FieldElement) -> Result<(FieldElement, FieldElement)> {
    let a4 = q_sum(k, q, |n| -BigInt::from(5) * sigma(n, 3))?;
    let a6 = q_sum(k, q, |n| -(BigInt::from(5) * sigma(n, 3) + BigInt::from(7) * sigma(n, 5)) / BigInt::from(12))?;
    Ok((a4, a6))
}

pub fn tate_curve(k: &LocalField, q: &FieldElement) -> Result<WeierstrassCurve> {
    let (a4, a6) = tate_coefficients(k, q)?;
    WeierstrassCurve::new(k, [k.one(), k.zero(), k.zero(), a4, a6])
}

/// j(q) = c4(q)^3 / (q prod (1 - q^n)^24)
pub fn j_of_q(k: &LocalField, q: &FieldElement) -> Result<FieldElement> {
    let (c4, prod) = c4_and_product(k, q)?;
    c4.pow_u(3).div(&q.mul(&prod))
}

fn c4_and_product(k: &LocalField, q: &FieldElement) -> Result<(FieldElement, FieldElement)> {
    let c4 = k.one().add(&q_sum(k, q, |n| BigInt::from(240) * sigma(n, 3))?);
    let n = terms(k, q)?;
    let mut prod = k.one();
    let mut qn = k.one();
    for _ in 1..=n {
        qn = qn.mul(q);
        if qn.is_zero() {
            break;
        }
        prod = prod.mul(&k.one().sub(&qn));
    }
    Ok((c4, prod.pow_u(24)))
}

/// All p-th roots of x in K.
fn pth_roots(x: &FieldElement) -> Result<Vec<FieldElement>> {
    let k = x.field();
    let Some(r) = is_pth_power(x)? else { return Ok(Vec::new()) };
    if !contains_mu_p(k)? {
        return Ok(vec![r]);
    }
    let z = zeta_p(k)?;
    let mut out = vec![r];
    for _ in 1..k.p() {
        let next = out.last().unwrap().mul(&z);
        out.push(next);
    }
    Ok(out)
}

/// (r, s) with x = r^(p^s) and s as large as possible.
fn deepest_root(x: &FieldElement) -> Result<(FieldElement, u32)> {
    let mut best = (x.clone(), 0);
    for r in pth_roots(x)? {
        let (rr, s) = deepest_root(&r)?;
        if s + 1 > best.1 {
            best = (rr, s + 1);
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, Serialize)]
pub struct TateParameter {
    #[serde(skip)]
    pub q: FieldElement,
    /// q = root^(p^s) with root not a p-th power
    #[serde(skip)]
    pub root: FieldElement,
    pub s: u32,
    pub valuation: i64,
    pub root_valuation: i64,
}

/// The Tate parameter of a curve with split multiplicative reduction, from its j-invariant.
pub fn tate_parameter(e: &WeierstrassCurve) -> Result<TateParameter> {
    let k = e.field();
    let j = e.j_invariant()?;
    let vj = j.val_checked("j")?;
    if vj >= 0 {
        return Err(Error::HypothesisFailed("v(j) must be negative".into()));
    }
    let jinv = j.inv()?;
    let mut q = jinv.clone();
    let mut stable = false;
    for _ in 0..(k.cap() + 4) {
        let (c4, prod) = c4_and_product(k, &q)?;
        let next = jinv.mul(&c4.pow_u(3)).div(&prod)?;
        if next.eq_approx(&q) && next.sub(&q).val_or_prec() >= k.cap() + vj.abs() {
            q = next;
            stable = true;
            break;
        }
        q = next;
    }
    if !stable {
        return Err(Error::PrecisionExhausted("q-iteration did not stabilize".into()));
    }
    let valuation = q.val_checked("q")?;
    if valuation != -vj {
        return Err(Error::PrecisionExhausted("v(q) differs from -v(j)".into()));
    }
    let back = j_of_q(k, &q)?;
    if !back.eq_approx(&j) {
        return Err(Error::PrecisionExhausted("j(q) does not reproduce j".into()));
    }
    let (root, s) = deepest_root(&q)?;
    let root_valuation = root.val_checked("q root")?;
    Ok(TateParameter { q, root, s, valuation, root_valuation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::reduction::{classify_reduction, ReductionType};

    #[test]
    fn coefficients_are_integral_series() {
        assert_eq!(sigma(6, 3), BigInt::from(1 + 8 + 27 + 216));
        for n in 1..30u64 {
            let t = BigInt::from(5) * sigma(n, 3) + BigInt::from(7) * sigma(n, 5);
            assert!((t % BigInt::from(12)).is_zero());
        }
    }

    #[test]
    fn round_trips() {
        let k = LocalField::qp(3, 40).unwrap();
        let cases = [k.from_int(3), k.from_int(9), k.from_int(3 * 4), k.from_int(27 * 2), k.from_int(3 * 7).mul(&k.from_int(5))];
        for q0 in cases {
            let e = tate_curve(&k, &q0).unwrap();
            let t = tate_parameter(&e).unwrap();
            assert!(t.q.eq_approx(&q0), "{q0:?} -> {:?}", t.q);
            assert_eq!(t.valuation, q0.valuation().unwrap());
        }
    }

    #[test]
    fn split_multiplicative_and_pth_powers() {
        let k = LocalField::qp(2, 40).unwrap();
        let q0 = k.from_int(16);
        let e = tate_curve(&k, &q0).unwrap();
        let (d, _) = classify_reduction(&e).unwrap();
        assert_eq!(d.kind, ReductionType::SplitMultiplicative);
        assert_eq!(d.nonsingular_count, Some(1));
        let t = tate_parameter(&e).unwrap();
        assert_eq!(t.s, 2);
        assert_eq!(t.root_valuation, 1);
        let q1 = k.from_int(2);
        let t = tate_parameter(&tate_curve(&k, &q1).unwrap()).unwrap();
        assert_eq!(t.s, 0);
    }
}
