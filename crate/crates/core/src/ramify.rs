//! Hasse-Herbrand functions of degree-p Kummer extensions, kept as exact piecewise-linear data.

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::padic::kummer::{is_pth_power, zeta_p};
use crate::padic::{FieldElement, LocalField};
use crate::units::{Level, UnitsModP};

type Q = Ratio<i64>;

fn q(n: i64) -> Q {
    Q::from_integer(n)
}

fn ser_ratio<S: Serializer>(v: &[(Q, Q)], s: S) -> std::result::Result<S::Ok, S::Error> {
    let strs: Vec<(String, String)> = v.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    strs.serialize(s)
}

/// A continuous increasing piecewise-linear map with psi(0) = 0. `slopes[k]` applies from
/// `vertices[k]` up to the next vertex (the last one forever).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PsiFunction {
    #[serde(serialize_with = "ser_ratio")]
    vertices: Vec<(Q, Q)>,
    slopes: Vec<i64>,
}

impl PsiFunction {
    pub fn identity() -> Self {
        PsiFunction { vertices: vec![(q(0), q(0))], slopes: vec![1] }
    }

    /// Build from breakpoints t_1 < t_2 < ... and the slopes on [0,t_1], [t_1,t_2], ...
    pub fn from_breaks(breaks: &[Q], slopes: &[i64]) -> Result<Self> {
        if slopes.len() != breaks.len() + 1 || slopes.iter().any(|&s| s <= 0) {
            return Err(Error::Unsupported("malformed piecewise-linear data".into()));
        }
        let mut vertices = vec![(q(0), q(0))];
        for (k, &t) in breaks.iter().enumerate() {
            let (t0, y0) = vertices[k];
            if t <= t0 {
                return Err(Error::Unsupported("breakpoints must increase".into()));
            }
            vertices.push((t, y0 + (t - t0) * slopes[k]));
        }
        Ok(PsiFunction { vertices, slopes: slopes.to_vec() }.simplified())
    }

    fn simplified(mut self) -> Self {
        let mut k = 1;
        while k < self.vertices.len() {
            if self.slopes[k] == self.slopes[k - 1] {
                self.vertices.remove(k);
                self.slopes.remove(k);
            } else {
                k += 1;
            }
        }
        self
    }

    pub fn vertices(&self) -> &[(Q, Q)] {
        &self.vertices
    }
    pub fn slopes(&self) -> &[i64] {
        &self.slopes
    }

    /// Points of (0, oo) where the function is not differentiable.
    pub fn breaks(&self) -> Vec<Q> {
        self.vertices[1..].iter().map(|v| v.0).collect()
    }

    fn piece(&self, t: Q) -> usize {
        self.vertices.iter().rposition(|v| v.0 <= t).unwrap_or(0)
    }

    pub fn eval(&self, t: Q) -> Q {
        let k = self.piece(t);
        let (t0, y0) = self.vertices[k];
        y0 + (t - t0) * self.slopes[k]
    }

    /// The t with psi(t) = y, for y >= 0.
    pub fn inverse(&self, y: Q) -> Q {
        let k = self.vertices.iter().rposition(|v| v.1 <= y).unwrap_or(0);
        let (t0, y0) = self.vertices[k];
        t0 + (y - y0) / self.slopes[k]
    }

    /// outer after inner.
    pub fn compose(outer: &PsiFunction, inner: &PsiFunction) -> PsiFunction {
        let mut pts: Vec<Q> = inner.breaks();
        pts.extend(outer.breaks().into_iter().map(|b| inner.inverse(b)));
        pts.sort();
        pts.dedup();
        let mut slopes = Vec::with_capacity(pts.len() + 1);
        let mut left = q(0);
        for &t in pts.iter().chain(std::iter::once(&(pts.last().copied().unwrap_or(q(0)) + 1))) {
            let mid = (left + t) / 2;
            let s_in = inner.slopes[inner.piece(mid)];
            let s_out = outer.slopes[outer.piece(inner.eval(mid))];
            slopes.push(s_in * s_out);
            left = t;
        }
        PsiFunction::from_breaks(&pts, &slopes).expect("composite of valid functions")
    }

    /// Whether every slope is a power of p and slopes do not decrease.
    pub fn well_formed(&self, p: i64) -> bool {
        let pow = |mut s: i64| {
            while s % p == 0 {
                s /= p;
            }
            s == 1
        };
        self.slopes.iter().all(|&s| pow(s)) && self.slopes.windows(2).all(|w| w[0] <= w[1])
    }
}

fn check_mu_p(k: &LocalField) -> Result<()> {
    zeta_p(k).map(|_| ())
}

/// psi for K(u^{1/p})/K with u at level i, from the ramification index e_K.
pub fn psi_kummer_unit_raw(p: i64, e_k: i64, i: i64) -> Result<PsiFunction> {
    if e_k % (p - 1) != 0 {
        return Err(Error::MuPNotContained);
    }
    let top = p * e_k / (p - 1);
    if i <= 0 || i >= top || i % p == 0 {
        return Err(Error::BadLevel(format!("level {i} must be coprime to {p} and in (0, {top})")));
    }
    PsiFunction::from_breaks(&[q(top - i)], &[1, p])
}

pub fn psi_kummer_unit(k: &LocalField, i: i64) -> Result<PsiFunction> {
    check_mu_p(k)?;
    psi_kummer_unit_raw(k.p() as i64, k.e() as i64, i)
}

/// psi for K(pi_K^{1/p})/K.
pub fn psi_uniformizer(k: &LocalField) -> Result<PsiFunction> {
    check_mu_p(k)?;
    let p = k.p() as i64;
    PsiFunction::from_breaks(&[q(p * k.e() as i64 / (p - 1))], &[1, p])
}

/// The three-piece function of the two-step tower K(u^{1/p}, u^{1/p^2}), written out directly.
pub fn psi_tower_closed_form(p: i64, e_k: i64, i: i64) -> Result<PsiFunction> {
    psi_kummer_unit_raw(p, e_k, i)?;
    let e0 = e_k / (p - 1);
    let b1 = q(p * e0 - i);
    let b2 = q(p * e0 + e_k - i);
    let f = PsiFunction::from_breaks(&[b1, b2], &[1, p, p * p])?;
    debug_assert_eq!(f.eval(b2 + 1), (b2 + 1) * (p * p) - 2 * p * p * e_k + (p * p - 1) * i);
    Ok(f)
}

/// Recover the level j of the second Kummer step from the composite and the first step.
pub fn extract_second_level(composite: &PsiFunction, first: &PsiFunction, p: i64, e_k: i64) -> Result<i64> {
    let first_break = first.breaks();
    let second = composite
        .breaks()
        .into_iter()
        .find(|b| !first_break.contains(b))
        .ok_or_else(|| Error::HypothesisFailed("composite has no second break".into()))?;
    let e0 = e_k / (p - 1);
    let j = q(p * p * e0) - first.eval(second);
    if !j.is_integer() {
        return Err(Error::HypothesisFailed("non-integral level".into()));
    }
    Ok(j.to_integer())
}

/// The level of v = u^{1/p} over K(v), given the level i of u.
pub fn level_after_proot(k: &LocalField, i: i64) -> Result<i64> {
    let z = zeta_p(k).map_err(|_| Error::HypothesisFailed("needs p^2-th roots of unity".into()))?;
    if is_pth_power(&z)?.is_none() {
        return Err(Error::HypothesisFailed("needs p^2-th roots of unity".into()));
    }
    psi_kummer_unit(k, i)?;
    Ok(i)
}

/// The same level read off a filtered basis of K(u^{1/p}).
pub fn level_after_proot_computed(k: &LocalField, u: &FieldElement) -> Result<Level> {
    let ext = crate::padic::kummer::adjoin_pth_root(k, u)?;
    let lu = UnitsModP::new(ext.top())?;
    lu.ubar_level(ext.root())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kummer_shapes() {
        let f = psi_kummer_unit_raw(2, 1, 1).unwrap();
        assert_eq!(f.breaks(), vec![q(1)]);
        assert_eq!(f.eval(q(0)), q(0));
        assert_eq!(f.slopes(), &[1, 2]);
        let k = LocalField::qp(2, 20).unwrap();
        assert_eq!(psi_uniformizer(&k).unwrap().breaks(), vec![q(2)]);
        assert!(psi_kummer_unit_raw(3, 2, 3).is_err());
        assert!(psi_kummer_unit_raw(3, 2, 0).is_err());
    }

    #[test]
    fn identity_is_neutral() {
        let f = psi_kummer_unit_raw(3, 4, 5).unwrap();
        let id = PsiFunction::identity();
        assert_eq!(PsiFunction::compose(&f, &id), f);
        assert_eq!(PsiFunction::compose(&id, &f), f);
    }

    #[test]
    fn inverse_round_trip() {
        let f = psi_tower_closed_form(3, 4, 2).unwrap();
        for n in 0..40 {
            let t = Q::new(n, 3);
            assert_eq!(f.inverse(f.eval(t)), t);
        }
    }
}
