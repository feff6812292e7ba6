//! Per-curve data consumed by the Mackey and engine layers.

use serde::Serialize;

use super::formal::formal_group;
use super::kummer::{serre_tate_parameter, t_invariant, SerreTate, TInvariant};
use super::reduction::{classify_reduction, ReductionData, ReductionType};
use super::tate::{tate_parameter, TateParameter};
use super::torsion::{rational_division_point, rationality_level, Tower};
use super::weierstrass::{Point, WeierstrassCurve};
use crate::error::{Error, Result};
use crate::padic::{contains_mu_p, is_pth_power, zeta_p, FieldElement, LocalField};

/// Primitive roots of unity of order p, p^2, ... contained in K.
pub fn roots_of_unity_chain(k: &LocalField) -> Result<Vec<FieldElement>> {
    if !contains_mu_p(k)? {
        return Ok(Vec::new());
    }
    let mut out = vec![zeta_p(k)?];
    while out.len() < 16 {
        match is_pth_power(out.last().unwrap())? {
            Some(r) => out.push(r),
            None => break,
        }
    }
    Ok(out)
}

/// Largest m with mu_{p^m} in K.
pub fn mu_level(k: &LocalField) -> Result<u32> {
    Ok(roots_of_unity_chain(k)?.len() as u32)
}

#[derive(Clone, Debug, Serialize)]
pub struct CurveAnalysis {
    pub label: String,
    #[serde(skip)]
    pub curve: WeierstrassCurve,
    pub reduction: ReductionData,
    pub cm: bool,
    /// largest n (up to the cap) with E[p^n] in E(K)
    pub rationality_level: u32,
    pub rationality_capped: bool,
    /// |E(K)[p]|
    pub rational_p_torsion: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub formal_height: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_invariant: Option<TInvariant>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub serre_tate: Option<SerreTate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tate: Option<TateParameter>,
    /// failures of optional invariants, as (invariant, error kind, message)
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub unavailable: Vec<(String, String, String)>,
    #[serde(skip)]
    pub basis: Option<(Point, Point)>,
    #[serde(skip)]
    pub p_torsion: Vec<Point>,
}

#[derive(Clone, Copy, Debug)]
pub struct CurveCaps {
    pub n_cap: u32,
    pub degree_cap: usize,
}

impl CurveAnalysis {
    pub fn kind(&self) -> ReductionType {
        self.reduction.kind
    }
    pub fn field(&self) -> &LocalField {
        self.curve.field()
    }
    pub fn p_rational(&self) -> bool {
        let p = self.field().p() as usize;
        self.rational_p_torsion == p * p
    }
    /// The connected-etale sequence of E[p^m] has the shape mu_{p^m} -> E[p^m] -> Z/p^m.
    /// For ordinary reduction the etale quotient is trivial iff p^m divides |E-bar(k)|
    /// (the p-part of E-bar(k) is cyclic); for Tate curves the shape always holds.
    pub fn mu_shape(&self, m: u32) -> Option<bool> {
        match self.kind() {
            ReductionType::GoodOrdinary => {
                let pm = (self.field().p() as u128).checked_pow(m)?;
                Some(self.reduction.point_count as u128 % pm == 0)
            }
            ReductionType::SplitMultiplicative => Some(true),
            _ => None,
        }
    }
    /// The nonzero rational p-torsion points lying in the formal group.
    pub fn connected_p_torsion(&self) -> Vec<Point> {
        self.p_torsion
            .iter()
            .filter(|q| q.x().is_some_and(|x| x.valuation().is_some_and(|v| v < 0)))
            .cloned()
            .collect()
    }
}

fn note(out: &mut Vec<(String, String, String)>, what: &str, e: &Error) {
    out.push((what.to_string(), e.kind().to_string(), e.to_string()));
}

pub fn analyze_curve(label: &str, e: &WeierstrassCurve, cm: bool, caps: CurveCaps) -> Result<CurveAnalysis> {
    let (reduction, model) = classify_reduction(e)?;
    let rt = rationality_level(&model, caps.n_cap)?;
    let mut unavailable = Vec::new();
    let mut formal_height = None;
    let mut t_inv = None;
    let mut serre_tate = None;
    let mut tate = None;
    match reduction.kind {
        ReductionType::GoodOrdinary | ReductionType::GoodSupersingular => {
            match formal_group(&model, 2) {
                Ok(fg) => {
                    formal_height = Some(fg.height);
                    let expect = if reduction.kind == ReductionType::GoodOrdinary { 1 } else { 2 };
                    if fg.height != expect {
                        return Err(Error::PrecisionExhausted(format!(
                            "{label}: formal group height {} disagrees with the reduction type",
                            fg.height
                        )));
                    }
                    if reduction.kind == ReductionType::GoodSupersingular {
                        match t_invariant(&model, &fg) {
                            Ok(t) => t_inv = Some(t),
                            Err(err) => note(&mut unavailable, "t_invariant", &err),
                        }
                    }
                }
                Err(err) => note(&mut unavailable, "formal_group", &err),
            }
            if reduction.kind == ReductionType::GoodOrdinary {
                match serre_tate_parameter(&model, caps.degree_cap) {
                    Ok(s) => serre_tate = Some(s),
                    Err(err) => note(&mut unavailable, "serre_tate", &err),
                }
            }
        }
        _ => match tate_parameter(&model) {
            Ok(t) => tate = Some(t),
            Err(err) => note(&mut unavailable, "tate_parameter", &err),
        },
    }
    Ok(CurveAnalysis {
        label: label.to_string(),
        curve: model,
        reduction,
        cm,
        rationality_level: rt.n,
        rationality_capped: rt.capped,
        rational_p_torsion: rt.p_torsion.len(),
        formal_height,
        t_invariant: t_inv,
        serre_tate,
        tate,
        unavailable,
        basis: rt.basis,
        p_torsion: rt.p_torsion,
    })
}

/// Rational points of E(K)[p^N] grouped by exact order exponent: a generating family obtained by
/// repeated rational p-division, starting from E(K)[p].
pub fn rational_torsion_family(e: &WeierstrassCurve, p_torsion: &[Point], n_max: u32) -> Result<Vec<(Point, u32)>> {
    let mut out: Vec<(Point, u32)> = p_torsion.iter().filter(|q| !q.is_zero()).map(|q| (q.clone(), 1)).collect();
    let mut frontier: Vec<Point> = out.iter().map(|(q, _)| q.clone()).collect();
    for level in 2..=n_max {
        let mut next = Vec::new();
        for t in &frontier {
            if let Some(q) = rational_division_point(e, t)? {
                next.push(q);
            }
        }
        if next.is_empty() {
            break;
        }
        out.extend(next.iter().map(|q| (q.clone(), level)));
        frontier = next;
    }
    Ok(out)
}

/// Base change of a curve along every step of a tower.
pub fn base_change_tower(e: &WeierstrassCurve, tower: &Tower) -> Result<WeierstrassCurve> {
    let mut cur = e.clone();
    for s in &tower.steps {
        cur = cur.base_change(s)?;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn caps() -> CurveCaps {
        CurveCaps { n_cap: 3, degree_cap: 16 }
    }

    #[test]
    fn mu_levels() {
        assert_eq!(mu_level(&LocalField::qp(2, 30).unwrap()).unwrap(), 1);
        assert_eq!(mu_level(&LocalField::qp(3, 30).unwrap()).unwrap(), 0);
        assert_eq!(mu_level(&LocalField::qp(5, 30).unwrap()).unwrap(), 0);
        // Q_2(i): x^2 + 2x + 2 is Eisenstein with root -1 + i
        let k = LocalField::new(2, 1, Some(&[BigInt::from(2), BigInt::from(2), BigInt::from(1)]), 40).unwrap();
        assert_eq!(mu_level(&k).unwrap(), 2);
    }

    #[test]
    fn ordinary_curves_over_q2() {
        let k = LocalField::qp(2, 40).unwrap();
        let e0 = analyze_curve("E0", &WeierstrassCurve::from_ints(&k, [1, 0, 0, 1, 0]).unwrap(), false, caps()).unwrap();
        assert_eq!(e0.kind(), ReductionType::GoodOrdinary);
        assert_eq!(e0.rationality_level, 1);
        assert_eq!(e0.reduction.point_count, 4);
        assert_eq!(e0.mu_shape(2), Some(true));
        assert_eq!(e0.mu_shape(3), Some(false));
        assert!(matches!(e0.serre_tate, Some(SerreTate::Trivial)));
        let unr = analyze_curve("Eu", &WeierstrassCurve::from_ints(&k, [1, 0, 0, 0, -5]).unwrap(), false, caps()).unwrap();
        assert_eq!(unr.rationality_level, 0);
        assert_eq!(unr.connected_p_torsion().len(), 1);
        assert!(matches!(unr.serre_tate, Some(SerreTate::Nontrivial { .. })));
    }

    #[test]
    fn tate_level_matches_roots() {
        let k = LocalField::qp(2, 40).unwrap();
        let e = super::super::tate::tate_curve(&k, &k.from_int(16)).unwrap();
        let a = analyze_curve("T", &e, false, caps()).unwrap();
        let t = a.tate.as_ref().unwrap();
        assert_eq!(a.rationality_level, t.s.min(mu_level(&k).unwrap()));
        assert_eq!(a.rationality_level, 1);
    }
}
