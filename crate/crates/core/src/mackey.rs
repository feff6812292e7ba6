//! Symbols {a, b}_{K/K} of (E1 (x)^M E2)/p, the Galois symbol s_p in unit coordinates,
//! its image, and torsion-generation checks.
//!
//! When E1[p] and E2[p] are both rational, s_p({a, b}) is the tuple of classical symbols
//! g_p(k_S(a), k_R(b)) over basis points S of E1[p] and R of E2[p], where k_S is the Miller
//! class of S. Otherwise the rank of the image is the codimension of the orthogonal
//! complement H inside Hom_{G_K}(E1[p], E2[p]), with E_i[p] written as an extension of Z/p by
//! mu_p with Kummer class u_i.

use serde::Serialize;

use crate::arith::{pow_u64, FpMatrix, Span};
use crate::curves::analysis::{rational_torsion_family, roots_of_unity_chain, CurveAnalysis};
use crate::curves::kummer::{kummer_image, KummerMap, PointSampler, SerreTate};
use crate::curves::torsion::basis_of;
use crate::curves::{Point, ReductionType};
use crate::error::{Error, Result};
use crate::padic::FieldElement;
use crate::symbols::{build_gram, Gram};
use crate::units::UnitsModP;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Direct,
    Duality,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Coordinate {
    /// pairing against the rational point of the connected part (mu_p for Tate curves)
    Connected,
    /// pairing against a rational point outside the connected part
    Other,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MackeySymbol {
    pub a_coords: Vec<u64>,
    pub b_coords: Vec<u64>,
    /// N with a in E1[p^N](K), when a is a torsion point
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_torsion: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_torsion: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DualityCount {
    pub hom_dim: u32,
    pub complement_dim: u32,
    pub rank: u32,
    pub complement: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct SymbolImage {
    pub ambient_rank: usize,
    pub route: Route,
    /// coordinate kinds of the evaluated classical symbols, (E1 side, E2 side)
    pub coordinates: Vec<(Coordinate, Coordinate)>,
    pub generators: Vec<(MackeySymbol, Vec<u64>)>,
    pub image_rank: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duality: Option<DualityCount>,
    /// coordinates that must vanish on every symbol and were checked to vanish
    pub vanishing_checked: usize,
}

/// A spanning family of E(K)/p together with the classes used as symbol coordinates.
#[derive(Clone, Debug)]
pub struct FactorSpan {
    pub kind: ReductionType,
    pub full: bool,
    pub coordinates: Vec<Coordinate>,
    pub generators: Vec<FactorGen>,
    block: usize,
}

#[derive(Clone, Debug)]
pub struct FactorGen {
    pub coords: Vec<u64>,
    pub torsion: Option<u32>,
}

impl FactorSpan {
    fn block(&self, g: &FactorGen, i: usize) -> Vec<u64> {
        g.coords[i * self.block..(i + 1) * self.block].to_vec()
    }
}

fn ordered_p_torsion(c: &CurveAnalysis) -> Vec<Point> {
    let conn = c.connected_p_torsion();
    let mut pts = conn.clone();
    pts.extend(c.p_torsion.iter().filter(|q| !conn.iter().any(|t| t.eq_approx(q))).cloned());
    pts
}

fn torsion_of(seeds: &[(Point, u32)], q: &Point) -> Option<u32> {
    seeds.iter().filter(|(s, _)| s.eq_approx(q)).map(|(_, n)| *n).min()
}

fn good_span(c: &CurveAnalysis, units: &UnitsModP, n_max: u32, budget: usize, seed: u64) -> Result<FactorSpan> {
    let e = &c.curve;
    let p = units.p();
    let d = units.dim();
    let seeds = rational_torsion_family(e, &c.p_torsion, n_max)?;
    let seed_pts: Vec<Point> = seeds.iter().map(|(q, _)| q.clone()).collect();
    let ordinary = c.kind() == ReductionType::GoodOrdinary;
    if c.p_rational() {
        let pts = ordered_p_torsion(c);
        let basis = basis_of(e, &pts, p)?.ok_or_else(|| Error::PrecisionExhausted("no basis of E[p]".into()))?;
        let map = KummerMap::new(e, basis, units.clone(), seed)?;
        let img = kummer_image(&map, &seed_pts, budget, seed)?;
        let generators = img
            .generators
            .iter()
            .map(|(q, v)| FactorGen { coords: v.clone(), torsion: torsion_of(&seeds, q) })
            .collect();
        let first = if ordinary { Coordinate::Connected } else { Coordinate::Other };
        return Ok(FactorSpan { kind: c.kind(), full: true, coordinates: vec![first, Coordinate::Other], generators, block: d });
    }
    let conn = c.connected_p_torsion();
    let map = match (ordinary, conn.first()) {
        (true, Some(t)) if c.rational_p_torsion as u64 == p => Some(KummerMap::single(e, t.clone(), units.clone(), seed)?),
        _ => None,
    };
    let mut generators = Vec::new();
    let mut span = Span::new(p, d);
    let mut candidates: Vec<(Point, Option<u32>)> = seeds.iter().map(|(q, n)| (q.clone(), Some(*n))).collect();
    let mut sampler = PointSampler::new(e, seed);
    let mut attempts = 0;
    while candidates.len() < seeds.len() + budget && attempts < 8 * budget.max(1) {
        attempts += 1;
        if let Some(q) = sampler.attempt()? {
            candidates.push((q, None));
        }
    }
    for (q, tors) in candidates {
        match &map {
            Some(m) => {
                let v = match m.class(&q) {
                    Ok(v) => v,
                    Err(Error::DegeneratePairing(_)) | Err(Error::PrecisionExhausted(_)) => continue,
                    Err(err) => return Err(err),
                };
                if span.insert(&v) || generators.is_empty() {
                    generators.push(FactorGen { coords: v, torsion: tors });
                }
            }
            None => {
                if generators.len() <= d {
                    generators.push(FactorGen { coords: Vec::new(), torsion: tors });
                }
            }
        }
    }
    let coordinates = if map.is_some() { vec![Coordinate::Connected] } else { Vec::new() };
    Ok(FactorSpan { kind: c.kind(), full: false, coordinates, generators, block: d })
}

fn tate_span(c: &CurveAnalysis, units: &UnitsModP) -> Result<FactorSpan> {
    let k = c.field();
    let p = units.p();
    let d = units.dim();
    let tp = c.tate.as_ref().ok_or_else(|| Error::HypothesisFailed(format!("{}: Tate parameter unavailable", c.label)))?;
    let mut cands: Vec<(FieldElement, Option<u32>)> = Vec::new();
    for (i, z) in roots_of_unity_chain(k)?.into_iter().enumerate() {
        cands.push((z, Some(i as u32 + 1)));
    }
    let mut r = tp.root.clone();
    for m in (1..=tp.s).rev() {
        cands.push((r.clone(), Some(m)));
        r = r.pow_u(p);
    }
    for b in units.basis() {
        cands.push((b.element.clone(), None));
    }
    let mut span = Span::new(p, d);
    // E_q(K)/p is K^x/p modulo the class of q
    span.insert(&units.decompose(&tp.q)?);
    let mut generators = Vec::new();
    for (x, tors) in cands {
        let v = units.decompose(&x)?;
        if span.insert(&v) {
            generators.push(FactorGen { coords: v, torsion: tors });
        }
    }
    let full = c.p_rational();
    let coordinates = if full { vec![Coordinate::Other] } else { Vec::new() };
    Ok(FactorSpan { kind: c.kind(), full, coordinates, generators, block: d })
}

pub fn factor_span(c: &CurveAnalysis, units: &UnitsModP, n_max: u32, budget: usize, seed: u64) -> Result<FactorSpan> {
    match c.kind() {
        ReductionType::SplitMultiplicative => tate_span(c, units),
        _ => good_span(c, units, n_max, budget, seed),
    }
}

/// s_p({a, b}) as the tuple of classical symbols over the evaluated coordinates.
pub fn sp_value(gram: &Gram, f1: &FactorSpan, a: &FactorGen, f2: &FactorSpan, b: &FactorGen) -> Vec<u64> {
    let mut out = Vec::new();
    for i in 0..f1.coordinates.len() {
        for j in 0..f2.coordinates.len() {
            out.push(gram.pair_coords(&f1.block(a, i), &f2.block(b, j)).raw());
        }
    }
    out
}

fn shape_width(kind: ReductionType) -> usize {
    if kind == ReductionType::SplitMultiplicative {
        1
    } else {
        2
    }
}

/// Kummer class of the extension 0 -> mu_p -> E[p] -> Z/p -> 0 (zero when E[p] is rational).
pub fn extension_class(c: &CurveAnalysis, units: &UnitsModP) -> Result<Vec<u64>> {
    let d = units.dim();
    match c.kind() {
        ReductionType::GoodOrdinary => match &c.serre_tate {
            Some(SerreTate::Trivial) => Ok(vec![0; d]),
            Some(SerreTate::Nontrivial { coords, .. }) => Ok(coords.clone()),
            None => Err(Error::HypothesisFailed(format!("{}: E[p] is not an extension of Z/p by mu_p over K", c.label))),
        },
        ReductionType::GoodSupersingular if c.p_rational() => Ok(vec![0; d]),
        ReductionType::GoodSupersingular => Err(Error::HypothesisFailed(format!("{}: E[p] is not rational", c.label))),
        ReductionType::SplitMultiplicative => {
            let tp = c.tate.as_ref().ok_or_else(|| Error::HypothesisFailed(format!("{}: Tate parameter unavailable", c.label)))?;
            units.decompose(&tp.q)
        }
    }
}

/// Which entries of f = [[f1, f2], [f3, f4]] (columns: images of the connected and the other
/// basis point of E1[p], rows: connected and other coordinate in E2[p]) vanish on H.
fn complement(k1: ReductionType, k2: ReductionType) -> Result<(&'static [usize], &'static str)> {
    use ReductionType::*;
    Ok(match (k1, k2) {
        (GoodSupersingular, GoodSupersingular) => {
            return Err(Error::Unsupported("both curves have supersingular reduction".into()));
        }
        (GoodOrdinary, GoodOrdinary) | (SplitMultiplicative, SplitMultiplicative) => (&[2], "f(E1[p]^0) in E2[p]^0"),
        (GoodOrdinary, GoodSupersingular) | (SplitMultiplicative, _) => (&[0, 2], "f(E1[p]^0) = 0"),
        (GoodSupersingular, GoodOrdinary) | (_, SplitMultiplicative) => (&[2, 3], "f(E1[p]) in E2[p]^0"),
    })
}

fn dim_of_count(count: u64, p: u64) -> u32 {
    let mut d = 0;
    let mut c = count;
    while c > 1 {
        c /= p;
        d += 1;
    }
    d
}

/// dim Hom_{G_K}(E1[p], E2[p]) and dim H, by enumerating all 2x2 matrices over F_p.
pub fn duality_count(c1: &CurveAnalysis, c2: &CurveAnalysis, units: &UnitsModP) -> Result<DualityCount> {
    if !units.has_mu_p() {
        return Err(Error::MuPNotContained);
    }
    let p = units.p();
    let (zero_on_h, name) = complement(c1.kind(), c2.kind())?;
    let u1 = extension_class(c1, units)?;
    let u2 = extension_class(c2, units)?;
    let mut hom = 0u64;
    let mut h = 0u64;
    for idx in 0..pow_u64(p, 4) {
        let f = [idx % p, idx / p % p, idx / (p * p) % p, idx / (p * p * p)];
        // f rho1(s) = rho2(s) f with rho_i(s) = [[1, a_i(s)], [0, 1]]
        let equivariant = u1.iter().zip(&u2).all(|(&a1, &a2)| {
            a2 * f[2] % p == 0 && a1 * f[2] % p == 0 && (a1 * f[0] + p * p - a2 * f[3]) % p == 0
        });
        if !equivariant {
            continue;
        }
        hom += 1;
        if zero_on_h.iter().all(|&i| f[i] == 0) {
            h += 1;
        }
    }
    let hom_dim = dim_of_count(hom, p);
    let complement_dim = dim_of_count(h, p);
    Ok(DualityCount { hom_dim, complement_dim, rank: hom_dim - complement_dim, complement: name })
}

/// Coordinates whose pairing functional lies in H; they vanish on the image of s_p.
fn forced_zero(k1: ReductionType, k2: ReductionType, c: (Coordinate, Coordinate)) -> bool {
    let Ok((zero_on_h, _)) = complement(k1, k2) else { return false };
    let kills_first_column = zero_on_h == [2] || zero_on_h == [0, 2];
    let lands_in_connected = zero_on_h == [2] || zero_on_h == [2, 3];
    let connected1 = c.0 == Coordinate::Connected && k1 != ReductionType::GoodSupersingular;
    let connected2 = c.1 == Coordinate::Connected && k2 != ReductionType::GoodSupersingular;
    (connected1 && kills_first_column) || (connected2 && lands_in_connected)
}

pub struct MackeySetup {
    pub gram: Gram,
    pub f1: FactorSpan,
    pub f2: FactorSpan,
}

pub fn setup(c1: &CurveAnalysis, c2: &CurveAnalysis, n_max: u32, budget: usize, seed: u64) -> Result<MackeySetup> {
    if c1.kind() == ReductionType::GoodSupersingular && c2.kind() == ReductionType::GoodSupersingular {
        return Err(Error::Unsupported("both curves have supersingular reduction".into()));
    }
    if !c1.field().same(c2.field()) {
        return Err(Error::FieldMismatch);
    }
    let gram = build_gram(c1.field())?;
    let f1 = factor_span(c1, gram.units(), n_max, budget, seed)?;
    let f2 = factor_span(c2, gram.units(), n_max, budget, seed.wrapping_add(1))?;
    Ok(MackeySetup { gram, f1, f2 })
}

/// The image of s_p on the symbols {a, b}_{K/K} built from spanning families of E1(K)/p and E2(K)/p.
pub fn image_of_sp(c1: &CurveAnalysis, c2: &CurveAnalysis, s: &MackeySetup) -> Result<SymbolImage> {
    let p = s.gram.units().p();
    let coordinates: Vec<(Coordinate, Coordinate)> =
        s.f1.coordinates.iter().flat_map(|&a| s.f2.coordinates.iter().map(move |&b| (a, b))).collect();
    let mut generators = Vec::new();
    let mut rows = Vec::new();
    for a in &s.f1.generators {
        for b in &s.f2.generators {
            let v = sp_value(&s.gram, &s.f1, a, &s.f2, b);
            rows.push(v.clone());
            let sym = MackeySymbol { a_coords: a.coords.clone(), b_coords: b.coords.clone(), a_torsion: a.torsion, b_torsion: b.torsion };
            generators.push((sym, v));
        }
    }
    let evaluated_rank = if coordinates.is_empty() || rows.is_empty() { 0 } else { FpMatrix::from_rows(p, coordinates.len(), &rows).rank() };
    let mut vanishing_checked = 0;
    for (j, &c) in coordinates.iter().enumerate() {
        if forced_zero(c1.kind(), c2.kind(), c) {
            if rows.iter().any(|r| r[j] != 0) {
                return Err(Error::PrecisionExhausted(format!("coordinate {j} lies in the orthogonal complement but a symbol pairs nontrivially with it")));
            }
            vanishing_checked += 1;
        }
    }
    let duality = match duality_count(c1, c2, s.gram.units()) {
        Ok(d) => Some(d),
        Err(Error::HypothesisFailed(_)) | Err(Error::MuPNotContained) if s.f1.full && s.f2.full => None,
        Err(e) => return Err(e),
    };
    let ambient_rank = shape_width(c1.kind()) * shape_width(c2.kind());
    let (route, image_rank) = if s.f1.full && s.f2.full {
        if let Some(d) = &duality {
            if d.rank as usize != evaluated_rank {
                return Err(Error::PrecisionExhausted(format!(
                    "direct image rank {evaluated_rank} differs from the duality count {}",
                    d.rank
                )));
            }
        }
        (Route::Direct, evaluated_rank)
    } else {
        let d = duality.as_ref().expect("duality count is required off the direct route");
        if evaluated_rank > d.rank as usize {
            return Err(Error::PrecisionExhausted("evaluated symbols exceed the duality rank".into()));
        }
        (Route::Duality, d.rank as usize)
    };
    Ok(SymbolImage { ambient_rank, route, coordinates, generators, image_rank, duality, vanishing_checked })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Generation {
    Spans,
    Vacuous,
    DoesNotSpan,
    Unverifiable,
}

#[derive(Clone, Debug, Serialize)]
pub struct TorsionGeneration {
    pub n: u32,
    pub status: Generation,
    pub witnesses: Vec<MackeySymbol>,
}

impl TorsionGeneration {
    pub fn holds(&self) -> bool {
        matches!(self.status, Generation::Spans | Generation::Vacuous)
    }
}

/// Whether symbols with a in E1[p^n](K) or b in E2[p^n](K) span the image of s_p.
pub fn torsion_generation_check(img: &SymbolImage, n: u32, p: u64) -> TorsionGeneration {
    if img.image_rank == 0 {
        return TorsionGeneration { n, status: Generation::Vacuous, witnesses: Vec::new() };
    }
    if img.route != Route::Direct {
        return TorsionGeneration { n, status: Generation::Unverifiable, witnesses: Vec::new() };
    }
    let mut span = Span::new(p, img.coordinates.len());
    let mut witnesses = Vec::new();
    for (sym, v) in &img.generators {
        let torsion = sym.a_torsion.is_some_and(|m| m <= n) || sym.b_torsion.is_some_and(|m| m <= n);
        if torsion && span.insert(v) {
            witnesses.push(sym.clone());
        }
    }
    let status = if span.rank() == img.image_rank { Generation::Spans } else { Generation::DoesNotSpan };
    TorsionGeneration { n, status, witnesses }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::analysis::{analyze_curve, CurveCaps};
    use crate::curves::tate::tate_curve;
    use crate::curves::WeierstrassCurve;
    use crate::padic::LocalField;

    fn caps() -> CurveCaps {
        CurveCaps { n_cap: 3, degree_cap: 16 }
    }

    fn q2() -> LocalField {
        LocalField::qp(2, 40).unwrap()
    }

    fn curve(k: &LocalField, a: [i64; 5]) -> CurveAnalysis {
        analyze_curve("E", &WeierstrassCurve::from_ints(k, a).unwrap(), false, caps()).unwrap()
    }

    #[test]
    fn ordinary_pair_with_rational_two_torsion() {
        let k = q2();
        let e = curve(&k, [1, 0, 0, 1, 0]);
        let s = setup(&e, &e, 1, 64, 3).unwrap();
        let img = image_of_sp(&e, &e, &s).unwrap();
        assert_eq!(img.route, Route::Direct);
        assert_eq!(img.ambient_rank, 4);
        assert_eq!(img.image_rank, 1);
        assert_eq!(img.duality.as_ref().unwrap().rank, 1);
        let g = torsion_generation_check(&img, 1, 2);
        assert_eq!(g.status, Generation::Spans);
        assert!(g.witnesses.iter().all(|w| w.a_torsion.is_some() || w.b_torsion.is_some()));
    }

    #[test]
    fn symbol_values_are_biadditive() {
        let k = q2();
        let e = curve(&k, [1, 0, 0, 1, 0]);
        let s = setup(&e, &e, 1, 64, 5).unwrap();
        let p = 2;
        let gens = &s.f1.generators;
        for a in gens {
            for a2 in gens {
                let sum = FactorGen { coords: a.coords.iter().zip(&a2.coords).map(|(x, y)| (x + y) % p).collect(), torsion: None };
                for b in &s.f2.generators {
                    let lhs = sp_value(&s.gram, &s.f1, &sum, &s.f2, b);
                    let r1 = sp_value(&s.gram, &s.f1, a, &s.f2, b);
                    let r2 = sp_value(&s.gram, &s.f1, a2, &s.f2, b);
                    let rhs: Vec<u64> = r1.iter().zip(&r2).map(|(x, y)| (x + y) % p).collect();
                    assert_eq!(lhs, rhs);
                }
            }
        }
        let zero = FactorGen { coords: vec![0; gens[0].coords.len()], torsion: None };
        assert!(sp_value(&s.gram, &s.f1, &zero, &s.f2, &s.f2.generators[0]).iter().all(|&x| x == 0));
    }

    #[test]
    fn ordinary_times_tate() {
        let k = q2();
        let e = curve(&k, [1, 0, 0, 1, 0]);
        let t = analyze_curve("T", &tate_curve(&k, &k.from_int(16)).unwrap(), false, caps()).unwrap();
        assert!(t.p_rational());
        let s = setup(&e, &t, 1, 64, 3).unwrap();
        let img = image_of_sp(&e, &t, &s).unwrap();
        assert_eq!(img.ambient_rank, 2);
        assert_eq!(img.image_rank, 2);
        let s = setup(&t, &e, 1, 64, 3).unwrap();
        assert_eq!(image_of_sp(&t, &e, &s).unwrap().image_rank, 2);
    }

    #[test]
    fn unramified_torsion_field_kills_the_symbol() {
        let k = q2();
        let e = curve(&k, [1, 0, 0, 0, -5]);
        let s = setup(&e, &e, 1, 32, 3).unwrap();
        let img = image_of_sp(&e, &e, &s).unwrap();
        assert_eq!(img.route, Route::Duality);
        assert_eq!(img.image_rank, 0);
        assert!(!img.generators.is_empty());
        assert_eq!(img.vanishing_checked, 1);
        let d = img.duality.unwrap();
        assert_eq!((d.hom_dim, d.complement_dim), (2, 2));
        assert_eq!(torsion_generation_check(&image_of_sp(&e, &e, &s).unwrap(), 1, 2).status, Generation::Vacuous);
    }

    #[test]
    fn duality_counts_by_shape() {
        let k = q2();
        let rat = curve(&k, [1, 0, 0, 1, 0]);
        let wild = curve(&k, [1, 0, 0, 0, -3]);
        let unr = curve(&k, [1, 0, 0, 0, -5]);
        let u = UnitsModP::new(&k).unwrap();
        let c = |a: &CurveAnalysis, b: &CurveAnalysis| duality_count(a, b, &u).unwrap();
        assert_eq!((c(&rat, &rat).hom_dim, c(&rat, &rat).rank), (4, 1));
        // distinct nontrivial classes: f3 = 0, f1 = f4 = 0
        assert_eq!((c(&wild, &unr).hom_dim, c(&wild, &unr).rank), (1, 0));
        assert_eq!((c(&wild, &wild).hom_dim, c(&wild, &wild).rank), (2, 0));
        assert_eq!((c(&rat, &wild).hom_dim, c(&rat, &wild).rank), (2, 0));
    }
}
