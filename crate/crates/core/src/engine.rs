//! Decision tree for the structure of the Albanese kernel T(E1 x E2) = K(K; E1, E2).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::curves::analysis::{analyze_curve, base_change_tower, CurveAnalysis, CurveCaps};
use crate::curves::kummer::{check_decomposition, projected_level, KummerMap, SerreTate};
use crate::curves::torsion::{basis_of, rational_division_point, rationality_level, torsion_field_profile, torsion_tower, Tower, TorsionFieldProfile};
use crate::curves::{Point, ReductionType, WeierstrassCurve};
use crate::error::{Error, Result};
use crate::mackey::{image_of_sp, setup, torsion_generation_check, DualityCount, Route, TorsionGeneration};
use crate::padic::{adjoin_pth_root, contains_mu_p, e0, is_pth_power, zeta_p, LocalField, StepKind};
use crate::units::{Level, UnitsModP};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Caps {
    pub n_cap: u32,
    pub tower_cap: usize,
    pub degree_cap: usize,
    pub sample_budget: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { n_cap: 3, tower_cap: 6, degree_cap: 64, sample_budget: 64 }
    }
}

impl Caps {
    pub fn curve_caps(&self) -> CurveCaps {
        CurveCaps { n_cap: self.n_cap, degree_cap: self.degree_cap }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    DivisiblePlusFinite { n: u32 },
    Divisible,
    MackeyKernelPresent,
    UndeterminedSomekawa,
    Unsupported,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Pass,
    Fail,
    Unverifiable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Injectivity {
    Injective,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Hypothesis {
    pub statement: String,
    pub status: Check,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub result: String,
    pub hypotheses: Vec<Hypothesis>,
    pub citation: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conclusion: Option<String>,
}

impl TraceEntry {
    fn new(result: &str, citation: &str) -> Self {
        TraceEntry { result: result.into(), hypotheses: Vec::new(), citation: citation.into(), conclusion: None }
    }
    fn with(mut self, h: Hypothesis) -> Self {
        self.hypotheses.push(h);
        self
    }
    fn concluding(mut self, c: impl Into<String>) -> Self {
        self.conclusion = Some(c.into());
        self
    }
    pub fn passed(&self) -> bool {
        self.hypotheses.iter().all(|h| h.status == Check::Pass)
    }
}

fn hyp(statement: impl Into<String>, ok: bool) -> Hypothesis {
    Hypothesis { statement: statement.into(), status: if ok { Check::Pass } else { Check::Fail }, detail: None }
}

fn hyp_detail(statement: impl Into<String>, ok: bool, detail: impl Into<String>) -> Hypothesis {
    Hypothesis { detail: Some(detail.into()), ..hyp(statement, ok) }
}

fn unverifiable(statement: impl Into<String>, detail: impl Into<String>) -> Hypothesis {
    Hypothesis { statement: statement.into(), status: Check::Unverifiable, detail: Some(detail.into()) }
}

/// Cap and budget failures make a hypothesis unverifiable; anything else aborts the analysis.
fn soft<T>(r: Result<T>) -> Result<std::result::Result<T, String>> {
    match r {
        Ok(v) => Ok(Ok(v)),
        Err(e @ (Error::CapExceeded(_) | Error::BudgetExhausted(_))) => Ok(Err(format!("hypothesis unverifiable within caps: {e}"))),
        Err(e) => Err(e),
    }
}

fn hyp_result(statement: impl Into<String>, r: std::result::Result<bool, String>) -> Hypothesis {
    match r {
        Ok(ok) => hyp(statement, ok),
        Err(d) => unverifiable(statement, d),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TowerStepInfo {
    pub kind: StepKind,
    pub degree: usize,
    pub e: usize,
    pub f: usize,
    pub purpose: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct TowerDescription {
    pub steps: Vec<TowerStepInfo>,
    pub degree: usize,
    pub ramification_index: usize,
    /// the first wildly ramified torsion step above the top of the tower
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_step: Option<TowerStepInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_at_top: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_divisible_from: Option<u32>,
    #[serde(skip)]
    pub tower: Option<Tower>,
    #[serde(skip)]
    pub top_curves: Option<(WeierstrassCurve, WeierstrassCurve)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MackeySummary {
    pub route: Route,
    pub ambient_rank: usize,
    pub image_rank: usize,
    pub symbols_evaluated: usize,
    pub vanishing_checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duality: Option<DualityCount>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub torsion_generation: Option<TorsionGeneration>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ItemError {
    pub kind: String,
    pub message: String,
}

impl From<&Error> for ItemError {
    fn from(e: &Error) -> Self {
        ItemError { kind: e.kind().to_string(), message: e.to_string() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StructureReport {
    /// labels of (E1, E2) in the order the analysis used
    pub pair: (String, String),
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finite_exponent: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finite_part: Option<String>,
    pub injectivity: BTreeMap<u32, Injectivity>,
    pub theorem_trace: Vec<TraceEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recommended_extension: Option<TowerDescription>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_divisible_from: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mackey: Option<MackeySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mackey_error: Option<ItemError>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

struct Pair<'a> {
    c1: &'a CurveAnalysis,
    c2: &'a CurveAnalysis,
    caps: Caps,
    k: LocalField,
    p: u64,
    n: u32,
    n_exact: bool,
    mu_p: bool,
    seed: u64,
}

struct Draft {
    verdict: Verdict,
    finite_part: Option<String>,
    trace: Vec<TraceEntry>,
    injective_up_to: Option<u32>,
    all_injective: bool,
    tower: Option<TowerDescription>,
    p_divisible_from: Option<u32>,
    notes: Vec<String>,
}

impl Draft {
    fn new(verdict: Verdict) -> Self {
        Draft {
            verdict,
            finite_part: None,
            trace: Vec::new(),
            injective_up_to: None,
            all_injective: false,
            tower: None,
            p_divisible_from: None,
            notes: Vec::new(),
        }
    }
}

const NORM_CITATION: &str = "the norm map ... is surjective";

impl<'a> Pair<'a> {
    fn new(c1: &'a CurveAnalysis, c2: &'a CurveAnalysis, caps: Caps, seed: u64) -> Result<Self> {
        let k = c1.field().clone();
        if !k.same(c2.field()) {
            return Err(Error::FieldMismatch);
        }
        let n = c1.rationality_level.min(c2.rationality_level);
        let n_exact = !(c1.rationality_capped && c1.rationality_level == n || c2.rationality_capped && c2.rationality_level == n);
        let mu_p = contains_mu_p(&k)?;
        Ok(Pair { p: k.p(), k, c1, c2, caps, n, n_exact, mu_p, seed })
    }

    fn level_hyp(&self) -> Hypothesis {
        let s = format!("n = {} is the largest integer with E_i[p^n] in E_i(K) for i = 1, 2", self.n);
        if self.n_exact {
            hyp(s, true)
        } else {
            unverifiable(s, format!("rationality level reached n_cap = {}", self.caps.n_cap))
        }
    }

    fn mu_hyp(&self) -> Hypothesis {
        hyp("mu_p is contained in K", self.mu_p)
    }

    fn profile(&self, c: &CurveAnalysis, m: u32) -> Result<std::result::Result<TorsionFieldProfile, String>> {
        soft(torsion_field_profile(&c.curve, m, self.caps.degree_cap))
    }

    fn mackey(&self) -> Result<(MackeySummary, Option<crate::mackey::SymbolImage>)> {
        let s = setup(self.c1, self.c2, self.n.max(1), self.caps.sample_budget, self.seed)?;
        let img = image_of_sp(self.c1, self.c2, &s)?;
        let tg = (self.n >= 1).then(|| torsion_generation_check(&img, self.n, self.p));
        let summary = MackeySummary {
            route: img.route,
            ambient_rank: img.ambient_rank,
            image_rank: img.image_rank,
            symbols_evaluated: img.generators.len(),
            vanishing_checked: img.vanishing_checked,
            duality: img.duality.clone(),
            torsion_generation: tg,
        };
        Ok((summary, Some(img)))
    }

    fn injectivity(&self, d: &Draft) -> BTreeMap<u32, Injectivity> {
        let top = self.caps.n_cap.max(self.n + 1);
        (1..=top)
            .map(|m| {
                let inj = d.all_injective || d.injective_up_to.is_some_and(|n| m <= n);
                (m, if inj { Injectivity::Injective } else { Injectivity::Unknown })
            })
            .collect()
    }

    fn torsion_injectivity_entry(&self) -> Option<TraceEntry> {
        (self.n >= 1).then(|| {
            TraceEntry::new("torsion_injectivity", "the map $s_{p^n}$ is injective")
                .with(hyp(format!("E_i[p^{}] is contained in E_i(K) for i = 1, 2", self.n), true))
                .concluding(format!("s_(p^m) is injective for m <= {}", self.n))
        })
    }

    fn finish(&self, mut d: Draft, mackey: Option<Result<MackeySummary>>) -> Result<StructureReport> {
        if !d.trace.iter().any(TraceEntry::passed) {
            return Err(Error::HypothesisFailed("no trace entry supports the verdict".into()));
        }
        let (mackey, mackey_error) = match mackey {
            None => (None, None),
            Some(Ok(m)) => (Some(m), None),
            Some(Err(e)) => (None, Some(ItemError::from(&e))),
        };
        let finite_exponent = match d.verdict {
            Verdict::DivisiblePlusFinite { n } => Some(n),
            _ => None,
        };
        if let Verdict::DivisiblePlusFinite { n } = d.verdict {
            d.finite_part.get_or_insert_with(|| format!("Z/{}^{}", self.p, n));
        }
        Ok(StructureReport {
            pair: (self.c1.label.clone(), self.c2.label.clone()),
            injectivity: self.injectivity(&d),
            verdict: d.verdict,
            finite_exponent,
            finite_part: d.finite_part,
            theorem_trace: d.trace,
            recommended_extension: d.tower,
            p_divisible_from: d.p_divisible_from,
            mackey,
            mackey_error,
            notes: d.notes,
        })
    }

    fn undetermined(&self, mut d: Draft, why: &str) -> Draft {
        d.verdict = Verdict::UndeterminedSomekawa;
        d.trace.push(
            TraceEntry::new("somekawa_level", "but it might have a larger kernel")
                .with(hyp(why.to_string(), true))
                .concluding("no criterion applies; the structure of T(X) is not determined at the Somekawa level"),
        );
        d
    }

    // (a)
    fn tate_tate(&self) -> Result<StructureReport> {
        let n = self.n;
        let mut d = Draft::new(Verdict::UndeterminedSomekawa);
        d.all_injective = true;
        d.trace.push(
            TraceEntry::new("tate_tate", "proved injectivity of $c_n$ for every $n\\geq 1$")
                .with(hyp("E1 and E2 are Tate curves", true))
                .concluding("s_(p^m) is injective for every m >= 1"),
        );
        let mackey = self.mackey();
        match (&mackey, n) {
            (Ok((m, _)), 0) => {
                let e = TraceEntry::new("tate_tate", "proved injectivity of $c_n$ for every $n\\geq 1$")
                    .with(self.level_hyp())
                    .with(hyp_detail("the image of s_p is zero", m.image_rank == 0, format!("image rank {}", m.image_rank)));
                let ok = e.passed();
                d.trace.push(e.concluding("K(K; E1, E2)/p = 0, so K(K; E1, E2) is p-divisible"));
                if ok {
                    d.verdict = Verdict::Divisible;
                    d.p_divisible_from = Some(0);
                }
            }
            (Ok((m, _)), _) => {
                let tg = m.torsion_generation.as_ref();
                let img1 = TraceEntry::new("image1", "have the same reduction type")
                    .with(hyp(format!("E_i[p^{n}] is contained in E_i(K) for i = 1, 2"), true))
                    .with(hyp_detail("the image of s_p has rank 1", m.image_rank == 1, format!("image rank {}", m.image_rank)))
                    .concluding(format!("K(K; E1, E2)/p^{n} is cyclic of order p^{n}"));
                if !img1.passed() {
                    return Err(Error::PrecisionExhausted(format!("image of s_p has rank {} instead of 1", m.image_rank)));
                }
                d.trace.push(img1);
                let crit = TraceEntry::new("torsionpointscriterion", "can be generated by symbols of the form")
                    .with(self.level_hyp())
                    .with(hyp("s_p is injective", true))
                    .with(hyp_detail(
                        format!("symbols with a in E1[p^{n}] or b in E2[p^{n}] generate K(K; E1, E2)/p"),
                        tg.is_some_and(TorsionGeneration::holds),
                        format!("{} witness symbols", tg.map_or(0, |t| t.witnesses.len())),
                    ))
                    .concluding(format!("p^{n} K(K; E1, E2) is p-divisible"));
                let ok = crit.passed();
                d.trace.push(crit);
                if ok {
                    d.verdict = Verdict::DivisiblePlusFinite { n };
                    d.p_divisible_from = Some(n);
                }
            }
            (Err(_), _) => {}
        }
        if d.verdict == Verdict::UndeterminedSomekawa {
            d = self.undetermined(d, "the finite summand could not be computed from the image of s_p");
        }
        self.finish(d, Some(mackey.map(|m| m.0)))
    }

    // (b)
    fn ord_ord(&self) -> Result<StructureReport> {
        let n = self.n;
        let mut d = Draft::new(Verdict::UndeterminedSomekawa);
        let prof = match (self.profile(self.c1, n + 1)?, self.profile(self.c2, n + 1)?) {
            (Ok(a), Ok(b)) => Ok((a, b)),
            (Err(e), _) | (_, Err(e)) => Err(e),
        };
        let wild_stmt = format!("K(E1[p^{m}], E2[p^{m}]) has wild ramification", m = n + 1);
        let wild = prof.clone().map(|(a, b)| a.wild || b.wild);
        let structure = TraceEntry::new("structure1", "we have an isomorphism for the Albanese kernel")
            .with(hyp("E1 and E2 have good ordinary reduction", true))
            .with(self.level_hyp())
            .with(hyp_result(wild_stmt.clone(), wild.clone()));
        let shape = |c: &CurveAnalysis| {
            let s = format!("0 -> mu_(p^{m}) -> {}[p^{m}] -> Z/p^{m} -> 0 is exact", c.label, m = n + 1);
            match c.mu_shape(n + 1) {
                Some(ok) => hyp_detail(s, ok, format!("|E-bar(k)| = {}", c.reduction.point_count)),
                None => unverifiable(s, "not an ordinary curve"),
            }
        };
        let ordord = TraceEntry::new("ordord", "has wild ramification")
            .with(self.mu_hyp())
            .with(self.level_hyp())
            .with(hyp_result(wild_stmt, wild))
            .with(shape(self.c1))
            .with(shape(self.c2));
        let mut mackey = None;
        if n >= 1 {
            let m = self.mackey();
            if let Ok((s, _)) = &m {
                let e = TraceEntry::new("image1", "have the same reduction type")
                    .with(hyp(format!("E_i[p^{n}] is contained in E_i(K) for i = 1, 2"), true))
                    .with(hyp_detail("the image of s_p has rank 1", s.image_rank == 1, format!("image rank {}", s.image_rank)))
                    .concluding(format!("K(K; E1, E2)/p^{n} is cyclic of order p^{n}"));
                if !e.passed() {
                    return Err(Error::PrecisionExhausted(format!("image of s_p has rank {} instead of 1", s.image_rank)));
                }
                d.trace.push(e);
            }
            mackey = Some(m.map(|m| m.0));
        }
        if let Some(e) = self.torsion_injectivity_entry() {
            d.injective_up_to = Some(n);
            d.trace.push(e);
        }
        let ordord_ok = ordord.passed();
        let ordord = if ordord_ok {
            ordord.concluding(if n == 0 { "K(K; E1, E2) is p-divisible".to_string() } else { "s_(p^m) is injective for every m >= 1".into() })
        } else {
            ordord
        };
        d.trace.push(ordord);
        if ordord_ok {
            d.all_injective = true;
        }
        if structure.passed() {
            d.verdict = if n >= 1 { Verdict::DivisiblePlusFinite { n } } else { Verdict::Divisible };
            d.p_divisible_from = Some(n);
            if n == 0 {
                d.all_injective = true;
            }
            if !ordord_ok {
                let step = if n >= 1 {
                    "the smallest L over which the mu-extension shapes hold is unramified over K"
                } else {
                    "the smallest L with mu_p in L and the mu-extension shapes is L0(mu_p) with L0/K unramified and [L : L0] prime to p"
                };
                d.trace.push(
                    TraceEntry::new("norm_surjectivity", NORM_CITATION)
                        .with(hyp(step, true))
                        .concluding("N_(L/K) : K(L; E1, E2)/p^m -> K(K; E1, E2)/p^m is surjective for every m"),
                );
            }
            let conclusion = if n >= 1 { format!("T(X) = T(X)_dv + Z/p^{n}") } else { "T(X) is divisible".into() };
            d.trace.push(structure.concluding(conclusion));
            return self.finish(d, mackey);
        }
        d.trace.push(structure);
        let both_rational = self.c1.p_rational() && self.c2.p_rational();
        let cm1 = TraceEntry::new("CM1", "is divisible")
            .with(hyp("E1 and E2 have good ordinary reduction", true))
            .with(hyp("E1 and E2 have complex multiplication", self.c1.cm && self.c2.cm))
            .with(hyp_detail("K is unramified over Q_p", self.k.e() == 1, format!("e(K/Q_p) = {}", self.k.e())))
            .with(hyp("E_i[p] is not contained in E_i(K) for some i", !both_rational));
        if cm1.passed() {
            d.verdict = Verdict::Divisible;
            d.all_injective = true;
            d.p_divisible_from = Some(0);
            d.trace.push(cm1.concluding("T(X) is divisible"));
            return self.finish(d, mackey);
        }
        d.trace.push(cm1);
        let prof1 = match (self.profile(self.c1, 1)?, self.profile(self.c2, 1)?) {
            (Ok(a), Ok(b)) => Ok((a, b)),
            (Err(e), _) | (_, Err(e)) => Err(e),
        };
        let shape1 = |c: &CurveAnalysis| {
            let s = format!("0 -> mu_p -> {}[p] -> Z/p -> 0 is exact", c.label);
            match c.mu_shape(1) {
                Some(ok) => hyp_detail(s, ok, format!("|E-bar(k)| = {}", c.reduction.point_count)),
                None => unverifiable(s, "not an ordinary curve"),
            }
        };
        let kernelord = TraceEntry::new("kernelord", "the Galois symbol $s_p$ vanishes")
            .with(self.mu_hyp())
            .with(shape1(self.c1))
            .with(shape1(self.c2))
            .with(hyp_result("K(E1[p], E2[p]) is nontrivial", prof1.clone().map(|(a, b)| a.degree > 1 || b.degree > 1)))
            .with(hyp_result("K(E1[p], E2[p]) is unramified over K", prof1.map(|(a, b)| a.e == 1 && b.e == 1)));
        let tower = soft(construct_tower(self.c1, self.c2, self.caps))?;
        if kernelord.passed() {
            let m = self.mackey();
            let rank = m.as_ref().map(|(s, _)| s.image_rank);
            match rank {
                Ok(0) => {}
                Ok(r) => return Err(Error::PrecisionExhausted(format!("s_p has image of rank {r} where it must vanish"))),
                Err(e) => return Err(e.clone_kind()),
            }
            d.verdict = Verdict::MackeyKernelPresent;
            d.trace.push(kernelord.concluding("s_p = 0 while (E1/p (x)^M E2/p)(K) = Z/p"));
            mackey = Some(m.map(|m| m.0));
        } else {
            d.trace.push(kernelord);
            d = self.undetermined(d, "neither the wild criterion nor a kernel criterion holds over K");
        }
        self.push_tower(&mut d, tower);
        self.finish(d, mackey)
    }

    fn push_tower(&self, d: &mut Draft, tower: std::result::Result<TowerDescription, String>) {
        match tower {
            Ok(t) => {
                let last_wild = t.final_step.as_ref().is_some_and(|s| s.e % self.p as usize == 0);
                d.trace.push(
                    TraceEntry::new("tower1", "has wild ramification for some $r\\geq 1$")
                        .with(hyp("E1 and E2 have good ordinary reduction", true))
                        .with(hyp_detail(
                            "the torsion step above the top of the tower is wildly ramified",
                            last_wild,
                            format!("{} steps, degree {}", t.steps.len(), t.degree),
                        ))
                        .concluding("s_(p^m) is injective for every m >= 1 over the top of the tower"),
                );
                d.tower = Some(t);
            }
            Err(e) => d.notes.push(format!("tower construction: {e}")),
        }
    }

    // (c)
    fn ord_ss(&self) -> Result<StructureReport> {
        let (c1, c2) = (self.c1, self.c2);
        let p = self.p;
        let e0k = e0(&self.k)? as u64;
        let mut d = Draft::new(Verdict::UndeterminedSomekawa);
        let t = c2.t_invariant.as_ref().map(|t| t.t as u64);
        let bound = t.map(|t| (p * t).min(p * (e0k - t)));
        let bound_txt = match (t, bound) {
            (Some(t), Some(b)) => format!("t(K) = {t}, e_0(K) = {e0k}, min(p t, p (e_0 - t)) = {b}"),
            _ => "t(K) unavailable".into(),
        };
        let fits = |i: u64| bound.is_some_and(|b| i % p != 0 && i <= b);
        if let Some(e) = self.torsion_injectivity_entry() {
            d.injective_up_to = Some(self.n);
            d.trace.push(e);
        }
        let mut mackey = None;
        // case (1)
        if self.n >= 1 {
            let witness = soft(self.ordss_witness(bound))?;
            let (ok, detail) = match &witness {
                Ok(Some((i, _))) => (Ok(true), format!("w_1 has level {i}; {bound_txt}")),
                Ok(None) => (Ok(false), format!("no w in E1[p^n](K) has a first coordinate of admissible level; {bound_txt}")),
                Err(e) => (Err(e.clone()), e.clone()),
            };
            let mut h = hyp_result(format!("some w in E1[p^{}](K) has w_1 of level i prime to p with i <= min(p t, p (e_0 - t))", self.n), ok);
            h.detail = Some(detail);
            let e = TraceEntry::new("ordss", "which is the largest with this property").with(self.level_hyp()).with(h);
            if e.passed() {
                d.verdict = Verdict::DivisiblePlusFinite { n: self.n };
                d.finite_part = Some(format!("(Z/{p}^{})^2", self.n));
                d.all_injective = true;
                d.p_divisible_from = Some(self.n);
                d.trace.push(e.concluding(format!("s_(p^m) is injective for every m >= 1 and p^{} K(K; E1, E2) is p-divisible", self.n)));
                let m = self.mackey();
                if let Ok((s, _)) = &m {
                    if s.image_rank != 2 {
                        return Err(Error::PrecisionExhausted(format!("image of s_p has rank {} instead of 2", s.image_rank)));
                    }
                    d.trace.push(
                        TraceEntry::new("image1", "have the same reduction type")
                            .with(hyp(format!("E_i[p^{}] is contained in E_i(K) for i = 1, 2", self.n), true))
                            .with(hyp_detail("the image of s_p has rank 2", true, format!("image rank {}", s.image_rank)))
                            .concluding(format!("K(K; E1, E2)/p^{} = (Z/p^{})^2", self.n, self.n)),
                    );
                }
                return self.finish(d, Some(m.map(|m| m.0)));
            }
            d.trace.push(e);
        }
        // case (2) and the kernel case
        let st_level = match &c1.serre_tate {
            Some(SerreTate::Nontrivial { level: Level::Unit(i), .. }) => Some(*i),
            _ => None,
        };
        let st_hyp = match (&c1.serre_tate, st_level) {
            (Some(SerreTate::Nontrivial { .. }), Some(i)) => hyp_detail("E1[p] is a nonsplit extension of Z/p by mu_p with Serre-Tate parameter u", true, format!("u has level {i}")),
            (Some(SerreTate::Trivial), _) => hyp_detail("E1[p] is a nonsplit extension of Z/p by mu_p with Serre-Tate parameter u", false, "the extension splits"),
            _ => unverifiable("E1[p] is a nonsplit extension of Z/p by mu_p with Serre-Tate parameter u", "Serre-Tate parameter unavailable"),
        };
        let rational2 = hyp("E2[p] is contained in E2(K)", c2.p_rational());
        let ordss2 = TraceEntry::new("ordss", "In this case the $K$-group $K(K;E_1,E_2)$ is $p$-divisible")
            .with(rational2.clone())
            .with(st_hyp.clone())
            .with(hyp_detail(
                "u has level i prime to p with i <= min(p t, p (e_0 - t))",
                st_level.is_some_and(fits),
                bound_txt.clone(),
            ));
        if ordss2.passed() {
            let m = self.mackey();
            if let Ok((s, _)) = &m {
                if s.image_rank != 0 {
                    return Err(Error::PrecisionExhausted(format!("s_p has image of rank {} on a p-divisible group", s.image_rank)));
                }
            }
            d.verdict = Verdict::Divisible;
            d.all_injective = true;
            d.p_divisible_from = Some(0);
            d.trace.push(ordss2.concluding("K(K; E1, E2) is p-divisible"));
            return self.finish(d, Some(m.map(|m| m.0)));
        }
        d.trace.push(ordss2);
        let kernelss = TraceEntry::new("kernelss", "contains $\\mathbb{Z}/p$")
            .with(rational2)
            .with(st_hyp)
            .with(hyp_detail("u has level i > min(p t, p (e_0 - t))", st_level.zip(bound).is_some_and(|(i, b)| i > b), bound_txt));
        if kernelss.passed() {
            let m = self.mackey();
            match m.as_ref().map(|(s, _)| s.image_rank) {
                Ok(0) => {}
                Ok(r) => return Err(Error::PrecisionExhausted(format!("s_p has image of rank {r} where it must vanish"))),
                Err(e) => return Err(e.clone_kind()),
            }
            d.verdict = Verdict::MackeyKernelPresent;
            d.trace.push(kernelss.concluding("s_p = 0 while (E1/p (x)^M E2/p)(K) contains Z/p"));
            mackey = Some(m.map(|m| m.0));
        } else {
            d.trace.push(kernelss);
        }
        match soft(self.ordsszeta())? {
            Ok((entry, tower, big_n)) => {
                let ok = entry.passed();
                d.trace.push(entry);
                if ok {
                    d.p_divisible_from = Some(big_n);
                }
                d.tower = Some(tower);
            }
            Err(e) => d.trace.push(
                TraceEntry::new("ordsszeta", "we perform the following algorithmic process")
                    .with(unverifiable("K1 = K(E1[p], E2[p], mu_(p^2)) can be constructed", e)),
            ),
        }
        if d.verdict == Verdict::UndeterminedSomekawa {
            let why = if d.p_divisible_from.is_some() {
                "only p^N-divisibility is established; the finite summand is not determined"
            } else {
                "no criterion applies over K"
            };
            d = self.undetermined(d, why);
        }
        self.finish(d, mackey)
    }

    /// The least admissible level of w_1 over w in E1[p^n](K), with the witness coordinates.
    fn ordss_witness(&self, bound: Option<u64>) -> Result<Option<(u64, Vec<u64>)>> {
        let c1 = self.c1;
        let p = self.p;
        let Some(bound) = bound else { return Ok(None) };
        let units = UnitsModP::new(&self.k)?;
        let pts = connected_first(c1);
        let basis = basis_of(&c1.curve, &pts, p)?.ok_or_else(|| Error::PrecisionExhausted("no basis of E1[p]".into()))?;
        let map = KummerMap::new(&c1.curve, basis, units.clone(), self.seed)?;
        let decomp = ordinary_split(&map, &self.k, self.caps.sample_budget, self.seed)?;
        let Some(rows) = decomp else { return Ok(None) };
        let seeds = crate::curves::analysis::rational_torsion_family(&c1.curve, &c1.p_torsion, self.n)?;
        let classes: Vec<Vec<u64>> = seeds.iter().map(|(q, _)| map.class(q)).collect::<Result<_>>()?;
        let mut span = crate::arith::Span::new(p, 2 * units.dim());
        for c in &classes {
            span.insert(c);
        }
        let all = span.elements(4096).ok_or_else(|| Error::CapExceeded("E1[p^n](K)/p too large to enumerate".into()))?;
        let mut best: Option<(u64, Vec<u64>)> = None;
        for v in all {
            if let Level::Unit(i) = projected_level(&units, std::slice::from_ref(&v), rows[0][0], rows[0][1]) {
                if i % p != 0 && i <= bound && best.as_ref().is_none_or(|(j, _)| i < *j) {
                    best = Some((i, v));
                }
            }
        }
        Ok(best)
    }

    fn ordsszeta(&self) -> Result<(TraceEntry, TowerDescription, u32)> {
        let p = self.p;
        let caps = self.caps;
        let mut tower = Tower::new(&self.k);
        let mut steps = Vec::new();
        let (t1, top1, _) = torsion_tower(&self.c1.curve, 1, caps.degree_cap)?;
        record_steps(&mut steps, &t1, &format!("adjoin {}[p]", self.c1.label));
        for s in t1.steps.iter().cloned() {
            tower.push(s);
        }
        let e2 = base_change_tower(&self.c2.curve, &t1)?;
        let (t2, top2, _) = torsion_tower(&e2, 1, caps.degree_cap / tower.degree().max(1))?;
        record_steps(&mut steps, &t2, &format!("adjoin {}[p]", self.c2.label));
        let mut top1 = base_change_tower(&top1, &t2)?;
        let mut top2 = top2;
        for s in t2.steps.iter().cloned() {
            tower.push(s);
        }
        let z = zeta_p(tower.top())?;
        if is_pth_power(&z)?.is_none() {
            if tower.degree() * p as usize > caps.degree_cap {
                return Err(Error::CapExceeded(format!("[K1 : K] exceeds {}", caps.degree_cap)));
            }
            let ext = adjoin_pth_root(tower.top(), &z)?;
            steps.push(TowerStepInfo { kind: StepKind::MuP, degree: ext.degree(), e: ext.e_rel(), f: ext.f_rel(), purpose: "adjoin mu_(p^2)".into() });
            top1 = top1.base_change(&ext)?;
            top2 = top2.base_change(&ext)?;
            tower.push(ext);
        }
        let k1 = tower.top().clone();
        let a1 = analyze_curve(&self.c1.label, &top1, self.c1.cm, caps.curve_caps())?;
        let a2 = analyze_curve(&self.c2.label, &top2, self.c2.cm, caps.curve_caps())?;
        let t = a2.t_invariant.as_ref().ok_or_else(|| Error::HypothesisFailed("t(K1) unavailable".into()))?.t as u64;
        let e0k1 = e0(&k1)? as u64;
        let (w0, n) = deepest_connected(&a1)?;
        let units = UnitsModP::new(&k1)?;
        let pts = connected_first(&a1);
        let basis = basis_of(&a1.curve, &pts, p)?.ok_or_else(|| Error::PrecisionExhausted("no basis of E1[p] over K1".into()))?;
        let map = KummerMap::new(&a1.curve, basis, units.clone(), self.seed)?;
        let rows = ordinary_split(&map, &k1, caps.sample_budget, self.seed)?
            .ok_or_else(|| Error::PrecisionExhausted("E1(K1)/p does not decompose".into()))?;
        let i = match projected_level(&units, &[map.class(&w0)?], rows[0][0], rows[0][1]) {
            Level::Unit(i) => i,
            other => return Err(Error::PrecisionExhausted(format!("w_0 has first coordinate at {other:?}"))),
        };
        let admissible = |r: u32| {
            let q = p.pow(r + 1);
            i <= (q * t).min(q * (e0k1 - t))
        };
        let r = (0..=caps.tower_cap as u32).find(|&r| admissible(r));
        let deg = tower.degree();
        let l0 = {
            let mut d = deg;
            let mut v = 0;
            while d % p as usize == 0 {
                d /= p as usize;
                v += 1;
            }
            v
        };
        let mut entry = TraceEntry::new("ordsszeta", "$p^N K(K;E_1,E_2)$ is $p$-divisible")
            .with(hyp_detail("E_i[p] is contained in E_i(K1) and mu_(p^2) in K1", true, format!("[K1 : K] = {deg}")))
            .with(hyp_detail(
                format!("w_0 generates the connected p^n-torsion with n = {n}"),
                n >= 1,
                format!("first coordinate of w_0 has level {i}; t(K1) = {t}, e_0(K1) = {e0k1}"),
            ));
        let needs_steps = r.is_some_and(|r| r > 0);
        if needs_steps || r.is_none() {
            entry = entry.with(hyp_detail("the level of w_0 is prime to p", i % p != 0, format!("level {i}")));
        }
        let Some(r) = r else {
            entry = entry.with(unverifiable("some r within tower_cap satisfies i <= min(p^(r+1) t, p^(r+1) (e_0 - t))", format!("tower_cap = {}", caps.tower_cap)));
            let desc = describe(steps, &tower, None, None, None);
            return Ok((entry, desc, 0));
        };
        for j in 0..r {
            let q = p.pow(j + 1);
            steps.push(TowerStepInfo {
                kind: StepKind::FormalDivision,
                degree: p as usize,
                e: p as usize,
                f: 1,
                purpose: format!("adjoin (1/p) w_{j}; e_0 = {} and t = {} above", q * e0k1, q * t),
            });
        }
        if steps.len() > caps.tower_cap + 3 || deg * (p as usize).pow(r) > caps.degree_cap {
            return Err(Error::CapExceeded(format!("ordinary-supersingular tower exceeds caps ({} steps)", steps.len())));
        }
        let l = l0 + r;
        let big_n = l + n + r;
        entry = entry
            .with(hyp_detail(format!("r = {r} is the least with i <= min(p^(r+1) t, p^(r+1) (e_0 - t))"), true, format!("l = {l}")))
            .concluding(format!("p^{big_n} K(K; E1, E2) is p-divisible"));
        let mut desc = describe(steps, &tower, Some(n), Some(big_n), None);
        desc.degree = deg * (p as usize).pow(r);
        desc.ramification_index = tower.e() * (p as usize).pow(r);
        Ok((entry, desc, big_n))
    }

    // (d)
    fn tate_good(&self) -> Result<StructureReport> {
        let (c1, c2) = (self.c1, self.c2);
        let p = self.p;
        let mut d = Draft::new(Verdict::UndeterminedSomekawa);
        let tp = c1.tate.as_ref().ok_or_else(|| Error::PrecisionExhausted(format!("{}: Tate parameter unavailable", c1.label)))?;
        let s = tp.s;
        let i = tp.root_valuation as u64;
        let pi = self.k.uniformizer();
        let unit = tp.root.div(&pi.pow_u(i))?;
        let units = UnitsModP::new(&self.k)?;
        let j = units.ubar_level(&unit)?;
        let e0k = e0(&self.k)? as u64;
        let replaced = if s == 0 {
            "q is not a p-th power".to_string()
        } else {
            format!("q = q'^(p^{s}); E1 is replaced by the isogenous Tate curve with parameter q', which governs p^{s} K(K; E1, E2)")
        };
        let qdesc = format!("q' = pi^{i} u with u at {j:?}");
        if let Some(e) = self.torsion_injectivity_entry() {
            d.injective_up_to = Some(self.n);
            d.trace.push(e);
        }
        let mut entry = TraceEntry::new("Tate1", "can be written as $q=\\pi_K^iu$")
            .with(self.mu_hyp())
            .with(hyp_detail("the Tate parameter is replaced by a parameter that is not a p-th power", true, replaced));
        let fits = |lvl: Level, b: u64| matches!(lvl, Level::Unit(x) if x <= b);
        let (criterion, kernel_possible) = match c2.kind() {
            ReductionType::GoodOrdinary => {
                entry = entry.with(hyp_detail("v(q') is prime to p", i % p != 0, qdesc.clone()));
                (i % p != 0, !matches!(j, Level::Unit(x) if x >= p * e0k) && j != Level::Trivial)
            }
            _ => {
                entry = entry.with(hyp("E2[p] is contained in E2(K)", c2.p_rational()));
                let t = c2.t_invariant.as_ref().map(|t| t.t as u64);
                let b = t.map(|t| (p * t).min(p * (e0k - t)));
                let ok = i % p != 0 || b.is_some_and(|b| fits(j, b));
                entry = entry.with(hyp_detail(
                    "v(q') is prime to p, or u has level j <= min(p t, p (e_0 - t))",
                    ok,
                    format!("{qdesc}; bound {b:?}"),
                ));
                (ok, c2.p_rational() && b.is_some())
            }
        };
        let mackey = if s == 0 && self.mu_p { Some(self.mackey().map(|m| m.0)) } else { None };
        if entry.passed() {
            d.p_divisible_from = Some(s);
            if s == 0 {
                d.verdict = Verdict::Divisible;
                d.all_injective = true;
                if let Some(Ok(m)) = &mackey {
                    if m.image_rank != 0 {
                        return Err(Error::PrecisionExhausted(format!("s_p has image of rank {} on a p-divisible group", m.image_rank)));
                    }
                }
            }
            d.trace.push(entry.concluding(format!("p^{s} K(K; E1, E2) is p-divisible")));
        } else {
            let kernel = self.mu_p && !criterion && kernel_possible && s == 0;
            d.trace.push(entry);
            if kernel {
                match &mackey {
                    Some(Ok(m)) if m.image_rank == 0 => {}
                    Some(Ok(m)) => return Err(Error::PrecisionExhausted(format!("s_p has image of rank {} where it must vanish", m.image_rank))),
                    Some(Err(e)) => return Err(e.clone_kind()),
                    None => {}
                }
                d.verdict = Verdict::MackeyKernelPresent;
                d.trace.push(
                    TraceEntry::new("Tate1", "a necessary and sufficient condition")
                        .with(self.mu_hyp())
                        .with(hyp_detail("q is not a p-th power and the criterion on q fails", true, qdesc))
                        .concluding("s_p = 0 while (E1/p (x)^M E2/p)(K) contains Z/p"),
                );
            }
        }
        if d.verdict == Verdict::UndeterminedSomekawa {
            let why = if d.p_divisible_from.is_some() { "only p^s-divisibility is established" } else { "no criterion applies over K" };
            d = self.undetermined(d, why);
        }
        self.finish(d, mackey)
    }

    fn ss_ss(&self) -> Result<StructureReport> {
        let mut d = Draft::new(Verdict::Unsupported);
        d.trace.push(
            TraceEntry::new("supersingular_pair", "a very serious obstruction")
                .with(hyp("E1 and E2 have supersingular reduction", true))
                .concluding("products of two supersingular curves are outside every criterion"),
        );
        self.finish(d, None)
    }
}

impl Error {
    fn clone_kind(&self) -> Error {
        Error::PrecisionExhausted(format!("cross-check unavailable: {self}"))
    }
}

fn connected_first(c: &CurveAnalysis) -> Vec<Point> {
    let conn = c.connected_p_torsion();
    let mut pts = conn.clone();
    pts.extend(c.p_torsion.iter().filter(|q| !conn.iter().any(|t| t.eq_approx(q))).cloned());
    pts
}

/// Rows of the change of basis splitting E(K)/p as U^0 + U^{p e_0} (first row onto U^0).
fn ordinary_split(map: &KummerMap, k: &LocalField, budget: usize, seed: u64) -> Result<Option<[[u64; 2]; 2]>> {
    let img = crate::curves::kummer::kummer_image(map, &[], budget, seed)?;
    let classes: Vec<Vec<u64>> = img.generators.iter().map(|(_, v)| v.clone()).collect();
    let top = k.p() * e0(k)? as u64;
    let dec = check_decomposition(map.units(), &classes, 0, top);
    Ok(dec.split_basis)
}

fn is_connected(q: &Point) -> bool {
    q.x().is_some_and(|x| x.valuation().is_some_and(|v| v < 0))
}

/// A generator of the largest rational connected p-power torsion, with its order exponent.
fn deepest_connected(a: &CurveAnalysis) -> Result<(Point, u32)> {
    let e = &a.curve;
    let mut cur = a.connected_p_torsion().into_iter().next().ok_or_else(|| Error::HypothesisFailed("no rational connected p-torsion".into()))?;
    let mut n = 1;
    'outer: while n < 16 {
        let Some(q) = rational_division_point(e, &cur)? else { break };
        for t in std::iter::once(Point::Zero).chain(a.p_torsion.iter().cloned()) {
            let cand = e.add(&q, &t)?;
            if is_connected(&cand) {
                cur = cand;
                n += 1;
                continue 'outer;
            }
        }
        break;
    }
    Ok((cur, n))
}

fn record_steps(out: &mut Vec<TowerStepInfo>, t: &Tower, purpose: &str) {
    for s in &t.steps {
        let kind = if s.e_rel() == 1 { StepKind::Unramified } else { StepKind::TorsionDivision };
        out.push(TowerStepInfo { kind, degree: s.degree(), e: s.e_rel(), f: s.f_rel(), purpose: purpose.into() });
    }
}

fn describe(steps: Vec<TowerStepInfo>, tower: &Tower, n: Option<u32>, big_n: Option<u32>, final_step: Option<TowerStepInfo>) -> TowerDescription {
    TowerDescription {
        steps,
        degree: tower.degree(),
        ramification_index: tower.e(),
        final_step,
        n_at_top: n,
        p_divisible_from: big_n,
        tower: Some(tower.clone()),
        top_curves: None,
    }
}

/// Adjoin E_i[p^(n+1)] while the step is not wildly ramified; the step that is wild is reported
/// as `final_step` and not adjoined.
pub fn construct_tower(c1: &CurveAnalysis, c2: &CurveAnalysis, caps: Caps) -> Result<TowerDescription> {
    if c1.kind() != ReductionType::GoodOrdinary || c2.kind() != ReductionType::GoodOrdinary {
        return Err(Error::HypothesisFailed("tower construction needs two ordinary curves".into()));
    }
    let k = c1.field();
    let p = k.p() as usize;
    let mut tower = Tower::new(k);
    let mut steps = Vec::new();
    let mut e1 = c1.curve.clone();
    let mut e2 = c2.curve.clone();
    loop {
        let n1 = rationality_level(&e1, caps.n_cap)?;
        let n2 = rationality_level(&e2, caps.n_cap)?;
        let n = n1.n.min(n2.n);
        if (n1.capped && n1.n == n) || (n2.capped && n2.n == n) {
            return Err(Error::CapExceeded(format!("rationality level reached n_cap = {}", caps.n_cap)));
        }
        let room = caps.degree_cap / tower.degree();
        let (t1, top1, _) = torsion_tower(&e1, n + 1, room)?;
        let e2b = base_change_tower(&e2, &t1)?;
        let (t2, top2, _) = torsion_tower(&e2b, n + 1, room / t1.degree())?;
        let (e_step, deg) = (t1.e() * t2.e(), t1.degree() * t2.degree());
        if e_step % p == 0 {
            let fin = TowerStepInfo {
                kind: StepKind::TorsionDivision,
                degree: deg,
                e: e_step,
                f: deg / e_step,
                purpose: format!("adjoin E_i[p^{}]: wildly ramified", n + 1),
            };
            let mut d = describe(steps, &tower, Some(n), None, Some(fin));
            d.top_curves = Some((e1, e2));
            return Ok(d);
        }
        if deg == 1 {
            return Err(Error::PrecisionExhausted("torsion step is trivial but E[p^(n+1)] is not rational".into()));
        }
        if steps.len() + t1.steps.len() + t2.steps.len() > caps.tower_cap {
            return Err(Error::CapExceeded(format!("tower longer than {}", caps.tower_cap)));
        }
        record_steps(&mut steps, &t1, &format!("adjoin {}[p^{}]", c1.label, n + 1));
        record_steps(&mut steps, &t2, &format!("adjoin {}[p^{}]", c2.label, n + 1));
        e1 = base_change_tower(&top1, &t2)?;
        e2 = top2;
        for s in t1.steps.into_iter().chain(t2.steps) {
            tower.push(s);
        }
    }
}

fn ordered<'a>(c1: &'a CurveAnalysis, c2: &'a CurveAnalysis) -> (&'a CurveAnalysis, &'a CurveAnalysis, bool) {
    use ReductionType::*;
    match (c1.kind(), c2.kind()) {
        (GoodOrdinary | GoodSupersingular, SplitMultiplicative) | (GoodSupersingular, GoodOrdinary) => (c2, c1, true),
        _ => (c1, c2, false),
    }
}

/// The structure of K(K; E1, E2) for two analysed curves over the same field.
pub fn analyze_pair(c1: &CurveAnalysis, c2: &CurveAnalysis, caps: Caps, seed: u64) -> Result<StructureReport> {
    use ReductionType::*;
    let (a, b, swapped) = ordered(c1, c2);
    let pair = Pair::new(a, b, caps, seed)?;
    let mut report = match (a.kind(), b.kind()) {
        (SplitMultiplicative, SplitMultiplicative) => pair.tate_tate(),
        (GoodOrdinary, GoodOrdinary) => pair.ord_ord(),
        (GoodOrdinary, GoodSupersingular) => pair.ord_ss(),
        (SplitMultiplicative, _) => pair.tate_good(),
        (GoodSupersingular, GoodSupersingular) => pair.ss_ss(),
        _ => Err(Error::UnsupportedReduction("unexpected ordering".into())),
    }?;
    if swapped {
        report.notes.push("factors exchanged: K(K; E1, E2) and K(K; E2, E1) are isomorphic".into());
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct CurveItem {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analysis: Option<CurveAnalysis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ItemError>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairItem {
    pub labels: (String, String),
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<StructureReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ItemError>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubsetItem {
    pub labels: Vec<String>,
    pub p_divisible: Check,
    pub trace: TraceEntry,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProductReport {
    pub curves: Vec<CurveItem>,
    pub pairs: Vec<PairItem>,
    pub higher: Vec<SubsetItem>,
    pub statement: String,
}

pub struct CurveInput {
    pub label: String,
    pub curve: WeierstrassCurve,
    pub cm: bool,
}

fn subsets(r: usize, min: usize) -> Vec<Vec<usize>> {
    (0u32..1 << r).filter(|m| m.count_ones() as usize >= min).map(|m| (0..r).filter(|i| m >> i & 1 == 1).collect()).collect::<Vec<_>>()
}

fn higher_subset(curves: &[&CurveAnalysis]) -> SubsetItem {
    let ss: Vec<&&CurveAnalysis> = curves.iter().filter(|c| c.kind() == ReductionType::GoodSupersingular).collect();
    let entry = TraceEntry::new("morecurves", "is $p$-divisible")
        .with(hyp("the curves have split semistable reduction", true))
        .with(hyp("some curve, taken as E1, does not have supersingular reduction", ss.len() < curves.len()))
        .with(hyp_detail(
            "every supersingular E_i has E_i[p] in E_i(K)",
            ss.iter().all(|c| c.p_rational()),
            format!("{} supersingular", ss.len()),
        ));
    let ok = entry.passed();
    SubsetItem {
        labels: curves.iter().map(|c| c.label.clone()).collect(),
        p_divisible: if ok { Check::Pass } else { Check::Fail },
        trace: if ok { entry.concluding(format!("K(K; {}) is p-divisible", curves.iter().map(|c| c.label.as_str()).collect::<Vec<_>>().join(", "))) } else { entry },
    }
}

/// Reports for every pair of curves and for every subset of three or more.
pub fn analyze_product(curves: &[CurveInput], caps: Caps, seed: u64) -> Result<ProductReport> {
    if curves.len() < 2 {
        return Err(Error::HypothesisFailed("a product needs at least two curves".into()));
    }
    let analyses: Vec<Result<CurveAnalysis>> = curves.iter().map(|c| analyze_curve(&c.label, &c.curve, c.cm, caps.curve_caps())).collect();
    let items = curves
        .iter()
        .zip(&analyses)
        .map(|(c, a)| CurveItem {
            label: c.label.clone(),
            analysis: a.as_ref().ok().cloned(),
            error: a.as_ref().err().map(ItemError::from),
        })
        .collect();
    let mut pairs = Vec::new();
    for idx in subsets(curves.len(), 2).into_iter().filter(|s| s.len() == 2) {
        let (i, j) = (idx[0], idx[1]);
        let labels = (curves[i].label.clone(), curves[j].label.clone());
        let res = match (&analyses[i], &analyses[j]) {
            (Ok(a), Ok(b)) => analyze_pair(a, b, caps, seed),
            (Err(e), _) | (_, Err(e)) => Err(Error::HypothesisFailed(format!("curve analysis failed: {e}"))),
        };
        match res {
            Ok(r) => pairs.push(PairItem { labels, report: Some(r), error: None }),
            Err(e) => pairs.push(PairItem { labels, report: None, error: Some(ItemError::from(&e)) }),
        }
    }
    let mut higher = Vec::new();
    for idx in subsets(curves.len(), 3) {
        let cs: Option<Vec<&CurveAnalysis>> = idx.iter().map(|&i| analyses[i].as_ref().ok()).collect();
        if let Some(cs) = cs {
            higher.push(higher_subset(&cs));
        }
    }
    let statement = if curves.len() == 2 {
        "T(X) = K(K; E1, E2)".to_string()
    } else {
        let all = higher.iter().all(|h| h.p_divisible == Check::Pass) && higher.len() == subsets(curves.len(), 3).len();
        format!(
            "T(X) = F^2 carries a finite filtration whose graded pieces are the K-groups of subsets of at least two curves; the pairwise pieces are reported above and the pieces of three or more curves are {}",
            if all { "p-divisible" } else { "not all known to be p-divisible" }
        )
    };
    Ok(ProductReport { curves: items, pairs, higher, statement })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::tate::tate_curve;

    fn q2() -> LocalField {
        LocalField::qp(2, 40).unwrap()
    }

    fn curve(k: &LocalField, label: &str, a: [i64; 5], cm: bool) -> CurveAnalysis {
        analyze_curve(label, &WeierstrassCurve::from_ints(k, a).unwrap(), cm, Caps::default().curve_caps()).unwrap()
    }

    fn supported(r: &StructureReport) {
        assert!(r.theorem_trace.iter().any(TraceEntry::passed), "{:#?}", r.theorem_trace);
    }

    #[test]
    fn self_product_with_rational_two_torsion() {
        let k = q2();
        let e = curve(&k, "E", [1, 0, 0, 1, 0], false);
        let r = analyze_pair(&e, &e, Caps::default(), 1).unwrap();
        assert_eq!(r.verdict, Verdict::DivisiblePlusFinite { n: e.rationality_level });
        assert_eq!(r.finite_exponent, Some(1));
        assert_eq!(r.p_divisible_from, Some(1));
        assert_eq!(r.injectivity[&1], Injectivity::Injective);
        assert!(r.theorem_trace.iter().any(|t| t.result == "structure1" && t.passed()));
        let m = r.mackey.as_ref().unwrap();
        assert_eq!(m.image_rank, 1);
        assert!(m.torsion_generation.as_ref().unwrap().holds());
        supported(&r);
    }

    #[test]
    fn supersingular_pair_is_unsupported() {
        let k = q2();
        let e = curve(&k, "S", [0, 0, 1, 0, 0], false);
        assert_eq!(e.kind(), ReductionType::GoodSupersingular);
        let r = analyze_pair(&e, &e, Caps::default(), 1).unwrap();
        assert_eq!(r.verdict, Verdict::Unsupported);
        supported(&r);
    }

    #[test]
    fn unramified_torsion_field_gives_a_kernel_and_a_tower() {
        let k = q2();
        let e = curve(&k, "U", [1, 0, 0, 0, -5], false);
        let r = analyze_pair(&e, &e, Caps::default(), 1).unwrap();
        assert_eq!(r.verdict, Verdict::MackeyKernelPresent);
        assert_eq!(r.mackey.as_ref().unwrap().image_rank, 0);
        let t = r.recommended_extension.as_ref().unwrap();
        assert!(!t.steps.is_empty());
        assert!(t.steps.len() <= Caps::default().tower_cap);
        let fin = t.final_step.as_ref().unwrap();
        assert_eq!(fin.e % 2, 0);
        let (e1, e2) = t.top_curves.clone().unwrap();
        let a1 = analyze_curve("U", &e1, false, Caps::default().curve_caps()).unwrap();
        let a2 = analyze_curve("U", &e2, false, Caps::default().curve_caps()).unwrap();
        let top = analyze_pair(&a1, &a2, Caps::default(), 1).unwrap();
        assert_ne!(top.verdict, Verdict::MackeyKernelPresent);
        assert!(top.injectivity.values().all(|&i| i == Injectivity::Injective), "{:#?}", top.theorem_trace);
        supported(&top);
    }

    #[test]
    fn cm_pair_over_unramified_field() {
        let k = LocalField::qp(5, 30).unwrap();
        let e = curve(&k, "C", [0, 0, 0, -1, 0], true);
        assert_eq!(e.kind(), ReductionType::GoodOrdinary);
        let r = analyze_pair(&e, &e, Caps::default(), 1).unwrap();
        assert_eq!(r.verdict, Verdict::Divisible, "{:#?}", r.theorem_trace);
        assert!(r.theorem_trace.iter().any(|t| t.result == "CM1" && t.passed()));
        let plain = curve(&k, "C", [0, 0, 0, -1, 0], false);
        let r = analyze_pair(&plain, &plain, Caps::default(), 1).unwrap();
        assert_ne!(r.verdict, Verdict::Divisible);
    }

    #[test]
    fn tate_times_ordinary() {
        let k = q2();
        let e = curve(&k, "E", [1, 0, 0, 1, 0], false);
        let t = analyze_curve("T", &tate_curve(&k, &k.from_int(16)).unwrap(), false, Caps::default().curve_caps()).unwrap();
        let r = analyze_pair(&e, &t, Caps::default(), 1).unwrap();
        assert_eq!(r.pair.0, "T");
        assert_eq!(r.p_divisible_from, Some(2));
        supported(&r);
        let t2 = analyze_curve("T2", &tate_curve(&k, &k.from_int(2)).unwrap(), false, Caps::default().curve_caps()).unwrap();
        let r = analyze_pair(&t2, &e, Caps::default(), 1).unwrap();
        assert_eq!(r.verdict, Verdict::Divisible);
        assert_eq!(r.mackey.as_ref().unwrap().image_rank, 0);
    }

    #[test]
    fn tate_pair() {
        let k = q2();
        let t = analyze_curve("T", &tate_curve(&k, &k.from_int(16)).unwrap(), false, Caps::default().curve_caps()).unwrap();
        let r = analyze_pair(&t, &t, Caps::default(), 1).unwrap();
        assert!(r.injectivity.values().all(|&i| i == Injectivity::Injective));
        assert_eq!(r.verdict, Verdict::DivisiblePlusFinite { n: 1 }, "{:#?}", r.theorem_trace);
        let t2 = analyze_curve("T2", &tate_curve(&k, &k.from_int(2)).unwrap(), false, Caps::default().curve_caps()).unwrap();
        assert_eq!(analyze_pair(&t2, &t2, Caps::default(), 1).unwrap().verdict, Verdict::Divisible);
    }

    #[test]
    fn products_of_three_curves() {
        let k = q2();
        let mk = |l: &str, a: [i64; 5]| CurveInput { label: l.into(), curve: WeierstrassCurve::from_ints(&k, a).unwrap(), cm: false };
        let rep = analyze_product(&[mk("A", [1, 0, 0, 1, 0]), mk("B", [1, 0, 0, 1, 0]), mk("S", [0, 0, 1, 0, 0])], Caps::default(), 1).unwrap();
        assert_eq!(rep.pairs.len(), 3);
        assert_eq!(rep.higher.len(), 1);
        let s_rational = rep.curves[2].analysis.as_ref().unwrap().p_rational();
        assert_eq!(rep.higher[0].p_divisible == Check::Pass, s_rational);
        assert!(analyze_product(&[mk("A", [1, 0, 0, 1, 0])], Caps::default(), 1).is_err());
        let two_ss = analyze_product(&[mk("A", [1, 0, 0, 1, 0]), mk("S", [0, 0, 1, 0, 0]), mk("R", [0, 0, 1, 0, 0])], Caps::default(), 1).unwrap();
        let ss = two_ss.pairs.iter().find(|p| p.labels == ("S".to_string(), "R".to_string())).unwrap();
        assert_eq!(ss.report.as_ref().unwrap().verdict, Verdict::Unsupported);
    }
}
