//! Local fields presented as W(F_q)[pi]/(E(pi)) and their elements with certified precision.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::residue::{Res, ResidueField};
use crate::arith::{big_pow, is_prime, mod_u64, vp_big};
use crate::error::{exhausted, Error, Result};

/// Valuation sentinel for exact zero.
pub const EXACT: i64 = i64::MAX / 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Base,
    Unramified,
    MuP,
    Kummer,
    TorsionDivision,
    FormalDivision,
    Root,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TowerStep {
    pub kind: StepKind,
    pub degree: usize,
    pub e: usize,
    pub f: usize,
    pub description: String,
}

pub struct FieldData {
    p: u64,
    f: usize,
    e: usize,
    cap: i64,
    residue: ResidueField,
    wmod: Vec<BigInt>,
    eis: Vec<Vec<BigInt>>,
    p_over_pi: Vec<BigInt>,
    eta_inv: Vec<BigInt>,
    aux_prec: i64,
    tower: Vec<TowerStep>,
}

#[derive(Clone)]
pub struct LocalField(Arc<FieldData>);

impl fmt::Debug for LocalField {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fm, "LocalField(p={}, f={}, e={}, N={})", self.p(), self.f(), self.e(), self.cap())
    }
}

impl PartialEq for LocalField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p
                && self.0.f == other.0.f
                && self.0.e == other.0.e
                && self.0.cap == other.0.cap
                && self.0.eis == other.0.eis)
    }
}

impl LocalField {
    /// Q_p-extension with residue degree `f` and optional integer Eisenstein polynomial (low to high).
    pub fn new(p: u64, f: usize, eis: Option<&[BigInt]>, precision: i64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if f == 0 || f > 64 {
            return Err(Error::InvalidField(format!("inertia degree {f} out of range")));
        }
        let e = eis.map_or(1, |c| c.len().saturating_sub(1));
        if precision < 2 * e as i64 {
            return Err(Error::PrecisionTooLow { given: precision, minimum: 2 * e as i64 });
        }
        let eis_w = match eis {
            None => None,
            Some(c) => {
                if c.len() < 2 {
                    return Err(Error::NotEisenstein("degree must be at least 1".into()));
                }
                let lead = c.last().unwrap();
                if mod_u64(lead, p) == 0 {
                    return Err(Error::NotEisenstein("leading coefficient is not a unit".into()));
                }
                for a in &c[..c.len() - 1] {
                    if mod_u64(a, p) != 0 {
                        return Err(Error::NotEisenstein("a lower coefficient is not divisible by p".into()));
                    }
                }
                if vp_big(&c[0], p) != Some(1) {
                    return Err(Error::NotEisenstein("constant term must have valuation exactly 1".into()));
                }
                let digits = (precision + 8 * e as i64) / e as i64 + 4;
                let modulus = big_pow(p, digits);
                let lead_inv = mod_inverse(lead, &modulus);
                Some(
                    c[..c.len() - 1]
                        .iter()
                        .map(|a| {
                            let mut w = vec![BigInt::zero(); f];
                            w[0] = (a * &lead_inv).mod_floor(&modulus);
                            w
                        })
                        .collect::<Vec<_>>(),
                )
            }
        };
        let label = match eis {
            None if f == 1 => format!("Q_{p}"),
            None => format!("unramified extension of Q_{p} of degree {f}"),
            Some(c) => format!("Q_{p}, f = {f}, Eisenstein {}", poly_string(c)),
        };
        let steps = vec![TowerStep { kind: StepKind::Base, degree: e * f, e, f, description: label }];
        Self::from_parts(p, f, eis_w, precision, steps)
    }

    /// Build from W-coefficients of a monic Eisenstein polynomial (a_0..a_{e-1}); `None` for unramified.
    pub(crate) fn from_parts(
        p: u64,
        f: usize,
        eis: Option<Vec<Vec<BigInt>>>,
        cap: i64,
        tower: Vec<TowerStep>,
    ) -> Result<Self> {
        let residue = ResidueField::new(p, f);
        let mut wmod: Vec<BigInt> = residue.modulus().iter().map(|&c| BigInt::from(c)).collect();
        if f == 1 {
            // W = Z_p; keep the modulus X - g so that w = g is an integer.
            wmod = vec![BigInt::from(residue.modulus()[0]), BigInt::one()];
        }
        let (e, eis) = match eis {
            None => {
                let mut a0 = vec![BigInt::zero(); f];
                a0[0] = -BigInt::from(p);
                (1, vec![a0])
            }
            Some(v) => (v.len(), v),
        };
        let aux_prec = cap + 4 * e as i64 + 16;
        let mut data = FieldData {
            p,
            f,
            e,
            cap,
            residue,
            wmod,
            eis,
            p_over_pi: Vec::new(),
            eta_inv: Vec::new(),
            aux_prec,
            tower,
        };
        data.p_over_pi = data.compute_p_over_pi()?;
        data.eta_inv = data.ok_unit_inverse(&data.eta(), data.aux_prec)?;
        Ok(LocalField(Arc::new(data)))
    }

    pub fn qp(p: u64, precision: i64) -> Result<Self> {
        Self::new(p, 1, None, precision)
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }
    pub fn f(&self) -> usize {
        self.0.f
    }
    pub fn e(&self) -> usize {
        self.0.e
    }
    pub fn degree(&self) -> usize {
        self.0.e * self.0.f
    }
    pub fn cap(&self) -> i64 {
        self.0.cap
    }
    pub fn residue_field(&self) -> &ResidueField {
        &self.0.residue
    }
    pub fn residue_order(&self) -> u64 {
        self.0.residue.order()
    }
    pub fn tower(&self) -> &[TowerStep] {
        &self.0.tower
    }
    pub fn is_unramified(&self) -> bool {
        self.0.e == 1
    }
    pub fn same(&self, other: &LocalField) -> bool {
        self == other
    }

    /// Eisenstein coefficients a_0..a_{e-1} as elements of the field.
    pub fn eisenstein_coeffs(&self) -> Vec<FieldElement> {
        (0..self.e())
            .map(|i| {
                let mut c = vec![BigInt::zero(); self.e() * self.f()];
                c[..self.f()].clone_from_slice(&self.0.eis[i]);
                self.from_ok(c, 0, self.cap() + self.e() as i64)
            })
            .collect()
    }

    pub fn eisenstein_w(&self) -> &[Vec<BigInt>] {
        &self.0.eis
    }

    pub fn w_modulus(&self) -> &[BigInt] {
        &self.0.wmod
    }

    /// The same field with a different precision cap.
    pub fn with_cap(&self, cap: i64) -> Result<LocalField> {
        if cap == self.cap() {
            return Ok(self.clone());
        }
        let eis = if self.e() == 1 { None } else { Some(self.0.eis.clone()) };
        Self::from_parts(self.p(), self.f(), eis, cap, self.0.tower.clone())
    }

    pub fn description(&self) -> String {
        self.0.tower.iter().map(|s| s.description.clone()).collect::<Vec<_>>().join(" -> ")
    }

    // ---------- element constructors ----------

    pub fn zero(&self) -> FieldElement {
        FieldElement { field: self.clone(), val: EXACT, rel: 0, unit: Vec::new() }
    }

    pub fn zero_to(&self, abs: i64) -> FieldElement {
        FieldElement { field: self.clone(), val: abs.min(EXACT), rel: 0, unit: Vec::new() }
    }

    pub fn one(&self) -> FieldElement {
        self.from_int(1)
    }

    pub fn from_int(&self, n: i64) -> FieldElement {
        self.from_bigint(&BigInt::from(n))
    }

    pub fn from_bigint(&self, n: &BigInt) -> FieldElement {
        match vp_big(n, self.p()) {
            None => self.zero(),
            Some(v) => {
                let mut c = vec![BigInt::zero(); self.e() * self.f()];
                c[0] = n.clone();
                self.from_ok(c, 0, v * self.e() as i64 + self.cap())
            }
        }
    }

    pub fn from_rational(&self, num: &BigInt, den: &BigInt) -> Result<FieldElement> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        self.from_bigint(num).div(&self.from_bigint(den))
    }

    pub fn uniformizer(&self) -> FieldElement {
        if self.e() == 1 {
            return self.from_int(self.p() as i64);
        }
        let mut u = vec![BigInt::zero(); self.e() * self.f()];
        u[0] = BigInt::one();
        FieldElement { field: self.clone(), val: 1, rel: self.cap(), unit: u }
    }

    /// The generator w of the unramified ring (a lift of a primitive element of the residue field).
    pub fn omega(&self) -> FieldElement {
        let mut c = vec![BigInt::zero(); self.e() * self.f()];
        if self.f() == 1 {
            c[0] = -self.0.wmod[0].clone();
        } else {
            c[1] = BigInt::one();
        }
        self.from_ok(c, 0, self.cap())
    }

    /// Integer-coefficient lift of a residue field element.
    pub fn lift_residue(&self, r: &[u64]) -> FieldElement {
        let mut c = vec![BigInt::zero(); self.e() * self.f()];
        if self.f() == 1 {
            c[0] = BigInt::from(r[0]);
        } else {
            for j in 0..self.f() {
                c[j] = BigInt::from(r[j]);
            }
        }
        self.from_ok(c, 0, self.cap())
    }

    /// Element pi^shift * y, where y is given in the O_K basis and known modulo pi^rel_prec.
    pub fn from_ok(&self, coeffs: Vec<BigInt>, shift: i64, rel_prec: i64) -> FieldElement {
        self.0.normalize(self, coeffs, shift, rel_prec)
    }

    pub(crate) fn data(&self) -> &FieldData {
        &self.0
    }
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let g = a.extended_gcd(m);
    assert!(g.gcd.is_one(), "not invertible");
    g.x.mod_floor(m)
}

fn poly_string(c: &[BigInt]) -> String {
    let mut terms = Vec::new();
    for (i, a) in c.iter().enumerate().rev() {
        if a.is_zero() {
            continue;
        }
        let t = match i {
            0 => format!("{a}"),
            1 => format!("{a}*x"),
            _ => format!("{a}*x^{i}"),
        };
        terms.push(t);
    }
    terms.join(" + ").replace("+ -", "- ")
}

// ---------- O_K level arithmetic on coefficient vectors ----------

impl FieldData {
    fn n(&self) -> usize {
        self.e * self.f
    }

    fn w_reduce(&self, a: &mut Vec<BigInt>) {
        let f = self.f;
        if a.len() <= f {
            a.resize(f, BigInt::zero());
            return;
        }
        for d in (f..a.len()).rev() {
            let c = std::mem::take(&mut a[d]);
            if c.is_zero() {
                continue;
            }
            for k in 0..f {
                a[d - f + k] -= &c * &self.wmod[k];
            }
        }
        a.truncate(f);
    }

    fn w_mul(&self, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        let f = self.f;
        if f == 1 {
            return vec![&a[0] * &b[0]];
        }
        let mut out = vec![BigInt::zero(); 2 * f - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if !y.is_zero() {
                    out[i + j] += x * y;
                }
            }
        }
        self.w_reduce(&mut out);
        out
    }

    pub(crate) fn ok_mul(&self, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        let (e, f) = (self.e, self.f);
        let mut blocks: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); 2 * f - 1]; 2 * e - 1];
        for i in 0..e {
            let ai = &a[i * f..(i + 1) * f];
            if ai.iter().all(|x| x.is_zero()) {
                continue;
            }
            for k in 0..e {
                let bk = &b[k * f..(k + 1) * f];
                let blk = &mut blocks[i + k];
                for (s, x) in ai.iter().enumerate() {
                    if x.is_zero() {
                        continue;
                    }
                    for (t, y) in bk.iter().enumerate() {
                        if !y.is_zero() {
                            blk[s + t] += x * y;
                        }
                    }
                }
            }
        }
        let mut blocks: Vec<Vec<BigInt>> = blocks
            .into_iter()
            .map(|mut b| {
                self.w_reduce(&mut b);
                b
            })
            .collect();
        for t in (e..2 * e - 1).rev() {
            let top = std::mem::replace(&mut blocks[t], vec![BigInt::zero(); f]);
            if top.iter().all(|x| x.is_zero()) {
                continue;
            }
            for i in 0..e {
                let prod = self.w_mul(&top, &self.eis[i]);
                for (j, c) in prod.into_iter().enumerate() {
                    blocks[t - e + i][j] -= c;
                }
            }
        }
        let mut out = Vec::with_capacity(e * f);
        for b in blocks.into_iter().take(e) {
            out.extend(b);
        }
        out
    }

    /// Multiply by pi once.
    fn ok_shift1(&self, a: &[BigInt]) -> Vec<BigInt> {
        let (e, f) = (self.e, self.f);
        let mut out = vec![BigInt::zero(); e * f];
        for i in 0..e - 1 {
            out[(i + 1) * f..(i + 2) * f].clone_from_slice(&a[i * f..(i + 1) * f]);
        }
        let top = &a[(e - 1) * f..e * f];
        if top.iter().any(|x| !x.is_zero()) {
            for i in 0..e {
                let prod = self.w_mul(top, &self.eis[i]);
                for (j, c) in prod.into_iter().enumerate() {
                    out[i * f + j] -= c;
                }
            }
        }
        out
    }

    fn ok_shift(&self, a: &[BigInt], k: i64, rel: i64) -> Vec<BigInt> {
        let mut cur = a.to_vec();
        let e = self.e as i64;
        // pi^e = p * eta with eta a unit; multiply by whole powers of p directly.
        let q = k / e;
        let r = k % e;
        for _ in 0..r {
            cur = self.ok_shift1(&cur);
            self.ok_reduce(&mut cur, rel);
        }
        if q > 0 {
            let eta = self.eta();
            let pq = big_pow(self.p, q);
            let etaq = self.ok_pow(&eta, q as u64, rel);
            cur = self.ok_mul(&cur, &etaq);
            for c in cur.iter_mut() {
                *c *= &pq;
            }
            self.ok_reduce(&mut cur, rel);
        }
        cur
    }

    /// eta = pi^e / p, a unit.
    fn eta(&self) -> Vec<BigInt> {
        let (e, f) = (self.e, self.f);
        let mut out = vec![BigInt::zero(); e * f];
        let pb = BigInt::from(self.p);
        for i in 0..e {
            for j in 0..f {
                out[i * f + j] = -(&self.eis[i][j]) / &pb;
            }
        }
        out
    }

    fn ok_pow(&self, a: &[BigInt], mut k: u64, rel: i64) -> Vec<BigInt> {
        let mut r = self.ok_one();
        let mut b = a.to_vec();
        while k > 0 {
            if k & 1 == 1 {
                r = self.ok_mul(&r, &b);
                self.ok_reduce(&mut r, rel);
            }
            k >>= 1;
            if k > 0 {
                b = self.ok_mul(&b, &b);
                self.ok_reduce(&mut b, rel);
            }
        }
        r
    }

    fn ok_one(&self) -> Vec<BigInt> {
        let mut v = vec![BigInt::zero(); self.n()];
        v[0] = BigInt::one();
        v
    }

    fn ok_unit_inverse(&self, u: &[BigInt], rel: i64) -> Result<Vec<BigInt>> {
        let res: Res = (0..self.f).map(|j| mod_u64(&u[j], self.p)).collect();
        let r0 = self.residue.inv(&res).ok_or(Error::DivisionByZero)?;
        let mut z = vec![BigInt::zero(); self.n()];
        for j in 0..self.f {
            z[j] = BigInt::from(r0[j]);
        }
        let mut prec = 1i64;
        while prec < rel {
            prec = (2 * prec).min(rel);
            let mut uz = self.ok_mul(u, &z);
            self.ok_reduce(&mut uz, prec);
            for c in uz.iter_mut() {
                *c = -c.clone();
            }
            uz[0] += 2;
            z = self.ok_mul(&z, &uz);
            self.ok_reduce(&mut z, prec);
        }
        Ok(z)
    }

    pub(crate) fn ok_reduce(&self, a: &mut [BigInt], rel: i64) {
        let (e, f) = (self.e as i64, self.f);
        let mut cache: Vec<(i64, BigInt)> = Vec::new();
        for i in 0..self.e {
            let k = (rel - i as i64 + e - 1).div_euclid(e);
            if k <= 0 {
                for j in 0..f {
                    a[i * f + j] = BigInt::zero();
                }
                continue;
            }
            let m = match cache.iter().find(|(kk, _)| *kk == k) {
                Some((_, m)) => m.clone(),
                None => {
                    let m = big_pow(self.p, k);
                    cache.push((k, m.clone()));
                    m
                }
            };
            for j in 0..f {
                let c = &a[i * f + j];
                if c.is_negative() || *c >= m {
                    a[i * f + j] = c.mod_floor(&m);
                }
            }
        }
    }

    pub(crate) fn ok_val(&self, a: &[BigInt]) -> Option<i64> {
        let (e, f) = (self.e, self.f);
        let mut best: Option<i64> = None;
        for i in 0..e {
            for j in 0..f {
                if let Some(v) = vp_big(&a[i * f + j], self.p) {
                    let cand = i as i64 + e as i64 * v;
                    best = Some(best.map_or(cand, |b: i64| b.min(cand)));
                }
            }
        }
        best
    }

    /// Exact division by pi^k of a vector with valuation at least k; result modulo pi^rel.
    fn ok_div_pi(&self, a: &[BigInt], k: i64, rel: i64) -> Vec<BigInt> {
        if k == 0 {
            let mut out = a.to_vec();
            self.ok_reduce(&mut out, rel);
            return out;
        }
        let e = self.e as i64;
        let (q, r) = (k / e, k % e);
        let mut cur: Vec<BigInt> = if q > 0 {
            let pq = big_pow(self.p, q);
            a.iter()
                .map(|c| {
                    let (x, rem) = c.div_mod_floor(&pq);
                    debug_assert!(rem.is_zero(), "inexact division by p^q");
                    x
                })
                .collect()
        } else {
            a.to_vec()
        };
        if r > 0 {
            let work = rel + r * e;
            let mult = self.ok_pow(&self.p_over_pi, r as u64, work);
            cur = self.ok_mul(&cur, &mult);
            self.ok_reduce(&mut cur, work);
            let pr = big_pow(self.p, r);
            for c in cur.iter_mut() {
                let (x, rem) = c.div_mod_floor(&pr);
                debug_assert!(rem.is_zero(), "inexact division by pi^r");
                *c = x;
            }
        }
        if q > 0 && e > 1 {
            let m = self.ok_pow(&self.eta_inv, q as u64, rel);
            cur = self.ok_mul(&cur, &m);
        }
        self.ok_reduce(&mut cur, rel);
        cur
    }

    fn compute_p_over_pi(&self) -> Result<Vec<BigInt>> {
        let (e, f) = (self.e, self.f);
        if e == 1 {
            return Ok(self.ok_one());
        }
        // p/pi = -(pi^{e-1} + a_{e-1} pi^{e-2} + ... + a_1) * (a_0/p)^{-1}
        let mut c = vec![BigInt::zero(); e * f];
        c[(e - 1) * f] = BigInt::one();
        for i in 1..e {
            for j in 0..f {
                c[(i - 1) * f + j] += &self.eis[i][j];
            }
        }
        for x in c.iter_mut() {
            *x = -x.clone();
        }
        let pb = BigInt::from(self.p);
        let u0: Vec<BigInt> = self.eis[0].iter().map(|x| x / &pb).collect();
        let digits = self.aux_prec / e as i64 + 2;
        let inv = self.w_unit_inverse(&u0, digits)?;
        let mut invk = vec![BigInt::zero(); e * f];
        invk[..f].clone_from_slice(&inv);
        let mut out = self.ok_mul(&c, &invk);
        self.ok_reduce(&mut out, self.aux_prec);
        Ok(out)
    }

    fn w_unit_inverse(&self, a: &[BigInt], digits: i64) -> Result<Vec<BigInt>> {
        let res: Res = a.iter().map(|x| mod_u64(x, self.p)).collect();
        let rinv = self.residue_from_w(&res);
        let inv0 = self.residue.inv(&rinv).ok_or(Error::DivisionByZero)?;
        let mut z: Vec<BigInt> = self.w_from_residue(&inv0);
        let mut prec = 1i64;
        while prec < digits {
            prec = (2 * prec).min(digits);
            let m = big_pow(self.p, prec);
            let az = self.w_mul(a, &z);
            let mut two_minus: Vec<BigInt> = az.iter().map(|x| -x).collect();
            two_minus[0] += 2;
            z = self.w_mul(&z, &two_minus).into_iter().map(|x| x.mod_floor(&m)).collect();
        }
        Ok(z)
    }

    // W coordinates (power basis in w with modulus wmod) and residue coordinates coincide
    // except when f == 1, where w is the integer g and the residue is a single digit.
    fn residue_from_w(&self, r: &[u64]) -> Res {
        r.to_vec()
    }

    fn w_from_residue(&self, r: &[u64]) -> Vec<BigInt> {
        r.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn normalize(&self, field: &LocalField, mut coeffs: Vec<BigInt>, shift: i64, rel_prec: i64) -> FieldElement {
        let rel_prec = rel_prec.min(EXACT);
        if rel_prec <= 0 {
            return field.zero_to(shift.saturating_add(rel_prec.max(0)));
        }
        self.ok_reduce(&mut coeffs, rel_prec);
        match self.ok_val(&coeffs) {
            None => field.zero_to(shift + rel_prec),
            Some(v) if v >= rel_prec => field.zero_to(shift + rel_prec),
            Some(v) => {
                let rel = (rel_prec - v).min(self.cap);
                self.ok_reduce(&mut coeffs, v + rel);
                let unit = self.ok_div_pi(&coeffs, v, rel);
                FieldElement { field: field.clone(), val: shift + v, rel, unit }
            }
        }
    }
}

// ---------- elements ----------

#[derive(Clone)]
pub struct FieldElement {
    field: LocalField,
    val: i64,
    rel: i64,
    unit: Vec<BigInt>,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fm, "{}", self.to_expansion())
    }
}

impl FieldElement {
    pub fn field(&self) -> &LocalField {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.rel == 0
    }

    pub fn is_exact_zero(&self) -> bool {
        self.rel == 0 && self.val >= EXACT
    }

    /// Certified valuation, or `None` when the element is zero to its precision.
    pub fn valuation(&self) -> Option<i64> {
        if self.rel == 0 {
            None
        } else {
            Some(self.val)
        }
    }

    /// Valuation or a lower bound (the absolute precision) for zero.
    pub fn val_or_prec(&self) -> i64 {
        self.val
    }

    pub fn val_checked(&self, what: &str) -> Result<i64> {
        self.valuation().ok_or_else(|| exhausted(format!("{what}: value is zero to precision {}", self.val)))
    }

    pub fn rel_prec(&self) -> i64 {
        self.rel
    }

    /// Absolute precision: the element is known modulo pi^abs_prec.
    pub fn abs_prec(&self) -> i64 {
        if self.rel == 0 {
            self.val
        } else {
            self.val + self.rel
        }
    }

    pub fn unit_coeffs(&self) -> &[BigInt] {
        &self.unit
    }

    fn data(&self) -> &FieldData {
        self.field.data()
    }

    fn check(&self, other: &FieldElement) {
        assert!(self.field == other.field, "field mismatch in arithmetic");
    }

    pub fn with_abs_prec(&self, abs: i64) -> FieldElement {
        if abs >= self.abs_prec() {
            return self.clone();
        }
        if self.rel == 0 || abs <= self.val {
            return self.field.zero_to(abs.min(self.val));
        }
        let rel = abs - self.val;
        let mut unit = self.unit.clone();
        self.data().ok_reduce(&mut unit, rel);
        FieldElement { field: self.field.clone(), val: self.val, rel, unit }
    }

    pub fn with_rel_prec(&self, rel: i64) -> FieldElement {
        if self.rel == 0 {
            return self.clone();
        }
        self.with_abs_prec(self.val + rel.max(1))
    }

    pub fn neg(&self) -> FieldElement {
        if self.rel == 0 {
            return self.clone();
        }
        let d = self.data();
        let mut unit: Vec<BigInt> = self.unit.iter().map(|c| -c).collect();
        d.ok_reduce(&mut unit, self.rel);
        FieldElement { field: self.field.clone(), val: self.val, rel: self.rel, unit }
    }

    pub fn add(&self, other: &FieldElement) -> FieldElement {
        self.check(other);
        let abs = self.abs_prec().min(other.abs_prec());
        if self.rel == 0 && other.rel == 0 {
            return self.field.zero_to(abs);
        }
        if self.rel == 0 {
            return other.with_abs_prec(abs);
        }
        if other.rel == 0 {
            return self.with_abs_prec(abs);
        }
        let d = self.data();
        let s = self.val.min(other.val);
        let r = abs - s;
        if r <= 0 {
            return self.field.zero_to(abs);
        }
        let mut acc = vec![BigInt::zero(); d.n()];
        for x in [self, other] {
            let k = x.val - s;
            if k >= r {
                continue;
            }
            let shifted = if k == 0 { x.unit.clone() } else { d.ok_shift(&x.unit, k, r) };
            for (a, b) in acc.iter_mut().zip(shifted) {
                *a += b;
            }
        }
        d.normalize(&self.field, acc, s, r)
    }

    pub fn sub(&self, other: &FieldElement) -> FieldElement {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &FieldElement) -> FieldElement {
        self.check(other);
        if self.rel == 0 || other.rel == 0 {
            if self.is_exact_zero() || other.is_exact_zero() {
                return self.field.zero();
            }
            return self.field.zero_to(self.val.saturating_add(other.val).min(EXACT));
        }
        let d = self.data();
        let rel = self.rel.min(other.rel);
        let mut unit = d.ok_mul(&self.unit, &other.unit);
        d.ok_reduce(&mut unit, rel);
        FieldElement { field: self.field.clone(), val: self.val + other.val, rel, unit }
    }

    pub fn mul_int(&self, n: i64) -> FieldElement {
        self.mul(&self.field.from_int(n))
    }

    pub fn square(&self) -> FieldElement {
        self.mul(self)
    }

    pub fn residue(&self) -> Result<Res> {
        let k = self.field.residue_field();
        match self.valuation() {
            None => {
                if self.val >= 1 {
                    Ok(k.zero())
                } else {
                    Err(exhausted("residue of an element zero to precision < 1"))
                }
            }
            Some(v) if v > 0 => Ok(k.zero()),
            Some(0) => {
                let f = self.field.f();
                Ok((0..f).map(|j| mod_u64(&self.unit[j], self.field.p())).collect())
            }
            Some(_) => Err(Error::NotIntegral("residue of an element of negative valuation".into())),
        }
    }

    /// Residue of the unit part x / pi^v(x).
    pub fn unit_residue(&self) -> Result<Res> {
        if self.rel == 0 {
            return Err(exhausted("unit residue of zero"));
        }
        Ok((0..self.field.f()).map(|j| mod_u64(&self.unit[j], self.field.p())).collect())
    }

    pub fn inv(&self) -> Result<FieldElement> {
        if self.rel == 0 {
            return Err(Error::DivisionByZero);
        }
        let d = self.data();
        let k = self.field.residue_field();
        let r = self.unit_residue()?;
        let r0 = k.inv(&r).ok_or(Error::DivisionByZero)?;
        let mut z = vec![BigInt::zero(); d.n()];
        for j in 0..self.field.f() {
            z[j] = BigInt::from(r0[j]);
        }
        let mut prec = 1i64;
        while prec < self.rel {
            prec = (2 * prec).min(self.rel);
            let mut uz = d.ok_mul(&self.unit, &z);
            d.ok_reduce(&mut uz, prec);
            for c in uz.iter_mut() {
                *c = -c.clone();
            }
            uz[0] += 2;
            z = d.ok_mul(&z, &uz);
            d.ok_reduce(&mut z, prec);
        }
        Ok(FieldElement { field: self.field.clone(), val: -self.val, rel: self.rel, unit: z })
    }

    pub fn div(&self, other: &FieldElement) -> Result<FieldElement> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, n: i64) -> Result<FieldElement> {
        if n < 0 {
            return self.inv()?.pow(-n);
        }
        let mut r = self.field.one();
        let mut b = self.clone();
        let mut k = n as u64;
        while k > 0 {
            if k & 1 == 1 {
                r = r.mul(&b);
            }
            k >>= 1;
            if k > 0 {
                b = b.square();
            }
        }
        Ok(r)
    }

    pub fn pow_u(&self, n: u64) -> FieldElement {
        self.pow(n as i64).expect("non-negative power")
    }

    /// Multiply by pi^k (exact shift).
    pub fn shift(&self, k: i64) -> FieldElement {
        let mut out = self.clone();
        if out.is_exact_zero() {
            return out;
        }
        out.val += k;
        out
    }

    /// True when self - other is zero to the combined precision.
    pub fn eq_approx(&self, other: &FieldElement) -> bool {
        self.sub(other).is_zero()
    }

    /// O_K coordinates (length e*f) of x * pi^{-shift}, requires v(x) >= shift.
    pub fn ok_coords_at(&self, shift: i64) -> Result<Vec<BigInt>> {
        let d = self.data();
        if self.rel == 0 {
            return Ok(vec![BigInt::zero(); d.n()]);
        }
        let k = self.val - shift;
        if k < 0 {
            return Err(Error::NotIntegral("coordinates requested below the valuation".into()));
        }
        let rel = self.rel + k;
        Ok(if k == 0 { self.unit.clone() } else { d.ok_shift(&self.unit, k, rel) })
    }

    /// O_K coordinates of an integral element.
    pub fn integral_coords(&self) -> Result<Vec<BigInt>> {
        self.ok_coords_at(0)
    }

    /// Exact integer when the field is Q_p-like (e = f = 1) and the element is integral.
    pub fn to_bigint(&self) -> Result<BigInt> {
        let c = self.integral_coords()?;
        Ok(c[0].clone())
    }

    pub fn to_expansion(&self) -> String {
        if self.rel == 0 {
            if self.is_exact_zero() {
                return "0".to_string();
            }
            return format!("O(pi^{})", self.val);
        }
        let (e, f) = (self.field.e(), self.field.f());
        let mut terms = Vec::new();
        for i in 0..e {
            let w: Vec<String> = (0..f)
                .filter(|&j| !self.unit[i * f + j].is_zero())
                .map(|j| match j {
                    0 => format!("{}", self.unit[i * f + j]),
                    1 => format!("{}*w", self.unit[i * f + j]),
                    _ => format!("{}*w^{}", self.unit[i * f + j], j),
                })
                .collect();
            if w.is_empty() {
                continue;
            }
            let coef = if w.len() == 1 { w[0].clone() } else { format!("({})", w.join(" + ")) };
            let k = self.val + i as i64;
            terms.push(match k {
                0 => coef,
                _ => format!("{coef}*pi^{k}"),
            });
        }
        format!("{} + O(pi^{})", terms.join(" + "), self.abs_prec())
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl std::ops::$tr<&FieldElement> for &FieldElement {
            type Output = FieldElement;
            fn $m(self, rhs: &FieldElement) -> FieldElement {
                self.$f(rhs)
            }
        }
        impl std::ops::$tr<FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $m(self, rhs: FieldElement) -> FieldElement {
                (&self).$f(&rhs)
            }
        }
        impl std::ops::$tr<&FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $m(self, rhs: &FieldElement) -> FieldElement {
                (&self).$f(rhs)
            }
        }
        impl std::ops::$tr<FieldElement> for &FieldElement {
            type Output = FieldElement;
            fn $m(self, rhs: FieldElement) -> FieldElement {
                self.$f(&rhs)
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);

impl std::ops::Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::neg(self)
    }
}

impl std::ops::Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::neg(&self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(LocalField::new(4, 1, None, 20), Err(Error::NotPrime(4))));
        assert!(matches!(LocalField::new(3, 1, Some(&ints(&[3, 1, 1])), 20), Err(Error::NotEisenstein(_))));
        assert!(matches!(LocalField::new(3, 1, Some(&ints(&[9, 3, 1])), 20), Err(Error::NotEisenstein(_))));
        assert!(matches!(
            LocalField::new(3, 1, Some(&ints(&[3, 3, 1])), 3),
            Err(Error::PrecisionTooLow { given: 3, minimum: 4 })
        ));
    }

    #[test]
    fn integers_in_qp() {
        let k = LocalField::qp(5, 20).unwrap();
        let x = k.from_int(50);
        assert_eq!(x.valuation(), Some(2));
        let y = k.from_int(3);
        let z = x.mul(&y).add(&k.from_int(-150));
        assert!(z.is_zero());
        let inv = y.inv().unwrap();
        assert!(inv.mul(&y).eq_approx(&k.one()));
        assert_eq!(x.div(&k.from_int(25)).unwrap().to_bigint().unwrap(), BigInt::from(2));
    }

    #[test]
    fn cyclotomic_cube_root_of_unity() {
        // pi^2 + 3 pi + 3 = 0, zeta = pi + 1 satisfies zeta^2 + zeta + 1 = 0
        let k = LocalField::new(3, 1, Some(&ints(&[3, 3, 1])), 40).unwrap();
        assert_eq!(k.e(), 2);
        let pi = k.uniformizer();
        let zeta = pi.add(&k.one());
        let s = zeta.square().add(&zeta).add(&k.one());
        assert!(s.is_zero());
        assert_eq!(zeta.sub(&k.one()).valuation(), Some(1));
        assert_eq!(k.from_int(3).valuation(), Some(2));
        assert!(zeta.pow(3).unwrap().eq_approx(&k.one()));
    }

    #[test]
    fn unramified_quadratic() {
        let k = LocalField::new(2, 2, None, 30).unwrap();
        let w = k.omega();
        // residue of w generates F_4^*: w^3 is a principal unit
        let w3 = w.pow(3).unwrap();
        assert!(w3.sub(&k.one()).val_or_prec() >= 1);
        assert_eq!(w.valuation(), Some(0));
        let x = w.add(&k.from_int(2));
        let y = x.inv().unwrap();
        assert!(x.mul(&y).eq_approx(&k.one()));
    }

    #[test]
    fn division_normalizes_and_tracks_precision() {
        let k = LocalField::new(2, 1, Some(&ints(&[-2, 0, 1])), 40).unwrap();
        let pi = k.uniformizer();
        assert!(pi.square().eq_approx(&k.from_int(2)));
        let a = pi.pow(5).unwrap().add(&k.from_int(8).mul(&pi));
        assert_eq!(a.valuation(), Some(5));
        let b = a.div(&pi.pow(5).unwrap()).unwrap();
        assert_eq!(b.valuation(), Some(0));
        assert!(b.eq_approx(&k.from_int(3)));
        assert!(a.rel_prec() <= 40);
    }

    #[test]
    fn pi_over_p_inverse_in_eisenstein_field_over_w() {
        // Q_4(cube root of 2)
        let k = LocalField::new(2, 2, Some(&ints(&[-2, 0, 0, 1])), 36).unwrap();
        let pi = k.uniformizer();
        let w = k.omega();
        let x = pi.mul(&w).add(&k.from_int(1));
        let y = x.inv().unwrap();
        assert!(x.mul(&y).eq_approx(&k.one()));
        let z = pi.pow(7).unwrap().mul(&w);
        assert_eq!(z.valuation(), Some(7));
        let t = z.div(&pi.pow(4).unwrap()).unwrap();
        assert!(t.eq_approx(&pi.pow(3).unwrap().mul(&w)));
    }
}
