//! Finite residue fields F_q = F_p[w]/(m(w)) and polynomials over them.

use crate::arith::{inv_mod, prime_factors};
use crate::error::{Error, Result};

pub type Res = Vec<u64>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueField {
    p: u64,
    f: usize,
    // monic, length f + 1, primitive over F_p
    modulus: Vec<u64>,
}

const MAX_ENUM: u64 = 1 << 20;

impl ResidueField {
    pub fn new(p: u64, f: usize) -> Self {
        assert!(f >= 1);
        let q = (p as u128).pow(f as u32);
        assert!(q < (1u128 << 62), "residue field too large");
        let q = q as u64;
        let mut digits = vec![0u64; f];
        loop {
            let mut modulus = digits.clone();
            modulus.push(1);
            let cand = ResidueField { p, f, modulus };
            if cand.x_is_primitive(q) {
                return cand;
            }
            let mut i = 0;
            loop {
                digits[i] += 1;
                if digits[i] < p {
                    break;
                }
                digits[i] = 0;
                i += 1;
                assert!(i < f, "no primitive polynomial found");
            }
        }
    }

    fn x_is_primitive(&self, q: u64) -> bool {
        if self.modulus[0] == 0 {
            return false;
        }
        let x = self.gen();
        if self.pow(&x, q - 1) != self.one() {
            return false;
        }
        prime_factors(q - 1).into_iter().all(|l| self.pow(&x, (q - 1) / l) != self.one())
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.f
    }

    pub fn order(&self) -> u64 {
        self.p.pow(self.f as u32)
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn zero(&self) -> Res {
        vec![0; self.f]
    }

    pub fn one(&self) -> Res {
        let mut v = self.zero();
        v[0] = 1;
        v
    }

    pub fn gen(&self) -> Res {
        let mut v = self.zero();
        if self.f == 1 {
            v[0] = (self.p - self.modulus[0]) % self.p;
        } else {
            v[1] = 1;
        }
        v
    }

    pub fn from_int(&self, a: i64) -> Res {
        let mut v = self.zero();
        v[0] = a.rem_euclid(self.p as i64) as u64;
        v
    }

    pub fn is_zero(&self, a: &[u64]) -> bool {
        a.iter().all(|&x| x == 0)
    }

    pub fn from_index(&self, mut idx: u64) -> Res {
        let mut v = self.zero();
        for c in v.iter_mut() {
            *c = idx % self.p;
            idx /= self.p;
        }
        v
    }

    pub fn index(&self, a: &[u64]) -> u64 {
        a.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    pub fn elements(&self) -> Result<impl Iterator<Item = Res> + '_> {
        let q = self.order();
        if q > MAX_ENUM {
            return Err(Error::CapExceeded(format!("residue field of order {q} too large to enumerate")));
        }
        Ok((0..q).map(move |i| self.from_index(i)))
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Res {
        a.iter().zip(b).map(|(x, y)| (x + y) % self.p).collect()
    }

    pub fn sub(&self, a: &[u64], b: &[u64]) -> Res {
        a.iter().zip(b).map(|(x, y)| (x + self.p - y) % self.p).collect()
    }

    pub fn neg(&self, a: &[u64]) -> Res {
        a.iter().map(|x| (self.p - x) % self.p).collect()
    }

    pub fn scale(&self, a: &[u64], c: u64) -> Res {
        a.iter().map(|x| x * (c % self.p) % self.p).collect()
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Res {
        let f = self.f;
        let p = self.p;
        let mut prod = vec![0u64; 2 * f - 1];
        for (i, x) in a.iter().enumerate() {
            if *x == 0 {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % p;
            }
        }
        for d in (f..prod.len()).rev() {
            let c = prod[d];
            if c != 0 {
                for k in 0..f {
                    prod[d - f + k] = (prod[d - f + k] + p - c * self.modulus[k] % p) % p;
                }
            }
        }
        prod.truncate(f);
        prod
    }

    pub fn pow(&self, a: &[u64], mut e: u64) -> Res {
        let mut r = self.one();
        let mut b = a.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        r
    }

    pub fn inv(&self, a: &[u64]) -> Option<Res> {
        if self.is_zero(a) {
            None
        } else {
            Some(self.pow(a, self.order() - 2))
        }
    }

    pub fn frobenius(&self, a: &[u64]) -> Res {
        self.pow(a, self.p)
    }

    /// The unique b with b^p = a.
    pub fn pth_root(&self, a: &[u64]) -> Res {
        self.pow(a, self.order() / self.p)
    }

    /// Coordinates over F_p in the power basis 1, w, ..., w^{f-1}.
    pub fn coords(&self, a: &[u64]) -> Vec<u64> {
        a.to_vec()
    }

    /// Absolute trace to F_p.
    pub fn trace(&self, a: &[u64]) -> u64 {
        let mut s = self.zero();
        let mut x = a.to_vec();
        for _ in 0..self.f {
            s = self.add(&s, &x);
            x = self.frobenius(&x);
        }
        s[0]
    }

    /// Degree over F_p of the subfield generated by a.
    pub fn element_degree(&self, a: &[u64]) -> usize {
        let mut x = self.frobenius(a);
        let mut d = 1;
        while x != a {
            x = self.frobenius(&x);
            d += 1;
        }
        d
    }

    // ---- polynomials over F_q, coefficient lists low to high ----

    pub fn poly_trim(&self, a: &mut Vec<Res>) {
        while a.last().is_some_and(|c| self.is_zero(c)) {
            a.pop();
        }
    }

    pub fn poly_eval(&self, a: &[Res], x: &[u64]) -> Res {
        let mut acc = self.zero();
        for c in a.iter().rev() {
            acc = self.add(&self.mul(&acc, x), c);
        }
        acc
    }

    pub fn poly_mul(&self, a: &[Res], b: &[Res]) -> Vec<Res> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![self.zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if self.is_zero(x) {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                out[i + j] = self.add(&out[i + j], &self.mul(x, y));
            }
        }
        self.poly_trim(&mut out);
        out
    }

    pub fn poly_sub(&self, a: &[Res], b: &[Res]) -> Vec<Res> {
        let n = a.len().max(b.len());
        let z = self.zero();
        let mut out: Vec<Res> = (0..n)
            .map(|i| self.sub(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z)))
            .collect();
        self.poly_trim(&mut out);
        out
    }

    pub fn poly_divrem(&self, a: &[Res], b: &[Res]) -> (Vec<Res>, Vec<Res>) {
        let mut b = b.to_vec();
        self.poly_trim(&mut b);
        assert!(!b.is_empty(), "polynomial division by zero");
        let mut r = a.to_vec();
        self.poly_trim(&mut r);
        if r.len() < b.len() {
            return (Vec::new(), r);
        }
        let lead_inv = self.inv(b.last().unwrap()).unwrap();
        let mut q = vec![self.zero(); r.len() - b.len() + 1];
        while r.len() >= b.len() {
            let shift = r.len() - b.len();
            let c = self.mul(r.last().unwrap(), &lead_inv);
            for (i, bc) in b.iter().enumerate() {
                r[shift + i] = self.sub(&r[shift + i], &self.mul(&c, bc));
            }
            q[shift] = c;
            self.poly_trim(&mut r);
            if r.len() < b.len() {
                break;
            }
        }
        self.poly_trim(&mut q);
        (q, r)
    }

    pub fn poly_monic(&self, a: &[Res]) -> Vec<Res> {
        let mut a = a.to_vec();
        self.poly_trim(&mut a);
        if let Some(l) = a.last().cloned() {
            let inv = self.inv(&l).unwrap();
            for c in a.iter_mut() {
                *c = self.mul(c, &inv);
            }
        }
        a
    }

    pub fn poly_gcd(&self, a: &[Res], b: &[Res]) -> Vec<Res> {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        self.poly_trim(&mut x);
        self.poly_trim(&mut y);
        while !y.is_empty() {
            let (_, r) = self.poly_divrem(&x, &y);
            x = y;
            y = r;
        }
        self.poly_monic(&x)
    }

    pub fn poly_derivative(&self, a: &[Res]) -> Vec<Res> {
        let mut out: Vec<Res> = a.iter().enumerate().skip(1).map(|(i, c)| self.scale(c, i as u64)).collect();
        self.poly_trim(&mut out);
        out
    }

    fn poly_powmod(&self, base: &[Res], mut e: u64, m: &[Res]) -> Vec<Res> {
        let mut r = vec![self.one()];
        let mut b = self.poly_divrem(base, m).1;
        while e > 0 {
            if e & 1 == 1 {
                r = self.poly_divrem(&self.poly_mul(&r, &b), m).1;
            }
            b = self.poly_divrem(&self.poly_mul(&b, &b), m).1;
            e >>= 1;
        }
        r
    }

    /// Roots in F_q, with multiplicity ignored.
    pub fn poly_roots(&self, a: &[Res]) -> Result<Vec<Res>> {
        let mut a = a.to_vec();
        self.poly_trim(&mut a);
        if a.len() <= 1 {
            return Ok(Vec::new());
        }
        Ok(self
            .factor(&a)?
            .into_iter()
            .filter(|(g, _)| g.len() == 2)
            .map(|(g, _)| self.neg(&g[0]))
            .collect())
    }

    /// Factorization into monic irreducibles with multiplicities, sorted deterministically.
    pub fn factor(&self, a: &[Res]) -> Result<Vec<(Vec<Res>, usize)>> {
        let a = self.poly_monic(a);
        let mut out = Vec::new();
        for (sq, mult) in self.squarefree(&a) {
            for g in self.berlekamp(&sq)? {
                out.push((g, mult));
            }
        }
        out.sort_by(|x, y| {
            x.0.len().cmp(&y.0.len()).then_with(|| {
                let kx: Vec<u64> = x.0.iter().map(|c| self.index(c)).collect();
                let ky: Vec<u64> = y.0.iter().map(|c| self.index(c)).collect();
                kx.cmp(&ky)
            })
        });
        Ok(out)
    }

    fn squarefree(&self, a: &[Res]) -> Vec<(Vec<Res>, usize)> {
        let mut out = Vec::new();
        if a.len() <= 1 {
            return out;
        }
        let d = self.poly_derivative(a);
        if d.is_empty() {
            // a(X) = b(X^p)
            let b: Vec<Res> = a.iter().step_by(self.p as usize).map(|c| self.pth_root(c)).collect();
            for (g, m) in self.squarefree(&b) {
                out.push((g, m * self.p as usize));
            }
            return out;
        }
        let c = self.poly_gcd(a, &d);
        let mut w = self.poly_divrem(a, &c).0;
        let mut c = c;
        let mut i = 1;
        while w.len() > 1 {
            let y = self.poly_gcd(&w, &c);
            let z = self.poly_divrem(&w, &y).0;
            if z.len() > 1 {
                out.push((self.poly_monic(&z), i));
            }
            i += 1;
            w = y;
            c = self.poly_divrem(&c, &w).0;
        }
        if c.len() > 1 {
            for (g, m) in self.squarefree(&c) {
                out.push((g, m * self.p as usize));
            }
        }
        // merge duplicate factors from the recursive branch
        let mut merged: Vec<(Vec<Res>, usize)> = Vec::new();
        for (g, m) in out {
            if let Some(e) = merged.iter_mut().find(|(h, _)| *h == g) {
                e.1 += m;
            } else {
                merged.push((g, m));
            }
        }
        merged
    }

    /// Berlekamp splitting of a squarefree monic polynomial.
    fn berlekamp(&self, a: &[Res]) -> Result<Vec<Vec<Res>>> {
        let n = a.len() - 1;
        if n <= 1 {
            return Ok(vec![a.to_vec()]);
        }
        let q = self.order();
        if q > MAX_ENUM {
            return Err(Error::CapExceeded("residue field too large for Berlekamp".into()));
        }
        // Matrix of h -> h^q - h on F_q[X]/(a), columns indexed by X^j.
        let xq = self.poly_powmod(&[self.zero(), self.one()], q, a);
        let mut cols: Vec<Vec<Res>> = Vec::with_capacity(n);
        let mut cur = vec![self.one()];
        for j in 0..n {
            let mut col = cur.clone();
            col.resize(n, self.zero());
            col[j] = self.sub(&col[j], &self.one());
            cols.push(col);
            cur = self.poly_divrem(&self.poly_mul(&cur, &xq), a).1;
        }
        let kernel = self.fq_nullspace(&cols, n);
        if kernel.len() == 1 {
            return Ok(vec![a.to_vec()]);
        }
        let mut factors = vec![a.to_vec()];
        for h in kernel.iter() {
            let mut h = h.clone();
            self.poly_trim(&mut h);
            if h.len() <= 1 {
                continue;
            }
            let mut next = Vec::new();
            for g in factors {
                if g.len() <= 2 {
                    next.push(g);
                    continue;
                }
                let mut rest = g.clone();
                for c in self.elements()? {
                    if rest.len() <= 2 {
                        break;
                    }
                    let mut hc = h.clone();
                    hc[0] = self.sub(&hc[0], &c);
                    let d = self.poly_gcd(&rest, &hc);
                    if d.len() > 1 && d.len() < rest.len() {
                        rest = self.poly_divrem(&rest, &d).0;
                        rest = self.poly_monic(&rest);
                        next.push(d);
                    }
                }
                next.push(rest);
            }
            factors = next;
            if factors.len() == kernel.len() {
                break;
            }
        }
        Ok(factors)
    }

    /// Null space of the n x n matrix whose columns are given, over F_q.
    fn fq_nullspace(&self, cols: &[Vec<Res>], n: usize) -> Vec<Vec<Res>> {
        let mut m: Vec<Vec<Res>> = (0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..n {
            let Some(piv) = (r..n).find(|&i| !self.is_zero(&m[i][c])) else {
                continue;
            };
            m.swap(piv, r);
            let inv = self.inv(&m[r][c]).unwrap();
            for j in 0..n {
                m[r][j] = self.mul(&m[r][j], &inv);
            }
            for i in 0..n {
                if i != r && !self.is_zero(&m[i][c]) {
                    let fct = m[i][c].clone();
                    for j in 0..n {
                        let t = self.mul(&fct, &m[r][j]);
                        m[i][j] = self.sub(&m[i][j], &t);
                    }
                }
            }
            pivots.push(c);
            r += 1;
            if r == n {
                break;
            }
        }
        (0..n)
            .filter(|c| !pivots.contains(c))
            .map(|fc| {
                let mut v = vec![self.zero(); n];
                v[fc] = self.one();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = self.neg(&m[row][fc]);
                }
                v
            })
            .collect()
    }

    pub fn inv_fp(&self, a: u64) -> u64 {
        inv_mod(a, self.p)
    }
}
