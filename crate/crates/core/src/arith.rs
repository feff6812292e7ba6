//! Integer helpers and dense linear algebra over the prime field F_p.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn pow_u64(p: u64, k: u32) -> u64 {
    p.checked_pow(k).expect("u64 overflow in pow_u64")
}

pub fn big_pow(p: u64, k: i64) -> BigInt {
    if k <= 0 {
        return BigInt::one();
    }
    num_traits::pow(BigInt::from(p), k as usize)
}

/// p-adic valuation of a nonzero integer; `None` for zero.
pub fn vp_big(n: &BigInt, p: u64) -> Option<i64> {
    if n.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    let mut m = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return Some(v);
        }
        m = q;
        v += 1;
    }
}

pub fn mod_floor_big(a: &BigInt, m: &BigInt) -> BigInt {
    a.mod_floor(m)
}

pub fn mod_u64(a: &BigInt, p: u64) -> u64 {
    let r = a.mod_floor(&BigInt::from(p));
    r.iter_u64_digits().next().unwrap_or(0)
}

pub fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a % p, p - 2, p)
}

pub fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = ((r as u128 * a as u128) % p as u128) as u64;
        }
        a = ((a as u128 * a as u128) % p as u128) as u64;
        e >>= 1;
    }
    r
}

/// Dense matrix over F_p stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpMatrix {
    pub p: u64,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u64>,
}

impl FpMatrix {
    pub fn zeros(p: u64, rows: usize, cols: usize) -> Self {
        FpMatrix { p, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn from_rows(p: u64, cols: usize, rows: &[Vec<u64>]) -> Self {
        let mut m = FpMatrix::zeros(p, rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols);
            for (j, &x) in r.iter().enumerate() {
                m.data[i * cols + j] = x % p;
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v % self.p;
    }

    pub fn row(&self, i: usize) -> Vec<u64> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn transpose(&self) -> FpMatrix {
        let mut t = FpMatrix::zeros(self.p, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        (0..self.rows)
            .map(|i| {
                let mut s = 0u64;
                for j in 0..self.cols {
                    s = (s + self.get(i, j) * v[j]) % self.p;
                }
                s
            })
            .collect()
    }

    /// Reduced row echelon form in place; returns pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let p = self.p;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(piv) = (r..self.rows).find(|&i| self.get(i, c) != 0) else {
                continue;
            };
            if piv != r {
                for j in 0..self.cols {
                    self.data.swap(piv * self.cols + j, r * self.cols + j);
                }
            }
            let inv = inv_mod(self.get(r, c), p);
            for j in 0..self.cols {
                let v = self.get(r, j) * inv % p;
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i != r {
                    let factor = self.get(i, c);
                    if factor != 0 {
                        for j in 0..self.cols {
                            let v = (self.get(i, j) + p - factor * self.get(r, j) % p) % p;
                            self.set(i, j, v);
                        }
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Basis of the right null space {v : M v = 0}.
    pub fn nullspace(&self) -> Vec<Vec<u64>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let p = self.p;
        free.iter()
            .map(|&fc| {
                let mut v = vec![0u64; self.cols];
                v[fc] = 1;
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = (p - m.get(r, fc)) % p;
                }
                v
            })
            .collect()
    }

    /// Solve M x = b, returning one solution if consistent.
    pub fn solve(&self, b: &[u64]) -> Option<Vec<u64>> {
        let mut aug = FpMatrix::zeros(self.p, self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, self.cols, b[i]);
        }
        let pivots = aug.rref();
        if pivots.contains(&self.cols) {
            return None;
        }
        let mut x = vec![0u64; self.cols];
        for (r, &pc) in pivots.iter().enumerate() {
            x[pc] = aug.get(r, self.cols);
        }
        Some(x)
    }
}

/// Incrementally maintained row space over F_p, used to grow spanning sets.
#[derive(Clone, Debug)]
pub struct Span {
    p: u64,
    dim: usize,
    // echelon rows keyed by pivot column
    rows: Vec<(usize, Vec<u64>)>,
}

impl Span {
    pub fn new(p: u64, dim: usize) -> Self {
        Span { p, dim, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ambient(&self) -> usize {
        self.dim
    }

    fn reduce(&self, v: &[u64]) -> Vec<u64> {
        let p = self.p;
        let mut w: Vec<u64> = v.iter().map(|x| x % p).collect();
        for (pc, row) in &self.rows {
            let c = w[*pc];
            if c != 0 {
                for j in 0..self.dim {
                    w[j] = (w[j] + p - c * row[j] % p) % p;
                }
            }
        }
        w
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    /// Insert a vector; returns true when the rank grew.
    pub fn insert(&mut self, v: &[u64]) -> bool {
        let w = self.reduce(v);
        let Some(pc) = w.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = inv_mod(w[pc], self.p);
        let w: Vec<u64> = w.iter().map(|x| x * inv % self.p).collect();
        let p = self.p;
        for (_, row) in self.rows.iter_mut() {
            let c = row[pc];
            if c != 0 {
                for j in 0..self.dim {
                    row[j] = (row[j] + p - c * w[j] % p) % p;
                }
            }
        }
        self.rows.push((pc, w));
        true
    }

    pub fn basis(&self) -> Vec<Vec<u64>> {
        self.rows.iter().map(|(_, r)| r.clone()).collect()
    }

    /// All nonzero vectors of the span, or None when there are more than `limit`.
    pub fn elements(&self, limit: usize) -> Option<Vec<Vec<u64>>> {
        let total = (self.p as usize).checked_pow(self.rows.len() as u32)?;
        if total - 1 > limit {
            return None;
        }
        let mut out = Vec::new();
        for idx in 1..total {
            let mut v = vec![0u64; self.dim];
            let mut c = idx;
            for (_, row) in &self.rows {
                let a = (c % self.p as usize) as u64;
                c /= self.p as usize;
                for (o, x) in v.iter_mut().zip(row) {
                    *o = (*o + a * x) % self.p;
                }
            }
            out.push(v);
        }
        Some(out)
    }

    /// A linear functional vanishing on the span, when the span has codimension one.
    pub fn annihilator(&self) -> Vec<Vec<u64>> {
        let m = FpMatrix::from_rows(self.p, self.dim, &self.basis());
        if self.rows.is_empty() {
            return (0..self.dim)
                .map(|i| {
                    let mut v = vec![0; self.dim];
                    v[i] = 1;
                    v
                })
                .collect();
        }
        m.nullspace()
    }
}

pub fn dot_mod(a: &[u64], b: &[u64], p: u64) -> u64 {
    a.iter().zip(b).fold(0, |s, (x, y)| (s + x * y) % p)
}

pub fn is_zero_vec(v: &[u64]) -> bool {
    v.iter().all(|&x| x == 0)
}

/// Smallest non-negative representative of a rational number modulo p^k is not needed;
/// this converts a signed integer to its residue class mod p.
pub fn signed_mod(a: i64, p: u64) -> u64 {
    a.rem_euclid(p as i64) as u64
}

pub fn bigint_is_positive(a: &BigInt) -> bool {
    a.is_positive()
}
