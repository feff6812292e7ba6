//! Truncated power series in one variable with coefficients in a local field.

use crate::error::{Error, Result};
use crate::padic::{FieldElement, LocalField};

#[derive(Clone, Debug)]
pub struct Series {
    field: LocalField,
    /// coefficients of z^0 .. z^{n-1}; everything from z^n on is unknown
    c: Vec<FieldElement>,
}

impl Series {
    pub fn zero(k: &LocalField, n: usize) -> Self {
        Series { field: k.clone(), c: vec![k.zero(); n] }
    }

    pub fn from_coeffs(k: &LocalField, n: usize, c: &[FieldElement]) -> Self {
        let mut s = Series::zero(k, n);
        for (i, x) in c.iter().enumerate().take(n) {
            s.c[i] = x.clone();
        }
        s
    }

    pub fn var(k: &LocalField, n: usize) -> Self {
        let mut s = Series::zero(k, n);
        if n > 1 {
            s.c[1] = k.one();
        }
        s
    }

    pub fn constant(x: &FieldElement, n: usize) -> Self {
        Series::from_coeffs(x.field(), n, std::slice::from_ref(x))
    }

    pub fn order(&self) -> usize {
        self.c.len()
    }
    pub fn coeffs(&self) -> &[FieldElement] {
        &self.c
    }
    pub fn coeff(&self, i: usize) -> FieldElement {
        self.c.get(i).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn add(&self, o: &Series) -> Series {
        let n = self.order().min(o.order());
        Series { field: self.field.clone(), c: (0..n).map(|i| self.c[i].add(&o.c[i])).collect() }
    }

    pub fn sub(&self, o: &Series) -> Series {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Series {
        Series { field: self.field.clone(), c: self.c.iter().map(|x| x.neg()).collect() }
    }

    pub fn scale(&self, a: &FieldElement) -> Series {
        Series { field: self.field.clone(), c: self.c.iter().map(|x| x.mul(a)).collect() }
    }

    pub fn mul(&self, o: &Series) -> Series {
        let n = self.order().min(o.order());
        let mut out = vec![self.field.zero(); n];
        for (i, a) in self.c.iter().enumerate().take(n) {
            if a.is_exact_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate().take(n - i) {
                if b.is_exact_zero() {
                    continue;
                }
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Series { field: self.field.clone(), c: out }
    }

    /// Multiply by z^k, dropping what falls past the truncation.
    pub fn shift_up(&self, k: usize) -> Series {
        let n = self.order();
        let mut out = vec![self.field.zero(); n];
        for i in k..n {
            out[i] = self.c[i - k].clone();
        }
        Series { field: self.field.clone(), c: out }
    }

    pub fn pow(&self, k: usize) -> Series {
        let mut r = Series::constant(&self.field.one(), self.order());
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    /// Inverse of a series whose constant term is a unit.
    pub fn inv_unit(&self) -> Result<Series> {
        let c0 = &self.c[0];
        if c0.valuation() != Some(0) {
            return Err(Error::Unsupported("series inverse needs a unit constant term".into()));
        }
        let inv0 = c0.inv()?;
        let n = self.order();
        let mut out = vec![self.field.zero(); n];
        out[0] = inv0.clone();
        for k in 1..n {
            let mut s = self.field.zero();
            for j in 1..=k {
                s = s.add(&self.c[j].mul(&out[k - j]));
            }
            out[k] = s.mul(&inv0).neg();
        }
        Ok(Series { field: self.field.clone(), c: out })
    }

    /// self(g) for g without constant term.
    pub fn compose(&self, g: &Series) -> Series {
        let n = self.order().min(g.order());
        let mut acc = Series::zero(&self.field, n);
        for a in self.c.iter().take(n).rev() {
            acc = acc.mul(g);
            acc.c[0] = acc.c[0].add(a);
        }
        acc
    }

    pub fn valuation_in_z(&self) -> Option<usize> {
        self.c.iter().position(|x| !x.is_zero())
    }
}

/// Power series in two variables truncated by total degree.
#[derive(Clone, Debug)]
pub struct Series2 {
    field: LocalField,
    n: usize,
    /// c[i][j] is the coefficient of X^i Y^j, i + j < n
    c: Vec<Vec<FieldElement>>,
}

impl Series2 {
    pub fn zero(k: &LocalField, n: usize) -> Self {
        Series2 { field: k.clone(), n, c: (0..n).map(|i| vec![k.zero(); n - i]).collect() }
    }

    pub fn x(k: &LocalField, n: usize) -> Self {
        let mut s = Series2::zero(k, n);
        if n > 1 {
            s.c[1][0] = k.one();
        }
        s
    }

    pub fn y(k: &LocalField, n: usize) -> Self {
        let mut s = Series2::zero(k, n);
        if n > 1 {
            s.c[0][1] = k.one();
        }
        s
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn coeff(&self, i: usize, j: usize) -> FieldElement {
        if i + j < self.n {
            self.c[i][j].clone()
        } else {
            self.field.zero()
        }
    }

    pub fn add(&self, o: &Series2) -> Series2 {
        let mut s = self.clone();
        for i in 0..self.n {
            for j in 0..self.n - i {
                s.c[i][j] = s.c[i][j].add(&o.c[i][j]);
            }
        }
        s
    }

    pub fn neg(&self) -> Series2 {
        let mut s = self.clone();
        for row in s.c.iter_mut() {
            for x in row.iter_mut() {
                *x = x.neg();
            }
        }
        s
    }

    pub fn sub(&self, o: &Series2) -> Series2 {
        self.add(&o.neg())
    }

    pub fn scale(&self, a: &FieldElement) -> Series2 {
        let mut s = self.clone();
        for row in s.c.iter_mut() {
            for x in row.iter_mut() {
                *x = x.mul(a);
            }
        }
        s
    }

    pub fn add_const(&self, a: &FieldElement) -> Series2 {
        let mut s = self.clone();
        s.c[0][0] = s.c[0][0].add(a);
        s
    }

    pub fn mul(&self, o: &Series2) -> Series2 {
        let n = self.n;
        let mut out = Series2::zero(&self.field, n);
        for i1 in 0..n {
            for j1 in 0..n - i1 {
                let a = &self.c[i1][j1];
                if a.is_exact_zero() {
                    continue;
                }
                for i2 in 0..n - i1 - j1 {
                    for j2 in 0..n - i1 - j1 - i2 {
                        let b = &o.c[i2][j2];
                        if b.is_exact_zero() {
                            continue;
                        }
                        out.c[i1 + i2][j1 + j2] = out.c[i1 + i2][j1 + j2].add(&a.mul(b));
                    }
                }
            }
        }
        out
    }

    pub fn inv_unit(&self) -> Result<Series2> {
        let c0 = &self.c[0][0];
        if c0.valuation() != Some(0) {
            return Err(Error::Unsupported("series inverse needs a unit constant term".into()));
        }
        // 1/(c0 (1 - t)) = c0^{-1} sum t^k, t nilpotent to the truncation
        let inv0 = c0.inv()?;
        let t = self.scale(&inv0).neg().add_const(&self.field.one());
        let mut acc = Series2::zero(&self.field, self.n).add_const(&self.field.one());
        let mut pw = acc.clone();
        for _ in 1..self.n {
            pw = pw.mul(&t);
            acc = acc.add(&pw);
        }
        Ok(acc.scale(&inv0))
    }

    /// f(self) for a one-variable series f, self without constant term.
    pub fn substitute_into(&self, f: &Series) -> Series2 {
        let mut acc = Series2::zero(&self.field, self.n);
        for a in f.coeffs().iter().take(self.n).rev() {
            acc = acc.mul(self).add_const(a);
        }
        acc
    }

    /// self(X, g(X)) as a one-variable series.
    pub fn restrict(&self, g: &Series) -> Series {
        let n = self.n.min(g.order());
        let mut gp = vec![Series::constant(&self.field.one(), n)];
        for j in 1..n {
            gp.push(gp[j - 1].mul(g));
        }
        let mut acc = Series::zero(&self.field, n);
        for i in 0..n {
            for j in 0..n - i {
                if self.c[i][j].is_zero() {
                    continue;
                }
                acc = acc.add(&gp[j].scale(&self.c[i][j]).shift_up(i));
            }
        }
        acc
    }

    pub fn swap(&self) -> Series2 {
        let mut s = Series2::zero(&self.field, self.n);
        for i in 0..self.n {
            for j in 0..self.n - i {
                s.c[j][i] = self.c[i][j].clone();
            }
        }
        s
    }
}
