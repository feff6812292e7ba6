//! The Hilbert pairing on K^x/p, reconstructed from norm groups as a Gram matrix over
//! a filtered basis.

use num_bigint::BigInt;
use serde::Serialize;

use crate::arith::{FpMatrix, Span};
use crate::error::{Error, Result};
use crate::padic::{FieldElement, LocalField};
use crate::units::{norm_group, NormGroup, UnitsModP};

/// A value of the pairing. Only meaningful up to one global scalar, so the raw residue
/// stays private.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SymbolValue {
    c: u64,
    p: u64,
}

impl SymbolValue {
    pub fn is_zero(&self) -> bool {
        self.c == 0
    }
    pub(crate) fn raw(&self) -> u64 {
        self.c
    }
    pub fn add(&self, o: &SymbolValue) -> SymbolValue {
        SymbolValue { c: (self.c + o.c) % self.p, p: self.p }
    }
}

/// Whether two tuples of symbol values agree after one common nonzero rescaling.
pub fn equal_up_to_scalar(a: &[SymbolValue], b: &[SymbolValue]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let Some(p) = a.first().map(|s| s.p) else { return true };
    (1..p).any(|l| a.iter().zip(b).all(|(x, y)| (x.c * l) % p == y.c))
}

/// Rank over F_p of a list of symbol tuples.
pub fn symbol_rank(rows: &[Vec<SymbolValue>]) -> usize {
    let Some(first) = rows.iter().find_map(|r| r.first()) else { return 0 };
    let cols = rows[0].len();
    let data: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|s| s.c).collect()).collect();
    FpMatrix::from_rows(first.p, cols, &data).rank()
}

#[derive(Clone, Debug, Serialize)]
pub struct GramReport {
    pub p: u64,
    pub dim: usize,
    pub rank: usize,
    pub matrix: Vec<Vec<u64>>,
}

#[derive(Clone, Debug)]
pub struct Gram {
    units: UnitsModP,
    m: FpMatrix,
}

impl Gram {
    pub fn units(&self) -> &UnitsModP {
        &self.units
    }
    pub fn field(&self) -> &LocalField {
        self.units.field()
    }
    pub fn dim(&self) -> usize {
        self.units.dim()
    }
    pub fn rank(&self) -> usize {
        self.m.rank()
    }
    pub fn entry(&self, i: usize, j: usize) -> SymbolValue {
        SymbolValue { c: self.m.get(i, j), p: self.units.p() }
    }
    pub fn matrix(&self) -> Vec<Vec<u64>> {
        (0..self.dim()).map(|i| self.m.row(i)).collect()
    }
    pub fn report(&self) -> GramReport {
        GramReport { p: self.units.p(), dim: self.dim(), rank: self.rank(), matrix: self.matrix() }
    }

    pub fn pair_coords(&self, a: &[u64], b: &[u64]) -> SymbolValue {
        let p = self.units.p();
        let mut s = 0;
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                s = (s + ai * bj % p * self.m.get(i, j)) % p;
            }
        }
        SymbolValue { c: s, p }
    }

    pub fn gp(&self, x: &FieldElement, y: &FieldElement) -> Result<SymbolValue> {
        Ok(self.pair_coords(&self.units.decompose(x)?, &self.units.decompose(y)?))
    }

    /// The classes paired trivially with y.
    pub fn orthogonal(&self, y: &[u64]) -> Span {
        let p = self.units.p();
        let d = self.dim();
        let mut col = vec![0u64; d];
        for (i, c) in col.iter_mut().enumerate() {
            let mut e = vec![0u64; d];
            e[i] = 1;
            *c = self.pair_coords(&e, y).c;
        }
        let mut s = Span::new(p, d);
        for v in FpMatrix::from_rows(p, d, &[col]).nullspace() {
            s.insert(&v);
        }
        s
    }
}

fn normalize(m: &mut FpMatrix) {
    let p = m.p;
    let d = m.rows;
    let first = (0..d * d).map(|k| m.get(k / d, k % d)).find(|&c| c != 0);
    if let Some(c) = first {
        let inv = crate::arith::inv_mod(c, p);
        for i in 0..d {
            for j in 0..d {
                m.set(i, j, m.get(i, j) * inv % p);
            }
        }
    }
}

/// Gram matrix of the pairing from the norm hyperplanes of the basis vectors.
pub fn build_gram(k: &LocalField) -> Result<Gram> {
    let units = UnitsModP::new(k)?;
    if !units.has_mu_p() {
        return Err(Error::MuPNotContained);
    }
    let p = units.p();
    let d = units.dim();
    let functional = |y: &FieldElement| -> Result<Vec<u64>> {
        match norm_group(&units, y)? {
            NormGroup::Hyperplane(s) => {
                let ann = s.annihilator();
                if ann.len() != 1 {
                    return Err(Error::DegeneratePairing("norm group is not a hyperplane".into()));
                }
                Ok(ann[0].clone())
            }
            NormGroup::Everything => Err(Error::DegeneratePairing("class is a p-th power".into())),
        }
    };
    // phi[j] has kernel the norm group of K(e_j^{1/p}); column j of the matrix is lambda_j phi[j]
    let phi: Vec<Vec<u64>> = units.basis().iter().map(|b| functional(&b.element)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            let mut r = vec![0u64; d];
            r[j] = (r[j] + phi[j][i]) % p;
            r[i] = (r[i] + phi[i][j]) % p;
            if r.iter().any(|&c| c != 0) {
                rows.push(r);
            }
        }
    }
    let mut ns = FpMatrix::from_rows(p, d, &rows).nullspace();
    if ns.len() > 1 {
        // columns of e_0 e_j are lambda_0 phi_0 + lambda_j phi_j, proportional to its own functional
        let width = 2 * d - 1;
        let mut rows: Vec<Vec<u64>> = rows.iter().map(|r| [r.clone(), vec![0; d - 1]].concat()).collect();
        let e0 = &units.basis()[0].element;
        for j in 1..d {
            let fy = functional(&e0.mul(&units.basis()[j].element))?;
            for i in 0..d {
                let mut r = vec![0u64; width];
                r[0] = phi[0][i];
                r[j] = (r[j] + phi[j][i]) % p;
                r[d + j - 1] = (p - fy[i]) % p;
                rows.push(r);
            }
        }
        ns = FpMatrix::from_rows(p, width, &rows).nullspace().into_iter().map(|v| v[..d].to_vec()).collect();
    }
    if ns.len() != 1 {
        return Err(Error::DegeneratePairing(format!("{} independent rescalings of the norm functionals", ns.len())));
    }
    let lambda = ns
        .into_iter()
        .find(|v| v.iter().all(|&c| c != 0))
        .ok_or_else(|| Error::DegeneratePairing("no skew-symmetric rescaling of the norm functionals".into()))?;
    let mut m = FpMatrix::zeros(p, d, d);
    for i in 0..d {
        for j in 0..d {
            m.set(i, j, lambda[j] * phi[j][i] % p);
        }
    }
    normalize(&mut m);
    let g = Gram { units, m };
    check_steinberg_diagonal(&g)?;
    Ok(g)
}

fn check_steinberg_diagonal(g: &Gram) -> Result<()> {
    let k = g.field();
    let minus_one = g.units.decompose(&k.from_int(-1))?;
    for i in 0..g.dim() {
        let mut e = vec![0u64; g.dim()];
        e[i] = 1;
        if g.pair_coords(&e, &e) != g.pair_coords(&e, &minus_one) {
            return Err(Error::DegeneratePairing("diagonal violates g(x,x) = g(x,-1)".into()));
        }
    }
    Ok(())
}

/// The pairing determined only by the relations g(x, 1 - x) = 0, for cross-checking.
pub fn gram_from_steinberg(units: &UnitsModP, budget: usize) -> Result<FpMatrix> {
    let k = units.field();
    let p = units.p();
    let d = units.dim();
    let n = d * d;
    let mut rows: Vec<Vec<u64>> = Vec::new();
    let mut span = Span::new(p, n);
    let top = units.required_precision();
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    for _ in 0..budget {
        if span.rank() + 1 >= n {
            break;
        }
        let coeffs: Vec<BigInt> = (0..k.degree()).map(|_| BigInt::from((next() % 4096) as i64 - 2048)).collect();
        let shift = (next() % (top as u64 + 4)) as i64 - 2;
        let x = &k.from_ok(coeffs, shift, k.cap());
        let y = k.one().sub(x);
        if x.valuation().is_none() || y.valuation().is_none() {
            continue;
        }
        let cx = units.decompose(x)?;
        let cy = units.decompose(&y)?;
        let r: Vec<u64> = (0..n).map(|t| cx[t / d] * cy[t % d] % p).collect();
        if span.insert(&r) {
            rows.push(r);
        }
    }
    let ns = FpMatrix::from_rows(p, n, &rows).nullspace();
    if ns.len() != 1 {
        return Err(Error::DegeneratePairing(format!("Steinberg relations leave {} free parameters", ns.len())));
    }
    let mut m = FpMatrix::zeros(p, d, d);
    for t in 0..n {
        m.set(t / d, t % d, ns[0][t]);
    }
    normalize(&mut m);
    Ok(m)
}

pub fn gp(k: &LocalField, x: &FieldElement, y: &FieldElement) -> Result<SymbolValue> {
    build_gram(k)?.gp(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q2_gram() {
        let k = LocalField::qp(2, 40).unwrap();
        let g = build_gram(&k).unwrap();
        assert_eq!(g.rank(), 3);
        let m1 = k.from_int(-1);
        assert!(!g.gp(&m1, &m1).unwrap().is_zero());
        assert!(g.gp(&k.from_int(5), &k.from_int(3)).unwrap().is_zero());
        assert!(!g.gp(&k.from_int(5), &k.from_int(2)).unwrap().is_zero());
        assert!(g.gp(&k.from_int(2), &m1).unwrap().is_zero());
        let m = g.matrix();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!((m[i][j] + m[j][i]) % 2, 0);
            }
        }
    }

    #[test]
    fn scalar_invariance() {
        let p = 5;
        let a: Vec<SymbolValue> = [1, 0, 3].iter().map(|&c| SymbolValue { c, p }).collect();
        let b: Vec<SymbolValue> = [2, 0, 1].iter().map(|&c| SymbolValue { c, p }).collect();
        assert!(equal_up_to_scalar(&a, &b));
        assert_eq!(symbol_rank(&[a.clone(), b]), 1);
        assert!(!equal_up_to_scalar(&a, &a[..2]));
    }
}
