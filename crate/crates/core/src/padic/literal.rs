//! Text literals: exact rationals and expansions in the uniformizer.
//!
//! Grammar for expansions (whitespace ignored):
//!   expr   := ['+'|'-'] term (('+'|'-') term)*
//!   term   := factor (('*'|'/') factor)*
//!   factor := integer | 'pi' ['^' int] | 'p' ['^' int] | 'w' ['^' int] | '(' expr ')' | 'O(' ('pi'|'p') '^' int ')'

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::field::{FieldElement, LocalField};
use crate::error::{Error, Result};

const MAX_EXP: i64 = 100_000;
const MAX_DEPTH: usize = 64;
const MAX_DIGITS: usize = 4096;

fn perr(position: usize, message: impl Into<String>) -> Error {
    Error::Parse { position, message: message.into() }
}

/// Parse "a", "-a", or "a/b" into a reduced fraction with positive denominator.
pub fn parse_rational(s: &str) -> Result<(BigInt, BigInt)> {
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (t, "1"),
    };
    let parse_int = |x: &str, off: usize| -> Result<BigInt> {
        let body = x.strip_prefix('-').or_else(|| x.strip_prefix('+')).unwrap_or(x);
        if body.is_empty() || body.len() > MAX_DIGITS || !body.bytes().all(|b| b.is_ascii_digit()) {
            return Err(perr(off, format!("invalid integer '{x}'")));
        }
        x.parse::<BigInt>().map_err(|_| perr(off, format!("invalid integer '{x}'")))
    };
    let n = parse_int(num, 0)?;
    let d = parse_int(den, t.find('/').map_or(0, |i| i + 1))?;
    if d.is_zero() {
        return Err(perr(t.len(), "zero denominator"));
    }
    let g = n.gcd(&d);
    let (mut n, mut d) = (n / &g, d / &g);
    if d.is_negative() {
        n = -n;
        d = -d;
    }
    if n.is_zero() {
        d = BigInt::one();
    }
    Ok((n, d))
}

/// Parse a rational or an expansion literal into an element of K.
pub fn parse_element(k: &LocalField, s: &str) -> Result<FieldElement> {
    if s.trim().is_empty() {
        return Err(perr(0, "empty literal"));
    }
    if let Ok((n, d)) = parse_rational(s) {
        return k.from_rational(&n, &d);
    }
    let mut p = Parser { s: s.as_bytes(), i: 0, k, big_o: None, depth: 0 };
    let v = p.expr()?;
    p.ws();
    if p.i != p.s.len() {
        return Err(perr(p.i, "unexpected trailing input"));
    }
    Ok(match p.big_o {
        Some(o) => v.with_abs_prec(o),
        None => v,
    })
}

struct Parser<'a> {
    s: &'a [u8],
    i: usize,
    k: &'a LocalField,
    big_o: Option<i64>,
    depth: usize,
}

impl Parser<'_> {
    fn ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.i).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn keyword(&mut self, w: &str) -> bool {
        self.ws();
        let b = w.as_bytes();
        if self.s[self.i..].starts_with(b) {
            let next = self.s.get(self.i + b.len()).copied();
            if next.is_some_and(|c| c.is_ascii_alphanumeric()) {
                return false;
            }
            self.i += b.len();
            true
        } else {
            false
        }
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.ws();
        let start = self.i;
        while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
            self.i += 1;
        }
        if self.i == start {
            return Err(perr(start, "expected an integer"));
        }
        if self.i - start > MAX_DIGITS {
            return Err(perr(start, "integer too long"));
        }
        let txt = std::str::from_utf8(&self.s[start..self.i]).unwrap();
        Ok(txt.parse::<BigInt>().unwrap())
    }

    fn exponent(&mut self) -> Result<i64> {
        if !self.eat(b'^') {
            return Ok(1);
        }
        let neg = self.eat(b'-');
        let pos = self.i;
        let n = self.integer()?;
        let v: i64 = n.try_into().map_err(|_| perr(pos, "exponent too large"))?;
        if v > MAX_EXP {
            return Err(perr(pos, "exponent too large"));
        }
        Ok(if neg { -v } else { v })
    }

    fn expr(&mut self) -> Result<FieldElement> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(perr(self.i, "nesting too deep"));
        }
        let neg = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        let mut acc = self.term()?;
        if neg {
            acc = acc.neg();
        }
        loop {
            if self.eat(b'+') {
                let t = self.term()?;
                acc = acc.add(&t);
            } else if self.eat(b'-') {
                let t = self.term()?;
                acc = acc.sub(&t);
            } else {
                break;
            }
        }
        self.depth -= 1;
        Ok(acc)
    }

    fn term(&mut self) -> Result<FieldElement> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(b'*') {
                let f = self.factor()?;
                acc = acc.mul(&f);
            } else if self.eat(b'/') {
                let pos = self.i;
                let f = self.factor()?;
                acc = acc.div(&f).map_err(|_| perr(pos, "division by zero"))?;
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<FieldElement> {
        let pos = {
            self.ws();
            self.i
        };
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                Ok(self.k.from_bigint(&n))
            }
            Some(b'(') => {
                self.i += 1;
                let v = self.expr()?;
                if !self.eat(b')') {
                    return Err(perr(self.i, "expected ')'"));
                }
                Ok(v)
            }
            Some(b'O') => {
                self.i += 1;
                if !self.eat(b'(') {
                    return Err(perr(self.i, "expected '(' after O"));
                }
                let unit = if self.keyword("pi") {
                    1
                } else if self.keyword("p") {
                    self.k.e() as i64
                } else {
                    return Err(perr(self.i, "expected pi or p inside O()"));
                };
                let ex = self.exponent()?;
                if !self.eat(b')') {
                    return Err(perr(self.i, "expected ')'"));
                }
                let prec = ex.saturating_mul(unit);
                self.big_o = Some(self.big_o.map_or(prec, |o| o.min(prec)));
                Ok(self.k.zero_to(prec))
            }
            _ => {
                if self.keyword("pi") {
                    let ex = self.exponent()?;
                    return self.k.uniformizer().pow(ex).map_err(|_| perr(pos, "bad power"));
                }
                if self.keyword("p") {
                    let ex = self.exponent()?;
                    return self.k.from_int(self.k.p() as i64).pow(ex).map_err(|_| perr(pos, "bad power"));
                }
                if self.keyword("w") {
                    let ex = self.exponent()?;
                    return self.k.omega().pow(ex).map_err(|_| perr(pos, "bad power"));
                }
                Err(perr(pos, "unexpected token"))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("6/-4").unwrap(), (BigInt::from(-3), BigInt::from(2)));
        assert_eq!(parse_rational(" 0/7 ").unwrap(), (BigInt::zero(), BigInt::one()));
        assert!(matches!(parse_rational("1/0"), Err(Error::Parse { .. })));
        assert!(matches!(parse_rational("x"), Err(Error::Parse { .. })));
    }

    #[test]
    fn expansions() {
        let k = LocalField::qp(5, 20).unwrap();
        let a = parse_element(&k, "1 + 2*p + 3*p^2").unwrap();
        assert!(a.eq_approx(&k.from_int(86)));
        let b = parse_element(&k, "3 + p^2 + O(p^4)").unwrap();
        assert_eq!(b.abs_prec(), 4);
        let c = parse_element(&k, "-1/3").unwrap();
        assert!(c.mul(&k.from_int(3)).eq_approx(&k.from_int(-1)));
        let d = parse_element(&k, "p^-2").unwrap();
        assert_eq!(d.valuation(), Some(-2));
        for bad in ["", "1 +", "(1", "O(q^2)", "pi^", "1 ** 2", "p^99999999999"] {
            assert!(matches!(parse_element(&k, bad), Err(Error::Parse { .. })), "{bad}");
        }
    }
}
