//! Sparse exact-rational linear combinations of words.

use std::collections::btree_map::{self, BTreeMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::word::{Letter, Word};

pub type Rational = BigRational;

pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

/// Renders a rational as `"p/q"`, always with an explicit denominator.
pub fn fmt_rational(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `x^n` for a rational and a small exponent.
pub fn rat_pow(x: &Rational, n: usize) -> Rational {
    let mut r = Rational::one();
    for _ in 0..n {
        r *= x;
    }
    r
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Finite linear combination of words with exact rational coefficients.
///
/// Zero coefficients are never stored; iteration follows word order
/// (tensor degree, then lexicographic).
#[derive(Clone, Default, PartialEq, Eq)]
pub struct TensorPoly {
    terms: BTreeMap<Word, Rational>,
}

impl TensorPoly {
    pub fn zero() -> Self {
        TensorPoly::default()
    }

    pub fn one() -> Self {
        TensorPoly::from_word(Word::empty())
    }

    pub fn from_word(w: Word) -> Self {
        TensorPoly::term(w, Rational::one())
    }

    pub fn term(w: Word, c: Rational) -> Self {
        let mut p = TensorPoly::zero();
        p.add_term(w, c);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Word, Rational)>>(it: I) -> Self {
        let mut p = TensorPoly::zero();
        for (w, c) in it {
            p.add_term(w, c);
        }
        p
    }

    pub fn add_term(&mut self, w: Word, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, w: &Word) -> Rational {
        self.terms.get(w).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, &Rational)> {
        self.terms.iter()
    }

    pub fn words(&self) -> impl Iterator<Item = &Word> {
        self.terms.keys()
    }

    pub fn scale(&self, c: &Rational) -> TensorPoly {
        if c.is_zero() {
            return TensorPoly::zero();
        }
        TensorPoly {
            terms: self.terms.iter().map(|(w, x)| (w.clone(), x * c)).collect(),
        }
    }

    pub fn axpy(&mut self, c: &Rational, other: &TensorPoly) {
        for (w, x) in &other.terms {
            self.add_term(w.clone(), c * x);
        }
    }

    /// Highest tensor degree among the terms, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(Word::tensor_degree).max()
    }

    pub fn is_homogeneous(&self, n: usize) -> bool {
        self.terms.keys().all(|w| w.tensor_degree() == n)
    }

    /// Applies a linear map given on words.
    pub fn map_linear<F: FnMut(&Word) -> TensorPoly>(&self, mut f: F) -> TensorPoly {
        let mut out = TensorPoly::zero();
        for (w, c) in &self.terms {
            out.axpy(c, &f(w));
        }
        out
    }

    /// Renames letters word by word; terms that collide are summed.
    pub fn relabel<F: Fn(Letter) -> Letter>(&self, f: F) -> TensorPoly {
        TensorPoly::from_terms(self.terms.iter().map(|(w, c)| {
            (
                Word::new(w.letters().iter().map(|&l| f(l)).collect()),
                c.clone(),
            )
        }))
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (w, c) in &self.terms {
            m.insert(w.key(), Value::String(fmt_rational(c)));
        }
        Value::Object(m)
    }

    pub fn from_json(v: &Value) -> Result<TensorPoly> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Parse("tensor polynomial must be a JSON object".into()))?;
        let mut p = TensorPoly::zero();
        for (k, c) in obj {
            let c = c
                .as_str()
                .ok_or_else(|| Error::Parse(format!("coefficient of {k:?} must be a string")))?;
            p.add_term(k.parse()?, parse_rational(c)?);
        }
        Ok(p)
    }
}

impl From<Word> for TensorPoly {
    fn from(w: Word) -> Self {
        TensorPoly::from_word(w)
    }
}

impl FromIterator<(Word, Rational)> for TensorPoly {
    fn from_iter<I: IntoIterator<Item = (Word, Rational)>>(iter: I) -> Self {
        TensorPoly::from_terms(iter)
    }
}

impl AddAssign<&TensorPoly> for TensorPoly {
    fn add_assign(&mut self, rhs: &TensorPoly) {
        self.axpy(&Rational::one(), rhs);
    }
}

impl Add<&TensorPoly> for &TensorPoly {
    type Output = TensorPoly;
    fn add(self, rhs: &TensorPoly) -> TensorPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&TensorPoly> for &TensorPoly {
    type Output = TensorPoly;
    fn sub(self, rhs: &TensorPoly) -> TensorPoly {
        let mut out = self.clone();
        out.axpy(&-Rational::one(), rhs);
        out
    }
}

impl Neg for &TensorPoly {
    type Output = TensorPoly;
    fn neg(self) -> TensorPoly {
        self.scale(&-Rational::one())
    }
}

impl Mul<&Rational> for &TensorPoly {
    type Output = TensorPoly;
    fn mul(self, rhs: &Rational) -> TensorPoly {
        self.scale(rhs)
    }
}

impl fmt::Display for TensorPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (w, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            match (i, neg) {
                (0, true) => f.write_str("−")?,
                (0, false) => {}
                (_, true) => f.write_str(" − ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if a.is_one() {
                write!(f, "{w}")?;
            } else {
                write!(f, "{a}·{w}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for TensorPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TensorPoly({self})")
    }
}

/// Builds a polynomial from `(word, p, q)` triples; test and fixture helper.
pub fn poly(terms: &[(&str, i64, i64)]) -> TensorPoly {
    TensorPoly::from_terms(
        terms
            .iter()
            .map(|&(s, p, q)| (crate::word::w(s), rat(p, q))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::w;

    #[test]
    fn zero_coefficients_are_dropped() {
        let mut p = poly(&[("1", 1, 2), ("2", 1, 1)]);
        p.add_term(w("1"), rat(-1, 2));
        assert_eq!(p, poly(&[("2", 1, 1)]));
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn json_roundtrip() {
        let p = poly(&[("", 3, 1), ("01", -1, 2), ("1", 1, 12)]);
        let v = p.to_json();
        assert_eq!(v["01"], "-1/2");
        assert_eq!(v[""], "3/1");
        assert_eq!(TensorPoly::from_json(&v).unwrap(), p);
    }

    #[test]
    fn display_reads_like_math() {
        let p = poly(&[("001", 1, 1), ("01", -1, 2), ("1", 1, 12)]);
        assert_eq!(p.to_string(), "001 − 1/2·01 + 1/12·1");
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("-35/96").unwrap(), rat(-35, 96));
        assert_eq!(parse_rational("4").unwrap(), int(4));
        assert!(parse_rational("1/0").is_err());
        assert_eq!(binomial(5, 2), BigInt::from(10));
    }
}
