//! Lyndon words and the polynomial (Radford) basis of the shuffle algebra
//! built from them.

use std::fmt;

use crate::error::{Error, Result};
use crate::poly::TensorPoly;
use crate::shuffle::shuffle;
use crate::word::{Letter, Word};

/// A word strictly smaller than all of its proper rotations.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct LyndonWord(Word);

impl LyndonWord {
    pub fn new(w: Word) -> Result<Self> {
        if is_lyndon(w.letters()) {
            Ok(LyndonWord(w))
        } else {
            Err(Error::Parse(format!("{w} is not a Lyndon word")))
        }
    }

    pub fn word(&self) -> &Word {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.tensor_degree()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for LyndonWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Rotation test for the Lyndon property.
pub fn is_lyndon(w: &[Letter]) -> bool {
    let n = w.len();
    if n == 0 {
        return false;
    }
    (1..n).all(|k| {
        let rot = w[k..].iter().chain(&w[..k]);
        w.iter().lt(rot)
    })
}

fn mobius(mut n: usize) -> i64 {
    let mut result = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

/// Number of Lyndon words of length `m` over `d` letters.
pub fn witt_number(d: usize, m: usize) -> usize {
    if m == 0 {
        return 0;
    }
    let total: i128 = (1..=m)
        .filter(|k| m.is_multiple_of(*k))
        .map(|k| mobius(k) as i128 * (d as i128).pow((m / k) as u32))
        .sum();
    (total / m as i128) as usize
}

/// All Lyndon words over letters `1..=d` of length `1..=max_len`, grouped
/// by length (index `m - 1`) and lexicographically sorted within a group.
pub fn lyndon_words(d: usize, max_len: usize) -> Vec<Vec<LyndonWord>> {
    let mut groups = vec![Vec::new(); max_len];
    if d == 0 || max_len == 0 {
        return groups;
    }
    let top = d as Letter;
    // Duval's successor walk, which visits Lyndon words in lexicographic order.
    let mut w: Vec<Letter> = vec![1];
    loop {
        groups[w.len() - 1].push(LyndonWord(Word::new(w.clone())));
        let base = w.clone();
        while w.len() < max_len {
            w.push(base[w.len() % base.len()]);
        }
        while w.last() == Some(&top) {
            w.pop();
        }
        match w.last_mut() {
            Some(l) => *l += 1,
            None => break,
        }
    }
    groups
}

/// A commutative monomial in Lyndon generators, stored as a sorted
/// multiset.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct RadfordMonomial {
    factors: Vec<LyndonWord>,
}

impl RadfordMonomial {
    pub fn new(mut factors: Vec<LyndonWord>) -> Self {
        factors.sort();
        RadfordMonomial { factors }
    }

    pub fn unit() -> Self {
        RadfordMonomial { factors: vec![] }
    }

    pub fn factors(&self) -> &[LyndonWord] {
        &self.factors
    }

    /// Total (tensor) degree.
    pub fn tensor_degree(&self) -> usize {
        self.factors.iter().map(LyndonWord::len).sum()
    }

    /// Number of factors.
    pub fn shuffle_degree(&self) -> usize {
        self.factors.len()
    }

    pub fn times(&self, g: &LyndonWord) -> RadfordMonomial {
        let mut f = self.factors.clone();
        f.push(g.clone());
        RadfordMonomial::new(f)
    }
}

impl fmt::Display for RadfordMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self.factors.iter().map(|l| l.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Shuffle product of the monomial's Lyndon factors, with multiplicity.
pub fn radford_expand(m: &RadfordMonomial) -> TensorPoly {
    m.factors.iter().fold(TensorPoly::one(), |acc, l| {
        shuffle(&acc, &TensorPoly::from_word(l.word().clone()))
    })
}

/// All monomials of total degree `n` in the given generators (grouped by
/// length, as returned by [`lyndon_words`]), in a fixed deterministic order.
pub fn monomials_of_degree(generators: &[Vec<LyndonWord>], n: usize) -> Vec<RadfordMonomial> {
    let flat: Vec<&LyndonWord> = generators.iter().flatten().collect();
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec<'a>(
        flat: &[&'a LyndonWord],
        start: usize,
        remaining: usize,
        current: &mut Vec<&'a LyndonWord>,
        out: &mut Vec<RadfordMonomial>,
    ) {
        if remaining == 0 {
            out.push(RadfordMonomial::new(
                current.iter().map(|&l| l.clone()).collect(),
            ));
            return;
        }
        for k in start..flat.len() {
            let len = flat[k].len();
            if len <= remaining {
                current.push(flat[k]);
                rec(flat, k, remaining - len, current, out);
                current.pop();
            }
        }
    }
    rec(&flat, 0, n, &mut current, &mut out);
    out.sort();
    out
}
