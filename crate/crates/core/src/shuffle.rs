//! Shuffle and quasi-shuffle products.
//!
//! Both products are computed on words by dynamic programming over
//! prefixes, following the recursion on last letters
//! `uα ⋆ vβ = (u ⋆ vβ)α + (uα ⋆ v)β + (u ⋆ v)[α,β]`, where the bracket is
//! absent for the shuffle and, for the quasi-shuffle, equals the time
//! letter when `α = β ≠ 0` and vanishes otherwise.

use std::collections::HashMap;

use num_bigint::BigInt;

use crate::poly::{Rational, TensorPoly};
use crate::word::{Letter, Word, TIME};

type Counts = HashMap<Vec<Letter>, u64>;

fn append(src: &Counts, l: Letter, dst: &mut Counts) {
    for (w, &c) in src {
        let mut x = Vec::with_capacity(w.len() + 1);
        x.extend_from_slice(w);
        x.push(l);
        *dst.entry(x).or_insert(0) += c;
    }
}

fn merge(u: &[Letter], v: &[Letter], bracket: bool) -> Counts {
    let (a, b) = (u.len(), v.len());
    // row[j] holds the product of u[..i] and v[..j]
    let mut prev: Vec<Counts> = (0..=b)
        .map(|j| std::iter::once((v[..j].to_vec(), 1u64)).collect())
        .collect();
    for i in 1..=a {
        let mut row: Vec<Counts> = Vec::with_capacity(b + 1);
        row.push(std::iter::once((u[..i].to_vec(), 1u64)).collect());
        for j in 1..=b {
            let mut cell = Counts::new();
            append(&prev[j], u[i - 1], &mut cell);
            append(&row[j - 1], v[j - 1], &mut cell);
            if bracket && u[i - 1] == v[j - 1] && u[i - 1] != TIME {
                append(&prev[j - 1], TIME, &mut cell);
            }
            row.push(cell);
        }
        prev = row;
    }
    prev.pop().unwrap_or_default()
}

fn counts_to_poly(c: Counts) -> TensorPoly {
    TensorPoly::from_terms(
        c.into_iter()
            .map(|(w, n)| (Word::new(w), Rational::from_integer(BigInt::from(n)))),
    )
}

/// Shuffle product of two words with integer multiplicities.
pub fn shuffle_words(u: &Word, v: &Word) -> TensorPoly {
    counts_to_poly(merge(u.letters(), v.letters(), false))
}

/// Quasi-shuffle product of two words for the identity-covariance bracket.
pub fn quasi_shuffle_words(u: &Word, v: &Word) -> TensorPoly {
    counts_to_poly(merge(u.letters(), v.letters(), true))
}

fn bilinear(u: &TensorPoly, v: &TensorPoly, f: fn(&Word, &Word) -> TensorPoly) -> TensorPoly {
    let mut out = TensorPoly::zero();
    for (a, ca) in u.iter() {
        for (b, cb) in v.iter() {
            out.axpy(&(ca * cb), &f(a, b));
        }
    }
    out
}

pub fn shuffle(u: &TensorPoly, v: &TensorPoly) -> TensorPoly {
    bilinear(u, v, shuffle_words)
}

pub fn quasi_shuffle(u: &TensorPoly, v: &TensorPoly) -> TensorPoly {
    bilinear(u, v, quasi_shuffle_words)
}

/// Shuffle power `u ⧢ u ⧢ ... ⧢ u` (`k` factors); `k = 0` gives `∅`.
pub fn shuffle_power(u: &TensorPoly, k: usize) -> TensorPoly {
    (0..k).fold(TensorPoly::one(), |acc, _| shuffle(&acc, u))
}
