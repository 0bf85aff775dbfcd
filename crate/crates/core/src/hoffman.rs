//! Hoffman exponential and logarithm between the shuffle and quasi-shuffle
//! algebras.
//!
//! With the bracket `[α, α] = 0` for spatial `α` and `[0, ·] = 0`, only
//! blocks of two adjacent equal spatial letters survive in the general
//! composition sum, so both maps reduce to a sum over sets of disjoint
//! mergeable pairs, with weight `(±1/2)^k` for `k` merged pairs.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::poly::{fmt_rational, rat, Rational, TensorPoly};
use crate::word::{Letter, Word, TIME};

fn pair_merges(w: &Word, weight: &Rational) -> TensorPoly {
    let letters = w.letters();
    let mut out = TensorPoly::zero();
    let mut buf = Vec::with_capacity(letters.len());
    fn rec(
        letters: &[Letter],
        i: usize,
        coeff: Rational,
        weight: &Rational,
        buf: &mut Vec<Letter>,
        out: &mut TensorPoly,
    ) {
        if i == letters.len() {
            out.add_term(Word::new(buf.clone()), coeff);
            return;
        }
        buf.push(letters[i]);
        rec(letters, i + 1, coeff.clone(), weight, buf, out);
        buf.pop();
        if i + 1 < letters.len() && letters[i] == letters[i + 1] && letters[i] != TIME {
            buf.push(TIME);
            rec(letters, i + 2, coeff * weight, weight, buf, out);
            buf.pop();
        }
    }
    rec(letters, 0, Rational::one(), weight, &mut buf, &mut out);
    out
}

/// Hoffman exponential on a single word.
pub fn hoffman_exp_word(w: &Word) -> TensorPoly {
    pair_merges(w, &rat(1, 2))
}

/// Hoffman logarithm on a single word.
pub fn hoffman_log_word(w: &Word) -> TensorPoly {
    pair_merges(w, &rat(-1, 2))
}

/// Shuffle-to-quasi-shuffle algebra isomorphism.
pub fn hoffman_exp(p: &TensorPoly) -> TensorPoly {
    p.map_linear(hoffman_exp_word)
}

/// Inverse of [`hoffman_exp`].
pub fn hoffman_log(p: &TensorPoly) -> TensorPoly {
    p.map_linear(hoffman_log_word)
}

/// A linear map on the words of tensor degree `≤ N` over `{0..d}`, stored
/// column by column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConversionMatrix {
    pub d: usize,
    pub level: usize,
    columns: BTreeMap<Word, TensorPoly>,
}

impl ConversionMatrix {
    fn build(d: usize, level: usize, f: fn(&Word) -> TensorPoly) -> Self {
        let columns = Word::all_up_to(0, d as Letter, level)
            .into_iter()
            .map(|w| {
                let img = f(&w);
                (w, img)
            })
            .collect();
        ConversionMatrix { d, level, columns }
    }

    /// Image of a basis word; zero outside the truncated space.
    pub fn column(&self, w: &Word) -> TensorPoly {
        self.columns.get(w).cloned().unwrap_or_default()
    }

    pub fn columns(&self) -> impl Iterator<Item = (&Word, &TensorPoly)> {
        self.columns.iter()
    }

    pub fn apply(&self, p: &TensorPoly) -> TensorPoly {
        p.map_linear(|w| self.column(w))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &ConversionMatrix) -> ConversionMatrix {
        ConversionMatrix {
            d: self.d,
            level: self.level.min(other.level),
            columns: other
                .columns
                .iter()
                .filter(|(w, _)| w.tensor_degree() <= self.level)
                .map(|(w, img)| (w.clone(), self.apply(img)))
                .collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.columns
            .iter()
            .all(|(w, img)| *img == TensorPoly::from_word(w.clone()))
    }

    /// Sparse triplets `row,col,value` with `row` the image word.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,col,value\n");
        for (col, img) in &self.columns {
            for (row, c) in img.iter() {
                if !c.is_zero() {
                    out.push_str(&format!(
                        "{},{},{}\n",
                        row.key(),
                        col.key(),
                        fmt_rational(c)
                    ));
                }
            }
        }
        out
    }
}

/// Matrix of the Hoffman logarithm: `⟨w, Ŝ⟩ = ⟨log(w), S⟩`.
pub fn strat_to_ito_map(d: usize, level: usize) -> ConversionMatrix {
    ConversionMatrix::build(d, level, hoffman_log_word)
}

/// Matrix of the Hoffman exponential: `⟨w, S⟩ = ⟨exp(w), Ŝ⟩`.
pub fn ito_to_strat_map(d: usize, level: usize) -> ConversionMatrix {
    ConversionMatrix::build(d, level, hoffman_exp_word)
}
