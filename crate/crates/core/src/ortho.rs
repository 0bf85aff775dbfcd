//! Orthogonalization of signature coordinates.
//!
//! * [`block_orthogonalize`]: make a word orthogonal to every word of lower
//!   tensor degree, staying monic.
//! * [`gram_schmidt`]: full Gram-Schmidt in a given order, skipping null
//!   vectors as projection targets.
//! * [`ito_orthogonal_basis`]: the Itô basis on binary patterns, computed
//!   class by class, and [`lift_pattern`] to transport it to `d` letters.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::esig::{binary_inner, zero_profile, InnerProduct, TimeHorizon};
use crate::hoffman::hoffman_log;
use crate::linalg::RatMatrix;
use crate::poly::{fmt_rational, parse_rational, Rational, TensorPoly};
use crate::word::{zero_order, Letter, Word, TIME};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrthoEntry {
    pub key: Word,
    pub poly: TensorPoly,
    pub sq_norm: Rational,
}

/// Ordered family of orthogonalized coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrthoBasis {
    pub entries: Vec<OrthoEntry>,
    pub inner: String,
    pub d: usize,
    pub horizon: Rational,
}

impl OrthoBasis {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &Word) -> Option<&OrthoEntry> {
        self.entries.iter().find(|e| &e.key == key)
    }

    pub fn keys(&self) -> Vec<Word> {
        self.entries.iter().map(|e| e.key.clone()).collect()
    }

    /// Largest inner product between distinct entries; zero for an exactly
    /// orthogonal family.
    pub fn max_off_diagonal(&self, inner: &dyn InnerProduct) -> Result<Rational> {
        let mut worst = Rational::zero();
        for (i, a) in self.entries.iter().enumerate() {
            for b in &self.entries[i + 1..] {
                let x = inner.pair(&a.poly, &b.poly)?.abs();
                if x > worst {
                    worst = x;
                }
            }
        }
        Ok(worst)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.entries
                .iter()
                .map(|e| {
                    json!({
                        "word": e.key.key(),
                        "terms": e.poly.to_json(),
                        "sq_norm": fmt_rational(&e.sq_norm),
                    })
                })
                .collect(),
        )
    }

    pub fn from_json(v: &Value, inner: &str, d: usize, horizon: Rational) -> Result<Self> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::Parse("basis must be a JSON array".into()))?;
        let mut entries = Vec::with_capacity(arr.len());
        for item in arr {
            let field = |k: &str| {
                item.get(k)
                    .ok_or_else(|| Error::Parse(format!("basis entry without {k:?}")))
            };
            let key: Word = field("word")?
                .as_str()
                .ok_or_else(|| Error::Parse("word must be a string".into()))?
                .parse()?;
            let poly = TensorPoly::from_json(field("terms")?)?;
            let sq_norm = parse_rational(
                field("sq_norm")?
                    .as_str()
                    .ok_or_else(|| Error::Parse("sq_norm must be a string".into()))?,
            )?;
            entries.push(OrthoEntry { key, poly, sq_norm });
        }
        Ok(OrthoBasis {
            entries,
            inner: inner.to_string(),
            d,
            horizon,
        })
    }
}

/// Projects words onto the orthogonal complement of a fixed family of
/// lower-degree words; the Gram system is factored once.
pub struct BlockOrthogonalizer<'a> {
    inner: &'a dyn InnerProduct,
    lower: Vec<Word>,
    gram_inv: RatMatrix,
}

impl<'a> BlockOrthogonalizer<'a> {
    /// `degree` is reported in the error when the Gram matrix is singular.
    pub fn new(inner: &'a dyn InnerProduct, lower: Vec<Word>, degree: usize) -> Result<Self> {
        let n = lower.len();
        let mut g = RatMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let x = inner.pair_words(&lower[i], &lower[j])?;
                g[(j, i)] = x.clone();
                g[(i, j)] = x;
            }
        }
        let gram_inv = g.inverse().ok_or(Error::DegenerateGram { degree })?;
        Ok(BlockOrthogonalizer {
            inner,
            lower,
            gram_inv,
        })
    }

    /// All words over `lo..=hi` of tensor degree below `degree`.
    pub fn for_degree(
        inner: &'a dyn InnerProduct,
        lo: Letter,
        hi: Letter,
        degree: usize,
    ) -> Result<Self> {
        let lower = if degree == 0 {
            Vec::new()
        } else {
            Word::all_up_to(lo, hi, degree - 1)
        };
        Self::new(inner, lower, degree)
    }

    pub fn orthogonalize(&self, p: &TensorPoly) -> Result<TensorPoly> {
        let n = self.lower.len();
        let mut b = RatMatrix::zeros(n, 1);
        for (i, u) in self.lower.iter().enumerate() {
            b[(i, 0)] = self.inner.pair(p, &TensorPoly::from_word(u.clone()))?;
        }
        if b.is_zero() {
            return Ok(p.clone());
        }
        let lambda = &self.gram_inv * &b;
        let mut out = p.clone();
        for (i, u) in self.lower.iter().enumerate() {
            out.add_term(u.clone(), -lambda[(i, 0)].clone());
        }
        Ok(out)
    }
}

/// `p_w = w − Σ λ_u u` over the words `u` of `degree_basis` (all words of
/// lower tensor degree), with `(p_w, u) = 0` for each of them.
pub fn block_orthogonalize(
    w: &Word,
    inner: &dyn InnerProduct,
    degree_basis: &[Word],
) -> Result<TensorPoly> {
    BlockOrthogonalizer::new(inner, degree_basis.to_vec(), w.tensor_degree())?
        .orthogonalize(&TensorPoly::from_word(w.clone()))
}

/// Gram-Schmidt in the supplied order. Entries of zero norm are kept but
/// never used as projection targets.
pub fn gram_schmidt(
    words: &[Word],
    inner: &dyn InnerProduct,
    tag: &str,
    d: usize,
    horizon: Rational,
) -> Result<OrthoBasis> {
    let polys: Vec<TensorPoly> = words
        .iter()
        .map(|w| TensorPoly::from_word(w.clone()))
        .collect();
    let entries = gram_schmidt_polys(words, &polys, inner)?;
    Ok(OrthoBasis {
        entries,
        inner: tag.to_string(),
        d,
        horizon,
    })
}

/// Gram-Schmidt on arbitrary polynomials, each labelled by a key word.
pub fn gram_schmidt_polys(
    keys: &[Word],
    polys: &[TensorPoly],
    inner: &dyn InnerProduct,
) -> Result<Vec<OrthoEntry>> {
    let mut out: Vec<OrthoEntry> = Vec::with_capacity(polys.len());
    for (key, p) in keys.iter().zip(polys) {
        let mut q = p.clone();
        for prev in &out {
            if prev.sq_norm.is_positive() {
                let c = inner.pair(p, &prev.poly)? / &prev.sq_norm;
                q.axpy(&-c, &prev.poly);
            }
        }
        let sq_norm = inner.norm_sq(&q)?;
        out.push(OrthoEntry {
            key: key.clone(),
            poly: q,
            sq_norm,
        });
    }
    Ok(out)
}

/// Rewrites a word as a functional of `Ŝ(B̃)_{0,T}` supported on `∅` and
/// words not ending in the time letter.
pub fn reduce_trailing_zeros(w: &Word, t: &TimeHorizon) -> TensorPoly {
    let mut memo = HashMap::new();
    reduce_rec(w, t.value(), &mut memo)
}

fn reduce_rec(w: &Word, t: &Rational, memo: &mut HashMap<Word, TensorPoly>) -> TensorPoly {
    if !w.ends_in_time() {
        return TensorPoly::from_word(w.clone());
    }
    if let Some(p) = memo.get(w) {
        return p.clone();
    }
    let (u, _) = w.split_last().expect("nonempty");
    // 0 ⧢̂ u inserts one time letter anywhere; the insertions at or after
    // u's trailing time run all give w, the rest end in a shorter run.
    let letters = u.letters();
    let trailing = letters.iter().rev().take_while(|&&l| l == TIME).count();
    let c = Rational::from_integer((trailing + 1).into());
    let mut rest = TensorPoly::zero();
    for pos in 0..letters.len() - trailing {
        let mut x = letters[..pos].to_vec();
        x.push(TIME);
        x.extend_from_slice(&letters[pos..]);
        rest.add_term(Word::new(x), Rational::one());
    }
    // c·w = T·u − rest, as functionals
    let mut out = reduce_rec(&u, t, memo).scale(t);
    for (v, k) in rest.iter() {
        out.axpy(&-k.clone(), &reduce_rec(v, t, memo));
    }
    let out = out.scale(&c.recip());
    memo.insert(w.clone(), out.clone());
    out
}

/// A word over `{0, 1}` that is empty or ends in `1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryPattern {
    word: Word,
    profile: Vec<usize>,
}

impl BinaryPattern {
    pub fn new(word: Word) -> Result<Self> {
        let profile = zero_profile(&word)?;
        Ok(BinaryPattern { word, profile })
    }

    /// `0^{i_1} 1 ... 0^{i_k} 1`.
    pub fn from_profile(profile: &[usize]) -> Self {
        let mut letters = Vec::new();
        for &i in profile {
            letters.extend(std::iter::repeat_n(TIME, i));
            letters.push(1);
        }
        BinaryPattern {
            word: Word::new(letters),
            profile: profile.to_vec(),
        }
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn profile(&self) -> &[usize] {
        &self.profile
    }

    pub fn ones(&self) -> usize {
        self.profile.len()
    }

    /// All patterns with weighted degree at most `max`.
    pub fn all_up_to(max: usize) -> Vec<BinaryPattern> {
        let mut out = Vec::new();
        fn rec(budget: usize, cur: &mut Vec<usize>, out: &mut Vec<BinaryPattern>) {
            out.push(BinaryPattern::from_profile(cur));
            // a block 0^i 1 costs 2i + 1
            let mut i = 0;
            while 2 * i < budget {
                cur.push(i);
                rec(budget - 2 * i - 1, cur, out);
                cur.pop();
                i += 1;
            }
        }
        rec(max, &mut Vec::new(), &mut out);
        out
    }
}

/// Sort key of the exported basis: weighted degree, then `<_0`.
fn export_order(a: &Word, b: &Word) -> Ordering {
    a.weighted_degree()
        .cmp(&b.weighted_degree())
        .then_with(|| zero_order(a, b))
}

struct BinaryIp<'a>(&'a TimeHorizon);

impl InnerProduct for BinaryIp<'_> {
    fn pair_words(&self, u: &Word, v: &Word) -> Result<Rational> {
        binary_inner(u, v, self.0)
    }

    fn tag(&self) -> String {
        "ito".into()
    }
}

/// Gram-Schmidt within each equivalence class of `words` (words with the
/// same zero-stripped letters), in the order `<_0`.
fn classwise(words: Vec<Word>, inner: &dyn InnerProduct) -> Result<Vec<OrthoEntry>> {
    let mut classes: HashMap<Word, Vec<Word>> = HashMap::new();
    for w in words {
        classes.entry(w.strip_time()).or_default().push(w);
    }
    let mut entries = Vec::new();
    for (_, mut class) in classes {
        class.sort_by(zero_order);
        let polys: Vec<TensorPoly> = class
            .iter()
            .map(|w| TensorPoly::from_word(w.clone()))
            .collect();
        entries.extend(gram_schmidt_polys(&class, &polys, inner)?);
    }
    entries.sort_by(|a, b| export_order(&a.key, &b.key));
    Ok(entries)
}

/// The Itô orthogonal basis `p̂_w` for binary patterns `w` with `|w| ≤ max`.
pub fn ito_orthogonal_basis(max_weighted_degree: usize, t: &TimeHorizon) -> OrthoBasis {
    let words = BinaryPattern::all_up_to(max_weighted_degree)
        .into_iter()
        .map(|p| p.word)
        .collect();
    let entries = classwise(words, &BinaryIp(t)).expect("binary patterns are valid");
    OrthoBasis {
        entries,
        inner: "ito".into(),
        d: 1,
        horizon: t.value().clone(),
    }
}

/// Words over `{0..d}` that are empty or end in a spatial letter, with
/// weighted degree at most `max`.
pub fn nondegenerate_words(d: usize, max_weighted_degree: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    let mut frontier = vec![Word::empty()];
    // grow by blocks 0^i α, each costing 2i + 1
    while let Some(w) = frontier.pop() {
        let used = w.weighted_degree();
        let mut i = 0;
        while used + 2 * i < max_weighted_degree {
            for a in 1..=d as Letter {
                let mut x = w.letters().to_vec();
                x.extend(std::iter::repeat_n(TIME, i));
                x.push(a);
                let x = Word::new(x);
                out.push(x.clone());
                frontier.push(x);
            }
            i += 1;
        }
    }
    out.sort_by(export_order);
    out
}

/// Direct class-restricted Gram-Schmidt over `d` letters under a general
/// Itô pairing.
pub fn ito_basis_direct(
    d: usize,
    max_weighted_degree: usize,
    inner: &dyn InnerProduct,
    horizon: &TimeHorizon,
) -> Result<OrthoBasis> {
    let entries = classwise(nondegenerate_words(d, max_weighted_degree), inner)?;
    Ok(OrthoBasis {
        entries,
        inner: inner.tag(),
        d,
        horizon: horizon.value().clone(),
    })
}

/// Replaces the `1`s of every term, in order, by `letters`.
pub fn lift_pattern(p: &TensorPoly, letters: &[Letter]) -> Result<TensorPoly> {
    if letters.contains(&TIME) {
        return Err(Error::TimeLetterNotAllowed(format!("{letters:?}")));
    }
    let mut out = TensorPoly::zero();
    for (w, c) in p.iter() {
        let mut it = letters.iter();
        let mut x = Vec::with_capacity(w.tensor_degree());
        for &l in w.letters() {
            match l {
                TIME => x.push(TIME),
                1 => x.push(*it.next().ok_or_else(|| {
                    Error::DimensionMismatch(format!("{} letters for term {w}", letters.len()))
                })?),
                _ => return Err(Error::InvalidPattern(w.to_string())),
            }
        }
        if it.next().is_some() {
            return Err(Error::DimensionMismatch(format!(
                "{} letters for term {w}",
                letters.len()
            )));
        }
        out.add_term(Word::new(x), c.clone());
    }
    Ok(out)
}

/// The `d`-letter Itô basis obtained by lifting the binary one.
pub fn lift_basis(binary: &OrthoBasis, d: usize) -> Result<OrthoBasis> {
    let max = binary
        .entries
        .iter()
        .map(|e| e.key.weighted_degree())
        .max()
        .unwrap_or(0);
    let mut entries = Vec::new();
    for w in nondegenerate_words(d, max) {
        let pattern = w.binary_pattern();
        let e = binary
            .get(&pattern)
            .ok_or_else(|| Error::BasisMismatch(format!("pattern {pattern} missing")))?;
        entries.push(OrthoEntry {
            poly: lift_pattern(&e.poly, w.strip_time().letters())?,
            key: w,
            sq_norm: e.sq_norm.clone(),
        });
    }
    Ok(OrthoBasis {
        entries,
        inner: binary.inner.clone(),
        d,
        horizon: binary.horizon.clone(),
    })
}

/// Polynomials whose Stratonovich coordinates reproduce the Itô
/// coordinates of `basis`: `⟨log p̂_w, S⟩ = ⟨p̂_w, Ŝ⟩`.
pub fn stratonovich_basis(basis: &OrthoBasis) -> OrthoBasis {
    OrthoBasis {
        entries: basis
            .entries
            .iter()
            .map(|e| OrthoEntry {
                key: e.key.clone(),
                poly: hoffman_log(&e.poly),
                sq_norm: e.sq_norm.clone(),
            })
            .collect(),
        inner: format!("stratonovich-{}", basis.inner),
        d: basis.d,
        horizon: basis.horizon.clone(),
    }
}

/// `n! · p̂_{α^n}`, the polynomial whose Itô coordinate is the Hermite
/// polynomial `He_n(B^α_T; T)`.
pub fn hermite_poly(n: usize, letter: Letter) -> TensorPoly {
    let fact: Rational = (1..=n).fold(Rational::one(), |a, k| a * Rational::from_integer(k.into()));
    TensorPoly::term(Word::new(vec![letter; n]), fact)
}

/// Probabilists' Hermite polynomial with variance `t`, by its three-term
/// recurrence.
pub fn hermite_value(n: usize, x: f64, t: f64) -> f64 {
    let (mut a, mut b) = (1.0, x);
    if n == 0 {
        return a;
    }
    for k in 1..n {
        let c = x * b - k as f64 * t * a;
        a = b;
        b = c;
    }
    b
}
