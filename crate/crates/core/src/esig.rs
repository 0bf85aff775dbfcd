//! Closed-form expected signatures of Brownian motion and the inner
//! products they induce on words.
//!
//! Two laws are covered:
//!
//! * Brownian motion without time, Stratonovich signature:
//!   `E S = exp(T/2 · Σ_γ γγ)`; a word pairs non-trivially only when it is
//!   a concatenation of doubled letters.
//! * Time-augmented Brownian motion, Itô signature: `E Ŝ = Σ_n T^n/n! 0^n`.
//!
//! Word-level pairings are evaluated by counting interleavings directly
//! instead of materialising the (quasi-)shuffle product; the product-based
//! definitions are kept as [`fawcett_pair`] ∘ shuffle and [`ito_pair`] ∘
//! quasi-shuffle and the tests pin the two routes against each other.

use std::collections::HashMap;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::RatMatrix;
use crate::poly::{binomial, factorial, fmt_rational, rat_pow, to_f64, Rational, TensorPoly};
use crate::shuffle::{quasi_shuffle, shuffle};
use crate::word::{Letter, Word, TIME};

/// Length `T` of the time interval `[0, T]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimeHorizon(Rational);

impl TimeHorizon {
    pub fn new(t: Rational) -> Result<Self> {
        if t.is_positive() {
            Ok(TimeHorizon(t))
        } else {
            Err(Error::InvalidConfig(format!(
                "horizon must be positive, got {t}"
            )))
        }
    }

    pub fn unit() -> Self {
        TimeHorizon(Rational::one())
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn as_f64(&self) -> f64 {
        to_f64(&self.0)
    }
}

impl Default for TimeHorizon {
    fn default() -> Self {
        TimeHorizon::unit()
    }
}

fn check_spatial(w: &Word, d: usize) -> Result<()> {
    if w.contains_time() {
        return Err(Error::TimeLetterNotAllowed(w.to_string()));
    }
    w.check_alphabet(d)
}

/// `T^n / (2^n n!)`, the expected-signature weight of a doubled word of
/// length `2n`.
fn fawcett_weight(n: usize, t: &TimeHorizon) -> Rational {
    rat_pow(t.value(), n) / Rational::from_integer(BigInt::from(2).pow(n as u32) * factorial(n))
}

fn is_doubled(w: &[Letter]) -> bool {
    w.len().is_multiple_of(2) && w.chunks(2).all(|c| c[0] == c[1])
}

/// `⟨ℓ, E S(W)_{0,T}⟩` for Brownian motion without time.
pub fn fawcett_pair(l: &TensorPoly, t: &TimeHorizon, d: usize) -> Result<Rational> {
    let mut acc = Rational::zero();
    for (w, c) in l.iter() {
        check_spatial(w, d)?;
        if is_doubled(w.letters()) {
            acc += c * fawcett_weight(w.tensor_degree() / 2, t);
        }
    }
    Ok(acc)
}

/// Number of interleavings of `u` and `v` that form a doubled word.
fn doubled_interleavings(u: &[Letter], v: &[Letter]) -> u64 {
    let (a, b) = (u.len(), v.len());
    if (a + b) % 2 == 1 {
        return 0;
    }
    // f[i][j]: completions from a state with i letters of u and j of v used
    let mut f = vec![vec![0u64; b + 1]; a + 1];
    f[a][b] = 1;
    for i in (0..=a).rev() {
        for j in (0..=b).rev() {
            if (i + j) % 2 == 1 || (i == a && j == b) {
                continue;
            }
            let mut n = 0;
            if i + 2 <= a && u[i] == u[i + 1] {
                n += f[i + 2][j];
            }
            if i < a && j < b && u[i] == v[j] {
                n += 2 * f[i + 1][j + 1];
            }
            if j + 2 <= b && v[j] == v[j + 1] {
                n += f[i][j + 2];
            }
            f[i][j] = n;
        }
    }
    f[0][0]
}

/// `(u, v) = ⟨u ⧢ v, E S(W)_{0,T}⟩` on words without the time letter.
pub fn fawcett_word_inner(u: &Word, v: &Word, t: &TimeHorizon, d: usize) -> Result<Rational> {
    check_spatial(u, d)?;
    check_spatial(v, d)?;
    let n = doubled_interleavings(u.letters(), v.letters());
    if n == 0 {
        return Ok(Rational::zero());
    }
    let half = (u.tensor_degree() + v.tensor_degree()) / 2;
    Ok(Rational::from_integer(BigInt::from(n)) * fawcett_weight(half, t))
}

/// Inner product induced by the Stratonovich expected signature of
/// `d`-dimensional Brownian motion without time.
pub fn inner_fawcett(
    u: &TensorPoly,
    v: &TensorPoly,
    t: &TimeHorizon,
    d: usize,
) -> Result<Rational> {
    Fawcett::new(t.clone(), d).pair(u, v)
}

/// `⟨ℓ, E Ŝ(B̃)_{0,T}⟩`: only pure time words contribute, `0^n ↦ T^n/n!`.
pub fn ito_pair(l: &TensorPoly, t: &TimeHorizon) -> Rational {
    let mut acc = Rational::zero();
    for (w, c) in l.iter() {
        if w.letters().iter().all(|&x| x == TIME) {
            let n = w.tensor_degree();
            acc += c * rat_pow(t.value(), n) / Rational::from_integer(factorial(n));
        }
    }
    acc
}

/// Counts, by output length, the quasi-shuffle paths of `u` and `v` whose
/// output consists only of time letters.
fn pure_time_paths(u: &[Letter], v: &[Letter]) -> Vec<u64> {
    let (a, b) = (u.len(), v.len());
    let maxlen = a + b;
    // f[i][j][k]: number of ways to finish from (i, j) emitting k more letters
    let mut f = vec![vec![vec![0u64; maxlen + 1]; b + 1]; a + 1];
    f[a][b][0] = 1;
    for i in (0..=a).rev() {
        for j in (0..=b).rev() {
            if i == a && j == b {
                continue;
            }
            let mut cell = vec![0u64; maxlen + 1];
            let mut add = |src: &Vec<u64>| {
                for k in 0..maxlen {
                    cell[k + 1] += src[k];
                }
            };
            if i < a && u[i] == TIME {
                add(&f[i + 1][j]);
            }
            if j < b && v[j] == TIME {
                add(&f[i][j + 1]);
            }
            if i < a && j < b && u[i] == v[j] && u[i] != TIME {
                add(&f[i + 1][j + 1]);
            }
            f[i][j] = cell;
        }
    }
    std::mem::take(&mut f[0][0])
}

/// `(u, v) = ⟨u ⧢̂ v, E Ŝ(B̃)_{0,T}⟩` on words over `{0, ..., d}`.
pub fn ito_word_inner(u: &Word, v: &Word, t: &TimeHorizon) -> Rational {
    if u.strip_time() != v.strip_time() {
        return Rational::zero();
    }
    pure_time_paths(u.letters(), v.letters())
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .map(|(n, c)| {
            Rational::from_integer(BigInt::from(c)) * rat_pow(t.value(), n)
                / Rational::from_integer(factorial(n))
        })
        .sum()
}

/// Inner product induced by the Itô expected signature of time-augmented
/// Brownian motion.
pub fn inner_ito(u: &TensorPoly, v: &TensorPoly, t: &TimeHorizon) -> Rational {
    Ito::new(t.clone())
        .pair(u, v)
        .expect("the Itô pairing is total")
}

/// Itô pairing defined literally as `ito_pair(u ⧢̂ v)`; kept as an oracle.
pub fn inner_ito_via_product(u: &TensorPoly, v: &TensorPoly, t: &TimeHorizon) -> Rational {
    ito_pair(&quasi_shuffle(u, v), t)
}

/// Fawcett pairing defined literally as `fawcett_pair(u ⧢ v)`; kept as an
/// oracle.
pub fn inner_fawcett_via_product(
    u: &TensorPoly,
    v: &TensorPoly,
    t: &TimeHorizon,
    d: usize,
) -> Result<Rational> {
    fawcett_pair(&shuffle(u, v), t, d)
}

/// Zero-block profile `(i_1, ..., i_k)` of a binary pattern
/// `0^{i_1} 1 ... 0^{i_k} 1`.
pub fn zero_profile(w: &Word) -> Result<Vec<usize>> {
    if !w.is_empty() && w.ends_in_time() {
        return Err(Error::InvalidPattern(w.to_string()));
    }
    let mut out = Vec::new();
    let mut run = 0;
    for &l in w.letters() {
        match l {
            0 => run += 1,
            1 => {
                out.push(run);
                run = 0;
            }
            _ => return Err(Error::InvalidPattern(w.to_string())),
        }
    }
    Ok(out)
}

/// Closed-form Itô inner product of two binary patterns:
/// `T^{i+j+k}/(i+j+k)! · Π_{r=1..k} C(i_r + j_r, i_r)`.
///
/// The product runs over the `k` blocks `r = 1..k`; there is no block `0`.
pub fn binary_inner(u: &Word, v: &Word, t: &TimeHorizon) -> Result<Rational> {
    let pu = zero_profile(u)?;
    let pv = zero_profile(v)?;
    if pu.len() != pv.len() {
        return Ok(Rational::zero());
    }
    let k = pu.len();
    let i: usize = pu.iter().sum();
    let j: usize = pv.iter().sum();
    let n = i + j + k;
    let blocks = pu
        .iter()
        .zip(&pv)
        .fold(BigInt::one(), |acc, (&a, &b)| acc * binomial(a + b, a));
    Ok(Rational::from_integer(blocks) * rat_pow(t.value(), n)
        / Rational::from_integer(factorial(n)))
}

/// A symmetric bilinear form on words, extended bilinearly to polynomials.
pub trait InnerProduct: Sync {
    fn pair_words(&self, u: &Word, v: &Word) -> Result<Rational>;

    fn pair(&self, u: &TensorPoly, v: &TensorPoly) -> Result<Rational> {
        let mut acc = Rational::zero();
        for (a, ca) in u.iter() {
            for (b, cb) in v.iter() {
                let x = self.pair_words(a, b)?;
                if !x.is_zero() {
                    acc += ca * cb * x;
                }
            }
        }
        Ok(acc)
    }

    fn norm_sq(&self, u: &TensorPoly) -> Result<Rational> {
        self.pair(u, u)
    }

    /// Short identifier used in exports.
    fn tag(&self) -> String;
}

/// Stratonovich expected-signature pairing without time.
#[derive(Clone, Debug)]
pub struct Fawcett {
    pub horizon: TimeHorizon,
    pub d: usize,
}

impl Fawcett {
    pub fn new(horizon: TimeHorizon, d: usize) -> Self {
        Fawcett { horizon, d }
    }
}

impl InnerProduct for Fawcett {
    fn pair_words(&self, u: &Word, v: &Word) -> Result<Rational> {
        fawcett_word_inner(u, v, &self.horizon, self.d)
    }

    fn tag(&self) -> String {
        format!(
            "fawcett(d={},T={})",
            self.d,
            fmt_rational(self.horizon.value())
        )
    }
}

/// Itô expected-signature pairing of time-augmented Brownian motion.
#[derive(Clone, Debug)]
pub struct Ito {
    pub horizon: TimeHorizon,
}

impl Ito {
    pub fn new(horizon: TimeHorizon) -> Self {
        Ito { horizon }
    }
}

impl InnerProduct for Ito {
    fn pair_words(&self, u: &Word, v: &Word) -> Result<Rational> {
        Ok(ito_word_inner(u, v, &self.horizon))
    }

    fn tag(&self) -> String {
        format!("ito(T={})", fmt_rational(self.horizon.value()))
    }
}

/// Itô pairing restricted to binary patterns, evaluated in closed form.
#[derive(Clone, Debug)]
pub struct BinaryIto {
    pub horizon: TimeHorizon,
}

impl InnerProduct for BinaryIto {
    fn pair_words(&self, u: &Word, v: &Word) -> Result<Rational> {
        binary_inner(u, v, &self.horizon)
    }

    fn tag(&self) -> String {
        format!("ito-binary(T={})", fmt_rational(self.horizon.value()))
    }
}

/// Memoizes word-level pairings of another inner product.
pub struct Cached<'a, I: InnerProduct + ?Sized> {
    inner: &'a I,
    cache: Mutex<HashMap<(Word, Word), Rational>>,
}

impl<'a, I: InnerProduct + ?Sized> Cached<'a, I> {
    pub fn new(inner: &'a I) -> Self {
        Cached {
            inner,
            cache: Mutex::new(HashMap::new()),
        }
    }
}

impl<I: InnerProduct + ?Sized> InnerProduct for Cached<'_, I> {
    fn pair_words(&self, u: &Word, v: &Word) -> Result<Rational> {
        let key = if u <= v {
            (u.clone(), v.clone())
        } else {
            (v.clone(), u.clone())
        };
        if let Some(x) = self.cache.lock().unwrap().get(&key) {
            return Ok(x.clone());
        }
        let x = self.inner.pair_words(u, v)?;
        self.cache.lock().unwrap().insert(key, x.clone());
        Ok(x)
    }

    fn tag(&self) -> String {
        self.inner.tag()
    }
}

/// Matrix of pairwise inner products between two ordered families.
#[derive(Clone, Debug)]
pub struct GramBlock {
    pub rows: Vec<TensorPoly>,
    pub cols: Vec<TensorPoly>,
    pub entries: RatMatrix,
}

pub fn gram_block(
    basis_u: &[TensorPoly],
    basis_v: &[TensorPoly],
    inner: &dyn InnerProduct,
) -> Result<GramBlock> {
    let mut entries = RatMatrix::zeros(basis_u.len(), basis_v.len());
    for (i, a) in basis_u.iter().enumerate() {
        for (j, b) in basis_v.iter().enumerate() {
            entries[(i, j)] = inner.pair(a, b)?;
        }
    }
    Ok(GramBlock {
        rows: basis_u.to_vec(),
        cols: basis_v.to_vec(),
        entries,
    })
}

fn label(p: &TensorPoly) -> String {
    match p.iter().next() {
        Some((w, c)) if p.len() == 1 && c.is_one() => w.key(),
        _ => p.to_string(),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl GramBlock {
    pub fn is_symmetric(&self) -> bool {
        self.entries.is_symmetric()
    }

    /// Long-format CSV: `row,col,exact,float`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,col,exact,float\n");
        for (i, r) in self.rows.iter().enumerate() {
            for (j, c) in self.cols.iter().enumerate() {
                let x = &self.entries[(i, j)];
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    csv_field(&label(r)),
                    csv_field(&label(c)),
                    fmt_rational(x),
                    to_f64(x)
                ));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, poly, rat};
    use crate::word::w;

    fn p(s: &str) -> TensorPoly {
        TensorPoly::from_word(w(s))
    }

    fn unit() -> TimeHorizon {
        TimeHorizon::unit()
    }

    #[test]
    fn fawcett_pair_examples() {
        assert_eq!(fawcett_pair(&p("11"), &unit(), 2).unwrap(), rat(1, 2));
        assert_eq!(fawcett_pair(&p("12"), &unit(), 2).unwrap(), int(0));
        assert_eq!(fawcett_pair(&p("1122"), &unit(), 2).unwrap(), rat(1, 8));
        assert!(fawcett_pair(&p("01"), &unit(), 2).is_err());
    }

    #[test]
    fn fawcett_inner_examples() {
        let t = unit();
        assert_eq!(inner_fawcett(&p("1"), &p("1"), &t, 2).unwrap(), int(1));
        assert_eq!(inner_fawcett(&p("11"), &p("11"), &t, 2).unwrap(), rat(3, 4));
        assert_eq!(inner_fawcett(&p("1"), &p("2"), &t, 2).unwrap(), int(0));
    }

    #[test]
    fn fawcett_scaling_in_horizon() {
        let t2 = TimeHorizon::new(int(2)).unwrap();
        let x = fawcett_word_inner(&w("12"), &w("12"), &t2, 2).unwrap();
        let y = fawcett_word_inner(&w("12"), &w("12"), &unit(), 2).unwrap();
        assert_eq!(x, y * int(4));
    }

    #[test]
    fn ito_pair_examples() {
        assert_eq!(ito_pair(&p("000"), &unit()), rat(1, 6));
        assert_eq!(ito_pair(&p("011"), &unit()), int(0));
        assert_eq!(ito_pair(&p(""), &unit()), int(1));
    }

    #[test]
    fn ito_inner_examples() {
        let t = unit();
        assert_eq!(inner_ito(&p("01"), &p("1"), &t), rat(1, 2));
        assert_eq!(inner_ito(&p("1"), &p("2"), &t), int(0));
        assert_eq!(inner_ito(&p("11"), &p("11"), &t), rat(1, 2));
    }

    #[test]
    fn binary_inner_examples() {
        let t = unit();
        assert_eq!(binary_inner(&w("01"), &w("01"), &t).unwrap(), rat(1, 3));
        assert_eq!(binary_inner(&w("001"), &w("01"), &t).unwrap(), rat(1, 8));
        let t3 = TimeHorizon::new(int(3)).unwrap();
        assert_eq!(binary_inner(&w("1"), &w("1"), &t3).unwrap(), int(3));
        assert_eq!(binary_inner(&w("1"), &w("11"), &t).unwrap(), int(0));
        assert!(binary_inner(&w("10"), &w("1"), &t).is_err());
    }

    #[test]
    fn fast_routes_agree_with_products() {
        let t = TimeHorizon::new(rat(3, 2)).unwrap();
        let words = Word::all_up_to(1, 2, 4);
        for a in &words {
            for b in &words {
                let fast = fawcett_word_inner(a, b, &t, 2).unwrap();
                let slow =
                    inner_fawcett_via_product(&a.clone().into(), &b.clone().into(), &t, 2).unwrap();
                assert_eq!(fast, slow, "{a} {b}");
            }
        }
        let words = Word::all_up_to(0, 2, 3);
        for a in &words {
            for b in &words {
                let fast = ito_word_inner(a, b, &t);
                let slow = inner_ito_via_product(&a.clone().into(), &b.clone().into(), &t);
                assert_eq!(fast, slow, "{a} {b}");
            }
        }
    }

    #[test]
    fn gram_block_examples() {
        let f = Fawcett::new(unit(), 2);
        let g = gram_block(&[p("1"), p("2")], &[p("1"), p("2")], &f).unwrap();
        assert_eq!(g.entries, RatMatrix::identity(2));
        let g0 = gram_block(&[p("")], &[p("")], &f).unwrap();
        assert_eq!(g0.entries, RatMatrix::identity(1));
        let level2: Vec<TensorPoly> = ["11", "12", "21", "22"].iter().map(|s| p(s)).collect();
        let g2 = gram_block(&level2, &level2, &f).unwrap();
        assert!(g2.is_symmetric());
        assert_eq!(g2.entries[(0, 0)], rat(3, 4));
        assert!(g2.entries.is_positive_definite());
        let csv = g2.to_csv();
        assert!(csv.starts_with("row,col,exact,float\n11,11,3/4,0.75\n"));
        let mixed = gram_block(&[poly(&[("1", 1, 1), ("2", 1, 1)])], &[p("1")], &f).unwrap();
        assert_eq!(mixed.entries[(0, 0)], int(1));
    }
}
