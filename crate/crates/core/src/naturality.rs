//! Symbolic audit of the block-orthogonalisation map without time.
//!
//! A candidate formula for `p_w` on words of length `n` is written as a
//! linear combination of pairings of the `n` positions: every arc contracts
//! two letters to a Kronecker delta, every singleton keeps its letter. The
//! requirement that the candidate be orthogonal to all lower words (of the
//! same parity) is expressed against generic test words made of fresh
//! symbols, and the expected signature turns each such inner product into a
//! polynomial in δ-symbols. Demanding that every δ-monomial coefficient
//! vanishes yields an exact linear system for the unknown pairing weights.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::RatMatrix;
use crate::poly::{factorial, fmt_rational, Rational, TensorPoly};
use crate::word::{Letter, Word};

/// A formal letter; positions of the ansatz are `1..=n`, test letters follow.
pub type Symbol = u8;

/// A set partition of `{1..n}` into blocks of size one or two.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pairing {
    n: usize,
    blocks: Vec<(Symbol, Option<Symbol>)>,
}

impl Pairing {
    pub fn identity(n: usize) -> Self {
        Pairing {
            n,
            blocks: (1..=n as Symbol).map(|s| (s, None)).collect(),
        }
    }

    /// Builds a pairing from its arcs; all other positions are singletons.
    pub fn from_arcs(n: usize, arcs: &[(Symbol, Symbol)]) -> Result<Self> {
        let mut seen = vec![false; n + 1];
        let mut blocks = Vec::new();
        for &(a, b) in arcs {
            let (a, b) = (a.min(b), a.max(b));
            if a == 0 || a == b || b as usize > n || seen[a as usize] || seen[b as usize] {
                return Err(Error::InvalidConfig(format!("bad arc ({a},{b}) for n={n}")));
            }
            seen[a as usize] = true;
            seen[b as usize] = true;
            blocks.push((a, Some(b)));
        }
        for s in 1..=n {
            if !seen[s] {
                blocks.push((s as Symbol, None));
            }
        }
        blocks.sort();
        Ok(Pairing { n, blocks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> impl Iterator<Item = (Symbol, Symbol)> + '_ {
        self.blocks.iter().filter_map(|&(a, b)| b.map(|b| (a, b)))
    }

    pub fn singletons(&self) -> Vec<Symbol> {
        self.blocks
            .iter()
            .filter(|(_, b)| b.is_none())
            .map(|&(a, _)| a)
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.blocks.iter().all(|(_, b)| b.is_none())
    }

    pub fn is_crossing(&self) -> bool {
        let arcs: Vec<_> = self.arcs().collect();
        arcs.iter()
            .any(|&(a, b)| arcs.iter().any(|&(c, e)| a < c && c < b && b < e))
    }

    /// Noncrossing, and every position lying under an arc is itself paired.
    pub fn is_island(&self) -> bool {
        if self.is_crossing() {
            return false;
        }
        let single = self.singletons();
        self.arcs()
            .all(|(a, b)| !single.iter().any(|&s| a < s && s < b))
    }

    fn monomial(&self) -> DeltaMonomial {
        DeltaMonomial::new(self.arcs().collect())
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &(a, b) in &self.blocks {
            match b {
                Some(b) => write!(f, "{{{a},{b}}}")?,
                None => write!(f, "{{{a}}}")?,
            }
        }
        Ok(())
    }
}

/// All partitions of `{1..n}` with blocks of size at most two, identity first.
pub fn pairings(n: usize) -> Vec<Pairing> {
    fn rec(
        free: &mut Vec<Symbol>,
        acc: &mut Vec<(Symbol, Option<Symbol>)>,
        n: usize,
        out: &mut Vec<Pairing>,
    ) {
        let Some(&first) = free.first() else {
            let mut blocks = acc.clone();
            blocks.sort();
            out.push(Pairing { n, blocks });
            return;
        };
        free.remove(0);
        acc.push((first, None));
        rec(free, acc, n, out);
        acc.pop();
        for i in 0..free.len() {
            let partner = free.remove(i);
            acc.push((first, Some(partner)));
            rec(free, acc, n, out);
            acc.pop();
            free.insert(i, partner);
        }
        free.insert(0, first);
    }
    let mut free: Vec<Symbol> = (1..=n as Symbol).collect();
    let mut out = Vec::new();
    rec(&mut free, &mut Vec::new(), n, &mut out);
    out
}

/// A product of Kronecker deltas, stored as sorted pairs `(a, b)` with `a ≤ b`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DeltaMonomial(Vec<(Symbol, Symbol)>);

impl DeltaMonomial {
    pub fn new(pairs: Vec<(Symbol, Symbol)>) -> Self {
        let mut pairs: Vec<_> = pairs
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        pairs.sort();
        DeltaMonomial(pairs)
    }

    pub fn pairs(&self) -> &[(Symbol, Symbol)] {
        &self.0
    }

    fn times(&self, other: &[(Symbol, Symbol)]) -> DeltaMonomial {
        let mut pairs = self.0.clone();
        pairs.extend_from_slice(other);
        DeltaMonomial::new(pairs)
    }
}

impl fmt::Display for DeltaMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (a, b) in &self.0 {
            write!(f, "d({a},{b})")?;
        }
        Ok(())
    }
}

/// Linear combination of (δ-monomial × word in formal symbols).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DeltaPoly {
    terms: BTreeMap<(DeltaMonomial, Vec<Symbol>), Rational>,
}

impl DeltaPoly {
    pub fn zero() -> Self {
        DeltaPoly::default()
    }

    pub fn term(monomial: DeltaMonomial, word: Vec<Symbol>, c: Rational) -> Self {
        let mut p = DeltaPoly::zero();
        p.add_term(monomial, word, c);
        p
    }

    pub fn add_term(&mut self, monomial: DeltaMonomial, word: Vec<Symbol>, c: Rational) {
        if c.is_zero() {
            return;
        }
        let key = (monomial, word);
        let slot = self.terms.entry(key.clone()).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DeltaMonomial, &[Symbol], &Rational)> {
        self.terms.iter().map(|((m, w), c)| (m, w.as_slice(), c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, monomial: &DeltaMonomial, word: &[Symbol]) -> Rational {
        self.terms
            .get(&(monomial.clone(), word.to_vec()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Shuffle of every residual word with a word of symbols; δ factors are carried.
    pub fn shuffle_with(&self, test: &[Symbol]) -> DeltaPoly {
        let mut out = DeltaPoly::zero();
        for ((m, w), c) in &self.terms {
            for u in interleavings(w, test) {
                out.add_term(m.clone(), u, c.clone());
            }
        }
        out
    }
}

fn interleavings(a: &[Symbol], b: &[Symbol]) -> Vec<Vec<Symbol>> {
    fn rec(a: &[Symbol], b: &[Symbol], buf: &mut Vec<Symbol>, out: &mut Vec<Vec<Symbol>>) {
        if a.is_empty() || b.is_empty() {
            let mut w = buf.clone();
            w.extend_from_slice(a);
            w.extend_from_slice(b);
            out.push(w);
            return;
        }
        buf.push(a[0]);
        rec(&a[1..], b, buf, out);
        buf.pop();
        buf.push(b[0]);
        rec(a, &b[1..], buf, out);
        buf.pop();
    }
    let mut out = Vec::new();
    rec(a, b, &mut Vec::new(), &mut out);
    out
}

/// Expected signature of Brownian motion at `T = 1` on generic symbols:
/// `x₁…x₂ₘ ↦ Π δ(x₂ᵢ₋₁, x₂ᵢ) / (2^m m!)`, odd words vanish.
pub fn esig_generic(p: &DeltaPoly) -> DeltaPoly {
    let mut out = DeltaPoly::zero();
    for ((m, w), c) in &p.terms {
        if w.len() % 2 == 1 {
            continue;
        }
        let half = w.len() / 2;
        let pairs: Vec<_> = w.chunks(2).map(|p| (p[0], p[1])).collect();
        let den = BigInt::from(2).pow(half as u32) * factorial(half);
        out.add_term(m.times(&pairs), Vec::new(), c / Rational::from_integer(den));
    }
    out
}

/// One constraint `Σ coeffs·x + constant = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    pub test_length: usize,
    pub monomial: DeltaMonomial,
    pub coeffs: Vec<(usize, Rational)>,
    pub constant: Rational,
}

impl Equation {
    fn describe(&self, vars: &[Pairing]) -> String {
        let mut s = String::new();
        for (j, c) in &self.coeffs {
            s.push_str(&format!("{}·x{}", fmt_rational(c), vars[*j]));
            s.push_str(" + ");
        }
        s.push_str(&fmt_rational(&self.constant));
        s.push_str(" = 0");
        s
    }
}

#[derive(Clone, Debug)]
pub struct AnsatzSystem {
    pub degree: usize,
    pub noncrossing: bool,
    /// One unknown per non-identity pairing.
    pub vars: Vec<Pairing>,
    pub equations: Vec<Equation>,
}

impl AnsatzSystem {
    pub fn cols(&self) -> usize {
        self.vars.len()
    }

    /// Dense constraint matrix `A`.
    pub fn matrix(&self) -> RatMatrix {
        let mut a = RatMatrix::zeros(self.equations.len(), self.cols());
        for (i, e) in self.equations.iter().enumerate() {
            for (j, c) in &e.coeffs {
                a[(i, *j)] = c.clone();
            }
        }
        a
    }

    /// Right-hand side `b` with `A x = b`.
    pub fn rhs(&self) -> Vec<Rational> {
        self.equations.iter().map(|e| -e.constant.clone()).collect()
    }

    pub fn var_index(&self, p: &Pairing) -> Option<usize> {
        self.vars.iter().position(|v| v == p)
    }

    pub fn find(&self, monomial: &DeltaMonomial) -> Option<&Equation> {
        self.equations.iter().find(|e| &e.monomial == monomial)
    }
}

/// Orthogonality constraints for the length-`n` ansatz. With `noncrossing`
/// only island pairings enter.
pub fn build_system(n: usize, noncrossing: bool) -> Result<AnsatzSystem> {
    if n < 2 {
        return Err(Error::InvalidConfig(
            "naturality degree must be at least 2".into(),
        ));
    }
    if 2 * n > Symbol::MAX as usize {
        return Err(Error::InvalidConfig(format!("degree {n} too large")));
    }
    let all: Vec<Pairing> = pairings(n)
        .into_iter()
        .filter(|p| !noncrossing || p.is_island())
        .collect();
    let vars: Vec<Pairing> = all.iter().filter(|p| !p.is_identity()).cloned().collect();
    let mut lengths: Vec<usize> = (0..n).filter(|k| (n - k).is_multiple_of(2)).collect();
    lengths.sort();

    // Column `vars.len()` collects the identity term.
    let jobs: Vec<(usize, usize, &Pairing)> = lengths
        .iter()
        .flat_map(|&k| all.iter().map(move |p| (k, p)))
        .map(|(k, p)| {
            let col = vars.iter().position(|v| v == p).unwrap_or(vars.len());
            (k, col, p)
        })
        .collect();
    let parts: Vec<(usize, usize, DeltaPoly)> = jobs
        .par_iter()
        .map(|&(k, col, p)| {
            let test: Vec<Symbol> = (n + 1..=n + k).map(|s| s as Symbol).collect();
            let term = DeltaPoly::term(p.monomial(), p.singletons(), Rational::one());
            (k, col, esig_generic(&term.shuffle_with(&test)))
        })
        .collect();

    let mut rows: BTreeMap<(usize, DeltaMonomial), (BTreeMap<usize, Rational>, Rational)> =
        BTreeMap::new();
    for (k, col, ev) in parts {
        for (m, _, c) in ev.iter() {
            let row = rows
                .entry((k, m.clone()))
                .or_insert_with(|| (BTreeMap::new(), Rational::zero()));
            if col == vars.len() {
                row.1 += c;
            } else {
                *row.0.entry(col).or_insert_with(Rational::zero) += c;
            }
        }
    }
    let equations = rows
        .into_iter()
        .map(|((k, m), (coeffs, constant))| Equation {
            test_length: k,
            monomial: m,
            coeffs: coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
            constant,
        })
        .filter(|e| !e.coeffs.is_empty() || !e.constant.is_zero())
        .collect();
    Ok(AnsatzSystem {
        degree: n,
        noncrossing,
        vars,
        equations,
    })
}

/// Inconsistency witness: `Σ weights[i]·row[rows[i]]` has zero coefficients
/// and a nonzero right-hand side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub rows: Vec<usize>,
    pub weights: Vec<Rational>,
    /// No proper subset of `rows` is inconsistent.
    pub minimal: bool,
}

impl Certificate {
    /// Checks `yᵀA = 0` and `yᵀb ≠ 0` against the system.
    pub fn verify(&self, sys: &AnsatzSystem) -> bool {
        let mut comb = vec![Rational::zero(); sys.cols()];
        let mut rhs = Rational::zero();
        for (r, y) in self.rows.iter().zip(&self.weights) {
            let e = &sys.equations[*r];
            for (j, c) in &e.coeffs {
                comb[*j] += y * c;
            }
            rhs -= y * &e.constant;
        }
        comb.iter().all(Zero::is_zero) && !rhs.is_zero()
    }
}

#[derive(Clone, Debug)]
pub struct RankReport {
    pub rank_a: usize,
    pub rank_aug: usize,
    pub consistent: bool,
    /// Present when the system has exactly one solution.
    pub solution: Option<Vec<Rational>>,
    pub certificate: Option<Certificate>,
}

const PRIME: u64 = (1 << 61) - 1;

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % PRIME as u128) as u64
}

fn powmod(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a);
        }
        a = mulmod(a, a);
        e >>= 1;
    }
    r
}

fn to_mod(x: &Rational) -> u64 {
    let p = BigInt::from(PRIME);
    let reduce = |v: &BigInt| {
        let r = ((v % &p) + &p) % &p;
        r.to_u64().expect("residue fits in u64")
    };
    let num = reduce(x.numer());
    let den = reduce(x.denom());
    mulmod(num, powmod(den, PRIME - 2))
}

fn aug_row(e: &Equation, cols: usize) -> Vec<Rational> {
    let mut row = vec![Rational::zero(); cols + 1];
    for (j, c) in &e.coeffs {
        row[*j] = c.clone();
    }
    row[cols] = -e.constant.clone();
    row
}

/// Greedy choice of rows whose augmented images modulo a large prime are
/// independent. Rows independent mod p are independent over the rationals.
fn modp_independent(sys: &AnsatzSystem, candidates: &[usize], stop_at: usize) -> Vec<usize> {
    let width = sys.cols() + 1;
    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut chosen = Vec::new();
    for &r in candidates {
        if basis.len() == stop_at {
            break;
        }
        let e = &sys.equations[r];
        let mut v = vec![0u64; width];
        for (j, c) in &e.coeffs {
            v[*j] = to_mod(c);
        }
        v[width - 1] = to_mod(&-e.constant.clone());
        for (p, row) in &basis {
            let f = v[*p];
            if f == 0 {
                continue;
            }
            for j in 0..width {
                if row[j] != 0 {
                    v[j] = (v[j] + PRIME - mulmod(f, row[j])) % PRIME;
                }
            }
        }
        if let Some(p) = v.iter().position(|&x| x != 0) {
            let inv = powmod(v[p], PRIME - 2);
            for x in v.iter_mut() {
                *x = mulmod(*x, inv);
            }
            basis.push((p, v));
            chosen.push(r);
        }
    }
    chosen
}

fn inconsistent_mod_p(sys: &AnsatzSystem, rows: &[usize]) -> bool {
    let cols = sys.cols();
    let aug = modp_independent(sys, rows, usize::MAX);
    let sub = AnsatzSystem {
        degree: sys.degree,
        noncrossing: sys.noncrossing,
        vars: sys.vars.clone(),
        equations: rows
            .iter()
            .map(|&r| {
                let mut e = sys.equations[r].clone();
                e.constant = Rational::zero();
                e
            })
            .collect(),
    };
    let idx: Vec<usize> = (0..rows.len()).collect();
    let plain = modp_independent(&sub, &idx, cols);
    aug.len() > plain.len()
}

fn exact_ranks(sys: &AnsatzSystem, rows: &[usize]) -> (usize, usize) {
    let cols = sys.cols();
    let mut m = RatMatrix::from_rows(
        rows.iter()
            .map(|&r| aug_row(&sys.equations[r], cols))
            .collect(),
    );
    if rows.is_empty() {
        return (0, 0);
    }
    let pivots = m.rref();
    (pivots.iter().filter(|&&p| p < cols).count(), pivots.len())
}

/// Left kernel vector `y` of `A_rows` with `yᵀb ≠ 0`.
fn farkas_vector(sys: &AnsatzSystem, rows: &[usize]) -> Option<Vec<Rational>> {
    let cols = sys.cols();
    let k = rows.len();
    // Row-reduce [A_S | b_S | I] and read the combination from a row whose
    // coefficient part vanishes but whose right-hand side does not.
    let mut m = RatMatrix::zeros(k, cols + 1 + k);
    for (i, &r) in rows.iter().enumerate() {
        for (j, v) in aug_row(&sys.equations[r], cols).into_iter().enumerate() {
            m[(i, j)] = v;
        }
        m[(i, cols + 1 + i)] = Rational::one();
    }
    let pivots = m.rref();
    let i = pivots.iter().position(|&p| p == cols)?;
    Some((0..k).map(|j| m[(i, cols + 1 + j)].clone()).collect())
}

fn certificate_for(sys: &AnsatzSystem, rows: &[usize]) -> Option<Certificate> {
    let y = farkas_vector(sys, rows)?;
    let support: Vec<usize> = rows
        .iter()
        .zip(&y)
        .filter(|(_, c)| !c.is_zero())
        .map(|(&r, _)| r)
        .collect();
    // Deletion filter modulo p, then exact confirmation of minimality.
    let mut kept = support.clone();
    let mut i = 0;
    while i < kept.len() {
        let mut trial = kept.clone();
        trial.remove(i);
        if inconsistent_mod_p(sys, &trial) {
            kept = trial;
        } else {
            i += 1;
        }
    }
    let (ra, rg) = exact_ranks(sys, &kept);
    let minimal = rg > ra
        && (0..kept.len()).all(|i| {
            let mut trial = kept.clone();
            trial.remove(i);
            let (a, g) = exact_ranks(sys, &trial);
            a == g
        });
    let rows = if minimal { kept } else { support };
    let y = farkas_vector(sys, &rows)?;
    let (rows, weights): (Vec<usize>, Vec<Rational>) = rows
        .into_iter()
        .zip(y)
        .filter(|(_, c)| !c.is_zero())
        .unzip();
    let mut weights = weights;
    normalize(&mut weights);
    Some(Certificate {
        rows,
        weights,
        minimal,
    })
}

/// Scales to integers with gcd 1 and a positive leading entry.
fn normalize(v: &mut [Rational]) {
    use num_integer::Integer;
    let Some(first) = v.iter().find(|x| !x.is_zero()).cloned() else {
        return;
    };
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let gcd = v.iter().fold(BigInt::zero(), |acc, x| {
        acc.gcd(&(x.numer() * (&lcm / x.denom())))
    });
    let mut f = Rational::new(lcm, gcd);
    if first.is_negative() {
        f = -f;
    }
    for x in v.iter_mut() {
        *x = &*x * &f;
    }
}

/// Exact ranks of `A` and `[A | b]`, the unique solution when there is one,
/// and a Farkas certificate when the system is inconsistent.
pub fn rank_certify(sys: &AnsatzSystem) -> RankReport {
    let cols = sys.cols();
    let all: Vec<usize> = (0..sys.equations.len()).collect();
    let mut chosen = modp_independent(sys, &all, cols + 1);
    let (pivots, m) = loop {
        let mut m = RatMatrix::from_rows(
            chosen
                .iter()
                .map(|&r| aug_row(&sys.equations[r], cols))
                .collect(),
        );
        let pivots = if chosen.is_empty() {
            Vec::new()
        } else {
            m.rref()
        };
        if pivots.len() == cols + 1 {
            break (pivots, m);
        }
        // Any row outside the exact span is added and the span recomputed.
        let chosen_set: BTreeSet<usize> = chosen.iter().copied().collect();
        let free: Vec<usize> = (0..=cols).filter(|c| !pivots.contains(c)).collect();
        let missing: Vec<usize> = all
            .iter()
            .copied()
            .filter(|r| !chosen_set.contains(r))
            .filter(|&r| {
                let row = aug_row(&sys.equations[r], cols);
                free.iter().any(|&j| {
                    let mut v = row[j].clone();
                    for (i, &p) in pivots.iter().enumerate() {
                        if !row[p].is_zero() {
                            v -= &row[p] * &m[(i, j)];
                        }
                    }
                    !v.is_zero()
                })
            })
            .collect();
        if missing.is_empty() {
            break (pivots, m);
        }
        chosen.extend(missing);
        chosen.sort();
    };
    let rank_aug = pivots.len();
    let rank_a = pivots.iter().filter(|&&p| p < cols).count();
    let consistent = rank_a == rank_aug;
    let solution = (consistent && rank_a == cols).then(|| {
        let mut x = vec![Rational::zero(); cols];
        for (i, &p) in pivots.iter().enumerate() {
            x[p] = m[(i, cols)].clone();
        }
        x
    });
    let certificate = if consistent {
        None
    } else {
        certificate_for(sys, &chosen)
    };
    RankReport {
        rank_a,
        rank_aug,
        consistent,
        solution,
        certificate,
    }
}

/// Solved ansatz: weights for every pairing, identity included.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnsatzSolution {
    pub degree: usize,
    pub terms: Vec<(Pairing, Rational)>,
}

impl AnsatzSolution {
    pub fn from_system(sys: &AnsatzSystem, x: &[Rational]) -> Self {
        let mut terms = vec![(Pairing::identity(sys.degree), Rational::one())];
        terms.extend(sys.vars.iter().cloned().zip(x.iter().cloned()));
        AnsatzSolution {
            degree: sys.degree,
            terms,
        }
    }

    pub fn weight(&self, p: &Pairing) -> Rational {
        self.terms
            .iter()
            .find(|(q, _)| q == p)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Rational::zero)
    }

    /// The ansatz with concrete letters assigned to its positions.
    pub fn evaluate(&self, w: &Word) -> Result<TensorPoly> {
        if w.letters().len() != self.degree {
            return Err(Error::DimensionMismatch(format!(
                "ansatz of degree {} applied to a word of length {}",
                self.degree,
                w.letters().len()
            )));
        }
        let letters = w.letters();
        let at = |s: Symbol| letters[s as usize - 1];
        let mut out = TensorPoly::zero();
        for (p, c) in &self.terms {
            if c.is_zero() || p.arcs().any(|(a, b)| at(a) != at(b)) {
                continue;
            }
            let rest: Vec<Letter> = p.singletons().into_iter().map(at).collect();
            out.add_term(Word::new(rest), c.clone());
        }
        Ok(out)
    }
}

/// Builds, certifies and reports on the length-`n` ansatz.
pub fn audit(n: usize, noncrossing: bool) -> Result<(AnsatzSystem, RankReport)> {
    let sys = build_system(n, noncrossing)?;
    let report = rank_certify(&sys);
    Ok((sys, report))
}

pub fn report_json(sys: &AnsatzSystem, report: &RankReport) -> Value {
    let mut v = json!({
        "degree": sys.degree,
        "noncrossing": sys.noncrossing,
        "vars": sys.cols(),
        "equations": sys.equations.len(),
        "rank_A": report.rank_a,
        "rank_aug": report.rank_aug,
        "consistent": report.consistent,
    });
    if let Some(x) = &report.solution {
        v["solution"] = Value::Array(
            sys.vars
                .iter()
                .zip(x)
                .map(|(p, c)| json!({"pairing": p.to_string(), "value": fmt_rational(c)}))
                .collect(),
        );
    }
    if let Some(cert) = &report.certificate {
        v["certificate"] = json!({
            "minimal": cert.minimal,
            "rows": cert.rows.iter().zip(&cert.weights).map(|(&r, y)| {
                let e = &sys.equations[r];
                json!({
                    "test_length": e.test_length,
                    "monomial": e.monomial.to_string(),
                    "weight": fmt_rational(y),
                    "equation": e.describe(&sys.vars),
                })
            }).collect::<Vec<_>>(),
        });
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    fn involutions(n: usize) -> usize {
        (2..=n).fold((1, 1), |(a, b), k| (b, b + (k - 1) * a)).1
    }

    #[test]
    fn pairing_counts() {
        for n in 0..=7 {
            assert_eq!(pairings(n).len(), involutions(n), "n={n}");
        }
        assert_eq!(pairings(3).len(), 4);
        assert!(pairings(4)
            .iter()
            .all(|p| p.blocks.iter().all(|&(a, b)| b.is_none_or(|b| a < b))));
    }

    #[test]
    fn island_pairings() {
        let n3: Vec<String> = pairings(3)
            .iter()
            .filter(|p| p.is_island())
            .map(|p| p.to_string())
            .collect();
        assert_eq!(n3, ["{1}{2}{3}", "{1}{2,3}", "{1,2}{3}"]);
        assert_eq!(pairings(4).iter().filter(|p| p.is_island()).count(), 6);
        let crossing = Pairing::from_arcs(4, &[(1, 3), (2, 4)]).unwrap();
        assert!(crossing.is_crossing());
        assert!(Pairing::from_arcs(4, &[(1, 3)]).is_ok());
        assert!(Pairing::from_arcs(4, &[(1, 3), (3, 4)]).is_err());
    }

    #[test]
    fn esig_examples() {
        let ab = esig_generic(&DeltaPoly::term(
            DeltaMonomial::default(),
            vec![1, 2],
            Rational::one(),
        ));
        assert_eq!(ab.coeff(&DeltaMonomial::new(vec![(2, 1)]), &[]), rat(1, 2));
        let abc = esig_generic(&DeltaPoly::term(
            DeltaMonomial::default(),
            vec![1, 2, 3],
            Rational::one(),
        ));
        assert!(abc.is_empty());
        let carried = esig_generic(&DeltaPoly::term(
            DeltaMonomial::new(vec![(4, 3)]),
            vec![1, 2],
            Rational::one(),
        ));
        assert_eq!(
            carried.coeff(&DeltaMonomial::new(vec![(1, 2), (3, 4)]), &[]),
            rat(1, 2)
        );
        let four = esig_generic(&DeltaPoly::term(
            DeltaMonomial::default(),
            vec![1, 2, 3, 4],
            Rational::one(),
        ));
        assert_eq!(
            four.coeff(&DeltaMonomial::new(vec![(1, 2), (3, 4)]), &[]),
            rat(1, 8)
        );
    }

    #[test]
    fn degree_three() {
        let (sys, rep) = audit(3, false).unwrap();
        assert_eq!(sys.cols(), 3);
        assert!(rep.consistent);
        let sol = AnsatzSolution::from_system(&sys, rep.solution.as_ref().unwrap());
        let arc = |a, b| Pairing::from_arcs(3, &[(a, b)]).unwrap();
        assert_eq!(sol.weight(&arc(1, 2)), rat(-1, 4));
        assert_eq!(sol.weight(&arc(2, 3)), rat(-1, 4));
        assert_eq!(sol.weight(&arc(1, 3)), Rational::zero());
    }

    #[test]
    fn degree_two_on_letters() {
        let (sys, rep) = audit(2, false).unwrap();
        let sol = AnsatzSolution::from_system(&sys, rep.solution.as_ref().unwrap());
        let e = sol.evaluate(&Word::new(vec![1, 1])).unwrap();
        assert_eq!(e.coeff(&Word::empty()), rat(-1, 2));
        let e = sol.evaluate(&Word::new(vec![1, 2])).unwrap();
        assert_eq!(e, TensorPoly::from_word(Word::new(vec![1, 2])));
    }

    #[test]
    fn degree_five_inconsistent() {
        let (sys, rep) = audit(5, false).unwrap();
        assert_eq!((rep.rank_a, rep.rank_aug), (25, 26));
        let cert = rep.certificate.unwrap();
        assert!(cert.verify(&sys));
        assert!(cert.minimal);
    }
}
