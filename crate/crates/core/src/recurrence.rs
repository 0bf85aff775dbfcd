//! Graded recurrence matrices for block orthogonal polynomials in the
//! shuffle algebra, with Lyndon words as generators.
//!
//! Generator multiplication `w_{m,i} · p` is the shuffle product with the
//! Lyndon word; degree-`n` monomials are shuffle products of Lyndon words
//! of total length `n`.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_traits::Zero;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::esig::InnerProduct;
use crate::linalg::RatMatrix;
use crate::lyndon::{
    lyndon_words, monomials_of_degree, radford_expand, LyndonWord, RadfordMonomial,
};
use crate::ortho::BlockOrthogonalizer;
use crate::poly::{to_f64, Rational, TensorPoly};
use crate::shuffle::shuffle;
use crate::word::{Letter, Word};

/// Generators and monomials up to a total degree.
#[derive(Clone, Debug)]
pub struct GradedFrame {
    pub d: usize,
    pub n_max: usize,
    /// `generators[m - 1]` lists the Lyndon words of length `m`.
    pub generators: Vec<Vec<LyndonWord>>,
    /// `monomials[n]` lists the degree-`n` monomials.
    pub monomials: Vec<Vec<RadfordMonomial>>,
}

impl GradedFrame {
    pub fn new(d: usize, n_max: usize) -> Self {
        let generators = lyndon_words(d, n_max);
        let monomials = (0..=n_max)
            .map(|n| monomials_of_degree(&generators, n))
            .collect();
        GradedFrame {
            d,
            n_max,
            generators,
            monomials,
        }
    }

    /// `r_n`.
    pub fn r(&self, n: usize) -> usize {
        self.monomials[n].len()
    }

    /// `N_m`.
    pub fn gens(&self, m: usize) -> usize {
        self.generators.get(m.wrapping_sub(1)).map_or(0, Vec::len)
    }

    pub fn generator(&self, m: usize, i: usize) -> &LyndonWord {
        &self.generators[m - 1][i]
    }

    /// `L_{n,m,i}`: row `j` selects the monomial `w_{m,i} · w_{n−m,j}`.
    pub fn selection(&self, n: usize, m: usize, i: usize) -> RatMatrix {
        let g = self.generator(m, i);
        let mut l = RatMatrix::zeros(self.r(n - m), self.r(n));
        for (row, mono) in self.monomials[n - m].iter().enumerate() {
            let target = mono.times(g);
            let col = self.monomials[n]
                .binary_search(&target)
                .expect("product of monomials is a monomial");
            l[(row, col)] = Rational::from_integer(1.into());
        }
        l
    }
}

/// Block orthogonal polynomials `p_n` (monic in the monomials) and their
/// norm blocks `H_n = (p_n, p_nᵀ)`.
#[derive(Clone, Debug)]
pub struct BlockPolys {
    pub polys: Vec<Vec<TensorPoly>>,
    pub h: Vec<RatMatrix>,
    pub h_inv: Vec<RatMatrix>,
}

fn gram(a: &[TensorPoly], b: &[TensorPoly], inner: &dyn InnerProduct) -> Result<RatMatrix> {
    let mut g = RatMatrix::zeros(a.len(), b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            g[(i, j)] = inner.pair(x, y)?;
        }
    }
    Ok(g)
}

pub fn block_orth_polys(frame: &GradedFrame, inner: &dyn InnerProduct) -> Result<BlockPolys> {
    let mut polys = Vec::new();
    let mut h = Vec::new();
    let mut h_inv = Vec::new();
    for n in 0..=frame.n_max {
        let orth = BlockOrthogonalizer::for_degree(inner, 1, frame.d as Letter, n).map_err(
            |e| match e {
                Error::DegenerateGram { .. } => Error::NotQuasiDefinite(n.saturating_sub(1)),
                e => e,
            },
        )?;
        let p: Vec<TensorPoly> = frame.monomials[n]
            .iter()
            .map(|m| orth.orthogonalize(&radford_expand(m)))
            .collect::<Result<_>>()?;
        let hn = gram(&p, &p, inner)?;
        let inv = hn.inverse().ok_or(Error::NotQuasiDefinite(n))?;
        polys.push(p);
        h.push(hn);
        h_inv.push(inv);
    }
    Ok(BlockPolys { polys, h, h_inv })
}

/// Recurrence matrices and the raw pairings `(w_{m,i} p_b, p_jᵀ)` they
/// come from.
#[derive(Clone, Debug)]
pub struct RecurrenceSet {
    pub frame: GradedFrame,
    pub polys: BlockPolys,
    /// `(m, i, b, j) ↦ (w_{m,i} p_b, p_jᵀ)` for all `b, j ≤ n_max`.
    pub pairings: HashMap<(usize, usize, usize, usize), RatMatrix>,
    /// Shuffle products `w_{m,i} ⧢ p_b[row]`.
    pub products: HashMap<(usize, usize, usize), Vec<TensorPoly>>,
}

/// Pairs arbitrary polynomials against the fixed family `p_j[c]`, caching
/// the word-level functionals `u ↦ (u, p_j[c])`.
struct DualCache<'a> {
    inner: &'a dyn InnerProduct,
    polys: &'a [Vec<TensorPoly>],
    cache: HashMap<(Word, usize), Vec<Rational>>,
}

impl DualCache<'_> {
    fn dual(&mut self, u: &Word, j: usize) -> Result<&Vec<Rational>> {
        let key = (u.clone(), j);
        if !self.cache.contains_key(&key) {
            let v = self.polys[j]
                .iter()
                .map(|p| self.inner.pair(&TensorPoly::from_word(u.clone()), p))
                .collect::<Result<Vec<_>>>()?;
            self.cache.insert(key.clone(), v);
        }
        Ok(&self.cache[&key])
    }

    fn block(&mut self, rows: &[TensorPoly], j: usize) -> Result<RatMatrix> {
        let cols = self.polys[j].len();
        let mut out = RatMatrix::zeros(rows.len(), cols);
        for (r, s) in rows.iter().enumerate() {
            for (u, c) in s.iter() {
                let dual = self.dual(u, j)?.clone();
                for (col, x) in dual.iter().enumerate() {
                    if !x.is_zero() {
                        out[(r, col)] += c * x;
                    }
                }
            }
        }
        Ok(out)
    }
}

pub fn recurrence_matrices(
    frame: &GradedFrame,
    polys: BlockPolys,
    inner: &dyn InnerProduct,
) -> Result<RecurrenceSet> {
    let mut products = HashMap::new();
    let mut pairings = HashMap::new();
    let mut dual = DualCache {
        inner,
        polys: &polys.polys,
        cache: HashMap::new(),
    };
    for m in 1..=frame.n_max {
        for i in 0..frame.gens(m) {
            let g = TensorPoly::from_word(frame.generator(m, i).word().clone());
            for b in 0..=frame.n_max {
                let prods: Vec<TensorPoly> =
                    polys.polys[b].iter().map(|p| shuffle(&g, p)).collect();
                for j in 0..=frame.n_max {
                    pairings.insert((m, i, b, j), dual.block(&prods, j)?);
                }
                products.insert((m, i, b), prods);
            }
        }
    }
    drop(dual);
    Ok(RecurrenceSet {
        frame: frame.clone(),
        polys,
        pairings,
        products,
    })
}

impl RecurrenceSet {
    /// `M^k_{n,m,i} = (w_{m,i} p_{n−m}, p_{n−m+k}ᵀ) H_{n−m+k}^{−1}`, available
    /// when both `n − m` and `n − m + k` are within the frame.
    pub fn m(&self, n: usize, m: usize, i: usize, k: isize) -> Option<RatMatrix> {
        let b = n.checked_sub(m)?;
        let j = usize::try_from(b as isize + k).ok()?;
        if b > self.frame.n_max || j > self.frame.n_max {
            return None;
        }
        let pair = self.pairings.get(&(m, i, b, j))?;
        Some(pair * &self.polys.h_inv[j])
    }

    /// `A_{n,m,i} = M^m_{n,m,i}`.
    pub fn a(&self, n: usize, m: usize, i: usize) -> Option<RatMatrix> {
        self.m(n, m, i, m as isize)
    }

    /// `C_{n,m,i} = M^{−m}_{n+m,m,i}`.
    pub fn c(&self, n: usize, m: usize, i: usize) -> Option<RatMatrix> {
        self.m(n + m, m, i, -(m as isize))
    }

    /// Joint matrix `A_n`, stacked over `m = 1..n` and `i`.
    pub fn joint_a(&self, n: usize) -> RatMatrix {
        let blocks: Vec<RatMatrix> = self
            .gen_indices(n)
            .map(|(m, i)| self.a(n, m, i).expect("in range"))
            .collect();
        RatMatrix::vstack(&blocks.iter().collect::<Vec<_>>())
    }

    /// Joint matrix `C_nᵀ` of the blocks `C_{n,m,i}ᵀ`.
    pub fn joint_ct(&self, n: usize) -> RatMatrix {
        let blocks: Vec<RatMatrix> = self
            .gen_indices(n)
            .map(|(m, i)| self.c(n, m, i).expect("in range").transpose())
            .collect();
        RatMatrix::vstack(&blocks.iter().collect::<Vec<_>>())
    }

    fn gen_indices(&self, n: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..=n).flat_map(move |m| (0..self.frame.gens(m)).map(move |i| (m, i)))
    }

    /// Residual polynomials of `w_{m,i} p_{n−m} − Σ_k M^k p_{n−m+k}`.
    pub fn reconstruction_residual(&self, n: usize, m: usize, i: usize) -> Vec<TensorPoly> {
        let b = n - m;
        let mut out = self.products[&(m, i, b)].clone();
        for k in -(m as isize)..=(m as isize) {
            let Some(mk) = self.m(n, m, i, k) else {
                continue;
            };
            let j = (b as isize + k) as usize;
            for (r, res) in out.iter_mut().enumerate() {
                for (c, p) in self.polys.polys[j].iter().enumerate() {
                    let x = &mk[(r, c)];
                    if !x.is_zero() {
                        res.axpy(&-x.clone(), p);
                    }
                }
            }
        }
        out
    }

    /// `p_n` rebuilt from lower degrees through a left inverse of `A_n`.
    pub fn reconstruct_via_generalized_inverse(&self, n: usize) -> Result<Vec<TensorPoly>> {
        let an = self.joint_a(n);
        let r = self.frame.r(n);
        let rank = an.rank();
        if rank != r {
            return Err(Error::RankDeficient { rank, expected: r });
        }
        let dt = an
            .left_inverse()
            .ok_or(Error::RankDeficient { rank, expected: r })?;
        let mut out = vec![TensorPoly::zero(); r];
        let mut offset = 0;
        for (m, i) in self.gen_indices(n).collect::<Vec<_>>() {
            let b = n - m;
            let rows = self.frame.r(b);
            let d_block = dt.submatrix(0, offset, r, rows);
            offset += rows;
            // w_{m,i} Dᵀ p_{n−m}
            let prods = &self.products[&(m, i, b)];
            for (row, o) in out.iter_mut().enumerate() {
                for (c, p) in prods.iter().enumerate() {
                    let x = &d_block[(row, c)];
                    if !x.is_zero() {
                        o.axpy(x, p);
                    }
                }
            }
            for k in -(m as isize)..(m as isize) {
                let Some(mk) = self.m(n, m, i, k) else {
                    continue;
                };
                let j = (b as isize + k) as usize;
                let coef = &d_block * &mk;
                for (row, o) in out.iter_mut().enumerate() {
                    for (c, p) in self.polys.polys[j].iter().enumerate() {
                        let x = &coef[(row, c)];
                        if !x.is_zero() {
                            o.axpy(&-x.clone(), p);
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Outcome of every exact identity check.
#[derive(Clone, Debug, Default)]
pub struct RankAudit {
    pub d: usize,
    pub n_max: usize,
    pub checks: usize,
    pub failures: Vec<String>,
    pub ranks: Vec<Value>,
}

impl RankAudit {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "d": self.d,
            "n_max": self.n_max,
            "checks": self.checks,
            "passed": self.passed(),
            "failures": self.failures,
            "ranks": self.ranks,
        })
    }
}

/// Verifies the recurrence, the `M` symmetry identity, the `A`/`C`
/// relation, the selection matrices, the rank conditions and the
/// generalized-inverse reconstruction, all exactly.
pub fn rank_audit(rs: &RecurrenceSet) -> RankAudit {
    let f = &rs.frame;
    let h = &rs.polys.h;
    let mut audit = RankAudit {
        d: f.d,
        n_max: f.n_max,
        ..Default::default()
    };
    for n in 1..=f.n_max {
        for m in 1..=n {
            for i in 0..f.gens(m) {
                let res = rs.reconstruction_residual(n, m, i);
                audit.check(res.iter().all(TensorPoly::is_zero), || {
                    format!("recurrence reconstruction n={n} m={m} i={i}")
                });
                // vanishing below the window
                for j in 0..(n - m).saturating_sub(m) {
                    audit.check(rs.pairings[&(m, i, n - m, j)].is_zero(), || {
                        format!("nonzero pairing below window n={n} m={m} i={i} j={j}")
                    });
                }
                let l = f.selection(n, m, i);
                audit.check(
                    &l * &l.transpose() == RatMatrix::identity(f.r(n - m)),
                    || format!("L Lᵀ ≠ I for n={n} m={m} i={i}"),
                );
                let a = rs.a(n, m, i).expect("in range");
                audit.check(a == l, || {
                    format!("A ≠ L for monic blocks n={n} m={m} i={i}")
                });
                let c = rs.c(n, m, i).expect("in range");
                audit.check(&a * &h[n] == &h[n - m] * &c.transpose(), || {
                    format!("A/C relation n={n} m={m} i={i}")
                });
                let (ra, rc) = (RatMatrix::rank(&a), RatMatrix::rank(&c));
                audit.check(ra == f.r(n - m) && rc == f.r(n - m), || {
                    format!(
                        "rank A={ra}, C={rc}, expected {} at n={n} m={m} i={i}",
                        f.r(n - m)
                    )
                });
            }
        }
        let ra = RatMatrix::rank(&rs.joint_a(n));
        let rc = RatMatrix::rank(&rs.joint_ct(n));
        audit
            .ranks
            .push(json!({"n": n, "r_n": f.r(n), "rank_A": ra, "rank_Ct": rc}));
        audit.check(ra == f.r(n) && rc == f.r(n), || {
            format!("joint ranks A={ra}, Cᵀ={rc}, expected {} at n={n}", f.r(n))
        });
        match rs.reconstruct_via_generalized_inverse(n) {
            Ok(p) => audit.check(p == rs.polys.polys[n], || {
                format!("generalized inverse n={n}")
            }),
            Err(e) => audit.check(false, || format!("generalized inverse n={n}: {e}")),
        }
    }
    // M^k_{n,m,i} H_{n−m+k} = H_{n−m} (M^{−k}_{n+k,m,i})ᵀ wherever both sides exist
    for m in 1..=f.n_max {
        for i in 0..f.gens(m) {
            for b in 0..=f.n_max {
                let n = b + m;
                for k in -(m as isize)..=(m as isize) {
                    let (Some(lhs), Some(rhs)) = (
                        rs.m(n, m, i, k),
                        usize::try_from(n as isize + k)
                            .ok()
                            .and_then(|n2| rs.m(n2, m, i, -k)),
                    ) else {
                        continue;
                    };
                    let j = (b as isize + k) as usize;
                    audit.check(&lhs * &h[j] == &h[b] * &rhs.transpose(), || {
                        format!("M identity n={n} m={m} i={i} k={k}")
                    });
                }
            }
        }
    }
    audit
}

fn sym_inv_sqrt(h: &RatMatrix, n: usize) -> Result<DMatrix<f64>> {
    let r = h.rows();
    let m = DMatrix::from_fn(r, r, |i, j| to_f64(&h[(i, j)]));
    let eig = m.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(Error::NotPositiveDefinite(n));
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

fn to_dense(m: &RatMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| to_f64(&m[(i, j)]))
}

/// Truncated Jacobi matrix of generator `(m, i)` in the orthonormal basis
/// `H_n^{−1/2} p_n`, over degrees `0..=cut`.
pub fn jacobi_truncation(
    rs: &RecurrenceSet,
    m: usize,
    i: usize,
    cut: usize,
) -> Result<DMatrix<f64>> {
    let f = &rs.frame;
    let cut = cut.min(f.n_max);
    let s: Vec<DMatrix<f64>> = (0..=cut)
        .map(|n| sym_inv_sqrt(&rs.polys.h[n], n))
        .collect::<Result<_>>()?;
    let offsets: Vec<usize> = (0..=cut)
        .scan(0, |acc, n| {
            let o = *acc;
            *acc += f.r(n);
            Some(o)
        })
        .collect();
    let size: usize = (0..=cut).map(|n| f.r(n)).sum();
    let mut j = DMatrix::zeros(size, size);
    for a in 0..=cut {
        for b in 0..=cut {
            let block = &s[a] * to_dense(&rs.pairings[&(m, i, a, b)]) * &s[b];
            j.view_mut((offsets[a], offsets[b]), (f.r(a), f.r(b)))
                .copy_from(&block);
        }
    }
    Ok(j)
}

/// Largest entry of `J₁J₂ − J₂J₁` over the rows of degree `a` with
/// `a + max(m₁, m₂) ≤ cut`, where truncation does not affect the product.
pub fn commutativity_residual(
    rs: &RecurrenceSet,
    g1: (usize, usize),
    g2: (usize, usize),
    cut: usize,
) -> Result<f64> {
    let f = &rs.frame;
    let cut = cut.min(f.n_max);
    let reach = g1.0.max(g2.0);
    if reach > cut {
        return Ok(0.0);
    }
    let j1 = jacobi_truncation(rs, g1.0, g1.1, cut)?;
    let j2 = jacobi_truncation(rs, g2.0, g2.1, cut)?;
    let comm = &j1 * &j2 - &j2 * &j1;
    let rows: usize = (0..=cut - reach).map(|n| f.r(n)).sum();
    Ok(comm
        .rows(0, rows)
        .iter()
        .fold(0.0, |acc, x| acc.max(x.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::esig::{Cached, Fawcett, TimeHorizon};
    use crate::poly::{int, poly};

    fn set(d: usize, n_max: usize) -> RecurrenceSet {
        let f = Fawcett::new(TimeHorizon::unit(), d);
        let c = Cached::new(&f);
        let frame = GradedFrame::new(d, n_max);
        let polys = block_orth_polys(&frame, &c).unwrap();
        recurrence_matrices(&frame, polys, &c).unwrap()
    }

    #[test]
    fn low_degree_blocks() {
        let rs = set(2, 2);
        assert_eq!(rs.polys.polys[0], vec![TensorPoly::one()]);
        assert_eq!(rs.polys.h[0], RatMatrix::identity(1));
        assert_eq!(rs.polys.h[1], RatMatrix::identity(2));
        assert_eq!(rs.frame.r(2), 4);
    }

    #[test]
    fn scalar_case_is_hermite() {
        let rs = set(1, 4);
        // monic Hermite in x = 1: x He_{n−1} = He_n + (n−1) He_{n−2}
        assert_eq!(rs.polys.polys[2][0], poly(&[("11", 2, 1), ("", -1, 1)]));
        for n in 2..=4usize {
            assert_eq!(rs.a(n, 1, 0).unwrap(), RatMatrix::identity(1));
            assert!(rs.m(n, 1, 0, 0).unwrap().is_zero());
            assert_eq!(rs.m(n, 1, 0, -1).unwrap()[(0, 0)], int(n as i64 - 1));
        }
    }

    #[test]
    fn audit_small() {
        let rs = set(2, 3);
        let audit = rank_audit(&rs);
        assert!(audit.passed(), "{:?}", audit.failures);
        let j = jacobi_truncation(&rs, 1, 0, 3).unwrap();
        assert!((&j - j.transpose()).amax() < 1e-10);
    }
}
