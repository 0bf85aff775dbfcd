//! Dense exact-rational matrices and Gaussian elimination.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_traits::{One, Zero};

use crate::poly::{fmt_rational, to_f64, Rational};

#[derive(Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Rational>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        RatMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        RatMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> RatMatrix {
        RatMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// Stacks matrices with equal column counts on top of each other.
    pub fn vstack(blocks: &[&RatMatrix]) -> RatMatrix {
        let cols = blocks.first().map_or(0, |b| b.cols);
        assert!(blocks.iter().all(|b| b.cols == cols));
        RatMatrix {
            rows: blocks.iter().map(|b| b.rows).sum(),
            cols,
            data: blocks.iter().flat_map(|b| b.data.iter().cloned()).collect(),
        }
    }

    /// Concatenates matrices with equal row counts side by side.
    pub fn hstack(blocks: &[&RatMatrix]) -> RatMatrix {
        let t: Vec<RatMatrix> = blocks.iter().map(|b| b.transpose()).collect();
        RatMatrix::vstack(&t.iter().collect::<Vec<_>>()).transpose()
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> RatMatrix {
        RatMatrix::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)].clone())
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(to_f64).collect())
            .collect()
    }

    /// Reduced row echelon form; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self[(i, c)].is_zero()) else {
                continue;
            };
            self.swap_rows(r, p);
            let inv = self[(r, c)].recip();
            for j in c..self.cols {
                let x = &self.data[r * self.cols + j] * &inv;
                self.data[r * self.cols + j] = x;
            }
            for i in 0..self.rows {
                if i == r || self[(i, c)].is_zero() {
                    continue;
                }
                let f = self[(i, c)].clone();
                for j in c..self.cols {
                    if self.data[r * self.cols + j].is_zero() {
                        continue;
                    }
                    let x = &f * &self.data[r * self.cols + j];
                    self.data[i * self.cols + j] -= x;
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Solves `self · X = rhs` for square invertible `self`; `None` if singular.
    pub fn solve(&self, rhs: &RatMatrix) -> Option<RatMatrix> {
        assert_eq!(self.rows, self.cols, "solve needs a square matrix");
        assert_eq!(self.rows, rhs.rows);
        let n = self.rows;
        if n == 0 {
            return Some(rhs.clone());
        }
        let mut aug = RatMatrix::hstack(&[self, rhs]);
        let pivots = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            return None;
        }
        Some(aug.submatrix(0, n, n, rhs.cols))
    }

    pub fn inverse(&self) -> Option<RatMatrix> {
        self.solve(&RatMatrix::identity(self.rows))
    }

    /// A left inverse `(AᵀA)⁻¹Aᵀ` of a matrix with full column rank.
    pub fn left_inverse(&self) -> Option<RatMatrix> {
        let at = self.transpose();
        let normal = &at * self;
        normal.solve(&at)
    }

    /// Leading principal minors' signs checked through pivots of an
    /// elimination without row exchanges; `true` iff all pivots are positive.
    pub fn is_positive_definite(&self) -> bool {
        if !self.is_symmetric() {
            return false;
        }
        let mut m = self.clone();
        let n = self.rows;
        for k in 0..n {
            let p = m[(k, k)].clone();
            if p <= Rational::zero() {
                return false;
            }
            for i in k + 1..n {
                if m[(i, k)].is_zero() {
                    continue;
                }
                let f = &m[(i, k)] / &p;
                for j in k..n {
                    let x = &f * &m[(k, j)];
                    m[(i, j)] -= x;
                }
            }
        }
        true
    }
}

impl std::ops::Index<(usize, usize)> for RatMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul<&RatMatrix> for &RatMatrix {
    type Output = RatMatrix;
    fn mul(self, rhs: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in product");
        let mut out = RatMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }
}

impl Add<&RatMatrix> for &RatMatrix {
    type Output = RatMatrix;
    fn add(self, rhs: &RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub<&RatMatrix> for &RatMatrix {
    type Output = RatMatrix;
    fn sub(self, rhs: &RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RatMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(fmt_rational).collect();
            writeln!(f, "  {}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, rat};

    fn m(rows: &[&[i64]]) -> RatMatrix {
        RatMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| int(x)).collect())
                .collect(),
        )
    }

    #[test]
    fn rank_and_solve() {
        let a = m(&[&[1, 2], &[2, 4]]);
        assert_eq!(a.rank(), 1);
        assert!(a.inverse().is_none());
        let b = m(&[&[2, 1], &[1, 1]]);
        let inv = b.inverse().unwrap();
        assert_eq!(&b * &inv, RatMatrix::identity(2));
        assert_eq!(inv[(0, 1)], int(-1));
    }

    #[test]
    fn left_inverse_of_tall_matrix() {
        let a = m(&[&[1, 0], &[1, 1], &[0, 3]]);
        let l = a.left_inverse().unwrap();
        assert_eq!(&l * &a, RatMatrix::identity(2));
    }

    #[test]
    fn positive_definiteness() {
        let h = RatMatrix::from_rows(vec![vec![int(1), rat(1, 2)], vec![rat(1, 2), rat(1, 3)]]);
        assert!(h.is_positive_definite());
        assert!(!m(&[&[1, 2], &[2, 1]]).is_positive_definite());
    }
}
