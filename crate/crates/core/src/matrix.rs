//! Dense matrices over exact rationals. Just enough linear algebra for the
//! rest of the crate: products, transposes, determinants, linear solves, and
//! congruence diagonalization support.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// A dense rows-by-cols matrix of `BigRational` entries.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| crate::arith::rational_to_string(&self[(i, j)]))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zero(n, n);
        for i in 0..n {
            m[(i, i)] = BigRational::one();
        }
        m
    }

    /// Build from nested rows; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Build from integer rows.
    pub fn from_int_rows(rows: &[Vec<i64>]) -> Self {
        Matrix::from_rows(
            rows.iter()
                .map(|row| {
                    row.iter()
                        .map(|&x| BigRational::from(BigInt::from(x)))
                        .collect()
                })
                .collect(),
        )
    }

    pub fn diagonal(entries: &[BigRational]) -> Self {
        let mut m = Matrix::zero(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_symmetric(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if self[(i, j)] != self[(j, i)] {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_zero_matrix(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn scale(&self, c: &BigRational) -> Matrix {
        let mut m = self.clone();
        for x in &mut m.data {
            *x *= c;
        }
        m
    }

    /// Matrix power by repeated squaring; exponent 0 gives the identity.
    pub fn pow(&self, mut e: u64) -> Matrix {
        assert!(self.is_square());
        let mut base = self.clone();
        let mut acc = Matrix::identity(self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Apply to a column vector.
    pub fn apply(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| &self[(i, j)] * &v[j])
                    .fold(BigRational::zero(), |a, b| a + b)
            })
            .collect()
    }

    /// Exact determinant by fraction-free-ish Gaussian elimination.
    pub fn det(&self) -> BigRational {
        assert!(self.is_square());
        let n = self.rows;
        let mut m = self.clone();
        let mut det = BigRational::one();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m[(r, col)].is_zero());
            let pivot = match pivot {
                Some(p) => p,
                None => return BigRational::zero(),
            };
            if pivot != col {
                for j in 0..n {
                    let a = m[(pivot, j)].clone();
                    let b = m[(col, j)].clone();
                    m[(pivot, j)] = b;
                    m[(col, j)] = a;
                }
                det = -det;
            }
            let p = m[(col, col)].clone();
            det *= &p;
            for r in (col + 1)..n {
                if m[(r, col)].is_zero() {
                    continue;
                }
                let factor = &m[(r, col)] / &p;
                for j in col..n {
                    let sub = &factor * &m[(col, j)];
                    m[(r, j)] = &m[(r, j)] - &sub;
                }
            }
        }
        det
    }

    /// Solve `self * x = rhs` for square invertible `self`; None when singular.
    pub fn solve(&self, rhs: &[BigRational]) -> Option<Vec<BigRational>> {
        assert!(self.is_square());
        assert_eq!(self.rows, rhs.len());
        let n = self.rows;
        let mut m = self.clone();
        let mut b = rhs.to_vec();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m[(r, col)].is_zero())?;
            if pivot != col {
                for j in 0..n {
                    let a = m[(pivot, j)].clone();
                    let c = m[(col, j)].clone();
                    m[(pivot, j)] = c;
                    m[(col, j)] = a;
                }
                b.swap(pivot, col);
            }
            let p = m[(col, col)].clone();
            for r in 0..n {
                if r == col || m[(r, col)].is_zero() {
                    continue;
                }
                let factor = &m[(r, col)] / &p;
                for j in col..n {
                    let sub = &factor * &m[(col, j)];
                    m[(r, j)] = &m[(r, j)] - &sub;
                }
                let sub = &factor * &b[col];
                b[r] = &b[r] - &sub;
            }
        }
        Some((0..n).map(|i| &b[i] / &m[(i, i)]).collect())
    }

    /// Entries as nested rows.
    pub fn to_rows(&self) -> Vec<Vec<BigRational>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].clone()).collect())
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = BigRational;
    fn index(&self, (i, j): (usize, usize)) -> &BigRational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigRational {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in product");
        let mut out = Matrix::zero(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self[(i, k)].is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let add = &self[(i, k)] * &rhs[(k, j)];
                    out[(i, j)] = &out[(i, j)] + &add;
                }
            }
        }
        out
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&rhs.data) {
            *x += y;
        }
        out
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&rhs.data) {
            *x -= y;
        }
        out
    }
}

/// Parse a matrix literal: rows separated by `;`, entries by `,`.
pub fn parse_matrix(s: &str) -> Result<Matrix, crate::error::Error> {
    let rows: Result<Vec<Vec<BigRational>>, _> = s
        .split(';')
        .map(|row| row.split(',').map(crate::arith::parse_rational).collect())
        .collect();
    let rows = rows?;
    let width = rows.first().map_or(0, |r| r.len());
    if rows.is_empty() || width == 0 || rows.iter().any(|r| r.len() != width) {
        return Err(crate::error::Error::Parse(format!(
            "matrix literal `{s}` must have equal-length, nonempty rows"
        )));
    }
    Ok(Matrix::from_rows(rows))
}

/// Absolute value helper used by searches for deterministic ordering.
pub fn rat_abs(x: &BigRational) -> BigRational {
    if x.is_negative() {
        -x.clone()
    } else {
        x.clone()
    }
}
