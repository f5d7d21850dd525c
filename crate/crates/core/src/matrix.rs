//! Dense row-major matrices over any [`Scalar`].

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::{Complex, Rational, Real, Scalar};

#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type RMatrix = Matrix<Rational>;
pub type CMatrix<T = Rational> = Matrix<Complex<T>>;

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                write!(f, "{:?} ", self.data[r * self.cols + c])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<T> Matrix<T> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }
}

impl<T: Clone> Matrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn row(&self, r: usize) -> Vec<T> {
        self.data[r * self.cols..(r + 1) * self.cols].to_vec()
    }

    pub fn col(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Matrix built from column vectors of equal length.
    pub fn from_cols(rows: usize, cols: &[Vec<T>]) -> Self {
        Self::from_fn(rows, cols.len(), |r, c| cols[c][r].clone())
    }

    pub fn select_cols(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.rows, idx.len(), |r, c| self[(r, idx[c])].clone())
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), self.cols, |r, c| self[(idx[r], c)].clone())
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |r, c| self[(r0 + r, c0 + c)].clone())
    }

    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch("hstack row counts differ".into()));
        }
        Ok(Self::from_fn(self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols {
                self[(r, c)].clone()
            } else {
                other[(r, c - self.cols)].clone()
            }
        }))
    }

    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch("vstack column counts differ".into()));
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(Self {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    /// Column-major vectorization.
    pub fn vectorize(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                out.push(self[(r, c)].clone());
            }
        }
        out
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { T::one() } else { T::zero() })
    }

    pub fn scalar(n: usize, s: T) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { s.clone() } else { T::zero() })
    }

    /// Block matrix from a grid of equally-shaped row/column blocks.
    pub fn from_blocks(blocks: &[Vec<&Matrix<T>>]) -> Self {
        let heights: Vec<usize> = blocks.iter().map(|row| row[0].rows).collect();
        let widths: Vec<usize> = blocks[0].iter().map(|b| b.cols).collect();
        let rows = heights.iter().sum();
        let cols = widths.iter().sum();
        let mut m = Self::zeros(rows, cols);
        let mut r0 = 0;
        for (bi, row) in blocks.iter().enumerate() {
            let mut c0 = 0;
            for (bj, b) in row.iter().enumerate() {
                debug_assert_eq!(b.rows, heights[bi]);
                debug_assert_eq!(b.cols, widths[bj]);
                for r in 0..b.rows {
                    for c in 0..b.cols {
                        m[(r0 + r, c0 + c)] = b[(r, c)].clone();
                    }
                }
                c0 += widths[bj];
            }
            r0 += heights[bi];
        }
        m
    }

    /// Block-diagonal matrix.
    pub fn block_diag(blocks: &[&Matrix<T>]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut m = Self::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for r in 0..b.rows {
                for c in 0..b.cols {
                    m[(r0 + r, c0 + c)] = b[(r, c)].clone();
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        m
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|x| x.mul_ref(s))
    }

    pub fn conj(&self) -> Self {
        self.map(|x| x.conj())
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::zero(), |acc, i| acc.add_ref(&self[(i, i)]))
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.data.iter().all(|x| x.negligible(tol))
    }

    /// Entrywise equality; exact domain ignores `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.sub_ref(b).negligible(tol))
    }

    /// Equality up to `tol` relative to the larger operand (at least 1).
    /// Exact entries compare exactly.
    pub fn near(&self, other: &Self, tol: f64) -> bool {
        if T::EXACT {
            return self == other;
        }
        let scale = self.max_abs().max(other.max_abs()).max(1.0);
        self.approx_eq(other, tol * scale)
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(Scalar::magnitude).fold(0.0, f64::max)
    }

    pub fn to_c64(&self) -> Matrix<Complex<f64>> {
        self.map(Scalar::to_c64)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x.magnitude().powi(2)).sum::<f64>().sqrt()
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(r, k)];
                if a.negligible(0.0) {
                    continue;
                }
                for c in 0..other.cols {
                    let b = &other[(k, c)];
                    if b.negligible(0.0) {
                        continue;
                    }
                    let idx = r * out.cols + c;
                    out.data[idx] = out.data[idx].add_ref(&a.mul_ref(b));
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[T]) -> Vec<T> {
        (0..self.rows)
            .map(|r| (0..self.cols).fold(T::zero(), |acc, c| acc.add_ref(&self[(r, c)].mul_ref(&v[c]))))
            .collect()
    }

    /// `self * other + other * self`
    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    /// `self * other - other * self`
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Returns `Some(s)` when the matrix equals `s * Id`.
    pub fn as_scalar_multiple(&self, tol: f64) -> Option<T> {
        if !self.is_square() || self.rows == 0 {
            return None;
        }
        let s = self[(0, 0)].clone();
        for r in 0..self.rows {
            for c in 0..self.cols {
                let expected = if r == c { s.clone() } else { T::zero() };
                if !self[(r, c)].sub_ref(&expected).negligible(tol) {
                    return None;
                }
            }
        }
        Some(s)
    }
}

impl<T: Real> Matrix<T> {
    /// Embed a real matrix into the complex domain.
    pub fn to_complex(&self) -> Matrix<Complex<T>> {
        self.map(|x| Complex::new(x.clone(), T::zero()))
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(Real::to_f64)
    }
}

impl<T: Real> Matrix<Complex<T>> {
    /// `re + i*im`
    pub fn from_parts(re: &Matrix<T>, im: &Matrix<T>) -> Self {
        Matrix::from_fn(re.rows, re.cols, |r, c| {
            Complex::new(re[(r, c)].clone(), im[(r, c)].clone())
        })
    }

    pub fn re(&self) -> Matrix<T> {
        self.map(|z| z.re.clone())
    }

    pub fn im(&self) -> Matrix<T> {
        self.map(|z| z.im.clone())
    }
}

impl RMatrix {
    pub fn from_i64(rows: usize, cols: usize, v: &[i64]) -> Self {
        Matrix::from_fn(rows, cols, |r, c| Rational::from_i64(v[r * cols + c]))
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}

impl<T: Scalar> Add for &Matrix<T> {
    type Output = Matrix<T>;

    fn add(self, rhs: Self) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix add shape");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.add_ref(b)).collect(),
        }
    }
}

impl<T: Scalar> Sub for &Matrix<T> {
    type Output = Matrix<T>;

    fn sub(self, rhs: Self) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix sub shape");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.sub_ref(b)).collect(),
        }
    }
}

impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;

    fn mul(self, rhs: Self) -> Matrix<T> {
        self.matmul(rhs).expect("matrix multiply shape")
    }
}

impl<T: Scalar> Neg for &Matrix<T> {
    type Output = Matrix<T>;

    fn neg(self) -> Matrix<T> {
        self.map(|x| -x.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qi};

    #[test]
    fn transpose_is_involution() {
        let m = RMatrix::from_i64(2, 3, &[1, 2, 3, 4, 5, 6]);
        assert_eq!(m.transpose().transpose(), m);
        assert_eq!(m.transpose()[(2, 1)], qi(6));
    }

    #[test]
    fn conj_transpose_is_involution() {
        let m = CMatrix::from_fn(2, 2, |r, c| Complex::new(qi(r as i64), q(c as i64 + 1, 3)));
        assert_eq!(m.conj_transpose().conj_transpose(), m);
    }

    #[test]
    fn product_and_trace() {
        let a = RMatrix::from_i64(2, 2, &[0, -1, 1, 0]);
        let sq = &a * &a;
        assert_eq!(sq, RMatrix::scalar(2, qi(-1)));
        assert_eq!(sq.trace(), qi(-2));
        assert_eq!(sq.as_scalar_multiple(0.0), Some(qi(-1)));
        assert!(a.as_scalar_multiple(0.0).is_none());
    }

    #[test]
    fn shape_errors_are_reported() {
        let a = RMatrix::zeros(2, 3);
        assert!(a.matmul(&a).is_err());
        assert!(RMatrix::from_vec(2, 2, vec![qi(1)]).is_err());
    }

    #[test]
    fn blocks_assemble_in_order() {
        let one = RMatrix::identity(1);
        let two = RMatrix::scalar(1, qi(2));
        let m = RMatrix::from_blocks(&[vec![&one, &two], vec![&two, &one]]);
        assert_eq!(m, RMatrix::from_i64(2, 2, &[1, 2, 2, 1]));
        let d = RMatrix::block_diag(&[&one, &two]);
        assert_eq!(d, RMatrix::from_i64(2, 2, &[1, 0, 0, 2]));
    }
}
