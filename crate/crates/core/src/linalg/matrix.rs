use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    /// Builds a matrix from row-major entries; all entries must be finite.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimension(format!("{rows}x{cols} matrix")));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidMatrix(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite entry".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_raw(rows, cols, vec![Complex::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::from_raw(rows, cols, data)
    }

    pub fn diagonal(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex::new(v, T::zero());
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, got: rhs.rows });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                let rrow = rhs.row(k);
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(rrow) {
                    *o = *o + a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self · x`.
    pub fn mul_vec(&self, x: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, got: x.len() });
        }
        Ok(self.mul_vec_unchecked(x))
    }

    #[inline]
    pub(crate) fn mul_vec_unchecked(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(Complex::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// `self† · x`.
    pub(crate) fn adjoint_mul_vec_unchecked(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut out = vec![Complex::zero(); self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o = *o + a.conj() * xi;
            }
        }
        out
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_raw(self.rows, self.cols, self.data.iter().map(|z| z * s).collect())
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a + b)
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                got: rhs.rows * rhs.cols,
            });
        }
        let data = self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self::from_raw(self.rows, self.cols, data))
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// Entrywise max of `|self - rhs|`; `+inf` on shape mismatch.
    pub fn max_abs_diff(&self, rhs: &Self) -> T {
        match self.sub(rhs) {
            Ok(d) => d.max_abs(),
            Err(_) => T::infinity(),
        }
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).fold(Complex::zero(), |acc, i| acc + self[(i, i)])
    }

    /// `‖M†M - I‖max`.
    pub fn unitarity_defect(&self) -> T {
        if !self.is_square() {
            return T::infinity();
        }
        let n = self.rows;
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                let mut s = Complex::zero();
                for k in 0..n {
                    s = s + self[(k, i)].conj() * self[(k, j)];
                }
                if i == j {
                    s = s - Complex::one();
                }
                worst = worst.max(s.norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self, tol: T) -> bool {
        self.unitarity_defect() <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Converts the scalar type entrywise.
    pub fn cast<U: Real>(&self) -> ComplexMatrix<U> {
        ComplexMatrix::from_raw(
            self.rows,
            self.cols,
            self.data
                .iter()
                .map(|z| Complex::new(U::lit(z.re.to_f64_lossy()), U::lit(z.im.to_f64_lossy())))
                .collect(),
        )
    }
}

impl<T> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// Square Hermitian matrix, stored exactly symmetrized.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix<T> {
    inner: ComplexMatrix<T>,
}

impl<T: Real> HermitianMatrix<T> {
    /// Validates squareness, finiteness and `‖M - M†‖max ≤ tol·max(1, max|M|)`, then symmetrizes.
    pub fn new(m: ComplexMatrix<T>) -> Result<Self> {
        Self::with_tolerance(m, T::tolerances().hermitian)
    }

    pub fn with_tolerance(m: ComplexMatrix<T>, tol: T) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidMatrix(format!("{}x{} is not square", m.rows, m.cols)));
        }
        if !m.is_finite() {
            return Err(Error::InvalidMatrix("non-finite entry".into()));
        }
        let scale = T::one().max(m.max_abs());
        let n = m.rows;
        for i in 0..n {
            for j in i..n {
                if (m[(i, j)] - m[(j, i)].conj()).norm() > tol * scale {
                    return Err(Error::InvalidMatrix(format!(
                        "not Hermitian at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self::symmetrize(m))
    }

    /// `(M + M†) / 2` without any check. `m` must be square.
    pub fn symmetrize(mut m: ComplexMatrix<T>) -> Self {
        let n = m.rows;
        let half = T::lit(0.5);
        for i in 0..n {
            let d = m[(i, i)].re;
            m[(i, i)] = Complex::new(d, T::zero());
            for j in i + 1..n {
                let v = (m[(i, j)] + m[(j, i)].conj()) * half;
                m[(i, j)] = v;
                m[(j, i)] = v.conj();
            }
        }
        Self { inner: m }
    }

    pub fn zeros(n: usize) -> Self {
        Self { inner: ComplexMatrix::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        Self { inner: ComplexMatrix::identity(n) }
    }

    pub fn diagonal(values: &[T]) -> Self {
        Self { inner: ComplexMatrix::diagonal(values) }
    }

    /// Rank-one `x x†`.
    pub fn projector(x: &[Complex<T>]) -> Self {
        let n = x.len();
        Self::symmetrize(ComplexMatrix::from_fn(n, n, |i, j| x[i] * x[j].conj()))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.inner.rows
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.inner
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.inner
    }

    pub fn trace(&self) -> T {
        self.inner.trace().re
    }

    /// `Re x† H x`.
    pub fn expectation(&self, x: &[Complex<T>]) -> T {
        let n = self.dim();
        let mut acc = T::zero();
        for i in 0..n {
            let mut row = Complex::zero();
            for (j, &xj) in x.iter().enumerate() {
                row = row + self.inner[(i, j)] * xj;
            }
            acc = acc + (x[i].conj() * row).re;
        }
        acc
    }

    /// `H - s·I`.
    pub fn shift(&self, s: T) -> Self {
        let mut m = self.inner.clone();
        for i in 0..self.dim() {
            m[(i, i)] = m[(i, i)] - Complex::new(s, T::zero());
        }
        Self { inner: m }
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        Ok(Self { inner: self.inner.sub(&rhs.inner)? })
    }

    pub fn scale(&self, s: T) -> Self {
        Self { inner: self.inner.scale(s) }
    }

    /// `W H W†`.
    pub fn conjugate_by(&self, w: &ComplexMatrix<T>) -> Result<Self> {
        let m = w.matmul(&self.inner)?.matmul(&w.adjoint())?;
        Ok(Self::symmetrize(m))
    }

    /// `Re tr(self · rhs)`.
    pub fn trace_product(&self, rhs: &Self) -> T {
        let n = self.dim();
        let mut acc = T::zero();
        for i in 0..n {
            for j in 0..n {
                acc = acc + (self.inner[(i, j)] * rhs.inner[(j, i)]).re;
            }
        }
        acc
    }
}

/// `⟨x|y⟩ = Σ conj(x_i) y_i`.
#[inline]
pub fn inner<T: Real>(x: &[Complex<T>], y: &[Complex<T>]) -> Complex<T> {
    x.iter().zip(y).fold(Complex::zero(), |acc, (&a, &b)| acc + a.conj() * b)
}

#[inline]
pub fn norm2<T: Real>(x: &[Complex<T>]) -> T {
    x.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}
