//! Dense complex linear algebra: products, Hermitian transpose, Householder QR
//! and QR-based inversion.
//!
//! Storage is row-major with explicit dimensions. Nothing here broadcasts, and
//! every binary operation checks shapes up front.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense complex matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Complex<T>,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex::new(d, T::zero());
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

    /// Conjugate transpose.
    pub fn hermitian(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o = *o + a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch(format!(
                "cannot subtract {}x{} from {}x{}",
                rhs.rows, rhs.cols, self.rows, self.cols
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(&a, &b)| a - b)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// Largest entry-wise modulus.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// Copies the block `[r0, r1) x [c0, c1)`.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        assert!(r0 <= r1 && r1 <= self.rows && c0 <= c1 && c1 <= self.cols);
        Self::from_fn(r1 - r0, c1 - c0, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn diagonal(&self) -> Vec<Complex<T>> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }

    /// Frobenius norm of `self - self^H`, zero for exactly Hermitian input.
    pub fn hermitian_deviation(&self) -> T {
        if !self.is_square() {
            return T::infinity();
        }
        let mut acc = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc = acc + (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl<T> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for ComplexMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = &self.data[i * self.cols + j];
                write!(f, "({:?}, {:?})  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Full QR factorization `a = q * r` with a square unitary `q`.
#[derive(Debug, Clone)]
pub struct QrFactors<T> {
    pub q: ComplexMatrix<T>,
    pub r: ComplexMatrix<T>,
}

/// Householder QR of a matrix with `rows >= cols`.
///
/// The diagonal of `r` is real and non-negative: each reflector's phase is
/// pushed into the matching column of `q`. Rank deficiency is not an error;
/// it shows up as (near-)zero diagonal entries in `r`.
pub fn qr_decompose<T: Real>(a: &ComplexMatrix<T>) -> Result<QrFactors<T>> {
    let (m, n) = (a.rows, a.cols);
    if m < n {
        return Err(Error::DimensionMismatch(format!(
            "QR requires rows >= cols, got {m}x{n}"
        )));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }

    let mut r = a.clone();
    let mut q = ComplexMatrix::identity(m);
    let mut v: Vec<Complex<T>> = Vec::with_capacity(m);
    let two = T::lit(2.0);

    for k in 0..n {
        let tail_sq: T = (k + 1..m).map(|i| r[(i, k)].norm_sqr()).sum();
        if tail_sq == T::zero() {
            continue;
        }
        let x0 = r[(k, k)];
        let norm_x = (x0.norm_sqr() + tail_sq).sqrt();
        let phase = if x0.norm() > T::zero() {
            x0 / x0.norm()
        } else {
            Complex::one()
        };
        // reflect x onto -phase * |x| e1 so the leading entry never cancels
        let alpha = -phase * norm_x;

        v.clear();
        v.push(x0 - alpha);
        v.extend((k + 1..m).map(|i| r[(i, k)]));
        let vv: T = v.iter().map(|z| z.norm_sqr()).sum();
        let tau = two / vv;

        // r <- (I - tau v v^H) r on rows k.., cols k..
        for j in k..n {
            let w = v.iter().enumerate().fold(Complex::zero(), |acc, (t, vt)| {
                acc + vt.conj() * r[(k + t, j)]
            });
            let w = w * tau;
            for (t, vt) in v.iter().enumerate() {
                r[(k + t, j)] = r[(k + t, j)] - *vt * w;
            }
        }
        for i in k + 1..m {
            r[(i, k)] = Complex::zero();
        }

        // q <- q (I - tau v v^H) on cols k..
        for i in 0..m {
            let w = v
                .iter()
                .enumerate()
                .fold(Complex::zero(), |acc, (t, vt)| acc + q[(i, k + t)] * *vt);
            let w = w * tau;
            for (t, vt) in v.iter().enumerate() {
                q[(i, k + t)] = q[(i, k + t)] - w * vt.conj();
            }
        }
    }

    // phase-normalize the diagonal of r
    for k in 0..n {
        let d = r[(k, k)];
        let mag = d.norm();
        if mag == T::zero() {
            r[(k, k)] = Complex::zero();
            continue;
        }
        let phase = d / mag;
        let phase_conj = phase.conj();
        for j in k..n {
            r[(k, j)] = phase_conj * r[(k, j)];
        }
        r[(k, k)] = Complex::new(mag, T::zero());
        for i in 0..m {
            q[(i, k)] = q[(i, k)] * phase;
        }
    }

    Ok(QrFactors { q, r })
}

/// Solves `a x = b` for square `a` through its QR factors.
///
/// Fails with [`Error::Singular`] when the smallest diagonal entry of `r` is
/// below the singularity threshold relative to the largest.
pub fn solve<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "solve requires a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    if b.rows != a.rows {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has {} rows, expected {}",
            b.rows, a.rows
        )));
    }
    let n = a.rows;
    let QrFactors { q, r } = qr_decompose(a)?;

    let diag_abs: Vec<T> = (0..n).map(|i| r[(i, i)].re.abs()).collect();
    let largest = diag_abs.iter().fold(T::zero(), |m, &d| m.max(d));
    let smallest = diag_abs.iter().fold(T::infinity(), |m, &d| m.min(d));
    if largest == T::zero() || smallest < T::singular_threshold() * largest {
        let ratio = if largest > T::zero() {
            (smallest / largest).to_f64_lossy()
        } else {
            0.0
        };
        return Err(Error::Singular { ratio });
    }

    // x = r^{-1} q^H b by back substitution, column by column
    let qhb = q.hermitian().matmul(b)?;
    let mut x = ComplexMatrix::zeros(n, b.cols);
    for c in 0..b.cols {
        for i in (0..n).rev() {
            let mut acc = qhb[(i, c)];
            for j in i + 1..n {
                acc = acc - r[(i, j)] * x[(j, c)];
            }
            x[(i, c)] = acc / r[(i, i)].re;
        }
    }
    Ok(x)
}

/// General square inverse via QR.
pub fn inverse<T: Real>(a: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    solve(a, &ComplexMatrix::identity(a.rows))
}

/// Inverse of a Hermitian positive-definite matrix.
///
/// The Hermitian check is relative to the matrix scale (tolerance `1e-10`).
pub fn invert_hermitian_positive<T: Real>(a: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    let scale = a.max_abs().max(T::min_positive_value());
    let tol = T::lit(1e-10).max(T::epsilon() * T::lit(64.0));
    let deviation = a.hermitian_deviation();
    if deviation > tol * scale {
        return Err(Error::NotHermitian {
            deviation: deviation.to_f64_lossy(),
        });
    }
    inverse(a)
}
