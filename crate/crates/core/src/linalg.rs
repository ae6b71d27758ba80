//! Small dense complex linear algebra.
//!
//! Matrices here are at most a few hundred rows (M x M covariances and N x N
//! coefficient blocks), so a row-major `Vec` with straightforward loops is
//! enough and keeps the crate free of BLAS.

use std::ops::{Index, IndexMut};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{czero, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![czero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, T::one())
    }

    pub fn scaled_identity(n: usize, s: T) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(s, T::zero());
        }
        m
    }

    pub fn from_diag(d: &[Complex<T>]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn from_real_diag(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = Complex::new(*v, T::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Build from row-major data.
    pub fn from_rows(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape {
                what: "matrix data",
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Build a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<Complex<T>>]) -> Self {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        Self::from_fn(rows, cols, |r, c| columns[c][r])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[Complex<T>] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [Complex<T>] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn set_column(&mut self, c: usize, v: &[Complex<T>]) {
        for (r, z) in v.iter().enumerate() {
            self[(r, c)] = *z;
        }
    }

    pub fn diag(&self) -> Vec<Complex<T>> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> Complex<T> {
        self.diag().into_iter().fold(czero(), |a, b| a + b)
    }

    /// Real part of the trace, the natural scalar for Hermitian matrices.
    pub fn trace_re(&self) -> T {
        self.trace().re
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&mut self, s: Complex<T>) {
        for z in &mut self.data {
            *z = *z * s;
        }
    }

    pub fn scale_re(&mut self, s: T) {
        for z in &mut self.data {
            *z = z.scale(s);
        }
    }

    pub fn add_assign(&mut self, rhs: &Self) {
        debug_assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a = *a + b;
        }
    }

    pub fn sub_assign(&mut self, rhs: &Self) {
        debug_assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a = *a - b;
        }
    }

    pub fn add_diag_re(&mut self, d: &[T]) {
        for (i, v) in d.iter().enumerate() {
            self[(i, i)].re = self[(i, i)].re + *v;
        }
    }

    /// `self * rhs`.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul inner dimension");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            let orow = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let brow = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o = *o + a * b;
                }
            }
        }
        out
    }

    /// `self^H * rhs` without forming the adjoint.
    pub fn adjoint_matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.rows, rhs.rows, "adjoint_matmul inner dimension");
        let mut out = Self::zeros(self.cols, rhs.cols);
        for k in 0..self.rows {
            let arow = self.row(k);
            let brow = rhs.row(k);
            for (r, a) in arow.iter().enumerate() {
                let a = a.conj();
                let orow = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o = *o + a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(self.cols, v.len(), "matvec dimension");
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(czero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// Replace with `(A + A^H) / 2`.
    pub fn hermitianize(&mut self) {
        assert!(self.is_square());
        let half = T::lit(0.5);
        for r in 0..self.rows {
            let d = self[(r, r)];
            self[(r, r)] = Complex::new(d.re, T::zero());
            for c in r + 1..self.cols {
                let v = (self[(r, c)] + self[(c, r)].conj()).scale(half);
                self[(r, c)] = v;
                self[(c, r)] = v.conj();
            }
        }
    }

    pub fn frobenius_sq(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Sum of squared magnitudes off the main diagonal.
    pub fn off_diagonal_sq(&self) -> T {
        let mut s = T::zero();
        for r in 0..self.rows {
            for c in 0..self.cols {
                if r != c {
                    s = s + self[(r, c)].norm_sqr();
                }
            }
        }
        s
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl<T: Real> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex<T> {
        &self.data[r * self.cols + c]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[r * self.cols + c]
    }
}

/// Lower Cholesky factor `L` with `L L^H = A`. Only the lower triangle of `A`
/// is read.
pub fn cholesky<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>> {
    if !a.is_square() {
        return Err(Error::Shape {
            what: "cholesky input columns",
            expected: a.rows(),
            got: a.cols(),
        });
    }
    let n = a.rows();
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d = d - l[(j, k)].norm_sqr();
        }
        if !(d > T::zero()) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite {
                pivot: j,
                value: d.to_f64_lossy(),
                dim: n,
            });
        }
        let djj = d.sqrt();
        l[(j, j)] = Complex::new(djj, T::zero());
        let inv = T::one() / djj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            let (li, lj) = (i * n, j * n);
            for k in 0..j {
                s = s - l.data[li + k] * l.data[lj + k].conj();
            }
            l[(i, j)] = s.scale(inv);
        }
    }
    Ok(l)
}

/// Solve `L X = B` in place for lower-triangular `L`.
pub fn solve_lower_in_place<T: Real>(l: &CMatrix<T>, b: &mut CMatrix<T>) {
    let n = l.rows();
    let m = b.cols();
    for i in 0..n {
        for k in 0..i {
            let lik = l[(i, k)];
            if lik.re == T::zero() && lik.im == T::zero() {
                continue;
            }
            let (head, tail) = b.data.split_at_mut(i * m);
            let src = &head[k * m..(k + 1) * m];
            for (t, s) in tail[..m].iter_mut().zip(src) {
                *t = *t - lik * s;
            }
        }
        let inv = Complex::new(T::one(), T::zero()) / l[(i, i)];
        for t in b.row_mut(i) {
            *t = *t * inv;
        }
    }
}

/// Solve `L^H X = B` in place for lower-triangular `L`.
pub fn solve_lower_adjoint_in_place<T: Real>(l: &CMatrix<T>, b: &mut CMatrix<T>) {
    let n = l.rows();
    let m = b.cols();
    for i in (0..n).rev() {
        for k in i + 1..n {
            let lki = l[(k, i)].conj();
            if lki.re == T::zero() && lki.im == T::zero() {
                continue;
            }
            let (head, tail) = b.data.split_at_mut(k * m);
            let dst = &mut head[i * m..(i + 1) * m];
            for (t, s) in dst.iter_mut().zip(&tail[..m]) {
                *t = *t - lki * s;
            }
        }
        let inv = Complex::new(T::one(), T::zero()) / l[(i, i)].conj();
        for t in b.row_mut(i) {
            *t = *t * inv;
        }
    }
}

/// Solve `A X = B` given the Cholesky factor of `A`.
pub fn cholesky_solve<T: Real>(l: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    let mut x = b.clone();
    solve_lower_in_place(l, &mut x);
    solve_lower_adjoint_in_place(l, &mut x);
    x
}

/// Inverse of a lower-triangular matrix.
pub fn invert_lower<T: Real>(l: &CMatrix<T>) -> CMatrix<T> {
    let mut x = CMatrix::identity(l.rows());
    solve_lower_in_place(l, &mut x);
    x
}

/// Solve `A X = B` for a general square `A` by LU with partial pivoting.
pub fn solve<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<CMatrix<T>> {
    let n = a.rows();
    if !a.is_square() || b.rows() != n {
        return Err(Error::Shape {
            what: "linear system rows",
            expected: n,
            got: b.rows(),
        });
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    let m = x.cols();
    let scale = a.frobenius_sq().sqrt();
    for col in 0..n {
        let (piv, pmag) = (col..n)
            .map(|r| (r, lu[(r, col)].norm()))
            .fold((col, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(pmag > scale * T::epsilon()) {
            return Err(Error::Estimation(format!(
                "singular system at column {col} of {n}"
            )));
        }
        if piv != col {
            for c in 0..n {
                lu.data.swap(col * n + c, piv * n + c);
            }
            for c in 0..m {
                x.data.swap(col * m + c, piv * m + c);
            }
        }
        let inv = Complex::new(T::one(), T::zero()) / lu[(col, col)];
        for r in col + 1..n {
            let f = lu[(r, col)] * inv;
            if f.re == T::zero() && f.im == T::zero() {
                continue;
            }
            for c in col..n {
                let v = lu[(col, c)];
                lu[(r, c)] = lu[(r, c)] - f * v;
            }
            for c in 0..m {
                let v = x[(col, c)];
                x[(r, c)] = x[(r, c)] - f * v;
            }
        }
    }
    for r in (0..n).rev() {
        for c in 0..m {
            let mut s = x[(r, c)];
            for k in r + 1..n {
                s = s - lu[(r, k)] * x[(k, c)];
            }
            x[(r, c)] = s / lu[(r, r)];
        }
    }
    Ok(x)
}

/// Hermitian positive-definite factorization with a Tikhonov fallback.
///
/// Returns the factor and whether the fallback was needed.
pub fn cholesky_regularized<T: Real>(a: &CMatrix<T>) -> Result<(CMatrix<T>, bool)> {
    match cholesky(a) {
        Ok(l) => Ok((l, false)),
        Err(first) => {
            let n = a.rows().max(1);
            let mut eps = T::lit(1e-10) * a.trace_re().abs() / T::from_usize(n).unwrap();
            if !(eps > T::zero()) {
                eps = T::min_positive_value().sqrt();
            }
            let mut reg = a.clone();
            for _ in 0..8 {
                reg.add_diag_re(&vec![eps; a.rows()]);
                if let Ok(l) = cholesky(&reg) {
                    return Ok((l, true));
                }
                eps = eps * T::lit(100.0);
            }
            Err(first)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    fn m(rows: usize, cols: usize, v: &[(f64, f64)]) -> CMatrix<f64> {
        CMatrix::from_rows(rows, cols, v.iter().map(|&(a, b)| cplx(a, b)).collect()).unwrap()
    }

    #[test]
    fn cholesky_of_known_matrix() {
        // [[4, 2i], [-2i, 5]] = L L^H with L = [[2, 0], [-i, 2]]
        let a = m(2, 2, &[(4., 0.), (0., 2.), (0., -2.), (5., 0.)]);
        let l = cholesky(&a).unwrap();
        let want = m(2, 2, &[(2., 0.), (0., 0.), (0., -1.), (2., 0.)]);
        assert!(l.max_abs_diff(&want) < 1e-14);
        let back = l.matmul(&l.adjoint());
        assert!(back.max_abs_diff(&a) < 1e-14);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = m(2, 2, &[(1., 0.), (2., 0.), (2., 0.), (1., 0.)]);
        assert!(matches!(
            cholesky(&a),
            Err(Error::NotPositiveDefinite { pivot: 1, .. })
        ));
    }

    #[test]
    fn triangular_solves_round_trip() {
        let a = m(
            3,
            3,
            &[(6., 0.), (1., 1.), (0., 2.), (1., -1.), (5., 0.), (1., 0.), (0., -2.), (1., 0.), (7., 0.)],
        );
        let l = cholesky(&a).unwrap();
        let b = m(3, 2, &[(1., 0.), (0., 1.), (2., 1.), (-1., 0.), (0., 0.), (3., -2.)]);
        let x = cholesky_solve(&l, &b);
        assert!(a.matmul(&x).max_abs_diff(&b) < 1e-12);
        let linv = invert_lower(&l);
        assert!(linv.matmul(&l).max_abs_diff(&CMatrix::identity(3)) < 1e-12);
    }

    #[test]
    fn general_solve_with_pivoting() {
        let a = m(2, 2, &[(0., 0.), (1., 0.), (2., 1.), (3., 0.)]);
        let b = m(2, 1, &[(1., 0.), (4., 0.)]);
        let x = solve(&a, &b).unwrap();
        assert!(a.matmul(&x).max_abs_diff(&b) < 1e-14);
        let singular = m(2, 2, &[(1., 0.), (2., 0.), (2., 0.), (4., 0.)]);
        assert!(solve(&singular, &b).is_err());
    }

    #[test]
    fn regularized_factor_flags_fallback() {
        let a = m(2, 2, &[(1., 0.), (1., 0.), (1., 0.), (1., 0.)]);
        let (l, fell_back) = cholesky_regularized(&a).unwrap();
        assert!(fell_back);
        assert!(l.is_finite());
    }

    #[test]
    fn adjoint_matmul_matches_explicit() {
        let a = m(3, 2, &[(1., 2.), (0., 1.), (3., 0.), (1., 1.), (0., -1.), (2., 2.)]);
        let b = m(3, 1, &[(1., 0.), (2., -1.), (0., 3.)]);
        assert!(a.adjoint_matmul(&b).max_abs_diff(&a.adjoint().matmul(&b)) < 1e-14);
    }
}
