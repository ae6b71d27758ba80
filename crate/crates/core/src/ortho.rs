//! Input orthogonalization of the nonlinear basis by inverse-Cholesky whitening.

use num_complex::Complex;

use crate::basis::BasisFrame;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::scalar::{czero, Real};

/// Sample average of `Phi^T conj(Phi)` over frames, each an `M x N` matrix
/// whose columns are basis spectra (or time signals).
pub fn estimate_basis_autocorr<T: Real>(frames: &[CMatrix<T>]) -> Result<CMatrix<T>> {
    let first = frames
        .first()
        .ok_or_else(|| Error::Estimation("no frames to estimate basis autocorrelation".into()))?;
    let (m, n) = (first.rows(), first.cols());
    let mut acc = CMatrix::zeros(n, n);
    for f in frames {
        if f.rows() != m || f.cols() != n {
            return Err(Error::Shape {
                what: "basis frame columns",
                expected: n,
                got: f.cols(),
            });
        }
        for r in 0..m {
            let row = f.row(r);
            for i in 0..n {
                for j in 0..n {
                    acc[(i, j)] = acc[(i, j)] + row[i] * row[j].conj();
                }
            }
        }
    }
    acc.scale_re(T::one() / T::from_usize(frames.len()).unwrap());
    acc.hermitianize();
    Ok(acc)
}

/// Frozen whitening transform `G` with `G R G^H = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoTransform<T: Real> {
    g: CMatrix<T>,
    /// Diagonal of `G R G^H` on the autocorrelation it was built from.
    pub scaling: Vec<T>,
}

impl<T: Real> OrthoTransform<T> {
    pub fn identity(n: usize) -> Self {
        Self {
            g: CMatrix::identity(n),
            scaling: vec![T::one(); n],
        }
    }

    /// Wrap an arbitrary full-rank matrix.
    pub fn from_matrix(g: CMatrix<T>) -> Result<Self> {
        if !g.is_square() {
            return Err(Error::Shape {
                what: "transform columns",
                expected: g.rows(),
                got: g.cols(),
            });
        }
        linalg::solve(&g, &CMatrix::identity(g.rows()))
            .map_err(|_| Error::DegenerateTransform("transform matrix is singular".into()))?;
        let n = g.rows();
        Ok(Self {
            g,
            scaling: vec![T::one(); n],
        })
    }

    pub fn n(&self) -> usize {
        self.g.rows()
    }

    pub fn g(&self) -> &CMatrix<T> {
        &self.g
    }

    /// `Phi G^T`: column `j` becomes `sum_i G[j][i] phi_i`.
    pub fn apply(&self, basis: &BasisFrame<T>) -> Result<BasisFrame<T>> {
        if basis.n() != self.n() {
            return Err(Error::Shape {
                what: "basis functions",
                expected: self.n(),
                got: basis.n(),
            });
        }
        let len = basis.len();
        let columns = (0..self.n())
            .map(|j| {
                let mut out = vec![czero(); len];
                for (i, col) in basis.columns.iter().enumerate() {
                    let g = self.g[(j, i)];
                    if g == czero() {
                        continue;
                    }
                    for (o, v) in out.iter_mut().zip(col) {
                        *o = *o + g * v;
                    }
                }
                out
            })
            .collect();
        Ok(BasisFrame { columns })
    }

    /// Same as [`apply`](Self::apply) on an `M x N` matrix.
    pub fn apply_matrix(&self, phi: &CMatrix<T>) -> CMatrix<T> {
        phi.matmul(&self.g.transpose())
    }

    /// Coefficients in the transformed basis: `(G^T)^-1 a`.
    pub fn map_coefficients(&self, a: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        let rhs = CMatrix::from_columns(&[a.to_vec()]);
        Ok(linalg::solve(&self.g.transpose(), &rhs)?.column(0))
    }

    /// Ground truth as seen by a canceller working in the transformed basis:
    /// `w~ = a~_0 w` and `a^ = a~ / a~_0`.
    pub fn map_true_parameters(
        &self,
        w: &[Complex<T>],
        a: &[Complex<T>],
    ) -> Result<(Vec<Complex<T>>, Vec<Complex<T>>)> {
        let at = self.map_coefficients(a)?;
        let a0 = at[0];
        if a0.norm() <= T::min_positive_value() {
            return Err(Error::DegenerateTransform(
                "transformed linear coefficient vanishes".into(),
            ));
        }
        let w_t = w.iter().map(|v| v * a0).collect();
        let a_c = at.iter().map(|v| v / a0).collect();
        Ok((w_t, a_c))
    }

    /// `(G^T)^-1` row `j` squared magnitudes: maps coefficient second moments
    /// of independent coefficients into the transformed basis.
    pub fn map_second_moments(&self, moments: &[f64]) -> Result<Vec<f64>> {
        let inv = linalg::solve(&self.g.transpose(), &CMatrix::identity(self.n()))?;
        Ok((0..self.n())
            .map(|j| {
                (0..self.n())
                    .map(|i| inv[(j, i)].norm_sqr().to_f64_lossy() * moments[i])
                    .sum()
            })
            .collect())
    }
}

/// `G = L^-1` for the lower Cholesky factor `L` of the (lightly regularized)
/// autocorrelation.
pub fn compute_transform<T: Real>(r_phi: &CMatrix<T>) -> Result<OrthoTransform<T>> {
    let n = r_phi.rows();
    let mut reg = r_phi.clone();
    let eps = T::lit(1e-12) * r_phi.trace_re() / T::from_usize(n.max(1)).unwrap();
    reg.add_diag_re(&vec![eps; n]);
    let l = linalg::cholesky(&reg)?;
    let g = linalg::invert_lower(&l);
    let white = g.matmul(r_phi).matmul(&g.adjoint());
    Ok(OrthoTransform {
        g,
        scaling: white.diag().iter().map(|z| z.re).collect(),
    })
}

/// Off-diagonal to diagonal mass ratio of `G R G^H`.
pub fn whiteness_error<T: Real>(t: &OrthoTransform<T>, r_phi: &CMatrix<T>) -> T {
    let white = t.g.matmul(r_phi).matmul(&t.g.adjoint());
    let diag: T = white.diag().iter().map(|z| z.norm_sqr()).sum();
    white.off_diagonal_sq().sqrt() / diag.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn identity_autocorr_gives_identity() {
        let t = compute_transform(&CMatrix::<f64>::identity(3)).unwrap();
        assert!(t.g().max_abs_diff(&CMatrix::identity(3)) < 1e-11);
    }

    #[test]
    fn diagonal_scaling() {
        let r = CMatrix::<f64>::from_real_diag(&[4.0, 1.0]);
        let t = compute_transform(&r).unwrap();
        assert!((t.g()[(0, 0)].re - 0.5).abs() < 1e-11);
        assert!((t.g()[(1, 1)].re - 1.0).abs() < 1e-11);
        assert!(t.g()[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn rejects_indefinite() {
        let r = CMatrix::<f64>::from_real_diag(&[1.0, -1.0]);
        assert!(compute_transform(&r).is_err());
    }

    #[test]
    fn empty_autocorr_input() {
        assert!(estimate_basis_autocorr::<f64>(&[]).is_err());
    }

    #[test]
    fn orthogonal_columns_give_diagonal_autocorr() {
        let f = CMatrix::from_rows(
            2,
            2,
            vec![cplx(1.0, 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0), cplx(2.0, 0.0)],
        )
        .unwrap();
        let r = estimate_basis_autocorr(&[f]).unwrap();
        assert_eq!(r.off_diagonal_sq(), 0.0);
        assert_eq!(r[(1, 1)].re, 4.0);
    }

    #[test]
    fn identity_mapping_keeps_truth() {
        let t = OrthoTransform::<f64>::identity(2);
        let w = vec![cplx(1.0, 1.0)];
        let a = vec![cplx(1.0, 0.0), cplx(0.3, -0.1)];
        let (wt, at) = t.map_true_parameters(&w, &a).unwrap();
        assert_eq!(wt, w);
        assert_eq!(at, a);
    }

    #[test]
    fn diagonal_mapping_rescales_linear_path() {
        let g = CMatrix::from_real_diag(&[2.0, 4.0]);
        let t = OrthoTransform::<f64>::from_matrix(g).unwrap();
        let w = vec![cplx(1.0, -1.0), cplx(0.5, 0.0)];
        let a = vec![cplx(1.0, 0.0), cplx(0.2, 0.4)];
        let (wt, at) = t.map_true_parameters(&w, &a).unwrap();
        for (x, y) in wt.iter().zip(&w) {
            assert!((x - y * 0.5).norm() < 1e-15);
        }
        assert!((at[0] - cplx(1.0, 0.0)).norm() < 1e-15);
        // a~ = (a0 / 2, a1 / 4), a^_1 = a~_1 / a~_0 = a1 / 2
        assert!((at[1] - a[1] * 0.5).norm() < 1e-15);
    }

    #[test]
    fn singular_transform_rejected() {
        let g = CMatrix::<f64>::from_real_diag(&[1.0, 0.0]);
        assert!(matches!(
            OrthoTransform::from_matrix(g),
            Err(Error::DegenerateTransform(_))
        ));
    }
}
