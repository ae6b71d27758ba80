use num_complex::Complex;

use super::{basis_spectra, combine_spectra, expect_phase, residuals, spectrum_to_taps, Phase};
use crate::canceller::{AlgorithmId, Canceller, CancellerSetup, Estimates, FrameInput, FrameOutput};
use crate::channel::MarkovParams;
use crate::decoder::DecodeMode;
use crate::dft::Dft;
use crate::error::{check_len, Result};
use crate::linalg::{self, CMatrix};
use crate::ops::OpCounter;
use crate::scalar::{cone, czero, Real};

/// Cascade-structure Kalman canceller with full `M x M` channel covariance.
///
/// The overlap-save constraint is applied through transforms; the only dense
/// `O(M^3)` work is the innovation factorization and covariance update.
#[derive(Debug, Clone)]
pub struct ExactCascadeKalman<T: Real> {
    dft: Dft<T>,
    params: MarkovParams,
    psi_s: T,
    w: Vec<Complex<T>>,
    pw: CMatrix<T>,
    a: Vec<Complex<T>>,
    pa: CMatrix<T>,
    phase: Phase,
    ops: OpCounter,
}

impl<T: Real> ExactCascadeKalman<T> {
    pub fn new(setup: &CancellerSetup) -> Result<Self> {
        let m = setup.cfg.m();
        let n = setup.n();
        check_len("Markov model bins", m, setup.params.m)?;
        let mut a = vec![czero(); n];
        a[0] = cone();
        let mut pa_diag: Vec<T> = setup.params.ra.iter().map(|&r| T::lit(r)).collect();
        pa_diag[0] = T::zero();
        Ok(Self {
            dft: Dft::new(setup.cfg),
            params: setup.params.clone(),
            psi_s: T::lit(setup.noise.per_bin),
            w: vec![czero(); m],
            pw: CMatrix::scaled_identity(m, T::lit(setup.params.bin_power())),
            a,
            pa: CMatrix::from_real_diag(&pa_diag),
            phase: Phase::Updated,
            ops: OpCounter::default(),
        })
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn w(&self) -> &[Complex<T>] {
        &self.w
    }

    pub fn pw(&self) -> &CMatrix<T> {
        &self.pw
    }

    pub fn a(&self) -> &[Complex<T>] {
        &self.a
    }

    pub fn pa(&self) -> &CMatrix<T> {
        &self.pa
    }

    pub fn dft(&self) -> &Dft<T> {
        &self.dft
    }

    /// Overwrite the state, e.g. to start from a known estimate.
    pub fn set_state(&mut self, w: Vec<Complex<T>>, pw: CMatrix<T>, a: Vec<Complex<T>>, pa: CMatrix<T>) {
        self.w = w;
        self.pw = pw;
        self.a = a;
        self.pa = pa;
        self.freeze_linear_coefficient();
        self.phase = Phase::Updated;
    }

    fn freeze_linear_coefficient(&mut self) {
        self.a[0] = cone();
        for i in 0..self.pa.rows() {
            self.pa[(0, i)] = czero();
            self.pa[(i, 0)] = czero();
        }
    }

    pub fn predict(&mut self) -> Result<()> {
        expect_phase(self.phase, Phase::Updated)?;
        let m = self.w.len();
        let n = self.a.len();
        let aw = T::lit(self.params.a_w);
        for w in &mut self.w {
            *w = w.scale(aw);
        }
        self.pw.scale_re(aw * aw);
        self.pw.add_diag_re(&vec![T::lit(self.params.psi_w()); m]);
        let aa: Vec<T> = self.params.a_a.iter().map(|&v| T::lit(v)).collect();
        for i in 1..n {
            self.a[i] = self.a[i].scale(aa[i]);
        }
        for i in 0..n {
            for j in 0..n {
                self.pa[(i, j)] = self.pa[(i, j)].scale(aa[i] * aa[j]);
            }
        }
        let psi_a: Vec<T> = self.params.psi_a().iter().map(|&v| T::lit(v)).collect();
        self.pa.add_diag_re(&psi_a);
        self.freeze_linear_coefficient();
        self.ops.mul(m + m * m + n + n * n);
        self.phase = Phase::Predicted;
        Ok(())
    }

    /// Reconstructed SI spectrum `sum_i a_i C_i w` from the predictions.
    pub fn reconstruct(&mut self, phis: &[Vec<Complex<T>>]) -> Result<Vec<Complex<T>>> {
        expect_phase(self.phase, Phase::Predicted)?;
        let d = combine_spectra(phis, &self.a, &mut self.ops);
        let mut x: Vec<_> = d.iter().zip(&self.w).map(|(a, b)| a * b).collect();
        self.ops.mul(x.len());
        self.dft.project_in_place(&mut x, &mut self.ops);
        Ok(x)
    }

    /// Linear update with the a-priori channel second moments.
    pub fn update_linear(&mut self, y_tilde: &[Complex<T>], phis: &[Vec<Complex<T>>]) -> Result<()> {
        let rw = vec![T::lit(self.params.bin_power()); self.w.len()];
        self.update_linear_with_moments(y_tilde, phis, &rw)
    }

    /// Linear update with an explicit diagonal channel second moment `rw`.
    pub fn update_linear_with_moments(
        &mut self,
        y_tilde: &[Complex<T>],
        phis: &[Vec<Complex<T>>],
        rw: &[T],
    ) -> Result<()> {
        expect_phase(self.phase, Phase::Predicted)?;
        let m = self.w.len();
        check_len("observation spectrum", m, y_tilde.len())?;
        check_len("channel moments", m, rw.len())?;
        let d = combine_spectra(phis, &self.a, &mut self.ops);

        // Augmented noise: P (sum_i p^a_i D_i R^w D_i^*) P + Psi, with a
        // diagonal R^w the inner sum is diagonal.
        let mut q = vec![T::zero(); m];
        for (i, phi) in phis.iter().enumerate() {
            let p = self.pa[(i, i)].re;
            if p == T::zero() {
                continue;
            }
            for ((qm, ph), r) in q.iter_mut().zip(phi).zip(rw) {
                *qm = *qm + p * ph.norm_sqr() * *r;
            }
            self.ops.mul(3 * m);
        }

        // B = D P^w D^* + diag(q); S = P B P + Psi.
        let mut s = CMatrix::from_fn(m, m, |r, c| d[r] * self.pw[(r, c)] * d[c].conj());
        self.ops.mul(2 * m * m);
        s.add_diag_re(&q);
        self.dft.project_columns(&mut s, &mut self.ops);
        self.dft.project_rows(&mut s, &mut self.ops);
        s.add_diag_re(&vec![self.psi_s; m]);
        s.hermitianize();

        // G = C P^w = P D P^w.
        let mut g = CMatrix::from_fn(m, m, |r, c| d[r] * self.pw[(r, c)]);
        self.ops.mul(m * m);
        self.dft.project_columns(&mut g, &mut self.ops);

        let mut x = d.iter().zip(&self.w).map(|(a, b)| a * b).collect::<Vec<_>>();
        self.ops.mul(m);
        self.dft.project_in_place(&mut x, &mut self.ops);
        let innov: Vec<_> = y_tilde.iter().zip(&x).map(|(a, b)| a - b).collect();

        let l = self.factor(&s)?;
        // w += G^H S^-1 innov
        let z = linalg::cholesky_solve(&l, &CMatrix::from_columns(&[innov]));
        self.ops.mul(m * m);
        let dw = g.adjoint_matmul(&z);
        self.ops.mul(m * m);
        for (w, v) in self.w.iter_mut().zip(dw.as_slice()) {
            *w = *w + v;
        }
        // P^w -= G^H S^-1 G = Z^H Z with Z = L^-1 G.
        linalg::solve_lower_in_place(&l, &mut g);
        self.ops.mul(m * m * m / 2);
        let zz = g.adjoint_matmul(&g);
        self.ops.mul(m * m * m);
        self.pw.sub_assign(&zz);
        self.pw.hermitianize();
        self.phase = Phase::LinearUpdated;
        Ok(())
    }

    /// Coefficient update with the a-priori coefficient second moments.
    pub fn update_nonlinear(&mut self, y_tilde: &[Complex<T>], phis: &[Vec<Complex<T>>]) -> Result<()> {
        let pa2: Vec<T> = self.params.ra.iter().map(|&r| T::lit(r)).collect();
        self.update_nonlinear_with_moments(y_tilde, phis, &pa2)
    }

    pub fn update_nonlinear_with_moments(
        &mut self,
        y_tilde: &[Complex<T>],
        phis: &[Vec<Complex<T>>],
        pa2: &[T],
    ) -> Result<()> {
        expect_phase(self.phase, Phase::LinearUpdated)?;
        let m = self.w.len();
        let n = self.a.len();
        check_len("observation spectrum", m, y_tilde.len())?;
        check_len("coefficient moments", n, pa2.len())?;
        if self.pa.frobenius_sq() == T::zero() {
            // Nothing uncertain: the gain is zero.
            self.phase = Phase::Updated;
            return Ok(());
        }

        // Columns C_i w.
        let mut cw = CMatrix::zeros(m, n);
        for (i, phi) in phis.iter().enumerate() {
            let mut col: Vec<_> = phi.iter().zip(&self.w).map(|(a, b)| a * b).collect();
            self.dft.project_in_place(&mut col, &mut self.ops);
            cw.set_column(i, &col);
        }
        self.ops.mul(n * m);

        // Augmented noise: P (sum_i p_i D_i P^w D_i^*) P + Psi.
        let mut s = CMatrix::zeros(m, m);
        for (i, phi) in phis.iter().enumerate() {
            if pa2[i] == T::zero() {
                continue;
            }
            for r in 0..m {
                let left = phi[r].scale(pa2[i]);
                for c in 0..m {
                    s[(r, c)] = s[(r, c)] + left * self.pw[(r, c)] * phi[c].conj();
                }
            }
            self.ops.mul(2 * m * m + m);
        }
        self.dft.project_columns(&mut s, &mut self.ops);
        self.dft.project_rows(&mut s, &mut self.ops);
        s.add_diag_re(&vec![self.psi_s; m]);

        // H = C^w P^a; S += H C^w^H.
        let h = cw.matmul(&self.pa);
        self.ops.matmul(m, n, n);
        let hc = h.matmul(&cw.adjoint());
        self.ops.matmul(m, n, m);
        s.add_assign(&hc);
        s.hermitianize();

        let pred = cw.matvec(&self.a);
        self.ops.mul(m * n);
        let innov: Vec<_> = y_tilde.iter().zip(&pred).map(|(a, b)| a - b).collect();

        let l = self.factor(&s)?;
        let z = linalg::cholesky_solve(&l, &CMatrix::from_columns(&[innov]));
        self.ops.mul(m * m);
        let da = h.adjoint_matmul(&z);
        self.ops.mul(m * n);
        for (a, v) in self.a.iter_mut().zip(da.as_slice()) {
            *a = *a + v;
        }
        let mut zh = h;
        linalg::solve_lower_in_place(&l, &mut zh);
        self.ops.mul(m * m * n / 2);
        let zz = zh.adjoint_matmul(&zh);
        self.ops.matmul(n, m, n);
        self.pa.sub_assign(&zz);
        self.pa.hermitianize();
        self.freeze_linear_coefficient();
        self.phase = Phase::Updated;
        Ok(())
    }

    fn factor(&mut self, s: &CMatrix<T>) -> Result<CMatrix<T>> {
        let m = s.rows();
        let (l, fell_back) = linalg::cholesky_regularized(s)?;
        if fell_back {
            self.ops.fallbacks += 1;
        }
        self.ops.mul(m * m * m / 6);
        self.ops.div(m);
        Ok(l)
    }

    /// One full frame: predict, reconstruct, decode, update both stages.
    pub fn step(&mut self, input: &FrameInput<'_, T>, decode: DecodeMode) -> Result<FrameOutput<T>> {
        let cfg = self.dft.cfg();
        check_len("received samples", cfg.r(), input.y.len())?;
        let mut ops = self.ops;
        let phis = basis_spectra(&self.dft, input.basis, self.a.len(), &mut ops)?;
        self.ops = ops;
        self.predict()?;
        let x_hat = self.reconstruct(&phis)?;
        let res = residuals(&self.dft, &x_hat, input.y, input.dh, decode, &mut self.ops)?;
        self.update_linear(&res.y_tilde, &phis)?;
        self.update_nonlinear(&res.y_tilde, &phis)?;
        Ok(res.out)
    }
}

impl<T: Real> Canceller<T> for ExactCascadeKalman<T> {
    fn id(&self) -> AlgorithmId {
        AlgorithmId::KalmanCascadeExact
    }

    fn process(&mut self, input: &FrameInput<'_, T>, decode: DecodeMode) -> Result<FrameOutput<T>> {
        self.step(input, decode)
    }

    fn estimates(&self) -> Result<Estimates<T>> {
        Ok(Estimates {
            w: spectrum_to_taps(&self.dft, &self.w),
            a: self.a.clone(),
        })
    }

    fn ops(&self) -> OpCounter {
        self.ops
    }
}
