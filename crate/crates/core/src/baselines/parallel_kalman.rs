use num_complex::Complex;

use super::parallel_estimates;
use crate::canceller::{AlgorithmId, Canceller, CancellerSetup, Estimates, FrameInput, FrameOutput};
use crate::decoder::DecodeMode;
use crate::dft::Dft;
use crate::error::{check_len, Result};
use crate::kalman::{basis_spectra, residuals, spectrum_to_taps};
use crate::linalg::CMatrix;
use crate::ops::OpCounter;
use crate::scalar::{czero, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParallelMode {
    /// Full `N x N` cross-branch covariance per bin.
    Submatrix,
    /// Per-branch, per-bin scalar variances only.
    Full,
}

/// DFT-domain Kalman canceller in parallel structure.
///
/// Each bin carries the `N` branch gains as state. Branch `i` follows the
/// product of the channel and coefficient Markov factors, with steady-state
/// power `E|a_i|^2 * tr(R^w) / M`. The observation in bin `m` is
/// `(R/M) sum_i phi_i[m] w_i[m]` plus the non-SI noise.
#[derive(Debug, Clone)]
pub struct ParallelKalman<T: Real> {
    dft: Dft<T>,
    mode: ParallelMode,
    psi_s: T,
    rho: T,
    transition: CMatrix<T>,
    sys_noise: Vec<T>,
    /// Branch spectra, `w[i][m]`.
    w: Vec<Vec<Complex<T>>>,
    /// Per-bin covariance; diagonal-only in full mode.
    p: Vec<CMatrix<T>>,
    ops: OpCounter,
}

impl<T: Real> ParallelKalman<T> {
    pub fn new(setup: &CancellerSetup, mode: ParallelMode) -> Result<Self> {
        let cfg = setup.cfg;
        let n = setup.n();
        check_len("Markov model bins", cfg.m(), setup.params.m)?;
        let bin = setup.params.bin_power();
        let factors: Vec<f64> = setup
            .params
            .a_a
            .iter()
            .enumerate()
            .map(|(i, a)| if i == 0 { setup.params.a_w } else { setup.params.a_w * a })
            .collect();
        let prior: Vec<f64> = setup.params.ra.iter().map(|r| r * bin).collect();
        let transition =
            CMatrix::from_real_diag(&factors.iter().map(|&f| T::lit(f)).collect::<Vec<_>>());
        let sys_noise = prior
            .iter()
            .zip(&factors)
            .map(|(p, f)| T::lit(p * (1.0 - f * f)))
            .collect();
        let p0 = CMatrix::from_real_diag(&prior.iter().map(|&v| T::lit(v)).collect::<Vec<_>>());
        Ok(Self {
            dft: Dft::new(cfg),
            mode,
            psi_s: T::lit(setup.noise.per_bin),
            rho: T::lit(cfg.r() as f64 / cfg.m() as f64),
            transition,
            sys_noise,
            w: vec![vec![czero(); cfg.m()]; n],
            p: vec![p0; cfg.m()],
            ops: OpCounter::default(),
        })
    }

    pub fn mode(&self) -> ParallelMode {
        self.mode
    }

    pub fn branches(&self) -> &[Vec<Complex<T>>] {
        &self.w
    }

    pub fn covariance(&self, bin: usize) -> &CMatrix<T> {
        &self.p[bin]
    }

    fn predict(&mut self) {
        let n = self.w.len();
        for (i, wi) in self.w.iter_mut().enumerate() {
            let f = self.transition[(i, i)];
            for v in wi.iter_mut() {
                *v = *v * f;
            }
        }
        self.ops.mul(n * self.dft.cfg().m());
        match self.mode {
            ParallelMode::Submatrix => {
                let at = self.transition.adjoint();
                for p in &mut self.p {
                    *p = self.transition.matmul(p).matmul(&at);
                    p.add_diag_re(&self.sys_noise);
                    self.ops.matmul(n, n, n);
                    self.ops.matmul(n, n, n);
                }
            }
            ParallelMode::Full => {
                for p in &mut self.p {
                    for i in 0..n {
                        let f = self.transition[(i, i)].norm_sqr();
                        p[(i, i)].re = f * p[(i, i)].re + self.sys_noise[i];
                    }
                    self.ops.mul(n);
                }
            }
        }
    }

    fn reconstruct(&mut self, phis: &[Vec<Complex<T>>]) -> Vec<Complex<T>> {
        let m = self.dft.cfg().m();
        let mut x = vec![czero(); m];
        for (phi, wi) in phis.iter().zip(&self.w) {
            for ((o, a), b) in x.iter_mut().zip(phi).zip(wi) {
                *o = *o + a * b;
            }
        }
        self.ops.mul(m * phis.len());
        self.dft.project_in_place(&mut x, &mut self.ops);
        x
    }

    fn update(&mut self, innov: &[Complex<T>], phis: &[Vec<Complex<T>>]) {
        let n = self.w.len();
        let rho = self.rho;
        let mut phi = vec![czero(); n];
        for (m, nu) in innov.iter().enumerate() {
            for (i, v) in phi.iter_mut().enumerate() {
                *v = phis[i][m];
            }
            let p = &mut self.p[m];
            match self.mode {
                ParallelMode::Submatrix => {
                    // u = P phi^H, s = rho phi u + psi, K = rho u / s.
                    let u: Vec<_> = (0..n)
                        .map(|r| {
                            p.row(r)
                                .iter()
                                .zip(&phi)
                                .fold(czero(), |acc, (a, b)| acc + a * b.conj())
                        })
                        .collect();
                    let s = rho * phi.iter().zip(&u).fold(czero::<T>(), |acc, (a, b)| acc + a * b).re
                        + self.psi_s;
                    let k: Vec<_> = u.iter().map(|v| v.scale(rho / s)).collect();
                    for (wi, ki) in self.w.iter_mut().zip(&k) {
                        wi[m] = wi[m] + ki * nu;
                    }
                    // P = (I - K c) P with c = rho phi.
                    let ikc = CMatrix::from_fn(n, n, |r, c| {
                        let id = if r == c { T::one() } else { T::zero() };
                        Complex::new(id, T::zero()) - k[r] * phi[c].scale(rho)
                    });
                    *p = ikc.matmul(p);
                    p.hermitianize();
                    self.ops.mul(2 * n * n + 4 * n + 1);
                    self.ops.matmul(n, n, n);
                    self.ops.div(1);
                }
                ParallelMode::Full => {
                    let s = rho
                        * (0..n).fold(T::zero(), |acc, i| acc + p[(i, i)].re * phi[i].norm_sqr())
                        + self.psi_s;
                    for i in 0..n {
                        let pi = p[(i, i)].re;
                        let k = phi[i].conj().scale(rho * pi / s);
                        self.w[i][m] = self.w[i][m] + k * nu;
                        p[(i, i)].re = (T::one() - rho * rho * pi * phi[i].norm_sqr() / s) * pi;
                    }
                    self.ops.mul(8 * n);
                    self.ops.div(1 + n);
                }
            }
        }
    }
}

impl<T: Real> Canceller<T> for ParallelKalman<T> {
    fn id(&self) -> AlgorithmId {
        match self.mode {
            ParallelMode::Submatrix => AlgorithmId::KalmanParallelSub,
            ParallelMode::Full => AlgorithmId::KalmanParallelFull,
        }
    }

    fn process(&mut self, input: &FrameInput<'_, T>, decode: DecodeMode) -> Result<FrameOutput<T>> {
        check_len("received samples", self.dft.cfg().r(), input.y.len())?;
        let n = self.w.len();
        let phis = basis_spectra(&self.dft, input.basis, n, &mut self.ops)?;
        self.predict();
        let x_hat = self.reconstruct(&phis);
        let res = residuals(&self.dft, &x_hat, input.y, input.dh, decode, &mut self.ops)?;
        let innov: Vec<_> = res.y_tilde.iter().zip(&x_hat).map(|(a, b)| a - b).collect();
        self.update(&innov, &phis);
        Ok(res.out)
    }

    fn estimates(&self) -> Result<Estimates<T>> {
        parallel_estimates(self.w.iter().map(|wi| spectrum_to_taps(&self.dft, wi)).collect())
    }

    fn ops(&self) -> OpCounter {
        self.ops
    }
}
