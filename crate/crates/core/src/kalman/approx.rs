use num_complex::Complex;

use super::{basis_spectra, combine_spectra, expect_phase, residuals, spectrum_to_taps, Phase};
use crate::canceller::{AlgorithmId, Canceller, CancellerSetup, Estimates, FrameInput, FrameOutput};
use crate::channel::MarkovParams;
use crate::decoder::DecodeMode;
use crate::dft::Dft;
use crate::error::{check_len, Result};
use crate::ops::OpCounter;
use crate::scalar::{cone, czero, inner, Real};

/// Cascade Kalman canceller with diagonal covariances.
///
/// Second moments are taken from the running estimates, the constraint
/// operator is replaced by `(R/M) diag(phi_i)` inside gains and covariances,
/// and coefficient gains are decoupled per basis function. Innovations still
/// use the exact constrained reconstruction.
#[derive(Debug, Clone)]
pub struct ApproxCascadeKalman<T: Real> {
    dft: Dft<T>,
    params: MarkovParams,
    psi_s: T,
    rho: T,
    w: Vec<Complex<T>>,
    pw: Vec<T>,
    a: Vec<Complex<T>>,
    pa: Vec<T>,
    phase: Phase,
    ops: OpCounter,
}

impl<T: Real> ApproxCascadeKalman<T> {
    pub fn new(setup: &CancellerSetup) -> Result<Self> {
        let cfg = setup.cfg;
        let n = setup.n();
        check_len("Markov model bins", cfg.m(), setup.params.m)?;
        let mut a = vec![czero(); n];
        a[0] = cone();
        let mut pa: Vec<T> = setup.params.ra.iter().map(|&r| T::lit(r)).collect();
        pa[0] = T::zero();
        Ok(Self {
            dft: Dft::new(cfg),
            params: setup.params.clone(),
            psi_s: T::lit(setup.noise.per_bin),
            rho: T::lit(cfg.r() as f64 / cfg.m() as f64),
            w: vec![czero(); cfg.m()],
            pw: vec![T::lit(setup.params.bin_power()); cfg.m()],
            a,
            pa,
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

    pub fn pw(&self) -> &[T] {
        &self.pw
    }

    pub fn a(&self) -> &[Complex<T>] {
        &self.a
    }

    pub fn pa(&self) -> &[T] {
        &self.pa
    }

    pub fn set_state(&mut self, w: Vec<Complex<T>>, pw: Vec<T>, a: Vec<Complex<T>>, pa: Vec<T>) {
        self.w = w;
        self.pw = pw;
        self.a = a;
        self.pa = pa;
        self.a[0] = cone();
        self.pa[0] = T::zero();
        self.phase = Phase::Updated;
    }

    pub fn predict(&mut self) -> Result<()> {
        expect_phase(self.phase, Phase::Updated)?;
        let aw = T::lit(self.params.a_w);
        let psi_w = T::lit(self.params.psi_w());
        for (w, p) in self.w.iter_mut().zip(self.pw.iter_mut()) {
            *w = w.scale(aw);
            *p = aw * aw * *p + psi_w;
        }
        let psi_a = self.params.psi_a();
        for i in 1..self.a.len() {
            let f = T::lit(self.params.a_a[i]);
            self.a[i] = self.a[i].scale(f);
            self.pa[i] = f * f * self.pa[i] + T::lit(psi_a[i]);
        }
        self.ops.mul(2 * self.w.len() + 2 * self.a.len());
        self.phase = Phase::Predicted;
        Ok(())
    }

    /// Estimated second moments: `|w|^2 + p^w` per bin and `|a_i|^2 + p^a_i`.
    pub fn moments(&self) -> (Vec<T>, Vec<T>) {
        let rw = self
            .w
            .iter()
            .zip(&self.pw)
            .map(|(w, p)| w.norm_sqr() + *p)
            .collect();
        let pa = self
            .a
            .iter()
            .zip(&self.pa)
            .map(|(a, p)| a.norm_sqr() + *p)
            .collect();
        (rw, pa)
    }

    pub fn reconstruct(&mut self, phis: &[Vec<Complex<T>>]) -> Result<Vec<Complex<T>>> {
        expect_phase(self.phase, Phase::Predicted)?;
        let d = combine_spectra(phis, &self.a, &mut self.ops);
        let mut x: Vec<_> = d.iter().zip(&self.w).map(|(a, b)| a * b).collect();
        self.ops.mul(x.len());
        self.dft.project_in_place(&mut x, &mut self.ops);
        Ok(x)
    }

    /// Per-bin linear update with estimated channel moments.
    pub fn update_linear(&mut self, y_tilde: &[Complex<T>], phis: &[Vec<Complex<T>>]) -> Result<()> {
        let (rw, _) = self.moments();
        self.ops.mul(2 * rw.len());
        self.update_linear_with_moments(y_tilde, phis, &rw)
    }

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
        let rho = self.rho;
        let d = combine_spectra(phis, &self.a, &mut self.ops);
        let mut x: Vec<_> = d.iter().zip(&self.w).map(|(a, b)| a * b).collect();
        self.ops.mul(m);
        self.dft.project_in_place(&mut x, &mut self.ops);

        let mut psi = vec![self.psi_s; m];
        for (i, phi) in phis.iter().enumerate() {
            let p = self.pa[i];
            if p == T::zero() {
                continue;
            }
            for ((s, ph), r) in psi.iter_mut().zip(phi).zip(rw) {
                *s = *s + rho * p * ph.norm_sqr() * *r;
            }
            self.ops.mul(3 * m);
        }
        for k in 0..m {
            let num = self.pw[k] * rho;
            let den = num * d[k].norm_sqr() + psi[k];
            let gain = d[k].conj().scale(num / den);
            self.w[k] = self.w[k] + gain * (y_tilde[k] - x[k]);
            self.pw[k] = (T::one() - rho * num * d[k].norm_sqr() / den) * self.pw[k];
        }
        self.ops.mul(7 * m);
        self.ops.div(2 * m);
        self.phase = Phase::LinearUpdated;
        Ok(())
    }

    /// Decoupled per-coefficient update with estimated coefficient moments.
    pub fn update_nonlinear(&mut self, y_tilde: &[Complex<T>], phis: &[Vec<Complex<T>>]) -> Result<()> {
        let (_, pa2) = self.moments();
        self.ops.mul(2 * pa2.len());
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
        if self.pa.iter().all(|p| *p == T::zero()) {
            self.phase = Phase::Updated;
            return Ok(());
        }
        let rho = self.rho;

        // sigma^2: largest diagonal entry of the approximated augmented noise.
        let mut psi = vec![self.psi_s; m];
        for (i, phi) in phis.iter().enumerate() {
            if pa2[i] == T::zero() {
                continue;
            }
            for ((s, ph), p) in psi.iter_mut().zip(phi).zip(&self.pw) {
                *s = *s + rho * pa2[i] * ph.norm_sqr() * *p;
            }
            self.ops.mul(3 * m);
        }
        let sigma2 = psi.iter().copied().fold(T::zero(), T::max);

        let d = combine_spectra(phis, &self.a, &mut self.ops);
        let mut x: Vec<_> = d.iter().zip(&self.w).map(|(a, b)| a * b).collect();
        self.ops.mul(m);
        self.dft.project_in_place(&mut x, &mut self.ops);
        let innov: Vec<_> = y_tilde.iter().zip(&x).map(|(a, b)| a - b).collect();

        for i in 1..n {
            let p = self.pa[i];
            if p == T::zero() {
                continue;
            }
            let g: Vec<_> = phis[i].iter().zip(&self.w).map(|(a, b)| a * b).collect();
            let g2: T = g.iter().map(|v| v.norm_sqr()).sum();
            let den = rho * p * g2 + sigma2;
            let scale = rho * p / den;
            self.a[i] = self.a[i] + inner(&g, &innov).scale(scale);
            self.pa[i] = (T::one() - rho * scale * g2) * p;
            self.ops.mul(3 * m + 6);
            self.ops.div(1);
        }
        self.a[0] = cone();
        self.pa[0] = T::zero();
        self.phase = Phase::Updated;
        Ok(())
    }

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

impl<T: Real> Canceller<T> for ApproxCascadeKalman<T> {
    fn id(&self) -> AlgorithmId {
        AlgorithmId::KalmanCascadeApprox
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
