use num_complex::Complex;

use super::{parallel_estimates, stacked_regressor};
use crate::canceller::{AlgorithmId, Canceller, CancellerSetup, Estimates, FrameInput, FrameOutput};
use crate::decoder::DecodeMode;
use crate::dft::FrameConfig;
use crate::error::{check_len, Error, Result};
use crate::linalg::CMatrix;
use crate::ops::OpCounter;
use crate::scalar::{czero, Real};

/// Exponentially weighted RLS on a stacked regressor, with output `w^T u`.
#[derive(Debug, Clone)]
pub struct RlsFilter<T: Real> {
    pub w: Vec<Complex<T>>,
    pub p: CMatrix<T>,
    lambda: T,
    delta: T,
    pi: Vec<Complex<T>>,
    /// Times the inverse correlation matrix was reset after losing definiteness.
    pub reinits: u64,
}

impl<T: Real> RlsFilter<T> {
    /// `P` starts at `I / delta`.
    pub fn new(taps: usize, lambda: f64, delta: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::Config(format!("forgetting factor must be in (0, 1], got {lambda}")));
        }
        if !(delta > 0.0) {
            return Err(Error::Config(format!("RLS regularization must be positive, got {delta}")));
        }
        let delta = T::lit(delta);
        Ok(Self {
            w: vec![czero(); taps],
            p: CMatrix::scaled_identity(taps, T::one() / delta),
            lambda: T::lit(lambda),
            delta,
            pi: vec![czero(); taps],
            reinits: 0,
        })
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn predict(&self, u: &[Complex<T>]) -> Complex<T> {
        self.w.iter().zip(u).fold(czero(), |acc, (w, x)| acc + w * x)
    }

    fn reinit(&mut self) {
        let n = self.w.len();
        self.p = CMatrix::scaled_identity(n, T::one() / self.delta);
        self.reinits += 1;
    }

    /// Gain `k = P g / (lambda + g^H P g)` with `g = conj(u)`, then
    /// `w += k err` and `P = (P - k (P g)^H) / lambda`.
    pub fn update(&mut self, u: &[Complex<T>], err: Complex<T>) {
        let n = self.w.len();
        for (r, pi) in self.pi.iter_mut().enumerate() {
            *pi = self
                .p
                .row(r)
                .iter()
                .zip(u)
                .fold(czero(), |acc, (p, x)| acc + p * x.conj());
        }
        let den = self.lambda
            + u.iter()
                .zip(&self.pi)
                .fold(czero::<T>(), |acc, (x, pi)| acc + x * pi)
                .re;
        if !(den > T::zero()) || !den.is_finite() {
            self.reinit();
            return;
        }
        let inv_den = T::one() / den;
        let inv_lambda = T::one() / self.lambda;
        for (w, pi) in self.w.iter_mut().zip(&self.pi) {
            *w = *w + pi.scale(inv_den) * err;
        }
        for r in 0..n {
            let kr = self.pi[r].scale(inv_den);
            let row = self.p.row_mut(r);
            for (c, v) in row.iter_mut().enumerate() {
                *v = (*v - kr * self.pi[c].conj()).scale(inv_lambda);
            }
        }
    }

    /// Restore Hermitian symmetry and reset if the diagonal went bad.
    pub fn condition(&mut self) {
        self.p.hermitianize();
        if self.p.diag().iter().any(|d| !(d.re > T::zero()) || !d.re.is_finite()) {
            self.reinit();
        }
    }
}

/// Time-domain RLS canceller in parallel structure.
#[derive(Debug, Clone)]
pub struct Rls<T: Real> {
    cfg: FrameConfig,
    n: usize,
    filter: RlsFilter<T>,
    u: Vec<Complex<T>>,
    ops: OpCounter,
}

impl<T: Real> Rls<T> {
    pub fn new(setup: &CancellerSetup) -> Result<Self> {
        let taps = setup.n() * setup.cfg.l();
        Ok(Self {
            cfg: setup.cfg,
            n: setup.n(),
            filter: RlsFilter::new(taps, setup.matched_lambda(), setup.rls_delta)?,
            u: vec![czero(); taps],
            ops: OpCounter::default(),
        })
    }

    pub fn reinits(&self) -> u64 {
        self.filter.reinits
    }

    pub fn lambda(&self) -> T {
        self.filter.lambda()
    }
}

impl<T: Real> Canceller<T> for Rls<T> {
    fn id(&self) -> AlgorithmId {
        AlgorithmId::Rls
    }

    fn process(&mut self, input: &FrameInput<'_, T>, decode: DecodeMode) -> Result<FrameOutput<T>> {
        let (m, l, r) = (self.cfg.m(), self.cfg.l(), self.cfg.r());
        check_len("basis functions", self.n, input.basis.n())?;
        check_len("basis frame", m, input.basis.len())?;
        check_len("received samples", r, input.y.len())?;
        let taps = self.u.len();
        let mut out = FrameOutput {
            e: Vec::with_capacity(r),
            e_tilde: Vec::with_capacity(r),
            x_si_hat: Vec::with_capacity(r),
        };
        let before = self.filter.reinits;
        for j in 0..r {
            stacked_regressor(input.basis, l + j, l, &mut self.u);
            let x = self.filter.predict(&self.u);
            let e = input.y[j] - x;
            let dhat = decode.decode(&[e], input.dh.map(|d| &d[j..j + 1]))?[0];
            let err = e - dhat;
            self.filter.update(&self.u, err);
            self.ops.mul(2 * taps * taps + 3 * taps);
            self.ops.div(2);
            out.e.push(e);
            out.e_tilde.push(err);
            out.x_si_hat.push(x);
        }
        self.filter.condition();
        self.ops.fallbacks += self.filter.reinits - before;
        Ok(out)
    }

    fn estimates(&self) -> Result<Estimates<T>> {
        let l = self.cfg.l();
        parallel_estimates(self.filter.w.chunks(l).map(<[_]>::to_vec).collect())
    }

    fn ops(&self) -> OpCounter {
        self.ops
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn rejects_bad_parameters() {
        assert!(RlsFilter::<f64>::new(2, 0.0, 1.0).is_err());
        assert!(RlsFilter::<f64>::new(2, 1.5, 1.0).is_err());
        assert!(RlsFilter::<f64>::new(2, 1.0, 0.0).is_err());
    }

    #[test]
    fn zero_error_keeps_weights_and_contracts_p() {
        let mut f = RlsFilter::<f64>::new(1, 1.0, 1.0).unwrap();
        f.w[0] = cplx(0.5, 0.0);
        f.update(&[cplx(1.0, 0.0)], czero());
        assert_eq!(f.w[0], cplx(0.5, 0.0));
        assert!((f.p[(0, 0)].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn one_tap_hand_recursion() {
        // lambda = 0.9, P0 = 1, u = 2, d = 4.
        let mut f = RlsFilter::<f64>::new(1, 0.9, 1.0).unwrap();
        let u = [cplx(2.0, 0.0)];
        let err = cplx(4.0, 0.0) - f.predict(&u);
        f.update(&u, err);
        // k = 2 / (0.9 + 4), w = 8 / 4.9, P = (1 - 4 / 4.9) / 0.9
        assert!((f.w[0].re - 8.0 / 4.9).abs() < 1e-14);
        assert!((f.p[(0, 0)].re - (1.0 - 4.0 / 4.9) / 0.9).abs() < 1e-14);
    }
}
