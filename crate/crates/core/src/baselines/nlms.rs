use num_complex::Complex;

use super::{parallel_estimates, stacked_regressor};
use crate::canceller::{AlgorithmId, Canceller, CancellerSetup, Estimates, FrameInput, FrameOutput};
use crate::decoder::DecodeMode;
use crate::dft::FrameConfig;
use crate::error::{check_len, Error, Result};
use crate::ops::OpCounter;
use crate::scalar::{czero, Real};

/// Normalized LMS on a stacked regressor, with output `w^T u`.
#[derive(Debug, Clone)]
pub struct NlmsFilter<T: Real> {
    pub w: Vec<Complex<T>>,
    pub mu: T,
    power_mean: T,
    seen: u64,
}

impl<T: Real> NlmsFilter<T> {
    pub fn new(taps: usize, mu: f64) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::Config(format!("NLMS step size must be positive, got {mu}")));
        }
        Ok(Self {
            w: vec![czero(); taps],
            mu: T::lit(mu),
            power_mean: T::zero(),
            seen: 0,
        })
    }

    pub fn predict(&self, u: &[Complex<T>]) -> Complex<T> {
        self.w.iter().zip(u).fold(czero(), |acc, (w, x)| acc + w * x)
    }

    /// `w += mu conj(u) err / (||u||^2 + eps)`, `eps` tracking the average
    /// regressor power so silent stretches do not blow up the step.
    pub fn update(&mut self, u: &[Complex<T>], err: Complex<T>) {
        let norm: T = u.iter().map(|v| v.norm_sqr()).sum();
        self.seen += 1;
        let k = T::from_u64(self.seen).unwrap();
        self.power_mean = self.power_mean + (norm - self.power_mean) / k;
        let eps = T::lit(1e-8) * self.power_mean + T::min_positive_value().sqrt();
        let step = err.scale(self.mu / (norm + eps));
        for (w, x) in self.w.iter_mut().zip(u) {
            *w = *w + x.conj() * step;
        }
    }
}

/// Time-domain NLMS canceller in parallel structure.
#[derive(Debug, Clone)]
pub struct Nlms<T: Real> {
    cfg: FrameConfig,
    n: usize,
    filter: NlmsFilter<T>,
    u: Vec<Complex<T>>,
    ops: OpCounter,
}

impl<T: Real> Nlms<T> {
    pub fn new(setup: &CancellerSetup) -> Result<Self> {
        let taps = setup.n() * setup.cfg.l();
        Ok(Self {
            cfg: setup.cfg,
            n: setup.n(),
            filter: NlmsFilter::new(taps, setup.nlms_step)?,
            u: vec![czero(); taps],
            ops: OpCounter::default(),
        })
    }
}

impl<T: Real> Canceller<T> for Nlms<T> {
    fn id(&self) -> AlgorithmId {
        AlgorithmId::Nlms
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
        for j in 0..r {
            stacked_regressor(input.basis, l + j, l, &mut self.u);
            let x = self.filter.predict(&self.u);
            let e = input.y[j] - x;
            let dhat = decode.decode(&[e], input.dh.map(|d| &d[j..j + 1]))?[0];
            let err = e - dhat;
            self.filter.update(&self.u, err);
            self.ops.mul(3 * taps + 1);
            self.ops.div(1);
            out.e.push(e);
            out.e_tilde.push(err);
            out.x_si_hat.push(x);
        }
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
    fn zero_error_or_step_leaves_weights() {
        let mut f = NlmsFilter::<f64>::new(2, 0.5).unwrap();
        f.w = vec![cplx(1.0, 0.0), cplx(0.0, 1.0)];
        let before = f.w.clone();
        f.update(&[cplx(1.0, 1.0), cplx(2.0, 0.0)], czero());
        assert_eq!(f.w, before);
        assert!(NlmsFilter::<f64>::new(2, 0.0).is_err());
    }

    #[test]
    fn scalar_hand_recursion() {
        // One real tap, mu = 0.5, inputs u = 2 then u = 1, desired d = 3u.
        let mut f = NlmsFilter::<f64>::new(1, 0.5).unwrap();
        let u1 = [cplx(2.0, 0.0)];
        let e1 = cplx(6.0, 0.0) - f.predict(&u1);
        f.update(&u1, e1);
        // w1 = 0.5 * 2 * 6 / (4 + eps) ~ 1.5
        assert!((f.w[0].re - 1.5).abs() < 1e-6);
        let u2 = [cplx(1.0, 0.0)];
        let e2 = cplx(3.0, 0.0) - f.predict(&u2);
        f.update(&u2, e2);
        // w2 = 1.5 + 0.5 * 1 * 1.5 / 1 = 2.25
        assert!((f.w[0].re - 2.25).abs() < 1e-6);
    }
}
