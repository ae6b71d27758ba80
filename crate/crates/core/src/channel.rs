//! Ground-truth channel simulation: Markov-evolving cascade SI channel,
//! static wireless channel, sources and noise.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::basis::BasisFrame;
use crate::dft::{Dft, FrameConfig};
use crate::error::{check_len, Error, Result};
use crate::ops::OpCounter;
use crate::scalar::{cone, czero, Real};

/// Transition factor whose correlation halves after `frames` frames.
/// `f64::INFINITY` gives a static channel.
pub fn coherence_to_transition(frames: f64) -> Result<f64> {
    if frames.is_nan() || frames <= 0.0 {
        return Err(Error::Domain(format!("coherence time must be positive, got {frames}")));
    }
    if frames.is_infinite() {
        return Ok(1.0);
    }
    Ok(2f64.powf(-1.0 / frames))
}

/// Per-bin system noise variance `(tr_rw / M) (1 - |A|^2)`.
pub fn system_noise_variance(tr_rw: f64, a_w: f64, m: usize) -> Result<f64> {
    if a_w.abs() > 1.0 {
        return Err(Error::Domain(format!("|A| = {} exceeds one", a_w.abs())));
    }
    if tr_rw < 0.0 || m == 0 {
        return Err(Error::Domain(format!("invalid power {tr_rw} or length {m}")));
    }
    Ok(tr_rw / m as f64 * (1.0 - a_w * a_w))
}

/// One draw of a circular complex Gaussian with the given variance.
pub fn cgauss<T: Real, R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex<T> {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::lit(re * s), T::lit(im * s))
}

/// I.i.d. circular Gaussian samples of the given power.
pub fn gen_source<T: Real, R: Rng + ?Sized>(
    power: f64,
    len: usize,
    rng: &mut R,
) -> Result<Vec<Complex<T>>> {
    if !(power >= 0.0) {
        return Err(Error::Domain(format!("source power must be non-negative, got {power}")));
    }
    Ok((0..len).map(|_| cgauss(rng, power)).collect())
}

/// First-order Markov parameters of the cascade channel.
///
/// `tr_rw` is the steady-state trace of the DFT-domain channel covariance,
/// i.e. `M` times the expected time-domain tap energy. `ra[0]` is the second
/// moment of the frozen coefficient (one) and is never perturbed.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovParams {
    pub m: usize,
    pub a_w: f64,
    pub a_a: Vec<f64>,
    pub tr_rw: f64,
    pub ra: Vec<f64>,
}

impl MarkovParams {
    pub fn new(m: usize, a_w: f64, a_a: Vec<f64>, tr_rw: f64, ra: Vec<f64>) -> Result<Self> {
        if a_a.len() != ra.len() || ra.is_empty() {
            return Err(Error::Config(format!(
                "coefficient parameter lengths differ ({} vs {})",
                a_a.len(),
                ra.len()
            )));
        }
        if a_w.abs() > 1.0 || a_a.iter().any(|a| a.abs() > 1.0) {
            return Err(Error::Domain("transition factors must not exceed one".into()));
        }
        if tr_rw < 0.0 || ra.iter().any(|r| *r < 0.0) {
            return Err(Error::Domain("powers must be non-negative".into()));
        }
        Ok(Self { m, a_w, a_a, tr_rw, ra })
    }

    pub fn n(&self) -> usize {
        self.ra.len()
    }

    pub fn psi_w(&self) -> f64 {
        self.tr_rw / self.m as f64 * (1.0 - self.a_w * self.a_w)
    }

    pub fn psi_a(&self) -> Vec<f64> {
        self.ra
            .iter()
            .zip(&self.a_a)
            .enumerate()
            .map(|(i, (r, a))| if i == 0 { 0.0 } else { r * (1.0 - a * a) })
            .collect()
    }

    /// Expected per-bin channel power `tr_rw / M`.
    pub fn bin_power(&self) -> f64 {
        self.tr_rw / self.m as f64
    }
}

/// True cascade SI channel: `L` time-domain taps and `N` coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeChannelState<T: Real> {
    pub w: Vec<Complex<T>>,
    pub a: Vec<Complex<T>>,
}

impl<T: Real> CascadeChannelState<T> {
    /// Draw from the stationary distribution: flat-profile taps with total
    /// energy `tr_rw / M` and coefficients of power `ra[i]`.
    pub fn draw<R: Rng + ?Sized>(params: &MarkovParams, l: usize, rng: &mut R) -> Self {
        let tap_var = params.bin_power() / l.max(1) as f64;
        let w = (0..l).map(|_| cgauss(rng, tap_var)).collect();
        let a = params
            .ra
            .iter()
            .enumerate()
            .map(|(i, &r)| if i == 0 { cone() } else { cgauss(rng, r) })
            .collect();
        Self { w, a }
    }

    /// One Markov step. Noise enters only the `L` active taps so the padded
    /// vector stays a valid FIR channel.
    pub fn evolve<R: Rng + ?Sized>(&mut self, params: &MarkovParams, rng: &mut R) {
        let l = self.w.len().max(1);
        let tap_var = params.psi_w() / l as f64;
        let aw = T::lit(params.a_w);
        for w in &mut self.w {
            *w = w.scale(aw);
            if tap_var > 0.0 {
                *w = *w + cgauss(rng, tap_var);
            }
        }
        let psi_a = params.psi_a();
        for (i, a) in self.a.iter_mut().enumerate().skip(1) {
            *a = a.scale(T::lit(params.a_a[i]));
            if psi_a[i] > 0.0 {
                *a = *a + cgauss(rng, psi_a[i]);
            }
        }
        self.a[0] = cone();
    }

    /// Time-domain taps zero-padded to `m` and transformed.
    pub fn spectrum(&self, dft: &Dft<T>) -> Vec<Complex<T>> {
        let mut buf = vec![czero(); dft.cfg().m()];
        buf[..self.w.len()].copy_from_slice(&self.w);
        dft.forward_in_place(&mut buf);
        buf
    }
}

fn combine<T: Real>(basis: &BasisFrame<T>, a: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut out = vec![czero(); basis.len()];
    for (col, ai) in basis.columns.iter().zip(a) {
        for (o, v) in out.iter_mut().zip(col) {
            *o = *o + v * ai;
        }
    }
    out
}

/// Linear convolution with zero initial state, same length as `x`.
pub fn fir_filter<T: Real>(h: &[Complex<T>], x: &[Complex<T>]) -> Vec<Complex<T>> {
    (0..x.len())
        .map(|k| {
            h.iter()
                .enumerate()
                .take(k + 1)
                .fold(czero(), |acc, (l, hl)| acc + hl * x[k - l])
        })
        .collect()
}

/// Cascade SI on the `R` valid samples of a frame, by direct summation.
pub fn cascade_si<T: Real>(
    basis: &BasisFrame<T>,
    state: &CascadeChannelState<T>,
    cfg: FrameConfig,
) -> Result<Vec<Complex<T>>> {
    check_len("basis frame", cfg.m(), basis.len())?;
    check_len("coefficients", basis.n(), state.a.len())?;
    let u = combine(basis, &state.a);
    Ok((cfg.l()..cfg.m())
        .map(|p| {
            state
                .w
                .iter()
                .enumerate()
                .filter(|(l, _)| *l <= p)
                .fold(czero(), |acc, (l, wl)| acc + wl * u[p - l])
        })
        .collect())
}

/// Cascade SI through the DFT path: `last R of IDFT(sum_i a_i phi_i o w)`.
pub fn cascade_si_dft<T: Real>(
    basis: &BasisFrame<T>,
    state: &CascadeChannelState<T>,
    dft: &Dft<T>,
) -> Result<Vec<Complex<T>>> {
    let cfg = dft.cfg();
    check_len("basis frame", cfg.m(), basis.len())?;
    check_len("coefficients", basis.n(), state.a.len())?;
    if state.w.len() > cfg.m() {
        return Err(Error::Config("channel longer than frame".into()));
    }
    let u = dft.dft(&combine(basis, &state.a))?;
    let w = state.spectrum(dft);
    let prod: Vec<_> = u.iter().zip(&w).map(|(a, b)| a * b).collect();
    Ok(dft.idft_valid(&prod, &mut OpCounter::default()))
}

/// Parallel-structure SI: one FIR branch per basis function.
pub fn parallel_si<T: Real>(
    basis: &BasisFrame<T>,
    branches: &[Vec<Complex<T>>],
    cfg: FrameConfig,
) -> Result<Vec<Complex<T>>> {
    check_len("basis frame", cfg.m(), basis.len())?;
    check_len("branches", basis.n(), branches.len())?;
    Ok((cfg.l()..cfg.m())
        .map(|p| {
            let mut acc = czero();
            for (col, w) in basis.columns.iter().zip(branches) {
                for (l, wl) in w.iter().enumerate().filter(|(l, _)| *l <= p) {
                    acc = acc + wl * col[p - l];
                }
            }
            acc
        })
        .collect())
}

/// Static wireless channel between the distant node and the receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct WirelessChannel<T: Real> {
    pub h: Vec<Complex<T>>,
}

impl<T: Real> WirelessChannel<T> {
    /// Flat-profile taps with `E ||h||^2 = 1`.
    pub fn draw<R: Rng + ?Sized>(l: usize, rng: &mut R) -> Self {
        let l = l.max(1);
        Self {
            h: (0..l).map(|_| cgauss(rng, 1.0 / l as f64)).collect(),
        }
    }

    pub fn energy(&self) -> f64 {
        crate::scalar::energy(&self.h).to_f64_lossy()
    }
}

/// Received samples and the filtered SoI kept as an oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct Received<T: Real> {
    pub y: Vec<Complex<T>>,
    pub dh: Vec<Complex<T>>,
}

/// `y = x_si + d^h + n` with `n` white of power `noise_power`.
pub fn compose_received<T: Real, R: Rng + ?Sized>(
    x_si: &[Complex<T>],
    dh: &[Complex<T>],
    noise_power: f64,
    rng: &mut R,
) -> Result<Received<T>> {
    check_len("filtered SoI", x_si.len(), dh.len())?;
    if !(noise_power >= 0.0) {
        return Err(Error::Domain(format!("noise power must be non-negative, got {noise_power}")));
    }
    let y = x_si
        .iter()
        .zip(dh)
        .map(|(s, d)| {
            let n = if noise_power > 0.0 { cgauss(rng, noise_power) } else { czero() };
            s + d + n
        })
        .collect();
    Ok(Received { y, dh: dh.to_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisSet;
    use crate::scalar::cplx;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn transition_factor() {
        assert_eq!(coherence_to_transition(1.0).unwrap(), 0.5);
        assert_eq!(coherence_to_transition(f64::INFINITY).unwrap(), 1.0);
        assert!((coherence_to_transition(1e3).unwrap() - 0.999_307_09).abs() < 1e-8);
        assert!(coherence_to_transition(0.0).is_err());
        assert!(coherence_to_transition(-2.0).is_err());
    }

    #[test]
    fn noise_variance() {
        assert_eq!(system_noise_variance(5.0, 1.0, 64).unwrap(), 0.0);
        assert_eq!(system_noise_variance(64.0, 0.0, 64).unwrap(), 1.0);
        let a = coherence_to_transition(1e3).unwrap();
        let v = system_noise_variance(1.0, a, 64).unwrap();
        assert!((v - 2.165e-5).abs() < 1e-8, "{v}");
        assert!(system_noise_variance(1.0, 1.1, 64).is_err());
    }

    #[test]
    fn static_evolve_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = MarkovParams::new(8, 1.0, vec![1.0, 1.0], 8.0, vec![1.0, 0.1]).unwrap();
        let mut s = CascadeChannelState::<f64>::draw(&p, 2, &mut rng);
        let before = s.clone();
        s.evolve(&p, &mut rng);
        assert_eq!(s, before);
    }

    #[test]
    fn memoryless_coefficients_are_pure_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = MarkovParams::new(8, 1.0, vec![0.0, 0.0], 8.0, vec![1.0, 0.25]).unwrap();
        let mut s = CascadeChannelState::<f64>::draw(&p, 2, &mut rng);
        let mut acc = 0.0;
        let n = 20_000;
        for _ in 0..n {
            s.evolve(&p, &mut rng);
            assert_eq!(s.a[0], cone());
            acc += s.a[1].norm_sqr();
        }
        assert!((acc / n as f64 - 0.25).abs() < 0.25 * 0.05);
    }

    #[test]
    fn identity_and_delay_channels() {
        let cfg = FrameConfig::new(4, 3).unwrap();
        let x: Vec<_> = (0..4).map(|k| cplx(k as f64 + 1.0, 0.5)).collect();
        let basis = BasisSet::linear().expand(&x);
        let id = CascadeChannelState { w: vec![cone()], a: vec![cone()] };
        assert_eq!(cascade_si(&basis, &id, cfg).unwrap(), x[1..].to_vec());
        let delay = CascadeChannelState { w: vec![czero(), cone()], a: vec![cone()] };
        assert_eq!(cascade_si(&basis, &delay, cfg).unwrap(), x[..3].to_vec());
    }

    #[test]
    fn received_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let dh = vec![cplx(1.0, 2.0), cplx(-1.0, 0.0)];
        let zero = vec![czero::<f64>(); 2];
        assert_eq!(compose_received(&zero, &dh, 0.0, &mut rng).unwrap().y, dh);
        assert_eq!(compose_received(&dh, &zero, 0.0, &mut rng).unwrap().y, dh);
        assert!(compose_received(&dh, &zero, -1.0, &mut rng).is_err());
    }

    #[test]
    fn source_determinism_and_zero_power() {
        let a: Vec<Complex<f64>> = gen_source(1.0, 16, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b: Vec<Complex<f64>> = gen_source(1.0, 16, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        let z: Vec<Complex<f64>> = gen_source(0.0, 4, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert!(z.iter().all(|v| *v == czero()));
        assert!(gen_source::<f64, _>(-1.0, 4, &mut ChaCha8Rng::seed_from_u64(9)).is_err());
    }

    #[test]
    fn fir_filter_is_causal_convolution() {
        let h = vec![cplx(1.0, 0.0), cplx(0.0, 1.0)];
        let x = vec![cplx(1.0, 0.0), cplx(2.0, 0.0), cplx(3.0, 0.0)];
        let y = fir_filter(&h, &x);
        assert_eq!(y, vec![cplx(1.0, 0.0), cplx(2.0, 1.0), cplx(3.0, 2.0)]);
    }
}
