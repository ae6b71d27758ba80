//! DFT-domain Kalman cancellers in cascade structure.

mod approx;
mod exact;

pub use approx::ApproxCascadeKalman;
pub use exact::ExactCascadeKalman;

use num_complex::Complex;

use crate::basis::BasisFrame;
use crate::decoder::DecodeMode;
use crate::dft::{Dft, FrameConfig};
use crate::error::{check_len, Error, Result};
use crate::ops::OpCounter;
use crate::scalar::Real;

/// Where a cascade canceller is within one frame's recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Posterior of the previous frame; ready to predict.
    Updated,
    /// Predictions formed; ready to reconstruct and update the linear channel.
    Predicted,
    /// Linear channel updated; ready to update the coefficients.
    LinearUpdated,
}

pub(crate) fn expect_phase(found: Phase, expected: Phase) -> Result<()> {
    if found == expected {
        Ok(())
    } else {
        Err(Error::Phase { expected, found })
    }
}

/// Per-bin variance of the non-SI observation component (SoI left after
/// decoding plus receiver noise). Diagonal with a constant value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationNoiseModel {
    pub per_bin: f64,
}

impl ObservationNoiseModel {
    /// The spectrum of `R` white samples behind `L` zeros has per-bin
    /// variance `R` times the sample variance.
    pub fn for_mode(cfg: FrameConfig, soi_power: f64, noise_power: f64, mode: DecodeMode) -> Self {
        let sample_var = match mode {
            DecodeMode::None => soi_power + noise_power,
            DecodeMode::Perfect => noise_power,
        };
        Self {
            per_bin: cfg.r() as f64 * sample_var,
        }
    }
}

/// Spectra of the basis columns of one frame.
pub fn basis_spectra<T: Real>(
    dft: &Dft<T>,
    basis: &BasisFrame<T>,
    n: usize,
    ops: &mut OpCounter,
) -> Result<Vec<Vec<Complex<T>>>> {
    check_len("basis functions", n, basis.n())?;
    check_len("basis frame", dft.cfg().m(), basis.len())?;
    Ok(basis
        .columns
        .iter()
        .map(|c| {
            let mut buf = c.clone();
            dft.forward_in_place(&mut buf);
            ops.transform(buf.len());
            buf
        })
        .collect())
}

/// `sum_i a_i phi_i` per bin.
pub(crate) fn combine_spectra<T: Real>(
    phis: &[Vec<Complex<T>>],
    a: &[Complex<T>],
    ops: &mut OpCounter,
) -> Vec<Complex<T>> {
    let m = phis[0].len();
    let mut d = vec![crate::scalar::czero(); m];
    for (phi, ai) in phis.iter().zip(a) {
        for (o, p) in d.iter_mut().zip(phi) {
            *o = *o + p * ai;
        }
    }
    ops.mul(m * phis.len());
    d
}

/// Shared frame front end: residuals from a reconstructed SI spectrum.
pub struct Residuals<T: Real> {
    pub out: crate::canceller::FrameOutput<T>,
    /// Spectrum of `y - d^h` behind `L` zeros.
    pub y_tilde: Vec<Complex<T>>,
}

pub fn residuals<T: Real>(
    dft: &Dft<T>,
    x_hat: &[Complex<T>],
    y: &[Complex<T>],
    oracle: Option<&[Complex<T>]>,
    decode: DecodeMode,
    ops: &mut OpCounter,
) -> Result<Residuals<T>> {
    let x_si_hat = dft.idft_valid(x_hat, ops);
    let e: Vec<_> = y.iter().zip(&x_si_hat).map(|(a, b)| a - b).collect();
    let dhat = decode.decode(&e, oracle)?;
    let e_tilde: Vec<_> = e.iter().zip(&dhat).map(|(a, b)| a - b).collect();
    let yt: Vec<_> = y.iter().zip(&dhat).map(|(a, b)| a - b).collect();
    let y_tilde = dft.dft_valid(&yt, ops)?;
    Ok(Residuals {
        out: crate::canceller::FrameOutput {
            e,
            e_tilde,
            x_si_hat,
        },
        y_tilde,
    })
}

/// First `L` time-domain taps of a channel spectrum.
pub fn spectrum_to_taps<T: Real>(dft: &Dft<T>, w: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut buf = w.to_vec();
    dft.inverse_in_place(&mut buf);
    buf.truncate(dft.cfg().l());
    buf
}
