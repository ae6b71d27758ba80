//! The uniform interface every canceller implements, so a harness can run any
//! algorithm from one scenario description.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::basis::BasisFrame;
use crate::baselines::{Nlms, ParallelKalman, ParallelMode, Rls};
use crate::channel::MarkovParams;
use crate::decoder::DecodeMode;
use crate::dft::FrameConfig;
use crate::error::{Error, Result};
use crate::kalman::{ApproxCascadeKalman, ExactCascadeKalman, ObservationNoiseModel};
use crate::ops::OpCounter;
use crate::scalar::Real;

/// Inputs for one frame.
#[derive(Debug, Clone, Copy)]
pub struct FrameInput<'a, T: Real> {
    /// Basis signals over the `M` samples of the frame.
    pub basis: &'a BasisFrame<T>,
    /// Received samples on the `R` valid positions.
    pub y: &'a [Complex<T>],
    /// Filtered SoI on the valid positions, available to oracle decoders.
    pub dh: Option<&'a [Complex<T>]>,
}

/// Time-domain outputs on the `R` valid positions of a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameOutput<T: Real> {
    /// `y - x^_si`.
    pub e: Vec<Complex<T>>,
    /// `y - x^_si - d^h`.
    pub e_tilde: Vec<Complex<T>>,
    pub x_si_hat: Vec<Complex<T>>,
}

/// Current parameter estimates in cascade form.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimates<T: Real> {
    /// First `L` time-domain taps of the linear path.
    pub w: Vec<Complex<T>>,
    /// Cascade coefficients with `a[0] = 1`. Parallel structures report the
    /// least-squares projection of each branch on the linear one.
    pub a: Vec<Complex<T>>,
}

pub trait Canceller<T: Real>: Send {
    fn id(&self) -> AlgorithmId;

    fn process(&mut self, input: &FrameInput<'_, T>, decode: DecodeMode) -> Result<FrameOutput<T>>;

    fn estimates(&self) -> Result<Estimates<T>>;

    fn ops(&self) -> OpCounter;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AlgorithmId {
    KalmanCascadeExact,
    KalmanCascadeApprox,
    KalmanParallelSub,
    KalmanParallelFull,
    Nlms,
    Rls,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 6] = [
        AlgorithmId::KalmanCascadeExact,
        AlgorithmId::KalmanCascadeApprox,
        AlgorithmId::KalmanParallelSub,
        AlgorithmId::KalmanParallelFull,
        AlgorithmId::Nlms,
        AlgorithmId::Rls,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            AlgorithmId::KalmanCascadeExact => "kalman-cascade-exact",
            AlgorithmId::KalmanCascadeApprox => "kalman-cascade-approx",
            AlgorithmId::KalmanParallelSub => "kalman-parallel-sub",
            AlgorithmId::KalmanParallelFull => "kalman-parallel-full",
            AlgorithmId::Nlms => "nlms",
            AlgorithmId::Rls => "rls",
        }
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlgorithmId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Self::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm id `{s}`")))
    }
}

/// Everything needed to construct any canceller for one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct CancellerSetup {
    pub cfg: FrameConfig,
    /// Markov priors expressed in the basis the canceller sees.
    pub params: MarkovParams,
    pub noise: ObservationNoiseModel,
    pub nlms_step: f64,
    /// Per-sample forgetting factor; derived from the Markov model when unset.
    pub rls_lambda: Option<f64>,
    pub rls_delta: f64,
}

impl CancellerSetup {
    pub fn n(&self) -> usize {
        self.params.n()
    }

    /// Forgetting factor `|A_w|^2`, applied once per sample.
    pub fn matched_lambda(&self) -> f64 {
        self.rls_lambda.unwrap_or_else(|| self.params.a_w.abs().powi(2))
    }
}

pub fn build<T: Real>(id: AlgorithmId, setup: &CancellerSetup) -> Result<Box<dyn Canceller<T>>> {
    Ok(match id {
        AlgorithmId::KalmanCascadeExact => Box::new(ExactCascadeKalman::new(setup)?),
        AlgorithmId::KalmanCascadeApprox => Box::new(ApproxCascadeKalman::new(setup)?),
        AlgorithmId::KalmanParallelSub => Box::new(ParallelKalman::new(setup, ParallelMode::Submatrix)?),
        AlgorithmId::KalmanParallelFull => Box::new(ParallelKalman::new(setup, ParallelMode::Full)?),
        AlgorithmId::Nlms => Box::new(Nlms::new(setup)?),
        AlgorithmId::Rls => Box::new(Rls::new(setup)?),
    })
}
