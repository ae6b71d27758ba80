//! Adaptive digital self-interference cancellation for full-duplex links.
//!
//! The crate models a cascade nonlinear SI channel (memoryless basis
//! expansion followed by one FIR channel), estimates it with DFT-domain Kalman
//! filters in exact and diagonalized form, and provides parallel-structure
//! baselines (DFT-domain Kalman, NLMS, RLS) behind one [`Canceller`] trait.
//!
//! All numeric code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the precision used by the simulation harness.

pub mod baselines;
pub mod basis;
pub mod canceller;
pub mod channel;
pub mod decoder;
pub mod dft;
pub mod error;
pub mod kalman;
pub mod linalg;
pub mod metrics;
pub mod ops;
pub mod ortho;
pub mod scalar;

pub use canceller::{AlgorithmId, Canceller, CancellerSetup, Estimates, FrameInput, FrameOutput};
pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision complex sample.
pub type C64 = num_complex::Complex<f64>;
/// Single-precision complex sample.
pub type C32 = num_complex::Complex<f32>;

pub type ExactKalman = kalman::ExactCascadeKalman<f64>;
pub type ApproxKalman = kalman::ApproxCascadeKalman<f64>;
pub type ParallelKalman = baselines::ParallelKalman<f64>;
pub type Nlms = baselines::Nlms<f64>;
pub type Rls = baselines::Rls<f64>;
pub type Matrix = linalg::CMatrix<f64>;
pub type Dft = dft::Dft<f64>;
pub type OrthoTransform = ortho::OrthoTransform<f64>;
