//! Reference cancellers in parallel structure.

mod nlms;
mod parallel_kalman;
mod rls;

pub use nlms::{Nlms, NlmsFilter};
pub use parallel_kalman::{ParallelKalman, ParallelMode};
pub use rls::{Rls, RlsFilter};

use num_complex::Complex;

use crate::basis::BasisFrame;
use crate::canceller::Estimates;
use crate::error::Result;
use crate::metrics::extract_parallel_coeffs;
use crate::scalar::{cone, czero, energy, Real};

/// Cascade view of parallel branch estimates.
pub(crate) fn parallel_estimates<T: Real>(branches: Vec<Vec<Complex<T>>>) -> Result<Estimates<T>> {
    let n = branches.len();
    let a = if energy(&branches[0]) > T::zero() {
        extract_parallel_coeffs(&branches)?
    } else {
        let mut a = vec![czero(); n];
        a[0] = cone();
        a
    };
    Ok(Estimates {
        w: branches.into_iter().next().unwrap_or_default(),
        a,
    })
}

/// Stacked regressor `[phi_i(x_{p-l})]` ordered branch-major, `l = 0..L`.
pub(crate) fn stacked_regressor<T: Real>(basis: &BasisFrame<T>, p: usize, l: usize, out: &mut [Complex<T>]) {
    for (i, col) in basis.columns.iter().enumerate() {
        for k in 0..l {
            out[i * l + k] = if k <= p { col[p - k] } else { czero() };
        }
    }
}
