//! Arithmetic operation accounting.
//!
//! Every canceller carries an [`OpCounter`] that is incremented alongside the
//! arithmetic it performs. Counts are in complex multiplies and divides; a
//! real-by-complex product counts as one multiply. Transforms are charged the
//! nominal radix-2 cost of `(n / 2) * log2(n)` multiplies and tracked in their
//! own bucket so the per-bin work can be inspected separately.

use std::ops::AddAssign;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounter {
    pub mul: u64,
    pub div: u64,
    pub transform_mul: u64,
    /// Number of times a regularized solve or re-initialization was needed.
    pub fallbacks: u64,
}

impl OpCounter {
    #[inline]
    pub fn mul(&mut self, n: usize) {
        self.mul += n as u64;
    }

    #[inline]
    pub fn div(&mut self, n: usize) {
        self.div += n as u64;
    }

    /// Charge one length-`n` DFT.
    #[inline]
    pub fn transform(&mut self, n: usize) {
        self.transform_mul += transform_cost(n);
    }

    /// Charge an `n x k` by `k x m` dense product.
    #[inline]
    pub fn matmul(&mut self, n: usize, k: usize, m: usize) {
        self.mul += (n * k * m) as u64;
    }

    /// Multiplies and divides outside transforms.
    pub fn arithmetic(&self) -> u64 {
        self.mul + self.div
    }

    pub fn total(&self) -> u64 {
        self.mul + self.div + self.transform_mul
    }
}

impl AddAssign for OpCounter {
    fn add_assign(&mut self, rhs: Self) {
        self.mul += rhs.mul;
        self.div += rhs.div;
        self.transform_mul += rhs.transform_mul;
        self.fallbacks += rhs.fallbacks;
    }
}

/// Nominal radix-2 multiply count for a length-`n` transform.
pub fn transform_cost(n: usize) -> u64 {
    if n <= 1 {
        return 0;
    }
    let log2 = (n as f64).log2();
    ((n as f64 / 2.0) * log2).round() as u64
}
