#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type C = Complex<f64>;
pub type D = DMatrix<C>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cn(rng: &mut impl Rng) -> C {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn cvec(rng: &mut impl Rng, n: usize) -> Vec<C> {
    (0..n).map(|_| cn(rng)).collect()
}

/// Unnormalized DFT matrix.
pub fn dft_matrix(m: usize) -> D {
    D::from_fn(m, m, |j, k| {
        let ang = -2.0 * std::f64::consts::PI * (j * k) as f64 / m as f64;
        C::new(ang.cos(), ang.sin())
    })
}

pub fn idft_matrix(m: usize) -> D {
    dft_matrix(m).adjoint() / C::new(m as f64, 0.0)
}

/// `F Y Y^T F^-1`: projection zeroing the first `l` time samples.
pub fn projection(m: usize, l: usize) -> D {
    let mut keep = D::zeros(m, m);
    for i in l..m {
        keep[(i, i)] = C::new(1.0, 0.0);
    }
    dft_matrix(m) * keep * idft_matrix(m)
}

/// Dense `C_i = F Y Y^T F^-1 diag(phi_i)`.
pub fn constraint(m: usize, l: usize, phi: &[C]) -> D {
    projection(m, l) * D::from_diagonal(&nalgebra::DVector::from_column_slice(phi))
}

pub fn col(v: &[C]) -> D {
    D::from_column_slice(v.len(), 1, v)
}

pub fn to_vec(d: &D) -> Vec<C> {
    d.iter().copied().collect()
}

pub fn max_abs(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn to_dense(m: &sic_core::linalg::CMatrix<f64>) -> D {
    D::from_fn(m.rows(), m.cols(), |r, c| m[(r, c)])
}

pub fn from_dense(d: &D) -> sic_core::linalg::CMatrix<f64> {
    sic_core::linalg::CMatrix::from_fn(d.nrows(), d.ncols(), |r, c| d[(r, c)])
}

/// Random Hermitian positive-definite matrix.
pub fn random_hpd(rng: &mut impl Rng, n: usize, scale: f64) -> D {
    let b = D::from_fn(n, n, |_, _| cn(rng));
    (&b * b.adjoint() + D::identity(n, n)) * C::new(scale / n as f64, 0.0)
}

pub fn rel_err(a: &D, b: &D) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}
