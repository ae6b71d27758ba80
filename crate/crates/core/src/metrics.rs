//! Performance metrics: SRINR, system distances, coefficient extraction,
//! the Gaussian rate bound and per-sample complexity.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::ops::OpCounter;
use crate::scalar::{energy, inner, Real};

/// dB values are clipped to this magnitude to keep outputs finite.
pub const DB_CLIP: f64 = 160.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Db {
    pub value: f64,
    pub clipped: bool,
}

/// `10 log10(num / den)` clipped to `[-DB_CLIP, DB_CLIP]`.
pub fn ratio_db(num: f64, den: f64) -> Db {
    let v = 10.0 * (num / den).log10();
    if v.is_nan() {
        return Db { value: 0.0, clipped: true };
    }
    if v > DB_CLIP {
        Db { value: DB_CLIP, clipped: true }
    } else if v < -DB_CLIP {
        Db { value: -DB_CLIP, clipped: true }
    } else {
        Db { value: v, clipped: false }
    }
}

/// Accumulated signal and residual energies for SRINR.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SrinrAccumulator {
    pub signal: f64,
    pub residual: f64,
}

impl SrinrAccumulator {
    pub fn add<T: Real>(&mut self, dh: &[Complex<T>], e: &[Complex<T>]) {
        self.signal += energy(dh).to_f64_lossy();
        self.residual += e
            .iter()
            .zip(dh)
            .map(|(a, b)| (a - b).norm_sqr().to_f64_lossy())
            .sum::<f64>();
    }

    pub fn merge(&mut self, other: &Self) {
        self.signal += other.signal;
        self.residual += other.residual;
    }

    pub fn db(&self) -> Db {
        ratio_db(self.signal, self.residual)
    }
}

/// `10 log10(E|d^h|^2 / E|e - d^h|^2)` over the given samples.
pub fn srinr<T: Real>(dh: &[Complex<T>], e: &[Complex<T>]) -> Db {
    let mut acc = SrinrAccumulator::default();
    acc.add(dh, e);
    acc.db()
}

/// Squared error and squared norm for one system-distance term.
pub fn sysdist_terms<T: Real>(truth: &[Complex<T>], est: &[Complex<T>]) -> Result<(f64, f64)> {
    if truth.len() != est.len() {
        return Err(Error::Shape {
            what: "system distance operands",
            expected: truth.len(),
            got: est.len(),
        });
    }
    let err = truth
        .iter()
        .zip(est)
        .map(|(a, b)| (a - b).norm_sqr().to_f64_lossy())
        .sum();
    Ok((err, energy(truth).to_f64_lossy()))
}

/// `10 log10(||w - w^||^2 / ||w||^2)`.
pub fn sysdist_w<T: Real>(w: &[Complex<T>], w_hat: &[Complex<T>]) -> Result<Db> {
    let (err, norm) = sysdist_terms(w, w_hat)?;
    if norm == 0.0 {
        return Err(Error::Metric("true channel has zero energy".into()));
    }
    Ok(ratio_db(err, norm))
}

/// Per-coefficient distance for a single realization, `i >= 1`.
pub fn sysdist_a<T: Real>(a: &[Complex<T>], a_hat: &[Complex<T>]) -> Result<Vec<Db>> {
    if a.len() != a_hat.len() {
        return Err(Error::Shape {
            what: "coefficient vectors",
            expected: a.len(),
            got: a_hat.len(),
        });
    }
    a.iter()
        .zip(a_hat)
        .skip(1)
        .map(|(t, e)| {
            let p = t.norm_sqr().to_f64_lossy();
            if p == 0.0 {
                return Err(Error::Metric("true coefficient has zero power".into()));
            }
            Ok(ratio_db((t - e).norm_sqr().to_f64_lossy(), p))
        })
        .collect()
}

/// Cascade coefficients from parallel branches: `a^_i = <w_0, w_i> / <w_0, w_0>`.
/// The returned vector has `a^_0 = 1`.
pub fn extract_parallel_coeffs<T: Real>(branches: &[Vec<Complex<T>>]) -> Result<Vec<Complex<T>>> {
    let w0 = branches
        .first()
        .ok_or_else(|| Error::Metric("no branches".into()))?;
    let norm = energy(w0);
    if !(norm > T::zero()) {
        return Err(Error::Metric("linear branch estimate is zero".into()));
    }
    branches
        .iter()
        .map(|wi| {
            if wi.len() != w0.len() {
                return Err(Error::Shape {
                    what: "branch length",
                    expected: w0.len(),
                    got: wi.len(),
                });
            }
            Ok(inner(w0, wi).unscale(norm))
        })
        .collect()
}

/// Gaussian worst-case rate `log2(1 + P_d ||h||^2 / sigma^2)` in bits/sample.
/// A zero residual is clipped at the SNR matching `DB_CLIP`.
pub fn rate(p_d: f64, h_energy: f64, residual_power: f64) -> Result<(f64, bool)> {
    if residual_power < 0.0 || residual_power.is_nan() {
        return Err(Error::Metric(format!("invalid residual power {residual_power}")));
    }
    let signal = p_d * h_energy;
    let floor = signal * 10f64.powf(-DB_CLIP / 10.0);
    if residual_power <= floor {
        if signal == 0.0 {
            return Ok((0.0, true));
        }
        return Ok(((1.0 + signal / floor).log2(), true));
    }
    Ok(((1.0 + signal / residual_power).log2(), false))
}

/// Multiplies plus divides per processed sample, transforms included.
pub fn complexity_report(ops: &OpCounter, samples: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::Metric("no samples processed".into()));
    }
    Ok(ops.total() as f64 / samples as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn srinr_cases() {
        let dh = vec![cplx(1.0_f64, 0.0), cplx(0.0, 1.0)];
        let perfect = srinr(&dh, &dh);
        assert!(perfect.clipped && perfect.value == DB_CLIP);
        let e: Vec<_> = dh.iter().map(|d| d + cplx(0.1, 0.0)).collect();
        assert!((srinr(&dh, &e).value - 20.0).abs() < 1e-9);
    }

    #[test]
    fn sysdist_cases() {
        let w = vec![cplx(1.0_f64, 2.0), cplx(-0.5, 0.25)];
        assert_eq!(sysdist_w(&w, &w).unwrap().value, -DB_CLIP);
        let zero = vec![cplx(0.0, 0.0); 2];
        assert!(sysdist_w(&w, &zero).unwrap().value.abs() < 1e-12);
        let double: Vec<_> = w.iter().map(|v| v * 2.0).collect();
        assert!(sysdist_w(&w, &double).unwrap().value.abs() < 1e-12);
        assert!(sysdist_w(&zero, &w).is_err());
    }

    #[test]
    fn sysdist_a_cases() {
        let a = vec![cplx(1.0_f64, 0.0), cplx(0.3, 0.1)];
        let off = vec![a[0], a[1] * 1.1];
        assert!((sysdist_a(&a, &off).unwrap()[0].value + 20.0).abs() < 1e-9);
        let zero = vec![a[0], cplx(0.0, 0.0)];
        assert!(sysdist_a(&a, &zero).unwrap()[0].value.abs() < 1e-12);
    }

    #[test]
    fn parallel_extraction() {
        let w0 = vec![cplx(1.0_f64, 1.0), cplx(2.0, 0.0)];
        let c = cplx(0.3, -0.7);
        let w1: Vec<_> = w0.iter().map(|v| v * c).collect();
        let w2 = vec![cplx(2.0, 0.0), cplx(-1.0, 1.0)];
        let a = extract_parallel_coeffs(&[w0.clone(), w1, w2]).unwrap();
        assert!((a[0] - cplx(1.0, 0.0)).norm() < 1e-15);
        assert!((a[1] - c).norm() < 1e-15);
        assert!(a[2].norm() < 1e-15);
        assert!(extract_parallel_coeffs(&[vec![cplx(0.0_f64, 0.0)]]).is_err());
    }

    #[test]
    fn rate_values() {
        assert_eq!(rate(1.0, 1.0, 1.0).unwrap(), (1.0, false));
        assert!((rate(1.0, 1.0, 0.01).unwrap().0 - 6.6582).abs() < 1e-3);
        assert!(rate(1.0, 1.0, 1e300).unwrap().0 < 1e-290);
        assert!(rate(1.0, 1.0, 0.0).unwrap().1);
        assert!(rate(1.0, 1.0, 0.5).unwrap().0 > rate(1.0, 1.0, 0.6).unwrap().0);
    }

    #[test]
    fn complexity_requires_samples() {
        let mut ops = OpCounter::default();
        ops.mul(10);
        ops.div(2);
        assert_eq!(complexity_report(&ops, 4).unwrap(), 3.0);
        assert!(complexity_report(&ops, 0).is_err());
    }
}
