//! Frame buffering and the DFT-domain overlap-save operators.
//!
//! Forward transforms are unnormalized and inverse transforms carry the
//! `1/M` factor, so `idft(dft(x)) == x` and `sum |X|^2 == M * sum |x|^2`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{check_len, Error, Result};
use crate::ops::OpCounter;
use crate::scalar::{czero, Real};

/// Frame length `m`, frame shift `r` and overlap `l = m - r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FrameConfig {
    m: usize,
    r: usize,
}

impl FrameConfig {
    pub fn new(m: usize, r: usize) -> Result<Self> {
        if m == 0 || r == 0 {
            return Err(Error::Config(format!(
                "frame length and shift must be positive (M={m}, R={r})"
            )));
        }
        if r > m {
            return Err(Error::Config(format!("frame shift R={r} exceeds frame length M={m}")));
        }
        Ok(Self { m, r })
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn r(&self) -> usize {
        self.r
    }

    /// Overlap, equal to the FIR length of the channels.
    #[inline]
    pub fn l(&self) -> usize {
        self.m - self.r
    }
}

impl fmt::Display for FrameConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M={} R={} L={}", self.m, self.r, self.l())
    }
}

/// Frame `kappa` (1-based) of a stream whose first element is sample index 1.
///
/// Returns samples `kappa*R - M + 1 ..= kappa*R`; indices before 1 read as zero
/// and indices past the end of `stream` are an error.
pub fn frame_stream<T: Real>(
    stream: &[Complex<T>],
    cfg: FrameConfig,
    kappa: usize,
) -> Result<Vec<Complex<T>>> {
    if kappa < 1 {
        return Err(Error::Config("frame index starts at 1".into()));
    }
    let last = kappa * cfg.r();
    if last > stream.len() {
        return Err(Error::Shape {
            what: "stream samples for frame",
            expected: last,
            got: stream.len(),
        });
    }
    let first = last as isize - cfg.m() as isize + 1;
    Ok((first..=last as isize)
        .map(|k| if k < 1 { czero() } else { stream[k as usize - 1] })
        .collect())
}

/// Last `R` samples of a frame: the alias-free region of overlap-save.
pub fn extract_valid<T: Real>(frame: &[Complex<T>], cfg: FrameConfig) -> Result<Vec<Complex<T>>> {
    check_len("time frame", cfg.m(), frame.len())?;
    Ok(frame[cfg.l()..].to_vec())
}

/// Inverse of [`extract_valid`]: prepend `L` zeros to `R` valid samples.
pub fn pad_front<T: Real>(valid: &[Complex<T>], cfg: FrameConfig) -> Result<Vec<Complex<T>>> {
    check_len("valid samples", cfg.r(), valid.len())?;
    let mut out = vec![czero(); cfg.l()];
    out.extend_from_slice(valid);
    Ok(out)
}

/// Planned length-M transforms for one frame configuration.
#[derive(Clone)]
pub struct Dft<T: Real> {
    cfg: FrameConfig,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
    scratch_len: usize,
}

impl<T: Real> fmt::Debug for Dft<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Dft").field("cfg", &self.cfg).finish()
    }
}

impl<T: Real> Dft<T> {
    pub fn new(cfg: FrameConfig) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(cfg.m());
        let inv = planner.plan_fft_inverse(cfg.m());
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Self {
            cfg,
            fwd,
            inv,
            scratch_len,
        }
    }

    #[inline]
    pub fn cfg(&self) -> FrameConfig {
        self.cfg
    }

    pub fn forward_in_place(&self, buf: &mut [Complex<T>]) {
        debug_assert_eq!(buf.len(), self.cfg.m());
        let mut scratch = vec![czero(); self.scratch_len];
        self.fwd.process_with_scratch(buf, &mut scratch);
    }

    pub fn inverse_in_place(&self, buf: &mut [Complex<T>]) {
        debug_assert_eq!(buf.len(), self.cfg.m());
        let mut scratch = vec![czero(); self.scratch_len];
        self.inv.process_with_scratch(buf, &mut scratch);
        let s = T::one() / T::from_usize(self.cfg.m()).unwrap();
        for z in buf.iter_mut() {
            *z = z.scale(s);
        }
    }

    pub fn dft(&self, frame: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        check_len("time frame", self.cfg.m(), frame.len())?;
        let mut buf = frame.to_vec();
        self.forward_in_place(&mut buf);
        Ok(buf)
    }

    pub fn idft(&self, spec: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        check_len("spectrum frame", self.cfg.m(), spec.len())?;
        let mut buf = spec.to_vec();
        self.inverse_in_place(&mut buf);
        Ok(buf)
    }

    /// Spectrum of `R` valid samples placed after `L` zeros.
    pub fn dft_valid(&self, valid: &[Complex<T>], ops: &mut OpCounter) -> Result<Vec<Complex<T>>> {
        let mut buf = pad_front(valid, self.cfg)?;
        self.forward_in_place(&mut buf);
        ops.transform(self.cfg.m());
        Ok(buf)
    }

    /// Valid time samples of a spectrum: last `R` entries of its inverse.
    pub fn idft_valid(&self, spec: &[Complex<T>], ops: &mut OpCounter) -> Vec<Complex<T>> {
        let mut buf = spec.to_vec();
        self.inverse_in_place(&mut buf);
        ops.transform(self.cfg.m());
        buf.split_off(self.cfg.l())
    }

    /// Overlap-save projection `F Y Y^T F^-1 v` in place: zero the first `L`
    /// time samples. Hermitian and idempotent.
    pub fn project_in_place(&self, v: &mut [Complex<T>], ops: &mut OpCounter) {
        if self.cfg.l() == 0 {
            return;
        }
        self.inverse_in_place(v);
        for z in &mut v[..self.cfg.l()] {
            *z = czero();
        }
        self.forward_in_place(v);
        ops.transform(self.cfg.m());
        ops.transform(self.cfg.m());
    }

    /// `C v` with `C = F Y Y^T F^-1 diag(phi)`, never forming the matrix.
    pub fn apply_constraint(
        &self,
        phi: &[Complex<T>],
        v: &[Complex<T>],
        ops: &mut OpCounter,
    ) -> Result<Vec<Complex<T>>> {
        check_len("basis spectrum", self.cfg.m(), phi.len())?;
        check_len("constraint operand", self.cfg.m(), v.len())?;
        let mut out: Vec<_> = phi.iter().zip(v).map(|(a, b)| a * b).collect();
        ops.mul(self.cfg.m());
        self.project_in_place(&mut out, ops);
        Ok(out)
    }

    /// `P X` for every column of a row-major `M x k` block.
    pub fn project_columns(&self, x: &mut crate::linalg::CMatrix<T>, ops: &mut OpCounter) {
        if self.cfg.l() == 0 {
            return;
        }
        let mut col = vec![czero(); x.rows()];
        for c in 0..x.cols() {
            for (r, z) in col.iter_mut().enumerate() {
                *z = x[(r, c)];
            }
            self.project_in_place(&mut col, ops);
            x.set_column(c, &col);
        }
    }

    /// `X P` for every row of a row-major `k x M` block. Uses `X P = (P X^H)^H`.
    pub fn project_rows(&self, x: &mut crate::linalg::CMatrix<T>, ops: &mut OpCounter) {
        if self.cfg.l() == 0 {
            return;
        }
        let mut row = vec![czero(); x.cols()];
        for r in 0..x.rows() {
            for (z, v) in row.iter_mut().zip(x.row(r)) {
                *z = v.conj();
            }
            self.project_in_place(&mut row, ops);
            for (v, z) in x.row_mut(r).iter_mut().zip(&row) {
                *v = z.conj();
            }
        }
    }
}
