//! Memoryless nonlinear basis functions `phi_i(x) = x^p * conj(x)^q`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cone, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub p: u32,
    pub q: u32,
}

impl Monomial {
    pub const fn new(p: u32, q: u32) -> Self {
        Self { p, q }
    }

    pub fn eval<T: Real>(&self, x: Complex<T>) -> Complex<T> {
        let mut out = cone::<T>();
        for _ in 0..self.p {
            out = out * x;
        }
        let xc = x.conj();
        for _ in 0..self.q {
            out = out * xc;
        }
        out
    }

    pub fn degree(&self) -> u32 {
        self.p + self.q
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.p, self.q)
    }
}

impl FromStr for Monomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (p, q) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("basis term `{s}` is not of the form p:q")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<u32>()
                .map_err(|_| Error::Config(format!("basis exponent `{v}` is not a non-negative integer")))
        };
        Ok(Self::new(parse(p)?, parse(q)?))
    }
}

/// Ordered basis set. Term 0 is always the linear path `x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasisSet {
    terms: Vec<Monomial>,
}

impl Default for BasisSet {
    /// `x`, `conj(x)`, `x^2 conj(x)`.
    fn default() -> Self {
        Self {
            terms: vec![Monomial::new(1, 0), Monomial::new(0, 1), Monomial::new(2, 1)],
        }
    }
}

impl BasisSet {
    pub fn new(terms: Vec<Monomial>) -> Result<Self> {
        match terms.first() {
            Some(t) if *t == Monomial::new(1, 0) => {}
            _ => return Err(Error::Config("first basis term must be the linear path 1:0".into())),
        }
        for (i, t) in terms.iter().enumerate() {
            if terms[..i].contains(t) {
                return Err(Error::Config(format!("duplicate basis term {t}")));
            }
        }
        Ok(Self { terms })
    }

    /// Default set extended by odd-order terms `3:2`, `4:3`, ... up to `n` terms.
    pub fn with_order(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("basis order must be at least 1".into()));
        }
        let mut terms = Self::default().terms;
        let mut p = 3;
        while terms.len() < n {
            terms.push(Monomial::new(p, p - 1));
            p += 1;
        }
        terms.truncate(n);
        Self::new(terms)
    }

    pub fn linear() -> Self {
        Self {
            terms: vec![Monomial::new(1, 0)],
        }
    }

    pub fn n(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn eval<T: Real>(&self, x: Complex<T>) -> Vec<Complex<T>> {
        self.terms.iter().map(|t| t.eval(x)).collect()
    }

    /// `N` column signals of a sample block.
    pub fn expand<T: Real>(&self, x: &[Complex<T>]) -> BasisFrame<T> {
        BasisFrame {
            columns: self
                .terms
                .iter()
                .map(|t| x.iter().map(|&v| t.eval(v)).collect())
                .collect(),
        }
    }

    /// `E[phi_i(x) conj(phi_j(x))]` for circular Gaussian `x` of the given power.
    ///
    /// Nonzero only when both terms carry the same phase rotation `p - q`;
    /// then the moment is `E|x|^(2k) = k! * power^k`.
    pub fn gaussian_cross_moment(&self, i: usize, j: usize, power: f64) -> f64 {
        let (a, b) = (self.terms[i], self.terms[j]);
        if a.p as i64 - a.q as i64 != b.p as i64 - b.q as i64 {
            return 0.0;
        }
        let k = a.p + b.q;
        (1..=k).map(f64::from).product::<f64>() * power.powi(k as i32)
    }

    pub fn gaussian_power(&self, i: usize, power: f64) -> f64 {
        self.gaussian_cross_moment(i, i, power)
    }
}

impl fmt::Display for BasisSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(", "))
    }
}

impl FromStr for BasisSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let terms = s
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        Self::new(terms)
    }
}

/// `N` basis signals over one block, column `i` holding `phi_i` of each sample.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisFrame<T: Real> {
    pub columns: Vec<Vec<Complex<T>>>,
}

impl<T: Real> BasisFrame<T> {
    pub fn n(&self) -> usize {
        self.columns.len()
    }

    pub fn len(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sub-block `start..start + len` of every column.
    pub fn window(&self, start: usize, len: usize) -> Self {
        Self {
            columns: self
                .columns
                .iter()
                .map(|c| c[start..start + len].to_vec())
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn default_terms() {
        let b = BasisSet::default();
        let x = cplx(1.0_f64, 2.0);
        let v = b.eval(x);
        assert_eq!(v[0], x);
        assert_eq!(v[1], x.conj());
        assert!((v[2] - x * x.norm_sqr()).norm() < 1e-14);
    }

    #[test]
    fn parse_round_trip() {
        let b: BasisSet = "1:0, 0:1, 2:1".parse().unwrap();
        assert_eq!(b, BasisSet::default());
        assert_eq!(b.to_string(), "1:0, 0:1, 2:1");
        assert!("0:1, 1:0".parse::<BasisSet>().is_err());
        assert!("1:0, 1:0".parse::<BasisSet>().is_err());
        assert!("1:0, x".parse::<BasisSet>().is_err());
    }

    #[test]
    fn extended_orders() {
        let b = BasisSet::with_order(5).unwrap();
        assert_eq!(b.terms()[3], Monomial::new(3, 2));
        assert_eq!(b.terms()[4], Monomial::new(4, 3));
        assert_eq!(BasisSet::with_order(1).unwrap(), BasisSet::linear());
        assert!(BasisSet::with_order(0).is_err());
    }

    #[test]
    fn gaussian_moments() {
        let b = BasisSet::default();
        assert_eq!(b.gaussian_power(0, 1.0), 1.0);
        assert_eq!(b.gaussian_power(1, 1.0), 1.0);
        assert_eq!(b.gaussian_power(2, 1.0), 6.0);
        assert_eq!(b.gaussian_cross_moment(0, 2, 1.0), 2.0);
        assert_eq!(b.gaussian_cross_moment(0, 1, 1.0), 0.0);
        assert_eq!(b.gaussian_power(2, 2.0), 48.0);
    }
}
