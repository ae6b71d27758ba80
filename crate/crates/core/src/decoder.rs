//! Oracle decoders bracketing real decoding performance.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::error::{check_len, Error, Result};
use crate::scalar::{czero, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DecodeMode {
    /// Nothing is decoded; the SoI stays in the adaptation error.
    #[default]
    None,
    /// The filtered SoI is known exactly and removed before adaptation.
    Perfect,
}

impl DecodeMode {
    /// Reconstructed SoI for one block of error samples.
    ///
    /// Only the block length of `e` is used; the decoder never looks at
    /// canceller state.
    pub fn decode<T: Real>(
        &self,
        e: &[Complex<T>],
        oracle: Option<&[Complex<T>]>,
    ) -> Result<Vec<Complex<T>>> {
        match self {
            DecodeMode::None => Ok(vec![czero(); e.len()]),
            DecodeMode::Perfect => {
                let dh = oracle.ok_or_else(|| {
                    Error::Config("perfect decoding requires the filtered SoI oracle".into())
                })?;
                check_len("decoder oracle", e.len(), dh.len())?;
                Ok(dh.to_vec())
            }
        }
    }
}

impl fmt::Display for DecodeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecodeMode::None => "none",
            DecodeMode::Perfect => "perfect",
        })
    }
}

impl FromStr for DecodeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "none" => Ok(DecodeMode::None),
            "perfect" => Ok(DecodeMode::Perfect),
            other => Err(Error::Config(format!("unknown decode mode `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn modes() {
        let e = vec![cplx(1.0_f64, 1.0); 3];
        let dh = vec![cplx(0.5_f64, -1.0); 3];
        assert_eq!(DecodeMode::None.decode(&e, Some(&dh)).unwrap(), vec![czero(); 3]);
        assert_eq!(DecodeMode::Perfect.decode(&e, Some(&dh)).unwrap(), dh);
        assert!(DecodeMode::Perfect.decode(&e, None).is_err());
        assert!(DecodeMode::Perfect.decode(&e, Some(&dh[..2])).is_err());
    }

    #[test]
    fn parse() {
        assert_eq!("perfect".parse::<DecodeMode>().unwrap(), DecodeMode::Perfect);
        assert_eq!(DecodeMode::None.to_string(), "none");
        assert!("partial".parse::<DecodeMode>().is_err());
    }
}
