//! Threshold parameters (`delta`, `eta`, `epsilon`, `c`).
//!
//! A threshold is either an exact rational, compared against integer counts
//! without rounding, or a computed real such as `K^(-eta/2)`, compared with a
//! one-sided slack toward inclusion.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::INCLUSION_SLACK;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Threshold {
    Exact(Ratio<u64>),
    Real(f64),
}

impl Threshold {
    pub fn ratio(num: u64, den: u64) -> Self {
        Threshold::Exact(Ratio::new(num, den))
    }

    pub fn one() -> Self {
        Threshold::Exact(Ratio::one())
    }

    pub fn value(&self) -> f64 {
        match *self {
            Threshold::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
            Threshold::Real(v) => v,
        }
    }

    /// Rejects values outside `(0, 1]`.
    pub fn check_unit_interval(&self, name: &'static str) -> Result<()> {
        let ok = match *self {
            Threshold::Exact(r) => !r.is_zero() && r <= Ratio::one(),
            Threshold::Real(v) => v > 0.0 && v <= 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::ParameterOutOfRange {
                name,
                value: self.value(),
                range: "(0, 1]",
            })
        }
    }

    /// `count >= threshold * scale`, exactly for rationals.
    pub fn admits(&self, count: u64, scale: u64) -> bool {
        match *self {
            Threshold::Exact(r) => {
                count as u128 * *r.denom() as u128 >= *r.numer() as u128 * scale as u128
            }
            Threshold::Real(v) => count as f64 >= v * scale as f64 - INCLUSION_SLACK,
        }
    }

    /// `1 - t`.
    pub fn complement(&self) -> Self {
        match *self {
            Threshold::Exact(r) if r <= Ratio::one() => Threshold::Exact(Ratio::one() - r),
            Threshold::Exact(r) => Threshold::Real(1.0 - *r.numer() as f64 / *r.denom() as f64),
            Threshold::Real(v) => Threshold::Real(1.0 - v),
        }
    }

    /// Exact rational value; reals convert through their binary expansion.
    pub fn to_big_rational(&self) -> BigRational {
        match *self {
            Threshold::Exact(r) => BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom())),
            Threshold::Real(v) => BigRational::from_float(v).unwrap_or_else(BigRational::zero),
        }
    }
}

impl From<f64> for Threshold {
    fn from(v: f64) -> Self {
        Threshold::Real(v)
    }
}

impl From<Ratio<u64>> for Threshold {
    fn from(r: Ratio<u64>) -> Self {
        Threshold::Exact(r)
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Exact(r) if *r.denom() == 1 => write!(f, "{}", r.numer()),
            Threshold::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Threshold::Real(v) => write!(f, "{v}"),
        }
    }
}

/// Parses `"2/3"`, `"1"`, `"0.25"` (all exact) or any other float literal (real).
impl FromStr for Threshold {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: u64 = n.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
            let d: u64 = d.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
            if d == 0 {
                return Err(format!("zero denominator in {s:?}"));
            }
            return Ok(Threshold::ratio(n, d));
        }
        if let Ok(n) = s.parse::<u64>() {
            return Ok(Threshold::ratio(n, 1));
        }
        if let Some((int, frac)) = s.split_once('.') {
            let digits_ok = !frac.is_empty()
                && frac.len() <= 18
                && frac.bytes().all(|b| b.is_ascii_digit())
                && int.bytes().all(|b| b.is_ascii_digit());
            if digits_ok {
                let den = 10u64.pow(frac.len() as u32);
                let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| format!("bad number {s:?}"))? };
                let frac: u64 = frac.parse().map_err(|_| format!("bad number {s:?}"))?;
                if let Some(num) = int.checked_mul(den).and_then(|v| v.checked_add(frac)) {
                    return Ok(Threshold::ratio(num, den));
                }
            }
        }
        s.parse::<f64>()
            .map(Threshold::Real)
            .map_err(|_| format!("bad number {s:?}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_exact_and_real() {
        assert_eq!("2/3".parse::<Threshold>().unwrap(), Threshold::ratio(2, 3));
        assert_eq!("0.25".parse::<Threshold>().unwrap(), Threshold::ratio(1, 4));
        assert_eq!("1".parse::<Threshold>().unwrap(), Threshold::one());
        assert_eq!("1e-1".parse::<Threshold>().unwrap(), Threshold::Real(0.1));
        assert!("1/0".parse::<Threshold>().is_err());
        assert!("abc".parse::<Threshold>().is_err());
    }

    #[test]
    fn exact_admission_has_no_rounding() {
        let t = Threshold::ratio(2, 3);
        assert!(t.admits(2, 3));
        assert!(!t.admits(1, 3));
        assert!(Threshold::ratio(1, 3).admits(1, 3));
    }

    #[test]
    fn unit_interval() {
        assert!(Threshold::ratio(0, 1).check_unit_interval("eta").is_err());
        assert!(Threshold::ratio(3, 2).check_unit_interval("eta").is_err());
        assert!(Threshold::Real(1.0).check_unit_interval("eta").is_ok());
        assert_eq!(Threshold::ratio(1, 4).complement(), Threshold::ratio(3, 4));
    }
}
