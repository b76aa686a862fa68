//! Parsing and printing of exact rationals as `"p/q"` strings.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot parse {input:?} as an exact rational")]
pub struct ParseRationalError {
    pub input: String,
}

/// Accepts `"p"`, `"p/q"` and `"-p/q"` with decimal integers.
pub fn parse(input: &str) -> Result<BigRational, ParseRationalError> {
    let err = || ParseRationalError { input: input.to_string() };
    let s = input.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| err())?;
    let den: BigInt = den.parse().map_err(|_| err())?;
    if den.is_zero() {
        return Err(err());
    }
    Ok(BigRational::new(num, den))
}

/// Always `"p/q"`, including `"3/1"` and `"0/1"`, so CSV columns parse
/// uniformly.
pub fn format(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn format_u128(num: u128, den: u128) -> String {
    let g = num_integer::gcd(num, den).max(1);
    format!("{}/{}", num / g, den / g)
}

pub fn from_biguint(x: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(x.clone()))
}

pub fn pow2(e: u64) -> BigRational {
    BigRational::from_integer(BigInt::one() << e)
}

pub fn inv_pow2(e: u64) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << e)
}

/// Lossy conversion for display and floating comparisons only.
pub fn to_f64(x: &BigRational) -> f64 {
    let (n, d) = (x.numer(), x.denom());
    let shift = n.bits().max(d.bits()).saturating_sub(1000) as usize;
    let n = (n >> shift).to_string().parse::<f64>().unwrap_or(f64::NAN);
    let d = (d >> shift).to_string().parse::<f64>().unwrap_or(f64::NAN);
    if d == 0.0 {
        if n.is_sign_negative() || x.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    } else {
        n / d
    }
}

/// `serialize_with` adapter for optional rationals.
pub fn serialize_opt<S: serde::Serializer>(x: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_some(&format(v)),
        None => s.serialize_none(),
    }
}

pub mod serde_str {
    //! `#[serde(with = ...)]` adapter storing a rational as a `"p/q"` string.
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["1/2", "3/1", "0/1", "-7/3", "12345678901234567891/3"] {
            assert_eq!(format(&parse(s).unwrap()), s);
        }
        assert_eq!(format(&parse("4/8").unwrap()), "1/2");
        assert_eq!(format(&parse("5").unwrap()), "5/1");
        assert!(parse("1/0").is_err());
        assert!(parse("x").is_err());
    }

    #[test]
    fn to_f64_handles_huge_operands() {
        let x = BigRational::new(BigInt::one(), BigInt::one() << 5000u32);
        assert_eq!(to_f64(&x), 0.0);
        assert!((to_f64(&parse("1/3").unwrap()) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(format_u128(6, 8), "3/4");
    }
}
