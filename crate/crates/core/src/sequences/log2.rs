//! Rigorous enclosures of log₂ of positive integers.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

/// Fractional bits produced by the squaring chain.
pub const DEFAULT_PRECISION: u32 = 64;

/// Closed interval of rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enclosure {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Enclosure {
    pub fn point(x: BigRational) -> Enclosure {
        Enclosure { lo: x.clone(), hi: x }
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn add(&self, other: &Enclosure) -> Enclosure {
        Enclosure { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi }
    }

    /// Division by a positive rational.
    pub fn div(&self, d: &BigRational) -> Enclosure {
        Enclosure { lo: &self.lo / d, hi: &self.hi / d }
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }
}

impl Serialize for Enclosure {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Enclosure", 3)?;
        st.serialize_field("lo", &crate::rational::format(&self.lo))?;
        st.serialize_field("hi", &crate::rational::format(&self.hi))?;
        st.serialize_field("width", &crate::rational::format(&self.width()))?;
        st.end()
    }
}

/// Exact log₂ if `x` is a power of two.
pub fn exact_log2(x: &BigUint) -> Option<u64> {
    if x.is_zero() {
        return None;
    }
    let k = x.bits() - 1;
    (x.trailing_zeros() == Some(k)).then_some(k)
}

/// Encloses log₂ x for x ≥ 1 by repeated squaring of x / 2^⌊log₂ x⌋ in
/// fixed point. The lower chain rounds down, the upper chain rounds up, and
/// the upper bound adds 2^−precision for the unexamined bits.
pub fn log2_enclosure(x: &BigUint, precision: u32) -> Enclosure {
    assert!(!x.is_zero(), "log2 of zero");
    if let Some(k) = exact_log2(x) {
        return Enclosure::point(BigRational::from_integer(BigInt::from(k)));
    }
    let k = x.bits() - 1;
    // Fixed point with `frac` fractional bits; precision + 32 guard bits.
    let frac = precision as u64 + 32;
    let one = BigUint::one() << frac;
    let two = &one << 1u32;
    let scaled = if k >= frac {
        // Round down; the upper chain starts one ulp higher.
        x >> (k - frac)
    } else {
        x << (frac - k)
    };
    let exact_start = k < frac || (x.trailing_zeros().unwrap_or(0) >= k - frac);
    let mut lo = scaled.clone();
    let mut hi = if exact_start { scaled } else { scaled + 1u32 };
    let mut lo_bits = BigUint::zero();
    let mut hi_bits = BigUint::zero();
    for _ in 0..precision {
        lo = (&lo * &lo) >> frac;
        let sq = &hi * &hi;
        let mut h = &sq >> frac;
        if (&h << frac) != sq {
            h += 1u32;
        }
        hi = h;
        lo_bits <<= 1;
        hi_bits <<= 1;
        if lo >= two {
            lo >>= 1;
            lo_bits += 1u32;
        }
        if hi >= two {
            // Round the halving up.
            let odd = hi.bit(0);
            hi >>= 1;
            if odd {
                hi += 1u32;
            }
            hi_bits += 1u32;
        }
    }
    let denom = BigInt::one() << precision;
    let base = BigRational::from_integer(BigInt::from(k));
    let lo_r = &base + BigRational::new(BigInt::from(lo_bits), denom.clone());
    let hi_r = &base + BigRational::new(BigInt::from(hi_bits) + 1, denom);
    Enclosure { lo: lo_r, hi: hi_r }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::to_f64;
    use proptest::prelude::*;

    #[test]
    fn powers_of_two_are_exact() {
        for k in [0u32, 1, 5, 100] {
            let e = log2_enclosure(&(BigUint::one() << k), 64);
            assert!(e.is_point());
            assert_eq!(e.lo, BigRational::from_integer(k.into()));
        }
        assert_eq!(exact_log2(&BigUint::from(6u32)), None);
    }

    #[test]
    fn log2_of_three_is_enclosed_tightly() {
        let e = log2_enclosure(&BigUint::from(3u32), 64);
        let v = 3f64.log2();
        assert!(to_f64(&e.lo) <= v && v <= to_f64(&e.hi));
        assert!(to_f64(&e.width()) <= 4.0 / 2f64.powi(64));
    }

    #[test]
    fn large_operand_is_enclosed() {
        let x = (BigUint::one() << 300u32) * 3u32 + 1u32;
        let e = log2_enclosure(&x, 48);
        let v = 300.0 + 3f64.log2();
        assert!(to_f64(&e.lo) <= v + 1e-9 && v - 1e-9 <= to_f64(&e.hi));
        assert!(e.lo < e.hi);
    }

    proptest! {
        #[test]
        fn enclosure_brackets_true_value(x in 1u64..u64::MAX) {
            let e = log2_enclosure(&BigUint::from(x), 40);
            let v = (x as f64).log2();
            prop_assert!(to_f64(&e.lo) <= v + 1e-9);
            prop_assert!(v - 1e-9 <= to_f64(&e.hi));
            prop_assert!(to_f64(&e.width()) <= 3.0 / 2f64.powi(40));
        }
    }
}
