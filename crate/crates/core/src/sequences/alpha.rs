use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::SequenceError;
use crate::rational::serde_str;

mod serde_vec {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(xs: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        xs.iter().map(crate::rational::format).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| crate::rational::parse(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// The weights α indexed by depth d = −n. Every variant except `Explicit`
/// describes the whole infinite tail, which is what the closed-form verdicts
/// need.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlphaPattern {
    Constant {
        #[serde(with = "serde_str")]
        value: BigRational,
    },
    /// α at depth d is `values[d % len]`.
    Periodic {
        #[serde(with = "serde_vec")]
        values: Vec<BigRational>,
    },
    /// α_n = c / |n|^s (|0| read as 1).
    PowerLaw {
        #[serde(with = "serde_str")]
        c: BigRational,
        s: u32,
    },
    /// Finitely many values; no tail information.
    Explicit {
        #[serde(with = "serde_vec")]
        values: Vec<BigRational>,
    },
}

impl AlphaPattern {
    pub fn constant(value: BigRational) -> AlphaPattern {
        AlphaPattern::Constant { value }
    }

    pub fn validate(&self) -> Result<(), SequenceError> {
        let bad = |x: &BigRational| x.is_negative();
        let ok = match self {
            AlphaPattern::Constant { value } => !bad(value),
            AlphaPattern::Periodic { values } => !values.is_empty() && !values.iter().any(bad),
            AlphaPattern::PowerLaw { c, .. } => !bad(c),
            AlphaPattern::Explicit { values } => !values.iter().any(bad),
        };
        if ok {
            Ok(())
        } else {
            Err(SequenceError::InvalidAlpha(
                "weights must be non-negative and periodic patterns non-empty".into(),
            ))
        }
    }

    /// Raw α at depth `d`; `None` past the end of an explicit list.
    pub fn alpha(&self, d: u64) -> Option<BigRational> {
        match self {
            AlphaPattern::Constant { value } => Some(value.clone()),
            AlphaPattern::Periodic { values } => Some(values[(d % values.len() as u64) as usize].clone()),
            AlphaPattern::PowerLaw { c, s } => {
                let base = BigInt::from(d.max(1));
                Some(c / BigRational::from_integer(num_traits::pow(base, *s as usize)))
            }
            AlphaPattern::Explicit { values } => values.get(d as usize).cloned(),
        }
    }

    /// α̃ = min(max(α, 1/|n+2|²), 1) for n ≤ −3, i.e. depth d ≥ 3 with
    /// |n+2| = d − 2.
    pub fn clamped(&self, d: u64) -> Option<BigRational> {
        let a = self.alpha(d)?;
        if d < 3 {
            return Some(a);
        }
        let floor = BigRational::new(BigInt::one(), BigInt::from(d - 2).pow(2));
        Some(a.max(floor).min(BigRational::one()))
    }

    /// Period of the pattern along the depth axis (1 for aperiodic tails).
    pub fn period(&self) -> u64 {
        match self {
            AlphaPattern::Periodic { values } => values.len() as u64,
            _ => 1,
        }
    }

    fn class_value(&self, residue: u64) -> Option<Option<BigRational>> {
        match self {
            AlphaPattern::Constant { value } => Some(Some(value.clone())),
            AlphaPattern::Periodic { values } => {
                Some(Some(values[(residue % values.len() as u64) as usize].clone()))
            }
            AlphaPattern::PowerLaw { .. } => Some(None),
            AlphaPattern::Explicit { .. } => None,
        }
    }

    /// Whether Σ α̃ over depths ≡ `residue` (mod `modulus`) diverges.
    /// `modulus` must be a multiple of [`Self::period`].
    pub fn class_sum_diverges(&self, residue: u64, modulus: u64) -> Option<bool> {
        debug_assert_eq!(modulus % self.period(), 0);
        match self {
            AlphaPattern::PowerLaw { c, s } => Some(c.is_positive() && *s <= 1),
            _ => self.class_value(residue).map(|v| v.expect("constant class").is_positive()),
        }
    }

    /// Whether liminf α̃ over depths ≡ `residue` (mod `modulus`) is positive.
    /// The clamp floor 1/|n+2|² tends to 0, so this is liminf min(α, 1) > 0.
    pub fn class_liminf_positive(&self, residue: u64, modulus: u64) -> Option<bool> {
        debug_assert_eq!(modulus % self.period(), 0);
        match self {
            AlphaPattern::PowerLaw { c, s } => Some(c.is_positive() && *s == 0),
            _ => self.class_value(residue).map(|v| v.expect("constant class").is_positive()),
        }
    }

    /// A lower bound for inf α̃ over all depths, valid whenever it is
    /// positive; `Some(0)` means liminf α̃ = 0.
    pub fn tail_infimum(&self) -> Option<BigRational> {
        let one = BigRational::one();
        match self {
            AlphaPattern::Constant { value } => Some(value.clone().min(one)),
            AlphaPattern::Periodic { values } => values.iter().min().map(|v| v.clone().min(one)),
            AlphaPattern::PowerLaw { c, s } => {
                Some(if *s == 0 { c.clone().min(one) } else { BigRational::zero() })
            }
            AlphaPattern::Explicit { .. } => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            AlphaPattern::Constant { value } => format!("constant {}", crate::rational::format(value)),
            AlphaPattern::Periodic { values } => format!(
                "periodic by depth [{}]",
                values.iter().map(crate::rational::format).collect::<Vec<_>>().join(", ")
            ),
            AlphaPattern::PowerLaw { c, s } => format!("{}/|n|^{s}", crate::rational::format(c)),
            AlphaPattern::Explicit { values } => format!("explicit ({} values)", values.len()),
        }
    }
}
