//! Exact rational scalars.
//!
//! Every cost, probability and bound in the crate is a [`Rational`]; nothing
//! is ever rounded. Text form is `p/q`, or just `p` when `q = 1`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// `numer / denom`, reduced. Panics on a zero denominator.
pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn parse(text: &str) -> Result<Rational> {
    let trimmed = text.trim();
    let bad = || Error::ParseRational(text.to_string());
    match trimmed.split_once('/') {
        Some((numer, denom)) => {
            let numer: BigInt = numer.trim().parse().map_err(|_| bad())?;
            let denom: BigInt = denom.trim().parse().map_err(|_| bad())?;
            if denom.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(numer, denom))
        }
        None => {
            let numer: BigInt = trimmed.parse().map_err(|_| bad())?;
            Ok(Rational::from_integer(numer))
        }
    }
}

/// Lossy conversion for display and logarithm comparisons only.
pub fn to_f64(value: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    value.to_f64().unwrap_or(f64::NAN)
}

/// Serde adapter writing a rational as a `"p/q"` string and reading either a
/// string or a JSON integer.
pub mod serde_text {
    use serde::de::{self, Deserializer, Visitor};
    use serde::Serializer;
    use std::fmt;

    use super::Rational;

    pub fn serialize<S: Serializer>(value: &Rational, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(value)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Rational, D::Error> {
        deserializer.deserialize_any(RationalVisitor)
    }

    struct RationalVisitor;

    impl<'de> Visitor<'de> for RationalVisitor {
        type Value = Rational;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a rational as \"p/q\" or an integer")
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
            super::parse(v).map_err(E::custom)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
            Ok(super::int(v))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
            Ok(Rational::from_integer(v.into()))
        }
    }

    pub mod vec {
        use serde::de::Deserializer;
        use serde::ser::{SerializeSeq, Serializer};
        use serde::Deserialize;

        use super::Rational;

        #[derive(Deserialize)]
        struct Wrapped(#[serde(with = "super")] Rational);

        pub fn serialize<S: Serializer>(values: &[Rational], serializer: S) -> Result<S::Ok, S::Error> {
            let mut seq = serializer.serialize_seq(Some(values.len()))?;
            for value in values {
                seq.serialize_element(&value.to_string())?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Vec<Rational>, D::Error> {
            let wrapped = Vec::<Wrapped>::deserialize(deserializer)?;
            Ok(wrapped.into_iter().map(|w| w.0).collect())
        }
    }
}
