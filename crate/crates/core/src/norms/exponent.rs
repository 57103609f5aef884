//! Lebesgue exponents in `[1, inf]` with exact rational values.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A number in `(0, inf]`, kept exact. Written `inf` on the command line
/// and serialized as the JSON string `"inf"`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Exponent {
    Finite(BigRational),
    Infinite,
}

/// Parse `"3"`, `"0.25"`, `"-1.5e-3"`, or `"2/3"` as an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let bad = || Error::parameter(format!("cannot parse '{text}' as a number"));
    if let Some((n, d)) = t.split_once('/') {
        let n: BigRational = parse_rational(n)?;
        let d: BigRational = parse_rational(d)?;
        if d.is_zero() {
            return Err(Error::parameter(format!("zero denominator in '{text}'")));
        }
        return Ok(n / d);
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all = format!("{int_part}{frac_part}");
    let num = BigInt::from_str(if all.is_empty() { "0" } else { &all }).map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = BigRational::from_integer(num);
    if scale >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -value } else { value })
}

impl Exponent {
    pub fn finite(value: BigRational) -> Result<Self> {
        if !value.is_positive() {
            return Err(Error::parameter("exponent must be positive"));
        }
        Ok(Exponent::Finite(value))
    }

    pub fn integer(n: i64) -> Self {
        Exponent::Finite(BigRational::from_integer(BigInt::from(n)))
    }

    /// Exact value of a finite `f64` (its shortest decimal form).
    pub fn from_f64(v: f64) -> Result<Self> {
        if v == f64::INFINITY {
            return Ok(Exponent::Infinite);
        }
        if !v.is_finite() {
            return Err(Error::parameter("exponent must be a number or inf"));
        }
        Self::finite(parse_rational(&format!("{v:e}"))?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "inf" | "Inf" | "infinity" | "∞" => Ok(Exponent::Infinite),
            t => Self::finite(parse_rational(t)?),
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    pub fn value(&self) -> f64 {
        match self {
            Exponent::Finite(r) => r.to_f64().unwrap_or(f64::NAN),
            Exponent::Infinite => f64::INFINITY,
        }
    }

    /// `1/p`, with `1/inf = 0`.
    pub fn reciprocal(&self) -> BigRational {
        match self {
            Exponent::Finite(r) => r.recip(),
            Exponent::Infinite => BigRational::zero(),
        }
    }

    pub fn reciprocal_f64(&self) -> f64 {
        self.reciprocal().to_f64().unwrap_or(f64::NAN)
    }

    /// Lebesgue exponents must be at least one.
    pub fn check_lebesgue(&self, name: &str) -> Result<()> {
        match self {
            Exponent::Finite(r) if *r < BigRational::one() => {
                Err(Error::parameter(format!("{name} = {self} is below 1")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Infinite => write!(f, "inf"),
            Exponent::Finite(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Exponent::Finite(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Exponent::parse(s)
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Infinite => s.serialize_str("inf"),
            Exponent::Finite(r) if r.is_integer() => match r.numer().to_i64() {
                Some(n) => s.serialize_i64(n),
                None => s.serialize_str(&self.to_string()),
            },
            Exponent::Finite(_) => {
                let v = self.value();
                if Exponent::from_f64(v).as_ref() == Ok(self) {
                    s.serialize_f64(v)
                } else {
                    s.serialize_str(&self.to_string())
                }
            }
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Exponent;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a positive number, a fraction string, or \"inf\"")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Exponent, E> {
                Exponent::parse(v).map_err(E::custom)
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Exponent, E> {
                Exponent::parse(&v.to_string()).map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Exponent, E> {
                Exponent::parse(&v.to_string()).map_err(E::custom)
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Exponent, E> {
                Exponent::from_f64(v).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}
