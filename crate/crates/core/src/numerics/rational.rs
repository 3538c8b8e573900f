//! Exact scalars and their canonical text form.
//!
//! A [`Rational`] is always kept in lowest terms with a positive denominator
//! (this is what `num_rational::BigRational` maintains after every
//! operation), so equality is structural. The canonical string is `"p"` when
//! the denominator is one and `"p/q"` otherwise, with an optional leading
//! `-`.

use std::cell::RefCell;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserializer, Serializer};

use crate::error::{LatticeError, Result};

pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_bigint(v: &BigInt) -> Rational {
    Rational::from_integer(v.clone())
}

/// Nearest integer, ties toward +infinity: `floor(x + 1/2)`.
pub fn round_half_up(x: &Rational) -> BigInt {
    let shifted = x + Rational::new(BigInt::one(), BigInt::from(2));
    shifted.floor().to_integer()
}

/// `ln` of a big integer's absolute value; `-inf` for zero.
pub fn ln_bigint(v: &BigInt) -> f64 {
    let mag = v.magnitude();
    let bits = mag.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 1000 {
        return mag.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (mag >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + (shift as f64) * std::f64::consts::LN_2
}

/// `ln |x|`; stays finite for values far outside the `f64` range.
pub fn ln_rational(x: &Rational) -> f64 {
    ln_bigint(x.numer()) - ln_bigint(x.denom())
}

/// Converts a finite float to the exact rational it represents.
pub fn from_f64_exact(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

pub fn to_f64(x: &Rational) -> f64 {
    match x.to_f64() {
        Some(v) if v.is_finite() => v,
        _ => {
            let sign = if x.is_negative() { -1.0 } else { 1.0 };
            sign * ln_rational(x).exp()
        }
    }
}

/// Scalars with a canonical decimal text form.
pub trait ExactScalar: Clone + PartialEq + fmt::Debug + Zero + One {
    fn to_canonical(&self) -> String;

    /// Parses the text form, returning the value and whether the input was
    /// already canonical.
    fn parse_canonical(s: &str) -> Result<(Self, bool)>;

    fn from_i64(v: i64) -> Self;
}

fn parse_digits(s: &str, what: &str) -> Result<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(LatticeError::Parse(format!("invalid {what} {s:?}")));
    }
    Ok(s.parse::<BigInt>().expect("ascii digits"))
}

fn has_redundant_zero(s: &str) -> bool {
    s.len() > 1 && s.starts_with('0')
}

impl ExactScalar for BigInt {
    fn to_canonical(&self) -> String {
        self.to_str_radix(10)
    }

    fn parse_canonical(s: &str) -> Result<(Self, bool)> {
        let (neg, digits) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let mag = parse_digits(digits, "integer")?;
        let canonical = !has_redundant_zero(digits) && !(neg && mag.is_zero());
        Ok((if neg { -mag } else { mag }, canonical))
    }

    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
}

impl ExactScalar for Rational {
    fn to_canonical(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_str_radix(10)
        } else {
            format!(
                "{}/{}",
                self.numer().to_str_radix(10),
                self.denom().to_str_radix(10)
            )
        }
    }

    fn parse_canonical(s: &str) -> Result<(Self, bool)> {
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (num_s, den_s) = match body.split_once('/') {
            Some((n, d)) => (n, Some(d)),
            None => (body, None),
        };
        let num = parse_digits(num_s, "rational numerator")?;
        let den = match den_s {
            Some(d) => parse_digits(d, "rational denominator")?,
            None => BigInt::one(),
        };
        if den.is_zero() {
            return Err(LatticeError::Parse(format!("zero denominator in {s:?}")));
        }
        let mut canonical = !has_redundant_zero(num_s) && !(neg && num.is_zero());
        if let Some(d) = den_s {
            canonical &= !has_redundant_zero(d) && !den.is_one() && num.gcd(&den).is_one();
            canonical &= !num.is_zero();
        }
        let signed = if neg { -num } else { num };
        Ok((Rational::new(signed, den), canonical))
    }

    fn from_i64(v: i64) -> Self {
        int(v)
    }
}

thread_local! {
    static NOTICES: RefCell<Vec<String>> = const { RefCell::new(Vec::new()) };
}

pub(crate) fn push_notice(msg: String) {
    NOTICES.with(|n| n.borrow_mut().push(msg));
}

/// Drains normalization notices recorded on the current thread while
/// deserializing non-canonical scalars.
pub(crate) fn take_notices() -> Vec<String> {
    NOTICES.with(|n| std::mem::take(&mut *n.borrow_mut()))
}

pub(crate) struct ScalarVisitor<T>(std::marker::PhantomData<T>);

impl<T> ScalarVisitor<T> {
    pub(crate) fn new() -> Self {
        ScalarVisitor(std::marker::PhantomData)
    }
}

impl<'de, T: ExactScalar> Visitor<'de> for ScalarVisitor<T> {
    type Value = T;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an exact scalar string such as \"-3/4\" or an integer")
    }

    fn visit_str<E: de::Error>(self, s: &str) -> std::result::Result<T, E> {
        let (value, canonical) = T::parse_canonical(s).map_err(E::custom)?;
        if !canonical {
            push_notice(format!(
                "normalized {s:?} to {:?}",
                value.to_canonical()
            ));
        }
        Ok(value)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<T, E> {
        Ok(T::from_i64(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<T, E> {
        let v = i64::try_from(v).map_err(|_| E::custom("integer out of range, use a string"))?;
        Ok(T::from_i64(v))
    }
}

/// `#[serde(with = "rational_str")]` for a single [`Rational`].
pub mod rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_canonical())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        d.deserialize_any(ScalarVisitor::<Rational>::new())
    }
}

/// `#[serde(with = "opt_rational_str")]` for `Option<Rational>`.
pub mod opt_rational_str {
    use super::*;
    use serde::{Deserialize, Serialize};

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "rational_str")] Rational);

    pub fn serialize<S: Serializer>(
        v: &Option<Rational>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        v.as_ref().map(|r| Wrap(r.clone())).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<Rational>, D::Error> {
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

/// `#[serde(with = "bigint_vec_str")]` for integer coefficient vectors.
pub mod bigint_vec_str {
    use super::*;
    use serde::ser::SerializeSeq;
    use serde::de::SeqAccess;

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&x.to_canonical())?;
        }
        seq.end()
    }

    struct SeqVisitor;

    impl<'de> Visitor<'de> for SeqVisitor {
        type Value = Vec<BigInt>;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("an array of integers")
        }

        fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Self::Value, A::Error> {
            let mut out = Vec::new();
            while let Some(x) = seq.next_element_seed(ScalarSeed::<BigInt>::new())? {
                out.push(x);
            }
            Ok(out)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<BigInt>, D::Error> {
        d.deserialize_seq(SeqVisitor)
    }
}

pub(crate) struct ScalarSeed<T>(std::marker::PhantomData<T>);

impl<T> ScalarSeed<T> {
    pub(crate) fn new() -> Self {
        ScalarSeed(std::marker::PhantomData)
    }
}

impl<'de, T: ExactScalar> de::DeserializeSeed<'de> for ScalarSeed<T> {
    type Value = T;

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> std::result::Result<T, D::Error> {
        d.deserialize_any(ScalarVisitor::<T>::new())
    }
}

pub fn sign_of(x: &Rational) -> Sign {
    x.numer().sign()
}
