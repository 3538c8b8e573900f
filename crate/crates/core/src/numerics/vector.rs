use std::fmt;
use std::ops::{Add, Index, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::rational::{from_bigint, ExactScalar, Rational, ScalarSeed};
use crate::error::{LatticeError, Result};

/// A column vector of exact rationals.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatVector(Vec<Rational>);

impl RatVector {
    pub fn new(entries: Vec<Rational>) -> Self {
        RatVector(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        RatVector(vec![Rational::zero(); dim])
    }

    pub fn from_i64(entries: &[i64]) -> Self {
        RatVector(entries.iter().map(|&v| Rational::from_integer(v.into())).collect())
    }

    pub fn from_ints(entries: &[BigInt]) -> Self {
        RatVector(entries.iter().map(from_bigint).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<Rational> {
        self.0
    }

    /// Dot product. Panics on a dimension mismatch; use [`inner_product`]
    /// for checked input.
    pub fn dot(&self, other: &RatVector) -> Rational {
        assert_eq!(self.dim(), other.dim(), "dot product of mismatched vectors");
        self.0
            .iter()
            .zip(&other.0)
            .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn norm_sq(&self) -> Rational {
        self.dot(self)
    }

    pub fn scale(&self, c: &Rational) -> RatVector {
        RatVector(self.0.iter().map(|x| x * c).collect())
    }

    /// `self - c * other`
    pub fn sub_scaled(&self, c: &Rational, other: &RatVector) -> RatVector {
        RatVector(self.0.iter().zip(&other.0).map(|(a, b)| a - c * b).collect())
    }

    pub fn sub_scaled_assign(&mut self, c: &Rational, other: &RatVector) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a -= c * b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|x| x.is_integer())
    }

    /// Flips the sign so that the first nonzero entry is positive.
    pub fn canonical_sign(self) -> RatVector {
        match self.0.iter().find(|x| !x.is_zero()) {
            Some(first) if first.is_negative() => -self,
            _ => self,
        }
    }
}

pub fn inner_product(u: &RatVector, v: &RatVector) -> Result<Rational> {
    if u.dim() != v.dim() {
        return Err(LatticeError::shape(format!(
            "inner product of vectors with dimensions {} and {}",
            u.dim(),
            v.dim()
        )));
    }
    Ok(u.dot(v))
}

pub fn norm_sq(v: &RatVector) -> Rational {
    v.norm_sq()
}

impl Index<usize> for RatVector {
    type Output = Rational;

    fn index(&self, i: usize) -> &Rational {
        &self.0[i]
    }
}

impl Add for &RatVector {
    type Output = RatVector;

    fn add(self, rhs: &RatVector) -> RatVector {
        assert_eq!(self.dim(), rhs.dim());
        RatVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &RatVector {
    type Output = RatVector;

    fn sub(self, rhs: &RatVector) -> RatVector {
        assert_eq!(self.dim(), rhs.dim());
        RatVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for RatVector {
    type Output = RatVector;

    fn neg(self) -> RatVector {
        RatVector(self.0.into_iter().map(|x| -x).collect())
    }
}

impl fmt::Debug for RatVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", x.to_canonical())?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for RatVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Serialize for RatVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.dim()))?;
        for x in &self.0 {
            seq.serialize_element(&x.to_canonical())?;
        }
        seq.end()
    }
}

struct VecVisitor;

impl<'de> Visitor<'de> for VecVisitor {
    type Value = RatVector;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an array of exact rationals")
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<RatVector, A::Error> {
        let mut out = Vec::new();
        while let Some(x) = seq.next_element_seed(ScalarSeed::<Rational>::new())? {
            out.push(x);
        }
        Ok(RatVector(out))
    }
}

impl<'de> Deserialize<'de> for RatVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        d.deserialize_seq(VecVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rational::rat;

    #[test]
    fn inner_products() {
        let e1 = RatVector::from_i64(&[1, 0]);
        let e2 = RatVector::from_i64(&[0, 1]);
        assert_eq!(inner_product(&e1, &e2).unwrap(), Rational::zero());
        let v = RatVector::from_i64(&[2, 1]);
        assert_eq!(inner_product(&v, &v).unwrap(), Rational::from_integer(5.into()));
        let w = RatVector::from_i64(&[0, 2]);
        assert_eq!(inner_product(&w, &v).unwrap(), Rational::from_integer(2.into()));
    }

    #[test]
    fn inner_product_shape_error() {
        let a = RatVector::from_i64(&[1, 2]);
        let b = RatVector::from_i64(&[1, 2, 3]);
        assert!(matches!(inner_product(&a, &b), Err(LatticeError::Shape(_))));
    }

    #[test]
    fn squared_norms() {
        assert!(norm_sq(&RatVector::zeros(2)).is_zero());
        assert_eq!(norm_sq(&RatVector::from_i64(&[2, 1])), Rational::from_integer(5.into()));
        let star = RatVector::new(vec![rat(-4, 5), rat(8, 5)]);
        assert_eq!(norm_sq(&star), rat(16, 5));
    }

    #[test]
    fn sign_canonicalization() {
        let v = RatVector::from_i64(&[0, -2, 1]).canonical_sign();
        assert_eq!(v, RatVector::from_i64(&[0, 2, -1]));
    }
}
