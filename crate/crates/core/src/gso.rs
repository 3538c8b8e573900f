//! Lattice bases and their Gram–Schmidt data.
//!
//! A [`BasisMatrix`] stores the basis vectors as columns. All quantities
//! derived here are exact; [`log_profile`] is the one place where values are
//! turned into floats.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{LatticeError, Result};
use crate::numerics::rational::{from_bigint, ln_rational};
use crate::numerics::{det_rat, RatMatrix, RatVector, Rational};

/// An ordered list of linearly independent column vectors.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BasisMatrix {
    columns: Vec<RatVector>,
    ambient_dim: usize,
}

impl BasisMatrix {
    /// Builds a basis, rejecting ragged or linearly dependent columns.
    pub fn new(columns: Vec<RatVector>) -> Result<Self> {
        let b = Self::from_columns_unchecked(columns)?;
        gram_schmidt(&b)?;
        Ok(b)
    }

    /// Checks shapes only; callers guarantee independence.
    pub(crate) fn from_columns_unchecked(columns: Vec<RatVector>) -> Result<Self> {
        let ambient_dim = columns.first().map_or(0, RatVector::dim);
        if columns.is_empty() || ambient_dim == 0 {
            return Err(LatticeError::shape("a basis needs at least one nonempty column"));
        }
        if let Some(i) = columns.iter().position(|c| c.dim() != ambient_dim) {
            return Err(LatticeError::shape(format!(
                "column {i} has dimension {}, expected {ambient_dim}",
                columns[i].dim()
            )));
        }
        if columns.len() > ambient_dim {
            return Err(LatticeError::RankDeficient { index: ambient_dim });
        }
        Ok(BasisMatrix { columns, ambient_dim })
    }

    /// Basis whose vectors are the columns of `m`.
    pub fn from_matrix(m: &RatMatrix) -> Result<Self> {
        Self::new(m.columns())
    }

    /// Convenience constructor taking the basis vectors as integer slices.
    pub fn from_i64_columns(cols: &[&[i64]]) -> Result<Self> {
        Self::new(cols.iter().map(|c| RatVector::from_i64(c)).collect())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_matrix(&RatMatrix::identity(n)).expect("identity is a basis")
    }

    pub fn rank(&self) -> usize {
        self.columns.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.ambient_dim
    }

    pub fn column(&self, i: usize) -> &RatVector {
        &self.columns[i]
    }

    pub fn columns(&self) -> &[RatVector] {
        &self.columns
    }

    pub fn into_columns(self) -> Vec<RatVector> {
        self.columns
    }

    pub fn to_matrix(&self) -> RatMatrix {
        RatMatrix::from_columns(&self.columns).expect("basis shape checked on construction")
    }

    pub fn is_integral(&self) -> bool {
        self.columns.iter().all(RatVector::is_integral)
    }

    /// `B * c` for an integer coefficient vector.
    pub fn lattice_vector(&self, coeffs: &[BigInt]) -> Result<RatVector> {
        if coeffs.len() != self.rank() {
            return Err(LatticeError::shape(format!(
                "{} coefficients for a rank-{} basis",
                coeffs.len(),
                self.rank()
            )));
        }
        let mut out = RatVector::zeros(self.ambient_dim);
        for (c, col) in coeffs.iter().zip(&self.columns) {
            if !c.is_zero() {
                out = &out + &col.scale(&from_bigint(c));
            }
        }
        Ok(out)
    }

    /// Exact coordinates `x` with `B x = v`, or `None` if `v` is outside the
    /// span. Solves the normal equations `(B^T B) x = B^T v` and verifies.
    pub fn coordinates(&self, v: &RatVector) -> Result<Option<Vec<Rational>>> {
        if v.dim() != self.ambient_dim {
            return Err(LatticeError::shape(format!(
                "vector of dimension {} against ambient dimension {}",
                v.dim(),
                self.ambient_dim
            )));
        }
        let rhs: Vec<Rational> = self.columns.iter().map(|c| c.dot(v)).collect();
        let rhs = RatMatrix::new(rhs.len(), 1, rhs)?;
        let Some(x) = crate::numerics::solve(&gram_matrix(self), &rhs)? else {
            return Ok(None);
        };
        let x = x.column(0);
        let mut back = RatVector::zeros(self.ambient_dim);
        for (c, col) in x.iter().zip(&self.columns) {
            back = &back + &col.scale(c);
        }
        Ok((back == *v).then_some(x))
    }

    /// Reverses the column order.
    pub fn reversed(&self) -> BasisMatrix {
        BasisMatrix {
            columns: self.columns.iter().rev().cloned().collect(),
            ambient_dim: self.ambient_dim,
        }
    }

    /// The first `m` columns as a basis of a sublattice.
    pub fn prefix(&self, m: usize) -> BasisMatrix {
        BasisMatrix { columns: self.columns[..m].to_vec(), ambient_dim: self.ambient_dim }
    }
}

impl fmt::Debug for BasisMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, c) in self.columns.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c:?}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for BasisMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_matrix().serialize(s)
    }
}

impl<'de> Deserialize<'de> for BasisMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = RatMatrix::deserialize(d)?;
        BasisMatrix::from_matrix(&m).map_err(serde::de::Error::custom)
    }
}

/// Gram–Schmidt vectors `b*_i`, coefficients `mu[i][j]` for `j < i`, and the
/// squared norms `|b*_i|^2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GsoDecomposition {
    pub star_vectors: Vec<RatVector>,
    pub mu: Vec<Vec<Rational>>,
    pub star_norms_sq: Vec<Rational>,
}

impl GsoDecomposition {
    pub fn dim(&self) -> usize {
        self.star_norms_sq.len()
    }

    /// `mu_{i,j} = <b_i, b*_j> / <b*_j, b*_j>`; zero above the diagonal and
    /// one on it.
    pub fn mu(&self, i: usize, j: usize) -> Rational {
        use std::cmp::Ordering::*;
        match j.cmp(&i) {
            Less => self.mu[i][j].clone(),
            Equal => Rational::one(),
            Greater => Rational::zero(),
        }
    }

    /// `prod_{j < i} |b*_j|^2` for `i = 1..=n`.
    pub fn prefix_products(&self) -> Vec<Rational> {
        let mut acc = Rational::one();
        self.star_norms_sq
            .iter()
            .map(|b| {
                acc = &acc * b;
                acc.clone()
            })
            .collect()
    }

    /// `prod_{j >= i} |b*_j|^2` for `i = 0..n`.
    pub fn suffix_products(&self) -> Vec<Rational> {
        let mut acc = Rational::one();
        let mut out: Vec<Rational> = self
            .star_norms_sq
            .iter()
            .rev()
            .map(|b| {
                acc = &acc * b;
                acc.clone()
            })
            .collect();
        out.reverse();
        out
    }

    pub fn min_star_norm_sq(&self) -> Rational {
        self.star_norms_sq.iter().min().cloned().expect("nonempty basis")
    }
}

/// Classical Gram–Schmidt by sequential projection.
pub fn gram_schmidt(b: &BasisMatrix) -> Result<GsoDecomposition> {
    let m = b.rank();
    let mut star_vectors: Vec<RatVector> = Vec::with_capacity(m);
    let mut star_norms_sq: Vec<Rational> = Vec::with_capacity(m);
    let mut mu = Vec::with_capacity(m);
    for i in 0..m {
        let bi = b.column(i);
        let mut star = bi.clone();
        let mut row = Vec::with_capacity(i);
        for j in 0..i {
            let coeff = bi.dot(&star_vectors[j]) / &star_norms_sq[j];
            star.sub_scaled_assign(&coeff, &star_vectors[j]);
            row.push(coeff);
        }
        let nsq = star.norm_sq();
        if nsq.is_zero() {
            return Err(LatticeError::RankDeficient { index: i });
        }
        star_vectors.push(star);
        star_norms_sq.push(nsq);
        mu.push(row);
    }
    Ok(GsoDecomposition { star_vectors, mu, star_norms_sq })
}

/// `B^T B`.
pub fn gram_matrix(b: &BasisMatrix) -> RatMatrix {
    let m = b.rank();
    let mut g = RatMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = b.column(i).dot(b.column(j));
            g[(i, j)] = v.clone();
            g[(j, i)] = v;
        }
    }
    g
}

/// `det(B^T B)`, the squared covolume, by fraction-free elimination.
pub fn det_sq(b: &BasisMatrix) -> Rational {
    det_rat(&gram_matrix(b)).expect("gram matrix is square")
}

/// `phi(B)^2 = prod_i (|b*_i|^2)^(m - i)` (0-based `i`).
pub fn potential_sq(b: &BasisMatrix) -> Result<Rational> {
    Ok(potential_sq_from_gso(&gram_schmidt(b)?))
}

pub fn potential_sq_from_gso(g: &GsoDecomposition) -> Rational {
    g.prefix_products().iter().fold(Rational::one(), |acc, p| acc * p)
}

/// `ell_i = ln |b*_i|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogProfile {
    pub ells: Vec<f64>,
}

impl LogProfile {
    pub fn min(&self) -> f64 {
        self.ells.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn log_profile(g: &GsoDecomposition) -> LogProfile {
    LogProfile { ells: g.star_norms_sq.iter().map(|b| 0.5 * ln_rational(b)).collect() }
}
