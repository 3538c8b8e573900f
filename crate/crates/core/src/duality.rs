//! Dual bases, unimodular triangularization, short bases from full-rank
//! vector sets, and lattice equality.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use serde::{Deserialize, Serialize};

use crate::error::{LatticeError, Result};
use crate::gso::{det_sq, gram_matrix, gram_schmidt, BasisMatrix};
use crate::numerics::rational::from_bigint;
use crate::numerics::{det_int, inverse, IntMatrix, RatMatrix, RatVector, Rational};

/// `U * q = T` with `U` unimodular and `T` upper triangular.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriangularizationResult {
    pub u: IntMatrix,
    pub t: IntMatrix,
}

/// Row reduction state: `t = u * input` and `u * u_inv = I` throughout.
struct RowOps {
    t: IntMatrix,
    u: IntMatrix,
    u_inv: IntMatrix,
}

impl RowOps {
    fn new(q: &IntMatrix) -> Self {
        let m = q.rows();
        RowOps { t: q.clone(), u: IntMatrix::identity(m), u_inv: IntMatrix::identity(m) }
    }

    fn swap(&mut self, a: usize, b: usize) {
        if a != b {
            self.t.swap_rows(a, b);
            self.u.swap_rows(a, b);
            self.u_inv.swap_cols(a, b);
        }
    }

    fn negate(&mut self, a: usize) {
        for j in 0..self.t.cols() {
            self.t[(a, j)] = -&self.t[(a, j)];
        }
        for j in 0..self.u.cols() {
            self.u[(a, j)] = -&self.u[(a, j)];
        }
        for i in 0..self.u_inv.rows() {
            self.u_inv[(i, a)] = -&self.u_inv[(i, a)];
        }
    }

    /// `row a -= c * row b`
    fn sub_multiple(&mut self, a: usize, b: usize, c: &BigInt) {
        for j in 0..self.t.cols() {
            let d = c * &self.t[(b, j)];
            self.t[(a, j)] -= d;
        }
        for j in 0..self.u.cols() {
            let d = c * &self.u[(b, j)];
            self.u[(a, j)] -= d;
        }
        // inverse gains the column operation col b += c * col a
        for i in 0..self.u_inv.rows() {
            let d = c * &self.u_inv[(i, a)];
            self.u_inv[(i, b)] += d;
        }
    }

    /// Echelon form via sign fixing, picking the smallest positive entry,
    /// and subtracting the largest multiples that keep the others
    /// non-negative, until one entry per column remains.
    fn echelonize(&mut self) {
        let (m, n) = (self.t.rows(), self.t.cols());
        let mut r = 0;
        for c in 0..n {
            if r == m {
                break;
            }
            let pivot = loop {
                for i in r..m {
                    if self.t[(i, c)].is_negative() {
                        self.negate(i);
                    }
                }
                // smallest positive entry, lowest row on ties
                let Some(p) = (r..m)
                    .filter(|&i| !self.t[(i, c)].is_zero())
                    .min_by(|&a, &b| self.t[(a, c)].cmp(&self.t[(b, c)]).then(a.cmp(&b)))
                else {
                    break None;
                };
                let mut others = false;
                for i in r..m {
                    if i != p && !self.t[(i, c)].is_zero() {
                        let quot = self.t[(i, c)].div_floor(&self.t[(p, c)]);
                        self.sub_multiple(i, p, &quot);
                        others |= !self.t[(i, c)].is_zero();
                    }
                }
                if !others {
                    break Some(p);
                }
            };
            if let Some(p) = pivot {
                self.swap(p, r);
                r += 1;
            }
        }
    }
}

/// Finds unimodular `U` with `U q` upper triangular using only row swaps,
/// row negations, and adding integer multiples of one row to another.
/// Diagonal entries of the result are non-negative.
pub fn unimodular_triangularize(q: &IntMatrix) -> Result<TriangularizationResult> {
    if !q.is_square() {
        return Err(LatticeError::shape(format!(
            "triangularization needs a square matrix, got {}x{}",
            q.rows(),
            q.cols()
        )));
    }
    let mut ops = RowOps::new(q);
    ops.echelonize();
    Ok(TriangularizationResult { u: ops.u, t: ops.t })
}

/// Row echelon form of a possibly rectangular integer matrix, with the
/// unimodular transform and its inverse.
pub(crate) fn integer_echelon(q: &IntMatrix) -> (IntMatrix, IntMatrix, IntMatrix) {
    let mut ops = RowOps::new(q);
    ops.echelonize();
    (ops.u, ops.u_inv, ops.t)
}

/// Dual basis `D = B (B^T B)^{-1}`.
pub fn dual_basis(b: &BasisMatrix) -> Result<BasisMatrix> {
    let g_inv = inverse(&gram_matrix(b))?.ok_or(LatticeError::RankDeficient { index: 0 })?;
    let d = b.to_matrix().mat_mul(&g_inv)?;
    BasisMatrix::from_columns_unchecked(d.columns())
}

/// Output of [`short_basis_from_set`]: a basis `B` of the input lattice
/// together with the factorization `S = B T`, `T` upper triangular.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShortBasis {
    pub basis: BasisMatrix,
    pub t: IntMatrix,
    /// Unimodular change of basis with `B = B' U^{-1}`.
    pub u: IntMatrix,
}

/// Turns a full-rank set of lattice vectors `S` (as columns) into a basis
/// of `L(b_prime)` whose Gram–Schmidt norms are all at most `max |s_j|`.
pub fn short_basis_from_set(b_prime: &BasisMatrix, s: &RatMatrix) -> Result<ShortBasis> {
    let n = b_prime.rank();
    if s.rows() != b_prime.ambient_dim() || s.cols() != n {
        return Err(LatticeError::shape(format!(
            "expected {} vectors of dimension {}, got a {}x{} matrix",
            n,
            b_prime.ambient_dim(),
            s.rows(),
            s.cols()
        )));
    }
    let set = s.columns();
    let mut q = IntMatrix::zeros(n, n);
    for (j, v) in set.iter().enumerate() {
        let coords = b_prime.coordinates(v)?.ok_or(LatticeError::NotInLattice { index: j })?;
        for (i, c) in coords.iter().enumerate() {
            if !c.is_integer() {
                return Err(LatticeError::NotInLattice { index: j });
            }
            q[(i, j)] = c.to_integer();
        }
    }
    // names the first dependent vector
    BasisMatrix::new(set)?;

    let (u, u_inv, t) = integer_echelon(&q);

    let cols = (0..n)
        .map(|j| {
            let mut v = RatVector::zeros(b_prime.ambient_dim());
            for i in 0..n {
                if !u_inv[(i, j)].is_zero() {
                    v = &v + &b_prime.column(i).scale(&from_bigint(&u_inv[(i, j)]));
                }
            }
            v
        })
        .collect();
    Ok(ShortBasis { basis: BasisMatrix::from_columns_unchecked(cols)?, t, u })
}

/// Whether two bases generate the same lattice: `B1 X = B2` has an integer
/// solution with `det X = +-1`.
pub fn lattice_equal(b1: &BasisMatrix, b2: &BasisMatrix) -> Result<bool> {
    if b1.ambient_dim() != b2.ambient_dim() || b1.rank() != b2.rank() {
        return Err(LatticeError::shape(format!(
            "comparing a rank-{} basis in dimension {} with a rank-{} basis in dimension {}",
            b1.rank(),
            b1.ambient_dim(),
            b2.rank(),
            b2.ambient_dim()
        )));
    }
    Ok(change_of_basis(b1, b2)?.is_some_and(|x| det_int(&x).map(|d| d.abs().is_one()).unwrap_or(false)))
}

/// Integer `X` with `b1 X = b2`, if one exists.
pub fn change_of_basis(b1: &BasisMatrix, b2: &BasisMatrix) -> Result<Option<IntMatrix>> {
    let m = b1.rank();
    let mut x = IntMatrix::zeros(m, b2.rank());
    for (j, v) in b2.columns().iter().enumerate() {
        let Some(coords) = b1.coordinates(v)? else {
            return Ok(None);
        };
        for (i, c) in coords.iter().enumerate() {
            if !c.is_integer() {
                return Ok(None);
            }
            x[(i, j)] = c.to_integer();
        }
    }
    Ok(Some(x))
}

/// Checks `prod_{j>=i} |b*_j|^2 * det(L(d_i, ..., d_{n-1}))^2 = 1` for every
/// `i`, where the dual sublattice covolume comes from Gram–Schmidt on the
/// dual basis in reversed column order.
pub fn suffix_reciprocity_holds(b: &BasisMatrix) -> Result<bool> {
    let gb = gram_schmidt(b)?;
    let gd = gram_schmidt(&dual_basis(b)?.reversed())?;
    let n = b.rank();
    let primal = gb.suffix_products();
    let dual_prefix = gd.prefix_products();
    Ok((0..n).all(|i| &primal[i] * &dual_prefix[n - 1 - i] == Rational::one()))
}

/// The exact identities relating a basis `B` and its dual `D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualChecks {
    /// `B^T D = I`
    pub bt_d_identity: bool,
    /// `Gram(B) Gram(D) = I`
    pub gram_product_identity: bool,
    /// `det_sq(B) det_sq(D) = 1`
    pub det_reciprocity: bool,
    /// the dual of `D` is `B`
    pub double_dual: bool,
    pub suffix_reciprocity: bool,
}

impl DualChecks {
    pub fn all_hold(&self) -> bool {
        self.bt_d_identity
            && self.gram_product_identity
            && self.det_reciprocity
            && self.double_dual
            && self.suffix_reciprocity
    }
}

pub fn dual_identities(b: &BasisMatrix) -> Result<DualChecks> {
    let d = dual_basis(b)?;
    let n = b.rank();
    let id = RatMatrix::identity(n);
    Ok(DualChecks {
        bt_d_identity: b.to_matrix().transpose().mat_mul(&d.to_matrix())? == id,
        gram_product_identity: gram_matrix(b).mat_mul(&gram_matrix(&d))? == id,
        det_reciprocity: det_sq(b) * det_sq(&d) == Rational::one(),
        double_dual: dual_basis(&d)? == *b,
        suffix_reciprocity: suffix_reciprocity_holds(b)?,
    })
}
