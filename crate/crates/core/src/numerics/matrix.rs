use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::rational::{from_bigint, ExactScalar, Rational, ScalarSeed};
use super::vector::RatVector;
use crate::error::{LatticeError, Result};

/// Dense row-major matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type RatMatrix = Matrix<Rational>;
pub type IntMatrix = Matrix<BigInt>;

impl<T: Clone + Zero + One> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(LatticeError::shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(LatticeError::shape("ragged matrix rows"));
        }
        Matrix::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    pub fn map<U, F: Fn(&T) -> U>(&self, f: F) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }
}

impl<T> Matrix<T>
where
    T: Clone + Zero + One,
    for<'a> &'a T: Mul<&'a T, Output = T>,
    T: Add<T, Output = T>,
{
    pub fn mat_mul(&self, other: &Matrix<T>) -> Result<Matrix<T>> {
        if self.cols != other.rows {
            return Err(LatticeError::shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = T::zero();
                for k in 0..self.cols {
                    acc = acc + &self[(i, k)] * &other[(k, j)];
                }
                out[(i, j)] = acc;
            }
        }
        Ok(out)
    }
}

pub fn mat_mul<T>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>>
where
    T: Clone + Zero + One + Add<T, Output = T>,
    for<'a> &'a T: Mul<&'a T, Output = T>,
{
    a.mat_mul(b)
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl IntMatrix {
    pub fn from_i64_rows(rows: &[&[i64]]) -> Result<Self> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect())
    }

    pub fn to_rational(&self) -> RatMatrix {
        self.map(from_bigint)
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols.min(i)).all(|j| self[(i, j)].is_zero()))
    }
}

impl RatMatrix {
    pub fn from_i64_rows(rows: &[&[i64]]) -> Result<Self> {
        Ok(IntMatrix::from_i64_rows(rows)?.to_rational())
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[RatVector]) -> Result<Self> {
        let n = cols.first().map_or(0, RatVector::dim);
        if cols.iter().any(|c| c.dim() != n) {
            return Err(LatticeError::shape("columns of unequal dimension"));
        }
        let mut m = Matrix::zeros(n, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for i in 0..n {
                m[(i, j)] = c[i].clone();
            }
        }
        if n == 0 || cols.is_empty() {
            return Err(LatticeError::shape("empty matrix"));
        }
        Ok(m)
    }

    pub fn column_vector(&self, j: usize) -> RatVector {
        RatVector::new(self.column(j))
    }

    pub fn columns(&self) -> Vec<RatVector> {
        (0..self.cols).map(|j| self.column_vector(j)).collect()
    }

    /// Returns the integer matrix if every entry is an integer.
    pub fn to_integer(&self) -> Option<IntMatrix> {
        if self.data.iter().all(|x| x.is_integer()) {
            Some(self.map(|x| x.to_integer()))
        } else {
            None
        }
    }

    pub fn mul_vector(&self, v: &RatVector) -> Result<RatVector> {
        if v.dim() != self.cols {
            return Err(LatticeError::shape(format!(
                "matrix with {} columns applied to a vector of dimension {}",
                self.cols,
                v.dim()
            )));
        }
        Ok(RatVector::new(
            (0..self.rows)
                .map(|i| {
                    self.row(i)
                        .iter()
                        .zip(v.entries())
                        .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
                })
                .collect(),
        ))
    }

    /// Scales each row by the lcm of its denominators, returning the integer
    /// rows and the per-row scale factors.
    fn clear_row_denominators(&self) -> (Vec<Vec<BigInt>>, Vec<BigInt>) {
        let mut rows = Vec::with_capacity(self.rows);
        let mut scales = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let l = self.row(i).iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            rows.push(self.row(i).iter().map(|x| (x * from_bigint(&l)).to_integer()).collect());
            scales.push(l);
        }
        (rows, scales)
    }
}

/// Fraction-free (Bareiss) forward elimination on `rows`, pivoting only in
/// the first `pivot_cols` columns. Returns the pivot column per eliminated
/// row, and the sign of the row permutation applied.
///
/// After return the matrix is in echelon form; every division performed is
/// exact.
fn bareiss(rows: &mut [Vec<BigInt>], pivot_cols: usize) -> (Vec<usize>, bool) {
    let m = rows.len();
    let width = rows.first().map_or(0, Vec::len);
    let mut prev = BigInt::one();
    let mut pivots = Vec::new();
    let mut odd = false;
    let mut r = 0;
    for c in 0..pivot_cols {
        if r == m {
            break;
        }
        let Some(p) = (r..m).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        if p != r {
            rows.swap(p, r);
            odd = !odd;
        }
        for i in r + 1..m {
            for j in c + 1..width {
                let v = &rows[i][j] * &rows[r][c] - &rows[i][c] * &rows[r][j];
                rows[i][j] = v / &prev;
            }
            rows[i][c] = BigInt::zero();
        }
        prev = rows[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    (pivots, odd)
}

pub fn det_int(m: &IntMatrix) -> Result<BigInt> {
    if !m.is_square() {
        return Err(LatticeError::shape(format!(
            "determinant of a non-square {}x{} matrix",
            m.rows, m.cols
        )));
    }
    let n = m.rows;
    let mut rows = m.to_rows();
    let (pivots, odd) = bareiss(&mut rows, n);
    if pivots.len() < n {
        return Ok(BigInt::zero());
    }
    let d = rows[n - 1][n - 1].clone();
    Ok(if odd { -d } else { d })
}

pub fn det_rat(m: &RatMatrix) -> Result<Rational> {
    if !m.is_square() {
        return Err(LatticeError::shape(format!(
            "determinant of a non-square {}x{} matrix",
            m.rows, m.cols
        )));
    }
    let (rows, scales) = m.clear_row_denominators();
    let d = det_int(&Matrix::from_rows(rows)?)?;
    let s = scales.iter().fold(BigInt::one(), |acc, x| acc * x);
    Ok(Rational::new(d, s))
}

/// Rank over the rationals.
pub fn rank_rat(m: &RatMatrix) -> usize {
    let (mut rows, _) = m.clear_row_denominators();
    bareiss(&mut rows, m.cols).0.len()
}

pub fn is_unimodular(u: &IntMatrix) -> Result<bool> {
    let d = det_int(u)?;
    Ok(d.abs().is_one())
}

/// Solves `a * x = b` exactly for square nonsingular `a`. Returns `None` if
/// `a` is singular.
pub fn solve(a: &RatMatrix, b: &RatMatrix) -> Result<Option<RatMatrix>> {
    if !a.is_square() || a.rows != b.rows {
        return Err(LatticeError::shape(format!(
            "cannot solve a {}x{} system against {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let n = a.rows;
    let mut aug = a.clone();
    aug.cols += b.cols;
    aug.data = (0..n).flat_map(|i| a.row(i).iter().chain(b.row(i)).cloned().collect::<Vec<_>>()).collect();
    let (mut rows, _) = aug.clear_row_denominators();
    let (pivots, _) = bareiss(&mut rows, n);
    if pivots.len() < n {
        return Ok(None);
    }
    let mut x = RatMatrix::zeros(n, b.cols);
    for k in 0..b.cols {
        for i in (0..n).rev() {
            let mut acc = from_bigint(&rows[i][n + k]);
            for j in i + 1..n {
                acc -= from_bigint(&rows[i][j]) * &x[(j, k)];
            }
            x[(i, k)] = acc / from_bigint(&rows[i][i]);
        }
    }
    Ok(Some(x))
}

pub fn inverse(a: &RatMatrix) -> Result<Option<RatMatrix>> {
    solve(a, &RatMatrix::identity(a.rows))
}

impl<T: ExactScalar> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(ExactScalar::to_canonical).collect();
            write!(f, "{}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl<T: ExactScalar> Serialize for Matrix<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.rows))?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(ExactScalar::to_canonical).collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

struct RowSeed<T>(std::marker::PhantomData<T>);

impl<'de, T: ExactScalar> serde::de::DeserializeSeed<'de> for RowSeed<T> {
    type Value = Vec<T>;

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> std::result::Result<Vec<T>, D::Error> {
        struct RowVisitor<T>(std::marker::PhantomData<T>);
        impl<'de, T: ExactScalar> Visitor<'de> for RowVisitor<T> {
            type Value = Vec<T>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a matrix row")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Vec<T>, A::Error> {
                let mut out = Vec::new();
                while let Some(x) = seq.next_element_seed(ScalarSeed::<T>::new())? {
                    out.push(x);
                }
                Ok(out)
            }
        }
        d.deserialize_seq(RowVisitor(std::marker::PhantomData))
    }
}

impl<'de, T: ExactScalar> Deserialize<'de> for Matrix<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct MatVisitor<T>(std::marker::PhantomData<T>);
        impl<'de, T: ExactScalar> Visitor<'de> for MatVisitor<T> {
            type Value = Matrix<T>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a row-major array of arrays")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Matrix<T>, A::Error> {
                let mut rows = Vec::new();
                while let Some(r) = seq.next_element_seed(RowSeed::<T>(std::marker::PhantomData))? {
                    rows.push(r);
                }
                Matrix::from_rows(rows).map_err(serde::de::Error::custom)
            }
        }
        d.deserialize_seq(MatVisitor(std::marker::PhantomData))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rational::{int, rat};

    fn imat(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64_rows(rows).unwrap()
    }

    fn qmat(rows: &[&[i64]]) -> RatMatrix {
        RatMatrix::from_i64_rows(rows).unwrap()
    }

    #[test]
    fn products() {
        let i2 = RatMatrix::identity(2);
        assert_eq!(mat_mul(&i2, &i2).unwrap(), i2);
        let a = qmat(&[&[2, 0], &[1, 2]]);
        assert_eq!(mat_mul(&a, &i2).unwrap(), a);
        let l = qmat(&[&[1, 0], &[-2, 1]]);
        let q = qmat(&[&[2, 1], &[4, 3]]);
        assert_eq!(mat_mul(&l, &q).unwrap(), qmat(&[&[2, 1], &[0, 1]]));
    }

    #[test]
    fn product_shape_error() {
        let a = qmat(&[&[1, 2, 3]]);
        assert!(matches!(mat_mul(&a, &a), Err(LatticeError::Shape(_))));
    }

    #[test]
    fn unimodularity() {
        assert!(is_unimodular(&IntMatrix::identity(3)).unwrap());
        assert!(is_unimodular(&imat(&[&[1, 0], &[-2, 1]])).unwrap());
        assert!(!is_unimodular(&imat(&[&[2, 0], &[0, 1]])).unwrap());
        assert!(is_unimodular(&imat(&[&[1, 2, 3]])).is_err());
    }

    #[test]
    fn determinants() {
        assert_eq!(det_int(&imat(&[&[0, 1], &[1, 0]])).unwrap(), BigInt::from(-1));
        assert_eq!(det_int(&imat(&[&[2, 3, 1], &[4, 1, -3], &[0, 5, 2]])).unwrap(), BigInt::from(30));
        assert_eq!(det_int(&imat(&[&[1, 2], &[2, 4]])).unwrap(), BigInt::zero());
        let m = RatMatrix::from_rows(vec![vec![rat(1, 2), int(0)], vec![rat(3, 7), rat(2, 3)]]).unwrap();
        assert_eq!(det_rat(&m).unwrap(), rat(1, 3));
    }

    #[test]
    fn solving() {
        let a = qmat(&[&[5, 2], &[2, 4]]);
        let inv = inverse(&a).unwrap().unwrap();
        assert_eq!(inv, RatMatrix::from_rows(vec![vec![rat(1, 4), rat(-1, 8)], vec![rat(-1, 8), rat(5, 16)]]).unwrap());
        assert_eq!(mat_mul(&a, &inv).unwrap(), RatMatrix::identity(2));
        assert!(inverse(&qmat(&[&[1, 2], &[2, 4]])).unwrap().is_none());
    }

    #[test]
    fn ranks() {
        assert_eq!(rank_rat(&qmat(&[&[1, 2], &[2, 4], &[0, 0]])), 1);
        assert_eq!(rank_rat(&qmat(&[&[0, 1], &[1, 0], &[3, 3]])), 2);
    }

    #[test]
    fn json_is_row_major_strings() {
        let m = RatMatrix::from_rows(vec![vec![rat(1, 2), int(-3)], vec![int(0), rat(-5, 4)]]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"[["1/2","-3"],["0","-5/4"]]"#);
        let back: RatMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<RatMatrix>(r#"[["1"],["1","2"]]"#).is_err());
    }
}
