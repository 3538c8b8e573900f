//! Size reduction, LLL, and exact shortest-vector enumeration.

mod enumerate;

pub(crate) use enumerate::closest_coefficients;
pub use enumerate::{svp_enumerate, DEFAULT_SVP_CAP};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{LatticeError, Result};
use crate::gso::{gram_schmidt, potential_sq_from_gso, BasisMatrix, GsoDecomposition};
use crate::numerics::rational::{from_bigint, rational_str, round_half_up};
use crate::numerics::{rat, RatVector, Rational};

/// LLL parameter `delta`, strictly between 1/4 and 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LllParams {
    #[serde(with = "rational_str")]
    delta: Rational,
}

impl LllParams {
    pub fn new(delta: Rational) -> Result<Self> {
        if delta <= rat(1, 4) || delta >= Rational::one() {
            return Err(LatticeError::InvalidParameter(format!(
                "delta must lie in (1/4, 1), got {delta}"
            )));
        }
        Ok(LllParams { delta })
    }

    pub fn delta(&self) -> &Rational {
        &self.delta
    }
}

impl Default for LllParams {
    fn default() -> Self {
        LllParams { delta: rat(3, 4) }
    }
}

/// Bookkeeping from one LLL run.
///
/// `potential_sq_history[s]` is `phi^2` right after swap `s`; the value
/// before the first swap is `initial_potential_sq`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReductionTrace {
    pub swap_count: u64,
    pub size_reduction_count: u64,
    #[serde(with = "rational_str")]
    pub initial_potential_sq: Rational,
    #[serde(with = "rational_vec_str")]
    pub potential_sq_history: Vec<Rational>,
}

impl ReductionTrace {
    /// Every swap shrinks `phi^2` by a factor strictly below `delta`.
    pub fn potential_drops_hold(&self, p: &LllParams) -> bool {
        let mut prev = &self.initial_potential_sq;
        for cur in &self.potential_sq_history {
            if *cur >= p.delta() * prev {
                return false;
            }
            prev = cur;
        }
        true
    }
}

mod rational_vec_str {
    use crate::numerics::rational::rational_str;
    use crate::numerics::Rational;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "rational_str")] Rational);

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|r| Wrap(r.clone())).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        Ok(Vec::<Wrap>::deserialize(d)?.into_iter().map(|w| w.0).collect())
    }
}

/// Working state of one reduction: basis columns plus Gram–Schmidt
/// coefficients and squared norms, updated in place.
struct LllState {
    cols: Vec<RatVector>,
    mu: Vec<Vec<Rational>>,
    bsq: Vec<Rational>,
    potential_sq: Rational,
    trace: ReductionTrace,
}

impl LllState {
    fn new(b: &BasisMatrix) -> Result<Self> {
        let g = gram_schmidt(b)?;
        let potential_sq = potential_sq_from_gso(&g);
        Ok(LllState {
            cols: b.columns().to_vec(),
            mu: g.mu,
            bsq: g.star_norms_sq,
            trace: ReductionTrace {
                swap_count: 0,
                size_reduction_count: 0,
                initial_potential_sq: potential_sq.clone(),
                potential_sq_history: Vec::new(),
            },
            potential_sq,
        })
    }

    /// Size-reduces column `k` against `k-1, ..., 0`.
    fn reduce_column(&mut self, k: usize) {
        for j in (0..k).rev() {
            let r = round_half_up(&self.mu[k][j]);
            if r.is_zero() {
                continue;
            }
            let rq = from_bigint(&r);
            let (head, tail) = self.cols.split_at_mut(k);
            tail[0].sub_scaled_assign(&rq, &head[j]);
            let (mu_head, mu_tail) = self.mu.split_at_mut(k);
            for l in 0..j {
                let d = &rq * &mu_head[j][l];
                mu_tail[0][l] -= d;
            }
            mu_tail[0][j] -= &rq;
            self.trace.size_reduction_count += 1;
        }
    }

    fn lovasz_fails(&self, k: usize, delta: &Rational) -> bool {
        let m = &self.mu[k][k - 1];
        self.bsq[k] < (delta - m * m) * &self.bsq[k - 1]
    }

    /// Exchanges columns `k-1` and `k` and updates the Gram–Schmidt data.
    fn swap(&mut self, k: usize) {
        let n = self.cols.len();
        let m = self.mu[k][k - 1].clone();
        let bn = &self.bsq[k] + &m * &m * &self.bsq[k - 1];
        let ratio = &bn / &self.bsq[k - 1];
        let new_mu = &m * &self.bsq[k - 1] / &bn;
        let new_bk = &self.bsq[k - 1] * &self.bsq[k] / &bn;
        self.bsq[k - 1] = bn;
        self.bsq[k] = new_bk;
        self.cols.swap(k - 1, k);
        let (head, tail) = self.mu.split_at_mut(k);
        for j in 0..k - 1 {
            std::mem::swap(&mut head[k - 1][j], &mut tail[0][j]);
        }
        self.mu[k][k - 1] = new_mu;
        for i in k + 1..n {
            let t = self.mu[i][k].clone();
            let updated = &self.mu[i][k - 1] - &m * &t;
            self.mu[i][k - 1] = t + &self.mu[k][k - 1] * &updated;
            self.mu[i][k] = updated;
        }
        self.potential_sq = &self.potential_sq * ratio;
        self.trace.swap_count += 1;
        self.trace.potential_sq_history.push(self.potential_sq.clone());
    }

    fn run(&mut self, delta: &Rational) {
        let n = self.cols.len();
        let mut k = 1;
        while k < n {
            self.reduce_column(k);
            if self.lovasz_fails(k, delta) {
                self.swap(k);
                k = (k - 1).max(1);
            } else {
                k += 1;
            }
        }
    }

    fn into_basis(self) -> (BasisMatrix, ReductionTrace) {
        let b = BasisMatrix::from_columns_unchecked(self.cols).expect("shape preserved by reduction");
        (b, self.trace)
    }
}

/// Makes every `|mu_{i,j}| <= 1/2` by integer column operations, leaving
/// the Gram–Schmidt vectors unchanged.
pub fn size_reduce(b: &BasisMatrix) -> Result<BasisMatrix> {
    let mut st = LllState::new(b)?;
    for k in 1..b.rank() {
        st.reduce_column(k);
    }
    Ok(st.into_basis().0)
}

/// LLL reduction with parameter `p.delta`.
///
/// Uses the working-index formulation: after a swap at position `k` the
/// index steps back to `k-1` instead of restarting the scan.
pub fn lll_reduce(b: &BasisMatrix, p: &LllParams) -> Result<(BasisMatrix, ReductionTrace)> {
    let mut st = LllState::new(b)?;
    st.run(p.delta());
    Ok(st.into_basis())
}

/// `b_1` of the LLL-reduced basis; `|b_1|^2 <= 2^(n-1) lambda_1^2`.
pub fn svp_approx(b: &BasisMatrix, p: &LllParams) -> Result<RatVector> {
    let (reduced, _) = lll_reduce(b, p)?;
    Ok(reduced.column(0).clone())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeCheck {
    pub i: usize,
    pub j: usize,
    #[serde(with = "rational_str")]
    pub mu: Rational,
    pub holds: bool,
}

/// Lovász condition between columns `index` and `index + 1`:
/// `lhs = |b*_{i+1} + mu_{i+1,i} b*_i|^2`, `rhs = delta |b*_i|^2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LovaszCheck {
    pub index: usize,
    #[serde(with = "rational_str")]
    pub lhs: Rational,
    #[serde(with = "rational_str")]
    pub rhs: Rational,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducednessReport {
    pub size: Vec<SizeCheck>,
    pub lovasz: Vec<LovaszCheck>,
}

impl ReducednessReport {
    pub fn size_reduced(&self) -> bool {
        self.size.iter().all(|c| c.holds)
    }

    pub fn lovasz_holds(&self) -> bool {
        self.lovasz.iter().all(|c| c.holds)
    }

    pub fn is_reduced(&self) -> bool {
        self.size_reduced() && self.lovasz_holds()
    }

    pub fn first_lovasz_failure(&self) -> Option<usize> {
        self.lovasz.iter().find(|c| !c.holds).map(|c| c.index)
    }
}

pub fn is_lll_reduced(b: &BasisMatrix, p: &LllParams) -> Result<ReducednessReport> {
    Ok(reducedness_of(&gram_schmidt(b)?, p))
}

pub fn reducedness_of(g: &GsoDecomposition, p: &LllParams) -> ReducednessReport {
    let half = rat(1, 2);
    let n = g.dim();
    let mut size = Vec::new();
    for i in 1..n {
        for j in 0..i {
            let mu = g.mu[i][j].clone();
            let holds = num_traits::Signed::abs(&mu) <= half;
            size.push(SizeCheck { i, j, mu, holds });
        }
    }
    let lovasz = (0..n.saturating_sub(1))
        .map(|i| {
            let m = &g.mu[i + 1][i];
            let lhs = &g.star_norms_sq[i + 1] + m * m * &g.star_norms_sq[i];
            let rhs = p.delta() * &g.star_norms_sq[i];
            LovaszCheck { index: i, holds: lhs >= rhs, lhs, rhs }
        })
        .collect();
    ReducednessReport { size, lovasz }
}

/// Consecutive Gram–Schmidt norms of a reduced basis drop by at most a
/// factor `delta - 1/4`: `|b*_{i+1}|^2 >= (delta - 1/4) |b*_i|^2`.
pub fn profile_drop_holds(g: &GsoDecomposition, p: &LllParams) -> bool {
    let factor = p.delta() - rat(1, 4);
    g.star_norms_sq.windows(2).all(|w| w[1] >= &factor * &w[0])
}

/// Prefix covolumes never grow under reduction:
/// `prod_{j<=i} |b*_j|^2 (after) <= prod_{j<=i} |b*_j|^2 (before)` for all `i`.
pub fn prefix_volumes_shrink(before: &GsoDecomposition, after: &GsoDecomposition) -> bool {
    before
        .prefix_products()
        .iter()
        .zip(after.prefix_products())
        .all(|(b, a)| a <= *b)
}

/// Squared Lovász bound used by `svp_approx`: `2^(n-1) * lambda1_sq`.
pub fn svp_approx_bound_sq(n: usize, lambda1_sq: &Rational) -> Rational {
    from_bigint(&(BigInt::one() << n.saturating_sub(1))) * lambda1_sq
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::int;

    fn basis(cols: &[&[i64]]) -> BasisMatrix {
        BasisMatrix::from_i64_columns(cols).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(LllParams::new(rat(1, 4)).is_err());
        assert!(LllParams::new(int(1)).is_err());
        assert!(LllParams::new(rat(99, 100)).is_ok());
        assert_eq!(LllParams::default().delta(), &rat(3, 4));
    }

    #[test]
    fn size_reduction_examples() {
        assert_eq!(size_reduce(&BasisMatrix::identity(2)).unwrap(), BasisMatrix::identity(2));
        assert_eq!(size_reduce(&basis(&[&[1, 2], &[0, 5]])).unwrap(), basis(&[&[1, 2], &[-2, 1]]));
        let fig = basis(&[&[2, 1], &[0, 2]]);
        assert_eq!(size_reduce(&fig).unwrap(), fig);
    }

    #[test]
    fn size_reduction_keeps_star_vectors() {
        let b = basis(&[&[3, 1, 4], &[15, 9, 26], &[53, 58, 97]]);
        let r = size_reduce(&b).unwrap();
        let (g0, g1) = (gram_schmidt(&b).unwrap(), gram_schmidt(&r).unwrap());
        assert_eq!(g0.star_vectors, g1.star_vectors);
        assert!(reducedness_of(&g1, &LllParams::default()).size_reduced());
    }

    #[test]
    fn lll_examples() {
        let p = LllParams::default();
        let (r, t) = lll_reduce(&BasisMatrix::identity(3), &p).unwrap();
        assert_eq!(r, BasisMatrix::identity(3));
        assert_eq!(t.swap_count, 0);

        let (r, t) = lll_reduce(&basis(&[&[4, 0], &[-2, 1]]), &p).unwrap();
        assert_eq!(r, basis(&[&[-2, 1], &[0, 2]]));
        assert_eq!(t.swap_count, 1);
        assert_eq!(t.initial_potential_sq, int(16 * 16));
        assert_eq!(t.potential_sq_history, vec![int(5 * 16)]);

        let fig = basis(&[&[2, 1], &[0, 2]]);
        let (r, t) = lll_reduce(&fig, &p).unwrap();
        assert_eq!(r, fig);
        assert_eq!(t.swap_count, 0);
    }

    #[test]
    fn reducedness_examples() {
        let p = LllParams::default();
        assert!(is_lll_reduced(&BasisMatrix::identity(2), &p).unwrap().is_reduced());
        let rep = is_lll_reduced(&basis(&[&[4, 0], &[-2, 1]]), &p).unwrap();
        assert!(rep.size_reduced());
        assert_eq!(rep.first_lovasz_failure(), Some(0));
        assert_eq!((rep.lovasz[0].lhs.clone(), rep.lovasz[0].rhs.clone()), (int(5), int(12)));
        assert!(is_lll_reduced(&basis(&[&[2, 1], &[0, 2]]), &p).unwrap().is_reduced());
    }

    #[test]
    fn approx_svp_examples() {
        let p = LllParams::default();
        assert_eq!(svp_approx(&BasisMatrix::identity(2), &p).unwrap(), RatVector::from_i64(&[1, 0]));
        assert_eq!(svp_approx(&basis(&[&[4, 0], &[-2, 1]]), &p).unwrap(), RatVector::from_i64(&[-2, 1]));
        let b1 = svp_approx(&basis(&[&[2, 1], &[0, 2]]), &p).unwrap();
        assert_eq!(b1, RatVector::from_i64(&[2, 1]));
        assert!(b1.norm_sq() <= svp_approx_bound_sq(2, &int(4)));
    }

    /// The in-place Gram–Schmidt updates must agree with a from-scratch
    /// recomputation after every size reduction and swap.
    #[test]
    fn incremental_updates_match_recomputation() {
        let b = basis(&[
            &[105, 821, 404, 328],
            &[881, 667, 644, 927],
            &[181, 483, 87, 500],
            &[893, 834, 732, 441],
        ]);
        let p = LllParams::new(rat(99, 100)).unwrap();
        let mut st = LllState::new(&b).unwrap();
        let n = st.cols.len();
        let check = |st: &LllState| {
            let g = gram_schmidt(&BasisMatrix::from_columns_unchecked(st.cols.clone()).unwrap()).unwrap();
            assert_eq!(g.mu, st.mu);
            assert_eq!(g.star_norms_sq, st.bsq);
            assert_eq!(potential_sq_from_gso(&g), st.potential_sq);
        };
        let mut k = 1;
        let mut steps = 0;
        while k < n {
            st.reduce_column(k);
            check(&st);
            if st.lovasz_fails(k, p.delta()) {
                st.swap(k);
                check(&st);
                k = (k - 1).max(1);
            } else {
                k += 1;
            }
            steps += 1;
        }
        assert!(steps > n);
        assert!(st.trace.swap_count > 0);
    }

    #[test]
    fn rational_bases_reduce() {
        let b = BasisMatrix::new(vec![
            RatVector::new(vec![rat(1, 3), rat(5, 2)]),
            RatVector::new(vec![rat(7, 3), rat(1, 1)]),
        ])
        .unwrap();
        let p = LllParams::default();
        let (r, t) = lll_reduce(&b, &p).unwrap();
        assert!(is_lll_reduced(&r, &p).unwrap().is_reduced());
        assert!(t.potential_drops_hold(&p));
    }
}
