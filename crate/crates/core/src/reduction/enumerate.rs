//! Depth-first lattice-point enumeration over Gram–Schmidt coordinates.
//!
//! Coordinates are chosen from the last basis vector down to the first. At
//! each level the admissible integers form an interval around the projected
//! center; it is walked outward from the nearest integer and cut off as soon
//! as the exact partial squared distance exceeds the current bound. Ties at
//! the optimum are all collected.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{lll_reduce, LllParams};
use crate::error::{LatticeError, Result};
use crate::gso::{gram_schmidt, BasisMatrix, GsoDecomposition};
use crate::numerics::rational::{from_bigint, round_half_up};
use crate::numerics::{RatVector, Rational};

pub const DEFAULT_SVP_CAP: usize = 10;

struct Search<'a> {
    mu: &'a [Vec<Rational>],
    bsq: &'a [Rational],
    target: Option<&'a [Rational]>,
    exclude_zero: bool,
    bound: Rational,
    best: Vec<Vec<BigInt>>,
    x: Vec<BigInt>,
}

impl Search<'_> {
    fn center(&self, level: usize) -> Rational {
        let mut c = self.target.map_or_else(Rational::zero, |t| t[level].clone());
        for l in level + 1..self.bsq.len() {
            if !self.x[l].is_zero() {
                c -= &self.mu[l][level] * from_bigint(&self.x[l]);
            }
        }
        c
    }

    /// Tries `x[level] = start, start + step, ...` until the bound is exceeded.
    fn walk(&mut self, level: usize, partial: &Rational, c: &Rational, start: BigInt, step: i64) {
        let mut xi = start;
        loop {
            let d = from_bigint(&xi) - c;
            let total = partial + &d * &d * &self.bsq[level];
            if total > self.bound {
                break;
            }
            self.x[level] = xi.clone();
            if level == 0 {
                self.leaf(total);
            } else {
                self.visit(level - 1, &total);
            }
            xi += step;
        }
    }

    fn visit(&mut self, level: usize, partial: &Rational) {
        let c = self.center(level);
        let x0 = round_half_up(&c);
        self.walk(level, partial, &c, x0.clone(), 1);
        self.walk(level, partial, &c, x0 - BigInt::one(), -1);
        self.x[level] = BigInt::zero();
    }

    fn leaf(&mut self, total: Rational) {
        if self.exclude_zero && self.x.iter().all(Zero::is_zero) {
            return;
        }
        if total < self.bound {
            self.bound = total;
            self.best.clear();
        }
        self.best.push(self.x.clone());
    }
}

fn run_search(
    g: &GsoDecomposition,
    target: Option<&[Rational]>,
    exclude_zero: bool,
    bound: Rational,
) -> (Rational, Vec<Vec<BigInt>>) {
    let n = g.dim();
    let mut s = Search {
        mu: &g.mu,
        bsq: &g.star_norms_sq,
        target,
        exclude_zero,
        bound,
        best: Vec::new(),
        x: vec![BigInt::zero(); n],
    };
    s.visit(n - 1, &Rational::zero());
    (s.bound, s.best)
}

/// All coefficient vectors (with respect to the basis `g` was computed from)
/// whose lattice points minimize the distance to `t` within the span,
/// searching only points with in-span squared distance at most `bound`.
/// Returns the optimal in-span squared distance alongside.
pub(crate) fn closest_coefficients(
    g: &GsoDecomposition,
    t: &RatVector,
    bound: Rational,
) -> (Rational, Vec<Vec<BigInt>>) {
    let coords: Vec<Rational> = g
        .star_vectors
        .iter()
        .zip(&g.star_norms_sq)
        .map(|(s, b)| t.dot(s) / b)
        .collect();
    run_search(g, Some(&coords), false, bound)
}

/// Ordering key preferring vectors that use earlier input basis vectors:
/// absolute coefficients read from the last position backwards, then the
/// signed coefficients in the same order.
type PreferenceKey = (Vec<Rational>, Vec<Rational>);

fn preference_key(coords: &[Rational]) -> PreferenceKey {
    let abs = coords.iter().rev().map(Signed::abs).collect();
    let signed = coords.iter().rev().cloned().collect();
    (abs, signed)
}

/// Exact shortest nonzero vector of `L(b)`.
///
/// The returned vector has its first nonzero coordinate positive. When
/// several vectors attain the minimum, the one whose coefficient vector in
/// the input basis is smallest under [`preference_key`] wins, so `Z^n`
/// yields `e_1`.
pub fn svp_enumerate(b: &BasisMatrix, cap: usize) -> Result<RatVector> {
    if b.ambient_dim() > cap {
        return Err(LatticeError::CapExceeded { dim: b.ambient_dim(), cap });
    }
    let (reduced, _) = lll_reduce(b, &LllParams::default())?;
    let g = gram_schmidt(&reduced)?;
    let initial = reduced.column(0).norm_sq();
    let (_, best) = run_search(&g, None, true, initial);

    let mut candidates: Vec<RatVector> = Vec::new();
    for c in &best {
        let v = reduced.lattice_vector(c).expect("rank matches").canonical_sign();
        if !candidates.contains(&v) {
            candidates.push(v);
        }
    }
    let mut winner: Option<(PreferenceKey, RatVector)> = None;
    for v in candidates {
        let coords = b.coordinates(&v)?.expect("enumerated vector lies in the lattice");
        let k = preference_key(&coords);
        if winner.as_ref().is_none_or(|(wk, _)| k < *wk) {
            winner = Some((k, v));
        }
    }
    Ok(winner.expect("a nonzero lattice vector always exists").1)
}
