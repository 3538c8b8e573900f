//! q-ary lattices `L_A = qZ^n + A Z^k` and the quantitative bounds on their
//! reduced bases.
//!
//! Everything about the basis is exact. The bound formulas involve `ln` and
//! square roots and are evaluated in `f64`; comparisons against them use
//! [`BOUND_TOLERANCE`].

use num_bigint::BigInt;
use num_traits::Zero;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::duality::integer_echelon;
use crate::error::{LatticeError, Result};
use crate::gso::{gram_schmidt, log_profile, BasisMatrix, GsoDecomposition, LogProfile};
use crate::numerics::rational::{ln_rational, opt_rational_str, rational_str, to_f64};
use crate::numerics::{rank_rat, rat, IntMatrix, RatVector, Rational};
use crate::reduction::{lll_reduce, svp_enumerate, LllParams, ReductionTrace};

/// Slack allowed when comparing exact quantities against float bounds.
pub const BOUND_TOLERANCE: f64 = 1e-9;

/// Parameters of `L_A = qZ^n + A Z^k`; `a` is `n x k`, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QaryLatticeSpec {
    pub n: usize,
    pub q: u64,
    pub k: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<i64>>,
}

impl QaryLatticeSpec {
    pub fn new(n: usize, q: u64, k: usize, a: Vec<Vec<i64>>) -> Self {
        QaryLatticeSpec { n, q, k, a }
    }

    pub fn a_matrix(&self) -> IntMatrix {
        IntMatrix::from_rows(self.a.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect())
            .expect("shape checked by validate_spec")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationReport {
    /// The input with every entry of `A` reduced into `[0, q)`.
    pub normalized: QaryLatticeSpec,
    pub entries_reduced: usize,
    pub q_is_prime: bool,
    /// Column rank of `A` over the rationals; equals the rank over `Z`.
    pub rank_over_rationals: usize,
    /// Column rank of `A mod q`, computed when `q` is prime.
    pub rank_mod_q: Option<usize>,
    /// `q e_1` is always a lattice vector, so `lambda_1 <= q`.
    pub lambda1_at_most_q: bool,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.warnings.is_empty()
    }
}

fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= q {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Column rank of an integer matrix modulo a prime `p`.
fn rank_mod_prime(a: &[Vec<i64>], p: u64) -> usize {
    let p = p as u128;
    let mut m: Vec<Vec<u128>> = a
        .iter()
        .map(|r| r.iter().map(|&v| (v as i128).rem_euclid(p as i128) as u128).collect())
        .collect();
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let pow = |mut b: u128, mut e: u128| {
        let mut acc = 1u128;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        acc
    };
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(piv, rank);
        let inv = pow(m[rank][c], p - 2);
        let pivot_row = m[rank].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != rank && row[c] != 0 {
                let f = row[c] * inv % p;
                for (x, &y) in row[c..].iter_mut().zip(&pivot_row[c..]) {
                    *x = (*x + p - f * y % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn validate_spec(spec: &QaryLatticeSpec) -> Result<ValidationReport> {
    let QaryLatticeSpec { n, q, k, ref a } = *spec;
    if n == 0 {
        return Err(LatticeError::shape("n must be positive"));
    }
    if k == 0 || k > n {
        return Err(LatticeError::shape(format!("k must satisfy 1 <= k <= n = {n}, got {k}")));
    }
    if q < 2 {
        return Err(LatticeError::InvalidParameter(format!("q must be at least 2, got {q}")));
    }
    if i64::try_from(q).is_err() {
        return Err(LatticeError::InvalidParameter(format!("q = {q} does not fit in a signed 64-bit integer")));
    }
    if a.len() != n || a.iter().any(|r| r.len() != k) {
        return Err(LatticeError::shape(format!("A must be {n}x{k} (row-major)")));
    }
    let qi = q as i64;
    let mut entries_reduced = 0;
    let reduced: Vec<Vec<i64>> = a
        .iter()
        .map(|r| {
            r.iter()
                .map(|&v| {
                    let m = v.rem_euclid(qi);
                    if m != v {
                        entries_reduced += 1;
                    }
                    m
                })
                .collect()
        })
        .collect();
    let normalized = QaryLatticeSpec { n, q, k, a: reduced };
    let rank_over_rationals = rank_rat(&normalized.a_matrix().to_rational());
    let q_is_prime = is_prime(q);
    let rank_mod_q = q_is_prime.then(|| rank_mod_prime(&normalized.a, q));

    let mut warnings = Vec::new();
    if entries_reduced > 0 {
        warnings.push(format!("{entries_reduced} entries of A were reduced into [0, {q})"));
    }
    if let Some(r) = rank_mod_q {
        if r < k {
            warnings.push(format!("rank of A mod q is {r} < k = {k}"));
        }
    }
    if rank_over_rationals < k {
        warnings.push(format!("rank of A over the rationals is {rank_over_rationals} < k = {k}"));
    }
    Ok(ValidationReport {
        normalized,
        entries_reduced,
        q_is_prime,
        rank_over_rationals,
        rank_mod_q,
        lambda1_at_most_q: true,
        warnings,
    })
}

/// Basis of `L_A` in canonical lower-triangular form: column `j` is zero
/// above row `j`, the diagonal is positive, and every entry left of the
/// diagonal in row `i` lies in `[0, H[i][i])`.
pub fn qary_basis(spec: &QaryLatticeSpec) -> Result<BasisMatrix> {
    let report = validate_spec(spec)?;
    let spec = &report.normalized;
    let (n, k) = (spec.n, spec.k);
    let q = BigInt::from(spec.q);

    // generators [A | qI] as rows of the transpose
    let mut gens = IntMatrix::zeros(n + k, n);
    for i in 0..n {
        for j in 0..k {
            gens[(j, i)] = BigInt::from(spec.a[i][j]);
        }
        gens[(k + i, i)] = q.clone();
    }
    let (_, _, echelon) = integer_echelon(&gens);
    debug_assert!((n..n + k).all(|r| echelon.row(r).iter().all(Zero::is_zero)));
    let mut h = IntMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] = echelon[(j, i)].clone();
        }
    }
    for i in 0..n {
        for j in 0..i {
            let f = h[(i, j)].div_floor(&h[(i, i)]);
            if !f.is_zero() {
                for r in i..n {
                    let d = &f * &h[(r, i)];
                    h[(r, j)] -= d;
                }
            }
        }
    }
    BasisMatrix::from_columns_unchecked(h.to_rational().columns())
}

/// One suffix of the Gram–Schmidt profile:
/// `prod_{j >= i} |b*_j|^2 <= q^(2(n - i))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuffixCheck {
    pub i: usize,
    #[serde(with = "rational_str")]
    pub product_sq: Rational,
    #[serde(with = "rational_str")]
    pub bound_sq: Rational,
    pub holds: bool,
    /// `(n - i) ln q - sum_{j >= i} ell_j`
    pub log_margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuffixReport {
    pub suffixes: Vec<SuffixCheck>,
}

impl SuffixReport {
    pub fn all_hold(&self) -> bool {
        self.suffixes.iter().all(|s| s.holds)
    }

    pub fn min_log_margin(&self) -> f64 {
        self.suffixes.iter().map(|s| s.log_margin).fold(f64::INFINITY, f64::min)
    }
}

/// Checks every Gram–Schmidt suffix volume of a basis of a lattice that
/// contains `qZ^n`.
pub fn fact24_check(b: &BasisMatrix, q: u64) -> Result<SuffixReport> {
    Ok(fact24_from_gso(&gram_schmidt(b)?, q))
}

pub fn fact24_from_gso(g: &GsoDecomposition, q: u64) -> SuffixReport {
    let n = g.dim();
    let q_sq = Rational::from_integer(BigInt::from(q) * BigInt::from(q));
    let ln_q = (q as f64).ln();
    let suffixes = g
        .suffix_products()
        .into_iter()
        .enumerate()
        .map(|(i, product_sq)| {
            let bound_sq = num_traits::pow(q_sq.clone(), n - i);
            let log_margin = (n - i) as f64 * ln_q - 0.5 * ln_rational(&product_sq);
            SuffixCheck { i, holds: product_sq <= bound_sq, product_sq, bound_sq, log_margin }
        })
        .collect();
    SuffixReport { suffixes }
}

/// Which `delta'` to plug into the bound formulas.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaPrime {
    /// `delta' = 1 / sqrt(delta)`
    #[default]
    Standard,
    /// `delta' = 1 / sqrt(delta - 1/4)`, which the Lovász condition
    /// guarantees for every size-reduced basis.
    Conservative,
}

impl DeltaPrime {
    /// `ln delta'`
    pub fn ln(self, delta: &Rational) -> f64 {
        let d = match self {
            DeltaPrime::Standard => delta.clone(),
            DeltaPrime::Conservative => delta - rat(1, 4),
        };
        -0.5 * ln_rational(&d)
    }
}

fn sqrt_2k_lnq_lndp(spec: &QaryLatticeSpec, p: &LllParams, dp: DeltaPrime) -> f64 {
    (2.0 * spec.k as f64 * (spec.q as f64).ln() * dp.ln(p.delta())).sqrt()
}

/// `d = ceil(sqrt(2k ln q / ln delta'))`
pub fn block_length(spec: &QaryLatticeSpec, p: &LllParams) -> u64 {
    let lndp = DeltaPrime::Standard.ln(p.delta());
    (2.0 * spec.k as f64 * (spec.q as f64).ln() / lndp).sqrt().ceil().max(1.0) as u64
}

/// `ln lambda_1 - sqrt(2k ln delta' ln q)`, a lower bound on `min_i ell_i`.
pub fn prop25_floor(spec: &QaryLatticeSpec, p: &LllParams, lambda1_sq: &Rational) -> f64 {
    prop25_floor_with(spec, p, lambda1_sq, DeltaPrime::Standard)
}

pub fn prop25_floor_with(spec: &QaryLatticeSpec, p: &LllParams, lambda1_sq: &Rational, dp: DeltaPrime) -> f64 {
    0.5 * ln_rational(lambda1_sq) - sqrt_2k_lnq_lndp(spec, p, dp)
}

/// `(1/2) lambda_1 exp(-sqrt(2k ln q ln delta'))`
pub fn decoding_radius(spec: &QaryLatticeSpec, p: &LllParams, lambda1_sq: &Rational) -> f64 {
    decoding_radius_with(spec, p, lambda1_sq, DeltaPrime::Standard)
}

pub fn decoding_radius_with(spec: &QaryLatticeSpec, p: &LllParams, lambda1_sq: &Rational, dp: DeltaPrime) -> f64 {
    0.5 * to_f64(lambda1_sq).sqrt() * (-sqrt_2k_lnq_lndp(spec, p, dp)).exp()
}

/// A spec with its canonical basis reduced and its `lambda_1` settled,
/// shared by the bound report, the decoder, and the experiment runner.
#[derive(Clone, Debug)]
pub struct PreparedLattice {
    pub spec: QaryLatticeSpec,
    pub params: LllParams,
    pub basis: BasisMatrix,
    pub reduced: BasisMatrix,
    pub trace: ReductionTrace,
    pub gso: GsoDecomposition,
    /// Exact `lambda_1^2` when the dimension is within the enumeration cap.
    pub lambda1_sq: Option<Rational>,
}

impl PreparedLattice {
    pub fn new(spec: &QaryLatticeSpec, params: &LllParams, svp_cap: usize) -> Result<Self> {
        let spec = validate_spec(spec)?.normalized;
        let basis = qary_basis(&spec)?;
        let (reduced, trace) = lll_reduce(&basis, params)?;
        let gso = gram_schmidt(&reduced)?;
        let lambda1_sq = if spec.n <= svp_cap {
            Some(svp_enumerate(&reduced, svp_cap)?.norm_sq())
        } else {
            None
        };
        Ok(PreparedLattice { spec, params: params.clone(), basis, reduced, trace, gso, lambda1_sq })
    }

    /// Exact `lambda_1^2`, or the certified lower bound `min_i |b*_i|^2`.
    pub fn lambda1_sq_or_lower_bound(&self) -> (Rational, bool) {
        match &self.lambda1_sq {
            Some(l) => (l.clone(), false),
            None => (self.gso.min_star_norm_sq(), true),
        }
    }

    pub fn theorem_radius(&self) -> f64 {
        decoding_radius(&self.spec, &self.params, &self.lambda1_sq_or_lower_bound().0)
    }

    pub fn profile(&self) -> LogProfile {
        log_profile(&self.gso)
    }

    pub fn lattice_vector(&self, coeffs: &[BigInt]) -> Result<RatVector> {
        self.basis.lattice_vector(coeffs)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundReport {
    #[serde(with = "rational_str")]
    pub delta: Rational,
    /// `ln delta' = (1/2) ln(1/delta)`
    pub delta_prime_log: f64,
    pub d: u64,
    pub prop25_floor: f64,
    pub radius: f64,
    #[serde(with = "opt_rational_str")]
    pub lambda1_sq: Option<Rational>,
    /// Set when `lambda1_sq` is unavailable and `min_i |b*_i|` stood in.
    pub lambda1_fallback: bool,
    #[serde(with = "rational_str")]
    pub min_star_norm_sq: Rational,
    pub min_ell: f64,
    pub prop25_holds: bool,
    /// `min_i |b*_i|`, the radius below which the closest point is unique
    /// in every Babai box.
    pub min_gs: f64,
    /// `(1/2) min_i |b*_i|`, the radius Babai provably decodes.
    pub half_min_gs: f64,
    pub fact24_holds: bool,
    pub fact24_min_log_margin: f64,
    pub swap_count: u64,
}

pub fn bound_report(spec: &QaryLatticeSpec, p: &LllParams, svp_cap: usize) -> Result<BoundReport> {
    Ok(bound_report_prepared(&PreparedLattice::new(spec, p, svp_cap)?))
}

pub fn bound_report_prepared(prep: &PreparedLattice) -> BoundReport {
    let (l1, fallback) = prep.lambda1_sq_or_lower_bound();
    let floor = prop25_floor(&prep.spec, &prep.params, &l1);
    let min_ell = prep.profile().min();
    let min_sq = prep.gso.min_star_norm_sq();
    let min_gs = to_f64(&min_sq).sqrt();
    let fact24 = fact24_from_gso(&prep.gso, prep.spec.q);
    BoundReport {
        delta: prep.params.delta().clone(),
        delta_prime_log: DeltaPrime::Standard.ln(prep.params.delta()),
        d: block_length(&prep.spec, &prep.params),
        prop25_floor: floor,
        radius: decoding_radius(&prep.spec, &prep.params, &l1),
        lambda1_sq: prep.lambda1_sq.clone(),
        lambda1_fallback: fallback,
        min_star_norm_sq: min_sq,
        min_ell,
        prop25_holds: min_ell >= floor - BOUND_TOLERANCE,
        min_gs,
        half_min_gs: 0.5 * min_gs,
        fact24_holds: fact24.all_hold(),
        fact24_min_log_margin: fact24.min_log_margin(),
        swap_count: prep.trace.swap_count,
    }
}

/// `lambda1_sq <= q^2`.
pub fn lambda1_within_q(lambda1_sq: &Rational, q: u64) -> bool {
    let q = BigInt::from(q);
    lambda1_sq <= &Rational::from_integer(&q * &q)
}
