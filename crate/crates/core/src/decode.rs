//! Babai's nearest plane rounding, exact closest-vector enumeration, and the
//! end-to-end decoder for q-ary lattices.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{LatticeError, Result};
use crate::gso::{gram_schmidt, BasisMatrix, GsoDecomposition};
use crate::numerics::rational::{bigint_vec_str, from_bigint, rational_str, round_half_up, to_f64};
use crate::numerics::{rat, RatVector, Rational};
use crate::qary::{PreparedLattice, QaryLatticeSpec, BOUND_TOLERANCE};
use crate::reduction::{closest_coefficients, lll_reduce, LllParams};

pub const DEFAULT_CVP_CAP: usize = 8;

/// Where `radius_guarantee` came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusSource {
    /// `(1/2) min_i |b*_i|` of the basis that was used.
    HalfMinGs,
    /// `(1/2) lambda_1 exp(-sqrt(2k ln q ln delta'))` with exact `lambda_1`.
    Theorem,
    /// The same formula with `min_i |b*_i|` standing in for `lambda_1`.
    TheoremMinGsFallback,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecodeReport {
    pub decoded_vector: RatVector,
    /// Coefficients of `decoded_vector` in `used_basis`.
    #[serde(with = "bigint_vec_str")]
    pub coefficients: Vec<BigInt>,
    #[serde(with = "rational_str")]
    pub residual_sq: Rational,
    pub used_basis: BasisMatrix,
    pub radius_guarantee: f64,
    pub radius_source: RadiusSource,
    pub within_guarantee: bool,
    /// `(1/4) sum_i |b*_i|^2`, the largest squared residual rounding can leave.
    #[serde(with = "rational_str")]
    pub box_bound_sq: Rational,
    pub min_gs_norm: f64,
    pub half_min_gs_norm: f64,
}

fn check_target(b: &BasisMatrix, t: &RatVector) -> Result<()> {
    if t.dim() != b.ambient_dim() {
        return Err(LatticeError::shape(format!(
            "target has dimension {} but the lattice lives in dimension {}",
            t.dim(),
            b.ambient_dim()
        )));
    }
    Ok(())
}

/// Coefficients and remainder `t - sum c_i b_i` of nearest plane rounding.
fn nearest_plane(b: &BasisMatrix, g: &GsoDecomposition, t: &RatVector) -> (Vec<BigInt>, RatVector) {
    let n = b.rank();
    let mut rest = t.clone();
    let mut coeffs = vec![BigInt::zero(); n];
    for i in (0..n).rev() {
        let c = round_half_up(&(rest.dot(&g.star_vectors[i]) / &g.star_norms_sq[i]));
        if !c.is_zero() {
            rest.sub_scaled_assign(&from_bigint(&c), b.column(i));
        }
        coeffs[i] = c;
    }
    (coeffs, rest)
}

fn report_from(b: &BasisMatrix, g: &GsoDecomposition, t: &RatVector) -> DecodeReport {
    let (coefficients, rest) = nearest_plane(b, g, t);
    let min_sq = g.min_star_norm_sq();
    let quarter = rat(1, 4);
    let residual_sq = rest.norm_sq();
    let min_gs_norm = to_f64(&min_sq).sqrt();
    DecodeReport {
        decoded_vector: t - &rest,
        coefficients,
        within_guarantee: residual_sq <= &quarter * &min_sq,
        residual_sq,
        used_basis: b.clone(),
        radius_guarantee: 0.5 * min_gs_norm,
        radius_source: RadiusSource::HalfMinGs,
        box_bound_sq: g.star_norms_sq.iter().fold(Rational::zero(), |acc, x| acc + x) * quarter,
        min_gs_norm,
        half_min_gs_norm: 0.5 * min_gs_norm,
    }
}

/// Nearest plane rounding of `t` against `b` exactly as given.
pub fn babai_nearest_plane(b: &BasisMatrix, t: &RatVector) -> Result<DecodeReport> {
    check_target(b, t)?;
    let g = gram_schmidt(b)?;
    Ok(report_from(b, &g, t))
}

/// A closest lattice vector to `t`. On ties the vector whose coefficient
/// vector in `b` is lexicographically smallest wins.
pub fn cvp_enumerate(b: &BasisMatrix, t: &RatVector, cap: usize) -> Result<RatVector> {
    check_target(b, t)?;
    if b.ambient_dim() > cap {
        return Err(LatticeError::CapExceeded { dim: b.ambient_dim(), cap });
    }
    let (reduced, _) = lll_reduce(b, &LllParams::default())?;
    let g = gram_schmidt(&reduced)?;
    let (_, rest) = nearest_plane(&reduced, &g, t);
    // in-span part of the rounding residual
    let bound = g
        .star_vectors
        .iter()
        .zip(&g.star_norms_sq)
        .map(|(s, bsq)| {
            let d = rest.dot(s);
            &d * &d / bsq
        })
        .fold(Rational::zero(), |acc, x| acc + x);
    let (_, ties) = closest_coefficients(&g, t, bound);
    let mut best: Option<(Vec<Rational>, RatVector)> = None;
    for c in ties {
        let v = reduced.lattice_vector(&c)?;
        let coords = b.coordinates(&v)?.expect("enumerated vector lies in the lattice");
        if best.as_ref().is_none_or(|(bc, _)| coords < *bc) {
            best = Some((coords, v));
        }
    }
    Ok(best.expect("the rounding point is always within the bound").1)
}

/// Decodes `t` against a prepared q-ary lattice with the guarantee from the
/// reduced profile.
pub fn decode_prepared(prep: &PreparedLattice, t: &RatVector) -> Result<DecodeReport> {
    check_target(&prep.reduced, t)?;
    let mut report = report_from(&prep.reduced, &prep.gso, t);
    let radius = prep.theorem_radius();
    report.radius_guarantee = radius;
    report.radius_source =
        if prep.lambda1_sq.is_some() { RadiusSource::Theorem } else { RadiusSource::TheoremMinGsFallback };
    report.within_guarantee = within_radius(&report.residual_sq, radius);
    Ok(report)
}

/// `residual_sq <= radius^2` up to [`BOUND_TOLERANCE`].
pub fn within_radius(residual_sq: &Rational, radius: f64) -> bool {
    let r2 = radius * radius;
    to_f64(residual_sq) <= r2 + BOUND_TOLERANCE * r2.max(1.0)
}

/// Builds the basis of `L_A`, LLL-reduces it, and rounds `t`.
pub fn bdd_solve(spec: &QaryLatticeSpec, t: &RatVector, p: &LllParams, svp_cap: usize) -> Result<DecodeReport> {
    if t.dim() != spec.n {
        return Err(LatticeError::shape(format!("target has dimension {} but n = {}", t.dim(), spec.n)));
    }
    decode_prepared(&PreparedLattice::new(spec, p, svp_cap)?, t)
}
