use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LatticeError, Result};
use crate::numerics::rational::{bigint_vec_str, from_f64_exact, rational_str};
use crate::numerics::{rat, RatVector, Rational};
use crate::qary::{qary_basis, PreparedLattice, QaryLatticeSpec};
use crate::reduction::{LllParams, DEFAULT_SVP_CAP};

/// Bits of the dyadic denominator of the error scale.
const SCALE_BITS: u32 = 32;
const DIRECTION_BOUND: i64 = 1000;

/// How large a planted error may be.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RadiusPolicy {
    /// A fraction in `(0, 1]` of the decoding radius of the reduced basis.
    TheoremRadiusFraction(#[serde(with = "rational_str")] Rational),
    /// A fixed radius.
    Absolute(#[serde(with = "rational_str")] Rational),
    /// A fraction in `(0, 1]` of `(1/2) min_i |b*_i|`.
    HalfMinGsFraction(#[serde(with = "rational_str")] Rational),
}

impl RadiusPolicy {
    pub fn validate(&self) -> Result<()> {
        match self {
            RadiusPolicy::TheoremRadiusFraction(f) | RadiusPolicy::HalfMinGsFraction(f) => {
                if !f.is_positive() || *f > Rational::one() {
                    return Err(LatticeError::InvalidParameter(format!("radius fraction must lie in (0, 1], got {f}")));
                }
            }
            RadiusPolicy::Absolute(r) => {
                if r.is_negative() {
                    return Err(LatticeError::InvalidParameter(format!("radius must be nonnegative, got {r}")));
                }
            }
        }
        Ok(())
    }

    /// `rho^2` for a prepared lattice, rejecting radii above `lambda_1 / 2`.
    pub fn radius_sq(&self, prep: &PreparedLattice) -> Result<Rational> {
        self.validate()?;
        let rho_sq = match self {
            RadiusPolicy::TheoremRadiusFraction(f) => {
                let r = from_f64_exact(prep.theorem_radius())
                    .ok_or_else(|| LatticeError::InvalidParameter("decoding radius is not finite".into()))?;
                &r * &r * f * f
            }
            RadiusPolicy::Absolute(r) => r * r,
            RadiusPolicy::HalfMinGsFraction(f) => prep.gso.min_star_norm_sq() * rat(1, 4) * f * f,
        };
        if let Some(l1) = &prep.lambda1_sq {
            let limit = l1 * rat(1, 4);
            if rho_sq > limit {
                return Err(LatticeError::RadiusTooLarge { radius_sq: rho_sq.to_string(), limit_sq: limit.to_string() });
            }
        }
        Ok(rho_sq)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Planted {
    /// Coefficients in the canonical basis returned by `qary_basis`.
    #[serde(with = "bigint_vec_str")]
    pub v_coefficients: Vec<BigInt>,
    pub error: RatVector,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BddInstance {
    pub spec: QaryLatticeSpec,
    pub target: RatVector,
    pub planted: Option<Planted>,
    pub seed: u64,
}

impl BddInstance {
    /// The planted lattice vector, in the canonical basis of `L_A`.
    pub fn planted_vector(&self) -> Result<Option<RatVector>> {
        match &self.planted {
            None => Ok(None),
            Some(p) => Ok(Some(qary_basis(&self.spec)?.lattice_vector(&p.v_coefficients)?)),
        }
    }

    /// `target = planted vector + error`.
    pub fn is_consistent(&self) -> Result<bool> {
        match (&self.planted, self.planted_vector()?) {
            (Some(p), Some(v)) => Ok(self.target == &v + &p.error),
            _ => Ok(true),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-instance seed from an experiment seed and two indices, via chained
/// SplitMix64 finalizers.
pub fn derive_seed(seed: u64, spec_index: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ spec_index) ^ trial)
}

/// Plants a uniformly random lattice point plus a scaled random error.
///
/// Randomness comes from ChaCha8 seeded with `seed`. The error is `s u` for
/// a nonzero integer direction `u` with entries in `[-1000, 1000]` and the
/// largest `s` in `2^-32 Z` with `s^2 |u|^2 <= rho^2`, lowered further if
/// needed so that `|e|^2 < lambda_1^2 / 4`.
pub fn gen_instance(spec: &QaryLatticeSpec, policy: &RadiusPolicy, seed: u64) -> Result<BddInstance> {
    let prep = PreparedLattice::new(spec, &LllParams::default(), DEFAULT_SVP_CAP)?;
    gen_instance_prepared(&prep, policy, seed)
}

pub fn gen_instance_prepared(prep: &PreparedLattice, policy: &RadiusPolicy, seed: u64) -> Result<BddInstance> {
    let rho_sq = policy.radius_sq(prep)?;
    let n = prep.spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v_coefficients: Vec<BigInt> = (0..n).map(|_| BigInt::from(rng.random_range(0..prep.spec.q))).collect();
    let u: Vec<i64> = loop {
        let u: Vec<i64> = (0..n).map(|_| rng.random_range(-DIRECTION_BOUND..=DIRECTION_BOUND)).collect();
        if u.iter().any(|&x| x != 0) {
            break u;
        }
    };
    let u_norm_sq: i64 = u.iter().map(|x| x * x).sum();
    let u_norm_sq = BigInt::from(u_norm_sq);
    let scale_sq = BigInt::one() << (2 * SCALE_BITS);
    let mut m = ((rho_sq.numer() * &scale_sq) / (rho_sq.denom() * &u_norm_sq)).sqrt();
    if let Some(l1) = &prep.lambda1_sq {
        let limit = l1 * rat(1, 4);
        while !m.is_zero() && Rational::new(&m * &m * &u_norm_sq, scale_sq.clone()) >= limit {
            m -= 1;
        }
    }
    let s = Rational::new(m, BigInt::one() << SCALE_BITS);
    let error = RatVector::new(u.iter().map(|&x| &s * Rational::from_integer(BigInt::from(x))).collect());
    let target = &prep.lattice_vector(&v_coefficients)? + &error;
    Ok(BddInstance { spec: prep.spec.clone(), target, planted: Some(Planted { v_coefficients, error }), seed })
}
