//! Exact-arithmetic lattice toolkit for bounded distance decoding on q-ary
//! lattices `L_A = qZ^n + A Z^k`.
//!
//! The pipeline is: build a basis of `L_A` ([`qary::qary_basis`]), LLL-reduce
//! it ([`reduction::lll_reduce`]), and round the target with Babai's nearest
//! plane algorithm ([`decode::babai_nearest_plane`]). Every quantity on the
//! way is an exact rational, so the classical inequalities about reduced
//! bases can be checked with equality rather than tolerances.

pub mod decode;
pub mod duality;
pub mod error;
pub mod gso;
pub mod harness;
pub mod numerics;
pub mod qary;
pub mod reduction;

pub use error::{LatticeError, Result};
pub use gso::BasisMatrix;
pub use numerics::{IntMatrix, RatMatrix, RatVector, Rational};
pub use reduction::LllParams;
