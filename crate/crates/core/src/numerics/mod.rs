//! Exact integer and rational linear algebra.

pub mod matrix;
pub mod rational;
pub mod vector;

pub use matrix::{det_int, det_rat, inverse, is_unimodular, mat_mul, rank_rat, solve, IntMatrix, Matrix, RatMatrix};
pub use rational::{int, rat, round_half_up, ExactScalar, Rational};
pub use vector::{inner_product, norm_sq, RatVector};

#[cfg(test)]
mod proptests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn rational() -> impl Strategy<Value = Rational> {
        (-50i64..50, 1i64..20).prop_map(|(n, d)| rat(n, d))
    }

    fn rat_vec(dim: usize) -> impl Strategy<Value = RatVector> {
        proptest::collection::vec(rational(), dim).prop_map(RatVector::new)
    }

    fn rat_matrix(r: usize, c: usize) -> impl Strategy<Value = RatMatrix> {
        proptest::collection::vec(rational(), r * c).prop_map(move |d| RatMatrix::new(r, c, d).unwrap())
    }

    fn int_matrix(n: usize) -> impl Strategy<Value = IntMatrix> {
        proptest::collection::vec(-6i64..7, n * n)
            .prop_map(move |d| IntMatrix::new(n, n, d.into_iter().map(BigInt::from).collect()).unwrap())
    }

    proptest! {
        #[test]
        fn inner_product_is_symmetric((u, v) in (1usize..8).prop_flat_map(|n| (rat_vec(n), rat_vec(n)))) {
            prop_assert_eq!(inner_product(&u, &v).unwrap(), inner_product(&v, &u).unwrap());
        }

        #[test]
        fn results_stay_in_lowest_terms(u in rat_vec(5), v in rat_vec(5)) {
            let p = inner_product(&u, &v).unwrap();
            prop_assert!(num_integer::Integer::gcd(p.numer(), p.denom()) == BigInt::from(1));
            prop_assert!(p.denom() > &BigInt::from(0));
        }

        #[test]
        fn mat_mul_is_associative(
            (a, b, c) in (1usize..4, 1usize..4, 1usize..4, 1usize..4)
                .prop_flat_map(|(p, q, r, s)| (rat_matrix(p, q), rat_matrix(q, r), rat_matrix(r, s)))
        ) {
            let left = mat_mul(&mat_mul(&a, &b).unwrap(), &c).unwrap();
            let right = mat_mul(&a, &mat_mul(&b, &c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn det_is_multiplicative((u, v) in (1usize..6).prop_flat_map(|n| (int_matrix(n), int_matrix(n)))) {
            let uv = mat_mul(&u, &v).unwrap();
            prop_assert_eq!(det_int(&uv).unwrap(), det_int(&u).unwrap() * det_int(&v).unwrap());
        }

        #[test]
        fn rational_det_matches_integer_det(m in int_matrix(4)) {
            prop_assert_eq!(det_rat(&m.to_rational()).unwrap(), Rational::from_integer(det_int(&m).unwrap()));
        }
    }
}
