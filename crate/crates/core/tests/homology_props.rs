mod common;

use common::*;
use nalgebra::DMatrix;
use pbn_core::complex::{SimplicialComplex, SimplicialPair};
use pbn_core::homology::{
    betti_number, boundary_matrix, combinatorial_laplacian, persistent_betti, persistent_betti_rank,
    persistent_laplacian, persistent_up_laplacian, persistent_up_laplacian_zbasis, schur_complement, spectral_bounds,
    up_laplacian,
};
use proptest::prelude::*;
use rand::SeedableRng;

fn pair_strategy() -> impl Strategy<Value = SimplicialPair> {
    (any::<u64>(), any::<bool>()).prop_map(|(seed, vr)| {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        if vr {
            random_vr_pair(&mut rng)
        } else {
            random_generator_pair(&mut rng)
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn boundary_matches_face_formula_and_squares_to_zero(pair in pair_strategy()) {
        let c = pair.large();
        for q in 1..c.max_dim() {
            let b = boundary_matrix(c, q).unwrap();
            let oracle = boundary_oracle(c, q);
            prop_assert_eq!(b.to_dense(), to_dense(&oracle, b.nrows(), b.ncols()));
            let b1 = boundary_matrix(c, q + 1).unwrap();
            prop_assert!(b.compose(&b1).unwrap().iter().all(|&v| v == 0));
        }
    }

    #[test]
    fn hodge_nullity_matches_homology(pair in pair_strategy()) {
        for c in [pair.small(), pair.large()] {
            for q in 0..c.max_dim() {
                let lap = combinatorial_laplacian(c, q).unwrap();
                prop_assert_eq!(lap.nullity(), betti_oracle(c, q));
                prop_assert_eq!(betti_number(c, q).unwrap(), betti_oracle(c, q));
                prop_assert!(lap.eigenvalues().iter().all(|&v| v >= -1e-10));
            }
        }
    }

    #[test]
    fn persistent_laplacian_routes_agree(pair in pair_strategy()) {
        for q in valid_dimensions(&pair) {
            let s = persistent_up_laplacian(&pair, q).unwrap().matrix;
            let z = persistent_up_laplacian_zbasis(&pair, q).unwrap().matrix;
            prop_assert!(max_abs(&(&s - &z)) <= 1e-9);
            prop_assert!(max_abs(&(&s - s.transpose())) <= 1e-12);
            let full = persistent_laplacian(&pair, q).unwrap();
            prop_assert!(full.eigenvalues().iter().all(|&v| v >= -1e-10));
            let oracle = persistent_betti_oracle(pair.small(), pair.large(), q);
            prop_assert_eq!(full.nullity(), oracle);
            prop_assert_eq!(persistent_betti_rank(&pair, q).unwrap(), oracle);
        }
    }

    #[test]
    fn identity_pair_reduces_to_betti(pair in pair_strategy()) {
        let k = pair.small().clone();
        let id = SimplicialPair::identity(k.clone());
        for q in 0..k.max_dim() {
            prop_assert_eq!(persistent_betti(&id, q).unwrap(), betti_number(&k, q).unwrap());
            let up = persistent_up_laplacian(&id, q).unwrap().matrix;
            prop_assert!(max_abs(&(&up - &up_laplacian(&k, q).unwrap().matrix)) <= 1e-12);
        }
    }

    #[test]
    fn persistent_betti_bounded_by_endpoints(pair in pair_strategy()) {
        for q in valid_dimensions(&pair) {
            let p = persistent_betti(&pair, q).unwrap();
            prop_assert!(p <= betti_number(pair.small(), q).unwrap());
            prop_assert!(p <= betti_number(pair.large(), q).unwrap());
        }
    }

    #[test]
    fn spectral_bounds_lie_below_measured_gaps(pair in pair_strategy()) {
        for q in valid_dimensions(&pair) {
            let b = spectral_bounds(&pair, q).unwrap();
            if let Some(m) = b.lambda.minimum() {
                prop_assert!(b.lambda_q() < m);
            }
            if let Some(m) = b.gamma.minimum() {
                prop_assert!(b.gamma_q() < m);
            }
        }
    }

    #[test]
    fn schur_complement_of_spd_matches_inverse_formula(seed in any::<u64>(), n in 2usize..8, k in 1usize..7) {
        let k = k.min(n - 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        use rand::Rng;
        let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let m = &g * g.transpose() + DMatrix::identity(n, n) * 0.5;
        let eliminated: Vec<usize> = (k..n).collect();
        let s = schur_complement(&m, &eliminated).unwrap();
        let a = m.view((0, 0), (k, k)).into_owned();
        let b = m.view((0, k), (k, n - k)).into_owned();
        let d = m.view((k, k), (n - k, n - k)).into_owned();
        let want = &a - &b * d.try_inverse().unwrap() * b.transpose();
        prop_assert!(max_abs(&(s - want)) <= 1e-9);
    }
}

#[test]
fn persistent_cycle_killed_by_filling() {
    let pair = SimplicialPair::new(hollow_triangle(), filled_triangle()).unwrap();
    assert_eq!(persistent_betti(&pair, 1).unwrap(), 0);
    assert_eq!(betti_number(pair.small(), 1).unwrap(), 1);
}

#[test]
fn path_into_filled_triangle_has_nonempty_l_block() {
    let k = SimplicialComplex::from_simplices(3, [vec![0, 1], vec![1, 2]]).unwrap();
    let pair = SimplicialPair::new(k, filled_triangle()).unwrap();
    let s = persistent_up_laplacian(&pair, 1).unwrap().matrix;
    let z = persistent_up_laplacian_zbasis(&pair, 1).unwrap().matrix;
    assert!(max_abs(&(&s - &z)) < 1e-12);
    assert_eq!(persistent_betti(&pair, 1).unwrap(), 0);
}
