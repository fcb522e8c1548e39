mod common;

use common::*;
use nalgebra::DMatrix;
use pbn_core::blockenc::VirtualBlockEncoding;
use pbn_core::linalg::pseudo_inverse;
use pbn_core::qsvt::chebyshev::{evaluate, interpolate};
use pbn_core::qsvt::{
    apply_svt, pseudo_inverse_encoding, rectangle_polynomial, robustness_gap, sign_polynomial,
    singular_value_transform, BoundedPolynomial, RobustnessCheck,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn random_matrix(seed: u64, rows: usize, cols: usize, norm: f64) -> DMatrix<f64> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let m = DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0));
    let s = spectral_norm(&m);
    m * (norm / s)
}

fn symmetric(seed: u64, d: usize, norm: f64) -> DMatrix<f64> {
    let m = random_matrix(seed, d, d, 1.0);
    let s = (&m + m.transpose()) * 0.5;
    let n = spectral_norm(&s);
    s * (norm / n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn chebyshev_interpolation_is_exact_on_polynomials(coeffs in prop::collection::vec(-1.0f64..1.0, 1..12), x in -1.0f64..1.0) {
        let f = |t: f64| chebyshev_direct(&coeffs, t);
        let c = interpolate(f, 32);
        for (k, &ck) in c.iter().enumerate() {
            let want = coeffs.get(k).copied().unwrap_or(0.0);
            prop_assert!((ck - want).abs() <= 1e-13);
        }
        prop_assert!((evaluate(&coeffs, x) - f(x)).abs() <= 1e-13);
    }

    #[test]
    fn monomial_transform_matches_gram_powers(seed in any::<u64>(), r in 1usize..8, c in 1usize..8, k in 1usize..6) {
        let a = random_matrix(seed, r, c, 0.9);
        let p = BoundedPolynomial::monomial(k);
        let got = singular_value_transform(&p, &a).unwrap();
        let gram = a.transpose() * &a;
        let want = if k % 2 == 1 { &a * gram.pow((k as u32 - 1) / 2) } else { gram.pow(k as u32 / 2) };
        prop_assert!(max_abs(&(got - want)) <= 1e-12);
    }

    #[test]
    fn transform_of_symmetric_matrix_is_spectral(seed in any::<u64>(), d in 1usize..10) {
        let a = symmetric(seed, d, 0.95);
        for p in [sign_polynomial(0.2, 1e-3).unwrap(), rectangle_polynomial(0.4, 0.1, 1e-3).unwrap()] {
            let got = singular_value_transform(&p, &a).unwrap();
            prop_assert!(max_abs(&(got - spectral_apply(p.coefficients(), &a))) <= 1e-9);
        }
    }

    #[test]
    fn robustness_inequality_on_perturbed_pairs(seed in any::<u64>(), d in 2usize..12, log_dist in -9.0f64..-2.0) {
        let a = symmetric(seed, d, 0.8);
        let e = symmetric(seed ^ 7, d, 10f64.powf(log_dist));
        let p = rectangle_polynomial(0.5, 0.1, 1e-2).unwrap();
        let check = robustness_gap(&p, &a, &(&a + &e)).unwrap();
        let RobustnessCheck::Checked { measured, bound } = check else { panic!("expected a check") };
        prop_assert!(measured <= bound);
        let oracle = spectral_norm(&(spectral_apply(p.coefficients(), &a) - spectral_apply(p.coefficients(), &(&a + &e))));
        prop_assert!((measured - oracle).abs() <= 1e-9);
    }

    #[test]
    fn pseudo_inverse_encoding_approximates_pinv(seed in any::<u64>(), d in 2usize..7, rank in 1usize..7) {
        let rank = rank.min(d);
        let g = random_matrix(seed, d, rank, 1.0);
        let a = &g * g.transpose() + (&g * g.transpose()) * 0.0;
        let values = a.clone().symmetric_eigen().eigenvalues;
        let lmin = values.iter().cloned().filter(|&v| v > 1e-8).fold(f64::INFINITY, f64::min);
        prop_assume!(lmin > 0.05);
        let alpha = spectral_norm(&a) * 1.2;
        let u = VirtualBlockEncoding::from_matrix(a.clone(), alpha).unwrap();
        let eps_inv = 1e-3;
        let r = pseudo_inverse_encoding(&u, lmin / 2.0, eps_inv).unwrap();
        let err = spectral_norm(&(r.output.block() - pseudo_inverse(&a)));
        prop_assert!(err <= r.output.eps(), "err {} eps {}", err, r.output.eps());
        prop_assert!(r.output.normalized_norm() <= 1.0 + 1e-9);
    }
}

#[test]
fn polynomial_families_pass_dense_band_checks() {
    for (delta, eps) in [(0.3, 1e-2), (0.05, 1e-3), (0.02, 1e-5)] {
        let s = sign_polynomial(delta, eps).unwrap();
        for i in 0..=4000 {
            let x = -1.0 + 2.0 * i as f64 / 4000.0;
            let v = chebyshev_direct(s.coefficients(), x);
            assert!(v.abs() <= 1.0);
            if x.abs() >= delta {
                assert!((v - x.signum()).abs() <= eps, "sign at {x}: {v}");
            }
        }
    }
}

#[test]
fn svt_requires_declared_parity() {
    let p = BoundedPolynomial::monomial(3).without_parity();
    let u = VirtualBlockEncoding::from_matrix(DMatrix::identity(2, 2) * 0.5, 1.0).unwrap();
    assert!(apply_svt(&u, &p).is_err());
}

#[test]
fn pseudo_inverse_rejects_gamma_above_gap() {
    let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.5, 0.0]));
    let u = VirtualBlockEncoding::from_matrix(a, 2.0).unwrap();
    assert!(pseudo_inverse_encoding(&u, 0.6, 1e-3).is_err());
}
