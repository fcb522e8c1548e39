mod common;

use common::*;
use pbn_core::complex::{SimplicialComplex, SimplicialPair};
use pbn_core::pipeline::{
    check_promises, cost_report, dicke_state, hoeffding_samples, run_pipeline, sample_estimate, ErrorBudget,
    PipelineConfig,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn identity_pairs_reproduce_betti_ratio(masks in prop::collection::vec(1u8..16, 1..6), q in 0usize..2) {
        let n = 4;
        let gens = masks.iter().map(|&m| (0..n).filter(|&v| m >> v & 1 == 1).collect::<Vec<_>>());
        let c = SimplicialComplex::from_simplices(n, gens).unwrap();
        let n_q = simplex_lists(&c, q).len();
        prop_assume!(n_q > 0);
        let want = betti_oracle(&c, q) as f64 / n_q as f64;
        let r = run_pipeline(&SimplicialPair::identity(c), q, &PipelineConfig::new(0.05, 0.05, 3)).unwrap();
        prop_assert!((r.p1_tilde - want).abs() <= r.budget.bound, "{} vs {}", r.p1_tilde, want);
        prop_assert!(r.within_budget);
    }

    #[test]
    fn sampling_is_deterministic_per_seed(p in 0.0f64..=1.0, seed in any::<u64>()) {
        let a = sample_estimate(p, 0.1, 0.05, seed).unwrap();
        let b = sample_estimate(p, 0.1, 0.05, seed).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn hoeffding_count_matches_formula() {
    assert_eq!(hoeffding_samples(0.1, 0.05), 185);
    for (eps, eta) in [(0.05, 0.05), (0.01, 0.1), (0.2, 0.01)] {
        let want = ((2.0f64 / eta).ln() / (2.0 * eps * eps)).ceil() as u64;
        assert_eq!(hoeffding_samples(eps, eta), want);
    }
}

#[test]
fn zero_variance_sampling_is_exact() {
    for p in [0.0, 1.0] {
        assert_eq!(sample_estimate(p, 0.1, 0.05, 9).unwrap().mean, p);
    }
}

#[test]
fn dicke_states_are_uniform_on_the_weight_class() {
    for (n, q) in [(3, 0), (4, 1), (5, 2), (6, 2)] {
        let s = dicke_state(n, q).unwrap();
        let amp = 1.0 / (pbn_core::complex::binomial(n, q + 1) as f64).sqrt();
        for (x, &v) in s.iter().enumerate() {
            let want = if (x as u64).count_ones() as usize == q + 1 { amp } else { 0.0 };
            assert!((v - want).abs() < 1e-14);
        }
    }
}

#[test]
fn promises_on_hollow_triangle() {
    let r = check_promises(&SimplicialPair::identity(hollow_triangle()), 1).unwrap();
    assert_eq!(r.density, 1.0);
    assert!((r.lambda_min.unwrap() - 3.0).abs() < 1e-12);
    let empty = SimplicialComplex::from_simplices(3, [vec![0], vec![1]]).unwrap();
    let r = check_promises(&SimplicialPair::identity(empty), 1).unwrap();
    assert_eq!(r.density, 0.0);
    assert!(!r.dense);
}

#[test]
fn cost_formulas_scale_with_gamma() {
    let b = ErrorBudget::from_target(0.05).unwrap();
    let ones = cost_report(1, 1, 1.0, 1.0, 1.0, &b, 1);
    assert!(ones.gates.is_finite() && ones.gates > 0.0);
    let g1 = cost_report(6, 1, 1.0, 0.1, 0.1, &b, 4);
    let g2 = cost_report(6, 1, 1.0, 0.05, 0.1, &b, 4);
    let ratio = g2.oracle_calls_l / g1.oracle_calls_l;
    let logs = (1.0 / (0.05 * b.eps_inv)).ln() / (1.0 / (0.1 * b.eps_inv)).ln();
    assert!((ratio - 4.0 * logs).abs() < 1e-9, "{ratio}");
    assert_eq!(g1.qubits, 6 + 4 + 6 + 1);
}

/// Shrinking one budget component must not grow the measured error.
#[test]
fn monotone_budget() {
    for f in pipeline_fixtures().into_iter().filter(|f| f.name != "circle-8 VR (0.8, 0.9)") {
        let base = ErrorBudget::from_target(0.05).unwrap();
        let run = |b: ErrorBudget| {
            let mut cfg = PipelineConfig::new(0.05, 0.05, 1);
            cfg.budget = Some(b);
            cfg.fixed_eps_inv = true;
            let r = run_pipeline(&f.pair, f.q, &cfg).unwrap();
            (r.p1_tilde - r.p1_exact).abs()
        };
        let e0 = run(base);
        for (name, b) in [
            ("eps_sign", ErrorBudget { eps_sign: base.eps_sign / 4.0, ..base }),
            ("eps_inv", ErrorBudget { eps_inv: base.eps_inv / 10.0, ..base }),
            ("eps_rect", ErrorBudget { eps_rect: base.eps_rect / 4.0, ..base }),
        ] {
            let e1 = run(b);
            assert!(e1 <= e0 + 1e-9, "{}: shrinking {name} raised the error from {e0:.3e} to {e1:.3e}", f.name);
        }
    }
}

#[test]
fn reports_are_deterministic() {
    let pair = SimplicialPair::identity(hollow_triangle());
    let cfg = PipelineConfig::new(0.05, 0.05, 11);
    let a = serde_json::to_string(&run_pipeline(&pair, 1, &cfg).unwrap()).unwrap();
    let b = serde_json::to_string(&run_pipeline(&pair, 1, &cfg).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn empty_level_is_undefined() {
    let c = SimplicialComplex::from_simplices(3, [vec![0], vec![1]]).unwrap();
    let err = run_pipeline(&SimplicialPair::identity(c), 1, &PipelineConfig::new(0.05, 0.05, 1)).unwrap_err();
    assert!(matches!(err, pbn_core::Error::Undefined(_)));
}

#[test]
fn too_many_vertices_is_a_resource_error() {
    let c = SimplicialComplex::from_simplices(15, [vec![0, 1]]).unwrap();
    let err = run_pipeline(&SimplicialPair::identity(c), 1, &PipelineConfig::new(0.05, 0.05, 1)).unwrap_err();
    assert!(matches!(err, pbn_core::Error::Resource(_)));
}
