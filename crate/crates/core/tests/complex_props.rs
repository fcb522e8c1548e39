mod common;

use common::simplex_lists;
use pbn_core::complex::{
    binomial, build_lazy_witness, build_vietoris_rips, BitString, PointCloud, Simplex, SimplicialComplex,
    SimplicialPair,
};
use proptest::prelude::*;

fn vertices_of(mask: u16, n: usize) -> Vec<usize> {
    (0..n).filter(|&v| mask >> v & 1 == 1).collect()
}

fn complex_strategy() -> impl Strategy<Value = (usize, Vec<u16>)> {
    (3usize..=8).prop_flat_map(|n| (Just(n), prop::collection::vec(1u16..(1 << n), 1..8)))
}

fn cloud_strategy(max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 2), 2..=max_n)
}

fn is_closed(c: &SimplicialComplex) -> bool {
    (1..=c.max_dim()).all(|q| {
        simplex_lists(c, q).iter().all(|s| {
            (0..s.len()).all(|i| {
                let mut f = s.clone();
                f.remove(i);
                c.contains(&Simplex::new(f).unwrap())
            })
        })
    })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

proptest! {
    #[test]
    fn generated_complexes_are_closed((n, masks) in complex_strategy()) {
        let c = SimplicialComplex::from_simplices(n, masks.iter().map(|&m| vertices_of(m, n))).unwrap();
        prop_assert!(is_closed(&c));
        for &m in &masks {
            prop_assert!(c.contains(&Simplex::new(vertices_of(m, n)).unwrap()));
        }
    }

    #[test]
    fn vietoris_rips_matches_pairwise_distances(pts in cloud_strategy(8), eps in 0.0f64..1.5) {
        let cloud = PointCloud::new(pts.clone()).unwrap();
        let c = build_vietoris_rips(&cloud, eps, 3).unwrap();
        prop_assert!(is_closed(&c));
        let n = pts.len();
        for q in 0..=3usize.min(n - 1) {
            let want: Vec<Vec<usize>> = (0u16..(1 << n))
                .map(|m| vertices_of(m, n))
                .filter(|v| v.len() == q + 1)
                .filter(|v| v.iter().all(|&a| v.iter().all(|&b| dist(&pts[a], &pts[b]) <= 2.0 * eps)))
                .collect();
            let mut got = simplex_lists(&c, q);
            got.sort();
            let mut want = want;
            want.sort();
            prop_assert_eq!(got, want);
        }
    }

    #[test]
    fn vietoris_rips_is_monotone(pts in cloud_strategy(8), t in 0.0f64..1.0, dt in 0.0f64..0.5) {
        let cloud = PointCloud::new(pts).unwrap();
        let k = build_vietoris_rips(&cloud, t, 3).unwrap();
        let l = build_vietoris_rips(&cloud, t + dt, 3).unwrap();
        for q in 0..=3 {
            for s in k.simplices(q).unwrap() {
                prop_assert!(l.contains(s));
            }
        }
        let pair = SimplicialPair::new(k, l).unwrap();
        prop_assert!(pair.check_ordering().is_ok());
    }

    #[test]
    fn membership_agrees_with_lists(pts in cloud_strategy(10), eps in 0.0f64..1.2) {
        let n = pts.len();
        let cloud = PointCloud::new(pts).unwrap();
        let c = build_vietoris_rips(&cloud, eps, 3).unwrap();
        for q in 0..=3usize.min(n - 1) {
            let listed = simplex_lists(&c, q);
            let mut members = 0;
            for bits in 0u64..(1 << n) {
                if bits.count_ones() as usize != q + 1 {
                    continue;
                }
                let s = BitString::new(bits, n).unwrap();
                let inside = c.membership_of(&s, q).unwrap();
                prop_assert_eq!(inside, listed.contains(&s.vertices()));
                members += usize::from(inside);
            }
            prop_assert_eq!(members, c.count(q).unwrap());
            prop_assert!(members as u64 <= binomial(n, q + 1));
        }
    }

    #[test]
    fn lazy_witness_edges_follow_the_witness_rule(pts in cloud_strategy(9), eps in 0.0f64..0.5) {
        let n = pts.len();
        let landmarks: Vec<usize> = (0..n).step_by(2).collect();
        let cloud = PointCloud::new(pts.clone()).unwrap();
        let c = build_lazy_witness(&cloud, &landmarks, eps, 2).unwrap();
        prop_assert!(is_closed(&c));
        let m = landmarks.len();
        for a in 0..m {
            for b in a + 1..m {
                let witnessed = pts.iter().any(|s| {
                    let d = |i: usize| dist(s, &pts[landmarks[i]]);
                    (0..m).filter(|&y| y != a && y != b).all(|y| d(a) <= d(y) + eps && d(b) <= d(y) + eps)
                });
                prop_assert_eq!(c.contains(&Simplex::new(vec![a, b]).unwrap()), witnessed, "edge {} {}", a, b);
            }
        }
    }
}

#[test]
fn pair_rejects_non_subcomplex() {
    let k = SimplicialComplex::from_simplices(3, [vec![0, 1, 2]]).unwrap();
    let l = SimplicialComplex::from_simplices(3, [vec![0, 1], vec![1, 2]]).unwrap();
    assert!(SimplicialPair::new(k, l).is_err());
}
