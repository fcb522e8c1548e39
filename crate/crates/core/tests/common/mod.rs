//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use nalgebra::DMatrix;
use pbn_core::complex::{build_vietoris_rips, PointCloud, SimplicialComplex, SimplicialPair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const P: i64 = 2_147_483_647;

fn inv_mod(a: i64) -> i64 {
    let (mut r, mut base, mut e) = (1i64, a.rem_euclid(P), P - 2);
    while e > 0 {
        if e & 1 == 1 {
            r = r * base % P;
        }
        base = base * base % P;
        e >>= 1;
    }
    r
}

/// Row echelon form over GF(P); returns the pivot columns.
fn echelon(rows: &mut [Vec<i64>]) -> Vec<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][c] != 0) else { continue };
        rows.swap(r, p);
        let inv = inv_mod(rows[r][c]);
        for v in rows[r].iter_mut() {
            *v = *v * inv % P;
        }
        for i in 0..rows.len() {
            if i != r && rows[i][c] != 0 {
                let f = rows[i][c];
                for j in 0..ncols {
                    rows[i][j] = (rows[i][j] - f * rows[r][j]).rem_euclid(P);
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    pivots
}

/// Rank over GF(P) of a dense row-major matrix.
pub fn rank_mod_p(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<i64>> = rows.iter().map(|r| r.iter().map(|v| v.rem_euclid(P)).collect()).collect();
    echelon(&mut m).len()
}

/// Kernel basis over GF(P) of an `nrows x ncols` matrix, as column vectors.
pub fn kernel_mod_p(rows: &[Vec<i64>], ncols: usize) -> Vec<Vec<i64>> {
    let mut m: Vec<Vec<i64>> = rows.iter().map(|r| r.iter().map(|v| v.rem_euclid(P)).collect()).collect();
    let pivots = echelon(&mut m);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0i64; ncols];
            v[f] = 1;
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = (-m[r][f]).rem_euclid(P);
            }
            v
        })
        .collect()
}

pub fn simplex_lists(c: &SimplicialComplex, q: usize) -> Vec<Vec<usize>> {
    c.simplices(q).map(|s| s.iter().map(|x| x.vertices().to_vec()).collect()).unwrap_or_default()
}

/// Signed boundary `C_q -> C_{q-1}` as dense integer rows, built from the
/// alternating face formula.
pub fn boundary_oracle(c: &SimplicialComplex, q: usize) -> Vec<Vec<i64>> {
    let cols = simplex_lists(c, q);
    if q == 0 {
        return Vec::new();
    }
    let faces = simplex_lists(c, q - 1);
    let index: HashMap<&Vec<usize>, usize> = faces.iter().enumerate().map(|(i, f)| (f, i)).collect();
    let mut m = vec![vec![0i64; cols.len()]; faces.len()];
    for (j, s) in cols.iter().enumerate() {
        for i in 0..s.len() {
            let mut f = s.clone();
            f.remove(i);
            let sign = if i % 2 == 0 { 1 } else { -1 };
            m[index[&f]][j] = sign;
        }
    }
    m
}

pub fn to_dense(rows: &[Vec<i64>], nrows: usize, ncols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j] as f64)
}

/// `dim im(H_q(K) -> H_q(L))` as `rank [Z_K | B_L] - rank B_L` in `C_q(L)`.
pub fn persistent_betti_oracle(k: &SimplicialComplex, l: &SimplicialComplex, q: usize) -> usize {
    let kq = simplex_lists(k, q);
    let lq = simplex_lists(l, q);
    if kq.is_empty() {
        return 0;
    }
    let l_index: HashMap<&Vec<usize>, usize> = lq.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let z_k = if q == 0 {
        (0..kq.len()).map(|i| (0..kq.len()).map(|j| i64::from(i == j)).collect()).collect()
    } else {
        kernel_mod_p(&boundary_oracle(k, q), kq.len())
    };
    let b_l = boundary_oracle(l, q + 1);
    let n_l1 = simplex_lists(l, q + 1).len();
    // columns as rows of the transpose
    let mut cols: Vec<Vec<i64>> = Vec::new();
    for z in &z_k {
        let mut v = vec![0i64; lq.len()];
        for (i, s) in kq.iter().enumerate() {
            v[l_index[s]] = z[i];
        }
        cols.push(v);
    }
    let b_cols: Vec<Vec<i64>> = (0..n_l1).map(|j| (0..lq.len()).map(|i| b_l[i][j]).collect()).collect();
    let rank_b = rank_mod_p(&b_cols);
    cols.extend(b_cols);
    rank_mod_p(&cols) - rank_b
}

pub fn betti_oracle(c: &SimplicialComplex, q: usize) -> usize {
    persistent_betti_oracle(c, c, q)
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, &v| a.max(v.abs()))
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Chebyshev series evaluated through `T_k(x) = cos(k arccos x)`.
pub fn chebyshev_direct(c: &[f64], x: f64) -> f64 {
    let theta = x.clamp(-1.0, 1.0).acos();
    c.iter().enumerate().map(|(k, ck)| ck * (k as f64 * theta).cos()).sum()
}

/// `P(A)` for symmetric `A` via its eigendecomposition, with `P` given as a
/// Chebyshev series. Agrees with the singular value transform for odd and
/// even `P`.
pub fn spectral_apply(c: &[f64], a: &DMatrix<f64>) -> DMatrix<f64> {
    let e = a.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&e.eigenvalues.map(|x| chebyshev_direct(c, x)));
    &e.eigenvectors * d * e.eigenvectors.transpose()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random complex on `n` vertices: closure of a few random generators plus
/// every vertex.
pub fn random_complex(rng: &mut impl Rng, n: usize, generators: usize, max_size: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    for _ in 0..generators {
        let size = rng.random_range(2..=max_size.min(n));
        let mut s: Vec<usize> = Vec::new();
        while s.len() < size {
            let v = rng.random_range(0..n);
            if !s.contains(&v) {
                s.push(v);
            }
        }
        s.sort_unstable();
        out.push(s);
    }
    out
}

/// Random pair `K -> L`: `L` from random generators, `K` from a random
/// subset of them.
pub fn random_generator_pair(rng: &mut impl Rng) -> SimplicialPair {
    let n = rng.random_range(3..=8);
    let count = rng.random_range(2..=8);
    let gens = random_complex(rng, n, count, 4);
    let keep: Vec<Vec<usize>> = gens.iter().filter(|s| s.len() == 1 || rng.random_bool(0.5)).cloned().collect();
    let l = SimplicialComplex::from_simplices(n, gens).unwrap();
    let k = SimplicialComplex::from_simplices(n, keep).unwrap();
    SimplicialPair::new(k, l).unwrap()
}

/// Random Vietoris-Rips pair from points in the unit square.
pub fn random_vr_pair(rng: &mut impl Rng) -> SimplicialPair {
    let n = rng.random_range(3..=8);
    let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
    let cloud = PointCloud::new(pts).unwrap();
    let t = rng.random_range(0.1..0.4);
    let s = t + rng.random_range(0.0..0.3);
    let k = build_vietoris_rips(&cloud, t, 3).unwrap();
    let l = build_vietoris_rips(&cloud, s, 3).unwrap();
    SimplicialPair::new(k, l).unwrap()
}

/// Dimensions `q` for which `L`'s `(q+1)`-simplices are materialised.
pub fn valid_dimensions(pair: &SimplicialPair) -> Vec<usize> {
    (0..pair.large().max_dim()).collect()
}

pub struct Fixture {
    pub name: &'static str,
    pub pair: SimplicialPair,
    pub q: usize,
    pub betti: usize,
}

pub fn hollow_triangle() -> SimplicialComplex {
    SimplicialComplex::from_simplices(3, [vec![0, 1], vec![0, 2], vec![1, 2]]).unwrap()
}

pub fn filled_triangle() -> SimplicialComplex {
    SimplicialComplex::from_simplices(3, [vec![0, 1, 2]]).unwrap()
}

pub fn tetrahedron_boundary() -> SimplicialComplex {
    SimplicialComplex::from_simplices(4, [vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]]).unwrap()
}

pub fn circle_cloud(n: usize) -> PointCloud {
    let pts = (0..n)
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            vec![a.cos(), a.sin()]
        })
        .collect();
    PointCloud::new(pts).unwrap()
}

pub fn circle8_pair() -> SimplicialPair {
    let cloud = circle_cloud(8);
    let k = build_vietoris_rips(&cloud, 0.8, 2).unwrap();
    let l = build_vietoris_rips(&cloud, 0.9, 2).unwrap();
    SimplicialPair::new(k, l).unwrap()
}

/// The named known-topology fixtures with their persistent Betti numbers.
pub fn fixtures() -> Vec<Fixture> {
    vec![
        Fixture { name: "hollow triangle", pair: SimplicialPair::identity(hollow_triangle()), q: 1, betti: 1 },
        Fixture { name: "filled triangle", pair: SimplicialPair::identity(filled_triangle()), q: 1, betti: 0 },
        Fixture { name: "tetrahedron boundary", pair: SimplicialPair::identity(tetrahedron_boundary()), q: 2, betti: 1 },
        Fixture {
            name: "hollow -> filled triangle",
            pair: SimplicialPair::new(hollow_triangle(), filled_triangle()).unwrap(),
            q: 1,
            betti: 0,
        },
        Fixture { name: "circle-8 VR (0.8, 0.9)", pair: circle8_pair(), q: 1, betti: 1 },
    ]
}

/// Fixtures plus a pair with a non-empty `L`-only block, exercising the
/// pseudo-inverse stage.
pub fn pipeline_fixtures() -> Vec<Fixture> {
    let mut f = fixtures();
    let k = SimplicialComplex::from_simplices(2, [vec![0]]).unwrap();
    let l = SimplicialComplex::from_simplices(2, [vec![0, 1]]).unwrap();
    f.push(Fixture { name: "vertex -> edge", pair: SimplicialPair::new(k, l).unwrap(), q: 0, betti: 1 });
    f
}
