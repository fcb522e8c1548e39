//! Dense linear-algebra helpers shared by the homology, encoding and SVT code.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Relative threshold below which an eigenvalue counts as zero.
pub const NULLITY_RTOL: f64 = 1e-8;

/// Relative singular-value cutoff for Moore-Penrose pseudo-inverses.
pub const PINV_RTOL: f64 = 1e-10;

/// Eigen-decomposition of a symmetric matrix, eigenvalues ascending.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (DVector::zeros(0), DMatrix::zeros(0, 0));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    symmetric_eigen(m).0.iter().copied().collect()
}

/// Zero threshold for a spectrum: `NULLITY_RTOL * max(1, largest |eigenvalue|)`.
pub fn zero_threshold(values: &[f64]) -> f64 {
    let largest = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    NULLITY_RTOL * largest.max(1.0)
}

/// Number of eigenvalues below the nullity threshold.
pub fn nullity_of_spectrum(values: &[f64]) -> usize {
    let tol = zero_threshold(values);
    values.iter().filter(|v| v.abs() < tol).count()
}

/// Smallest eigenvalue above the nullity threshold, if any.
pub fn min_nonzero(values: &[f64]) -> Option<f64> {
    let tol = zero_threshold(values);
    values.iter().copied().filter(|v| *v >= tol).min_by(f64::total_cmp)
}

/// Spectral norm (largest singular value). Zero for empty matrices.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Symmetric dilation `[0 A; A^T 0]`. Its eigenvalues are `±σ_i(A)` plus zeros.
pub fn dilation(a: &DMatrix<f64>) -> DMatrix<f64> {
    let (r, c) = a.shape();
    let mut h = DMatrix::zeros(r + c, r + c);
    h.view_mut((0, r), (r, c)).copy_from(a);
    h.view_mut((r, 0), (c, r)).copy_from(&a.transpose());
    h
}

/// `Q f(Λ) Q^T` for a symmetric matrix with eigen-decomposition `Q Λ Q^T`.
pub fn spectral_function(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let (values, vectors) = symmetric_eigen(m);
    let mut scaled = vectors.clone();
    for (j, &v) in values.iter().enumerate() {
        scaled.column_mut(j).scale_mut(f(v));
    }
    scaled * vectors.transpose()
}

/// Moore-Penrose pseudo-inverse, dropping singular values below
/// `PINV_RTOL * sigma_max`. Computed from the eigen-decomposition of the
/// dilation, whose pseudo-inverse is `[0 (A^+)^T; A^+ 0]`; this stays accurate
/// when singular values repeat, where the iterative SVD does not.
pub fn pseudo_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return DMatrix::zeros(c, r);
    }
    let (values, vectors) = symmetric_eigen(&dilation(m));
    let cutoff = PINV_RTOL * values.amax();
    let mut scaled = vectors.clone();
    for (j, &v) in values.iter().enumerate() {
        let inv = if v.abs() > cutoff && v != 0.0 { 1.0 / v } else { 0.0 };
        scaled.column_mut(j).scale_mut(inv);
    }
    scaled.rows(r, c) * vectors.rows(0, r).transpose()
}

/// Principal square root of a symmetric positive-semidefinite matrix.
/// Slightly negative eigenvalues from round-off are clamped to zero.
pub fn sqrt_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (values, vectors) = symmetric_eigen(m);
    let roots = DMatrix::from_diagonal(&values.map(|v| v.max(0.0).sqrt()));
    &vectors * roots * vectors.transpose()
}

/// Null-space basis from the reduced row echelon form (one column per free
/// variable). The basis is generally not orthonormal.
pub fn kernel_basis_rref(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    if rows == 0 {
        return DMatrix::identity(cols, cols);
    }
    let mut a = m.clone();
    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let (best, val) = (row..rows)
            .map(|r| (r, a[(r, col)].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("non-empty range");
        if val <= tol {
            continue;
        }
        a.swap_rows(row, best);
        let p = a[(row, col)];
        for j in 0..cols {
            a[(row, j)] /= p;
        }
        for r in 0..rows {
            if r != row {
                let f = a[(r, col)];
                if f != 0.0 {
                    for j in 0..cols {
                        a[(r, j)] -= f * a[(row, j)];
                    }
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = DMatrix::zeros(cols, free.len());
    for (k, &f) in free.iter().enumerate() {
        basis[(f, k)] = 1.0;
        for (r, &p) in pivots.iter().enumerate() {
            basis[(p, k)] = -a[(r, f)];
        }
    }
    basis
}

const RANK_PRIMES: [u64; 2] = [2_305_843_009_213_693_951, 4_611_686_018_427_387_847];

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    r
}

fn rank_mod_p(rows: usize, cols: usize, entries: &[i64], p: u64) -> usize {
    let mut a: Vec<u64> = entries.iter().map(|&v| v.rem_euclid(p as i64) as u64).collect();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(piv) = (rank..rows).find(|&r| a[r * cols + col] != 0) else {
            continue;
        };
        if piv != rank {
            for j in 0..cols {
                a.swap(piv * cols + j, rank * cols + j);
            }
        }
        let inv = powmod(a[rank * cols + col], p - 2, p);
        for r in (rank + 1)..rows {
            let f = mulmod(a[r * cols + col], inv, p);
            if f == 0 {
                continue;
            }
            for j in col..cols {
                let sub = mulmod(f, a[rank * cols + j], p);
                a[r * cols + j] = (a[r * cols + j] + p - sub) % p;
            }
        }
        rank += 1;
    }
    rank
}

/// Rank over the rationals of an integer matrix given row-major.
///
/// Computed by elimination modulo two large primes; the rank modulo a prime
/// never exceeds the rational rank, and both primes agreeing with it fails
/// only if each divides every maximal non-vanishing minor.
pub fn rank_integer(rows: usize, cols: usize, entries: &[i64]) -> usize {
    assert_eq!(entries.len(), rows * cols, "entry count does not match shape");
    if rows == 0 || cols == 0 {
        return 0;
    }
    RANK_PRIMES.iter().map(|&p| rank_mod_p(rows, cols, entries, p)).max().unwrap_or(0)
}
