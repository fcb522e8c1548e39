//! Boundary matrices, combinatorial and persistent Laplacians, and Betti
//! numbers computed both spectrally and by exact ranks.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::complex::{SimplicialComplex, SimplicialPair};
use crate::error::{Error, Result};
use crate::linalg::{self, kernel_basis_rref, nullity_of_spectrum, rank_integer};

/// Signed incidence matrix of the boundary map `C_q -> C_{q-1}`, stored by column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryMatrix {
    q: usize,
    rows: usize,
    columns: Vec<Vec<(usize, i8)>>,
}

impl BoundaryMatrix {
    pub fn dimension(&self) -> usize {
        self.q
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    /// Nonzeros of column `j` as `(row, sign)`, rows increasing.
    pub fn column(&self, j: usize) -> &[(usize, i8)] {
        &self.columns[j]
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    /// `(row, col, value)` triples in column-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, i8)> + '_ {
        self.columns.iter().enumerate().flat_map(|(j, c)| c.iter().map(move |&(i, v)| (i, j, v)))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.ncols());
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v as f64;
        }
        m
    }

    /// Row-major integer entries.
    pub fn to_integer(&self) -> Vec<i64> {
        let cols = self.ncols();
        let mut m = vec![0i64; self.rows * cols];
        for (i, j, v) in self.triplets() {
            m[i * cols + j] = v as i64;
        }
        m
    }

    /// Rank over the rationals.
    pub fn rank(&self) -> usize {
        rank_integer(self.rows, self.ncols(), &self.to_integer())
    }

    /// Rank of the submatrix made of the given rows.
    pub fn rank_of_rows(&self, rows: &[usize]) -> usize {
        let full = self.to_integer();
        let cols = self.ncols();
        let sub: Vec<i64> = rows.iter().flat_map(|&r| full[r * cols..(r + 1) * cols].iter().copied()).collect();
        rank_integer(rows.len(), cols, &sub)
    }

    /// Integer product `self * other`, row-major.
    pub fn compose(&self, other: &BoundaryMatrix) -> Result<Vec<i64>> {
        if self.ncols() != other.rows {
            return Err(Error::Input(format!(
                "cannot compose {}x{} with {}x{}",
                self.rows,
                self.ncols(),
                other.rows,
                other.ncols()
            )));
        }
        let a = self.to_integer();
        let cols = other.ncols();
        let mut out = vec![0i64; self.rows * cols];
        for (k, j, v) in other.triplets() {
            for i in 0..self.rows {
                out[i * cols + j] += a[i * self.ncols() + k] * v as i64;
            }
        }
        Ok(out)
    }
}

/// `B_q` of a complex in its canonical ordering. `q = 0` gives a matrix with no rows.
pub fn boundary_matrix(complex: &SimplicialComplex, q: usize) -> Result<BoundaryMatrix> {
    let sources = complex.simplices(q)?;
    let rows = if q == 0 { 0 } else { complex.count(q - 1)? };
    let mut columns = Vec::with_capacity(sources.len());
    for s in sources {
        let mut col = Vec::with_capacity(q + 1);
        for (i, face) in s.faces() {
            let row = complex.index_of(q - 1, face.bits()).ok_or_else(|| {
                Error::invariant("boundary matrix", format!("face {:?} of {:?} missing", face.vertices(), s.vertices()))
            })?;
            col.push((row, if i % 2 == 0 { 1 } else { -1 }));
        }
        col.sort_unstable();
        columns.push(col);
    }
    Ok(BoundaryMatrix { q, rows, columns })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LaplacianKind {
    Down,
    Up,
    Combinatorial,
    PersistentUp,
    Persistent,
}

/// A symmetric positive-semidefinite Laplacian in the canonical q-simplex basis.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix {
    pub kind: LaplacianKind,
    pub q: usize,
    pub matrix: DMatrix<f64>,
}

impl LaplacianMatrix {
    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigenvalues(&self.matrix)
    }

    pub fn nullity(&self) -> usize {
        nullity_of_spectrum(&self.eigenvalues())
    }
}

fn gram(b: &DMatrix<f64>) -> DMatrix<f64> {
    b * b.transpose()
}

fn cogram(b: &DMatrix<f64>) -> DMatrix<f64> {
    b.transpose() * b
}

pub fn down_laplacian(complex: &SimplicialComplex, q: usize) -> Result<LaplacianMatrix> {
    let b = boundary_matrix(complex, q)?.to_dense();
    Ok(LaplacianMatrix { kind: LaplacianKind::Down, q, matrix: cogram(&b) })
}

pub fn up_laplacian(complex: &SimplicialComplex, q: usize) -> Result<LaplacianMatrix> {
    let b = boundary_matrix(complex, q + 1)?.to_dense();
    Ok(LaplacianMatrix { kind: LaplacianKind::Up, q, matrix: gram(&b) })
}

/// `B_{q+1} B_{q+1}^T + B_q^T B_q`.
pub fn combinatorial_laplacian(complex: &SimplicialComplex, q: usize) -> Result<LaplacianMatrix> {
    let up = up_laplacian(complex, q)?;
    let down = down_laplacian(complex, q)?;
    Ok(LaplacianMatrix { kind: LaplacianKind::Combinatorial, q, matrix: up.matrix + down.matrix })
}

/// `beta_q` as the nullity of the combinatorial Laplacian.
pub fn betti_number(complex: &SimplicialComplex, q: usize) -> Result<usize> {
    Ok(combinatorial_laplacian(complex, q)?.nullity())
}

/// `beta_q = dim ker B_q - rank B_{q+1}` with exact ranks.
pub fn betti_number_rank(complex: &SimplicialComplex, q: usize) -> Result<usize> {
    let bq = boundary_matrix(complex, q)?;
    let bq1 = boundary_matrix(complex, q + 1)?;
    Ok(bq.ncols() - bq.rank() - bq1.rank())
}

/// `M/D = A - B D^+ C` where `D = M(I, I)` and `A` is indexed by the complement of `I`.
pub fn schur_complement(m: &DMatrix<f64>, index_set: &[usize]) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Input("Schur complement needs a square matrix".into()));
    }
    let mut mask = vec![false; n];
    for &i in index_set {
        if i >= n {
            return Err(Error::Input(format!("index {i} out of range for size {n}")));
        }
        mask[i] = true;
    }
    let inner: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
    let outer: Vec<usize> = (0..n).filter(|&i| !mask[i]).collect();
    if inner.is_empty() || outer.is_empty() {
        return Err(Error::Input("index set must be a nonempty proper subset".into()));
    }
    let a = m.select_rows(&outer).select_columns(&outer);
    let b = m.select_rows(&outer).select_columns(&inner);
    let c = m.select_rows(&inner).select_columns(&outer);
    let d = m.select_rows(&inner).select_columns(&inner);
    Ok(a - b * linalg::pseudo_inverse(&d) * c)
}

fn split(pair: &SimplicialPair, q: usize) -> Result<(usize, usize)> {
    pair.check_ordering()?;
    Ok((pair.small().count(q)?, pair.large().count(q)?))
}

/// `Δ^L_{q,up}` of the larger complex, in its `K`-first ordering.
pub fn large_up_laplacian(pair: &SimplicialPair, q: usize) -> Result<DMatrix<f64>> {
    Ok(up_laplacian(pair.large(), q)?.matrix)
}

/// The four blocks of `Δ^L_{q,up}` under the split `[n_q^K] | I`:
/// `[Δ1, Δ2; Δ3, Δ4]`.
pub fn up_laplacian_blocks(pair: &SimplicialPair, q: usize) -> Result<[DMatrix<f64>; 4]> {
    let (nk, nl) = split(pair, q)?;
    let m = large_up_laplacian(pair, q)?;
    let k: Vec<usize> = (0..nk).collect();
    let i: Vec<usize> = (nk..nl).collect();
    let block = |r: &[usize], c: &[usize]| m.select_rows(r).select_columns(c);
    Ok([block(&k, &k), block(&k, &i), block(&i, &k), block(&i, &i)])
}

/// `Δ^{K,L}_{q,up}` as the Schur complement of the `I` block of `Δ^L_{q,up}`.
pub fn persistent_up_laplacian(pair: &SimplicialPair, q: usize) -> Result<LaplacianMatrix> {
    let (nk, nl) = split(pair, q)?;
    let m = large_up_laplacian(pair, q)?;
    let matrix = if nk == nl {
        m
    } else if nk == 0 {
        DMatrix::zeros(0, 0)
    } else {
        schur_complement(&m, &(nk..nl).collect::<Vec<_>>())?
    };
    Ok(LaplacianMatrix { kind: LaplacianKind::PersistentUp, q, matrix })
}

/// `Δ^{K,L}_{q,up} = B^{L,K} (Z^T Z)^{-1} (B^{L,K})^T` from an explicit basis `Z`
/// of the chains whose boundary lies in `C^K_q`.
pub fn persistent_up_laplacian_zbasis(pair: &SimplicialPair, q: usize) -> Result<LaplacianMatrix> {
    let (nk, nl) = split(pair, q)?;
    let b = boundary_matrix(pair.large(), q + 1)?.to_dense();
    let outside: Vec<usize> = (nk..nl).collect();
    let z = kernel_basis_rref(&b.select_rows(&outside), 1e-12);
    let inside: Vec<usize> = (0..nk).collect();
    let blk = b.select_rows(&inside) * &z;
    let matrix = if z.ncols() == 0 {
        DMatrix::zeros(nk, nk)
    } else {
        let chol = (z.transpose() * &z).cholesky().ok_or_else(|| {
            Error::Numerical("Z^T Z is not positive definite; Z is not a basis".into())
        })?;
        &blk * chol.solve(&blk.transpose())
    };
    Ok(LaplacianMatrix { kind: LaplacianKind::PersistentUp, q, matrix })
}

/// `Δ^{K,L}_q = Δ^{K,L}_{q,up} + (B^K_q)^T B^K_q`.
pub fn persistent_laplacian(pair: &SimplicialPair, q: usize) -> Result<LaplacianMatrix> {
    let up = persistent_up_laplacian(pair, q)?;
    let down = down_laplacian(pair.small(), q)?;
    Ok(LaplacianMatrix { kind: LaplacianKind::Persistent, q, matrix: up.matrix + down.matrix })
}

/// `beta^{K,L}_q` as the nullity of the persistent Laplacian.
pub fn persistent_betti(pair: &SimplicialPair, q: usize) -> Result<usize> {
    Ok(persistent_laplacian(pair, q)?.nullity())
}

/// `beta^{K,L}_q = dim ker B^K_q - dim(im B^L_{q+1} ∩ C^K_q)` with exact ranks.
///
/// `im B^L_{q+1} ∩ C^K_q` is the image of the chains whose boundary has no
/// component outside `K`, so its dimension is
/// `rank B^L_{q+1} - rank B^L_{q+1}[I, :]`.
pub fn persistent_betti_rank(pair: &SimplicialPair, q: usize) -> Result<usize> {
    let (nk, nl) = split(pair, q)?;
    let bk = boundary_matrix(pair.small(), q)?;
    let bl = boundary_matrix(pair.large(), q + 1)?;
    let outside: Vec<usize> = (nk..nl).collect();
    let boundaries_in_k = bl.rank() - bl.rank_of_rows(&outside);
    Ok(nk - bk.rank() - boundaries_in_k)
}

/// A lower bound on the smallest nonzero eigenvalue of a PSD matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum GapBound {
    /// Half of the measured minimum, or a user override below it.
    Measured { minimum: f64, bound: f64 },
    /// Every eigenvalue is zero; the bound defaults to 1.
    AllZero,
    /// The matrix is empty.
    NotApplicable,
}

impl GapBound {
    fn from_spectrum(values: &[f64]) -> Self {
        if values.is_empty() {
            GapBound::NotApplicable
        } else {
            match linalg::min_nonzero(values) {
                Some(m) => GapBound::Measured { minimum: m, bound: m / 2.0 },
                None => GapBound::AllZero,
            }
        }
    }

    /// The bound to use downstream.
    pub fn value(&self) -> f64 {
        match *self {
            GapBound::Measured { bound, .. } => bound,
            GapBound::AllZero | GapBound::NotApplicable => 1.0,
        }
    }

    pub fn minimum(&self) -> Option<f64> {
        match *self {
            GapBound::Measured { minimum, .. } => Some(minimum),
            _ => None,
        }
    }

    /// Replace the bound, failing unless `0 < bound < minimum`.
    pub fn with_bound(self, bound: f64, name: &str) -> Result<Self> {
        match self {
            GapBound::Measured { minimum, .. } => {
                if !(bound > 0.0 && bound < minimum) {
                    return Err(Error::CertifiedBound(format!(
                        "{name} = {bound} must lie strictly between 0 and the measured minimum {minimum}"
                    )));
                }
                Ok(GapBound::Measured { minimum, bound })
            }
            other => Ok(other),
        }
    }
}

/// Gap bounds for `Δ4 = Δ^L_{q,up}(I, I)` (gamma) and `Δ^{K,L}_q` (lambda).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralGapBounds {
    pub gamma: GapBound,
    pub lambda: GapBound,
}

impl SpectralGapBounds {
    pub fn gamma_q(&self) -> f64 {
        self.gamma.value()
    }

    pub fn lambda_q(&self) -> f64 {
        self.lambda.value()
    }
}

pub fn spectral_bounds(pair: &SimplicialPair, q: usize) -> Result<SpectralGapBounds> {
    let [_, _, _, d4] = up_laplacian_blocks(pair, q)?;
    let lap = persistent_laplacian(pair, q)?;
    Ok(SpectralGapBounds {
        gamma: GapBound::from_spectrum(&linalg::eigenvalues(&d4)),
        lambda: GapBound::from_spectrum(&lap.eigenvalues()),
    })
}
