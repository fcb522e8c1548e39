//! Block-encodings held as `(block, alpha, ancillas, eps)` tuples.
//!
//! `block` is the operator the encoding actually realises, so `block / alpha`
//! is the top-left corner of the (never materialised) unitary and `eps`
//! bounds the distance from `block` to the intended operator. Logical spaces
//! are the Hamming-weight subspaces `W_q` of the n-qubit register.

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::complex::{binomial, MembershipFunction, SimplicialComplex};
use crate::error::{Error, Result};
use crate::homology::boundary_matrix;
use crate::linalg::{spectral_norm, sqrt_psd};

/// Slack allowed on `‖block‖ / alpha <= 1` for round-off.
pub const ENCODABILITY_TOL: f64 = 1e-9;

/// Largest unitary built by [`dilate_to_unitary`].
pub const MAX_DILATION_DIM: usize = 4096;

/// Basis states of `n` qubits with Hamming weight `weight`, ordered like the
/// vertex tuples of the corresponding simplices (lexicographically).
#[derive(Debug, Clone)]
pub struct HammingSpace {
    n: usize,
    weight: usize,
    states: Vec<u64>,
    index: HashMap<u64, usize>,
}

impl HammingSpace {
    pub fn new(n: usize, weight: usize) -> Result<Self> {
        if n > 64 {
            return Err(Error::Resource(format!("{n} qubits exceed the 64-qubit limit")));
        }
        let mut states = Vec::with_capacity(binomial(n, weight) as usize);
        let mut combo: Vec<usize> = (0..weight).collect();
        if weight <= n {
            loop {
                states.push(combo.iter().fold(0u64, |m, &v| m | 1 << v));
                // next combination in lexicographic order
                let Some(i) = (0..weight).rev().find(|&i| combo[i] < n - weight + i) else {
                    break;
                };
                combo[i] += 1;
                for j in i + 1..weight {
                    combo[j] = combo[j - 1] + 1;
                }
            }
        }
        let index = states.iter().enumerate().map(|(i, &b)| (b, i)).collect();
        Ok(Self { n, weight, states, index })
    }

    /// `W_q`, the states of weight `q + 1`.
    pub fn for_dimension(n: usize, q: usize) -> Result<Self> {
        Self::new(n, q + 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight(&self) -> usize {
        self.weight
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, i: usize) -> u64 {
        self.states[i]
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn index_of(&self, bits: u64) -> Option<usize> {
        self.index.get(&bits).copied()
    }

    pub fn label(&self) -> LogicalSpace {
        LogicalSpace::Hamming { n: self.n, weight: self.weight }
    }

    /// `1` on states accepted by `f_q`, `0` elsewhere.
    pub fn membership_mask(&self, f: &MembershipFunction, q: usize) -> Vec<bool> {
        self.states.iter().map(|&b| f.contains_bits(b, q)).collect()
    }

    /// Isometry `C_q(K) -> W_q` sending the j-th q-simplex to its basis state.
    pub fn embedding(&self, complex: &SimplicialComplex, q: usize) -> Result<DMatrix<f64>> {
        let simplices = complex.simplices(q)?;
        let mut e = DMatrix::zeros(self.dim(), simplices.len());
        for (j, s) in simplices.iter().enumerate() {
            let i = self.index_of(s.bits()).ok_or_else(|| {
                Error::invariant("embedding", format!("simplex {:?} is not in W_{q}", s.vertices()))
            })?;
            e[(i, j)] = 1.0;
        }
        Ok(e)
    }
}

/// Description of the row or column space of an encoded operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LogicalSpace {
    Hamming { n: usize, weight: usize },
    Plain { dim: usize },
}

impl LogicalSpace {
    pub fn dim(&self) -> usize {
        match *self {
            LogicalSpace::Hamming { n, weight } => binomial(n, weight) as usize,
            LogicalSpace::Plain { dim } => dim,
        }
    }
}

/// Scale, ancilla count, error and spaces of an encoding, without the block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EncodingMetadata {
    pub alpha: f64,
    pub ancillas: usize,
    pub eps: f64,
    pub rows: LogicalSpace,
    pub cols: LogicalSpace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VirtualBlockEncoding {
    block: DMatrix<f64>,
    alpha: f64,
    ancillas: usize,
    eps: f64,
    rows: LogicalSpace,
    cols: LogicalSpace,
}

impl VirtualBlockEncoding {
    /// Fails with an invariant error naming `stage` unless
    /// `‖block‖ / alpha <= 1 + eps / alpha`.
    pub fn new(
        stage: &str,
        block: DMatrix<f64>,
        alpha: f64,
        ancillas: usize,
        eps: f64,
        rows: LogicalSpace,
        cols: LogicalSpace,
    ) -> Result<Self> {
        if block.nrows() != rows.dim() || block.ncols() != cols.dim() {
            return Err(Error::invariant(
                stage,
                format!(
                    "block is {}x{} but the spaces have dimensions {} and {}",
                    block.nrows(),
                    block.ncols(),
                    rows.dim(),
                    cols.dim()
                ),
            ));
        }
        if !(alpha > 0.0 && alpha.is_finite()) || !(eps >= 0.0) {
            return Err(Error::invariant(stage, format!("invalid scale {alpha} or error {eps}")));
        }
        let u = Self { block, alpha, ancillas, eps, rows, cols };
        let ratio = u.normalized_norm();
        if ratio > 1.0 + eps / alpha + ENCODABILITY_TOL {
            return Err(Error::invariant(
                stage,
                format!("not encodable: ‖block‖/alpha = {ratio} exceeds 1 + eps/alpha"),
            ));
        }
        Ok(u)
    }

    /// An exact encoding of a plain square or rectangular matrix.
    pub fn from_matrix(block: DMatrix<f64>, alpha: f64) -> Result<Self> {
        let rows = LogicalSpace::Plain { dim: block.nrows() };
        let cols = LogicalSpace::Plain { dim: block.ncols() };
        Self::new("matrix encoding", block, alpha, 0, 0.0, rows, cols)
    }

    pub fn identity(space: LogicalSpace) -> Self {
        let d = space.dim();
        Self { block: DMatrix::identity(d, d), alpha: 1.0, ancillas: 0, eps: 0.0, rows: space, cols: space }
    }

    pub fn block(&self) -> &DMatrix<f64> {
        &self.block
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn ancillas(&self) -> usize {
        self.ancillas
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn rows(&self) -> LogicalSpace {
        self.rows
    }

    pub fn cols(&self) -> LogicalSpace {
        self.cols
    }

    /// `block / alpha`, the top-left corner of the unitary.
    pub fn normalized(&self) -> DMatrix<f64> {
        &self.block / self.alpha
    }

    pub fn normalized_norm(&self) -> f64 {
        spectral_norm(&self.block) / self.alpha
    }

    pub fn metadata(&self) -> EncodingMetadata {
        EncodingMetadata { alpha: self.alpha, ancillas: self.ancillas, eps: self.eps, rows: self.rows, cols: self.cols }
    }

    /// Encoding of the transpose (the inverse unitary), same scale and ancillas.
    pub fn adjoint(&self) -> Self {
        Self {
            block: self.block.transpose(),
            alpha: self.alpha,
            ancillas: self.ancillas,
            eps: self.eps,
            rows: self.cols,
            cols: self.rows,
        }
    }

    /// Same encoding with a larger error bound.
    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub(crate) fn from_parts(
        block: DMatrix<f64>,
        alpha: f64,
        ancillas: usize,
        eps: f64,
        rows: LogicalSpace,
        cols: LogicalSpace,
    ) -> Self {
        Self { block, alpha, ancillas, eps, rows, cols }
    }
}

/// Ancillas of the boundary encoding: two index registers of `⌈log2 n⌉`
/// qubits, a `⌈log2(q+1)⌉` sign register and four flags.
pub fn boundary_ancillas(n: usize, q: usize) -> usize {
    let log2 = |x: usize| if x <= 1 { 0 } else { (usize::BITS - (x - 1).leading_zeros()) as usize };
    2 * log2(n) + log2(q + 1) + 4
}

/// `(n(q+1), a, 0)`-encoding of `∂_q` of `complex` as a map `W_q -> W_{q-1}`.
///
/// Columns of basis states rejected by the membership function are zero.
pub fn encode_boundary(complex: &SimplicialComplex, q: usize) -> Result<VirtualBlockEncoding> {
    let n = complex.n_vertices();
    let f = complex.membership();
    let src = HammingSpace::for_dimension(n, q)?;
    let dst = HammingSpace::new(n, q)?;
    let simplices = complex.simplices(q)?;
    let accepted = src.membership_mask(f, q).iter().filter(|&&m| m).count();
    if accepted != simplices.len() || simplices.iter().any(|s| !f.contains_bits(s.bits(), q)) {
        return Err(Error::invariant(
            "boundary encoding",
            format!("membership accepts {accepted} states but the complex has {} {q}-simplices", simplices.len()),
        ));
    }
    let mut block = DMatrix::zeros(dst.dim(), src.dim());
    if q > 0 {
        let b = boundary_matrix(complex, q)?;
        let faces = complex.simplices(q - 1)?;
        for (j, s) in simplices.iter().enumerate() {
            let col = src.index_of(s.bits()).expect("weight q+1 state");
            for &(r, v) in b.column(j) {
                let row = dst.index_of(faces[r].bits()).expect("weight q state");
                block[(row, col)] = v as f64;
            }
        }
    }
    VirtualBlockEncoding::new(
        "boundary encoding",
        block,
        (n * (q + 1)).max(1) as f64,
        boundary_ancillas(n, q),
        0.0,
        dst.label(),
        src.label(),
    )
}

/// Product: `(alpha beta, a + b, alpha eps_v + beta eps_u)` encoding of `A B`.
pub fn product(u: &VirtualBlockEncoding, v: &VirtualBlockEncoding) -> Result<VirtualBlockEncoding> {
    if u.cols != v.rows {
        return Err(Error::Input(format!("cannot multiply encodings: {:?} vs {:?}", u.cols, v.rows)));
    }
    Ok(VirtualBlockEncoding {
        block: &u.block * &v.block,
        alpha: u.alpha * v.alpha,
        ancillas: u.ancillas + v.ancillas,
        eps: u.alpha * v.eps + v.alpha * u.eps,
        rows: u.rows,
        cols: v.cols,
    })
}

/// Which basis states a restriction keeps.
#[derive(Debug, Clone)]
pub enum SubspaceFilter<'a> {
    All,
    Members(&'a MembershipFunction, usize),
    NonMembers(&'a MembershipFunction, usize),
}

impl SubspaceFilter<'_> {
    fn mask(&self, space: LogicalSpace) -> Result<Vec<bool>> {
        match (self, space) {
            (SubspaceFilter::All, s) => Ok(vec![true; s.dim()]),
            (SubspaceFilter::Members(f, q) | SubspaceFilter::NonMembers(f, q), LogicalSpace::Hamming { n, weight }) => {
                if f.n_vertices() != n {
                    return Err(Error::Input(format!(
                        "filter on {} vertices applied to a {n}-qubit space",
                        f.n_vertices()
                    )));
                }
                let keep = matches!(self, SubspaceFilter::Members(..));
                let space = HammingSpace::new(n, weight)?;
                Ok(space.membership_mask(f, *q).into_iter().map(|m| m == keep).collect())
            }
            (_, LogicalSpace::Plain { .. }) => {
                Err(Error::Input("membership filters need a Hamming-weight space".into()))
            }
        }
    }
}

/// `Π_row A Π_col` with the projectors given by the filters; two more ancillas.
pub fn restrict_submatrix(
    u: &VirtualBlockEncoding,
    row_filter: &SubspaceFilter<'_>,
    col_filter: &SubspaceFilter<'_>,
) -> Result<VirtualBlockEncoding> {
    let rmask = row_filter.mask(u.rows)?;
    let cmask = col_filter.mask(u.cols)?;
    let mut block = u.block.clone();
    for (i, keep) in rmask.iter().enumerate() {
        if !keep {
            block.row_mut(i).fill(0.0);
        }
    }
    for (j, keep) in cmask.iter().enumerate() {
        if !keep {
            block.column_mut(j).fill(0.0);
        }
    }
    Ok(VirtualBlockEncoding { block, ancillas: u.ancillas + 2, ..u.clone() })
}

/// Signed linear combination `Σ sign_i A_i` of encodings.
#[derive(Debug, Clone, Default)]
pub struct LcuPlan {
    terms: Vec<(f64, VirtualBlockEncoding)>,
}

impl LcuPlan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(mut self, sign: f64, term: VirtualBlockEncoding) -> Self {
        self.terms.push((sign, term));
        self
    }

    pub fn terms(&self) -> &[(f64, VirtualBlockEncoding)] {
        &self.terms
    }

    /// `beta = Σ alpha_i`.
    pub fn scale(&self) -> f64 {
        self.terms.iter().map(|(_, t)| t.alpha).sum()
    }

    /// Per-term scales `alpha_i`.
    pub fn coefficients(&self) -> Vec<f64> {
        self.terms.iter().map(|(_, t)| t.alpha).collect()
    }
}

/// Combined encoding: scale `Σ alpha_i`, error `Σ eps_i`, ancillas `max a_i + 2`.
pub fn linear_combine(plan: &LcuPlan) -> Result<VirtualBlockEncoding> {
    let (_, first) = plan.terms.first().ok_or_else(|| Error::Input("empty LCU plan".into()))?;
    let mut block = DMatrix::zeros(first.block.nrows(), first.block.ncols());
    for (sign, t) in &plan.terms {
        if sign.abs() != 1.0 {
            return Err(Error::Input(format!("LCU signs must be ±1, got {sign}")));
        }
        if t.rows != first.rows || t.cols != first.cols {
            return Err(Error::Input("LCU terms act on different spaces".into()));
        }
        block += &t.block * *sign;
    }
    Ok(VirtualBlockEncoding {
        block,
        alpha: plan.scale(),
        ancillas: plan.terms.iter().map(|(_, t)| t.ancillas).max().unwrap_or(0) + 2,
        eps: plan.terms.iter().map(|(_, t)| t.eps).sum(),
        rows: first.rows,
        cols: first.cols,
    })
}

fn pad_square(a: &DMatrix<f64>) -> DMatrix<f64> {
    let m = a.nrows().max(a.ncols());
    let mut out = DMatrix::zeros(m, m);
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out
}

/// Unitary `[[A, sqrt(I - A A^T)], [sqrt(I - A^T A), -A^T]]` with `A = block / alpha`
/// padded to a square of side `m`; the result has side `2m`.
pub fn dilate_to_unitary(u: &VirtualBlockEncoding) -> Result<DMatrix<f64>> {
    let a = pad_square(&u.normalized());
    let m = a.nrows();
    if 2 * m > MAX_DILATION_DIM {
        return Err(Error::Resource(format!("dilation of dimension {} exceeds {MAX_DILATION_DIM}", 2 * m)));
    }
    let norm = spectral_norm(&a);
    if norm > 1.0 + ENCODABILITY_TOL {
        return Err(Error::invariant("dilation", format!("‖block‖/alpha = {norm} exceeds 1")));
    }
    let id = DMatrix::<f64>::identity(m, m);
    let at = a.transpose();
    let mut w = DMatrix::zeros(2 * m, 2 * m);
    w.view_mut((0, 0), (m, m)).copy_from(&a);
    w.view_mut((0, m), (m, m)).copy_from(&sqrt_psd(&(&id - &a * &at)));
    w.view_mut((m, 0), (m, m)).copy_from(&sqrt_psd(&(&id - &at * &a)));
    w.view_mut((m, m), (m, m)).copy_from(&(-at));
    Ok(w)
}

/// Top-left `rows x cols` corner of a unitary.
pub fn extract_block(unitary: &DMatrix<f64>, rows: usize, cols: usize) -> DMatrix<f64> {
    unitary.view((0, 0), (rows, cols)).into_owned()
}

/// Product of two encodings computed at the unitary level: dilate both,
/// act on separate ancilla qubits, multiply, and read the corner with both
/// ancillas in `|0>`. Returns the corner, which should equal `AB/(alpha beta)`.
pub fn product_via_dilation(u: &VirtualBlockEncoding, v: &VirtualBlockEncoding) -> Result<DMatrix<f64>> {
    if u.cols != v.rows {
        return Err(Error::Input("cannot multiply encodings over different spaces".into()));
    }
    let m = [u.block.nrows(), u.block.ncols(), v.block.nrows(), v.block.ncols()].into_iter().max().unwrap_or(0);
    let pad = |e: &VirtualBlockEncoding| {
        let mut b = DMatrix::zeros(m, m);
        b.view_mut((0, 0), e.block.shape()).copy_from(&e.block);
        VirtualBlockEncoding { block: b, ..e.clone() }
    };
    let (uu, vv) = (dilate_to_unitary(&pad(u))?, dilate_to_unitary(&pad(v))?);
    // register order: (ancilla_u, ancilla_v, system); index = (au * 2 + av) * m + s
    let dim = 4 * m;
    if dim > MAX_DILATION_DIM {
        return Err(Error::Resource(format!("composed dilation of dimension {dim} exceeds {MAX_DILATION_DIM}")));
    }
    let lift = |w: &DMatrix<f64>, first: bool| {
        let mut big = DMatrix::zeros(dim, dim);
        for a in 0..2 {
            for b in 0..2 {
                for other in 0..2 {
                    let (r, c) = if first { ((a * 2 + other) * m, (b * 2 + other) * m) } else { ((other * 2 + a) * m, (other * 2 + b) * m) };
                    big.view_mut((r, c), (m, m)).copy_from(&w.view((a * m, b * m), (m, m)));
                }
            }
        }
        big
    };
    let composed = lift(&uu, true) * lift(&vv, false);
    Ok(composed.view((0, 0), (u.block.nrows(), v.block.ncols())).into_owned())
}
