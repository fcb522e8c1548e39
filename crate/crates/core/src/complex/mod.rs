//! Simplicial complexes, simplicial pairs and their membership predicates.
//!
//! Vertices are indices `0..n`. A q-simplex is stored as a strictly
//! increasing vertex list, which fixes its orientation. Each dimension keeps
//! a canonical ordered list of simplices; within a pair `K -> L` the lists of
//! `L` start with the simplices of `K` in `K`'s order.

mod build;
mod membership;

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use build::{
    build_lazy_witness, build_vietoris_rips, build_vr_from_graph, PointCloud, WeightedGraph,
};
pub use membership::{BitString, MembershipFunction, Provenance};

/// Vertex bitmasks are `u64`.
pub const MAX_VERTICES: usize = 64;

/// Ordered vertex labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexSet {
    labels: Vec<String>,
}

impl VertexSet {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        let unique: HashSet<&String> = labels.iter().collect();
        if unique.len() != labels.len() {
            return Err(Error::Input("duplicate vertex labels".into()));
        }
        if labels.len() > MAX_VERTICES {
            return Err(Error::Resource(format!(
                "{} vertices exceed the {MAX_VERTICES}-vertex limit",
                labels.len()
            )));
        }
        Ok(Self { labels })
    }

    /// Vertices labelled `"0"`, `"1"`, ...
    pub fn indexed(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| i.to_string()).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// An oriented simplex: strictly increasing vertex indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Simplex(Vec<usize>);

impl Simplex {
    /// Sorts the vertices; repeated vertices are rejected.
    pub fn new(mut vertices: Vec<usize>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Input("a simplex needs at least one vertex".into()));
        }
        vertices.sort_unstable();
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Input(format!("repeated vertex in simplex {vertices:?}")));
        }
        Ok(Self(vertices))
    }

    pub(crate) fn from_sorted(vertices: Vec<usize>) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        Self(vertices)
    }

    pub(crate) fn from_bits(bits: u64) -> Self {
        Self((0..64).filter(|i| bits >> i & 1 == 1).collect())
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len() - 1
    }

    pub fn bits(&self) -> u64 {
        self.0.iter().fold(0u64, |m, &v| m | 1 << v)
    }

    /// `(i, face)` pairs where `face` omits the i-th vertex. Empty for vertices.
    pub fn faces(&self) -> impl Iterator<Item = (usize, Simplex)> + '_ {
        let q = self.0.len();
        (0..q).filter(move |_| q > 1).map(move |i| {
            let mut f = self.0.clone();
            f.remove(i);
            (i, Simplex(f))
        })
    }
}

/// A finite simplicial complex materialised through `max_dim`.
///
/// Dimensions above `max_dim` are unknown unless `max_dim >= n - 1`, in which
/// case every dimension is known (and empty from `n` on).
#[derive(Debug, Clone)]
pub struct SimplicialComplex {
    vertex_set: VertexSet,
    simplices: Vec<Vec<Simplex>>,
    index: Vec<HashMap<u64, usize>>,
    max_dim: usize,
    membership: MembershipFunction,
}

impl SimplicialComplex {
    /// Assemble from per-dimension lists, sorting each lexicographically.
    pub(crate) fn from_lists(
        vertex_set: VertexSet,
        mut simplices: Vec<Vec<Simplex>>,
        max_dim: usize,
        membership: MembershipFunction,
    ) -> Self {
        simplices.resize(max_dim + 1, Vec::new());
        for list in &mut simplices {
            list.sort();
            list.dedup();
        }
        Self::with_order(vertex_set, simplices, max_dim, membership)
    }

    fn with_order(
        vertex_set: VertexSet,
        simplices: Vec<Vec<Simplex>>,
        max_dim: usize,
        membership: MembershipFunction,
    ) -> Self {
        let index = simplices
            .iter()
            .map(|list| list.iter().enumerate().map(|(i, s)| (s.bits(), i)).collect())
            .collect();
        Self { vertex_set, simplices, index, max_dim, membership }
    }

    /// Downward closure of the given simplices on `n` vertices. All
    /// dimensions are materialised.
    pub fn from_simplices<I, S>(n: usize, simplices: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<Vec<usize>>,
    {
        let vertex_set = VertexSet::indexed(n)?;
        let mut all: HashSet<u64> = HashSet::new();
        for s in simplices {
            let s = Simplex::new(s.into())?;
            if let Some(&v) = s.vertices().iter().find(|&&v| v >= n) {
                return Err(Error::Input(format!("vertex {v} out of range for {n} vertices")));
            }
            close_downward(s.bits(), &mut all);
        }
        let max_dim = n.saturating_sub(1);
        let mut lists = vec![Vec::new(); max_dim + 1];
        for &b in &all {
            let s = Simplex::from_bits(b);
            lists[s.dimension()].push(s);
        }
        let membership = MembershipFunction::listed(n, max_dim, all);
        Ok(Self::from_lists(vertex_set, lists, max_dim, membership))
    }

    pub fn vertex_set(&self) -> &VertexSet {
        &self.vertex_set
    }

    pub fn n_vertices(&self) -> usize {
        self.vertex_set.len()
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn membership(&self) -> &MembershipFunction {
        &self.membership
    }

    pub fn provenance(&self) -> Provenance {
        self.membership.provenance()
    }

    /// Whether the q-simplex list is known.
    pub fn is_materialized(&self, q: usize) -> bool {
        q <= self.max_dim || q >= self.n_vertices()
    }

    /// The canonical q-simplex list.
    pub fn simplices(&self, q: usize) -> Result<&[Simplex]> {
        if q <= self.max_dim {
            Ok(&self.simplices[q])
        } else if q >= self.n_vertices() {
            Ok(&[])
        } else {
            Err(Error::Input(format!(
                "dimension {q} is not materialised (complex built through dimension {})",
                self.max_dim
            )))
        }
    }

    /// `n_q`, the number of q-simplices.
    pub fn count(&self, q: usize) -> Result<usize> {
        self.simplices(q).map(<[Simplex]>::len)
    }

    /// Position of a simplex (given by its vertex bitmask) in the q-list.
    pub fn index_of(&self, q: usize, bits: u64) -> Option<usize> {
        self.index.get(q).and_then(|m| m.get(&bits).copied())
    }

    pub fn contains(&self, simplex: &Simplex) -> bool {
        self.index_of(simplex.dimension(), simplex.bits()).is_some()
    }

    /// Top non-empty dimension, if any simplex exists.
    pub fn dimension(&self) -> Option<usize> {
        self.simplices.iter().rposition(|l| !l.is_empty())
    }

    /// Every face of every simplex is present.
    pub fn is_closed(&self) -> bool {
        self.simplices.iter().flatten().all(|s| s.faces().all(|(_, f)| self.contains(&f)))
    }

    /// `f_q(sigma)` for this complex.
    pub fn membership_of(&self, sigma: &BitString, q: usize) -> Result<bool> {
        self.membership.contains(sigma, q)
    }

    /// Serialisable listing of all simplices by dimension, in canonical order.
    pub fn export(&self) -> ComplexExport {
        ComplexExport {
            n_vertices: self.n_vertices(),
            labels: self.vertex_set.labels().to_vec(),
            provenance: self.provenance(),
            max_dim: self.max_dim,
            simplices: self
                .simplices
                .iter()
                .map(|l| l.iter().map(|s| s.vertices().to_vec()).collect())
                .collect(),
        }
    }

    /// The same complex with each list reordered so that the simplices of
    /// `prefix` come first (in `prefix`'s order), the rest lexicographically.
    fn reordered_after(&self, prefix: &SimplicialComplex) -> Self {
        let lists = self
            .simplices
            .iter()
            .enumerate()
            .map(|(q, list)| {
                let head: Vec<Simplex> = prefix.simplices(q).map(<[Simplex]>::to_vec).unwrap_or_default();
                let head_bits: HashSet<u64> = head.iter().map(Simplex::bits).collect();
                let mut tail: Vec<Simplex> =
                    list.iter().filter(|s| !head_bits.contains(&s.bits())).cloned().collect();
                tail.sort();
                head.into_iter().chain(tail).collect()
            })
            .collect();
        Self::with_order(self.vertex_set.clone(), lists, self.max_dim, self.membership.clone())
    }
}

fn close_downward(bits: u64, acc: &mut HashSet<u64>) {
    if bits == 0 || !acc.insert(bits) {
        return;
    }
    if bits.count_ones() == 1 {
        return;
    }
    let mut rest = bits;
    while rest != 0 {
        let low = rest & rest.wrapping_neg();
        close_downward(bits & !low, acc);
        rest &= !low;
    }
}

/// JSON listing of a complex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexExport {
    pub n_vertices: usize,
    pub labels: Vec<String>,
    pub provenance: Provenance,
    pub max_dim: usize,
    pub simplices: Vec<Vec<Vec<usize>>>,
}

/// A simplicial pair `K -> L` over one vertex set, with `L`'s lists ordered
/// `K`-first.
#[derive(Debug, Clone)]
pub struct SimplicialPair {
    small: SimplicialComplex,
    large: SimplicialComplex,
}

impl SimplicialPair {
    /// Checks inclusion and reorders `large` so that `small`'s simplices come first.
    pub fn new(small: SimplicialComplex, large: SimplicialComplex) -> Result<Self> {
        check_inclusion(&small, &large)?;
        let large = large.reordered_after(&small);
        Ok(Self { small, large })
    }

    /// Accepts the lists as given, failing if the prefix property does not hold.
    pub fn from_ordered(small: SimplicialComplex, large: SimplicialComplex) -> Result<Self> {
        check_inclusion(&small, &large)?;
        let pair = Self { small, large };
        pair.check_ordering()?;
        Ok(pair)
    }

    /// The pair `K -> K`.
    pub fn identity(complex: SimplicialComplex) -> Self {
        Self { small: complex.clone(), large: complex }
    }

    pub fn small(&self) -> &SimplicialComplex {
        &self.small
    }

    pub fn large(&self) -> &SimplicialComplex {
        &self.large
    }

    pub fn n_vertices(&self) -> usize {
        self.small.n_vertices()
    }

    /// First `n_q^K` entries of `L`'s q-list equal `K`'s q-list, for every
    /// dimension materialised in both.
    pub fn check_ordering(&self) -> Result<()> {
        let top = self.small.max_dim.min(self.large.max_dim);
        for q in 0..=top {
            let k = self.small.simplices(q)?;
            let l = self.large.simplices(q)?;
            if l.len() < k.len() || l[..k.len()] != *k {
                return Err(Error::invariant(
                    "simplicial pair",
                    format!("dimension {q}: L's simplex list does not start with K's"),
                ));
            }
        }
        Ok(())
    }
}

fn check_inclusion(small: &SimplicialComplex, large: &SimplicialComplex) -> Result<()> {
    if small.vertex_set != large.vertex_set {
        return Err(Error::Input("K and L must share one ordered vertex set".into()));
    }
    for q in 0..=small.max_dim {
        let list = small.simplices(q)?;
        if list.is_empty() {
            continue;
        }
        if !large.is_materialized(q) {
            return Err(Error::Input(format!("L is not materialised in dimension {q}")));
        }
        if let Some(s) = list.iter().find(|s| !large.contains(s)) {
            return Err(Error::Input(format!("simplex {:?} of K is missing from L", s.vertices())));
        }
    }
    Ok(())
}

/// `n_q / C(n, q+1)`.
pub fn simplex_density(complex: &SimplicialComplex, q: usize) -> Result<f64> {
    let n = complex.n_vertices();
    if q >= n {
        return Err(Error::Input(format!("q = {q} must be below the vertex count {n}")));
    }
    Ok(complex.count(q)? as f64 / binomial(n, q + 1) as f64)
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}
