use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An `n`-bit string naming a vertex subset. Bit `i` set means vertex `i`
/// is in the subset; the textual form lists vertex 0 first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitString {
    bits: u64,
    len: usize,
}

impl BitString {
    pub fn new(bits: u64, len: usize) -> Result<Self> {
        if len > 64 {
            return Err(Error::Input(format!("bit-strings are limited to 64 bits, got {len}")));
        }
        if len < 64 && bits >> len != 0 {
            return Err(Error::Input(format!("bits {bits:#b} do not fit in length {len}")));
        }
        Ok(Self { bits, len })
    }

    /// Parse a string such as `"110"` (vertices 0 and 1 set).
    pub fn parse(s: &str) -> Result<Self> {
        let mut bits = 0u64;
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '1' => bits |= 1 << i,
                '0' => {}
                other => return Err(Error::Input(format!("invalid bit character {other:?}"))),
            }
        }
        Self::new(bits, s.chars().count())
    }

    pub fn from_vertices(vertices: &[usize], len: usize) -> Result<Self> {
        let mut bits = 0u64;
        for &v in vertices {
            if v >= len {
                return Err(Error::Input(format!("vertex {v} out of range for length {len}")));
            }
            bits |= 1 << v;
        }
        Self::new(bits, len)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn weight(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn vertices(&self) -> Vec<usize> {
        (0..self.len).filter(|i| self.bits >> i & 1 == 1).collect()
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.bits >> i & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// How a complex was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    VietorisRips,
    GraphVietorisRips,
    LazyWitness,
    Explicit,
}

#[derive(Debug, Clone)]
enum Rule {
    /// All pairwise distances at most `diameter` (row-major `n x n`).
    PointDistances { distances: Vec<f64>, diameter: f64 },
    /// All pairs joined by an edge of weight at most `threshold`.
    GraphWeights { weights: Vec<Option<f64>>, threshold: f64 },
    /// Clique of a precomputed 1-skeleton (one neighbour mask per vertex).
    Skeleton { neighbours: Vec<u64> },
    Listed { simplices: HashSet<u64> },
}

/// The membership predicate `f_q(sigma)` of a complex.
///
/// Clique-type complexes answer without consulting any simplex list: a
/// subset is a member iff every pair of its vertices passes the edge test.
#[derive(Debug, Clone)]
pub struct MembershipFunction {
    n: usize,
    max_dim: usize,
    provenance: Provenance,
    rule: Rule,
}

impl MembershipFunction {
    pub(crate) fn point_distances(n: usize, max_dim: usize, distances: Vec<f64>, diameter: f64) -> Self {
        Self {
            n,
            max_dim,
            provenance: Provenance::VietorisRips,
            rule: Rule::PointDistances { distances, diameter },
        }
    }

    pub(crate) fn graph_weights(
        n: usize,
        max_dim: usize,
        weights: Vec<Option<f64>>,
        threshold: f64,
    ) -> Self {
        Self {
            n,
            max_dim,
            provenance: Provenance::GraphVietorisRips,
            rule: Rule::GraphWeights { weights, threshold },
        }
    }

    pub(crate) fn skeleton(n: usize, max_dim: usize, neighbours: Vec<u64>) -> Self {
        Self { n, max_dim, provenance: Provenance::LazyWitness, rule: Rule::Skeleton { neighbours } }
    }

    pub(crate) fn listed(n: usize, max_dim: usize, simplices: HashSet<u64>) -> Self {
        Self { n, max_dim, provenance: Provenance::Explicit, rule: Rule::Listed { simplices } }
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    /// `f_q(sigma)`. Returns `false` when the Hamming weight is not `q + 1`.
    pub fn contains(&self, sigma: &BitString, q: usize) -> Result<bool> {
        if sigma.len() != self.n {
            return Err(Error::Input(format!(
                "bit-string length {} does not match vertex count {}",
                sigma.len(),
                self.n
            )));
        }
        Ok(self.contains_bits(sigma.bits(), q))
    }

    pub(crate) fn contains_bits(&self, bits: u64, q: usize) -> bool {
        if bits.count_ones() as usize != q + 1 || q > self.max_dim {
            return false;
        }
        if self.n < 64 && bits >> self.n != 0 {
            return false;
        }
        match &self.rule {
            Rule::PointDistances { distances, diameter } => {
                all_pairs(bits, |a, b| distances[a * self.n + b] <= *diameter)
            }
            Rule::GraphWeights { weights, threshold } => {
                all_pairs(bits, |a, b| matches!(weights[a * self.n + b], Some(w) if w <= *threshold))
            }
            Rule::Skeleton { neighbours } => all_pairs(bits, |a, b| neighbours[a] >> b & 1 == 1),
            Rule::Listed { simplices } => simplices.contains(&bits),
        }
    }

    /// Neighbour masks of the 1-skeleton, for clique-type rules.
    pub(crate) fn neighbour_masks(&self) -> Option<Vec<u64>> {
        let n = self.n;
        let edge = |a: usize, b: usize| self.contains_bits((1 << a) | (1 << b), 1);
        match self.rule {
            Rule::Listed { .. } => None,
            _ => Some(
                (0..n)
                    .map(|a| (0..n).filter(|&b| b != a && edge(a, b)).fold(0u64, |m, b| m | 1 << b))
                    .collect(),
            ),
        }
    }
}

fn all_pairs(bits: u64, mut edge: impl FnMut(usize, usize) -> bool) -> bool {
    let vs: Vec<usize> = (0..64).filter(|i| bits >> i & 1 == 1).collect();
    for (i, &a) in vs.iter().enumerate() {
        for &b in &vs[i + 1..] {
            if !edge(a, b) {
                return false;
            }
        }
    }
    true
}
