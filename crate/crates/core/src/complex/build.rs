use serde::{Deserialize, Serialize};

use super::{MembershipFunction, Simplex, SimplicialComplex, VertexSet, MAX_VERTICES};
use crate::error::{Error, Result};

/// Points in R^d with the Euclidean metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    points: Vec<Vec<f64>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(first) = points.first() {
            let d = first.len();
            if let Some(i) = points.iter().position(|p| p.len() != d) {
                return Err(Error::Input(format!(
                    "point {i} has dimension {} but point 0 has dimension {d}",
                    points[i].len()
                )));
            }
        }
        if let Some(i) = points.iter().position(|p| p.iter().any(|x| !x.is_finite())) {
            return Err(Error::Input(format!("point {i} has a non-finite coordinate")));
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.points[a].iter().zip(&self.points[b]).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    }

    fn distance_matrix(&self) -> Vec<f64> {
        let n = self.len();
        let mut d = vec![0.0; n * n];
        for a in 0..n {
            for b in (a + 1)..n {
                let v = self.distance(a, b);
                d[a * n + b] = v;
                d[b * n + a] = v;
            }
        }
        d
    }
}

/// Undirected weighted graph; `None` marks a missing edge.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    weights: Vec<Option<f64>>,
}

impl WeightedGraph {
    /// From a full adjacency matrix, which must be symmetric.
    pub fn from_adjacency(adjacency: Vec<Vec<Option<f64>>>) -> Result<Self> {
        let n = adjacency.len();
        if adjacency.iter().any(|row| row.len() != n) {
            return Err(Error::Input("adjacency matrix is not square".into()));
        }
        for a in 0..n {
            for b in 0..n {
                let (x, y) = (adjacency[a][b], adjacency[b][a]);
                if x != y {
                    return Err(Error::Input(format!(
                        "asymmetric adjacency: w({a},{b}) = {x:?} but w({b},{a}) = {y:?}"
                    )));
                }
                if let Some(w) = x {
                    if !w.is_finite() {
                        return Err(Error::Input(format!("edge ({a},{b}) has non-finite weight")));
                    }
                }
            }
        }
        Ok(Self { n, weights: adjacency.into_iter().flatten().collect() })
    }

    /// From an edge list. Repeated edges must carry equal weights.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut adjacency = vec![vec![None; n]; n];
        for &(u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::Input(format!("edge ({u},{v}) out of range for {n} vertices")));
            }
            if u == v {
                return Err(Error::Input(format!("self-loop at vertex {u}")));
            }
            for (a, b) in [(u, v), (v, u)] {
                match adjacency[a][b] {
                    Some(old) if old != w => {
                        return Err(Error::Input(format!(
                            "asymmetric adjacency: edge ({u},{v}) listed with weights {old} and {w}"
                        )))
                    }
                    _ => adjacency[a][b] = Some(w),
                }
            }
        }
        Self::from_adjacency(adjacency)
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn weight(&self, a: usize, b: usize) -> Option<f64> {
        self.weights[a * self.n + b]
    }
}

fn check_vertex_count(n: usize) -> Result<()> {
    if n > MAX_VERTICES {
        return Err(Error::Resource(format!("{n} vertices exceed the {MAX_VERTICES}-vertex limit")));
    }
    Ok(())
}

/// All cliques of at most `max_dim + 1` vertices, per dimension.
fn clique_lists(neighbours: &[u64], max_dim: usize) -> Vec<Vec<Simplex>> {
    fn grow(
        clique: &mut Vec<usize>,
        candidates: u64,
        neighbours: &[u64],
        max_dim: usize,
        out: &mut Vec<Vec<Simplex>>,
    ) {
        out[clique.len() - 1].push(Simplex::from_sorted(clique.clone()));
        if clique.len() > max_dim {
            return;
        }
        let mut rest = candidates;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            clique.push(v);
            // only extend with larger vertices to keep the list increasing
            let above = if v >= 63 { 0 } else { !0u64 << (v + 1) };
            grow(clique, candidates & neighbours[v] & above, neighbours, max_dim, out);
            clique.pop();
        }
    }

    let mut out = vec![Vec::new(); max_dim + 1];
    for v in 0..neighbours.len() {
        let above = if v >= 63 { 0 } else { !0u64 << (v + 1) };
        grow(&mut vec![v], neighbours[v] & above, neighbours, max_dim, &mut out);
    }
    out
}

fn clique_complex(n: usize, max_dim: usize, membership: MembershipFunction) -> Result<SimplicialComplex> {
    let neighbours = membership.neighbour_masks().expect("clique-type membership");
    let lists = clique_lists(&neighbours, max_dim);
    Ok(SimplicialComplex::from_lists(VertexSet::indexed(n)?, lists, max_dim, membership))
}

/// Vietoris-Rips complex at scale `epsilon`: simplices whose pairwise
/// distances are all at most `2 * epsilon`.
pub fn build_vietoris_rips(cloud: &PointCloud, epsilon: f64, max_dim: usize) -> Result<SimplicialComplex> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::Input(format!("scale must be finite and non-negative, got {epsilon}")));
    }
    let n = cloud.len();
    check_vertex_count(n)?;
    let membership = MembershipFunction::point_distances(n, max_dim, cloud.distance_matrix(), 2.0 * epsilon);
    clique_complex(n, max_dim, membership)
}

/// Clique complex of the subgraph of edges with weight at most `threshold`.
pub fn build_vr_from_graph(
    graph: &WeightedGraph,
    threshold: f64,
    max_dim: usize,
) -> Result<SimplicialComplex> {
    if !threshold.is_finite() {
        return Err(Error::Input(format!("threshold must be finite, got {threshold}")));
    }
    let n = graph.n;
    check_vertex_count(n)?;
    let membership = MembershipFunction::graph_weights(n, max_dim, graph.weights.clone(), threshold);
    clique_complex(n, max_dim, membership)
}

/// Lazy weak witness complex on the landmark subset.
///
/// Landmarks `a, b` are joined when some point `s` satisfies
/// `d(s, x) <= d(s, y) + epsilon` for both `x` in `{a, b}` and every other
/// landmark `y`; higher simplices are the cliques of that 1-skeleton.
pub fn build_lazy_witness(
    cloud: &PointCloud,
    landmarks: &[usize],
    epsilon: f64,
    max_dim: usize,
) -> Result<SimplicialComplex> {
    if landmarks.is_empty() {
        return Err(Error::Input("landmark set is empty".into()));
    }
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::Input(format!("scale must be finite and non-negative, got {epsilon}")));
    }
    if let Some(&bad) = landmarks.iter().find(|&&l| l >= cloud.len()) {
        return Err(Error::Input(format!("landmark {bad} out of range for {} points", cloud.len())));
    }
    let mut sorted = landmarks.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Input("duplicate landmark index".into()));
    }
    let n = landmarks.len();
    check_vertex_count(n)?;

    let witnessed = |a: usize, b: usize| {
        (0..cloud.len()).any(|s| {
            let da = cloud.distance(s, landmarks[a]);
            let db = cloud.distance(s, landmarks[b]);
            (0..n).filter(|&y| y != a && y != b).all(|y| {
                let dy = cloud.distance(s, landmarks[y]);
                da <= dy + epsilon && db <= dy + epsilon
            })
        })
    };
    let mut neighbours = vec![0u64; n];
    for a in 0..n {
        for b in (a + 1)..n {
            if witnessed(a, b) {
                neighbours[a] |= 1 << b;
                neighbours[b] |= 1 << a;
            }
        }
    }
    let membership = MembershipFunction::skeleton(n, max_dim, neighbours);
    let mut complex = clique_complex(n, max_dim, membership)?;
    complex.vertex_set = VertexSet::new(landmarks.iter().map(|l| format!("p{l}")).collect())?;
    Ok(complex)
}
