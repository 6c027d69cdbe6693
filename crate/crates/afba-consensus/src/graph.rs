//! Communication graphs: construction, incidence/Laplacian algebra, and
//! spectral-norm estimation for the step-size rules.
//!
//! Nodes are indexed `0..N` internally; the edge-list text format is 1-based
//! (see [`Graph::write_edge_list`]).

use std::io::{BufRead, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Default number of resampling attempts before Erdős–Rényi generation gives up.
pub const DEFAULT_ER_RETRIES: usize = 1000;

/// Default relative tolerance for power-iteration norm estimates.
pub const SPECTRAL_TOL: f64 = 1e-8;

/// Default iteration cap for power-iteration norm estimates.
pub const SPECTRAL_MAX_ITER: usize = 10_000;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("node {node} out of range for {num_nodes} nodes")]
    NodeOutOfRange { node: usize, num_nodes: usize },
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge probability {0} outside (0, 1]")]
    InvalidProbability(f64),
    #[error("no connected sample for n={n}, p={p}, seed={seed} within {retries} attempts")]
    GenerationFailed { n: usize, p: f64, seed: u64, retries: usize },
    #[error("power iteration hit the {iterations}-iteration limit; last estimate {last_estimate}")]
    SpectralNormFailed { last_estimate: f64, iterations: usize },
    #[error("malformed edge list: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Fixed orientation of one edge: the smaller endpoint is the head (+1 in the
/// incidence matrix), the larger the tail (-1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeOrientation {
    pub head: usize,
    pub tail: usize,
}

/// Undirected communication graph with a fixed, lexicographically sorted edge
/// list and per-node sorted neighbor lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from an unordered edge list. Endpoint order within a
    /// pair is irrelevant; the stored edge is `(min, max)`.
    pub fn new(num_nodes: usize, edges: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        if num_nodes == 0 {
            return Err(GraphError::Empty);
        }
        let mut normalized = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a >= num_nodes {
                return Err(GraphError::NodeOutOfRange { node: a, num_nodes });
            }
            if b >= num_nodes {
                return Err(GraphError::NodeOutOfRange { node: b, num_nodes });
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            normalized.push((a.min(b), a.max(b)));
        }
        normalized.sort_unstable();
        for w in normalized.windows(2) {
            if w[0] == w[1] {
                return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
            }
        }
        let mut neighbors = vec![Vec::new(); num_nodes];
        for &(i, j) in &normalized {
            neighbors[i].push(j);
            neighbors[j].push(i);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(Self { num_nodes, edges: normalized, neighbors })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(min, max)` pairs in lexicographic order. The position of a
    /// pair in this slice is its edge index.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.neighbors[node].len()
    }

    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Index of the undirected edge `{a, b}` in [`Graph::edges`], if present.
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = (a.min(b), a.max(b));
        self.edges.binary_search(&key).ok()
    }

    pub fn orientation(&self, edge: usize) -> EdgeOrientation {
        let (head, tail) = self.edges[edge];
        EdgeOrientation { head, tail }
    }

    /// True iff a breadth-first traversal from node 0 reaches every node.
    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.num_nodes];
        let mut queue = std::collections::VecDeque::new();
        seen[0] = true;
        queue.push_back(0);
        let mut count = 1;
        while let Some(node) = queue.pop_front() {
            for &next in &self.neighbors[node] {
                if !seen[next] {
                    seen[next] = true;
                    count += 1;
                    queue.push_back(next);
                }
            }
        }
        count == self.num_nodes
    }

    /// Oriented node-arc incidence matrix, N x M: column `l` holds +1 at the
    /// head of edge `l` and -1 at its tail. Every column sums to zero.
    pub fn incidence_matrix(&self) -> Array2<f64> {
        let mut b = Array2::zeros((self.num_nodes, self.edges.len()));
        for (l, &(head, tail)) in self.edges.iter().enumerate() {
            b[[head, l]] = 1.0;
            b[[tail, l]] = -1.0;
        }
        b
    }

    /// Graph Laplacian: degree on the diagonal, -1 at adjacent pairs. Equals
    /// `B * B^T` for the incidence matrix `B`.
    pub fn laplacian(&self) -> Array2<f64> {
        let mut l = Array2::zeros((self.num_nodes, self.num_nodes));
        for (i, list) in self.neighbors.iter().enumerate() {
            l[[i, i]] = list.len() as f64;
            for &j in list {
                l[[i, j]] = -1.0;
            }
        }
        l
    }

    /// Applies the Laplacian to a vector through the neighbor lists, without
    /// materializing the matrix.
    pub fn laplacian_matvec(&self, v: &Array1<f64>) -> Array1<f64> {
        let mut out = Array1::zeros(self.num_nodes);
        for (i, list) in self.neighbors.iter().enumerate() {
            let mut acc = list.len() as f64 * v[i];
            for &j in list {
                acc -= v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Power-iteration estimate of the Laplacian spectral norm.
    pub fn laplacian_norm(
        &self,
        tol: f64,
        max_iter: usize,
        seed: u64,
    ) -> Result<SpectralEstimate, GraphError> {
        spectral_norm(|v| self.laplacian_matvec(v), self.num_nodes, tol, max_iter, seed)
    }

    /// Writes the edge-list text format: first line `N M`, then one `i j`
    /// line per edge, 1-based.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<(), GraphError> {
        writeln!(out, "{} {}", self.num_nodes, self.edges.len())?;
        for &(i, j) in &self.edges {
            writeln!(out, "{} {}", i + 1, j + 1)?;
        }
        Ok(())
    }

    /// Parses the edge-list text format produced by [`Graph::write_edge_list`].
    pub fn read_edge_list<R: BufRead>(input: R) -> Result<Self, GraphError> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| GraphError::Parse("missing header line".into()))??;
        let mut parts = header.split_whitespace();
        let n: usize = parse_field(parts.next(), "node count")?;
        let m: usize = parse_field(parts.next(), "edge count")?;
        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let line = lines
                .next()
                .ok_or_else(|| GraphError::Parse(format!("expected {m} edge lines")))??;
            let mut parts = line.split_whitespace();
            let i: usize = parse_field(parts.next(), "edge endpoint")?;
            let j: usize = parse_field(parts.next(), "edge endpoint")?;
            if i == 0 || j == 0 {
                return Err(GraphError::Parse("endpoints are 1-based".into()));
            }
            edges.push((i - 1, j - 1));
        }
        Self::new(n, edges)
    }

    pub fn save_edge_list(&self, path: &Path) -> Result<(), GraphError> {
        let file = std::fs::File::create(path)?;
        self.write_edge_list(std::io::BufWriter::new(file))
    }

    pub fn load_edge_list(path: &Path) -> Result<Self, GraphError> {
        let file = std::fs::File::open(path)?;
        Self::read_edge_list(std::io::BufReader::new(file))
    }
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, what: &str) -> Result<T, GraphError> {
    field
        .ok_or_else(|| GraphError::Parse(format!("missing {what}")))?
        .parse()
        .map_err(|_| GraphError::Parse(format!("unparsable {what}")))
}

/// Samples each unordered pair independently with probability `p`.
fn sample_pairs(num_nodes: usize, p: f64, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..num_nodes {
        for j in (i + 1)..num_nodes {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// Generators for distinct `(seed, attempt)` pairs never share a stream, so
/// resampling after a disconnected draw cannot collide with another seed's
/// first draw.
fn attempt_rng(seed: u64, attempt: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&attempt.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Erdős–Rényi G(n, p) sample, resampled with an incremented sub-seed until
/// connected. Deterministic in `(n, p, seed)`.
pub fn erdos_renyi(num_nodes: usize, p: f64, seed: u64) -> Result<Graph, GraphError> {
    erdos_renyi_with_retries(num_nodes, p, seed, DEFAULT_ER_RETRIES)
}

/// As [`erdos_renyi`] with an explicit bound on the number of attempts.
pub fn erdos_renyi_with_retries(
    num_nodes: usize,
    p: f64,
    seed: u64,
    retries: usize,
) -> Result<Graph, GraphError> {
    if num_nodes == 0 {
        return Err(GraphError::Empty);
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(GraphError::InvalidProbability(p));
    }
    for attempt in 0..retries {
        let mut rng = attempt_rng(seed, attempt as u64);
        let edges = sample_pairs(num_nodes, p, &mut rng);
        let graph = Graph::new(num_nodes, edges)?;
        if graph.is_connected() {
            return Ok(graph);
        }
    }
    Err(GraphError::GenerationFailed { n: num_nodes, p, seed, retries })
}

/// Power-iteration estimate of the largest eigenvalue of a symmetric positive
/// semidefinite operator given as a matvec callback.
#[derive(Debug, Clone, Copy)]
pub struct SpectralEstimate {
    pub value: f64,
    pub iterations: usize,
}

impl SpectralEstimate {
    /// Estimate inflated by the relative tolerance, suitable as an upper
    /// bound in the step-size rules.
    pub fn inflated(&self, tol: f64) -> f64 {
        self.value * (1.0 + tol)
    }
}

/// Runs power iteration until the relative Rayleigh-quotient change drops
/// below `tol`. The start vector is drawn from the seeded generator.
pub fn spectral_norm<F>(
    apply: F,
    dim: usize,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<SpectralEstimate, GraphError>
where
    F: Fn(&Array1<f64>) -> Array1<f64>,
{
    assert!(tol > 0.0, "tolerance must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = Array1::from_shape_fn(dim, |_| rng.random::<f64>() * 2.0 - 1.0);
    let norm = v.dot(&v).sqrt();
    if norm == 0.0 {
        v[0] = 1.0;
    } else {
        v /= norm;
    }
    let mut estimate = f64::NAN;
    for iter in 1..=max_iter {
        let w = apply(&v);
        let rayleigh = v.dot(&w);
        let w_norm = w.dot(&w).sqrt();
        if w_norm == 0.0 {
            // Operator annihilates the current vector: on a PSD operator the
            // Rayleigh quotient cannot exceed the largest eigenvalue, so 0 is
            // only reachable when the operator is zero on this subspace.
            return Ok(SpectralEstimate { value: 0.0, iterations: iter });
        }
        if estimate.is_finite() && (rayleigh - estimate).abs() <= tol * rayleigh.abs().max(f64::MIN_POSITIVE) {
            return Ok(SpectralEstimate { value: rayleigh, iterations: iter });
        }
        estimate = rayleigh;
        v = w / w_norm;
    }
    Err(GraphError::SpectralNormFailed { last_estimate: estimate, iterations: max_iter })
}
