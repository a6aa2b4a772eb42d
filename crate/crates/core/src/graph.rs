//! Directed weighted graphs: storage, connectivity analysis, symmetrization
//! and the synthetic generators used by the experiments.

use std::collections::HashSet;
use std::io::{BufRead, BufReader};
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A weighted directed graph with strictly positive edge weights.
///
/// Edges are stored as a triplet list sorted by `(src, dst)`; an absent edge
/// is equivalent to weight zero. Duplicate `(src, dst)` pairs passed to a
/// constructor are summed, matching weighted-adjacency semantics.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedGraph {
    n_vertices: usize,
    edges: Vec<(usize, usize, f64)>,
    out_degrees: Array1<f64>,
    in_degrees: Array1<f64>,
}

impl DirectedGraph {
    /// Builds a graph from weighted edges. Zero-weight edges are dropped,
    /// negative or non-finite weights are rejected, duplicates are summed.
    pub fn from_edges(n_vertices: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n_vertices == 0 {
            return Err(Error::InvalidArgument(
                "graph needs at least one vertex".into(),
            ));
        }
        let mut merged = std::collections::BTreeMap::new();
        for &(src, dst, w) in edges {
            if src >= n_vertices || dst >= n_vertices {
                return Err(Error::InvalidArgument(format!(
                    "edge ({src}, {dst}) references a vertex outside 0..{n_vertices}"
                )));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "edge ({src}, {dst}) has invalid weight {w}"
                )));
            }
            if w > 0.0 {
                *merged.entry((src, dst)).or_insert(0.0) += w;
            }
        }
        let edges: Vec<(usize, usize, f64)> =
            merged.into_iter().map(|((s, d), w)| (s, d, w)).collect();
        let mut out_degrees = Array1::zeros(n_vertices);
        let mut in_degrees = Array1::zeros(n_vertices);
        for &(s, d, w) in &edges {
            out_degrees[s] += w;
            in_degrees[d] += w;
        }
        Ok(Self {
            n_vertices,
            edges,
            out_degrees,
            in_degrees,
        })
    }

    /// Builds an unweighted graph (all weights 1).
    pub fn from_arcs(n_vertices: usize, arcs: &[(usize, usize)]) -> Result<Self> {
        let edges: Vec<_> = arcs.iter().map(|&(s, d)| (s, d, 1.0)).collect();
        Self::from_edges(n_vertices, &edges)
    }

    /// Reads an edge-list file: one `src<TAB>dst<TAB>weight` edge per line,
    /// 0-based ids, weight optional (default 1.0), `#` lines ignored.
    /// Duplicate edges are summed.
    pub fn from_edge_list_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)?;
        let mut edges = Vec::new();
        let mut max_vertex = 0usize;
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |reason: &str| Error::Parse {
                path: path.display().to_string(),
                line: lineno + 1,
                reason: reason.into(),
            };
            let mut fields = line.split_whitespace();
            let src: usize = fields
                .next()
                .ok_or_else(|| parse_err("missing source vertex"))?
                .parse()
                .map_err(|_| parse_err("source vertex is not an integer"))?;
            let dst: usize = fields
                .next()
                .ok_or_else(|| parse_err("missing destination vertex"))?
                .parse()
                .map_err(|_| parse_err("destination vertex is not an integer"))?;
            let weight: f64 = match fields.next() {
                Some(tok) => tok
                    .parse()
                    .map_err(|_| parse_err("weight is not a number"))?,
                None => 1.0,
            };
            max_vertex = max_vertex.max(src).max(dst);
            edges.push((src, dst, weight));
        }
        if edges.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "edge list {} contains no edges",
                path.display()
            )));
        }
        Self::from_edges(max_vertex + 1, &edges)
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges sorted by `(src, dst)`.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn out_degrees(&self) -> &Array1<f64> {
        &self.out_degrees
    }

    pub fn in_degrees(&self) -> &Array1<f64> {
        &self.in_degrees
    }

    /// Dense weighted adjacency matrix W with `W[[i, j]] = w(i, j)`.
    pub fn adjacency_matrix(&self) -> Array2<f64> {
        let mut w = Array2::zeros((self.n_vertices, self.n_vertices));
        for &(s, d, weight) in &self.edges {
            w[[s, d]] = weight;
        }
        w
    }

    /// Out-neighbour lists (targets only), sorted.
    pub fn out_neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_vertices];
        for &(s, d, _) in &self.edges {
            adj[s].push(d);
        }
        adj
    }
}

/// Reads a label file: `vertex<TAB>label` lines with label in {-1, +1};
/// `#` lines ignored. Vertices absent from the file get label 0 (unknown).
pub fn read_label_file(path: impl AsRef<Path>, n_vertices: usize) -> Result<Array1<f64>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    let mut labels = Array1::zeros(n_vertices);
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |reason: String| Error::Parse {
            path: path.display().to_string(),
            line: lineno + 1,
            reason,
        };
        let mut fields = line.split_whitespace();
        let vertex: usize = fields
            .next()
            .ok_or_else(|| parse_err("missing vertex".into()))?
            .parse()
            .map_err(|_| parse_err("vertex is not an integer".into()))?;
        let label: i32 = fields
            .next()
            .ok_or_else(|| parse_err("missing label".into()))?
            .parse()
            .map_err(|_| parse_err("label is not an integer".into()))?;
        if vertex >= n_vertices {
            return Err(parse_err(format!(
                "vertex {vertex} outside 0..{n_vertices}"
            )));
        }
        if label != -1 && label != 1 {
            return Err(parse_err(format!("label {label} is not in {{-1, +1}}")));
        }
        labels[vertex] = f64::from(label);
    }
    Ok(labels)
}

/// Strongly connected components via iterative Tarjan.
///
/// Components are returned in reverse topological order (sinks first), with
/// vertices inside each component in discovery order; the output is
/// deterministic for a given graph.
pub fn strongly_connected_components(g: &DirectedGraph) -> Vec<Vec<usize>> {
    let n = g.n_vertices();
    let adj = g.out_neighbors();

    const UNVISITED: usize = usize::MAX;
    let mut index = vec![UNVISITED; n];
    let mut lowlink = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut sccs = Vec::new();
    let mut next_index = 0usize;

    // Explicit DFS frames: (vertex, next out-neighbour position).
    let mut frames: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        frames.push((root, 0));
        while let Some(&mut (v, ref mut pos)) = frames.last_mut() {
            if *pos == 0 {
                index[v] = next_index;
                lowlink[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&w) = adj[v].get(*pos) {
                *pos += 1;
                if index[w] == UNVISITED {
                    frames.push((w, 0));
                } else if on_stack[w] {
                    lowlink[v] = lowlink[v].min(index[w]);
                }
            } else {
                frames.pop();
                if let Some(&(parent, _)) = frames.last() {
                    lowlink[parent] = lowlink[parent].min(lowlink[v]);
                }
                if lowlink[v] == index[v] {
                    let mut component = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        component.push(w);
                        if w == v {
                            break;
                        }
                    }
                    component.reverse();
                    sccs.push(component);
                }
            }
        }
    }
    sccs
}

/// Extracts the largest strongly connected subgraph.
///
/// Ties between equal-size components are broken by the smallest contained
/// original vertex id. Returns the subgraph and the mapping from new vertex
/// ids to original ids (ascending).
pub fn largest_scc_subgraph(g: &DirectedGraph) -> (DirectedGraph, Vec<usize>) {
    let sccs = strongly_connected_components(g);
    let best = sccs
        .iter()
        .max_by(|a, b| {
            a.len()
                .cmp(&b.len())
                .then_with(|| b.iter().min().cmp(&a.iter().min()))
        })
        .expect("graph has at least one vertex");
    let mut old_ids: Vec<usize> = best.clone();
    old_ids.sort_unstable();
    let mut new_id = vec![usize::MAX; g.n_vertices()];
    for (new, &old) in old_ids.iter().enumerate() {
        new_id[old] = new;
    }
    let edges: Vec<(usize, usize, f64)> = g
        .edges()
        .iter()
        .filter(|&&(s, d, _)| new_id[s] != usize::MAX && new_id[d] != usize::MAX)
        .map(|&(s, d, w)| (new_id[s], new_id[d], w))
        .collect();
    let sub = DirectedGraph::from_edges(old_ids.len(), &edges)
        .expect("subgraph of a valid graph is valid");
    (sub, old_ids)
}

/// Symmetrizes the adjacency: `W_sym = (W + W^T) / 2`, entrywise.
pub fn symmetrize(g: &DirectedGraph) -> DirectedGraph {
    let mut edges = Vec::with_capacity(2 * g.n_edges());
    for &(s, d, w) in g.edges() {
        edges.push((s, d, w / 2.0));
        edges.push((d, s, w / 2.0));
    }
    DirectedGraph::from_edges(g.n_vertices(), &edges).expect("halved weights remain valid")
}

/// Directed cycle `C_n`: edge `i -> (i + 1) mod n` of weight 1.
pub fn gen_directed_cycle(n: usize) -> Result<DirectedGraph> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "cycle needs n >= 2, got {n}"
        )));
    }
    let arcs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    DirectedGraph::from_arcs(n, &arcs)
}

/// Directed torus `T_{m,n} = C_m x C_n`, the Cartesian product of two
/// directed cycles: adjacency `C_m (x) I_n + I_m (x) C_n`. Vertex `(i, j)`
/// has id `i * n + j` and out-degree 2.
pub fn gen_directed_torus(m: usize, n: usize) -> Result<DirectedGraph> {
    if m < 2 || n < 2 {
        return Err(Error::InvalidArgument(format!(
            "torus needs m, n >= 2, got ({m}, {n})"
        )));
    }
    let id = |i: usize, j: usize| i * n + j;
    let mut arcs = Vec::with_capacity(2 * m * n);
    for i in 0..m {
        for j in 0..n {
            arcs.push((id(i, j), id((i + 1) % m, j)));
            arcs.push((id(i, j), id(i, (j + 1) % n)));
        }
    }
    DirectedGraph::from_arcs(m * n, &arcs)
}

/// Directed Watts-Strogatz graph `DWS(n, k, beta)`.
///
/// Starts from the circulant where each vertex points at its `k` next
/// vertices clockwise, then sweeps vertices clockwise and rewires each
/// outgoing edge independently with probability `beta` to a uniformly random
/// target, resampling to avoid self-loops and duplicate edges so that every
/// out-degree stays exactly `k`. Deterministic for a given seed.
pub fn gen_directed_watts_strogatz(
    n: usize,
    k: usize,
    beta: f64,
    seed: u64,
) -> Result<DirectedGraph> {
    if k == 0 || n <= 2 * k {
        return Err(Error::InvalidArgument(format!(
            "Watts-Strogatz needs n > 2k with k >= 1, got n = {n}, k = {k}"
        )));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidArgument(format!(
            "rewiring probability must be in [0, 1], got {beta}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut targets: Vec<HashSet<usize>> = (0..n)
        .map(|i| (1..=k).map(|lag| (i + lag) % n).collect())
        .collect();
    for (i, tset) in targets.iter_mut().enumerate() {
        for lag in 1..=k {
            if rng.random_range(0.0..1.0) >= beta {
                continue;
            }
            let old = (i + lag) % n;
            if !tset.remove(&old) {
                continue; // already rewired away by an earlier step
            }
            let new = loop {
                let candidate = rng.random_range(0..n);
                if candidate != i && !tset.contains(&candidate) {
                    break candidate;
                }
            };
            tset.insert(new);
        }
    }
    let mut arcs = Vec::with_capacity(n * k);
    for (src, ts) in targets.iter().enumerate() {
        let mut ts: Vec<usize> = ts.iter().copied().collect();
        ts.sort_unstable();
        arcs.extend(ts.into_iter().map(|t| (src, t)));
    }
    DirectedGraph::from_arcs(n, &arcs)
}

/// Random strongly connected weighted digraph for experiments and tests:
/// a directed Hamiltonian cycle (guaranteeing strong connectivity) plus
/// `extra_arcs` random arcs, all weights drawn uniformly from [0.5, 1.5].
/// Deterministic for a given seed.
pub fn gen_random_digraph(n: usize, extra_arcs: usize, seed: u64) -> DirectedGraph {
    assert!(n >= 2, "random digraph needs at least two vertices");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize, f64)> = (0..n)
        .map(|i| (i, (i + 1) % n, rng.random_range(0.5..1.5)))
        .collect();
    for _ in 0..extra_arcs {
        let s = rng.random_range(0..n);
        let d = rng.random_range(0..n);
        if s != d {
            edges.push((s, d, rng.random_range(0.5..1.5)));
        }
    }
    DirectedGraph::from_edges(n, &edges).expect("generated edges are valid")
}
