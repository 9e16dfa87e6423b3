use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    Fiber,
    #[default]
    Photonic,
}

/// Undirected simple graph over nodes `0..n_nodes`.
///
/// Edges are stored once as `(i, j)` with `i < j`, sorted. A compressed
/// adjacency list with sorted neighbor rows is built on construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkGraph {
    n_nodes: usize,
    layer: Layer,
    edges: Vec<(u32, u32)>,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

impl NetworkGraph {
    /// Builds a graph from an arbitrary edge list.
    ///
    /// Endpoints are canonicalized to `i < j`; self-loops, duplicates and
    /// out-of-range endpoints are rejected.
    pub fn from_edges(
        n_nodes: usize,
        layer: Layer,
        edges: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Self> {
        let mut edges: Vec<(u32, u32)> = edges
            .into_iter()
            .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
            .collect();
        edges.sort_unstable();
        for w in edges.windows(2) {
            if w[0] == w[1] {
                return Err(invalid("edges", format!("duplicate edge {:?}", w[0])));
            }
        }
        for &(a, b) in &edges {
            if a == b {
                return Err(invalid("edges", format!("self-loop on node {a}")));
            }
            if b as usize >= n_nodes {
                return Err(invalid(
                    "edges",
                    format!("node {b} out of range for {n_nodes} nodes"),
                ));
            }
        }
        Ok(Self::from_sorted_unchecked(n_nodes, layer, edges))
    }

    /// `edges` must already be sorted, canonical and valid.
    pub(crate) fn from_sorted_unchecked(
        n_nodes: usize,
        layer: Layer,
        edges: Vec<(u32, u32)>,
    ) -> Self {
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        let mut degree = vec![0usize; n_nodes];
        for &(a, b) in &edges {
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n_nodes + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n_nodes].to_vec();
        let mut neighbors = vec![0u32; 2 * edges.len()];
        // Visiting sorted (a, b) pairs yields sorted rows for both endpoints.
        for &(a, b) in &edges {
            neighbors[fill[a as usize]] = b;
            fill[a as usize] += 1;
        }
        for &(a, b) in &edges {
            neighbors[fill[b as usize]] = a;
            fill[b as usize] += 1;
        }
        for i in 0..n_nodes {
            neighbors[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        Self {
            n_nodes,
            layer,
            edges,
            offsets,
            neighbors,
        }
    }

    pub fn empty(n_nodes: usize, layer: Layer) -> Self {
        Self::from_sorted_unchecked(n_nodes, layer, Vec::new())
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn layer(&self) -> Layer {
        self.layer
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        let (a, b) = if self.degree(i) <= self.degree(j) {
            (i, j)
        } else {
            (j, i)
        };
        self.neighbors(a).binary_search(&(b as u32)).is_ok()
    }

    /// True when every edge of `self` is also an edge of `other`.
    pub fn is_subgraph_of(&self, other: &NetworkGraph) -> bool {
        self.n_nodes == other.n_nodes
            && self
                .edges
                .iter()
                .all(|e| other.edges.binary_search(e).is_ok())
    }
}
