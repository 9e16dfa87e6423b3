use std::collections::BTreeMap;

use crate::graph::NetworkGraph;

/// Disjoint-set forest with union by size and path halving.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    /// Returns false if `a` and `b` were already joined.
    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        true
    }
}

/// Connected components of a graph.
///
/// Cluster ids are ranks: id 0 is the largest cluster, ties ordered by the
/// smallest node index they contain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterDecomposition {
    pub labels: Vec<u32>,
    /// Cluster sizes in descending order, indexed by cluster id.
    pub sizes: Vec<usize>,
}

impl ClusterDecomposition {
    /// Size of the largest cluster (0 for an empty graph).
    pub fn s1(&self) -> usize {
        self.sizes.first().copied().unwrap_or(0)
    }

    /// Size of the second-largest cluster, 0 when there is only one.
    pub fn s2(&self) -> usize {
        self.sizes.get(1).copied().unwrap_or(0)
    }

    pub fn n_clusters(&self) -> usize {
        self.sizes.len()
    }

    /// Members of the largest cluster in ascending node order.
    pub fn giant_members(&self) -> Vec<u32> {
        (0..self.labels.len() as u32)
            .filter(|&i| self.labels[i as usize] == 0)
            .collect()
    }
}

pub fn connected_components(graph: &NetworkGraph) -> ClusterDecomposition {
    let n = graph.n_nodes();
    let mut uf = UnionFind::new(n);
    for &(a, b) in graph.edges() {
        uf.union(a, b);
    }
    // Roots in order of first appearance = order of smallest member.
    let mut root_slot = vec![u32::MAX; n];
    let mut raw_sizes: Vec<usize> = Vec::new();
    let mut raw_label = vec![0u32; n];
    for i in 0..n as u32 {
        let r = uf.find(i) as usize;
        if root_slot[r] == u32::MAX {
            root_slot[r] = raw_sizes.len() as u32;
            raw_sizes.push(0);
        }
        raw_label[i as usize] = root_slot[r];
        raw_sizes[root_slot[r] as usize] += 1;
    }
    let mut order: Vec<u32> = (0..raw_sizes.len() as u32).collect();
    // Stable sort keeps first-appearance order among equal sizes.
    order.sort_by(|&a, &b| raw_sizes[b as usize].cmp(&raw_sizes[a as usize]));
    let mut rank = vec![0u32; order.len()];
    for (r, &slot) in order.iter().enumerate() {
        rank[slot as usize] = r as u32;
    }
    ClusterDecomposition {
        labels: raw_label.iter().map(|&s| rank[s as usize]).collect(),
        sizes: order.iter().map(|&s| raw_sizes[s as usize]).collect(),
    }
}

/// Number of clusters of each size.
///
/// With `exclude_largest`, exactly one cluster of maximal size is dropped.
pub fn cluster_size_counts(
    decomp: &ClusterDecomposition,
    exclude_largest: bool,
) -> BTreeMap<usize, usize> {
    let skip = usize::from(exclude_largest);
    let mut counts = BTreeMap::new();
    for &s in decomp.sizes.iter().skip(skip) {
        *counts.entry(s).or_insert(0) += 1;
    }
    counts
}
