use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::components::{connected_components, ClusterDecomposition};
use crate::error::{Error, Result};
use crate::graph::NetworkGraph;
use crate::model::{Purpose, SeedSpec};

/// Which node pairs enter the path average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathScope {
    /// Pairs inside the largest cluster; all other distances are infinite.
    #[default]
    GiantCluster,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathStats {
    /// Mean hop distance ⟨l⟩.
    pub mean_shortest_path: f64,
    pub n_pairs_used: u64,
    pub exact: bool,
    /// Standard error of the sampled estimator; 0 in exact mode.
    pub stderr: f64,
}

pub const DEFAULT_MAX_EXACT_SOURCES: usize = 2000;

pub fn average_shortest_path(
    graph: &NetworkGraph,
    scope: PathScope,
    max_exact_sources: usize,
    seed: &SeedSpec,
) -> Result<PathStats> {
    let decomp = connected_components(graph);
    average_shortest_path_with(graph, &decomp, scope, max_exact_sources, seed)
}

/// Same as [`average_shortest_path`] with a precomputed decomposition.
pub fn average_shortest_path_with(
    graph: &NetworkGraph,
    decomp: &ClusterDecomposition,
    scope: PathScope,
    max_exact_sources: usize,
    seed: &SeedSpec,
) -> Result<PathStats> {
    let PathScope::GiantCluster = scope;
    let members = decomp.giant_members();
    let n = members.len();
    if n < 2 {
        return Err(Error::GiantClusterTooSmall(n));
    }
    let exact = n <= max_exact_sources.max(1);
    let sources = if exact {
        members
    } else {
        sample_sources(&members, max_exact_sources.max(1), seed)
    };

    let per_source: Vec<u64> = sources
        .par_iter()
        .map_init(
            || BfsScratch::new(graph.n_nodes()),
            |scratch, &s| scratch.distance_sum(graph, s as usize),
        )
        .collect();

    let others = (n - 1) as f64;
    if exact {
        let total: u64 = per_source.iter().sum();
        let n = n as u64;
        return Ok(PathStats {
            mean_shortest_path: total as f64 / (n * (n - 1)) as f64,
            n_pairs_used: n * (n - 1) / 2,
            exact: true,
            stderr: 0.0,
        });
    }

    let k = per_source.len() as f64;
    let means: Vec<f64> = per_source.iter().map(|&s| s as f64 / others).collect();
    let mean = means.iter().sum::<f64>() / k;
    let var = if means.len() > 1 {
        means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    Ok(PathStats {
        mean_shortest_path: mean,
        n_pairs_used: per_source.len() as u64 * (n as u64 - 1),
        exact: false,
        stderr: (var / k).sqrt(),
    })
}

/// Uniform sample without replacement: the `k` members with the smallest keyed hash.
fn sample_sources(members: &[u32], k: usize, seed: &SeedSpec) -> Vec<u32> {
    let mut keyed: Vec<(u64, u32)> = members
        .iter()
        .map(|&m| (seed.hash(Purpose::PathSources, u64::from(m), 0), m))
        .collect();
    keyed.select_nth_unstable(k - 1);
    let mut chosen: Vec<u32> = keyed[..k].iter().map(|&(_, m)| m).collect();
    chosen.sort_unstable();
    chosen
}

struct BfsScratch {
    dist: Vec<u32>,
    queue: VecDeque<u32>,
    touched: Vec<u32>,
}

impl BfsScratch {
    fn new(n: usize) -> Self {
        Self {
            dist: vec![u32::MAX; n],
            queue: VecDeque::new(),
            touched: Vec::new(),
        }
    }

    /// Sum of hop distances from `source` to every node it reaches.
    fn distance_sum(&mut self, graph: &NetworkGraph, source: usize) -> u64 {
        let mut sum = 0u64;
        self.dist[source] = 0;
        self.touched.push(source as u32);
        self.queue.push_back(source as u32);
        while let Some(u) = self.queue.pop_front() {
            let du = self.dist[u as usize];
            sum += u64::from(du);
            for &v in graph.neighbors(u as usize) {
                if self.dist[v as usize] == u32::MAX {
                    self.dist[v as usize] = du + 1;
                    self.touched.push(v);
                    self.queue.push_back(v);
                }
            }
        }
        for &t in &self.touched {
            self.dist[t as usize] = u32::MAX;
        }
        self.touched.clear();
        sum
    }
}
