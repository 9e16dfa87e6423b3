use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::graph::NetworkGraph;

/// Number of nodes at each degree.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DegreeHistogram {
    pub counts: BTreeMap<usize, usize>,
}

impl DegreeHistogram {
    pub fn n_nodes(&self) -> usize {
        self.counts.values().sum()
    }

    /// Σ k·count(k), i.e. twice the number of edges.
    pub fn degree_sum(&self) -> usize {
        self.counts.iter().map(|(k, c)| k * c).sum()
    }

    pub fn mean(&self) -> f64 {
        let n = self.n_nodes();
        if n == 0 {
            0.0
        } else {
            self.degree_sum() as f64 / n as f64
        }
    }

    /// Normalized distribution P(k).
    pub fn distribution(&self) -> BTreeMap<usize, f64> {
        let n = self.n_nodes() as f64;
        self.counts
            .iter()
            .map(|(&k, &c)| (k, c as f64 / n))
            .collect()
    }
}

pub fn degree_histogram(graph: &NetworkGraph) -> DegreeHistogram {
    let mut counts = BTreeMap::new();
    for i in 0..graph.n_nodes() {
        *counts.entry(graph.degree(i)).or_insert(0) += 1;
    }
    DegreeHistogram { counts }
}

/// Poisson probability mass e^(−μ)·μ^k / k!, evaluated in log space.
pub fn poisson_pmf(k: usize, mean: f64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let k_f = k as f64;
    (k_f * mean.ln() - mean - ln_gamma(k_f + 1.0)).exp()
}

/// Mean degree ⟨k⟩ = A·ρ predicted by the linear density law.
pub fn predicted_mean_degree(rho: f64, coefficient: f64) -> f64 {
    coefficient * rho
}

/// Total-variation distance between an empirical P(k) and Poisson(mean).
///
/// Sums over the union of the empirical support and the Poisson bulk, so
/// Poisson mass at unobserved degrees is counted.
pub fn poisson_total_variation(dist: &BTreeMap<usize, f64>, mean: f64) -> f64 {
    let k_max = dist.keys().next_back().copied().unwrap_or(0);
    let k_max = k_max.max((mean + 20.0 * mean.sqrt() + 20.0).ceil() as usize);
    let mut tv = 0.0;
    for k in 0..=k_max {
        let emp = dist.get(&k).copied().unwrap_or(0.0);
        tv += (emp - poisson_pmf(k, mean)).abs();
    }
    0.5 * tv
}
