//! Observables of a single graph.

mod clustering;
mod components;
mod degree;
mod paths;

pub use clustering::{average_clustering, local_clustering};
pub use components::{cluster_size_counts, connected_components, ClusterDecomposition, UnionFind};
pub use degree::{
    degree_histogram, poisson_pmf, poisson_total_variation, predicted_mean_degree, DegreeHistogram,
};
pub use paths::{
    average_shortest_path, average_shortest_path_with, PathScope, PathStats,
    DEFAULT_MAX_EXACT_SOURCES,
};
