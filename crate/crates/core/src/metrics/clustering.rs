use crate::graph::NetworkGraph;

/// Number of edges among the neighbors of `i`.
fn neighbor_links(graph: &NetworkGraph, i: usize) -> usize {
    let nbrs = graph.neighbors(i);
    let mut links = 0;
    for (k, &u) in nbrs.iter().enumerate() {
        // Count each linked pair (u, w) once via w > u; rows are sorted.
        let later = &nbrs[k + 1..];
        let row = graph.neighbors(u as usize);
        let (mut a, mut b) = (0, row.partition_point(|&x| x <= u));
        while a < later.len() && b < row.len() {
            match later[a].cmp(&row[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    links += 1;
                    a += 1;
                    b += 1;
                }
            }
        }
    }
    links
}

/// Local clustering 2n_i / (k_i(k_i − 1)); zero for nodes of degree < 2.
pub fn local_clustering(graph: &NetworkGraph, i: usize) -> f64 {
    let k = graph.degree(i);
    if k < 2 {
        return 0.0;
    }
    2.0 * neighbor_links(graph, i) as f64 / (k * (k - 1)) as f64
}

/// Mean local clustering over all nodes, low-degree nodes counted as 0.
pub fn average_clustering(graph: &NetworkGraph) -> f64 {
    let n = graph.n_nodes();
    if n == 0 {
        return 0.0;
    }
    let sum: f64 = (0..n).map(|i| local_clustering(graph, i)).sum();
    sum / n as f64
}
