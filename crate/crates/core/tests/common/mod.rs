//! Brute-force reference implementations shared by the integration tests.
//!
//! The oracles work on adjacency matrices and never call the library's
//! algorithms; the `check_*` helpers compare the two.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use qnetsim::metrics::{
    average_clustering, average_shortest_path, cluster_size_counts, connected_components,
    local_clustering, PathScope,
};
use qnetsim::model::{
    generate_realization, generate_realization_naive, sample_node_positions, ModelParams, SeedSpec,
};
use qnetsim::{Layer, NetworkGraph};

/// Small self-contained generator for test inputs.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(seed ^ 0x9e37_79b9_7f4a_7c15)
    }

    pub fn next_u64(&mut self) -> u64 {
        // xorshift64*
        self.0 ^= self.0 >> 12;
        self.0 ^= self.0 << 25;
        self.0 ^= self.0 >> 27;
        self.0.wrapping_mul(0x2545_f491_4f6c_dd1d)
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }
}

/// Erdős–Rényi graph G(n, p).
pub fn random_graph(n: usize, p: f64, rng: &mut TestRng) -> NetworkGraph {
    let mut edges = Vec::new();
    for i in 0..n as u32 {
        for j in i + 1..n as u32 {
            if rng.unit() < p {
                edges.push((i, j));
            }
        }
    }
    NetworkGraph::from_edges(n, Layer::Photonic, edges).unwrap()
}

pub fn adjacency(g: &NetworkGraph) -> Vec<Vec<bool>> {
    let n = g.n_nodes();
    let mut a = vec![vec![false; n]; n];
    for &(i, j) in g.edges() {
        a[i as usize][j as usize] = true;
        a[j as usize][i as usize] = true;
    }
    a
}

/// Component of every node by recursive-free DFS, components numbered in
/// order of their smallest node.
pub fn dfs_components(adj: &[Vec<bool>]) -> Vec<usize> {
    let n = adj.len();
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        comp[start] = next;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if adj[u][v] && comp[v] == usize::MAX {
                    comp[v] = next;
                    stack.push(v);
                }
            }
        }
        next += 1;
    }
    comp
}

/// Component sizes, largest first.
pub fn component_sizes(comp: &[usize]) -> Vec<usize> {
    let k = comp.iter().copied().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0; k];
    for &c in comp {
        sizes[c] += 1;
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}

/// Nodes of the largest component; ties go to the one with the smallest node.
pub fn giant_nodes(comp: &[usize]) -> Vec<usize> {
    let k = comp.iter().copied().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0; k];
    for &c in comp {
        sizes[c] += 1;
    }
    let best = (0..k).fold(0, |b, c| if sizes[c] > sizes[b] { c } else { b });
    (0..comp.len()).filter(|&i| comp[i] == best).collect()
}

/// C_i by checking every pair of neighbors.
pub fn brute_local_clustering(adj: &[Vec<bool>], i: usize) -> f64 {
    let nbrs: Vec<usize> = (0..adj.len()).filter(|&j| adj[i][j]).collect();
    let k = nbrs.len();
    if k < 2 {
        return 0.0;
    }
    let mut links = 0usize;
    for a in 0..k {
        for b in a + 1..k {
            if adj[nbrs[a]][nbrs[b]] {
                links += 1;
            }
        }
    }
    2.0 * links as f64 / (k * (k - 1)) as f64
}

/// All-pairs hop distances; `u32::MAX` marks unreachable pairs.
pub fn floyd_warshall(adj: &[Vec<bool>]) -> Vec<Vec<u32>> {
    let n = adj.len();
    let inf = u32::MAX;
    let mut d = vec![vec![inf; n]; n];
    for i in 0..n {
        d[i][i] = 0;
        for j in 0..n {
            if adj[i][j] {
                d[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if d[i][k] == inf {
                continue;
            }
            for j in 0..n {
                if d[k][j] != inf && d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// Mean hop distance over ordered pairs of distinct giant-cluster nodes.
pub fn brute_mean_path(adj: &[Vec<bool>]) -> Option<f64> {
    let giant = giant_nodes(&dfs_components(adj));
    if giant.len() < 2 {
        return None;
    }
    let d = floyd_warshall(adj);
    let mut total = 0u64;
    for &i in &giant {
        for &j in &giant {
            if i != j {
                total += u64::from(d[i][j]);
            }
        }
    }
    let n = giant.len() as u64;
    Some(total as f64 / (n * (n - 1)) as f64)
}

/// Nearest f64 to an exact rational, via 40 significant decimal digits.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    let scale = BigInt::from(10u32).pow(40);
    let scaled = (r * BigRational::from_integer(scale)).round().to_integer();
    format!("{scaled}e-40").parse().unwrap()
}

/// 1 − (1 − num/den)^n, exactly.
pub fn exact_photonic_prob(num: i64, den: i64, n: u32) -> BigRational {
    let one = BigRational::from_integer(1.into());
    let q = &one - BigRational::new(num.into(), den.into());
    let mut pow = one.clone();
    for _ in 0..n {
        pow *= &q;
    }
    one - pow
}

/// Compares components, clustering and the exact mean path with the oracles.
pub fn check_against_oracles(g: &NetworkGraph) -> Result<(), String> {
    let n = g.n_nodes();
    let adj = adjacency(g);
    let comp = dfs_components(&adj);
    let d = connected_components(g);
    if d.sizes != component_sizes(&comp) {
        return Err(format!(
            "sizes {:?} vs {:?}",
            d.sizes,
            component_sizes(&comp)
        ));
    }
    for i in 0..n {
        for j in 0..n {
            if (d.labels[i] == d.labels[j]) != (comp[i] == comp[j]) {
                return Err(format!("nodes {i}, {j} grouped differently"));
            }
        }
    }
    let giant: Vec<u32> = giant_nodes(&comp).iter().map(|&i| i as u32).collect();
    if d.giant_members() != giant {
        return Err("giant cluster members differ".into());
    }
    let finite: usize = cluster_size_counts(&d, true)
        .iter()
        .map(|(s, c)| s * c)
        .sum();
    if finite + d.s1() != n {
        return Err("finite cluster counts do not add up".into());
    }

    let mut sum = 0.0;
    for i in 0..n {
        let c = brute_local_clustering(&adj, i);
        if local_clustering(g, i) != c {
            return Err(format!("C_{i}: {} vs {c}", local_clustering(g, i)));
        }
        sum += c;
    }
    let avg = if n == 0 { 0.0 } else { sum / n as f64 };
    if average_clustering(g) != avg {
        return Err(format!("<C>: {} vs {avg}", average_clustering(g)));
    }

    let lib = average_shortest_path(g, PathScope::GiantCluster, usize::MAX, &SeedSpec::new(0, 0));
    match (brute_mean_path(&adj), lib) {
        (Some(l), Ok(s)) if s.exact && s.mean_shortest_path == l => Ok(()),
        (None, Err(_)) => Ok(()),
        (expected, got) => Err(format!("<l>: {got:?} vs {expected:?}")),
    }
}

/// Grid-accelerated and all-pairs generation on the same layout.
pub fn check_generators(params: &ModelParams, seed: &SeedSpec) -> Result<(), String> {
    let pos = sample_node_positions(params, seed);
    if generate_realization(&pos, params, seed) == generate_realization_naive(&pos, params, seed) {
        Ok(())
    } else {
        Err(format!(
            "generators differ for {seed:?}, n = {}",
            params.n_nodes
        ))
    }
}

/// 200 random graphs with N ≤ 50 over a range of edge densities.
pub fn oracle_cases() -> impl Iterator<Item = NetworkGraph> {
    let mut rng = TestRng::new(2024);
    (0..200).map(move |case| {
        let n = 1 + rng.below(50) as usize;
        let p = [0.01, 0.03, 0.06, 0.1, 0.2, 0.5][case % 6];
        random_graph(n, p, &mut rng)
    })
}

/// 100 seeds with N ≤ 200, each without a cutoff and with one large enough
/// for the cell grid to prune.
pub fn generator_cases() -> impl Iterator<Item = (ModelParams, SeedSpec)> {
    let mut rng = TestRng::new(7);
    (0..100u64).flat_map(move |seed| {
        let n = 1 + rng.below(200) as usize;
        let radius = [300.0, 1800.0, 4000.0, 9000.0][seed as usize % 4];
        [0.0, 1e-3].map(|eps| {
            let params = ModelParams {
                n_nodes: n,
                radius_km: radius,
                cutoff_epsilon: eps,
                ..Default::default()
            };
            (params, SeedSpec::new(seed, seed * 3 + 1))
        })
    })
}
