//! Sampling of the fiber and photonic layers for one realization.
//!
//! Candidate pairs are enumerated through a uniform cell grid whose cell
//! side is at least the interaction cutoff, so only the 3×3 block of cells
//! around a node has to be inspected. Each pair's outcome is decided by
//! keyed uniforms and therefore does not depend on enumeration order.

use rayon::prelude::*;

use super::layout::{sample_node_positions, NodePositions};
use super::links::{interaction_cutoff, photonic_unchecked, waxman};
use super::params::{ModelParams, PhotonicMode};
use super::rng::{Purpose, SeedSpec};
use crate::graph::{Layer, NetworkGraph};

/// Node layout together with both sampled layers.
#[derive(Debug, Clone)]
pub struct Realization {
    pub positions: NodePositions,
    pub fiber: NetworkGraph,
    pub photonic: NetworkGraph,
}

impl Realization {
    pub fn sample(params: &ModelParams, seed: &SeedSpec) -> Self {
        let positions = sample_node_positions(params, seed);
        let (fiber, photonic) = generate_realization(&positions, params, seed);
        Self {
            positions,
            fiber,
            photonic,
        }
    }

    pub fn layer(&self, layer: Layer) -> &NetworkGraph {
        match layer {
            Layer::Fiber => &self.fiber,
            Layer::Photonic => &self.photonic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct PairOutcome {
    fiber: bool,
    photonic: bool,
}

#[inline]
fn decide_pair(i: u32, j: u32, d: f64, params: &ModelParams, seed: &SeedSpec) -> PairOutcome {
    let (i, j) = (u64::from(i.min(j)), u64::from(i.max(j)));
    let fiber = seed.uniform(Purpose::FiberLink, i, j)
        < waxman(d, params.waxman_beta, params.waxman_scale_km);
    let photonic = match params.photonic_mode {
        PhotonicMode::FiberConditioned if !fiber => false,
        _ => seed.uniform(Purpose::PhotonicLink, i, j) < photonic_unchecked(d, params),
    };
    PairOutcome { fiber, photonic }
}

#[derive(Default)]
struct EdgeSink {
    fiber: Vec<(u32, u32)>,
    photonic: Vec<(u32, u32)>,
}

impl EdgeSink {
    #[inline]
    fn visit(
        &mut self,
        a: u32,
        b: u32,
        positions: &NodePositions,
        d_max: f64,
        params: &ModelParams,
        seed: &SeedSpec,
    ) {
        let d = positions.distance(a as usize, b as usize);
        if d > d_max {
            return;
        }
        let edge = (a.min(b), a.max(b));
        let outcome = decide_pair(a, b, d, params, seed);
        if outcome.fiber {
            self.fiber.push(edge);
        }
        if outcome.photonic {
            self.photonic.push(edge);
        }
    }

    fn merge(mut self, other: EdgeSink) -> EdgeSink {
        self.fiber.extend(other.fiber);
        self.photonic.extend(other.photonic);
        self
    }

    fn finish(mut self, n_nodes: usize) -> (NetworkGraph, NetworkGraph) {
        self.fiber.sort_unstable();
        self.photonic.sort_unstable();
        (
            NetworkGraph::from_sorted_unchecked(n_nodes, Layer::Fiber, self.fiber),
            NetworkGraph::from_sorted_unchecked(n_nodes, Layer::Photonic, self.photonic),
        )
    }
}

/// Samples the fiber and photonic layers over `positions`.
///
/// Pairs farther apart than [`interaction_cutoff`] receive neither edge.
pub fn generate_realization(
    positions: &NodePositions,
    params: &ModelParams,
    seed: &SeedSpec,
) -> (NetworkGraph, NetworkGraph) {
    let d_max = interaction_cutoff(params);
    let n = positions.len();
    match CellGrid::build(positions, params.radius_km, d_max) {
        None => all_pairs(positions, params, seed, d_max).finish(n),
        Some(grid) => grid.enumerate(positions, params, seed, d_max).finish(n),
    }
}

/// Reference generator visiting every unordered pair.
pub fn generate_realization_naive(
    positions: &NodePositions,
    params: &ModelParams,
    seed: &SeedSpec,
) -> (NetworkGraph, NetworkGraph) {
    let d_max = interaction_cutoff(params);
    all_pairs(positions, params, seed, d_max).finish(positions.len())
}

fn all_pairs(
    positions: &NodePositions,
    params: &ModelParams,
    seed: &SeedSpec,
    d_max: f64,
) -> EdgeSink {
    let n = positions.len() as u32;
    (0..n)
        .into_par_iter()
        .fold(EdgeSink::default, |mut sink, i| {
            for j in (i + 1)..n {
                sink.visit(i, j, positions, d_max, params, seed);
            }
            sink
        })
        .reduce(EdgeSink::default, EdgeSink::merge)
}

struct CellGrid {
    side: usize,
    /// Node indices bucketed by cell, cell-major.
    members: Vec<u32>,
    starts: Vec<usize>,
}

impl CellGrid {
    /// Returns `None` when a grid would not prune anything.
    fn build(positions: &NodePositions, radius_km: f64, d_max: f64) -> Option<Self> {
        let n = positions.len();
        let span = 2.0 * radius_km;
        if !d_max.is_finite() || d_max * 3.0 >= span || n < 64 {
            return None;
        }
        // Cap the cell count at a few cells per node; cells only get bigger.
        let max_side = ((4 * n) as f64).sqrt().ceil() as usize + 1;
        let side = ((span / d_max).floor() as usize).clamp(1, max_side);
        if side < 3 {
            return None;
        }
        let cell = span / side as f64;
        let cell_of = |&(x, y): &(f64, f64)| {
            let cx = (((x + radius_km) / cell) as usize).min(side - 1);
            let cy = (((y + radius_km) / cell) as usize).min(side - 1);
            cy * side + cx
        };
        let mut counts = vec![0usize; side * side + 1];
        let cells: Vec<usize> = positions.coords.iter().map(cell_of).collect();
        for &c in &cells {
            counts[c + 1] += 1;
        }
        for k in 1..counts.len() {
            counts[k] += counts[k - 1];
        }
        let starts = counts.clone();
        let mut members = vec![0u32; n];
        for (i, &c) in cells.iter().enumerate() {
            members[counts[c]] = i as u32;
            counts[c] += 1;
        }
        Some(Self {
            side,
            members,
            starts,
        })
    }

    fn cell(&self, cx: usize, cy: usize) -> &[u32] {
        let c = cy * self.side + cx;
        &self.members[self.starts[c]..self.starts[c + 1]]
    }

    fn enumerate(
        &self,
        positions: &NodePositions,
        params: &ModelParams,
        seed: &SeedSpec,
        d_max: f64,
    ) -> EdgeSink {
        // Half-stencil: each unordered pair of neighboring cells is visited once.
        const FORWARD: [(isize, isize); 4] = [(1, 0), (-1, 1), (0, 1), (1, 1)];
        let side = self.side;
        (0..side)
            .into_par_iter()
            .fold(EdgeSink::default, |mut sink, cy| {
                for cx in 0..side {
                    let here = self.cell(cx, cy);
                    for (k, &a) in here.iter().enumerate() {
                        for &b in &here[k + 1..] {
                            sink.visit(a, b, positions, d_max, params, seed);
                        }
                    }
                    for (dx, dy) in FORWARD {
                        let (nx, ny) = (cx as isize + dx, cy as isize + dy);
                        if nx < 0 || nx >= side as isize || ny >= side as isize {
                            continue;
                        }
                        let there = self.cell(nx as usize, ny as usize);
                        for &a in here {
                            for &b in there {
                                sink.visit(a, b, positions, d_max, params, seed);
                            }
                        }
                    }
                }
                sink
            })
            .reduce(EdgeSink::default, EdgeSink::merge)
    }
}
