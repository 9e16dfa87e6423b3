use std::f64::consts::TAU;

use super::params::ModelParams;
use super::rng::{Purpose, SeedSpec};

/// Planar node coordinates in km, centered on the disk origin.
#[derive(Debug, Clone, PartialEq)]
pub struct NodePositions {
    pub coords: Vec<(f64, f64)>,
}

impl NodePositions {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (xi, yi) = self.coords[i];
        let (xj, yj) = self.coords[j];
        (xi - xj).hypot(yi - yj)
    }
}

/// Places `n_nodes` points uniformly in the disk.
///
/// Node `i` consumes exactly two keyed uniforms: one for the radius
/// (R·sqrt(u)) and one for the angle.
pub fn sample_node_positions(params: &ModelParams, seed: &SeedSpec) -> NodePositions {
    let r_max = params.radius_km;
    let coords = (0..params.n_nodes as u64)
        .map(|i| {
            let r = r_max * seed.uniform(Purpose::NodeRadius, i, 0).sqrt();
            let theta = TAU * seed.uniform(Purpose::NodeAngle, i, 0);
            let (s, c) = theta.sin_cos();
            // Rounding in r·cos can overshoot the rim by an ulp.
            let (x, y) = (r * c, r * s);
            let norm = x.hypot(y);
            if norm > r_max {
                (x * r_max / norm, y * r_max / norm)
            } else {
                (x, y)
            }
        })
        .collect();
    NodePositions { coords }
}
