//! The two-layer network model: node placement, Waxman fibers and
//! pulse-based photonic links.

mod generate;
mod layout;
mod links;
mod params;
mod rng;

pub use generate::{generate_realization, generate_realization_naive, Realization};
pub use layout::{sample_node_positions, NodePositions};
pub use links::{
    combined_link_prob, fiber_link_prob, interaction_cutoff, photonic_link_prob, transmissivity,
};
pub use params::{radius_for_density, ModelParams, PhotonicMode};
pub use rng::{derive_seed, keyed_hash, to_unit, Purpose, SeedSpec};
