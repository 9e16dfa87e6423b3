use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// How the photonic layer is sampled relative to the fiber layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhotonicMode {
    /// Photons are only sent over existing fibers: P(edge) = Π(d)·P(d).
    #[default]
    FiberConditioned,
    /// Photonic links are drawn on every pair independently of the fibers.
    AllPairs,
}

/// Physical and sampling parameters of one scenario.
///
/// Defaults mirror the US fiber backbone setting: αL = 226 km, β = 1,
/// γ = 0.2 dB/km and n_p = 1000 pulses on a 1800 km disk with 1000 nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    pub radius_km: f64,
    pub n_nodes: usize,
    pub waxman_beta: f64,
    /// The Waxman product αL in km.
    pub waxman_scale_km: f64,
    pub loss_db_per_km: f64,
    pub n_pulses: u32,
    /// Pairs whose link probability is below this are never drawn.
    /// Zero disables the cutoff.
    pub cutoff_epsilon: f64,
    pub photonic_mode: PhotonicMode,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            radius_km: 1800.0,
            n_nodes: 1000,
            waxman_beta: 1.0,
            waxman_scale_km: 226.0,
            loss_db_per_km: 0.2,
            n_pulses: 1000,
            cutoff_epsilon: 1e-12,
            photonic_mode: PhotonicMode::FiberConditioned,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius_km > 0.0 && self.radius_km.is_finite()) {
            return Err(invalid(
                "radius_km",
                format!("must be positive, got {}", self.radius_km),
            ));
        }
        if self.n_nodes == 0 {
            return Err(invalid("n_nodes", "must be at least 1"));
        }
        if !(self.waxman_beta > 0.0 && self.waxman_beta <= 1.0) {
            return Err(invalid(
                "waxman_beta",
                format!("must lie in (0, 1], got {}", self.waxman_beta),
            ));
        }
        // +inf is accepted: it switches the Waxman factor off entirely.
        if !(self.waxman_scale_km > 0.0) {
            return Err(invalid(
                "waxman_scale_km",
                format!("must be positive, got {}", self.waxman_scale_km),
            ));
        }
        if !(self.loss_db_per_km > 0.0 && self.loss_db_per_km.is_finite()) {
            return Err(invalid(
                "loss_db_per_km",
                format!("must be positive, got {}", self.loss_db_per_km),
            ));
        }
        if self.n_pulses == 0 {
            return Err(invalid("n_pulses", "must be at least 1"));
        }
        if !(self.cutoff_epsilon >= 0.0 && self.cutoff_epsilon < 1.0) {
            return Err(invalid(
                "cutoff_epsilon",
                format!("must lie in [0, 1), got {}", self.cutoff_epsilon),
            ));
        }
        let rho = self.density();
        if !(rho.is_finite() && rho > 0.0) {
            return Err(invalid(
                "radius_km",
                format!("density {rho} is not finite and positive"),
            ));
        }
        Ok(())
    }

    /// Node density N / (πR²) in nodes per km².
    pub fn density(&self) -> f64 {
        self.n_nodes as f64 / (PI * self.radius_km * self.radius_km)
    }

    /// Copy of these parameters with the radius chosen so that the density is `rho`.
    pub fn with_density(&self, rho: f64) -> Result<Self> {
        Ok(Self {
            radius_km: radius_for_density(self.n_nodes, rho)?,
            ..self.clone()
        })
    }
}

/// Disk radius (km) at which `n_nodes` nodes have density `rho`.
pub fn radius_for_density(n_nodes: usize, rho: f64) -> Result<f64> {
    if n_nodes == 0 {
        return Err(invalid("n_nodes", "must be at least 1"));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "rho",
            reason: format!("must be positive, got {rho}"),
        });
    }
    Ok((n_nodes as f64 / (PI * rho)).sqrt())
}
