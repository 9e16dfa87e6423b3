use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ensemble::{EnsembleOptions, MeasureOptions, SweepAxis};
use crate::error::{Error, Result};
use crate::graph::Layer;
use crate::metrics::DEFAULT_MAX_EXACT_SOURCES;
use crate::model::ModelParams;

/// A scenario file: model parameters, an optional sweep and run settings.
///
/// ```toml
/// [model]
/// n_nodes = 2000
///
/// [sweep]
/// axis = "density_fixed_n"
/// grid = { from = 3e-5, to = 1.5e-4, steps = 25, spacing = "log" }
///
/// [run]
/// realizations = 300
/// base_seed = 7
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    pub run: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub grid: GridSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRange {
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

/// Either a `{from, to, steps, spacing}` table or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    // listed first: a struct also deserializes from a sequence
    Values(Vec<f64>),
    Range(GridRange),
}

impl GridSpec {
    /// Expands the spec into a strictly monotone, non-empty grid.
    pub fn values(&self) -> Result<Vec<f64>> {
        let grid = match self {
            GridSpec::Values(v) => v.clone(),
            GridSpec::Range(r) => {
                if r.steps == 0 {
                    return Err(Error::InvalidSweep("grid needs at least one step".into()));
                }
                if !(r.from.is_finite() && r.to.is_finite()) {
                    return Err(Error::InvalidSweep("grid ends must be finite".into()));
                }
                if r.steps == 1 {
                    vec![r.from]
                } else {
                    let last = (r.steps - 1) as f64;
                    match r.spacing {
                        Spacing::Linear => (0..r.steps)
                            .map(|i| r.from + (r.to - r.from) * i as f64 / last)
                            .collect(),
                        Spacing::Log => {
                            if !(r.from > 0.0 && r.to > 0.0) {
                                return Err(Error::InvalidSweep(
                                    "log spacing needs positive ends".into(),
                                ));
                            }
                            let (a, b) = (r.from.ln(), r.to.ln());
                            (0..r.steps)
                                .map(|i| match i {
                                    0 => r.from,
                                    i if i == r.steps - 1 => r.to,
                                    i => (a + (b - a) * i as f64 / last).exp(),
                                })
                                .collect()
                        }
                    }
                }
            }
        };
        if grid.is_empty() {
            return Err(Error::InvalidSweep("empty grid".into()));
        }
        if grid.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSweep("grid values must be finite".into()));
        }
        let increasing = grid.windows(2).all(|w| w[0] < w[1]);
        let decreasing = grid.windows(2).all(|w| w[0] > w[1]);
        if !(increasing || decreasing) {
            return Err(Error::InvalidSweep("grid must be strictly monotone".into()));
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub realizations: usize,
    pub base_seed: u64,
    pub measure_paths: bool,
    pub max_exact_sources: usize,
    pub output_dir: PathBuf,
    pub emit_per_realization: bool,
    pub layer: Layer,
    pub bootstrap_resamples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            realizations: 1000,
            base_seed: 0,
            measure_paths: false,
            max_exact_sources: DEFAULT_MAX_EXACT_SOURCES,
            output_dir: PathBuf::from("out"),
            emit_per_realization: false,
            layer: Layer::Photonic,
            bootstrap_resamples: 0,
        }
    }
}

impl RunConfig {
    pub fn ensemble_options(&self) -> EnsembleOptions {
        EnsembleOptions {
            measure: MeasureOptions {
                measure_paths: self.measure_paths,
                max_exact_sources: self.max_exact_sources,
                layer: self.layer,
            },
            bootstrap_resamples: self.bootstrap_resamples,
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.run.realizations == 0 {
            return Err(Error::Config("run.realizations must be at least 1".into()));
        }
        if let Some(s) = &self.sweep {
            s.grid.values()?;
        }
        Ok(())
    }
}
