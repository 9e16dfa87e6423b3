//! Ensembles of independent realizations and their aggregate statistics.
//!
//! Realization `k` of an ensemble with base seed `s` always uses
//! `SeedSpec::new(s, k)`. Records are reduced in index order, so results do
//! not depend on how many worker threads ran them.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Layer, NetworkGraph};
use crate::metrics::{
    average_clustering, average_shortest_path_with, cluster_size_counts, connected_components,
    degree_histogram, DegreeHistogram, PathScope, PathStats, DEFAULT_MAX_EXACT_SOURCES,
};
use crate::model::{derive_seed, keyed_hash, ModelParams, Purpose, Realization, SeedSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MeasureOptions {
    pub measure_paths: bool,
    pub max_exact_sources: usize,
    /// Layer the observables are computed on.
    pub layer: Layer,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        Self {
            measure_paths: false,
            max_exact_sources: DEFAULT_MAX_EXACT_SOURCES,
            layer: Layer::Photonic,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnsembleOptions {
    pub measure: MeasureOptions,
    /// Bootstrap resamples for the χ and s* error bars; 0 disables them.
    pub bootstrap_resamples: usize,
}

/// Observables of one realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationRecord {
    pub n_nodes: usize,
    pub n_edges: usize,
    /// Largest cluster size N_G.
    pub s1: usize,
    pub s2: usize,
    pub degree_hist: DegreeHistogram,
    pub avg_clustering: f64,
    pub path_stats: Option<PathStats>,
    /// Cluster size → count, largest cluster excluded.
    pub finite_cluster_counts: BTreeMap<usize, usize>,
}

impl RealizationRecord {
    pub fn mean_degree(&self) -> f64 {
        2.0 * self.n_edges as f64 / self.n_nodes as f64
    }

    pub fn giant_fraction(&self) -> f64 {
        self.s1 as f64 / self.n_nodes as f64
    }
}

/// Computes every per-realization observable on an already sampled graph.
pub fn measure_graph(
    graph: &NetworkGraph,
    seed: &SeedSpec,
    opts: &MeasureOptions,
) -> Result<RealizationRecord> {
    let decomp = connected_components(graph);
    let path_stats = if opts.measure_paths && decomp.s1() >= 2 {
        Some(average_shortest_path_with(
            graph,
            &decomp,
            PathScope::GiantCluster,
            opts.max_exact_sources,
            seed,
        )?)
    } else {
        None
    };
    Ok(RealizationRecord {
        n_nodes: graph.n_nodes(),
        n_edges: graph.n_edges(),
        s1: decomp.s1(),
        s2: decomp.s2(),
        degree_hist: degree_histogram(graph),
        avg_clustering: average_clustering(graph),
        path_stats,
        finite_cluster_counts: cluster_size_counts(&decomp, true),
    })
}

pub fn run_realization(
    params: &ModelParams,
    seed: &SeedSpec,
    opts: &MeasureOptions,
) -> Result<RealizationRecord> {
    params.validate()?;
    let real = Realization::sample(params, seed);
    measure_graph(real.layer(opts.layer), seed, opts)
}

/// Runs realizations `0..n_realizations` and returns their records in index order.
pub fn run_records(
    params: &ModelParams,
    n_realizations: usize,
    base_seed: u64,
    opts: &MeasureOptions,
) -> Result<Vec<RealizationRecord>> {
    if n_realizations == 0 {
        return Err(Error::InsufficientData(
            "an ensemble needs at least one realization".into(),
        ));
    }
    params.validate()?;
    (0..n_realizations as u64)
        .into_par_iter()
        .map(|k| run_realization(params, &SeedSpec::new(base_seed, k), opts))
        .collect()
}

fn mean(xs: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = xs.len() as f64;
    xs.sum::<f64>() / n
}

/// Mean and standard error of the mean (sample standard deviation / √M).
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    let m = mean(xs.iter().copied());
    if n < 2 {
        return (m, 0.0);
    }
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    (m, (var / n as f64).sqrt())
}

fn require(records: &[RealizationRecord], at_least: usize) -> Result<()> {
    if records.len() < at_least {
        Err(Error::InsufficientData(format!(
            "need at least {at_least} realization(s), got {}",
            records.len()
        )))
    } else {
        Ok(())
    }
}

/// Order parameter m = ⟨N_G⟩/N and its standard error.
pub fn order_parameter(records: &[RealizationRecord]) -> Result<(f64, f64)> {
    require(records, 1)?;
    let fractions: Vec<f64> = records
        .iter()
        .map(RealizationRecord::giant_fraction)
        .collect();
    Ok(mean_and_stderr(&fractions))
}

/// χ = sqrt(⟨N_G²⟩ − ⟨N_G⟩²) over absolute cluster sizes.
pub fn susceptibility(records: &[RealizationRecord]) -> Result<f64> {
    require(records, 2)?;
    let m1 = mean(records.iter().map(|r| r.s1 as f64));
    let m2 = mean(records.iter().map(|r| (r.s1 as f64).powi(2)));
    Ok((m2 - m1 * m1).max(0.0).sqrt())
}

/// U = 1 − ⟨m⁴⟩/⟨m²⟩² with m = N_G/N per realization.
pub fn binder_cumulant(records: &[RealizationRecord]) -> Result<f64> {
    require(records, 1)?;
    let m2 = mean(records.iter().map(|r| r.giant_fraction().powi(2)));
    let m4 = mean(records.iter().map(|r| r.giant_fraction().powi(4)));
    if m2 == 0.0 {
        return Err(Error::InsufficientData("⟨m²⟩ is zero".into()));
    }
    Ok(1.0 - m4 / (m2 * m2))
}

/// Mean over realizations of S2/S1.
pub fn s2_s1_ratio(records: &[RealizationRecord]) -> Result<f64> {
    Ok(s2_s1_ratio_with_stderr(records)?.0)
}

fn s2_s1_ratio_with_stderr(records: &[RealizationRecord]) -> Result<(f64, f64)> {
    require(records, 1)?;
    let ratios = records
        .iter()
        .map(|r| {
            if r.s1 == 0 {
                Err(Error::InsufficientData("realization with S1 = 0".into()))
            } else {
                Ok(r.s2 as f64 / r.s1 as f64)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(mean_and_stderr(&ratios))
}

/// n(s): per-node count of finite clusters of size s, averaged over realizations.
pub fn cluster_size_distribution(
    records: &[RealizationRecord],
    n_nodes: usize,
) -> BTreeMap<usize, f64> {
    let mut totals: BTreeMap<usize, usize> = BTreeMap::new();
    for r in records {
        for (&s, &c) in &r.finite_cluster_counts {
            *totals.entry(s).or_insert(0) += c;
        }
    }
    let norm = (records.len() * n_nodes) as f64;
    totals
        .into_iter()
        .map(|(s, c)| (s, c as f64 / norm))
        .collect()
}

/// s* = Σ s²n(s) / Σ s n(s); `None` when there are no finite clusters.
pub fn characteristic_cluster_size(n_s: &BTreeMap<usize, f64>) -> Option<f64> {
    let (mut first, mut second) = (0.0, 0.0);
    for (&s, &n) in n_s {
        let s = s as f64;
        first += s * n;
        second += s * s * n;
    }
    (first > 0.0).then(|| second / first)
}

/// Ensemble statistics at one (N, ρ) point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsemblePoint {
    pub params: ModelParams,
    pub n_nodes: usize,
    pub rho: f64,
    pub radius_km: f64,
    pub n_realizations: usize,
    pub m: f64,
    pub m_stderr: f64,
    /// Absent for single-realization ensembles.
    pub chi: Option<f64>,
    pub chi_stderr: Option<f64>,
    pub binder: f64,
    pub s2_over_s1: f64,
    pub s2_over_s1_stderr: f64,
    pub mean_degree: f64,
    pub mean_degree_stderr: f64,
    pub avg_clustering: f64,
    pub avg_clustering_stderr: f64,
    pub avg_path: Option<f64>,
    pub avg_path_stderr: Option<f64>,
    /// Mean P(k) over realizations.
    pub degree_distribution: BTreeMap<usize, f64>,
    pub n_s: BTreeMap<usize, f64>,
    pub s_star: Option<f64>,
    pub s_star_stderr: Option<f64>,
}

impl EnsemblePoint {
    pub fn from_records(
        params: &ModelParams,
        records: &[RealizationRecord],
        base_seed: u64,
        opts: &EnsembleOptions,
    ) -> Result<Self> {
        require(records, 1)?;
        let n = params.n_nodes;
        let (m, m_stderr) = order_parameter(records)?;
        let (s2_over_s1, s2_over_s1_stderr) = s2_s1_ratio_with_stderr(records)?;
        let degrees: Vec<f64> = records.iter().map(RealizationRecord::mean_degree).collect();
        let (mean_degree, mean_degree_stderr) = mean_and_stderr(&degrees);
        let clust: Vec<f64> = records.iter().map(|r| r.avg_clustering).collect();
        let (avg_clustering, avg_clustering_stderr) = mean_and_stderr(&clust);

        let paths: Vec<f64> = records
            .iter()
            .filter_map(|r| r.path_stats.map(|p| p.mean_shortest_path))
            .collect();
        let (avg_path, avg_path_stderr) = if paths.is_empty() {
            (None, None)
        } else {
            let (a, b) = mean_and_stderr(&paths);
            (Some(a), Some(b))
        };

        let mut degree_distribution: BTreeMap<usize, f64> = BTreeMap::new();
        for r in records {
            for (k, p) in r.degree_hist.distribution() {
                *degree_distribution.entry(k).or_insert(0.0) += p;
            }
        }
        let m_count = records.len() as f64;
        degree_distribution.values_mut().for_each(|p| *p /= m_count);

        let n_s = cluster_size_distribution(records, n);
        let s_star = characteristic_cluster_size(&n_s);

        let chi = if records.len() >= 2 {
            Some(susceptibility(records)?)
        } else {
            None
        };
        let (chi_stderr, s_star_stderr) = if opts.bootstrap_resamples > 0 && records.len() >= 2 {
            bootstrap_errors(records, n, base_seed, opts.bootstrap_resamples)
        } else {
            (None, None)
        };

        Ok(Self {
            params: params.clone(),
            n_nodes: n,
            rho: params.density(),
            radius_km: params.radius_km,
            n_realizations: records.len(),
            m,
            m_stderr,
            chi,
            chi_stderr,
            binder: binder_cumulant(records)?,
            s2_over_s1,
            s2_over_s1_stderr,
            mean_degree,
            mean_degree_stderr,
            avg_clustering,
            avg_clustering_stderr,
            avg_path,
            avg_path_stderr,
            degree_distribution,
            n_s,
            s_star,
            s_star_stderr,
        })
    }
}

/// Bootstrap standard deviations of χ and s* over resampled ensembles.
fn bootstrap_errors(
    records: &[RealizationRecord],
    n_nodes: usize,
    base_seed: u64,
    resamples: usize,
) -> (Option<f64>, Option<f64>) {
    let m = records.len();
    let mut chis = Vec::with_capacity(resamples);
    let mut stars = Vec::with_capacity(resamples);
    let mut sample = Vec::with_capacity(m);
    for b in 0..resamples as u64 {
        sample.clear();
        for k in 0..m as u64 {
            let h = keyed_hash(&[base_seed, Purpose::Bootstrap as u64, b, k]);
            sample.push(records[(h % m as u64) as usize].clone());
        }
        if let Ok(c) = susceptibility(&sample) {
            chis.push(c);
        }
        if let Some(s) = characteristic_cluster_size(&cluster_size_distribution(&sample, n_nodes)) {
            stars.push(s);
        }
    }
    let sd = |xs: &[f64]| {
        (xs.len() >= 2).then(|| {
            let (_, se) = mean_and_stderr(xs);
            se * (xs.len() as f64).sqrt()
        })
    };
    (sd(&chis), sd(&stars))
}

pub fn run_ensemble(
    params: &ModelParams,
    n_realizations: usize,
    base_seed: u64,
    opts: &EnsembleOptions,
) -> Result<EnsemblePoint> {
    let records = run_records(params, n_realizations, base_seed, &opts.measure)?;
    EnsemblePoint::from_records(params, &records, base_seed, opts)
}

/// Parameter varied across a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Grid values are densities; R is recomputed at fixed N.
    DensityFixedN,
    /// Grid values are node counts; R is recomputed at the template density.
    SizeFixedRho,
    /// Grid values are node counts on the template disk.
    SizeFixedRadius,
    /// Grid values are radii in km at fixed N.
    RadiusFixedN,
    /// Grid values are pulse counts n_p.
    Pulses,
    /// Grid values are fiber losses in dB/km.
    Loss,
}

const SWEEP_STREAM: u64 = 0x5357_4545_50;

/// Base seed of the ensemble at sweep grid point `index`.
pub fn sweep_point_seed(base_seed: u64, index: usize) -> u64 {
    derive_seed(base_seed, SWEEP_STREAM, index as u64)
}

fn as_count(v: f64, what: &str) -> Result<u64> {
    if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as u64)
    } else {
        Err(Error::InvalidSweep(format!(
            "{what} grid value {v} is not a positive integer"
        )))
    }
}

/// Scenario parameters at every grid point.
pub fn sweep_params(
    template: &ModelParams,
    axis: SweepAxis,
    grid: &[f64],
) -> Result<Vec<ModelParams>> {
    if grid.is_empty() {
        return Err(Error::InvalidSweep("empty grid".into()));
    }
    template.validate()?;
    grid.iter()
        .map(|&v| {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidSweep(format!(
                    "grid value {v} must be finite and positive"
                )));
            }
            let p = match axis {
                SweepAxis::DensityFixedN => template.with_density(v)?,
                SweepAxis::SizeFixedRho => {
                    let n = as_count(v, "size")? as usize;
                    ModelParams {
                        n_nodes: n,
                        ..template.clone()
                    }
                    .with_density(template.density())?
                }
                SweepAxis::SizeFixedRadius => ModelParams {
                    n_nodes: as_count(v, "size")? as usize,
                    ..template.clone()
                },
                SweepAxis::RadiusFixedN => ModelParams {
                    radius_km: v,
                    ..template.clone()
                },
                SweepAxis::Pulses => ModelParams {
                    n_pulses: as_count(v, "pulse")? as u32,
                    ..template.clone()
                },
                SweepAxis::Loss => ModelParams {
                    loss_db_per_km: v,
                    ..template.clone()
                },
            };
            p.validate()
                .map_err(|e| Error::InvalidSweep(e.to_string()))?;
            Ok(p)
        })
        .collect()
}

/// Runs one ensemble per grid point, reporting each as it completes.
///
/// `on_point` may abort the sweep by returning an error.
pub fn sweep_with<F>(
    template: &ModelParams,
    axis: SweepAxis,
    grid: &[f64],
    n_realizations: usize,
    base_seed: u64,
    opts: &EnsembleOptions,
    mut on_point: F,
) -> Result<Vec<EnsemblePoint>>
where
    F: FnMut(usize, &EnsemblePoint, &[RealizationRecord]) -> Result<()>,
{
    let all = sweep_params(template, axis, grid)?;
    let mut out = Vec::with_capacity(all.len());
    for (k, params) in all.iter().enumerate() {
        let seed = sweep_point_seed(base_seed, k);
        let records = run_records(params, n_realizations, seed, &opts.measure)?;
        let point = EnsemblePoint::from_records(params, &records, seed, opts)?;
        on_point(k, &point, &records)?;
        out.push(point);
    }
    Ok(out)
}

pub fn sweep(
    template: &ModelParams,
    axis: SweepAxis,
    grid: &[f64],
    n_realizations: usize,
    base_seed: u64,
    opts: &EnsembleOptions,
) -> Result<Vec<EnsemblePoint>> {
    sweep_with(
        template,
        axis,
        grid,
        n_realizations,
        base_seed,
        opts,
        |_, _, _| Ok(()),
    )
}
