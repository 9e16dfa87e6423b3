use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::ScenarioConfig;
use super::io::{
    fmt_f64, fmt_opt, read_sweep, write_json, CsvOut, OutputFile, RunManifest, SweepRow, STATUS_OK,
    SWEEP_HEADER,
};
use crate::criticality::{
    estimate_beta_over_nu, estimate_order_exponent, estimate_tau, find_crossing,
    fit_mean_degree_coefficient, fit_path_scaling, fit_power_law, interpolate, optimize_collapse,
    rescale, test_log_growth, Binning, CollapseBounds, CollapseCurves, CollapseResult,
    CrossingEstimate, CurvePoint, Curves, ExponentEstimate, FitWindow, LogGrowthTest,
    PathScalingFit, ScalingExponents, ScalingForm,
};
use crate::ensemble::{
    run_ensemble, sweep_point_seed, sweep_with, EnsemblePoint, MeasureOptions, RealizationRecord,
};
use crate::error::{Error, Result};
use crate::graph::{Layer, NetworkGraph};
use crate::metrics::connected_components;
use crate::model::{NodePositions, Realization, SeedSpec};

fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn write_config_echo(cfg: &ScenarioConfig, dir: &Path) -> Result<OutputFile> {
    let path = dir.join("config.toml");
    std::fs::write(&path, cfg.to_toml_string()?)?;
    Ok(OutputFile { path, rows: None })
}

fn write_edges(path: &Path, graph: &NetworkGraph, positions: &NodePositions) -> Result<OutputFile> {
    let mut out = CsvOut::create(path, &["node_i", "node_j", "distance_km"])?;
    for &(i, j) in graph.edges() {
        let d = positions.distance(i as usize, j as usize);
        out.row([i.to_string(), j.to_string(), fmt_f64(d)])?;
    }
    out.finish()
}

/// Single-graph observables written by `generate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub n_edges: usize,
    pub s1: usize,
    pub s2: usize,
    pub giant_fraction: f64,
    pub mean_degree: f64,
    pub avg_clustering: f64,
    /// Mean shortest path on the giant cluster; `None` when it has one node.
    pub avg_path: Option<f64>,
    pub avg_path_exact: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub realizations: usize,
    pub m: f64,
    pub m_stderr: f64,
    pub chi: Option<f64>,
    pub binder: f64,
    pub s2_over_s1: f64,
    pub mean_degree: f64,
    pub avg_clustering: f64,
    pub avg_path: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationStats {
    pub n_nodes: usize,
    pub radius_km: f64,
    pub rho: f64,
    pub base_seed: u64,
    pub layer: Layer,
    /// Observables of `layer`, repeated from the per-layer blocks.
    #[serde(flatten)]
    pub primary: GraphStats,
    pub fiber: GraphStats,
    pub photonic: GraphStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleSummary>,
}

fn graph_stats(
    graph: &NetworkGraph,
    seed: &SeedSpec,
    max_exact_sources: usize,
) -> Result<GraphStats> {
    let opts = MeasureOptions {
        measure_paths: true,
        max_exact_sources,
        layer: graph.layer(),
    };
    let r = crate::ensemble::measure_graph(graph, seed, &opts)?;
    Ok(GraphStats {
        n_edges: r.n_edges,
        s1: r.s1,
        s2: r.s2,
        giant_fraction: r.giant_fraction(),
        mean_degree: r.mean_degree(),
        avg_clustering: r.avg_clustering,
        avg_path: r.path_stats.map(|p| p.mean_shortest_path),
        avg_path_exact: r.path_stats.map(|p| p.exact),
    })
}

/// Samples realization 0 of the scenario and writes its nodes, both edge
/// layers and summary statistics. With `ensemble`, the statistics also
/// include an ensemble average over `run.realizations` realizations.
pub fn generate(cfg: &ScenarioConfig, ensemble: bool) -> Result<Vec<OutputFile>> {
    cfg.validate()?;
    let dir = &cfg.run.output_dir;
    prepare_dir(dir)?;
    let seed = SeedSpec::new(cfg.run.base_seed, 0);
    let real = Realization::sample(&cfg.model, &seed);
    let mut files = Vec::new();

    let mut nodes = CsvOut::create(&dir.join("nodes.csv"), &["node_id", "x_km", "y_km"])?;
    for (i, &(x, y)) in real.positions.coords.iter().enumerate() {
        nodes.row([i.to_string(), fmt_f64(x), fmt_f64(y)])?;
    }
    files.push(nodes.finish()?);
    files.push(write_edges(
        &dir.join("fiber_edges.csv"),
        &real.fiber,
        &real.positions,
    )?);
    files.push(write_edges(
        &dir.join("photonic_edges.csv"),
        &real.photonic,
        &real.positions,
    )?);

    let fiber = graph_stats(&real.fiber, &seed, cfg.run.max_exact_sources)?;
    let photonic = graph_stats(&real.photonic, &seed, cfg.run.max_exact_sources)?;
    let ensemble = if ensemble {
        let p = run_ensemble(
            &cfg.model,
            cfg.run.realizations,
            cfg.run.base_seed,
            &cfg.run.ensemble_options(),
        )?;
        Some(EnsembleSummary {
            realizations: p.n_realizations,
            m: p.m,
            m_stderr: p.m_stderr,
            chi: p.chi,
            binder: p.binder,
            s2_over_s1: p.s2_over_s1,
            mean_degree: p.mean_degree,
            avg_clustering: p.avg_clustering,
            avg_path: p.avg_path,
        })
    } else {
        None
    };
    let stats = RealizationStats {
        n_nodes: cfg.model.n_nodes,
        radius_km: cfg.model.radius_km,
        rho: cfg.model.density(),
        base_seed: cfg.run.base_seed,
        layer: cfg.run.layer,
        primary: match cfg.run.layer {
            Layer::Fiber => fiber.clone(),
            Layer::Photonic => photonic.clone(),
        },
        fiber,
        photonic,
        ensemble,
    };
    files.push(write_json(&dir.join("realization_stats.json"), &stats)?);
    files.push(write_config_echo(cfg, dir)?);

    let mut manifest = RunManifest::new(
        "generate",
        serde_json::to_value(cfg)?,
        json!({ "base_seed": cfg.run.base_seed, "realization_index": 0, "ensemble": stats.ensemble.is_some() }),
    );
    manifest.files = files.clone();
    files.push(OutputFile {
        path: manifest.write(dir)?,
        rows: None,
    });
    Ok(files)
}

fn sweep_row(p: &EnsemblePoint) -> Vec<String> {
    vec![
        fmt_f64(p.rho),
        p.n_nodes.to_string(),
        fmt_f64(p.radius_km),
        fmt_f64(p.m),
        fmt_f64(p.m_stderr),
        fmt_opt(p.chi),
        fmt_f64(p.binder),
        fmt_f64(p.s2_over_s1),
        fmt_f64(p.mean_degree),
        fmt_f64(p.avg_clustering),
        fmt_opt(p.avg_path),
        fmt_opt(p.s_star),
        fmt_opt(p.chi_stderr),
        fmt_f64(p.s2_over_s1_stderr),
        fmt_f64(p.mean_degree_stderr),
        fmt_f64(p.avg_clustering_stderr),
        fmt_opt(p.avg_path_stderr),
        fmt_opt(p.s_star_stderr),
        p.n_realizations.to_string(),
        p.params.n_pulses.to_string(),
        fmt_f64(p.params.loss_db_per_km),
        STATUS_OK.to_string(),
    ]
}

struct SweepWriters {
    sweep: CsvOut,
    ns: CsvOut,
    degree: CsvOut,
    per_realization: Option<CsvOut>,
}

impl SweepWriters {
    fn point(
        &mut self,
        index: usize,
        p: &EnsemblePoint,
        records: &[RealizationRecord],
    ) -> Result<()> {
        self.sweep.row(sweep_row(p))?;
        let (rho, n) = (fmt_f64(p.rho), p.n_nodes.to_string());
        for (s, v) in &p.n_s {
            self.ns
                .row([rho.clone(), n.clone(), s.to_string(), fmt_f64(*v)])?;
        }
        for (k, v) in &p.degree_distribution {
            self.degree
                .row([rho.clone(), n.clone(), k.to_string(), fmt_f64(*v)])?;
        }
        if let Some(w) = self.per_realization.as_mut() {
            for (r, rec) in records.iter().enumerate() {
                w.row([
                    index.to_string(),
                    rho.clone(),
                    n.clone(),
                    r.to_string(),
                    rec.s1.to_string(),
                    rec.s2.to_string(),
                    rec.n_edges.to_string(),
                    fmt_f64(rec.mean_degree()),
                    fmt_f64(rec.avg_clustering),
                    fmt_opt(rec.path_stats.map(|s| s.mean_shortest_path)),
                ])?;
            }
        }
        self.flush()
    }

    fn flush(&mut self) -> Result<()> {
        self.sweep.flush()?;
        self.ns.flush()?;
        self.degree.flush()?;
        if let Some(w) = self.per_realization.as_mut() {
            w.flush()?;
        }
        Ok(())
    }
}

/// Runs the configured sweep, writing each grid point as soon as it is done.
///
/// On failure or interruption a marker row whose `status` cell describes the
/// error is appended to `sweep.csv` before the error is returned.
pub fn sweep(cfg: &ScenarioConfig, interrupted: &AtomicBool) -> Result<Vec<OutputFile>> {
    cfg.validate()?;
    let sweep_cfg = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("the sweep command needs a [sweep] section".into()))?;
    let grid = sweep_cfg.grid.values()?;
    let dir = &cfg.run.output_dir;
    prepare_dir(dir)?;

    let mut w = SweepWriters {
        sweep: CsvOut::create(&dir.join("sweep.csv"), &SWEEP_HEADER)?,
        ns: CsvOut::create(&dir.join("ns.csv"), &["rho", "n_nodes", "s", "n_s"])?,
        degree: CsvOut::create(&dir.join("degree.csv"), &["rho", "n_nodes", "k", "p_k"])?,
        per_realization: if cfg.run.emit_per_realization {
            Some(CsvOut::create(
                &dir.join("realizations.csv"),
                &[
                    "point_index",
                    "rho",
                    "n_nodes",
                    "realization",
                    "s1",
                    "s2",
                    "n_edges",
                    "mean_degree",
                    "avg_clustering",
                    "avg_path",
                ],
            )?)
        } else {
            None
        },
    };
    let result = sweep_with(
        &cfg.model,
        sweep_cfg.axis,
        &grid,
        cfg.run.realizations,
        cfg.run.base_seed,
        &cfg.run.ensemble_options(),
        |k, p, records| {
            w.point(k, p, records)?;
            if interrupted.load(Ordering::SeqCst) {
                return Err(Error::Interrupted);
            }
            Ok(())
        },
    );
    if let Err(e) = result {
        let mut marker = vec![String::new(); SWEEP_HEADER.len()];
        *marker.last_mut().unwrap() = format!("failed: {e}");
        w.sweep.row(marker)?;
        w.flush()?;
        return Err(e);
    }

    let mut files = vec![w.sweep.finish()?, w.ns.finish()?, w.degree.finish()?];
    if let Some(r) = w.per_realization {
        files.push(r.finish()?);
    }
    files.push(write_config_echo(cfg, dir)?);
    let point_seeds: Vec<u64> = (0..grid.len())
        .map(|k| sweep_point_seed(cfg.run.base_seed, k))
        .collect();
    let mut manifest = RunManifest::new(
        "sweep",
        serde_json::to_value(cfg)?,
        json!({ "base_seed": cfg.run.base_seed, "point_seeds": point_seeds }),
    );
    manifest.files = files.clone();
    files.push(OutputFile {
        path: manifest.write(dir)?,
        rows: None,
    });
    Ok(files)
}

/// Observable whose size-independent crossing locates ρ_c.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CrossingObservable {
    #[default]
    S2OverS1,
    Binder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalOptions {
    pub observable: CrossingObservable,
    /// Window on Δρ = (ρ − ρ_c)/ρ_c for the β fit.
    pub beta_window: FitWindow,
    pub tau_min_size: usize,
    pub tau_max_size: Option<usize>,
    /// Zero selects raw (unbinned) n(s).
    pub tau_bins_per_decade: u32,
    /// Rows with ρ ≥ this multiple of ρ_c enter the path-scaling fit.
    pub path_min_rho_ratio: f64,
}

impl Default for CriticalOptions {
    fn default() -> Self {
        Self {
            observable: CrossingObservable::S2OverS1,
            beta_window: FitWindow::new(Some(0.1), Some(1.0)),
            tau_min_size: 2,
            tau_max_size: None,
            tau_bins_per_decade: 5,
            path_min_rho_ratio: 1.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanDegreeFit {
    /// Slope of ⟨k⟩ = A·ρ.
    pub a: f64,
    pub n_points: usize,
    /// Root-mean-square of (⟨k⟩ − Aρ)/⟨k⟩.
    pub rms_relative_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauReport {
    pub n_nodes: usize,
    pub rho: f64,
    pub binning: Binning,
    pub estimate: ExponentEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathReport {
    pub min_rho: f64,
    pub n_points: usize,
    pub scaling: PathScalingFit,
    pub log_growth: LogGrowthTest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalReport {
    pub inputs: Vec<PathBuf>,
    pub sizes: Vec<usize>,
    pub options: CriticalOptions,
    pub rho_c: f64,
    pub crossing: CrossingEstimate,
    pub mean_degree: Option<MeanDegreeFit>,
    /// A·ρ_c.
    pub k_c: Option<f64>,
    pub m_at_rho_c: BTreeMap<usize, f64>,
    pub beta_over_nu: Option<ExponentEstimate>,
    pub beta: Option<ExponentEstimate>,
    /// Slope of χ(ρ_c) against N.
    pub gamma_prime_over_nu: Option<ExponentEstimate>,
    /// Slope of s*(ρ_c) against N.
    pub one_over_sigma_nu: Option<ExponentEstimate>,
    pub tau: Option<TauReport>,
    pub path_scaling: Option<PathReport>,
    /// Estimators that could not run, with the reason.
    pub skipped: BTreeMap<String, String>,
}

struct SweepInput {
    path: PathBuf,
    rows: Vec<SweepRow>,
}

fn load_inputs(inputs: &[PathBuf]) -> Result<Vec<SweepInput>> {
    if inputs.is_empty() {
        return Err(Error::MissingInputs(vec!["sweep.csv".into()]));
    }
    inputs
        .iter()
        .map(|p| {
            Ok(SweepInput {
                path: p.clone(),
                rows: read_sweep(p)?,
            })
        })
        .collect()
}

/// Rows grouped by size, sorted by ρ, with duplicate ρ dropped.
fn by_size<'a>(
    inputs: impl IntoIterator<Item = &'a SweepRow>,
) -> BTreeMap<usize, Vec<&'a SweepRow>> {
    let mut out: BTreeMap<usize, Vec<&SweepRow>> = BTreeMap::new();
    for r in inputs {
        out.entry(r.n_nodes).or_default().push(r);
    }
    for rows in out.values_mut() {
        rows.sort_by(|a, b| a.rho.total_cmp(&b.rho));
        rows.dedup_by(|a, b| a.rho == b.rho);
    }
    out
}

fn curve_of(rows: &[&SweepRow], f: impl Fn(&SweepRow) -> Option<f64>) -> Vec<(f64, f64)> {
    rows.iter()
        .filter_map(|r| f(r).map(|v| (r.rho, v)))
        .collect()
}

fn fit_at_rho_c(values: &BTreeMap<usize, f64>, sign: f64) -> Result<ExponentEstimate> {
    if values.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "needs at least 3 sizes, got {}",
            values.len()
        )));
    }
    let ns: Vec<f64> = values.keys().map(|&n| n as f64).collect();
    let vs: Vec<f64> = values.values().copied().collect();
    let fit = fit_power_law(&ns, &vs)?;
    Ok(ExponentEstimate {
        value: sign * fit.exponent,
        fit,
        window: FitWindow::new(ns.first().copied(), ns.last().copied()),
    })
}

/// Locates ρ_c and estimates the exponents from sweep tables of several sizes.
pub fn analyze_critical(inputs: &[PathBuf], opts: &CriticalOptions) -> Result<CriticalReport> {
    let loaded = load_inputs(inputs)?;
    let all_rows: Vec<&SweepRow> = loaded.iter().flat_map(|i| &i.rows).collect();
    let groups = by_size(all_rows.iter().copied());
    let sizes: Vec<usize> = groups.keys().copied().collect();
    if sizes.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "critical analysis needs at least 2 system sizes, got {sizes:?}"
        )));
    }
    // only sizes with a density curve take part in the crossing
    let density_curves: BTreeMap<usize, &Vec<&SweepRow>> = groups
        .iter()
        .filter(|(_, r)| r.len() >= 3)
        .map(|(&n, r)| (n, r))
        .collect();
    let observable = |r: &SweepRow| match opts.observable {
        CrossingObservable::S2OverS1 => Some(r.s2_over_s1),
        CrossingObservable::Binder => Some(r.binder),
    };
    let curves: Curves = density_curves
        .iter()
        .map(|(&n, rows)| (n, curve_of(rows, observable)))
        .collect();
    let crossing = find_crossing(&curves)?;
    let rho_c = crossing.rho_c;
    let mut skipped = BTreeMap::new();

    let k_points: Vec<(f64, f64)> = all_rows.iter().map(|r| (r.rho, r.mean_degree)).collect();
    let mean_degree = match fit_mean_degree_coefficient(&k_points) {
        Ok(a) => {
            let rel: Vec<f64> = k_points
                .iter()
                .filter(|(_, k)| *k > 0.0)
                .map(|(r, k)| ((k - a * r) / k).powi(2))
                .collect();
            Some(MeanDegreeFit {
                a,
                n_points: k_points.len(),
                rms_relative_residual: (rel.iter().sum::<f64>() / rel.len().max(1) as f64).sqrt(),
            })
        }
        Err(e) => {
            skipped.insert("mean_degree".into(), e.to_string());
            None
        }
    };

    let at_rho_c = |f: &dyn Fn(&SweepRow) -> Option<f64>| -> BTreeMap<usize, f64> {
        density_curves
            .iter()
            .filter_map(|(&n, rows)| interpolate(&curve_of(rows, f), rho_c).map(|v| (n, v)))
            .collect()
    };
    let m_at_rho_c = at_rho_c(&|r| Some(r.m));
    let beta_over_nu = estimate_beta_over_nu(&m_at_rho_c)
        .map_err(|e| skipped.insert("beta_over_nu".into(), e.to_string()))
        .ok();
    let gamma_prime_over_nu = fit_at_rho_c(&at_rho_c(&|r| r.chi), 1.0)
        .map_err(|e| skipped.insert("gamma_prime_over_nu".into(), e.to_string()))
        .ok();
    let one_over_sigma_nu = fit_at_rho_c(&at_rho_c(&|r| r.s_star), 1.0)
        .map_err(|e| skipped.insert("one_over_sigma_nu".into(), e.to_string()))
        .ok();

    let largest = *density_curves.keys().last().expect("crossing needs curves");
    let m_curve = curve_of(density_curves[&largest], |r| Some(r.m));
    let beta = estimate_order_exponent(&m_curve, rho_c, opts.beta_window)
        .map_err(|e| skipped.insert("beta".into(), e.to_string()))
        .ok();

    let tau = match critical_tau(&loaded, rho_c, opts) {
        Ok(t) => Some(t),
        Err(e) => {
            skipped.insert("tau".into(), e.to_string());
            None
        }
    };

    let min_rho = opts.path_min_rho_ratio * rho_c;
    let path_points: Vec<(usize, f64, f64)> = all_rows
        .iter()
        .filter(|r| r.rho >= min_rho)
        .filter_map(|r| {
            r.avg_path
                .filter(|&l| l > 0.0)
                .map(|l| (r.n_nodes, r.rho, l))
        })
        .collect();
    let path_sizes: std::collections::BTreeSet<usize> = path_points.iter().map(|p| p.0).collect();
    let path_scaling = if path_sizes.len() < 2 {
        skipped.insert(
            "path_scaling".into(),
            format!("needs ⟨l⟩ at ρ ≥ {min_rho:e} for at least 2 sizes"),
        );
        None
    } else {
        match (
            fit_path_scaling(&path_points),
            test_log_growth(&path_points),
        ) {
            (Ok(scaling), Ok(log_growth)) => Some(PathReport {
                min_rho,
                n_points: path_points.len(),
                scaling,
                log_growth,
            }),
            (Err(e), _) | (_, Err(e)) => {
                skipped.insert("path_scaling".into(), e.to_string());
                None
            }
        }
    };

    Ok(CriticalReport {
        inputs: inputs.to_vec(),
        sizes,
        options: opts.clone(),
        rho_c,
        crossing,
        k_c: mean_degree.as_ref().map(|f| f.a * rho_c),
        mean_degree,
        m_at_rho_c,
        beta_over_nu,
        beta,
        gamma_prime_over_nu,
        one_over_sigma_nu,
        tau,
        path_scaling,
        skipped,
    })
}

/// τ from the companion `ns.csv` of the largest size, at the grid point nearest ρ_c.
fn critical_tau(loaded: &[SweepInput], rho_c: f64, opts: &CriticalOptions) -> Result<TauReport> {
    let mut table = super::io::NsTable::new();
    for input in loaded {
        let ns_path = input.path.with_file_name("ns.csv");
        if ns_path.exists() {
            table.extend(super::io::read_ns(&ns_path)?);
        }
    }
    let largest = table
        .keys()
        .map(|k| k.0)
        .max()
        .ok_or_else(|| Error::MissingInputs(vec!["ns.csv next to the sweep tables".into()]))?;
    let (&(n, rho_bits), n_s) = table
        .iter()
        .filter(|(k, _)| k.0 == largest)
        .min_by(|a, b| {
            let da = (f64::from_bits(a.0 .1) / rho_c).ln().abs();
            let db = (f64::from_bits(b.0 .1) / rho_c).ln().abs();
            da.total_cmp(&db)
        })
        .expect("largest size has rows");
    let binning = match opts.tau_bins_per_decade {
        0 => Binning::Raw,
        b => Binning::Logarithmic { bins_per_decade: b },
    };
    Ok(TauReport {
        n_nodes: n,
        rho: f64::from_bits(rho_bits),
        binning,
        estimate: estimate_tau(n_s, opts.tau_min_size, opts.tau_max_size, binning)?,
    })
}

pub fn critical(
    inputs: &[PathBuf],
    opts: &CriticalOptions,
    out_dir: &Path,
) -> Result<Vec<OutputFile>> {
    let report = analyze_critical(inputs, opts)?;
    prepare_dir(out_dir)?;
    let mut files = vec![write_json(&out_dir.join("critical.json"), &report)?];
    let mut manifest = RunManifest::new(
        "critical",
        json!({ "inputs": inputs, "options": opts }),
        serde_json::Value::Null,
    );
    manifest.files = files.clone();
    files.push(OutputFile {
        path: manifest.write(out_dir)?,
        rows: None,
    });
    Ok(files)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseOptions {
    pub form: ScalingForm,
    pub rho_c: f64,
    pub bounds: CollapseBounds,
    pub initial: ScalingExponents,
    /// Only points with |Δρ| ≤ this enter the collapse.
    pub max_abs_delta: Option<f64>,
    /// Weight deviations by the recorded standard errors when available.
    pub use_stderr: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseReport {
    pub inputs: Vec<PathBuf>,
    pub options: CollapseOptions,
    pub sizes: Vec<usize>,
    pub n_points: usize,
    pub result: CollapseResult,
}

/// Value and standard error a scaling form reads from a sweep row.
pub fn form_value(form: ScalingForm, r: &SweepRow) -> Option<(f64, Option<f64>)> {
    match form {
        ScalingForm::OrderParameter => Some((r.m, Some(r.m_stderr))),
        ScalingForm::Susceptibility => r.chi.map(|c| (c, r.chi_stderr)),
        ScalingForm::ClusterSize => r.s_star.map(|s| (s, r.s_star_stderr)),
        ScalingForm::S2Ratio => Some((r.s2_over_s1, r.s2_over_s1_stderr)),
    }
}

pub fn collapse_curves(rows: &[&SweepRow], opts: &CollapseOptions) -> CollapseCurves {
    let mut curves: CollapseCurves = BTreeMap::new();
    for (&n, group) in &by_size(rows.iter().copied()) {
        let pts: Vec<CurvePoint> = group
            .iter()
            .filter(|r| {
                opts.max_abs_delta
                    .map_or(true, |w| ((r.rho - opts.rho_c) / opts.rho_c).abs() <= w)
            })
            .filter_map(|r| {
                form_value(opts.form, r).map(|(value, stderr)| CurvePoint {
                    rho: r.rho,
                    value,
                    stderr: if opts.use_stderr { stderr } else { None },
                })
            })
            .collect();
        if pts.len() >= 2 {
            curves.insert(n, pts);
        }
    }
    curves
}

pub fn collapse(
    inputs: &[PathBuf],
    opts: &CollapseOptions,
    out_dir: &Path,
) -> Result<Vec<OutputFile>> {
    let loaded = load_inputs(inputs)?;
    let rows: Vec<&SweepRow> = loaded.iter().flat_map(|i| &i.rows).collect();
    let curves = collapse_curves(&rows, opts);
    let result = optimize_collapse(&curves, opts.rho_c, opts.form, opts.initial, opts.bounds)?;
    prepare_dir(out_dir)?;

    let best = ScalingExponents {
        nu: result.nu,
        amplitude: result.amplitude.unwrap_or(0.0),
    };
    let mut rescaled = CsvOut::create(
        &out_dir.join("rescaled.csv"),
        &["n_nodes", "rho", "x", "y", "sigma"],
    )?;
    for pts in rescale(&curves, opts.rho_c, best, opts.form).values() {
        for p in pts {
            rescaled.row([
                p.n_nodes.to_string(),
                fmt_f64(p.rho),
                fmt_f64(p.x),
                fmt_f64(p.y),
                fmt_opt(p.sigma),
            ])?;
        }
    }
    let mut landscape = CsvOut::create(
        &out_dir.join("collapse_landscape.csv"),
        &["nu", "amplitude", "quality"],
    )?;
    for l in &result.landscape {
        landscape.row([fmt_f64(l.nu), fmt_opt(l.amplitude), fmt_opt(l.quality)])?;
    }
    let report = CollapseReport {
        inputs: inputs.to_vec(),
        options: opts.clone(),
        sizes: curves.keys().copied().collect(),
        n_points: curves.values().map(Vec::len).sum(),
        result,
    };
    let mut files = vec![
        write_json(&out_dir.join("collapse.json"), &report)?,
        rescaled.finish()?,
        landscape.finish()?,
    ];
    let mut manifest = RunManifest::new(
        "collapse",
        json!({ "inputs": inputs, "options": opts }),
        serde_json::Value::Null,
    );
    manifest.files = files.clone();
    files.push(OutputFile {
        path: manifest.write(out_dir)?,
        rows: None,
    });
    Ok(files)
}

/// Connected-component membership of the giant cluster, for figure exports.
pub(crate) fn giant_mask(graph: &NetworkGraph) -> Vec<bool> {
    let d = connected_components(graph);
    d.labels.iter().map(|&l| l == 0).collect()
}
