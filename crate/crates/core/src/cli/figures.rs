//! Tidy per-panel CSVs assembled from earlier `generate`, `sweep` and
//! `collapse` outputs. Values are passed through, never re-simulated.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::json;

use super::commands::giant_mask;
use super::io::{
    fmt_f64, fmt_opt, read_degree, read_ns, read_sweep, CsvOut, OutputFile, RunManifest, SweepRow,
};
use crate::criticality::fit_mean_degree_coefficient;
use crate::error::{Error, Result};
use crate::graph::{Layer, NetworkGraph};
use crate::metrics::poisson_pmf;

/// Reference density of the fixed-ρ degree panel.
const FIG2A_RHO: f64 = 8e-5;

fn find_files(dir: &Path, name: &str, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            find_files(&p, name, out)?;
        } else if p.file_name().is_some_and(|f| f == name) {
            out.push(p);
        }
    }
    Ok(())
}

/// Density key tolerant to last-digit differences between sweeps.
fn rho_key(rho: f64) -> String {
    format!("{rho:.9e}")
}

#[derive(Debug, Deserialize)]
struct NodeRow {
    node_id: usize,
    x_km: f64,
    y_km: f64,
}

#[derive(Debug, Deserialize)]
struct EdgeRow {
    node_i: u32,
    node_j: u32,
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut reader = csv::Reader::from_path(path)?;
    reader
        .deserialize()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| Error::Schema {
                path: path.to_path_buf(),
                reason: format!("row {}: {e}", i + 1),
            })
        })
        .collect()
}

fn network_map(dir: &Path, out_dir: &Path, files: &mut Vec<OutputFile>) -> Result<()> {
    let nodes: Vec<NodeRow> = read_rows(&dir.join("nodes.csv"))?;
    let fiber: Vec<EdgeRow> = read_rows(&dir.join("fiber_edges.csv"))?;
    let photonic: Vec<EdgeRow> = read_rows(&dir.join("photonic_edges.csv"))?;
    let graph = NetworkGraph::from_edges(
        nodes.len(),
        Layer::Photonic,
        photonic.iter().map(|e| (e.node_i, e.node_j)),
    )?;
    let giant = giant_mask(&graph);

    let mut w = CsvOut::create(
        &out_dir.join("fig1_nodes.csv"),
        &["node_id", "x_km", "y_km", "degree", "in_giant"],
    )?;
    for n in &nodes {
        w.row([
            n.node_id.to_string(),
            fmt_f64(n.x_km),
            fmt_f64(n.y_km),
            graph.degree(n.node_id).to_string(),
            u8::from(giant[n.node_id]).to_string(),
        ])?;
    }
    files.push(w.finish()?);

    let mut w = CsvOut::create(
        &out_dir.join("fig1_edges.csv"),
        &[
            "layer", "node_i", "node_j", "x_i_km", "y_i_km", "x_j_km", "y_j_km",
        ],
    )?;
    for (layer, edges) in [("fiber", &fiber), ("photonic", &photonic)] {
        for e in edges.iter() {
            let (a, b) = (&nodes[e.node_i as usize], &nodes[e.node_j as usize]);
            w.row([
                layer.to_string(),
                e.node_i.to_string(),
                e.node_j.to_string(),
                fmt_f64(a.x_km),
                fmt_f64(a.y_km),
                fmt_f64(b.x_km),
                fmt_f64(b.y_km),
            ])?;
        }
    }
    files.push(w.finish()?);
    Ok(())
}

type DegreeGroups = BTreeMap<(usize, u64), BTreeMap<usize, f64>>;

fn write_degree_panel(
    path: &Path,
    groups: &[(&(usize, u64), &BTreeMap<usize, f64>)],
) -> Result<OutputFile> {
    let mut w = CsvOut::create(
        path,
        &["n_nodes", "rho", "k", "empirical_P_k", "poisson_P_k"],
    )?;
    for ((n, rho_bits), dist) in groups {
        let mean: f64 = dist.iter().map(|(&k, &p)| k as f64 * p).sum();
        for (&k, &p) in dist.iter() {
            w.row([
                n.to_string(),
                fmt_f64(f64::from_bits(*rho_bits)),
                k.to_string(),
                fmt_f64(p),
                fmt_f64(poisson_pmf(k, mean)),
            ])?;
        }
    }
    w.finish()
}

/// fig2a: several N at the density with most sizes (ties: nearest 8e-5).
/// fig2b: several ρ at the size with most densities.
fn degree_panels(degree: &DegreeGroups, out_dir: &Path, files: &mut Vec<OutputFile>) -> Result<()> {
    let mut by_rho: BTreeMap<String, Vec<(&(usize, u64), &BTreeMap<usize, f64>)>> = BTreeMap::new();
    let mut by_n: BTreeMap<usize, Vec<(&(usize, u64), &BTreeMap<usize, f64>)>> = BTreeMap::new();
    for (key, dist) in degree {
        by_rho
            .entry(rho_key(f64::from_bits(key.1)))
            .or_default()
            .push((key, dist));
        by_n.entry(key.0).or_default().push((key, dist));
    }
    let distance = |g: &[(&(usize, u64), &BTreeMap<usize, f64>)]| {
        (f64::from_bits(g[0].0 .1) / FIG2A_RHO).ln().abs()
    };
    let fixed_rho = by_rho
        .values()
        .max_by(|a, b| {
            a.len()
                .cmp(&b.len())
                .then(distance(b).total_cmp(&distance(a)))
        })
        .expect("non-empty degree table");
    files.push(write_degree_panel(
        &out_dir.join("fig2a_degree_dist.csv"),
        fixed_rho,
    )?);
    let fixed_n = by_n
        .values()
        .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].0 .0.cmp(&a[0].0 .0)))
        .expect("non-empty degree table");
    files.push(write_degree_panel(
        &out_dir.join("fig2b_degree_dist.csv"),
        fixed_n,
    )?);
    Ok(())
}

fn table<F>(path: &Path, header: &[&str], rows: &[SweepRow], mut f: F) -> Result<OutputFile>
where
    F: FnMut(&SweepRow) -> Option<Vec<String>>,
{
    let mut w = CsvOut::create(path, header)?;
    for r in rows {
        if let Some(cells) = f(r) {
            w.row(cells)?;
        }
    }
    w.finish()
}

fn sweep_panels(rows: &[SweepRow], out_dir: &Path, files: &mut Vec<OutputFile>) -> Result<()> {
    let p = |name: &str| out_dir.join(name);
    let n = |r: &SweepRow| r.n_nodes.to_string();
    let pulses = |r: &SweepRow| r.n_pulses.map(|v| v.to_string()).unwrap_or_default();
    let loss = |r: &SweepRow| fmt_opt(r.loss_db_per_km);

    files.push(table(
        &p("fig2c_order_parameter.csv"),
        &[
            "n_nodes",
            "radius_km",
            "n_pulses",
            "loss_db_per_km",
            "rho",
            "m",
            "m_stderr",
        ],
        rows,
        |r| {
            Some(vec![
                n(r),
                fmt_f64(r.radius_km),
                pulses(r),
                loss(r),
                fmt_f64(r.rho),
                fmt_f64(r.m),
                fmt_f64(r.m_stderr),
            ])
        },
    )?);
    files.push(table(
        &p("fig2d_giant_vs_radius.csv"),
        &[
            "n_nodes",
            "n_pulses",
            "loss_db_per_km",
            "radius_km",
            "m",
            "m_stderr",
        ],
        rows,
        |r| {
            Some(vec![
                n(r),
                pulses(r),
                loss(r),
                fmt_f64(r.radius_km),
                fmt_f64(r.m),
                fmt_f64(r.m_stderr),
            ])
        },
    )?);
    files.push(table(
        &p("fig3a_path_length.csv"),
        &["rho", "n_nodes", "avg_path", "avg_path_stderr"],
        rows,
        |r| {
            r.avg_path
                .map(|l| vec![fmt_f64(r.rho), n(r), fmt_f64(l), fmt_opt(r.avg_path_stderr)])
        },
    )?);
    files.push(table(
        &p("fig3b_path_length.csv"),
        &["radius_km", "n_nodes", "avg_path", "avg_path_stderr"],
        rows,
        |r| {
            r.avg_path.map(|l| {
                vec![
                    fmt_f64(r.radius_km),
                    n(r),
                    fmt_f64(l),
                    fmt_opt(r.avg_path_stderr),
                ]
            })
        },
    )?);
    files.push(table(
        &p("fig3c_clustering.csv"),
        &[
            "radius_km",
            "n_nodes",
            "rho",
            "avg_clustering",
            "avg_clustering_stderr",
        ],
        rows,
        |r| {
            Some(vec![
                fmt_f64(r.radius_km),
                n(r),
                fmt_f64(r.rho),
                fmt_f64(r.avg_clustering),
                fmt_opt(r.avg_clustering_stderr),
            ])
        },
    )?);
    files.push(table(
        &p("fig3d_clustering.csv"),
        &[
            "radius_km",
            "rho",
            "n_nodes",
            "avg_clustering",
            "avg_clustering_stderr",
        ],
        rows,
        |r| {
            Some(vec![
                fmt_f64(r.radius_km),
                fmt_f64(r.rho),
                n(r),
                fmt_f64(r.avg_clustering),
                fmt_opt(r.avg_clustering_stderr),
            ])
        },
    )?);

    let k_points: Vec<(f64, f64)> = rows.iter().map(|r| (r.rho, r.mean_degree)).collect();
    let a = fit_mean_degree_coefficient(&k_points).ok();
    files.push(table(
        &p("appx_mean_degree.csv"),
        &[
            "n_nodes",
            "rho",
            "mean_degree",
            "mean_degree_stderr",
            "fit_a_rho",
        ],
        rows,
        |r| {
            Some(vec![
                n(r),
                fmt_f64(r.rho),
                fmt_f64(r.mean_degree),
                fmt_opt(r.mean_degree_stderr),
                fmt_opt(a.map(|a| a * r.rho)),
            ])
        },
    )?);
    files.push(table(
        &p("appx_path_scaling.csv"),
        &["rho", "n_nodes", "ln_n", "ln_l_rho"],
        rows,
        |r| {
            r.avg_path.filter(|&l| l > 0.0).map(|l| {
                vec![
                    fmt_f64(r.rho),
                    n(r),
                    fmt_f64((r.n_nodes as f64).ln()),
                    fmt_f64((l * r.rho).ln()),
                ]
            })
        },
    )?);
    files.push(table(
        &p("appx_s2_over_s1.csv"),
        &["n_nodes", "rho", "s2_over_s1", "s2_over_s1_stderr"],
        rows,
        |r| {
            Some(vec![
                n(r),
                fmt_f64(r.rho),
                fmt_f64(r.s2_over_s1),
                fmt_opt(r.s2_over_s1_stderr),
            ])
        },
    )?);
    files.push(table(
        &p("appx_binder.csv"),
        &["n_nodes", "rho", "binder"],
        rows,
        |r| Some(vec![n(r), fmt_f64(r.rho), fmt_f64(r.binder)]),
    )?);
    files.push(table(
        &p("appx_chi.csv"),
        &["n_nodes", "rho", "chi", "chi_stderr"],
        rows,
        |r| {
            r.chi
                .map(|c| vec![n(r), fmt_f64(r.rho), fmt_f64(c), fmt_opt(r.chi_stderr)])
        },
    )?);
    files.push(table(
        &p("appx_s_star.csv"),
        &["n_nodes", "rho", "s_star", "s_star_stderr"],
        rows,
        |r| {
            r.s_star
                .map(|s| vec![n(r), fmt_f64(r.rho), fmt_f64(s), fmt_opt(r.s_star_stderr)])
        },
    )?);
    let mut by_rho: Vec<&SweepRow> = rows.iter().collect();
    by_rho.sort_by(|a, b| a.rho.total_cmp(&b.rho).then(a.n_nodes.cmp(&b.n_nodes)));
    let mut w = CsvOut::create(&p("appx_m_vs_n.csv"), &["rho", "n_nodes", "m"])?;
    for r in by_rho {
        w.row([fmt_f64(r.rho), n(r), fmt_f64(r.m)])?;
    }
    files.push(w.finish()?);
    Ok(())
}

#[derive(Debug, Deserialize)]
struct CollapseHeader {
    options: CollapseFormOnly,
}

#[derive(Debug, Deserialize)]
struct CollapseFormOnly {
    form: crate::criticality::ScalingForm,
}

/// Builds every figure panel derivable from the outputs under `input_dir`.
///
/// Fails with [`Error::MissingInputs`] when nothing usable is found or when a
/// sweep table lacks its companion `ns.csv` / `degree.csv`; panels that could
/// be written are still written in that case.
pub fn figures(input_dir: &Path, out_dir: &Path) -> Result<Vec<OutputFile>> {
    if !input_dir.is_dir() {
        return Err(Error::MissingInputs(vec![format!(
            "{} (directory)",
            input_dir.display()
        )]));
    }
    let mut sweeps = Vec::new();
    let mut node_files = Vec::new();
    let mut rescaled = Vec::new();
    find_files(input_dir, "sweep.csv", &mut sweeps)?;
    find_files(input_dir, "nodes.csv", &mut node_files)?;
    find_files(input_dir, "rescaled.csv", &mut rescaled)?;
    if sweeps.is_empty() && node_files.is_empty() {
        return Err(Error::MissingInputs(vec![format!(
            "sweep.csv or nodes.csv under {}",
            input_dir.display()
        )]));
    }
    std::fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();
    let mut missing = Vec::new();

    if let Some(nodes) = node_files.first() {
        let dir = nodes.parent().unwrap_or(Path::new("."));
        for f in ["fiber_edges.csv", "photonic_edges.csv"] {
            if !dir.join(f).exists() {
                missing.push(dir.join(f).display().to_string());
            }
        }
        if missing.is_empty() {
            network_map(dir, out_dir, &mut files)?;
        }
    }

    let mut rows = Vec::new();
    let mut degree = DegreeGroups::new();
    let mut ns = BTreeMap::new();
    for s in &sweeps {
        rows.extend(read_sweep(s)?);
        for (name, found) in [("degree.csv", true), ("ns.csv", false)] {
            let companion = s.with_file_name(name);
            if !companion.exists() {
                missing.push(companion.display().to_string());
            } else if found {
                degree.extend(read_degree(&companion)?);
            } else {
                ns.extend(read_ns(&companion)?);
            }
        }
    }
    if !rows.is_empty() {
        sweep_panels(&rows, out_dir, &mut files)?;
    }
    if !degree.is_empty() {
        degree_panels(&degree, out_dir, &mut files)?;
    }
    if !ns.is_empty() {
        let mut w = CsvOut::create(
            &out_dir.join("appx_ns.csv"),
            &["n_nodes", "rho", "s", "n_s"],
        )?;
        for ((n, rho_bits), dist) in &ns {
            for (s, v) in dist {
                w.row([
                    n.to_string(),
                    fmt_f64(f64::from_bits(*rho_bits)),
                    s.to_string(),
                    fmt_f64(*v),
                ])?;
            }
        }
        files.push(w.finish()?);
    }
    for r in &rescaled {
        let header = r.with_file_name("collapse.json");
        let form = std::fs::read_to_string(&header)
            .ok()
            .and_then(|t| serde_json::from_str::<CollapseHeader>(&t).ok())
            .map(|h| h.options.form);
        let Some(form) = form else {
            missing.push(header.display().to_string());
            continue;
        };
        let name = format!(
            "appx_collapse_{}.csv",
            serde_json::to_value(form)?.as_str().unwrap_or("unknown")
        );
        let target = out_dir.join(name);
        std::fs::copy(r, &target)?;
        let rows = csv::Reader::from_path(&target)?.records().count();
        files.push(OutputFile {
            path: target,
            rows: Some(rows),
        });
    }

    let mut manifest = RunManifest::new(
        "figures",
        json!({ "input": input_dir, "out": out_dir }),
        serde_json::Value::Null,
    );
    manifest.files = files.clone();
    files.push(OutputFile {
        path: manifest.write(out_dir)?,
        rows: None,
    });
    if !missing.is_empty() {
        return Err(Error::MissingInputs(missing));
    }
    Ok(files)
}
