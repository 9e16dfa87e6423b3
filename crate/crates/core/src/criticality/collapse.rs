//! Finite-size-scaling data collapse.
//!
//! Each curve of size N is mapped to x = Δρ·N^(1/ν), y = value·N^p with
//! Δρ = (ρ − ρ_c)/ρ_c and p fixed by the scaling form. The collapse quality
//! is the mean squared deviation of every point from the piecewise-linear
//! master curve through the pooled points of all other sizes, evaluated only
//! where that master curve is defined. When every point carries a positive
//! standard error, each squared deviation is divided by the combined
//! variance of the point and the interpolated master curve. Otherwise the
//! deviation is taken relative to the mean magnitude of the two values, so
//! that a global shrinking of y cannot fake a good collapse.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingForm {
    /// m·N^(β/ν)
    OrderParameter,
    /// χ·N^(−γ′/ν)
    Susceptibility,
    /// s*·N^(−1/σν)
    ClusterSize,
    /// S2/S1, no amplitude rescaling
    S2Ratio,
}

impl ScalingForm {
    /// Name of the amplitude exponent, `None` for forms without one.
    pub fn amplitude_name(self) -> Option<&'static str> {
        match self {
            ScalingForm::OrderParameter => Some("beta_over_nu"),
            ScalingForm::Susceptibility => Some("gamma_prime_over_nu"),
            ScalingForm::ClusterSize => Some("one_over_sigma_nu"),
            ScalingForm::S2Ratio => None,
        }
    }

    fn y_power(self, amplitude: f64) -> f64 {
        match self {
            ScalingForm::OrderParameter => amplitude,
            ScalingForm::Susceptibility | ScalingForm::ClusterSize => -amplitude,
            ScalingForm::S2Ratio => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub rho: f64,
    pub value: f64,
    pub stderr: Option<f64>,
}

/// Curves keyed by system size.
pub type CollapseCurves = BTreeMap<usize, Vec<CurvePoint>>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingExponents {
    pub nu: f64,
    /// Amplitude exponent of the form; ignored for [`ScalingForm::S2Ratio`].
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaledPoint {
    pub n_nodes: usize,
    pub rho: f64,
    pub x: f64,
    pub y: f64,
    pub sigma: Option<f64>,
}

pub fn rescale(
    curves: &CollapseCurves,
    rho_c: f64,
    exponents: ScalingExponents,
    form: ScalingForm,
) -> BTreeMap<usize, Vec<RescaledPoint>> {
    let p = form.y_power(exponents.amplitude);
    curves
        .iter()
        .map(|(&n, pts)| {
            let nf = n as f64;
            let sx = nf.powf(1.0 / exponents.nu);
            let sy = nf.powf(p);
            let mut out: Vec<RescaledPoint> = pts
                .iter()
                .map(|c| RescaledPoint {
                    n_nodes: n,
                    rho: c.rho,
                    x: (c.rho - rho_c) / rho_c * sx,
                    y: c.value * sy,
                    sigma: c.stderr.map(|s| s * sy),
                })
                .collect();
            out.sort_by(|a, b| a.x.total_cmp(&b.x));
            (n, out)
        })
        .collect()
}

/// Master curve through pooled points: (x, y, variance), ties merged.
fn master_curve(points: impl Iterator<Item = RescaledPoint>) -> Vec<(f64, f64, f64)> {
    let mut pts: Vec<RescaledPoint> = points.collect();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x));
    let mut out: Vec<(f64, f64, f64)> = Vec::with_capacity(pts.len());
    let mut k = 0;
    while k < pts.len() {
        let mut j = k;
        while j < pts.len() && pts[j].x == pts[k].x {
            j += 1;
        }
        let m = (j - k) as f64;
        let y = pts[k..j].iter().map(|p| p.y).sum::<f64>() / m;
        let var = pts[k..j]
            .iter()
            .map(|p| p.sigma.unwrap_or(0.0).powi(2))
            .sum::<f64>()
            / (m * m);
        out.push((pts[k].x, y, var));
        k = j;
    }
    out
}

fn interpolate_master(master: &[(f64, f64, f64)], x: f64) -> Option<(f64, f64)> {
    let (first, last) = (master.first()?, master.last()?);
    if x < first.0 || x > last.0 {
        return None;
    }
    let k = master.partition_point(|p| p.0 <= x);
    if k == 0 || k == master.len() {
        let p = if k == 0 { first } else { last };
        return Some((p.1, p.2));
    }
    let (x0, y0, v0) = master[k - 1];
    let (x1, y1, v1) = master[k];
    let t = (x - x0) / (x1 - x0);
    Some((y0 + t * (y1 - y0), (1.0 - t) * v0 + t * v1))
}

pub fn collapse_quality(
    curves: &CollapseCurves,
    rho_c: f64,
    exponents: ScalingExponents,
    form: ScalingForm,
) -> Result<f64> {
    if curves.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "a collapse needs at least 2 sizes, got {}",
            curves.len()
        )));
    }
    if !(exponents.nu > 0.0 && exponents.nu.is_finite()) {
        return Err(invalid(
            "nu",
            format!("must be positive, got {}", exponents.nu),
        ));
    }
    if !(rho_c > 0.0) {
        return Err(invalid("rho_c", format!("must be positive, got {rho_c}")));
    }
    let weighted = curves
        .values()
        .flatten()
        .all(|p| p.stderr.is_some_and(|s| s > 0.0));
    let scaled = rescale(curves, rho_c, exponents, form);
    let mut total = 0.0;
    let mut count = 0usize;
    for (&n, pts) in &scaled {
        let master = master_curve(
            scaled
                .iter()
                .filter(|(&other, _)| other != n)
                .flat_map(|(_, p)| p.iter().copied()),
        );
        for p in pts {
            let Some((y_m, var_m)) = interpolate_master(&master, p.x) else {
                continue;
            };
            let dev2 = (p.y - y_m).powi(2);
            total += if weighted {
                dev2 / (p.sigma.unwrap_or(0.0).powi(2) + var_m)
            } else {
                let scale = 0.5 * (p.y.abs() + y_m.abs());
                if scale > 0.0 {
                    dev2 / (scale * scale)
                } else {
                    0.0
                }
            };
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::NonOverlappingSupport);
    }
    Ok(total / count as f64)
}

/// Box constraints for the exponent search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapseBounds {
    pub nu: (f64, f64),
    /// Ignored for forms without an amplitude exponent.
    pub amplitude: (f64, f64),
    /// Grid points per free dimension in the coarse search.
    pub grid_steps: usize,
}

impl Default for CollapseBounds {
    fn default() -> Self {
        Self {
            nu: (0.5, 10.0),
            amplitude: (0.0, 2.0),
            grid_steps: 41,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandscapePoint {
    pub nu: f64,
    pub amplitude: Option<f64>,
    /// `None` where the rescaled supports did not overlap.
    pub quality: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseResult {
    pub scaling_form: ScalingForm,
    /// Named exponents, e.g. {"nu", "gamma_prime_over_nu"}.
    pub exponents: BTreeMap<String, f64>,
    pub nu: f64,
    pub amplitude: Option<f64>,
    pub quality: f64,
    pub grid_quality: f64,
    pub converged: bool,
    pub iterations: usize,
    pub landscape: Vec<LandscapePoint>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Minimizes [`collapse_quality`] over the exponents inside `bounds`.
///
/// A coarse grid search seeds a bounded Nelder–Mead refinement. The
/// procedure is deterministic for fixed inputs.
pub fn optimize_collapse(
    curves: &CollapseCurves,
    rho_c: f64,
    form: ScalingForm,
    initial: ScalingExponents,
    bounds: CollapseBounds,
) -> Result<CollapseResult> {
    if curves.len() < 2 {
        return Err(Error::InsufficientData(
            "collapse is undefined for a single size".into(),
        ));
    }
    let has_amp = form.amplitude_name().is_some();
    let in_range = |v: f64, (lo, hi): (f64, f64)| lo <= v && v <= hi;
    if !(bounds.nu.0 > 0.0 && bounds.nu.0 < bounds.nu.1)
        || (has_amp && !(bounds.amplitude.0 < bounds.amplitude.1))
    {
        return Err(invalid("bounds", "each range must be non-empty with ν > 0"));
    }
    if !in_range(initial.nu, bounds.nu)
        || (has_amp && !in_range(initial.amplitude, bounds.amplitude))
    {
        return Err(invalid(
            "initial",
            "initial exponents lie outside the bounds",
        ));
    }

    let lower = [bounds.nu.0, bounds.amplitude.0];
    let upper = [bounds.nu.1, bounds.amplitude.1];
    let dims = if has_amp { 2 } else { 1 };
    let objective = |v: &[f64]| -> f64 {
        let e = ScalingExponents {
            nu: v[0],
            amplitude: if has_amp { v[1] } else { 0.0 },
        };
        collapse_quality(curves, rho_c, e, form).unwrap_or(f64::INFINITY)
    };

    let nus = linspace(bounds.nu.0, bounds.nu.1, bounds.grid_steps);
    let amps = if has_amp {
        linspace(bounds.amplitude.0, bounds.amplitude.1, bounds.grid_steps)
    } else {
        vec![0.0]
    };
    let mut candidates: Vec<[f64; 2]> =
        vec![[initial.nu, if has_amp { initial.amplitude } else { 0.0 }]];
    for &nu in &nus {
        for &a in &amps {
            candidates.push([nu, a]);
        }
    }
    let qualities: Vec<f64> = candidates
        .par_iter()
        .map(|c| objective(&c[..dims]))
        .collect();

    let landscape = candidates[1..]
        .iter()
        .zip(&qualities[1..])
        .map(|(c, &q)| LandscapePoint {
            nu: c[0],
            amplitude: has_amp.then_some(c[1]),
            quality: q.is_finite().then_some(q),
        })
        .collect();

    let (best_idx, &grid_quality) = qualities
        .iter()
        .enumerate()
        .reduce(|a, b| if b.1 < a.1 { b } else { a })
        .unwrap();
    if !grid_quality.is_finite() {
        return Err(Error::NonOverlappingSupport);
    }
    let start = candidates[best_idx];
    let steps = [
        (bounds.nu.1 - bounds.nu.0) / (bounds.grid_steps.max(2) - 1) as f64,
        (bounds.amplitude.1 - bounds.amplitude.0) / (bounds.grid_steps.max(2) - 1) as f64,
    ];
    let nm = nelder_mead(
        &objective,
        &start[..dims],
        &steps[..dims],
        &lower[..dims],
        &upper[..dims],
        2000,
    );

    let (best, quality) = if nm.value <= grid_quality {
        (nm.point, nm.value)
    } else {
        (start[..dims].to_vec(), grid_quality)
    };
    if !nm.converged && !(nm.value < grid_quality) {
        return Err(Error::NonConvergence { quality });
    }
    let nu = best[0];
    let amplitude = has_amp.then(|| best[1]);
    let mut exponents = BTreeMap::from([("nu".to_string(), nu)]);
    if let (Some(name), Some(a)) = (form.amplitude_name(), amplitude) {
        exponents.insert(name.to_string(), a);
    }
    Ok(CollapseResult {
        scaling_form: form,
        exponents,
        nu,
        amplitude,
        quality,
        grid_quality,
        converged: nm.converged,
        iterations: nm.iterations,
        landscape,
    })
}

struct NelderMead {
    point: Vec<f64>,
    value: f64,
    converged: bool,
    iterations: usize,
}

/// Nelder–Mead with standard coefficients; trial points are clamped to the box.
fn nelder_mead(
    f: &dyn Fn(&[f64]) -> f64,
    start: &[f64],
    steps: &[f64],
    lower: &[f64],
    upper: &[f64],
    max_iter: usize,
) -> NelderMead {
    let d = start.len();
    let clamp = |v: Vec<f64>| -> Vec<f64> {
        v.into_iter()
            .enumerate()
            .map(|(i, x)| x.clamp(lower[i], upper[i]))
            .collect()
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    simplex.push((start.to_vec(), f(start)));
    for i in 0..d {
        let mut p = start.to_vec();
        // step inward when the start sits on the upper bound
        p[i] = if p[i] + steps[i] <= upper[i] {
            p[i] + steps[i]
        } else {
            p[i] - steps[i]
        };
        let p = clamp(p);
        let v = f(&p);
        simplex.push((p, v));
    }

    let centroid = |s: &[(Vec<f64>, f64)]| -> Vec<f64> {
        let mut c = vec![0.0; d];
        for (p, _) in &s[..d] {
            for i in 0..d {
                c[i] += p[i] / d as f64;
            }
        }
        c
    };
    let along = |c: &[f64], p: &[f64], t: f64| -> Vec<f64> {
        clamp((0..d).map(|i| c[i] + t * (p[i] - c[i])).collect())
    };

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[d].1);
        let origin = &simplex[0].0;
        let size = simplex[1..]
            .iter()
            .flat_map(|(p, _)| {
                (0..d).map(move |i| ((p[i] - origin[i]) / steps[i].max(f64::MIN_POSITIVE)).abs())
            })
            .fold(0.0, f64::max);
        if (worst - best).abs() <= 1e-12 * (best.abs() + 1e-300) || size < 1e-9 {
            converged = true;
            break;
        }
        iterations += 1;
        let c = centroid(&simplex);
        let worst_p = simplex[d].0.clone();
        let reflected = along(&c, &worst_p, -1.0);
        let fr = f(&reflected);
        if fr < simplex[0].1 {
            let expanded = along(&c, &worst_p, -2.0);
            let fe = f(&expanded);
            simplex[d] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
            continue;
        }
        if fr < simplex[d - 1].1 {
            simplex[d] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < simplex[d].1 {
            let p = along(&c, &worst_p, -0.5);
            let v = f(&p);
            (p, v)
        } else {
            let p = along(&c, &worst_p, 0.5);
            let v = f(&p);
            (p, v)
        };
        if fc < simplex[d].1.min(fr) {
            simplex[d] = (contracted, fc);
            continue;
        }
        let best_p = simplex[0].0.clone();
        for (p, v) in simplex.iter_mut().skip(1) {
            let shrunk: Vec<f64> = (0..d)
                .map(|i| best_p[i] + 0.5 * (p[i] - best_p[i]))
                .collect();
            *v = f(&shrunk);
            *p = shrunk;
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (point, value) = simplex.swap_remove(0);
    NelderMead {
        point,
        value,
        converged,
        iterations,
    }
}
