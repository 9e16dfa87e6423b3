use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::fit::{fit_power_law, PowerLawFit};
use crate::error::{Error, Result};

/// Inclusive range of the fit variable; `None` ends are open.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub min: Option<f64>,
    pub max: Option<f64>,
}

impl FitWindow {
    pub fn new(min: Option<f64>, max: Option<f64>) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.min.map_or(true, |lo| v >= lo) && self.max.map_or(true, |hi| v <= hi)
    }
}

/// A critical exponent read off a log-log fit, with the window that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentEstimate {
    pub value: f64,
    pub fit: PowerLawFit,
    pub window: FitWindow,
}

/// β/ν from m(ρ_c, N) ∝ N^(−β/ν).
pub fn estimate_beta_over_nu(m_at_rc: &BTreeMap<usize, f64>) -> Result<ExponentEstimate> {
    if m_at_rc.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "β/ν needs at least 3 sizes, got {}",
            m_at_rc.len()
        )));
    }
    let ns: Vec<f64> = m_at_rc.keys().map(|&n| n as f64).collect();
    let ms: Vec<f64> = m_at_rc.values().copied().collect();
    let fit = fit_power_law(&ns, &ms)?;
    Ok(ExponentEstimate {
        value: -fit.exponent,
        fit,
        window: FitWindow::new(ns.first().copied(), ns.last().copied()),
    })
}

/// β from m ∝ (ρ − ρ_c)^β above the critical density.
///
/// `window` restricts the relative distance Δρ = (ρ − ρ_c)/ρ_c.
pub fn estimate_order_exponent(
    m_curve: &[(f64, f64)],
    rho_c: f64,
    window: FitWindow,
) -> Result<ExponentEstimate> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = m_curve
        .iter()
        .filter(|&&(rho, m)| rho > rho_c && m > 0.0 && window.contains((rho - rho_c) / rho_c))
        .map(|&(rho, m)| (rho - rho_c, m))
        .unzip();
    if xs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "β needs at least 2 points above ρ_c in the window, got {}",
            xs.len()
        )));
    }
    let fit = fit_power_law(&xs, &ys)?;
    Ok(ExponentEstimate {
        value: fit.exponent,
        fit,
        window,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Binning {
    Raw,
    /// Geometric bins; n(s) is averaged over every integer size in a bin.
    Logarithmic {
        bins_per_decade: u32,
    },
}

/// A log-binned point: geometric bin center and mean density.
fn log_bins(points: &[(usize, f64)], bins_per_decade: u32) -> Vec<(f64, f64)> {
    let (Some(&(s_min, _)), Some(&(s_max, _))) = (points.first(), points.last()) else {
        return Vec::new();
    };
    let lookup: BTreeMap<usize, f64> = points.iter().copied().collect();
    let ratio = 10f64.powf(1.0 / f64::from(bins_per_decade.max(1)));
    let mut out = Vec::new();
    let mut edge = s_min as f64;
    loop {
        let next = edge * ratio;
        let lo = edge.ceil() as usize;
        // integers in [edge, next)
        let hi = ((next.ceil() as usize).saturating_sub(1)).min(s_max);
        if lo <= hi {
            let total: f64 = lookup.range(lo..=hi).map(|(_, &v)| v).sum();
            if total > 0.0 {
                let width = (hi - lo + 1) as f64;
                out.push((((lo * hi) as f64).sqrt(), total / width));
            }
        }
        if hi >= s_max {
            break;
        }
        edge = next;
    }
    out
}

/// τ from n(s) ∝ s^(−τ) at the critical density.
pub fn estimate_tau(
    n_s: &BTreeMap<usize, f64>,
    min_size: usize,
    max_size: Option<usize>,
    binning: Binning,
) -> Result<ExponentEstimate> {
    let window = FitWindow::new(Some(min_size as f64), max_size.map(|m| m as f64));
    let points: Vec<(usize, f64)> = n_s
        .iter()
        .filter(|&(&s, &v)| s >= min_size.max(1) && max_size.map_or(true, |m| s <= m) && v > 0.0)
        .map(|(&s, &v)| (s, v))
        .collect();
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "τ needs at least 3 occupied sizes in the window, got {}",
            points.len()
        )));
    }
    let xy: Vec<(f64, f64)> = match binning {
        Binning::Raw => points.iter().map(|&(s, v)| (s as f64, v)).collect(),
        Binning::Logarithmic { bins_per_decade } => log_bins(&points, bins_per_decade),
    };
    if xy.len() < 2 {
        return Err(Error::InsufficientData("fewer than 2 occupied bins".into()));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
    let fit = fit_power_law(&xs, &ys)?;
    Ok(ExponentEstimate {
        value: -fit.exponent,
        fit,
        window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_over_nu_recovery() {
        let sizes = [1000usize, 2000, 4000, 8000, 16000];
        let m: BTreeMap<usize, f64> = sizes
            .iter()
            .map(|&n| (n, (n as f64).powf(-0.071)))
            .collect();
        assert!((estimate_beta_over_nu(&m).unwrap().value - 0.071).abs() < 1e-12);
        let m: BTreeMap<usize, f64> = sizes
            .iter()
            .map(|&n| (n, 0.37 * (n as f64).powf(-0.25)))
            .collect();
        assert!((estimate_beta_over_nu(&m).unwrap().value - 0.25).abs() < 1e-12);
        let two: BTreeMap<usize, f64> = BTreeMap::from([(10, 0.5), (20, 0.4)]);
        assert!(estimate_beta_over_nu(&two).is_err());
    }

    #[test]
    fn order_exponent_recovery() {
        let rho_c = 6.82e-5;
        for beta in [0.2, 1.0] {
            let curve: Vec<(f64, f64)> = (0..40)
                .map(|i| {
                    let rho = rho_c * (0.5 + i as f64 * 0.05);
                    let m = if rho > rho_c {
                        (rho - rho_c).powf(beta)
                    } else {
                        0.0
                    };
                    (rho, m)
                })
                .collect();
            let e = estimate_order_exponent(&curve, rho_c, FitWindow::default()).unwrap();
            assert!((e.value - beta).abs() < 1e-10, "{beta}: {}", e.value);
        }
        let below = vec![(1.0, 0.1), (2.0, 0.2)];
        assert!(estimate_order_exponent(&below, 5.0, FitWindow::default()).is_err());
    }

    #[test]
    fn tau_recovery_raw() {
        let ns: BTreeMap<usize, f64> = (1..=2000).map(|s| (s, (s as f64).powf(-1.97))).collect();
        let e = estimate_tau(&ns, 1, None, Binning::Raw).unwrap();
        assert!((e.value - 1.97).abs() < 1e-12);
    }

    #[test]
    fn log_binning_bias_is_small() {
        let ns: BTreeMap<usize, f64> = (1..=10_000)
            .map(|s| (s as f64).powi(-2))
            .enumerate()
            .map(|(i, v)| (i + 1, v))
            .collect();
        let binned =
            estimate_tau(&ns, 1, None, Binning::Logarithmic { bins_per_decade: 5 }).unwrap();
        let raw = estimate_tau(&ns, 1, None, Binning::Raw).unwrap();
        assert!((binned.value - 2.0).abs() < 0.02, "{}", binned.value);
        assert!((binned.value - raw.value).abs() < 0.05);
    }

    #[test]
    fn tau_needs_support() {
        let ns = BTreeMap::from([(1, 0.1), (2, 0.02)]);
        assert!(estimate_tau(&ns, 1, None, Binning::Raw).is_err());
        let ns: BTreeMap<usize, f64> = (1..10).map(|s| (s, 1.0 / s as f64)).collect();
        assert!(estimate_tau(&ns, 8, None, Binning::Raw).is_err());
    }
}
