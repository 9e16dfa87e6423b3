use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares straight line through (ln x, ln y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    /// Slope in log-log space.
    pub exponent: f64,
    /// Intercept in log-log space, i.e. ln of the prefactor.
    pub prefactor_log: f64,
    /// Mean squared residual in log space.
    pub residual: f64,
    pub n_points: usize,
    /// Standard error of the slope; 0 with two points.
    pub exponent_stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub mean_sq_residual: f64,
    pub slope_stderr: f64,
}

/// Weighted least squares y = a + b·x; `weights` of `None` means uniform.
pub(crate) fn fit_line(xs: &[f64], ys: &[f64], weights: Option<&[f64]>) -> Result<LineFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return Err(Error::InsufficientData(format!(
            "a line fit needs at least 2 points, got {n}"
        )));
    }
    let w = |i: usize| weights.map_or(1.0, |w| w[i]);
    let sw: f64 = (0..n).map(w).sum();
    let xm = (0..n).map(|i| w(i) * xs[i]).sum::<f64>() / sw;
    let ym = (0..n).map(|i| w(i) * ys[i]).sum::<f64>() / sw;
    let sxx: f64 = (0..n).map(|i| w(i) * (xs[i] - xm).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InsufficientData("all abscissae coincide".into()));
    }
    let sxy: f64 = (0..n).map(|i| w(i) * (xs[i] - xm) * (ys[i] - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ssr: f64 = (0..n)
        .map(|i| (ys[i] - intercept - slope * xs[i]).powi(2))
        .sum();
    let wssr: f64 = (0..n)
        .map(|i| w(i) * (ys[i] - intercept - slope * xs[i]).powi(2))
        .sum();
    let slope_stderr = if n > 2 {
        (wssr / (n - 2) as f64 / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LineFit {
        slope,
        intercept,
        mean_sq_residual: ssr / n as f64,
        slope_stderr,
    })
}

fn logs(values: &[f64], what: &str) -> Result<Vec<f64>> {
    values
        .iter()
        .map(|&v| {
            if v > 0.0 && v.is_finite() {
                Ok(v.ln())
            } else {
                Err(Error::InvalidParameter {
                    name: "power-law data",
                    reason: format!("{what} value {v} is not strictly positive"),
                })
            }
        })
        .collect()
}

/// Fits y = e^c · x^k by least squares in log-log space.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<PowerLawFit> {
    fit_power_law_weighted(xs, ys, None)
}

/// As [`fit_power_law`], with optional per-point weights in log space.
pub fn fit_power_law_weighted(
    xs: &[f64],
    ys: &[f64],
    weights: Option<&[f64]>,
) -> Result<PowerLawFit> {
    if xs.len() != ys.len() {
        return Err(Error::InsufficientData("x and y lengths differ".into()));
    }
    let lx = logs(xs, "x")?;
    let ly = logs(ys, "y")?;
    let line = fit_line(&lx, &ly, weights)?;
    Ok(PowerLawFit {
        exponent: line.slope,
        prefactor_log: line.intercept,
        residual: line.mean_sq_residual,
        n_points: xs.len(),
        exponent_stderr: line.slope_stderr,
    })
}

/// Slope A of ⟨k⟩ = A·ρ through the origin: Σρk / Σρ².
pub fn fit_mean_degree_coefficient(points: &[(f64, f64)]) -> Result<f64> {
    let num: f64 = points.iter().map(|(r, k)| r * k).sum();
    let den: f64 = points.iter().map(|(r, _)| r * r).sum();
    if points.is_empty() || !(den > 0.0) {
        return Err(Error::InsufficientData(
            "need at least one point with ρ > 0".into(),
        ));
    }
    Ok(num / den)
}

/// Result of fitting ln(⟨l⟩·ρ) = α·ln N + c.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathScalingFit {
    pub alpha: f64,
    /// e^c, so that ⟨l⟩ ≈ prefactor · N^α / ρ.
    pub prefactor: f64,
    pub fit: PowerLawFit,
}

/// Points are `(N, ρ, ⟨l⟩)`.
pub fn fit_path_scaling(points: &[(usize, f64, f64)]) -> Result<PathScalingFit> {
    for &(n, rho, l) in points {
        if !(l > 0.0 && rho > 0.0 && n > 0) {
            return Err(Error::InvalidParameter {
                name: "path scaling data",
                reason: format!("need N, ρ, ⟨l⟩ > 0, got ({n}, {rho}, {l})"),
            });
        }
    }
    let ns: Vec<f64> = points.iter().map(|p| p.0 as f64).collect();
    let lr: Vec<f64> = points.iter().map(|p| p.2 * p.1).collect();
    let fit = fit_power_law(&ns, &lr)?;
    Ok(PathScalingFit {
        alpha: fit.exponent,
        prefactor: fit.prefactor_log.exp(),
        fit,
    })
}

/// Power-law versus logarithmic growth of ⟨l⟩ with N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogGrowthTest {
    pub alpha: f64,
    pub alpha_stderr: f64,
    /// Slope a pure ⟨l⟩ ∝ ln N law would show on the same sizes.
    pub alpha_under_log_law: f64,
    /// (α − α_log) / stderr.
    pub z_score: f64,
    pub rejects_log_law: bool,
}

/// Rejects ⟨l⟩ ∝ ln N when the fitted log-log slope exceeds the slope a
/// logarithmic law would produce on the same sizes by more than three
/// standard errors.
pub fn test_log_growth(points: &[(usize, f64, f64)]) -> Result<LogGrowthTest> {
    let fit = fit_path_scaling(points)?;
    let ns: Vec<f64> = points.iter().map(|p| p.0 as f64).collect();
    if ns.iter().any(|&n| n <= 1.0) {
        return Err(Error::InsufficientData(
            "sizes must exceed 1 for ln ln N".into(),
        ));
    }
    let ln_ns: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let log_law = fit_power_law(&ns, &ln_ns)?;
    let gap = fit.alpha - log_law.exponent;
    let se = fit.fit.exponent_stderr;
    let z_score = if se > 0.0 {
        gap / se
    } else if gap > 0.0 {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    };
    Ok(LogGrowthTest {
        alpha: fit.alpha,
        alpha_stderr: se,
        alpha_under_log_law: log_law.exponent,
        z_score,
        rejects_log_law: z_score > 3.0,
    })
}
