use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Curves keyed by system size, each a sequence of `(rho, value)`.
pub type Curves = BTreeMap<usize, Vec<(f64, f64)>>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairCrossing {
    pub n_small: usize,
    pub n_large: usize,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingEstimate {
    /// Median of the pairwise crossings.
    pub rho_c: f64,
    pub pairwise_crossings: Vec<PairCrossing>,
    /// Max minus min of the pairwise crossings.
    pub spread: f64,
}

/// Piecewise-linear interpolation on a curve sorted by abscissa.
/// Returns `None` outside the sampled range.
pub fn interpolate(curve: &[(f64, f64)], x: f64) -> Option<f64> {
    let first = curve.first()?;
    let last = curve.last()?;
    if x < first.0 || x > last.0 {
        return None;
    }
    let k = curve.partition_point(|p| p.0 <= x);
    if k == 0 {
        return Some(first.1);
    }
    if k == curve.len() {
        return Some(last.1);
    }
    let (x0, y0) = curve[k - 1];
    let (x1, y1) = curve[k];
    if x1 == x0 {
        return Some(y0);
    }
    Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
}

fn sorted(curve: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut c = curve.to_vec();
    c.sort_by(|a, b| a.0.total_cmp(&b.0));
    c
}

/// Crossing of two curves, or `None` if their difference never changes sign.
///
/// When the noisy difference changes sign several times, the crossing whose
/// bracketing segment has the steepest change of the difference is chosen.
pub fn pair_crossing(a: &[(f64, f64)], b: &[(f64, f64)]) -> Option<f64> {
    let (a, b) = (sorted(a), sorted(b));
    let lo = a.first()?.0.max(b.first()?.0);
    let hi = a.last()?.0.min(b.last()?.0);
    if lo > hi {
        return None;
    }
    let mut xs: Vec<f64> = a
        .iter()
        .chain(&b)
        .map(|p| p.0)
        .filter(|&x| x >= lo && x <= hi)
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let diff: Vec<(f64, f64)> = xs
        .iter()
        .map(|&x| (x, interpolate(&b, x).unwrap() - interpolate(&a, x).unwrap()))
        .collect();

    // (abscissa, steepness)
    let mut candidates: Vec<(f64, f64)> = Vec::new();
    for k in 0..diff.len() {
        let (x0, d0) = diff[k];
        if d0 == 0.0 {
            let before = if k > 0 { diff[k - 1].1 } else { d0 };
            let after = diff.get(k + 1).map_or(d0, |p| p.1);
            candidates.push((x0, (after - before).abs()));
            continue;
        }
        if let Some(&(x1, d1)) = diff.get(k + 1) {
            if d0 * d1 < 0.0 {
                let x = x0 + (x1 - x0) * d0 / (d0 - d1);
                candidates.push((x, (d1 - d0).abs()));
            }
        }
    }
    candidates
        .into_iter()
        .reduce(|best, c| if c.1 > best.1 { c } else { best })
        .map(|c| c.0)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Size-independent crossing point of a family of curves.
pub fn find_crossing(curves: &Curves) -> Result<CrossingEstimate> {
    if curves.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "crossing needs at least 2 sizes, got {}",
            curves.len()
        )));
    }
    if let Some((n, _)) = curves.iter().find(|(_, c)| c.len() < 2) {
        return Err(Error::InsufficientData(format!(
            "curve for N = {n} has fewer than 2 points"
        )));
    }
    let sizes: Vec<usize> = curves.keys().copied().collect();
    let mut pairwise = Vec::new();
    for (i, &small) in sizes.iter().enumerate() {
        for &large in &sizes[i + 1..] {
            let rho = pair_crossing(&curves[&small], &curves[&large])
                .ok_or(Error::NoCrossing { small, large })?;
            pairwise.push(PairCrossing {
                n_small: small,
                n_large: large,
                rho,
            });
        }
    }
    let rhos: Vec<f64> = pairwise.iter().map(|p| p.rho).collect();
    let min = rhos.iter().copied().fold(f64::INFINITY, f64::min);
    let max = rhos.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(CrossingEstimate {
        rho_c: median(rhos),
        pairwise_crossings: pairwise,
        spread: max - min,
    })
}
