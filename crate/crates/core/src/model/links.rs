//! Link probability laws of the fiber and photonic layers.

use super::params::{ModelParams, PhotonicMode};
use crate::error::{Error, Result};

fn check_distance(d_km: f64) -> Result<()> {
    if d_km >= 0.0 {
        Ok(())
    } else {
        Err(Error::NegativeDistance(d_km))
    }
}

/// Waxman fiber probability β·exp(−d/αL).
pub fn fiber_link_prob(d_km: f64, params: &ModelParams) -> Result<f64> {
    check_distance(d_km)?;
    Ok(waxman(d_km, params.waxman_beta, params.waxman_scale_km))
}

/// Fraction of optical power surviving `d_km` of fiber: 10^(−γd/10).
pub fn transmissivity(d_km: f64, loss_db_per_km: f64) -> Result<f64> {
    check_distance(d_km)?;
    Ok(transmissivity_unchecked(d_km, loss_db_per_km))
}

/// Probability that at least one of `n_pulses` photons survives: 1 − (1 − p)^n.
pub fn photonic_link_prob(p: f64, n_pulses: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    Ok(at_least_one(p, n_pulses))
}

/// Probability that a pair carries a photonic link in the fiber-conditioned
/// model: the fiber must exist and then one pulse must get through.
pub fn combined_link_prob(d_km: f64, params: &ModelParams) -> Result<f64> {
    check_distance(d_km)?;
    Ok(combined_unchecked(d_km, params))
}

/// Distance beyond which pairs are skipped during generation.
///
/// Returns the distance where the governing link probability drops to
/// `cutoff_epsilon`, or +∞ when the cutoff is disabled.
pub fn interaction_cutoff(params: &ModelParams) -> f64 {
    let eps = params.cutoff_epsilon;
    if eps <= 0.0 {
        return f64::INFINITY;
    }
    let f = |d: f64| governing_prob(d, params);
    if f(0.0) < eps {
        return 0.0;
    }
    let mut hi = params.waxman_scale_km.min(100.0).max(1.0);
    while f(hi) >= eps {
        hi *= 2.0;
        if !hi.is_finite() {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    // f(lo) >= eps > f(hi); converge to the threshold crossing.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// The probability that decides whether a pair can produce any photonic edge.
fn governing_prob(d: f64, params: &ModelParams) -> f64 {
    match params.photonic_mode {
        PhotonicMode::FiberConditioned => combined_unchecked(d, params),
        PhotonicMode::AllPairs => at_least_one(
            transmissivity_unchecked(d, params.loss_db_per_km),
            params.n_pulses,
        ),
    }
}

#[inline]
pub(crate) fn waxman(d_km: f64, beta: f64, scale_km: f64) -> f64 {
    beta * (-d_km / scale_km).exp()
}

#[inline]
pub(crate) fn transmissivity_unchecked(d_km: f64, loss_db_per_km: f64) -> f64 {
    10f64.powf(-loss_db_per_km * d_km / 10.0)
}

#[inline]
pub(crate) fn at_least_one(p: f64, n: u32) -> f64 {
    // −expm1(n·log1p(−p)) keeps full precision when p·n is small.
    -(f64::from(n) * (-p).ln_1p()).exp_m1()
}

#[inline]
pub(crate) fn photonic_unchecked(d_km: f64, params: &ModelParams) -> f64 {
    at_least_one(
        transmissivity_unchecked(d_km, params.loss_db_per_km),
        params.n_pulses,
    )
}

#[inline]
pub(crate) fn combined_unchecked(d_km: f64, params: &ModelParams) -> f64 {
    waxman(d_km, params.waxman_beta, params.waxman_scale_km) * photonic_unchecked(d_km, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn fiber_examples() {
        let p = ModelParams::default();
        assert_eq!(fiber_link_prob(0.0, &p).unwrap(), 1.0);
        assert!(close(
            fiber_link_prob(226.0, &p).unwrap(),
            (-1f64).exp(),
            1e-15
        ));
        let half = ModelParams {
            waxman_beta: 0.5,
            ..Default::default()
        };
        assert_eq!(fiber_link_prob(0.0, &half).unwrap(), 0.5);
        assert!(matches!(
            fiber_link_prob(-1.0, &p),
            Err(Error::NegativeDistance(_))
        ));
    }

    #[test]
    fn transmissivity_examples() {
        assert_eq!(transmissivity(0.0, 0.2).unwrap(), 1.0);
        assert!(close(transmissivity(50.0, 0.2).unwrap(), 0.1, 1e-15));
        // 10^(−0.95), 40-digit evaluation
        assert!(close(
            transmissivity(100.0, 0.095).unwrap(),
            0.11220184543019634,
            1e-15
        ));
        assert!(transmissivity(-0.5, 0.2).is_err());
    }

    #[test]
    fn photonic_examples() {
        assert!(close(photonic_link_prob(0.1, 1).unwrap(), 0.1, 1e-16));
        assert_eq!(photonic_link_prob(0.0, 1000).unwrap(), 0.0);
        assert_eq!(photonic_link_prob(1.0, 1000).unwrap(), 1.0);
        assert!(close(
            photonic_link_prob(0.001, 1000).unwrap(),
            0.632_304_575_229_036,
            1e-14
        ));
        assert!(photonic_link_prob(1.2, 10).is_err());
        assert!(photonic_link_prob(-0.1, 10).is_err());
    }

    #[test]
    fn tiny_transmissivity_keeps_relative_precision() {
        // 1 − (1 − p)^n ≈ n·p for n·p ≪ 1; the naive form loses all digits here.
        let p = 1e-18;
        let got = photonic_link_prob(p, 1000).unwrap();
        assert!(((got / 1e-15) - 1.0).abs() < 1e-12, "{got}");
    }

    #[test]
    fn combined_examples() {
        let p = ModelParams::default();
        assert_eq!(combined_link_prob(0.0, &p).unwrap(), 1.0);
        // e^{-1}·(1 − (1 − 10^{-4.52})^1000), 40-digit evaluation
        assert!(close(
            combined_link_prob(226.0, &p).unwrap(),
            0.010943865295518680,
            1e-15
        ));
        assert!(combined_link_prob(300.0, &p).unwrap() < combined_link_prob(150.0, &p).unwrap());
    }

    #[test]
    fn cutoff_examples() {
        let exact = ModelParams {
            cutoff_epsilon: 0.0,
            ..Default::default()
        };
        assert_eq!(interaction_cutoff(&exact), f64::INFINITY);

        let p = ModelParams {
            waxman_beta: 1.0,
            waxman_scale_km: f64::INFINITY,
            n_pulses: 1,
            loss_db_per_km: 0.2,
            cutoff_epsilon: 1e-6,
            ..Default::default()
        };
        let d = interaction_cutoff(&p);
        assert!(close(d, 300.0, 1e-9), "{d}");

        let default = ModelParams::default();
        let d = interaction_cutoff(&default);
        assert!(combined_link_prob(d, &default).unwrap() < 1e-12);
        assert!(combined_link_prob(d * (1.0 - 1e-9), &default).unwrap() >= 1e-12 * (1.0 - 1e-6));
    }

    #[test]
    fn laws_are_monotone_on_grids() {
        let p = ModelParams::default();
        let ds: Vec<f64> = (0..2000).map(|i| i as f64 * 0.75).collect();
        for w in ds.windows(2) {
            let (a, b) = (w[0], w[1]);
            assert!(fiber_link_prob(b, &p).unwrap() < fiber_link_prob(a, &p).unwrap());
            assert!(transmissivity(b, 0.2).unwrap() < transmissivity(a, 0.2).unwrap());
            // the combined law underflows to 0 beyond ~1300 km
            let (ca, cb) = (
                combined_link_prob(a, &p).unwrap(),
                combined_link_prob(b, &p).unwrap(),
            );
            assert!(cb < ca || (ca == 0.0 && cb == 0.0));
        }
        let ps: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        for n in [1u32, 2, 10, 100, 1000, 10_000] {
            for w in ps.windows(2) {
                assert!(
                    photonic_link_prob(w[1], n).unwrap() >= photonic_link_prob(w[0], n).unwrap()
                );
            }
            for &q in &ps {
                assert!(photonic_link_prob(q, n + 1).unwrap() >= photonic_link_prob(q, n).unwrap());
            }
        }
    }
}
