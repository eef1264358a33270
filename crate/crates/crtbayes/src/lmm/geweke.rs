//! Geweke non-convergence diagnostic.
//!
//! Compares the mean of an early window against the mean of a late window,
//! standardized by spectral variance estimates of each window:
//!
//! ```text
//! z = (mean_early - mean_late) / sqrt(S_early/n_early + S_late/n_late)
//! ```
//!
//! Window fractions default to the conventional 10% / 50%. The spectral
//! variance at frequency zero is estimated with a Bartlett lag window over
//! floor(sqrt(n)) autocovariance lags; this is a convention choice, not
//! something the underlying method pins down.

use crate::error::{Error, Result};

pub const GEWEKE_FRAC_EARLY: f64 = 0.1;
pub const GEWEKE_FRAC_LATE: f64 = 0.5;

const MIN_WINDOW: usize = 10;

/// Bartlett-windowed estimate of the spectral density at zero (the long-run
/// variance of the window mean, before the 1/n factor).
fn spectral_variance(window: &[f64]) -> f64 {
    let n = window.len();
    let mean = window.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = window.iter().map(|x| x - mean).collect();
    let gamma = |lag: usize| -> f64 {
        centered[lag..]
            .iter()
            .zip(&centered)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64
    };
    let max_lag = (n as f64).sqrt().floor() as usize;
    let mut s = gamma(0);
    for lag in 1..=max_lag.min(n - 1) {
        let weight = 1.0 - lag as f64 / (max_lag as f64 + 1.0);
        s += 2.0 * weight * gamma(lag);
    }
    s.max(0.0)
}

/// Geweke z-score for a chain of draws, comparing the first `frac_early`
/// fraction against the last `frac_late` fraction.
pub fn geweke_z(draws: &[f64], frac_early: f64, frac_late: f64) -> Result<f64> {
    if !(frac_early > 0.0 && frac_late > 0.0 && frac_early + frac_late <= 1.0) {
        return Err(Error::Config(format!(
            "Geweke windows overlap: {frac_early} + {frac_late} > 1"
        )));
    }
    let n = draws.len();
    let n_early = (n as f64 * frac_early).floor() as usize;
    let n_late = (n as f64 * frac_late).floor() as usize;
    if n_early < MIN_WINDOW || n_late < MIN_WINDOW {
        return Err(Error::InsufficientDraws(format!(
            "Geweke windows need at least {MIN_WINDOW} draws each (got {n_early} and {n_late})"
        )));
    }
    let early = &draws[..n_early];
    let late = &draws[n - n_late..];
    let mean_early = early.iter().sum::<f64>() / n_early as f64;
    let mean_late = late.iter().sum::<f64>() / n_late as f64;
    let var = spectral_variance(early) / n_early as f64 + spectral_variance(late) / n_late as f64;
    if var == 0.0 {
        // both windows constant: a degenerate but converged chain
        return Ok(0.0);
    }
    Ok((mean_early - mean_late) / var.sqrt())
}

/// `geweke_z` with the 10% / 50% defaults.
pub fn geweke_z_default(draws: &[f64]) -> Result<f64> {
    geweke_z(draws, GEWEKE_FRAC_EARLY, GEWEKE_FRAC_LATE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha12Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn iid_normal_sequence_is_not_flagged() {
        let mut rng = ChaCha12Rng::seed_from_u64(100);
        let draws: Vec<f64> = (0..10_000).map(|_| rng.sample(StandardNormal)).collect();
        let z = geweke_z_default(&draws).unwrap();
        assert!(z.abs() < 4.0, "z = {z}");
    }

    #[test]
    fn linear_trend_is_flagged() {
        let draws: Vec<f64> = (1..=2000).map(f64::from).collect();
        let z = geweke_z_default(&draws).unwrap();
        assert!(z.abs() > 10.0, "z = {z}");
    }

    #[test]
    fn constant_sequence_gives_zero() {
        let draws = vec![3.0; 500];
        assert_eq!(geweke_z_default(&draws).unwrap(), 0.0);
    }

    #[test]
    fn overlapping_windows_rejected() {
        let draws = vec![0.0; 1000];
        let err = geweke_z(&draws, 0.6, 0.6).unwrap_err();
        assert_eq!(err.category(), "config");
    }

    #[test]
    fn short_chain_rejected() {
        let draws = vec![0.0; 50];
        assert!(geweke_z_default(&draws).is_err());
    }

    /// Null calibration on AR(1) chains: the rejection rate at |z| > 1.96
    /// should be near the nominal 5%.
    #[test]
    fn ar1_null_rejection_rate_is_calibrated() {
        let phi = 0.4;
        let innov_sd = 1.0;
        let mut rejections = 0usize;
        let n_seq = 200;
        for run in 0..n_seq {
            let mut rng = ChaCha12Rng::seed_from_u64(7000 + run);
            let mut x = 0.0;
            // warm the chain into stationarity before recording
            for _ in 0..200 {
                x = phi * x + innov_sd * rng.sample::<f64, _>(StandardNormal);
            }
            let draws: Vec<f64> = (0..4000)
                .map(|_| {
                    x = phi * x + innov_sd * rng.sample::<f64, _>(StandardNormal);
                    x
                })
                .collect();
            if geweke_z_default(&draws).unwrap().abs() > 1.96 {
                rejections += 1;
            }
        }
        let rate = rejections as f64 / n_seq as f64;
        assert!(
            (0.01..=0.10).contains(&rate),
            "rejection rate {rate} outside [0.01, 0.10]"
        );
    }
}
