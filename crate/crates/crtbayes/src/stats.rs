//! Small shared statistics helpers: moments, the quantile rule used for all
//! empirical intervals, and the standard-normal quantile.

use crate::error::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance with the (n-1) denominator. A bitwise-constant input
/// returns exactly 0.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    assert!(n >= 2, "sample variance needs at least two values");
    if xs.windows(2).all(|w| w[0] == w[1]) {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n as f64 - 1.0)
}

pub fn sample_sd(xs: &[f64]) -> f64 {
    sample_variance(xs).sqrt()
}

/// Empirical quantile with linear interpolation between order statistics
/// (the R type-7 rule): position h = (n-1)p, value x_(floor h) interpolated
/// toward x_(floor h + 1).
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    debug_assert!((0.0..=1.0).contains(&p));
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n as f64 - 1.0) * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Two-sided empirical interval at `level` from unsorted values.
pub fn empirical_interval(values: &[f64], level: f64) -> Result<(f64, f64)> {
    if !(0.0 < level && level < 1.0) {
        return Err(Error::Config(format!(
            "interval level must be in (0,1), got {level}"
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| {
        a.partial_cmp(b)
            .expect("non-finite value in interval input")
    });
    let alpha = (1.0 - level) / 2.0;
    Ok((
        quantile_type7(&sorted, alpha),
        quantile_type7(&sorted, 1.0 - alpha),
    ))
}

/// Standard-normal quantile at probability `p`.
pub fn normal_quantile(p: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    Normal::new(0.0, 1.0).unwrap().inverse_cdf(p)
}
