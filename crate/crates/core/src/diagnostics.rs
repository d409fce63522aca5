//! Single-chain summaries.
//!
//! Autocorrelations use the biased estimator
//! `r(k) = Σₜ (zₜ − z̄)(zₜ₊ₖ − z̄) / Σₜ (zₜ − z̄)²`. Effective sample size is
//! `n / τ` with `τ = 1 + 2 Σₖ r(k)`, the sum truncated by Geyer's initial
//! positive sequence rule: autocorrelations are added in pairs
//! `r(2m) + r(2m+1)` up to the first pair that is not positive. `τ` is floored
//! at 1 so the estimate never exceeds `n`.
//!
//! Quantiles interpolate linearly between order statistics at position
//! `(n − 1)·prob` (Hyndman–Fan type 7).

use serde::Serialize;

use crate::hmc::ChainResult;
use crate::{Error, Result};

/// Lags reported by [`summarize`].
pub const DEFAULT_MAX_LAG: usize = 50;

/// Probabilities of the reported quantiles.
pub const QUANTILE_PROBS: [f64; 5] = [0.025, 0.25, 0.5, 0.75, 0.975];

fn centred(series: &[f64]) -> (Vec<f64>, f64) {
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let dev: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let ss = dev.iter().map(|v| v * v).sum();
    (dev, ss)
}

fn lag_product(dev: &[f64], k: usize) -> f64 {
    dev.iter().zip(&dev[k..]).map(|(a, b)| a * b).sum()
}

fn check_series(series: &[f64], max_lag: usize) -> Result<()> {
    if max_lag == 0 || series.len() <= max_lag {
        return Err(Error::Config(format!(
            "need 1 <= max_lag < series length, got max_lag {max_lag} for length {}",
            series.len()
        )));
    }
    if !series.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("series".into()));
    }
    Ok(())
}

/// Sample autocorrelations at lags `0..=max_lag`.
pub fn autocorrelation(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    check_series(series, max_lag)?;
    let (dev, ss) = centred(series);
    if !(ss > 0.0) {
        return Err(Error::ConstantSeries);
    }
    let mut acf = Vec::with_capacity(max_lag + 1);
    acf.push(1.0);
    acf.extend((1..=max_lag).map(|k| lag_product(&dev, k) / ss));
    Ok(acf)
}

/// Effective sample size from autocorrelations up to `max_lag`.
pub fn effective_sample_size(series: &[f64], max_lag: usize) -> Result<f64> {
    check_series(series, max_lag)?;
    let (dev, ss) = centred(series);
    if !(ss > 0.0) {
        return Err(Error::ConstantSeries);
    }
    let r = |k: usize| if k == 0 { 1.0 } else { lag_product(&dev, k) / ss };
    let mut tau = -1.0;
    let mut m = 0;
    while 2 * m < max_lag {
        let pair = r(2 * m) + r(2 * m + 1);
        if m > 0 && pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        m += 1;
    }
    let n = series.len() as f64;
    Ok(n / tau.max(1.0))
}

/// Type-7 quantile of already sorted data.
pub fn quantile_sorted(sorted: &[f64], prob: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * prob;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoordinateSummary {
    pub mean: f64,
    /// Standard deviation with divisor `n − 1` (zero for a single row).
    pub sd: f64,
    /// At [`QUANTILE_PROBS`].
    pub quantiles: [f64; 5],
    /// Autocorrelations at lags `0..=max_lag`; `None` for a constant column.
    pub acf: Option<Vec<f64>>,
    /// `None` for a constant column.
    pub ess: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainSummary {
    pub coordinates: Vec<CoordinateSummary>,
    pub acceptance_rate: f64,
    pub burn_in: usize,
    pub retained: usize,
    pub max_lag: usize,
}

/// Summarizes the rows after the first `burn_in`, with ACF up to
/// [`DEFAULT_MAX_LAG`].
pub fn summarize(chain: &ChainResult, burn_in: usize) -> Result<ChainSummary> {
    summarize_with_lags(chain, burn_in, DEFAULT_MAX_LAG)
}

/// As [`summarize`]; `max_lag` is clamped to one less than the retained count.
/// The effective sample size always uses every available lag.
pub fn summarize_with_lags(chain: &ChainResult, burn_in: usize, max_lag: usize) -> Result<ChainSummary> {
    let rows = &chain.samples;
    if burn_in >= rows.len() {
        return Err(Error::Config(format!(
            "burn-in of {burn_in} leaves no samples out of {}",
            rows.len()
        )));
    }
    let kept = &rows[burn_in..];
    let retained = kept.len();
    let max_lag = max_lag.min(retained - 1);
    let coordinates = (0..chain.dim())
        .map(|k| {
            let column: Vec<f64> = kept.iter().map(|r| r[k]).collect();
            summarize_column(&column, max_lag)
        })
        .collect::<Result<_>>()?;
    Ok(ChainSummary {
        coordinates,
        acceptance_rate: chain.acceptance_rate,
        burn_in,
        retained,
        max_lag,
    })
}

fn summarize_column(column: &[f64], max_lag: usize) -> Result<CoordinateSummary> {
    let n = column.len();
    let (_, ss) = centred(column);
    let mean = column.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 { (ss / (n - 1) as f64).sqrt() } else { 0.0 };
    let mut sorted = column.to_vec();
    sorted.sort_by(f64::total_cmp);
    let quantiles = QUANTILE_PROBS.map(|p| quantile_sorted(&sorted, p));
    let (acf, ess) = if max_lag >= 1 && ss > 0.0 {
        (
            Some(autocorrelation(column, max_lag)?),
            Some(effective_sample_size(column, n - 1)?),
        )
    } else {
        (None, None)
    };
    Ok(CoordinateSummary {
        mean,
        sd,
        quantiles,
        acf,
        ess,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hmc::HmcConfig;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    /// Direct double-sum ACF.
    fn brute_acf(z: &[f64], k: usize) -> f64 {
        let n = z.len();
        let mean = z.iter().sum::<f64>() / n as f64;
        let mut num = 0.0;
        for t in 0..n - k {
            num += (z[t] - mean) * (z[t + k] - mean);
        }
        let mut den = 0.0;
        for v in z {
            den += (v - mean) * (v - mean);
        }
        num / den
    }

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    fn ar1(n: usize, rho: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = (1.0 - rho * rho).sqrt();
        let mut x: f64 = rng.sample(StandardNormal);
        (0..n)
            .map(|_| {
                x = rho * x + scale * rng.sample::<f64, _>(StandardNormal);
                x
            })
            .collect()
    }

    #[test]
    fn alternating_series() {
        let z = [1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
        let acf = autocorrelation(&z, 3).unwrap();
        assert_eq!(acf[0], 1.0);
        assert_relative_eq!(acf[1], -5.0 / 6.0, epsilon = 1e-15);
        for k in 1..=3 {
            assert_relative_eq!(acf[k], brute_acf(&z, k), epsilon = 1e-15);
        }
    }

    #[test]
    fn white_noise() {
        let z = normals(10_000, 1);
        let acf = autocorrelation(&z, 5).unwrap();
        assert!(acf[1].abs() < 0.05);
        let ess = effective_sample_size(&z, 1000).unwrap();
        assert!((8_000.0..=10_000.0).contains(&ess), "ess = {ess}");
    }

    #[test]
    fn ar1_matches_analytic_ess() {
        let rho = 0.9;
        let n = 20_000;
        let z = ar1(n, rho, 2);
        let ess = effective_sample_size(&z, n - 1).unwrap();
        let expected = n as f64 * (1.0 - rho) / (1.0 + rho);
        assert!((ess / expected - 1.0).abs() < 0.25, "ess = {ess}, expected {expected}");
    }

    #[test]
    fn short_series_is_fine() {
        let z = [0.3, 0.1, -0.4, 0.8, 0.2, -0.1, 0.0, 0.5, -0.6, 0.9];
        let ess = effective_sample_size(&z, 9).unwrap();
        assert!(ess.is_finite() && ess > 0.0 && ess <= 10.0);
    }

    #[test]
    fn constant_series_is_an_error() {
        assert!(matches!(autocorrelation(&[2.0; 5], 2), Err(Error::ConstantSeries)));
        assert!(matches!(effective_sample_size(&[2.0; 5], 2), Err(Error::ConstantSeries)));
        assert!(autocorrelation(&[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn type7_quantiles() {
        let sorted = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&sorted, 0.0), 1.0);
        assert_eq!(quantile_sorted(&sorted, 1.0), 4.0);
        assert_eq!(quantile_sorted(&sorted, 0.5), 2.5);
        assert_relative_eq!(quantile_sorted(&sorted, 0.25), 1.75);
        assert_eq!(quantile_sorted(&[7.0], 0.975), 7.0);
    }

    fn chain_of(samples: Vec<Vec<f64>>, rate: f64) -> ChainResult {
        let n = samples.len();
        ChainResult {
            potentials: vec![0.0; n],
            proposed: samples[1..].to_vec(),
            acceptance: vec![true; n - 1],
            samples,
            acceptance_rate: rate,
            trajectories: None,
            call: HmcConfig::new(n, 1, 0.1),
        }
    }

    #[test]
    fn identical_rows() {
        let chain = chain_of(vec![vec![0.5, -1.0]; 20], 0.37);
        let s = summarize(&chain, 5).unwrap();
        assert_eq!(s.retained, 15);
        assert_eq!(s.acceptance_rate, 0.37);
        for (c, v) in s.coordinates.iter().zip([0.5, -1.0]) {
            assert_eq!(c.sd, 0.0);
            assert!(c.quantiles.iter().all(|q| *q == v));
            assert!(c.ess.is_none() && c.acf.is_none());
        }
    }

    #[test]
    fn burn_in_must_leave_rows() {
        let chain = chain_of(vec![vec![0.0]; 4], 1.0);
        assert!(summarize(&chain, 4).is_err());
        assert_eq!(summarize(&chain, 3).unwrap().retained, 1);
    }

    proptest! {
        #[test]
        fn summary_invariants(values in proptest::collection::vec(-100.0f64..100.0, 3..200)) {
            let samples: Vec<Vec<f64>> = values.iter().map(|v| vec![*v]).collect();
            let chain = chain_of(samples, 0.5);
            let s = summarize(&chain, 1).unwrap();
            let c = &s.coordinates[0];
            prop_assert!(c.quantiles.windows(2).all(|w| w[0] <= w[1]));
            if let Some(acf) = &c.acf {
                prop_assert_eq!(acf[0], 1.0);
                prop_assert!(acf.iter().all(|r| r.abs() <= 1.0 + 1e-12));
            }
            if let Some(ess) = c.ess {
                prop_assert!(ess > 0.0 && ess <= s.retained as f64);
            }
        }
    }
}
