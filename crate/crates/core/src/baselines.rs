//! Classical wavelet shrinkage: VisuShrink, SureShrink and BayesShrink.
//!
//! All three estimate the noise level from the finest detail band (unless
//! it is given), leave subbands of at most `coarse_cutoff` coefficients
//! untouched, and threshold the remaining detail coefficients.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::wavelet::{CoefficientVector, Decompose, FilterKind, Subband, WaveletError, WaveletFilter};

/// MAD-to-σ factor for Gaussian data: the median of `|N(0,1)|`.
pub const MAD_GAUSSIAN: f64 = 0.6745;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaselineError {
    #[error(transparent)]
    Wavelet(#[from] WaveletError),
    #[error("no finest detail subband to estimate the noise level from")]
    NoDetailBand,
    #[error("known noise level must be finite and nonnegative, got {0}")]
    InvalidSigma(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseSource {
    MadFinest,
    Known,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseEstimate {
    pub sigma_hat: f64,
    pub source: NoiseSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ThresholdMode {
    Hard,
    #[default]
    Soft,
}

impl FromStr for ThresholdMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "hard" => Ok(ThresholdMode::Hard),
            "soft" => Ok(ThresholdMode::Soft),
            _ => Err(format!("unknown threshold mode {s:?} (expected hard or soft)")),
        }
    }
}

impl fmt::Display for ThresholdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThresholdMode::Hard => "hard",
            ThresholdMode::Soft => "soft",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineConfig {
    pub filter: FilterKind,
    pub levels: Option<usize>,
    pub coarse_cutoff: usize,
    /// Known noise standard deviation; `None` estimates it by MAD.
    pub sigma: Option<f64>,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            filter: FilterKind::D6,
            levels: None,
            coarse_cutoff: 16,
            sigma: None,
        }
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Robust noise estimate: median absolute value of the finest detail band
/// (the diagonal band in 2D) divided by 0.6745.
pub fn estimate_sigma(coeffs: &CoefficientVector) -> Result<NoiseEstimate, BaselineError> {
    let band = coeffs.layout().finest_detail().ok_or(BaselineError::NoDetailBand)?;
    if band.len == 0 {
        return Err(BaselineError::NoDetailBand);
    }
    let mut mags: Vec<f64> = coeffs.band(band).iter().map(|c| c.abs()).collect();
    Ok(NoiseEstimate {
        sigma_hat: median(&mut mags) / MAD_GAUSSIAN,
        source: NoiseSource::MadFinest,
    })
}

fn noise_level(coeffs: &CoefficientVector, config: &BaselineConfig) -> Result<NoiseEstimate, BaselineError> {
    match config.sigma {
        Some(s) if s.is_finite() && s >= 0.0 => Ok(NoiseEstimate {
            sigma_hat: s,
            source: NoiseSource::Known,
        }),
        Some(s) => Err(BaselineError::InvalidSigma(s)),
        None => estimate_sigma(coeffs),
    }
}

pub fn soft_threshold(c: f64, t: f64) -> f64 {
    c.signum() * (c.abs() - t).max(0.0)
}

pub fn hard_threshold(c: f64, t: f64) -> f64 {
    if c.abs() > t {
        c
    } else {
        0.0
    }
}

fn threshold_band(values: &mut [f64], t: f64, mode: ThresholdMode) {
    for c in values {
        *c = match mode {
            ThresholdMode::Hard => hard_threshold(*c, t),
            ThresholdMode::Soft => soft_threshold(*c, t),
        };
    }
}

fn free_detail_bands(coeffs: &CoefficientVector, cutoff: usize) -> Vec<Subband> {
    coeffs
        .layout()
        .subbands()
        .iter()
        .filter(|b| b.orientation.is_detail() && b.len > cutoff)
        .copied()
        .collect()
}

/// Outcome of a baseline run on coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Shrunk {
    pub noise: NoiseEstimate,
    /// Threshold applied to each free detail band, in storage order.
    pub thresholds: Vec<(Subband, f64)>,
}

impl Shrunk {
    pub fn nonzero(coeffs: &CoefficientVector) -> usize {
        coeffs.values().iter().filter(|&&c| c != 0.0).count()
    }
}

/// Universal threshold `σ̂ √(2 ln n)` on every free detail coefficient.
pub fn visushrink_coefficients(
    coeffs: &mut CoefficientVector,
    config: &BaselineConfig,
    mode: ThresholdMode,
) -> Result<Shrunk, BaselineError> {
    let noise = noise_level(coeffs, config)?;
    let n = coeffs.len() as f64;
    let t = noise.sigma_hat * (2.0 * n.ln()).sqrt();
    let bands = free_detail_bands(coeffs, config.coarse_cutoff);
    for band in &bands {
        threshold_band(&mut coeffs.values_mut()[band.range()], t, mode);
    }
    Ok(Shrunk {
        noise,
        thresholds: bands.into_iter().map(|b| (b, t)).collect(),
    })
}

/// Stein's unbiased estimate of the soft-threshold risk for unit-variance
/// data `x` at threshold `t`.
pub fn sure_risk(x: &[f64], t: f64) -> f64 {
    let n = x.len() as f64;
    let inside = x.iter().filter(|v| v.abs() <= t).count() as f64;
    let clipped: f64 = x.iter().map(|v| v.abs().min(t).powi(2)).sum();
    n - 2.0 * inside + clipped
}

/// SURE-minimizing threshold for unit-variance data, searched over 0, the
/// data magnitudes up to the universal threshold, and the universal
/// threshold itself. Returns `(threshold, risk)`.
pub fn sure_threshold(x: &[f64]) -> (f64, f64) {
    let n = x.len();
    let universal = (2.0 * (n as f64).ln()).sqrt();
    let mut sq: Vec<f64> = x.iter().map(|v| v * v).collect();
    sq.sort_by(|a, b| a.total_cmp(b));
    // Risk at t = |x|_(j) in O(1) from prefix sums of sorted squares.
    let nf = n as f64;
    let mut best = (0.0, nf);
    let mut prefix = 0.0;
    for (j, &s) in sq.iter().enumerate() {
        let t = s.sqrt();
        if t > universal {
            break;
        }
        prefix += s;
        let inside = (j + 1) as f64;
        let risk = nf - 2.0 * inside + prefix + (nf - inside) * s;
        if risk < best.1 {
            best = (t, risk);
        }
    }
    let at_universal = sure_risk(x, universal);
    if at_universal < best.1 {
        best = (universal, at_universal);
    }
    best
}

/// Sparsity test of the hybrid rule: true when the band's excess energy
/// is too small for SURE to be reliable.
fn is_sparse(x: &[f64]) -> bool {
    let n = x.len() as f64;
    let energy = (x.iter().map(|v| v * v).sum::<f64>() - n) / n;
    let critical = n.log2().powf(1.5) / n.sqrt();
    energy <= critical
}

/// SureShrink with the hybrid switch: per band, the SURE threshold, or the
/// universal threshold `√(2 ln n_b)` where the band looks sparse. Soft
/// thresholding.
pub fn sureshrink_coefficients(
    coeffs: &mut CoefficientVector,
    config: &BaselineConfig,
) -> Result<Shrunk, BaselineError> {
    let noise = noise_level(coeffs, config)?;
    let sigma = noise.sigma_hat;
    let bands = free_detail_bands(coeffs, config.coarse_cutoff);
    let mut thresholds = Vec::with_capacity(bands.len());
    for band in bands {
        if sigma == 0.0 {
            thresholds.push((band, 0.0));
            continue;
        }
        let x: Vec<f64> = coeffs.band(&band).iter().map(|c| c / sigma).collect();
        let t_unit = if is_sparse(&x) {
            (2.0 * (x.len() as f64).ln()).sqrt()
        } else {
            sure_threshold(&x).0
        };
        let t = t_unit * sigma;
        threshold_band(&mut coeffs.values_mut()[band.range()], t, ThresholdMode::Soft);
        thresholds.push((band, t));
    }
    Ok(Shrunk { noise, thresholds })
}

/// BayesShrink threshold for one band: `σ̂²/σ̂_x`, infinite when the signal
/// variance estimate vanishes, zero when there is no noise.
pub fn bayes_threshold(band: &[f64], sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    let mean_sq = band.iter().map(|c| c * c).sum::<f64>() / band.len() as f64;
    let signal_sd = (mean_sq - sigma * sigma).max(0.0).sqrt();
    if signal_sd == 0.0 {
        f64::INFINITY
    } else {
        sigma * sigma / signal_sd
    }
}

pub fn bayesshrink_coefficients(
    coeffs: &mut CoefficientVector,
    config: &BaselineConfig,
) -> Result<Shrunk, BaselineError> {
    let noise = noise_level(coeffs, config)?;
    let bands = free_detail_bands(coeffs, config.coarse_cutoff);
    let mut thresholds = Vec::with_capacity(bands.len());
    for band in bands {
        let t = bayes_threshold(coeffs.band(&band), noise.sigma_hat);
        threshold_band(&mut coeffs.values_mut()[band.range()], t, ThresholdMode::Soft);
        thresholds.push((band, t));
    }
    Ok(Shrunk { noise, thresholds })
}

fn run<T: Decompose>(
    signal: &T,
    config: &BaselineConfig,
    shrink: impl FnOnce(&mut CoefficientVector) -> Result<Shrunk, BaselineError>,
) -> Result<(T, Shrunk, usize), BaselineError> {
    let filter = WaveletFilter::new(config.filter);
    let levels = config.levels.unwrap_or_else(|| signal.max_levels());
    let mut coeffs = signal.forward(&filter, levels)?;
    let report = shrink(&mut coeffs)?;
    let nonzero = Shrunk::nonzero(&coeffs);
    Ok((T::inverse(&coeffs, &filter)?, report, nonzero))
}

pub fn visushrink<T: Decompose>(
    signal: &T,
    config: &BaselineConfig,
    mode: ThresholdMode,
) -> Result<(T, Shrunk, usize), BaselineError> {
    run(signal, config, |c| visushrink_coefficients(c, config, mode))
}

pub fn sureshrink<T: Decompose>(
    signal: &T,
    config: &BaselineConfig,
) -> Result<(T, Shrunk, usize), BaselineError> {
    run(signal, config, |c| sureshrink_coefficients(c, config))
}

pub fn bayesshrink<T: Decompose>(
    signal: &T,
    config: &BaselineConfig,
) -> Result<(T, Shrunk, usize), BaselineError> {
    run(signal, config, |c| bayesshrink_coefficients(c, config))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelet::{Signal1D, SubbandLayout};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn with_finest(finest: Vec<f64>) -> CoefficientVector {
        let n = finest.len() * 2;
        let mut values = vec![0.0; n / 2];
        values.extend(finest);
        CoefficientVector::new(values, SubbandLayout::one_d(n, 1).unwrap()).unwrap()
    }

    #[test]
    fn sigma_of_zero_band_is_zero() {
        assert_eq!(estimate_sigma(&with_finest(vec![0.0; 64])).unwrap().sigma_hat, 0.0);
    }

    #[test]
    fn sigma_of_unit_magnitudes() {
        let band: Vec<f64> = (0..64).map(|i| if i % 2 == 0 { -1.0 } else { 1.0 }).collect();
        let est = estimate_sigma(&with_finest(band)).unwrap();
        assert!((est.sigma_hat - 1.0 / 0.6745).abs() < 1e-12);
        assert!((est.sigma_hat - 1.4826).abs() < 1e-4);
    }

    #[test]
    fn sigma_of_gaussian_band() {
        let mut rng = ChaCha20Rng::seed_from_u64(42);
        let sigma = 2.5;
        let band: Vec<f64> = (0..4096)
            .map(|_| sigma * Distribution::<f64>::sample(&StandardNormal, &mut rng))
            .collect();
        let est = estimate_sigma(&with_finest(band)).unwrap();
        assert!((est.sigma_hat / sigma - 1.0).abs() < 0.05);
    }

    #[test]
    fn soft_threshold_contracts() {
        for &c in &[-3.0, -0.5, 0.0, 0.2, 4.0] {
            let s = soft_threshold(c, 1.0);
            assert!(s.abs() <= (c.abs() - 1.0f64).max(0.0) + 1e-15);
            assert!(s.abs() <= c.abs());
        }
        assert_eq!(hard_threshold(0.9, 1.0), 0.0);
        assert_eq!(hard_threshold(-1.1, 1.0), -1.1);
    }

    #[test]
    fn sure_threshold_not_worse_than_zero() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let x: Vec<f64> = (0..512).map(|_| -> f64 { StandardNormal.sample(&mut rng) }).collect();
        let (t, risk) = sure_threshold(&x);
        assert!(risk <= sure_risk(&x, 0.0));
        assert!((risk - sure_risk(&x, t)).abs() < 1e-8);
        assert!((0.0..=(2.0 * 512f64.ln()).sqrt()).contains(&t));
        // brute force over the same candidate grid
        let universal = (2.0 * 512f64.ln()).sqrt();
        let brute = x
            .iter()
            .map(|v| v.abs())
            .filter(|&t| t <= universal)
            .chain([0.0, universal])
            .map(|t| sure_risk(&x, t))
            .fold(f64::INFINITY, f64::min);
        assert!((brute - risk).abs() < 1e-8);
    }

    #[test]
    fn bayes_kills_noise_only_band() {
        assert_eq!(bayes_threshold(&[0.5, -0.5, 0.5, -0.5], 1.0), f64::INFINITY);
        assert_eq!(bayes_threshold(&[0.5, -0.5], 0.0), 0.0);
        let t = bayes_threshold(&[3.0, -3.0, 3.0, -3.0], 1.0);
        assert!((t - 1.0 / 8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zero_signal_stays_zero() {
        let s = Signal1D::new(vec![0.0; 128]).unwrap();
        let config = BaselineConfig::default();
        let (out, _, nz) = visushrink(&s, &config, ThresholdMode::Soft).unwrap();
        assert!(out.samples().iter().all(|&v| v == 0.0));
        assert_eq!(nz, 0);
        let (out, _, _) = sureshrink(&s, &config).unwrap();
        assert!(out.samples().iter().all(|&v| v == 0.0));
        let (out, _, _) = bayesshrink(&s, &config).unwrap();
        assert!(out.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn known_sigma_is_validated() {
        let s = Signal1D::new(vec![0.0; 64]).unwrap();
        let config = BaselineConfig {
            sigma: Some(-1.0),
            ..BaselineConfig::default()
        };
        assert!(matches!(bayesshrink(&s, &config), Err(BaselineError::InvalidSigma(_))));
    }
}
