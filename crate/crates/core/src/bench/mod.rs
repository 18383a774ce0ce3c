//! Benchmark harness: test signals, seeded noise, PSNR, experiments, I/O.
//!
//! Noise is drawn from `ChaCha20Rng::seed_from_u64(seed)` through the
//! `StandardNormal` distribution, so a seed fixes the noise vector on every
//! platform this crate builds on.

mod experiment;
pub mod io;
mod signals;

pub use experiment::{
    aggregate, run_experiment, write_csv, Aggregate, BenchmarkRecord, ExperimentReport, ExperimentSpec,
    SignalSource, CSV_HEADER,
};
pub use signals::{generate_signal, TestSignal, TestSignalSpec};

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::baselines::{self, BaselineConfig, BaselineError, ThresholdMode};
use crate::denoiser::{self, DenoiseConfig, DenoiseError, Variant};
use crate::wavelet::{Decompose, FilterKind, WaveletError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Wavelet(#[from] WaveletError),
    #[error(transparent)]
    Denoise(#[from] DenoiseError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error("{path}: {cause}")]
    Io {
        path: String,
        cause: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Malformed { path: String, line: usize, message: String },
    #[error("{path}: invalid PGM: {message}")]
    Pgm { path: String, message: String },
    #[error("unknown test signal {0:?} (expected blocks, bumps, heavisine or doppler)")]
    UnknownSignal(String),
    #[error("unknown method {0:?} (expected original, a, ab, abc, visu, visu-hard, sure or bayes)")]
    UnknownMethod(String),
    #[error("test signal length {0} must be a power of two and at least 64")]
    InvalidLength(usize),
    #[error("noise level must be finite and nonnegative, got {0}")]
    InvalidSigma(f64),
    #[error("shapes differ: reference has {reference} samples, estimate has {estimate}")]
    ShapeMismatch { reference: usize, estimate: usize },
    #[error("reference range is zero; PSNR is undefined")]
    ZeroRange,
    #[error("invalid experiment: {0}")]
    InvalidExperiment(&'static str),
}

/// Returns `signal + sigma·z` with `z` standard normal, seeded by `seed`.
pub fn add_noise<T: Decompose>(signal: &T, sigma: f64, seed: u64) -> Result<T, BenchError> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(BenchError::InvalidSigma(sigma));
    }
    if sigma == 0.0 {
        return Ok(signal.with_values(signal.values().to_vec())?);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let noisy = signal
        .values()
        .iter()
        .map(|&x| {
            let z: f64 = StandardNormal.sample(&mut rng);
            x + sigma * z
        })
        .collect();
    Ok(signal.with_values(noisy)?)
}

pub fn mse(reference: &[f64], estimate: &[f64]) -> Result<f64, BenchError> {
    if reference.len() != estimate.len() || reference.is_empty() {
        return Err(BenchError::ShapeMismatch {
            reference: reference.len(),
            estimate: estimate.len(),
        });
    }
    let sum: f64 = reference.iter().zip(estimate).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(sum / reference.len() as f64)
}

/// `max − min` of the reference.
pub fn signal_range(reference: &[f64]) -> f64 {
    let (lo, hi) = reference
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    hi - lo
}

/// Peak value used for 8-bit images.
pub const IMAGE_RANGE: f64 = 255.0;

/// `10·log₁₀(range²/mse)`; `+∞` when `mse` is zero.
pub fn psnr_from_mse(range: f64, mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (range * range / mse).log10()
    }
}

/// PSNR of `estimate` against `reference`, with an explicit `range`.
pub fn psnr(reference: &[f64], estimate: &[f64], range: f64) -> Result<f64, BenchError> {
    if range.is_nan() || range <= 0.0 {
        return Err(BenchError::ZeroRange);
    }
    Ok(psnr_from_mse(range, mse(reference, estimate)?))
}

/// A denoising method under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Mdl(Variant),
    Visu(ThresholdMode),
    Sure,
    Bayes,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Mdl(v) => v.name(),
            Method::Visu(ThresholdMode::Soft) => "visu",
            Method::Visu(ThresholdMode::Hard) => "visu-hard",
            Method::Sure => "sure",
            Method::Bayes => "bayes",
        }
    }

    /// Denoises `noisy`, returning the estimate and the number of nonzero
    /// (MDL: retained) coefficients. `sigma` is passed to the baselines
    /// as a known noise level; MDL variants ignore it. `levels: None`
    /// decomposes fully.
    pub fn run<T: Decompose>(
        self,
        noisy: &T,
        filter: FilterKind,
        levels: Option<usize>,
        sigma: Option<f64>,
    ) -> Result<(T, usize), BenchError> {
        let baseline = BaselineConfig {
            filter,
            levels,
            sigma,
            ..BaselineConfig::default()
        };
        Ok(match self {
            Method::Mdl(variant) => {
                let config = DenoiseConfig {
                    filter,
                    levels,
                    ..DenoiseConfig::new(variant)
                };
                let out = denoiser::denoise(noisy, &config)?;
                (out.signal, out.diagnostics.k_total)
            }
            Method::Visu(mode) => {
                let (s, _, nz) = baselines::visushrink(noisy, &baseline, mode)?;
                (s, nz)
            }
            Method::Sure => {
                let (s, _, nz) = baselines::sureshrink(noisy, &baseline)?;
                (s, nz)
            }
            Method::Bayes => {
                let (s, _, nz) = baselines::bayesshrink(noisy, &baseline)?;
                (s, nz)
            }
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "visu" | "visushrink" => Ok(Method::Visu(ThresholdMode::Soft)),
            "visu-hard" => Ok(Method::Visu(ThresholdMode::Hard)),
            "sure" | "sureshrink" => Ok(Method::Sure),
            "bayes" | "bayesshrink" => Ok(Method::Bayes),
            other => other
                .parse::<Variant>()
                .map(Method::Mdl)
                .map_err(|_| BenchError::UnknownMethod(s.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelet::Signal1D;

    #[test]
    fn psnr_reference_points() {
        assert_eq!(psnr_from_mse(10.0, 100.0), 0.0);
        assert!((psnr_from_mse(10.0, 1.0) - 20.0).abs() < 1e-12);
        assert_eq!(psnr(&[0.0, 1.0], &[0.0, 1.0], 1.0).unwrap(), f64::INFINITY);
        assert!(matches!(psnr(&[1.0, 1.0], &[1.0, 1.0], signal_range(&[1.0, 1.0])), Err(BenchError::ZeroRange)));
        assert!(psnr(&[1.0], &[1.0, 2.0], 1.0).is_err());
    }

    #[test]
    fn noise_is_seeded() {
        let s = Signal1D::new(vec![1.0; 4096]).unwrap();
        assert_eq!(add_noise(&s, 0.0, 3).unwrap(), s);
        let a = add_noise(&s, 2.0, 3).unwrap();
        assert_eq!(a, add_noise(&s, 2.0, 3).unwrap());
        assert_ne!(a, add_noise(&s, 2.0, 4).unwrap());
        let diff: Vec<f64> = a.samples().iter().map(|v| v - 1.0).collect();
        let mean = diff.iter().sum::<f64>() / 4096.0;
        let sd = (diff.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / 4095.0).sqrt();
        assert!((sd / 2.0 - 1.0).abs() < 0.05, "{sd}");
        assert!(mean.abs() < 5.0 * 2.0 / 64.0);
        assert!(add_noise(&s, -1.0, 0).is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for name in ["original", "a", "ab", "abc", "visu", "visu-hard", "sure", "bayes"] {
            assert_eq!(name.parse::<Method>().unwrap().name(), name);
        }
        assert!(matches!("wiener".parse::<Method>(), Err(BenchError::UnknownMethod(_))));
    }
}
