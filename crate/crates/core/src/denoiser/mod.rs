//! Coefficient selection and shrinkage by minimum description length.
//!
//! Four variants build on each other:
//!
//! | variant    | selection                         | index cost        | output          |
//! |------------|-----------------------------------|-------------------|-----------------|
//! | `Original` | flat, `1 ≤ k < n`                 | none              | hard projection |
//! | `A`        | flat, `k ≤ 0.95 n`                | Stirling `ln C`   | hard projection |
//! | `AB`       | per subband, coordinate descent   | exact `ln C(n_b,k_b)` | hard projection |
//! | `ABC`      | as `AB`                           | as `AB`           | mixture weights |
//!
//! Within any subband the best retained set of a given size is always the
//! largest coefficients in magnitude, so a selection is fully described by
//! one count per subband.

mod mixture;
mod select;

pub use mixture::{mixture_weights, weight_from_gap, ShrinkageWeights, WeightSummary};
pub use select::{select_flat, select_subband, FlatCriterion};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::codelength::CodelengthError;
use crate::wavelet::{CoefficientVector, Decompose, FilterKind, Orientation, Subband, WaveletError, WaveletFilter};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DenoiseError {
    #[error(transparent)]
    Wavelet(#[from] WaveletError),
    #[error(transparent)]
    Codelength(#[from] CodelengthError),
    #[error("{free} free coefficients after the coarse cutoff, need at least {needed}")]
    TooFewFree { free: usize, needed: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("unknown MDL variant {0:?} (expected original, a, ab or abc)")]
    UnknownVariant(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Variant {
    /// Flat two-variance criterion with no index cost.
    Original,
    /// Flat criterion with the model-index cost and the 0.95 cap.
    A,
    /// Subband-adaptive selection.
    AB,
    /// Subband-adaptive selection with mixture soft thresholding.
    #[default]
    ABC,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Original, Variant::A, Variant::AB, Variant::ABC];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Original => "original",
            Variant::A => "a",
            Variant::AB => "ab",
            Variant::ABC => "abc",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = DenoiseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "").as_str() {
            "original" | "mdl" => Ok(Variant::Original),
            "a" => Ok(Variant::A),
            "ab" => Ok(Variant::AB),
            "abc" => Ok(Variant::ABC),
            _ => Err(DenoiseError::UnknownVariant(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseConfig {
    pub variant: Variant,
    pub filter: FilterKind,
    /// Decomposition depth; `None` decomposes fully.
    pub levels: Option<usize>,
    /// Subbands with at most this many coefficients are kept whole.
    pub coarse_cutoff: usize,
    pub k_cap_fraction: f64,
    pub max_iterations: usize,
}

impl Default for DenoiseConfig {
    fn default() -> Self {
        Self {
            variant: Variant::ABC,
            filter: FilterKind::D6,
            levels: None,
            coarse_cutoff: 16,
            k_cap_fraction: 0.95,
            max_iterations: 50,
        }
    }
}

impl DenoiseConfig {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), DenoiseError> {
        if !(self.k_cap_fraction > 0.0 && self.k_cap_fraction <= 1.0) {
            return Err(DenoiseError::InvalidConfig("k cap fraction must lie in (0, 1]"));
        }
        if self.max_iterations == 0 {
            return Err(DenoiseError::InvalidConfig("max_iterations must be positive"));
        }
        if self.levels == Some(0) {
            return Err(DenoiseError::InvalidConfig("levels must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionStatus {
    Selected,
    /// Every free coefficient is zero; nothing is retained.
    AllZero,
    /// The coordinate search hit `max_iterations` before a quiet sweep.
    IterationLimit,
}

/// Retained count for one subband, with the subband's magnitude ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSelection {
    pub subband: Subband,
    /// Frozen subbands are below the coarse cutoff and kept whole.
    pub frozen: bool,
    pub k: usize,
    /// Largest retained count the search may choose for this band.
    pub cap: usize,
    /// Flat indices of the band sorted by descending magnitude, ties to
    /// the lower index. Storage order for frozen bands.
    pub ranked: Vec<usize>,
}

impl BandSelection {
    pub fn retained(&self) -> &[usize] {
        &self.ranked[..self.k]
    }

    pub fn discarded(&self) -> &[usize] {
        &self.ranked[self.k..]
    }
}

/// Bookkeeping from the subband coordinate search.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbandSearch {
    /// Sweeps executed, including the final quiet one.
    pub sweeps: usize,
    /// Sweeps in which some retained count changed.
    pub changing_sweeps: usize,
    pub converged: bool,
    /// Criterion value at the start and after every band update.
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    bands: Vec<BandSelection>,
    len: usize,
    status: SelectionStatus,
    code_length: Option<f64>,
    search: Option<SubbandSearch>,
}

impl Selection {
    pub fn bands(&self) -> &[BandSelection] {
        &self.bands
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn status(&self) -> SelectionStatus {
        self.status
    }

    /// Criterion value of the selected model, when finite.
    pub fn code_length(&self) -> Option<f64> {
        self.code_length
    }

    pub fn search(&self) -> Option<&SubbandSearch> {
        self.search.as_ref()
    }

    pub fn retained_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.len];
        for band in &self.bands {
            for &i in band.retained() {
                mask[i] = true;
            }
        }
        mask
    }

    pub fn total_retained(&self) -> usize {
        self.bands.iter().map(|b| b.k).sum()
    }

    pub fn free_retained(&self) -> usize {
        self.bands.iter().filter(|b| !b.frozen).map(|b| b.k).sum()
    }

    pub fn free_len(&self) -> usize {
        self.bands.iter().filter(|b| !b.frozen).map(|b| b.subband.len).sum()
    }

    /// Zeroes every coefficient outside the selection.
    pub fn project(&self, coeffs: &mut CoefficientVector) {
        let mask = self.retained_mask();
        for (c, keep) in coeffs.values_mut().iter_mut().zip(mask) {
            if !keep {
                *c = 0.0;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandReport {
    pub level: usize,
    pub orientation: Orientation,
    pub len: usize,
    pub k: usize,
    pub frozen: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub variant: Variant,
    pub bands: Vec<BandReport>,
    pub k_total: usize,
    pub status: SelectionStatus,
    pub code_length: Option<f64>,
    pub search: Option<SubbandSearch>,
    pub weights: Option<WeightSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Denoised<T> {
    pub signal: T,
    pub diagnostics: Diagnostics,
}

/// Runs the selection step of `config.variant` on wavelet coefficients.
pub fn select(coeffs: &CoefficientVector, config: &DenoiseConfig) -> Result<Selection, DenoiseError> {
    config.validate()?;
    match config.variant {
        Variant::Original => select_flat(coeffs, FlatCriterion::Plain, None, config.coarse_cutoff),
        Variant::A => select_flat(
            coeffs,
            FlatCriterion::WithIndex,
            Some(config.k_cap_fraction),
            config.coarse_cutoff,
        ),
        Variant::AB | Variant::ABC => select_subband(coeffs, config),
    }
}

/// Denoises wavelet coefficients in place and reports what was kept.
pub fn denoise_coefficients(
    coeffs: &mut CoefficientVector,
    config: &DenoiseConfig,
) -> Result<Diagnostics, DenoiseError> {
    let selection = select(coeffs, config)?;
    let weights = if config.variant == Variant::ABC {
        let w = mixture_weights(coeffs, &selection)?;
        w.apply(coeffs);
        Some(w.summary())
    } else {
        selection.project(coeffs);
        None
    };
    Ok(Diagnostics {
        variant: config.variant,
        bands: selection
            .bands()
            .iter()
            .map(|b| BandReport {
                level: b.subband.level,
                orientation: b.subband.orientation,
                len: b.subband.len,
                k: b.k,
                frozen: b.frozen,
            })
            .collect(),
        k_total: selection.total_retained(),
        status: selection.status(),
        code_length: selection.code_length(),
        search: selection.search().cloned(),
        weights,
    })
}

/// Full pipeline: forward transform, select (and weight), inverse transform.
pub fn denoise<T: Decompose>(signal: &T, config: &DenoiseConfig) -> Result<Denoised<T>, DenoiseError> {
    config.validate()?;
    let filter = WaveletFilter::new(config.filter);
    let levels = config.levels.unwrap_or_else(|| signal.max_levels());
    let mut coeffs = signal.forward(&filter, levels)?;
    let diagnostics = denoise_coefficients(&mut coeffs, config)?;
    Ok(Denoised {
        signal: T::inverse(&coeffs, &filter)?,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelet::Signal1D;

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert_eq!("A-B-C".parse::<Variant>().unwrap(), Variant::ABC);
        assert!("abcd".parse::<Variant>().is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = DenoiseConfig::default();
        assert!(c.validate().is_ok());
        c.k_cap_fraction = 0.0;
        assert!(c.validate().is_err());
        c.k_cap_fraction = 0.95;
        c.levels = Some(0);
        assert!(c.validate().is_err());
    }

    #[test]
    fn constant_signal_survives_every_variant() {
        let s = Signal1D::new(vec![2.5; 256]).unwrap();
        for v in Variant::ALL {
            let out = denoise(&s, &DenoiseConfig::new(v)).unwrap();
            for (a, b) in out.signal.samples().iter().zip(s.samples()) {
                assert!((a - b).abs() < 1e-9, "{v}");
            }
        }
    }
}
