//! Wavelet denoising by minimum description length.
//!
//! A noisy signal is transformed to an orthonormal wavelet basis, the
//! coefficients are split into an informative set and a noise set by
//! minimizing a normalized maximum likelihood code length, and the
//! signal is rebuilt from the informative part. The crate provides:
//!
//! * [`wavelet`]: periodic Haar/D4/D6 transforms in 1D and 2D.
//! * [`codelength`]: the code-length criteria and their exact forms.
//! * [`denoiser`]: flat and subband-adaptive selection, and the
//!   mixture-weighted soft threshold.
//! * [`baselines`]: VisuShrink, SureShrink and BayesShrink.
//! * [`bench`]: test signals, seeded noise, PSNR, experiments and file I/O.

pub mod baselines;
pub mod bench;
pub mod codelength;
pub mod denoiser;
pub mod wavelet;

pub use wavelet::{
    forward_dwt, forward_dwt2, inverse_dwt, inverse_dwt2, CoefficientVector, FilterKind, Image2D,
    Signal1D, SubbandLayout, WaveletError, WaveletFilter,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/wavelets.md")]
    mod wavelets {}
    #[doc = include_str!("../../../book/src/code-lengths.md")]
    mod code_lengths {}
    #[doc = include_str!("../../../book/src/selection.md")]
    mod selection {}
    #[doc = include_str!("../../../book/src/mixture.md")]
    mod mixture {}
    #[doc = include_str!("../../../book/src/baselines.md")]
    mod baselines {}
    #[doc = include_str!("../../../book/src/benchmarking.md")]
    mod benchmarking {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
