//! Orthonormal fast wavelet transforms with periodic boundaries.
//!
//! Every transform here is an exact rotation of coefficient space on
//! power-of-two extents: energy is preserved and the inverse is the
//! transpose. The code-length criteria in [`crate::codelength`] rely on
//! both facts, which is why the boundary handling is circular rather than
//! symmetric extension.
//!
//! Coefficients live in one flat vector described by a [`SubbandLayout`];
//! see the layout docs for the storage order.

mod filter;
mod layout;

pub use filter::{FilterKind, WaveletFilter};
pub use layout::{Extent, Orientation, Subband, SubbandLayout};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WaveletError {
    #[error("length {0} is not a positive power of two")]
    NotPowerOfTwo(usize),
    #[error("{levels} decomposition levels requested but at most {max} fit")]
    TooManyLevels { levels: usize, max: usize },
    #[error("at least one decomposition level is required")]
    ZeroLevels,
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("coefficient layout does not match: {0}")]
    LayoutMismatch(&'static str),
    #[error("image has {got} pixels but {rows}x{cols} needs {}", rows * cols)]
    PixelCount { rows: usize, cols: usize, got: usize },
    #[error("filter taps are not orthonormal: {0}")]
    NotOrthonormal(&'static str),
    #[error("unknown wavelet filter {0:?} (expected haar, d4 or d6)")]
    UnknownFilter(String),
}

fn check_finite(values: &[f64]) -> Result<(), WaveletError> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(WaveletError::NonFinite(i)),
        None => Ok(()),
    }
}

/// A 1D signal whose length is a power of two.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal1D {
    samples: Vec<f64>,
}

impl Signal1D {
    pub fn new(samples: Vec<f64>) -> Result<Self, WaveletError> {
        let n = samples.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(WaveletError::NotPowerOfTwo(n));
        }
        check_finite(&samples)?;
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Decomposition depth that leaves a single scaling coefficient.
    pub fn max_levels(&self) -> usize {
        self.samples.len().trailing_zeros() as usize
    }
}

/// A grayscale image stored row-major, both extents powers of two.
#[derive(Debug, Clone, PartialEq)]
pub struct Image2D {
    rows: usize,
    cols: usize,
    pixels: Vec<f64>,
}

impl Image2D {
    pub fn new(rows: usize, cols: usize, pixels: Vec<f64>) -> Result<Self, WaveletError> {
        for extent in [rows, cols] {
            if extent < 2 || !extent.is_power_of_two() {
                return Err(WaveletError::NotPowerOfTwo(extent));
            }
        }
        if pixels.len() != rows * cols {
            return Err(WaveletError::PixelCount {
                rows,
                cols,
                got: pixels.len(),
            });
        }
        check_finite(&pixels)?;
        Ok(Self { rows, cols, pixels })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    pub fn max_levels(&self) -> usize {
        self.rows.min(self.cols).trailing_zeros() as usize
    }
}

/// Wavelet-domain representation: flat values plus their subband layout.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    values: Vec<f64>,
    layout: SubbandLayout,
}

impl CoefficientVector {
    pub fn new(values: Vec<f64>, layout: SubbandLayout) -> Result<Self, WaveletError> {
        if values.len() != layout.len() {
            return Err(WaveletError::LayoutMismatch("value count differs from layout size"));
        }
        check_finite(&values)?;
        Ok(Self { values, layout })
    }

    /// Wraps a raw vector as one unstructured band.
    pub fn unstructured(values: Vec<f64>) -> Result<Self, WaveletError> {
        let layout = SubbandLayout::single(values.len());
        Self::new(values, layout)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn layout(&self) -> &SubbandLayout {
        &self.layout
    }

    pub fn band(&self, band: &Subband) -> &[f64] {
        &self.values[band.range()]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

/// One periodic analysis step: `input` (length m) to `m/2` low-pass and
/// `m/2` high-pass outputs.
fn analyze(filter: &WaveletFilter, input: &[f64], low: &mut [f64], high: &mut [f64]) {
    let m = input.len();
    let (h, g) = (filter.lowpass(), filter.highpass());
    for i in 0..m / 2 {
        let (mut a, mut d) = (0.0, 0.0);
        for k in 0..h.len() {
            let x = input[(2 * i + k) % m];
            a += h[k] * x;
            d += g[k] * x;
        }
        low[i] = a;
        high[i] = d;
    }
}

/// Transpose of [`analyze`]; `output` is overwritten.
fn synthesize(filter: &WaveletFilter, low: &[f64], high: &[f64], output: &mut [f64]) {
    let m = output.len();
    output.fill(0.0);
    let (h, g) = (filter.lowpass(), filter.highpass());
    for i in 0..m / 2 {
        let (a, d) = (low[i], high[i]);
        for k in 0..h.len() {
            output[(2 * i + k) % m] += h[k] * a + g[k] * d;
        }
    }
}

/// Forward transform of a 1D signal to `levels` detail bands plus one
/// scaling band.
pub fn forward_dwt(
    signal: &Signal1D,
    filter: &WaveletFilter,
    levels: usize,
) -> Result<CoefficientVector, WaveletError> {
    let n = signal.len();
    let layout = SubbandLayout::one_d(n, levels)?;
    let mut work = signal.samples().to_vec();
    let mut out = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut m = n;
    for _ in 0..levels {
        let half = m / 2;
        let (low, high) = scratch[..m].split_at_mut(half);
        analyze(filter, &work[..m], low, high);
        out[half..m].copy_from_slice(high);
        work[..half].copy_from_slice(low);
        m = half;
    }
    out[..m].copy_from_slice(&work[..m]);
    CoefficientVector::new(out, layout)
}

pub fn inverse_dwt(
    coeffs: &CoefficientVector,
    filter: &WaveletFilter,
) -> Result<Signal1D, WaveletError> {
    let n = match coeffs.layout().extent() {
        Extent::OneD(n) => n,
        Extent::TwoD { .. } => return Err(WaveletError::LayoutMismatch("expected a 1D layout")),
    };
    let levels = coeffs.layout().levels();
    if SubbandLayout::one_d(n, levels).as_ref() != Ok(coeffs.layout()) {
        return Err(WaveletError::LayoutMismatch("not a dyadic 1D decomposition"));
    }
    let values = coeffs.values();
    let mut work = vec![0.0; n];
    let mut m = n >> levels;
    work[..m].copy_from_slice(&values[..m]);
    let mut scratch = vec![0.0; n];
    while m < n {
        let low = work[..m].to_vec();
        synthesize(filter, &low, &values[m..2 * m], &mut scratch[..2 * m]);
        work[..2 * m].copy_from_slice(&scratch[..2 * m]);
        m *= 2;
    }
    Signal1D::new(work)
}

/// Transforms the leading `count` rows (or columns) of the `extent_r` x
/// `extent_c` region of a row-major buffer with row stride `stride`.
fn analyze_lines(
    filter: &WaveletFilter,
    buf: &mut [f64],
    stride: usize,
    extent_r: usize,
    extent_c: usize,
    along_rows: bool,
) {
    let (lines, m) = if along_rows {
        (extent_r, extent_c)
    } else {
        (extent_c, extent_r)
    };
    let mut line = vec![0.0; m];
    let mut out = vec![0.0; m];
    for l in 0..lines {
        let at = |i: usize| if along_rows { l * stride + i } else { i * stride + l };
        for (i, v) in line.iter_mut().enumerate() {
            *v = buf[at(i)];
        }
        let (low, high) = out.split_at_mut(m / 2);
        analyze(filter, &line, low, high);
        for (i, v) in out.iter().enumerate() {
            buf[at(i)] = *v;
        }
    }
}

fn synthesize_lines(
    filter: &WaveletFilter,
    buf: &mut [f64],
    stride: usize,
    extent_r: usize,
    extent_c: usize,
    along_rows: bool,
) {
    let (lines, m) = if along_rows {
        (extent_r, extent_c)
    } else {
        (extent_c, extent_r)
    };
    let mut line = vec![0.0; m];
    let mut out = vec![0.0; m];
    for l in 0..lines {
        let at = |i: usize| if along_rows { l * stride + i } else { i * stride + l };
        for (i, v) in line.iter_mut().enumerate() {
            *v = buf[at(i)];
        }
        let (low, high) = line.split_at(m / 2);
        synthesize(filter, low, high, &mut out);
        for (i, v) in out.iter().enumerate() {
            buf[at(i)] = *v;
        }
    }
}

/// Top-left corner of a subband inside the in-place Mallat arrangement.
fn block_origin(band: &Subband) -> (usize, usize) {
    let (r, c) = band.shape;
    match band.orientation {
        Orientation::Horizontal => (r, 0),
        Orientation::Vertical => (0, c),
        Orientation::Diagonal => (r, c),
        _ => (0, 0),
    }
}

/// Separable 2D forward transform, recursing on the approximation quadrant.
pub fn forward_dwt2(
    image: &Image2D,
    filter: &WaveletFilter,
    levels: usize,
) -> Result<CoefficientVector, WaveletError> {
    let (rows, cols) = (image.rows(), image.cols());
    let layout = SubbandLayout::two_d(rows, cols, levels)?;
    let mut buf = image.pixels().to_vec();
    let (mut r, mut c) = (rows, cols);
    for _ in 0..levels {
        analyze_lines(filter, &mut buf, cols, r, c, true);
        analyze_lines(filter, &mut buf, cols, r, c, false);
        r /= 2;
        c /= 2;
    }
    let mut flat = vec![0.0; rows * cols];
    for band in layout.subbands() {
        let (r0, c0) = block_origin(band);
        let (br, bc) = band.shape;
        for i in 0..br {
            let src = (r0 + i) * cols + c0;
            let dst = band.offset + i * bc;
            flat[dst..dst + bc].copy_from_slice(&buf[src..src + bc]);
        }
    }
    CoefficientVector::new(flat, layout)
}

pub fn inverse_dwt2(
    coeffs: &CoefficientVector,
    filter: &WaveletFilter,
) -> Result<Image2D, WaveletError> {
    let (rows, cols) = match coeffs.layout().extent() {
        Extent::TwoD { rows, cols } => (rows, cols),
        Extent::OneD(_) => return Err(WaveletError::LayoutMismatch("expected a 2D layout")),
    };
    let layout = coeffs.layout();
    let levels = layout.levels();
    if SubbandLayout::two_d(rows, cols, levels).as_ref() != Ok(layout) {
        return Err(WaveletError::LayoutMismatch("not a Mallat 2D decomposition"));
    }
    let mut buf = vec![0.0; rows * cols];
    for band in layout.subbands() {
        let (r0, c0) = block_origin(band);
        let (br, bc) = band.shape;
        for i in 0..br {
            let dst = (r0 + i) * cols + c0;
            let src = band.offset + i * bc;
            buf[dst..dst + bc].copy_from_slice(&coeffs.values()[src..src + bc]);
        }
    }
    for level in (1..=levels).rev() {
        let (r, c) = (rows >> (level - 1), cols >> (level - 1));
        synthesize_lines(filter, &mut buf, cols, r, c, false);
        synthesize_lines(filter, &mut buf, cols, r, c, true);
    }
    Image2D::new(rows, cols, buf)
}

/// Spatial-domain data that has an orthonormal wavelet decomposition.
pub trait Decompose: Sized {
    fn forward(&self, filter: &WaveletFilter, levels: usize)
        -> Result<CoefficientVector, WaveletError>;
    fn inverse(coeffs: &CoefficientVector, filter: &WaveletFilter) -> Result<Self, WaveletError>;
    /// Depth that reduces the coarsest band to a single coefficient.
    fn max_levels(&self) -> usize;
    /// Samples in storage order (row-major for images).
    fn values(&self) -> &[f64];
    /// Same extent, new values.
    fn with_values(&self, values: Vec<f64>) -> Result<Self, WaveletError>;
}

impl Decompose for Signal1D {
    fn forward(&self, filter: &WaveletFilter, levels: usize) -> Result<CoefficientVector, WaveletError> {
        forward_dwt(self, filter, levels)
    }

    fn inverse(coeffs: &CoefficientVector, filter: &WaveletFilter) -> Result<Self, WaveletError> {
        inverse_dwt(coeffs, filter)
    }

    fn max_levels(&self) -> usize {
        Signal1D::max_levels(self)
    }

    fn values(&self) -> &[f64] {
        self.samples()
    }

    fn with_values(&self, values: Vec<f64>) -> Result<Self, WaveletError> {
        if values.len() != self.len() {
            return Err(WaveletError::LayoutMismatch("sample count changed"));
        }
        Signal1D::new(values)
    }
}

impl Decompose for Image2D {
    fn forward(&self, filter: &WaveletFilter, levels: usize) -> Result<CoefficientVector, WaveletError> {
        forward_dwt2(self, filter, levels)
    }

    fn inverse(coeffs: &CoefficientVector, filter: &WaveletFilter) -> Result<Self, WaveletError> {
        inverse_dwt2(coeffs, filter)
    }

    fn max_levels(&self) -> usize {
        Image2D::max_levels(self)
    }

    fn values(&self) -> &[f64] {
        self.pixels()
    }

    fn with_values(&self, values: Vec<f64>) -> Result<Self, WaveletError> {
        Image2D::new(self.rows, self.cols, values)
    }
}
