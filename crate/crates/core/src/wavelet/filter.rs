use std::fmt;
use std::str::FromStr;

use super::WaveletError;

const ORTHO_TOL: f64 = 1e-12;

/// The orthonormal Daubechies family members supported by the transforms.
///
/// The name counts filter taps: `D4` has four, `D6` has six.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FilterKind {
    Haar,
    D4,
    #[default]
    D6,
}

impl FilterKind {
    pub fn name(self) -> &'static str {
        match self {
            FilterKind::Haar => "haar",
            FilterKind::D4 => "d4",
            FilterKind::D6 => "d6",
        }
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FilterKind {
    type Err = WaveletError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "haar" | "d2" => Ok(FilterKind::Haar),
            "d4" | "db2" => Ok(FilterKind::D4),
            "d6" | "db3" => Ok(FilterKind::D6),
            _ => Err(WaveletError::UnknownFilter(s.to_string())),
        }
    }
}

const HAAR: [f64; 2] = [
    std::f64::consts::FRAC_1_SQRT_2,
    std::f64::consts::FRAC_1_SQRT_2,
];

#[allow(clippy::excessive_precision)]
const D4: [f64; 4] = [
    0.482_962_913_144_534_143_374_046_933_5,
    0.836_516_303_737_807_905_575_294_356_4,
    0.224_143_868_042_013_381_025_075_840_0,
    -0.129_409_522_551_260_381_169_248_562_1,
];

#[allow(clippy::excessive_precision)]
const D6: [f64; 6] = [
    0.332_670_552_950_082_615_998_511_589_14,
    0.806_891_509_311_092_576_494_493_604_09,
    0.459_877_502_118_491_570_095_151_942_15,
    -0.135_011_020_010_254_588_696_389_906_70,
    -0.085_441_273_882_026_661_692_819_001_93,
    0.035_226_291_885_709_536_602_740_664_72,
];

/// Analysis filter pair of an orthonormal wavelet.
///
/// The high-pass filter is the alternating flip of the low-pass taps,
/// `g[k] = (-1)^k h[L-1-k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletFilter {
    kind: FilterKind,
    lowpass: Vec<f64>,
    highpass: Vec<f64>,
}

impl WaveletFilter {
    pub fn new(kind: FilterKind) -> Self {
        let taps: &[f64] = match kind {
            FilterKind::Haar => &HAAR,
            FilterKind::D4 => &D4,
            FilterKind::D6 => &D6,
        };
        Self::from_taps(kind, taps.to_vec()).expect("built-in filter taps are orthonormal")
    }

    /// Builds a filter from raw low-pass taps, checking the orthonormality
    /// conditions: taps sum to √2, unit energy, and vanishing even-shift
    /// autocorrelation.
    pub fn from_taps(kind: FilterKind, lowpass: Vec<f64>) -> Result<Self, WaveletError> {
        let len = lowpass.len();
        if len < 2 || !len.is_multiple_of(2) {
            return Err(WaveletError::NotOrthonormal("tap count must be even and >= 2"));
        }
        let sum: f64 = lowpass.iter().sum();
        if (sum - std::f64::consts::SQRT_2).abs() > ORTHO_TOL {
            return Err(WaveletError::NotOrthonormal("taps do not sum to sqrt(2)"));
        }
        for shift in (0..len).step_by(2) {
            let inner: f64 = (0..len - shift).map(|i| lowpass[i] * lowpass[i + shift]).sum();
            let expected = if shift == 0 { 1.0 } else { 0.0 };
            if (inner - expected).abs() > ORTHO_TOL {
                return Err(WaveletError::NotOrthonormal(
                    "even-shift autocorrelation is not a unit impulse",
                ));
            }
        }
        let highpass = (0..len)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * lowpass[len - 1 - k]
            })
            .collect();
        Ok(Self {
            kind,
            lowpass,
            highpass,
        })
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn lowpass(&self) -> &[f64] {
        &self.lowpass
    }

    pub fn highpass(&self) -> &[f64] {
        &self.highpass
    }

    pub fn len(&self) -> usize {
        self.lowpass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lowpass.is_empty()
    }
}

impl From<FilterKind> for WaveletFilter {
    fn from(kind: FilterKind) -> Self {
        WaveletFilter::new(kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_filters_are_orthonormal() {
        for kind in [FilterKind::Haar, FilterKind::D4, FilterKind::D6] {
            let f = WaveletFilter::new(kind);
            let g_sum: f64 = f.highpass().iter().sum();
            assert!(g_sum.abs() < 1e-12, "{kind}: highpass has nonzero DC gain");
            let cross: f64 = f
                .lowpass()
                .iter()
                .zip(f.highpass())
                .map(|(h, g)| h * g)
                .sum();
            assert!(cross.abs() < 1e-12);
        }
    }

    #[test]
    fn d4_matches_closed_form() {
        let s3 = 3f64.sqrt();
        let scale = 4.0 * std::f64::consts::SQRT_2;
        let closed = [(1.0 + s3) / scale, (3.0 + s3) / scale, (3.0 - s3) / scale, (1.0 - s3) / scale];
        for (a, b) in WaveletFilter::new(FilterKind::D4).lowpass().iter().zip(closed) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn d6_matches_closed_form() {
        let r = 10f64.sqrt();
        let s = (5.0 + 2.0 * r).sqrt();
        let scale = 16.0 * std::f64::consts::SQRT_2;
        let closed = [
            1.0 + r + s,
            5.0 + r + 3.0 * s,
            10.0 - 2.0 * r + 2.0 * s,
            10.0 - 2.0 * r - 2.0 * s,
            5.0 + r - 3.0 * s,
            1.0 + r - s,
        ];
        for (a, b) in WaveletFilter::new(FilterKind::D6).lowpass().iter().zip(closed) {
            assert!((a - b / scale).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_non_orthonormal_taps() {
        assert!(WaveletFilter::from_taps(FilterKind::Haar, vec![1.0, 1.0]).is_err());
        assert!(WaveletFilter::from_taps(FilterKind::Haar, vec![1.0]).is_err());
    }

    #[test]
    fn parses_names() {
        assert_eq!("D6".parse::<FilterKind>().unwrap(), FilterKind::D6);
        assert_eq!("haar".parse::<FilterKind>().unwrap(), FilterKind::Haar);
        assert!("sym8".parse::<FilterKind>().is_err());
    }
}
