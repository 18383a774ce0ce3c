//! NML code lengths for the two-variance Gaussian coefficient model.
//!
//! Coefficients in the retained set are modelled as `N(0, σ_I²)` and the
//! rest as `N(0, σ_N²)`. The normalized maximum likelihood code length of
//! the data then depends only on the sums of squares inside and outside
//! the retained set. All values are in nats.
//!
//! Three families live here:
//!
//! * Stirling-approximated selection criteria ([`criterion_flat`],
//!   [`criterion_flat_with_index`], [`criterion_subband`]). These drop
//!   every term that does not depend on the retained set, so values are
//!   only comparable within one criterion.
//! * The exact pre-Stirling code length ([`exact_codelength_flat`]) and
//!   its constant ([`flat_constant`]), used to check the approximation.
//! * The normalizer integrals behind the one-bit effect of the
//!   `σ_N² ≤ σ_I²` constraint ([`prop1_normalizer_check`]).

mod quadrature;

pub use quadrature::integrate;

use statrs::function::gamma::ln_gamma;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodelengthError {
    #[error("degenerate model: k = {k} of n = {n} leaves an empty or zero-energy set")]
    Degenerate { n: usize, k: usize },
    #[error("inconsistent statistics: {0}")]
    Inconsistent(&'static str),
    #[error("k = {k} exceeds n = {n}")]
    KExceedsN { n: usize, k: usize },
    #[error("variance bounds must satisfy 0 < min < max < inf, got ({min}, {max})")]
    InvalidBounds { min: f64, max: f64 },
    #[error("ML variance {variance} lies outside [{min}, {max}]")]
    OutOfSupport { variance: f64, min: f64, max: f64 },
}

/// Sums of squares for a two-set split of `n` coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareStats {
    /// Sum of all squared coefficients, `S`.
    pub total: f64,
    /// Sum over the retained set, `S_γ`.
    pub retained: f64,
    pub n: usize,
    pub k: usize,
}

impl SquareStats {
    pub fn new(total: f64, retained: f64, n: usize, k: usize) -> Result<Self, CodelengthError> {
        if k > n {
            return Err(CodelengthError::KExceedsN { n, k });
        }
        if !(total.is_finite() && retained.is_finite()) || retained < 0.0 || retained > total {
            return Err(CodelengthError::Inconsistent("need 0 <= S_gamma <= S"));
        }
        if k == 0 && retained != 0.0 {
            return Err(CodelengthError::Inconsistent("empty retained set with nonzero sum"));
        }
        Ok(Self { total, retained, n, k })
    }

    /// Builds the statistics for a retained mask over `coeffs`.
    pub fn from_mask(coeffs: &[f64], retained: &[bool]) -> Self {
        assert_eq!(coeffs.len(), retained.len());
        let mut stats = Self {
            total: 0.0,
            retained: 0.0,
            n: coeffs.len(),
            k: 0,
        };
        for (c, &keep) in coeffs.iter().zip(retained) {
            let sq = c * c;
            stats.total += sq;
            if keep {
                stats.retained += sq;
                stats.k += 1;
            }
        }
        stats
    }

    pub fn discarded(&self) -> f64 {
        (self.total - self.retained).max(0.0)
    }

    fn check_interior(&self) -> Result<(), CodelengthError> {
        if self.k == 0 || self.k >= self.n || self.retained <= 0.0 || self.discarded() <= 0.0 {
            return Err(CodelengthError::Degenerate { n: self.n, k: self.k });
        }
        Ok(())
    }
}

/// `(m/2) ln(s/m)`, with `m = 0` contributing nothing and a zero sum over a
/// nonempty set treated as an infinitely long code.
#[inline]
pub(crate) fn half_log_variance(m: usize, s: f64) -> f64 {
    if m == 0 {
        0.0
    } else if s <= 0.0 {
        f64::INFINITY
    } else {
        let m = m as f64;
        0.5 * m * (s / m).ln()
    }
}

/// Flat criterion without validation; `+∞` at degenerate points.
pub(crate) fn flat_nats(n: usize, k: usize, retained: f64, discarded: f64) -> f64 {
    if k == 0 || k >= n {
        return f64::INFINITY;
    }
    half_log_variance(n - k, discarded)
        + half_log_variance(k, retained)
        + 0.5 * ((k as f64) * ((n - k) as f64)).ln()
}

/// Flat criterion with the model-index cost, without validation.
pub(crate) fn flat_with_index_nats(n: usize, k: usize, retained: f64, discarded: f64) -> f64 {
    if k == 0 || k >= n || retained <= 0.0 || discarded <= 0.0 {
        return f64::INFINITY;
    }
    let (kf, rf) = (k as f64, (n - k) as f64);
    0.5 * rf * (discarded / (rf * rf * rf)).ln() + 0.5 * kf * (retained / (kf * kf * kf)).ln()
}

/// Two-variance NML code length with constants dropped:
///
/// `(n−k)/2 · ln((S−S_γ)/(n−k)) + k/2 · ln(S_γ/k) + ½ ln(k(n−k))`.
pub fn criterion_flat(stats: &SquareStats) -> Result<f64, CodelengthError> {
    stats.check_interior()?;
    Ok(flat_nats(stats.n, stats.k, stats.retained, stats.discarded()))
}

/// [`criterion_flat`] plus a Stirling-approximated `ln C(n, k)` for
/// encoding which coefficients are retained:
///
/// `(n−k)/2 · ln((S−S_γ)/(n−k)³) + k/2 · ln(S_γ/k³)`.
pub fn criterion_flat_with_index(stats: &SquareStats) -> Result<f64, CodelengthError> {
    stats.check_interior()?;
    Ok(flat_with_index_nats(stats.n, stats.k, stats.retained, stats.discarded()))
}

/// Retained count, size, and retained sum of squares for one subband.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandStats {
    pub k: usize,
    pub n: usize,
    pub retained: f64,
}

/// Per-subband statistics plus the pool of all discarded coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbandStats {
    pub bands: Vec<BandStats>,
    pub pool_k: usize,
    pub pool_sum: f64,
}

impl SubbandStats {
    /// Builds statistics from per-band coefficient slices and retained masks.
    pub fn from_bands(bands: &[(&[f64], &[bool])]) -> Self {
        let mut stats = SubbandStats {
            bands: Vec::with_capacity(bands.len()),
            pool_k: 0,
            pool_sum: 0.0,
        };
        for (coeffs, mask) in bands {
            let split = SquareStats::from_mask(coeffs, mask);
            stats.bands.push(BandStats {
                k: split.k,
                n: split.n,
                retained: split.retained,
            });
            stats.pool_k += split.n - split.k;
            stats.pool_sum += split.discarded();
        }
        stats
    }

    pub fn total_count(&self) -> usize {
        self.bands.iter().map(|b| b.k).sum::<usize>() + self.pool_k
    }
}

/// Contribution of one Gaussian set to the subband criterion:
/// `(k/2) ln(S/k) + ½ ln k`, zero for an empty set.
#[inline]
pub(crate) fn set_term(k: usize, s: f64) -> f64 {
    if k == 0 {
        0.0
    } else {
        half_log_variance(k, s) + 0.5 * (k as f64).ln()
    }
}

/// Subband-adaptive code length: one Gaussian per subband for the retained
/// coefficients, one shared Gaussian for the discarded pool, and an exact
/// `ln C(n_b, k_b)` index cost per subband. Sets with `k = 0` are skipped.
pub fn criterion_subband(stats: &SubbandStats) -> Result<f64, CodelengthError> {
    let mut total = set_term(stats.pool_k, stats.pool_sum);
    if stats.pool_k > 0 && stats.pool_sum <= 0.0 {
        return Err(CodelengthError::Degenerate {
            n: stats.total_count(),
            k: stats.total_count() - stats.pool_k,
        });
    }
    if stats.pool_sum < 0.0 || (stats.pool_k == 0 && stats.pool_sum != 0.0) {
        return Err(CodelengthError::Inconsistent("discarded pool sum"));
    }
    for band in &stats.bands {
        if band.k > band.n {
            return Err(CodelengthError::KExceedsN { n: band.n, k: band.k });
        }
        if band.retained < 0.0 || (band.k == 0 && band.retained != 0.0) {
            return Err(CodelengthError::Inconsistent("band retained sum"));
        }
        if band.k > 0 && band.retained == 0.0 {
            return Err(CodelengthError::Degenerate { n: band.n, k: band.k });
        }
        total += set_term(band.k, band.retained) + ln_choose(band.n, band.k);
    }
    Ok(total)
}

#[inline]
pub(crate) fn ln_choose(n: usize, k: usize) -> f64 {
    // Canonical order makes ln C(n, k) and ln C(n, n−k) bit-identical.
    let k = k.min(n - k);
    if k == 0 {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Exact `ln C(n, k)` through the log-Gamma function.
pub fn log_binomial(n: usize, k: usize) -> Result<f64, CodelengthError> {
    if k > n {
        return Err(CodelengthError::KExceedsN { n, k });
    }
    Ok(ln_choose(n, k))
}

/// Variance range that restricts the support of the NML normalizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizerBounds {
    pub sigma2_min: f64,
    pub sigma2_max: f64,
}

impl NormalizerBounds {
    pub fn new(sigma2_min: f64, sigma2_max: f64) -> Result<Self, CodelengthError> {
        if !(sigma2_min > 0.0 && sigma2_min < sigma2_max && sigma2_max.is_finite()) {
            return Err(CodelengthError::InvalidBounds {
                min: sigma2_min,
                max: sigma2_max,
            });
        }
        Ok(Self {
            sigma2_min,
            sigma2_max,
        })
    }

    pub fn log_ratio(&self) -> f64 {
        (self.sigma2_max / self.sigma2_min).ln()
    }

    fn contains(&self, variance: f64) -> Result<(), CodelengthError> {
        if variance < self.sigma2_min || variance > self.sigma2_max {
            return Err(CodelengthError::OutOfSupport {
                variance,
                min: self.sigma2_min,
                max: self.sigma2_max,
            });
        }
        Ok(())
    }
}

/// Code length of the flat NML model before Stirling's approximation,
/// including every constant:
///
/// `k/2 ln S_γ + (n−k)/2 ln(S−S_γ) − ln Γ(k/2) − ln Γ((n−k)/2)
///  + n/2 ln π + 2 ln ln(σ²_max/σ²_min)`.
pub fn exact_codelength_flat(
    stats: &SquareStats,
    bounds: &NormalizerBounds,
) -> Result<f64, CodelengthError> {
    stats.check_interior()?;
    let (n, k) = (stats.n as f64, stats.k as f64);
    let discarded = stats.discarded();
    bounds.contains(stats.retained / k)?;
    bounds.contains(discarded / (n - k))?;
    Ok(0.5 * k * stats.retained.ln() + 0.5 * (n - k) * discarded.ln()
        - ln_gamma(0.5 * k)
        - ln_gamma(0.5 * (n - k))
        + 0.5 * n * std::f64::consts::PI.ln()
        + 2.0 * bounds.log_ratio().ln())
}

/// The retained-set-independent gap between [`exact_codelength_flat`] and
/// [`criterion_flat`] once Stirling's formula replaces both Gamma terms:
/// `n/2 ln(2πe) − ln 4π + 2 ln ln(σ²_max/σ²_min)`.
pub fn flat_constant(n: usize, bounds: &NormalizerBounds) -> f64 {
    use std::f64::consts::{E, PI};
    0.5 * n as f64 * (2.0 * PI * E).ln() - (4.0 * PI).ln() + 2.0 * bounds.log_ratio().ln()
}

/// Values of the normalizer integral `∬ s₁⁻¹ s₂⁻¹ ds₁ ds₂` with and without
/// the `σ̂_N² ≤ σ̂_I²` constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizerIntegrals {
    pub unconstrained: f64,
    pub constrained: f64,
}

impl NormalizerIntegrals {
    pub fn ratio(&self) -> f64 {
        self.unconstrained / self.constrained
    }
}

const NORMALIZER_REL_TOL: f64 = 1e-8;

/// Integrates the variable part of the normalizer over the rectangle
/// `s₁ ∈ [kσ²_min, kσ²_max]`, `s₂ ∈ [(n−k)σ²_min, (n−k)σ²_max]`, and over
/// the part of it where `s₂/(n−k) ≤ s₁/k`, both by nested adaptive
/// quadrature.
pub fn normalizer_integrals(
    bounds: &NormalizerBounds,
    n: usize,
    k: usize,
    rel_tol: f64,
) -> Result<NormalizerIntegrals, CodelengthError> {
    if k == 0 || k >= n {
        return Err(CodelengthError::Degenerate { n, k });
    }
    let (kf, rf) = (k as f64, (n - k) as f64);
    let (lo1, hi1) = (kf * bounds.sigma2_min, kf * bounds.sigma2_max);
    let (lo2, hi2) = (rf * bounds.sigma2_min, rf * bounds.sigma2_max);
    let inner = |upper: f64| -> f64 {
        if upper <= lo2 {
            0.0
        } else {
            integrate(|s2| 1.0 / s2, lo2, upper.min(hi2), rel_tol * 0.1)
        }
    };
    let unconstrained = integrate(|s1| inner(hi2) / s1, lo1, hi1, rel_tol);
    let constrained = integrate(|s1| inner(rf / kf * s1) / s1, lo1, hi1, rel_tol);
    Ok(NormalizerIntegrals {
        unconstrained,
        constrained,
    })
}

/// Closed form of the constrained integral, from the antiderivative
/// `∫ s⁻¹ ln s ds = ½ (ln s)²`. Valid for any `k`, `n` since the
/// constraint boundary maps the corners of the rectangle onto each other.
pub fn constrained_normalizer_closed_form(bounds: &NormalizerBounds, k: usize) -> f64 {
    let kf = k as f64;
    let (a, b) = ((kf * bounds.sigma2_min).ln(), (kf * bounds.sigma2_max).ln());
    0.5 * b * b - 0.5 * a * a - a * bounds.log_ratio()
}

/// Ratio of the unconstrained to the constrained normalizer for the
/// symmetric split `k = n − k`. Ignoring the constraint doubles the
/// normalizer, so the ratio is 2: one bit of code length.
pub fn prop1_normalizer_check(bounds: &NormalizerBounds) -> Result<f64, CodelengthError> {
    Ok(normalizer_integrals(bounds, 2, 1, NORMALIZER_REL_TOL)?.ratio())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(total: f64, retained: f64, n: usize, k: usize) -> SquareStats {
        SquareStats::new(total, retained, n, k).unwrap()
    }

    #[test]
    fn flat_unit_variance_ratios_vanish() {
        let got = criterion_flat(&stats(2048.0, 512.0, 2048, 512)).unwrap();
        assert!((got - 0.5 * 786_432f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn flat_matches_high_precision_reference() {
        // 50-digit reference: 6.54077069144203683256806977...
        let got = criterion_flat(&stats(52.0, 40.0, 16, 4)).unwrap();
        assert!((got - 6.540_770_691_442_037).abs() < 1e-13);
    }

    #[test]
    fn with_index_matches_high_precision_reference() {
        // 50-digit reference: -30.75888705594747483005838782...
        let got = criterion_flat_with_index(&stats(52.0, 40.0, 16, 4)).unwrap();
        assert!((got + 30.758_887_055_947_475).abs() < 1e-12);
    }

    #[test]
    fn with_index_unit_variance_collapse() {
        let got = criterion_flat_with_index(&stats(2048.0, 512.0, 2048, 512)).unwrap();
        let expected = -512.0 * 512f64.ln() - 1536.0 * 1536f64.ln();
        assert!((got - expected).abs() < 1e-9 * expected.abs());
    }

    #[test]
    fn index_cost_is_symmetric_under_complement() {
        let s = stats(52.0, 40.0, 16, 4);
        let c = stats(52.0, 12.0, 16, 12);
        let d1 = criterion_flat_with_index(&s).unwrap() - criterion_flat(&s).unwrap();
        let d2 = criterion_flat_with_index(&c).unwrap() - criterion_flat(&c).unwrap();
        assert!((d1 - d2).abs() <= 1e-9);
    }

    #[test]
    fn degenerate_models_are_rejected() {
        for bad in [stats(5.0, 0.0, 8, 0), stats(5.0, 5.0, 8, 8), stats(5.0, 0.0, 8, 3), stats(5.0, 5.0, 8, 3)] {
            assert!(matches!(criterion_flat(&bad), Err(CodelengthError::Degenerate { .. })));
            assert!(criterion_flat_with_index(&bad).is_err());
        }
        assert!(SquareStats::new(1.0, 2.0, 8, 3).is_err());
        assert!(SquareStats::new(1.0, 0.5, 8, 9).is_err());
        assert_eq!(flat_nats(8, 3, 0.0, 1.0), f64::INFINITY);
    }

    #[test]
    fn subband_reference_value() {
        // Bands n=8 with (k, S) = (2, 13.7) and (3, 9.2); pool (11, 4.1).
        let s = SubbandStats {
            bands: vec![
                BandStats { k: 2, n: 8, retained: 13.7 },
                BandStats { k: 3, n: 8, retained: 9.2 },
            ],
            pool_k: 11,
            pool_sum: 4.1,
        };
        let got = criterion_subband(&s).unwrap();
        assert!((got - 7.629_523_372_293_431).abs() < 1e-12);
    }

    #[test]
    fn subband_single_band_reduces_to_flat() {
        let s = SubbandStats {
            bands: vec![BandStats { k: 5, n: 32, retained: 70.0 }],
            pool_k: 27,
            pool_sum: 30.0,
        };
        let flat = criterion_flat(&stats(100.0, 70.0, 32, 5)).unwrap();
        let got = criterion_subband(&s).unwrap() - log_binomial(32, 5).unwrap();
        assert!((got - flat).abs() < 1e-9);
    }

    #[test]
    fn empty_band_is_ignored() {
        let base = SubbandStats {
            bands: vec![BandStats { k: 3, n: 16, retained: 9.0 }],
            pool_k: 13,
            pool_sum: 2.0,
        };
        let mut with_empty = base.clone();
        with_empty.bands.push(BandStats { k: 0, n: 8, retained: 0.0 });
        with_empty.pool_k += 8;
        let mut also = base.clone();
        also.pool_k += 8;
        assert_eq!(criterion_subband(&with_empty).unwrap(), criterion_subband(&also).unwrap());
    }

    #[test]
    fn subband_rejects_zero_energy_sets() {
        let s = SubbandStats {
            bands: vec![BandStats { k: 2, n: 8, retained: 0.0 }],
            pool_k: 6,
            pool_sum: 1.0,
        };
        assert!(criterion_subband(&s).is_err());
        let s = SubbandStats {
            bands: vec![BandStats { k: 2, n: 8, retained: 1.0 }],
            pool_k: 6,
            pool_sum: 0.0,
        };
        assert!(criterion_subband(&s).is_err());
    }

    #[test]
    fn log_binomial_values() {
        assert!((log_binomial(4, 2).unwrap() - 6f64.ln()).abs() < 1e-14);
        assert_eq!(log_binomial(10, 0).unwrap(), 0.0);
        // exact big-integer C(2048, 512), then ln, at 50 digits
        let got = log_binomial(2048, 512).unwrap();
        assert!((got - 1_147.767_940_046_057_4).abs() < 1e-9 * 1147.8);
        assert!(log_binomial(3, 4).is_err());
    }

    #[test]
    fn exact_codelength_reference() {
        let b = NormalizerBounds::new(1e-6, 1e6).unwrap();
        let got = exact_codelength_flat(&stats(64.0, 32.0, 64, 32), &b).unwrap();
        // 50-digit reference via log-Gamma: 98.37424065916218416723...
        assert!((got - 98.374_240_659_162_18).abs() < 1e-11);
    }

    #[test]
    fn exact_codelength_scale_law() {
        let b = NormalizerBounds::new(1e-6, 1e6).unwrap();
        let base = exact_codelength_flat(&stats(64.0, 40.0, 64, 20), &b).unwrap();
        let lambda: f64 = 3.0;
        let l2 = lambda * lambda;
        let scaled = exact_codelength_flat(&stats(64.0 * l2, 40.0 * l2, 64, 20), &b).unwrap();
        assert!((scaled - base - 32.0 * l2.ln()).abs() < 1e-10);
    }

    #[test]
    fn exact_codelength_rejects_out_of_support() {
        let b = NormalizerBounds::new(0.5, 2.0).unwrap();
        assert!(matches!(
            exact_codelength_flat(&stats(64.0, 60.0, 64, 4), &b),
            Err(CodelengthError::OutOfSupport { .. })
        ));
    }

    #[test]
    fn bounds_validation() {
        assert!(NormalizerBounds::new(0.0, 1.0).is_err());
        assert!(NormalizerBounds::new(2.0, 1.0).is_err());
        assert!(NormalizerBounds::new(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn closed_form_agrees_with_quadrature() {
        let b = NormalizerBounds::new(0.5, 8.0).unwrap();
        for (n, k) in [(2, 1), (10, 3), (64, 40)] {
            let q = normalizer_integrals(&b, n, k, 1e-12).unwrap();
            let closed = constrained_normalizer_closed_form(&b, k);
            assert!((q.constrained - closed).abs() < 1e-9, "n={n} k={k}");
            assert!((q.unconstrained - b.log_ratio().powi(2)).abs() < 1e-9);
        }
    }
}
