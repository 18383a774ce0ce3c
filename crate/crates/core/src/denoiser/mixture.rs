use crate::codelength::{ln_choose, set_term};
use crate::wavelet::CoefficientVector;

use super::{DenoiseError, Selection};

const EXP_SATURATION: f64 = 700.0;

/// Per-coefficient multipliers in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShrinkageWeights(pub Vec<f64>);

impl ShrinkageWeights {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn apply(&self, coeffs: &mut CoefficientVector) {
        for (c, w) in coeffs.values_mut().iter_mut().zip(&self.0) {
            *c *= w;
        }
    }

    pub fn summary(&self) -> WeightSummary {
        let n = self.0.len().max(1) as f64;
        WeightSummary {
            mean: self.0.iter().sum::<f64>() / n,
            min: self.0.iter().copied().fold(f64::INFINITY, f64::min),
            max: self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            shrunk: self.0.iter().filter(|&&w| w < 0.5).count(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSummary {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Coefficients with weight below one half.
    pub shrunk: usize,
}

/// `r/(1+r)` for `r = exp(gap)`, saturating where `exp` would overflow.
pub fn weight_from_gap(gap: f64) -> f64 {
    if gap.is_nan() {
        0.5
    } else if gap > EXP_SATURATION {
        1.0
    } else if gap < -EXP_SATURATION {
        0.0
    } else {
        1.0 / (1.0 + (-gap).exp())
    }
}

/// The part of the subband code length that changes when one coefficient
/// of band `b` moves between the band's retained set and the pool.
fn local_length(band_n: usize, band_k: usize, band_sum: f64, pool_k: usize, pool_sum: f64) -> f64 {
    set_term(band_k, band_sum) + ln_choose(band_n, band_k) + set_term(pool_k, pool_sum.max(0.0))
}

/// Whether a band's retained variance is at least the pool variance. Sets
/// that would break this ordering are outside the model class.
fn ordered(band_k: usize, band_sum: f64, pool_k: usize, pool_sum: f64) -> bool {
    band_k == 0 || pool_k == 0 || band_sum / band_k as f64 >= pool_sum.max(0.0) / pool_k as f64
}

/// Posterior-odds weights for the mixture soft threshold.
///
/// For each free coefficient the selected model is compared with the
/// model that differs from it only in that coefficient: `L₁` has it
/// retained, `L₀` has it discarded, both including the `ln C(n_b, k_b)`
/// index cost. The weight is `r/(1+r)` with `r = exp(L₀ − L₁)`. Frozen
/// coefficients get weight 1.
///
/// An alternative outside the searched model class is excluded from the
/// mixture: a discarded coefficient then gets weight 0 and a retained one
/// weight 1. That covers retained counts above the band's cap and
/// selections whose retained variance on the band is below the pool
/// variance. Without this, moving a
/// near-zero coefficient into an empty band would score a singleton set
/// with variance `c²` and an unboundedly short code.
pub fn mixture_weights(
    coeffs: &CoefficientVector,
    selection: &Selection,
) -> Result<ShrinkageWeights, DenoiseError> {
    if selection.len() != coeffs.len() {
        return Err(DenoiseError::InvalidConfig("selection does not match coefficients"));
    }
    let values = coeffs.values();
    let mut weights = vec![1.0; values.len()];

    let free: Vec<_> = selection.bands().iter().filter(|b| !b.frozen).collect();
    let band_sums: Vec<f64> = free
        .iter()
        .map(|b| b.retained().iter().map(|&i| values[i] * values[i]).sum())
        .collect();
    let pool_k: usize = free.iter().map(|b| b.subband.len - b.k).sum();
    let pool_sum: f64 = free
        .iter()
        .flat_map(|b| b.discarded().iter().map(|&i| values[i] * values[i]))
        .sum();

    for (band, &sum) in free.iter().zip(&band_sums) {
        let n = band.subband.len;
        for (rank, &i) in band.ranked.iter().enumerate() {
            let sq = values[i] * values[i];
            weights[i] = if rank < band.k {
                let (k, s, pk, ps) = (band.k - 1, sum - sq, pool_k + 1, pool_sum + sq);
                if ordered(k, s, pk, ps) {
                    weight_from_gap(local_length(n, k, s, pk, ps) - local_length(n, band.k, sum, pool_k, pool_sum))
                } else {
                    1.0
                }
            } else {
                let (k, s, pk, ps) = (band.k + 1, sum + sq, pool_k - 1, pool_sum - sq);
                if k <= band.cap && ordered(k, s, pk, ps) {
                    weight_from_gap(local_length(n, band.k, sum, pool_k, pool_sum) - local_length(n, k, s, pk, ps))
                } else {
                    0.0
                }
            };
        }
    }
    Ok(ShrinkageWeights(weights))
}
