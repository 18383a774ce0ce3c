use std::cmp::Ordering;

use crate::codelength::{flat_nats, flat_with_index_nats, ln_choose, set_term};
use crate::wavelet::CoefficientVector;

use super::{BandSelection, DenoiseConfig, DenoiseError, Selection, SelectionStatus, SubbandSearch};

/// Which flat criterion scores a retained count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlatCriterion {
    /// Two-variance NML code length without any model-index cost.
    Plain,
    /// Adds the Stirling-approximated `ln C(n, k)` index cost.
    WithIndex,
}

impl FlatCriterion {
    pub(crate) fn nats(self, n: usize, k: usize, retained: f64, discarded: f64) -> f64 {
        match self {
            FlatCriterion::Plain => flat_nats(n, k, retained, discarded),
            FlatCriterion::WithIndex => flat_with_index_nats(n, k, retained, discarded),
        }
    }
}

/// Descending `|c|` order with ties broken by lower index.
pub(crate) fn rank_by_magnitude(values: &[f64], indices: &mut [usize]) {
    indices.sort_by(|&a, &b| {
        values[b]
            .abs()
            .partial_cmp(&values[a].abs())
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
}

/// Largest admissible retained count for `n` values. `None` only excludes
/// the degenerate `k = n`.
pub(crate) fn count_cap(n: usize, cap: Option<f64>) -> usize {
    let limit = match cap {
        Some(fraction) => (fraction * n as f64).floor() as usize,
        None => n,
    };
    limit.min(n.saturating_sub(1))
}

/// Head/tail sums of squares along a ranking: `head[k]` sums the `k`
/// largest, `tail[k]` the rest. Both are accumulated directly so neither
/// end suffers from cancellation.
pub(crate) fn split_sums(values: &[f64], ranked: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let n = ranked.len();
    let mut head = vec![0.0; n + 1];
    let mut tail = vec![0.0; n + 1];
    for (k, &i) in ranked.iter().enumerate() {
        head[k + 1] = head[k] + values[i] * values[i];
    }
    for k in (0..n).rev() {
        let i = ranked[k];
        tail[k] = tail[k + 1] + values[i] * values[i];
    }
    (head, tail)
}

fn band_skeleton(coeffs: &CoefficientVector, coarse_cutoff: usize) -> Vec<BandSelection> {
    coeffs
        .layout()
        .subbands()
        .iter()
        .map(|band| {
            let frozen = band.len <= coarse_cutoff;
            let mut ranked: Vec<usize> = band.range().collect();
            if !frozen {
                rank_by_magnitude(coeffs.values(), &mut ranked);
            }
            BandSelection {
                subband: *band,
                frozen,
                k: band.len,
                cap: band.len,
                ranked,
            }
        })
        .collect()
}

/// Flat selection: pools every free coefficient, ranks by magnitude and
/// keeps the prefix length that minimizes `criterion`.
///
/// Retained counts run over `1..=⌊cap·n⌋` (or `1..n` without a cap). Ties
/// go to the smaller count. Subbands with at most `coarse_cutoff`
/// coefficients are kept whole and do not take part.
pub fn select_flat(
    coeffs: &CoefficientVector,
    criterion: FlatCriterion,
    cap: Option<f64>,
    coarse_cutoff: usize,
) -> Result<Selection, DenoiseError> {
    if let Some(f) = cap {
        if !(f > 0.0 && f <= 1.0) {
            return Err(DenoiseError::InvalidConfig("k cap fraction must lie in (0, 1]"));
        }
    }
    let values = coeffs.values();
    let mut bands = band_skeleton(coeffs, coarse_cutoff);
    let mut free: Vec<usize> = bands
        .iter()
        .filter(|b| !b.frozen)
        .flat_map(|b| b.subband.range())
        .collect();
    let n = free.len();
    if n < 4 {
        return Err(DenoiseError::TooFewFree { free: n, needed: 4 });
    }
    rank_by_magnitude(values, &mut free);
    let (head, tail) = split_sums(values, &free);

    let (k, code_length, status) = if head[n] == 0.0 {
        (0, None, SelectionStatus::AllZero)
    } else {
        let mut best = (0, f64::INFINITY);
        for k in 1..=count_cap(n, cap) {
            let v = criterion.nats(n, k, head[k], tail[k]);
            if v < best.1 {
                best = (k, v);
            }
        }
        if best.1.is_finite() {
            (best.0, Some(best.1), SelectionStatus::Selected)
        } else {
            // Every candidate leaves a zero-energy set: the nonzero
            // coefficients are exactly sparse, keep them all.
            let nonzero = free.iter().filter(|&&i| values[i] != 0.0).count();
            (nonzero, None, SelectionStatus::Selected)
        }
    };

    let mut keep = vec![false; values.len()];
    for &i in &free[..k] {
        keep[i] = true;
    }
    for band in bands.iter_mut().filter(|b| !b.frozen) {
        band.k = band.subband.range().filter(|&i| keep[i]).count();
    }
    Ok(Selection {
        bands,
        len: values.len(),
        status,
        code_length,
        search: None,
    })
}

/// Per-band tables for the subband-adaptive search.
struct FreeBand {
    n: usize,
    cap: usize,
    head: Vec<f64>,
    tail: Vec<f64>,
    ln_choose: Vec<f64>,
}

struct SearchState {
    bands: Vec<FreeBand>,
}

impl SearchState {
    /// Full subband criterion for the retained counts `ks`, evaluated the
    /// same way every time so comparisons between states are exact.
    fn total(&self, ks: &[usize]) -> f64 {
        let mut value = 0.0;
        let mut pool_k = 0;
        let mut pool_sum = 0.0;
        for (band, &k) in self.bands.iter().zip(ks) {
            value += set_term(k, band.head[k]) + band.ln_choose[k];
            pool_k += band.n - k;
            pool_sum += band.tail[k];
        }
        value + set_term(pool_k, pool_sum)
    }
}

/// Subband-adaptive selection by coordinate descent on the subband
/// criterion.
///
/// The search starts from the empty selection, with every free
/// coefficient in the discarded pool, and keeps `k_b ≤ ⌊cap·n_b⌋`.
/// Starting from full retention instead is infeasible under the cap, and
/// its nearest feasible point (every band at its cap) is a poor local
/// minimum in which the pool holds only the smallest few coefficients.
///
/// Sweeps visit the free bands coarse to fine and set each `k_b` to its
/// best value given the others. Taking the coarse bands first removes the
/// signal from the pool early; visiting the finest band first can instead
/// move nearly all of it into its retained set and stall there. A move is
/// taken only if it strictly lowers the total, so the criterion never
/// increases. The search stops after a sweep with no change or after
/// `max_iterations` sweeps.
pub fn select_subband(
    coeffs: &CoefficientVector,
    config: &DenoiseConfig,
) -> Result<Selection, DenoiseError> {
    config.validate()?;
    let values = coeffs.values();
    let mut bands = band_skeleton(coeffs, config.coarse_cutoff);
    let free_ids: Vec<usize> = (0..bands.len()).filter(|&b| !bands[b].frozen).collect();
    if free_ids.is_empty() {
        return Err(DenoiseError::TooFewFree { free: 0, needed: 1 });
    }
    let state = SearchState {
        bands: free_ids
            .iter()
            .map(|&b| {
                let sel = &bands[b];
                let n = sel.subband.len;
                let (head, tail) = split_sums(values, &sel.ranked);
                FreeBand {
                    n,
                    cap: ((config.k_cap_fraction * n as f64).floor() as usize).min(n),
                    head,
                    tail,
                    ln_choose: (0..=n).map(|k| ln_choose(n, k)).collect(),
                }
            })
            .collect(),
    };

    let mut ks: Vec<usize> = vec![0; state.bands.len()];
    let mut current = state.total(&ks);
    let mut trace = vec![current];
    let mut sweeps = 0;
    let mut changing_sweeps = 0;
    let mut converged = false;
    // Storage order is coarse to fine, which is also the visiting order.
    let order: Vec<usize> = (0..ks.len()).collect();
    while sweeps < config.max_iterations {
        sweeps += 1;
        let mut changed = false;
        for &slot in &order {
            let before = ks[slot];
            let mut best = (before, current);
            for k in 0..=state.bands[slot].cap {
                if k == before {
                    continue;
                }
                ks[slot] = k;
                let v = state.total(&ks);
                if v < best.1 {
                    best = (k, v);
                }
            }
            ks[slot] = best.0;
            if best.0 != before {
                changed = true;
                current = best.1;
            }
            trace.push(current);
        }
        if changed {
            changing_sweeps += 1;
        } else {
            converged = true;
            break;
        }
    }

    for ((&b, &k), free) in free_ids.iter().zip(&ks).zip(&state.bands) {
        bands[b].k = k;
        bands[b].cap = free.cap;
    }
    let status = if converged {
        SelectionStatus::Selected
    } else {
        SelectionStatus::IterationLimit
    };
    Ok(Selection {
        bands,
        len: values.len(),
        status,
        code_length: Some(current).filter(|v| v.is_finite()),
        search: Some(SubbandSearch {
            sweeps,
            changing_sweeps,
            converged,
            trace,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codelength::{criterion_flat_with_index, SquareStats};
    use crate::wavelet::SubbandLayout;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn unstructured(values: Vec<f64>) -> CoefficientVector {
        CoefficientVector::unstructured(values).unwrap()
    }

    #[test]
    fn ranking_breaks_ties_by_index() {
        let values = [1.0, -3.0, 3.0, 0.5, -1.0];
        let mut idx: Vec<usize> = (0..5).collect();
        rank_by_magnitude(&values, &mut idx);
        assert_eq!(idx, vec![1, 2, 0, 4, 3]);
    }

    #[test]
    fn two_spikes_select_two_with_index_cost() {
        let c = unstructured(vec![10.0, 10.0, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1]);
        // direct evaluation over k = 1..7
        let mut best = (0, f64::INFINITY);
        for k in 1..8 {
            let retained: f64 = c.values()[..k].iter().map(|v| v * v).sum();
            let s = SquareStats::new(200.06, retained, 8, k).unwrap();
            let v = criterion_flat_with_index(&s).unwrap();
            if v < best.1 {
                best = (k, v);
            }
        }
        assert_eq!(best.0, 2);
        let sel = select_flat(&c, FlatCriterion::WithIndex, Some(0.95), 0).unwrap();
        assert_eq!(sel.total_retained(), 2);
        assert_eq!(sel.retained_mask()[..2], [true, true]);
    }

    #[test]
    fn cap_bounds_the_retained_count() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        // heavy-tailed values tempt the criterion towards large k
        let values: Vec<f64> = (0..2048).map(|_| rng.random::<f64>().powi(8) * 100.0 + 1e-3).collect();
        let sel = select_flat(&unstructured(values.clone()), FlatCriterion::WithIndex, Some(0.95), 0).unwrap();
        assert!(sel.total_retained() <= 1945);
        let sel = select_flat(&unstructured(values), FlatCriterion::Plain, None, 0).unwrap();
        assert!(sel.total_retained() <= 2047);
    }

    #[test]
    fn all_zero_input_gives_empty_selection() {
        let sel = select_flat(&unstructured(vec![0.0; 16]), FlatCriterion::Plain, None, 0).unwrap();
        assert_eq!(sel.status(), SelectionStatus::AllZero);
        assert_eq!(sel.total_retained(), 0);
    }

    #[test]
    fn too_few_coefficients() {
        assert!(matches!(
            select_flat(&unstructured(vec![1.0, 2.0, 3.0]), FlatCriterion::Plain, None, 0),
            Err(DenoiseError::TooFewFree { .. })
        ));
    }

    #[test]
    fn frozen_bands_are_kept_whole() {
        let layout = SubbandLayout::from_band_lengths(&[4, 4, 32]);
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let values: Vec<f64> = (0..40).map(|_| rng.random::<f64>() - 0.5).collect();
        let c = CoefficientVector::new(values, layout).unwrap();
        let sel = select_flat(&c, FlatCriterion::WithIndex, Some(0.95), 4).unwrap();
        assert!(sel.retained_mask()[..8].iter().all(|&k| k));
        assert_eq!(sel.free_len(), 32);
    }

    #[test]
    fn large_subband_is_kept_entirely() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let layout = SubbandLayout::from_band_lengths(&[32, 64, 128]);
        let mut values: Vec<f64> = (0..224).map(|_| (rng.random::<f64>() - 0.5) * 2e-3).collect();
        for (j, v) in values[32..96].iter_mut().enumerate() {
            *v = if j % 2 == 0 { 100.0 } else { -100.0 };
        }
        let c = CoefficientVector::new(values, layout).unwrap();
        let config = DenoiseConfig {
            k_cap_fraction: 1.0,
            coarse_cutoff: 0,
            ..DenoiseConfig::default()
        };
        let sel = select_subband(&c, &config).unwrap();
        assert_eq!(sel.bands()[1].k, 64);
    }

    #[test]
    fn subband_search_is_monotone() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let layout = SubbandLayout::from_band_lengths(&[16, 16, 32, 64, 128, 256]);
        let values: Vec<f64> = (0..512)
            .map(|i| {
                let noise = rng.random::<f64>() - 0.5;
                if i % 37 == 0 { 20.0 * noise + 8.0 } else { noise }
            })
            .collect();
        let c = CoefficientVector::new(values, layout).unwrap();
        let sel = select_subband(&c, &DenoiseConfig::default()).unwrap();
        let search = sel.search().unwrap();
        assert!(search.converged);
        for w in search.trace.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn subband_cap_holds_per_band() {
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        let layout = SubbandLayout::from_band_lengths(&[16, 16, 32, 64, 128, 256]);
        let values: Vec<f64> = (0..512).map(|_| rng.random::<f64>().powi(6) * 50.0).collect();
        let c = CoefficientVector::new(values, layout).unwrap();
        let sel = select_subband(&c, &DenoiseConfig::default()).unwrap();
        for band in sel.bands().iter().filter(|b| !b.frozen) {
            assert!(band.k <= band.subband.len * 95 / 100);
        }
        assert!(sel.free_retained() as f64 <= 0.95 * sel.free_len() as f64);
    }
}
