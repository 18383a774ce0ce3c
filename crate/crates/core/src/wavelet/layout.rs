use super::WaveletError;

/// Which part of a decomposition a subband holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// Coarsest low-pass band of a 1D decomposition.
    Scaling,
    /// 1D high-pass band.
    Detail,
    /// Coarsest low-pass band of a 2D decomposition.
    Approx,
    /// Low-pass along rows, high-pass along columns.
    Horizontal,
    /// High-pass along rows, low-pass along columns.
    Vertical,
    Diagonal,
}

impl Orientation {
    pub fn is_detail(self) -> bool {
        !matches!(self, Orientation::Scaling | Orientation::Approx)
    }
}

/// One contiguous block of the flat coefficient storage.
///
/// `level` counts from the finest scale: level 1 details are the
/// half-resolution (1D) or quarter-resolution (2D) bands. The scaling or
/// approximation band carries the decomposition depth as its level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Subband {
    pub level: usize,
    pub orientation: Orientation,
    pub offset: usize,
    pub len: usize,
    /// Block extent `(rows, cols)`; 1D bands are `(1, len)`.
    pub shape: (usize, usize),
}

impl Subband {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len
    }
}

/// Extent of the transformed data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extent {
    OneD(usize),
    TwoD { rows: usize, cols: usize },
}

/// Subband bookkeeping for a flat coefficient vector.
///
/// Storage order is coarse to fine: the scaling (approximation) band first,
/// then the detail bands from the deepest level down to level 1. In 2D each
/// level stores its horizontal, vertical and diagonal blocks in that order,
/// each block row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubbandLayout {
    extent: Extent,
    levels: usize,
    subbands: Vec<Subband>,
}

impl SubbandLayout {
    pub fn one_d(n: usize, levels: usize) -> Result<Self, WaveletError> {
        check_levels(n, levels)?;
        let coarse = n >> levels;
        let mut subbands = vec![Subband {
            level: levels,
            orientation: Orientation::Scaling,
            offset: 0,
            len: coarse,
            shape: (1, coarse),
        }];
        let mut offset = coarse;
        for level in (1..=levels).rev() {
            let len = n >> level;
            subbands.push(Subband {
                level,
                orientation: Orientation::Detail,
                offset,
                len,
                shape: (1, len),
            });
            offset += len;
        }
        Ok(Self {
            extent: Extent::OneD(n),
            levels,
            subbands,
        })
    }

    pub fn two_d(rows: usize, cols: usize, levels: usize) -> Result<Self, WaveletError> {
        check_levels(rows, levels)?;
        check_levels(cols, levels)?;
        let (r0, c0) = (rows >> levels, cols >> levels);
        let mut subbands = vec![Subband {
            level: levels,
            orientation: Orientation::Approx,
            offset: 0,
            len: r0 * c0,
            shape: (r0, c0),
        }];
        let mut offset = r0 * c0;
        for level in (1..=levels).rev() {
            let shape = (rows >> level, cols >> level);
            for orientation in [
                Orientation::Horizontal,
                Orientation::Vertical,
                Orientation::Diagonal,
            ] {
                let len = shape.0 * shape.1;
                subbands.push(Subband {
                    level,
                    orientation,
                    offset,
                    len,
                    shape,
                });
                offset += len;
            }
        }
        Ok(Self {
            extent: Extent::TwoD { rows, cols },
            levels,
            subbands,
        })
    }

    /// A layout with a single free band covering all `n` values. Useful for
    /// scoring raw coefficient vectors that did not come from a transform.
    pub fn single(n: usize) -> Self {
        Self {
            extent: Extent::OneD(n),
            levels: 0,
            subbands: vec![Subband {
                level: 1,
                orientation: Orientation::Detail,
                offset: 0,
                len: n,
                shape: (1, n),
            }],
        }
    }

    /// Builds a 1D layout from explicit band lengths (all detail bands), in
    /// storage order. Lets tests construct arbitrary subband structures.
    pub fn from_band_lengths(lengths: &[usize]) -> Self {
        let mut offset = 0;
        let subbands = lengths
            .iter()
            .enumerate()
            .map(|(i, &len)| {
                let band = Subband {
                    level: lengths.len() - i,
                    orientation: Orientation::Detail,
                    offset,
                    len,
                    shape: (1, len),
                };
                offset += len;
                band
            })
            .collect();
        Self {
            extent: Extent::OneD(offset),
            levels: 0,
            subbands,
        }
    }

    pub fn extent(&self) -> Extent {
        self.extent
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn subbands(&self) -> &[Subband] {
        &self.subbands
    }

    pub fn len(&self) -> usize {
        match self.extent {
            Extent::OneD(n) => n,
            Extent::TwoD { rows, cols } => rows * cols,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Finest-scale band used for noise estimation: the level-1 detail in
    /// 1D, the level-1 diagonal block in 2D.
    pub fn finest_detail(&self) -> Option<&Subband> {
        let wanted = match self.extent {
            Extent::OneD(_) => Orientation::Detail,
            Extent::TwoD { .. } => Orientation::Diagonal,
        };
        self.subbands
            .iter()
            .filter(|b| b.orientation == wanted)
            .min_by_key(|b| b.level)
    }
}

pub(crate) fn check_levels(n: usize, levels: usize) -> Result<(), WaveletError> {
    if n == 0 || !n.is_power_of_two() {
        return Err(WaveletError::NotPowerOfTwo(n));
    }
    if levels == 0 {
        return Err(WaveletError::ZeroLevels);
    }
    let max = n.trailing_zeros() as usize;
    if levels > max {
        return Err(WaveletError::TooManyLevels { levels, max });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_tiles(layout: &SubbandLayout) {
        let mut covered = vec![0u8; layout.len()];
        for b in layout.subbands() {
            for i in b.range() {
                covered[i] += 1;
            }
            assert_eq!(b.len, b.shape.0 * b.shape.1);
        }
        assert!(covered.iter().all(|&c| c == 1));
    }

    #[test]
    fn one_d_partitions_exactly() {
        for j in 1..=11 {
            let n = 1 << j;
            for levels in 1..=j {
                let layout = SubbandLayout::one_d(n, levels).unwrap();
                assert_tiles(&layout);
                assert_eq!(layout.subbands().len(), levels + 1);
                // dyadic: each coarser detail band is half the next finer one
                let details: Vec<_> = layout.subbands()[1..].iter().map(|b| b.len).collect();
                for w in details.windows(2) {
                    assert_eq!(w[1], 2 * w[0]);
                }
            }
        }
    }

    #[test]
    fn two_d_partitions_exactly() {
        let layout = SubbandLayout::two_d(32, 64, 4).unwrap();
        assert_tiles(&layout);
        assert_eq!(layout.subbands().len(), 13);
        assert_eq!(layout.subbands()[0].shape, (2, 4));
        let finest = layout.finest_detail().unwrap();
        assert_eq!(finest.orientation, Orientation::Diagonal);
        assert_eq!(finest.shape, (16, 32));
    }

    #[test]
    fn rejects_bad_extents() {
        assert!(matches!(
            SubbandLayout::one_d(12, 1),
            Err(WaveletError::NotPowerOfTwo(12))
        ));
        assert!(matches!(
            SubbandLayout::one_d(8, 4),
            Err(WaveletError::TooManyLevels { levels: 4, max: 3 })
        ));
        assert!(SubbandLayout::one_d(8, 0).is_err());
    }
}
