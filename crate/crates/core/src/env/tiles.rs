//! Grid tile coding.
//!
//! Tiling `k` is shifted by `k / tilings` of a tile width along both axes.
//! A cell at `(row, col)` falls in tile `floor((coord + shift) / width)` per
//! axis, so every cell activates exactly one tile per tiling.

use crate::domain::FeatureVector;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct TileCoder {
    rows: usize,
    cols: usize,
    tilings: usize,
    tile_width: usize,
    tiles_per_row: usize,
    tiles_per_col: usize,
}

impl TileCoder {
    pub fn new(rows: usize, cols: usize, tilings: usize, tile_width: usize) -> Result<Self> {
        if rows == 0 || cols == 0 || tilings == 0 || tile_width == 0 {
            return Err(Error::InvalidConfig("tile coder extents must be positive".into()));
        }
        // Largest shifted coordinate is (n - 1) + (tilings - 1) / tilings * width.
        let span = |n: usize| ((n - 1) * tilings + (tilings - 1) * tile_width) / (tilings * tile_width) + 1;
        Ok(Self {
            rows,
            cols,
            tilings,
            tile_width,
            tiles_per_row: span(cols),
            tiles_per_col: span(rows),
        })
    }

    /// Four 2x2 tilings over an 11x11 grid.
    pub fn four_rooms() -> Self {
        Self::new(11, 11, 4, 2).expect("valid coder")
    }

    pub fn tilings(&self) -> usize {
        self.tilings
    }

    pub fn tiles_per_tiling(&self) -> usize {
        self.tiles_per_row * self.tiles_per_col
    }

    pub fn dim(&self) -> usize {
        self.tilings * self.tiles_per_tiling()
    }

    /// Active feature indices for a grid position. Walls are checked by the
    /// caller, which knows the layout.
    pub fn encode_position(&self, row: usize, col: usize) -> Result<FeatureVector> {
        if row >= self.rows || col >= self.cols {
            return Err(Error::InvalidState(row * self.cols + col));
        }
        let per = self.tiles_per_tiling();
        // Shifts are k / tilings of a tile; scale coordinates by `tilings` to stay in integers.
        let scaled_width = self.tilings * self.tile_width;
        let active = (0..self.tilings)
            .map(|k| {
                let shift = k * self.tile_width;
                let tr = (row * self.tilings + shift) / scaled_width;
                let tc = (col * self.tilings + shift) / scaled_width;
                k * per + tr * self.tiles_per_row + tc
            })
            .collect();
        FeatureVector::binary(self.dim(), active)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_for_four_rooms() {
        let c = TileCoder::four_rooms();
        // Shifted coordinates reach 10 + 1.5 = 11.5, i.e. tile index 5.
        assert_eq!(c.tiles_per_tiling(), 36);
        assert_eq!(c.dim(), 144);
    }

    #[test]
    fn one_feature_per_tiling() {
        let c = TileCoder::four_rooms();
        for r in 0..11 {
            for col in 0..11 {
                let x = c.encode_position(r, col).unwrap();
                let idx = x.active().unwrap();
                assert_eq!(idx.len(), 4);
                for (k, &i) in idx.iter().enumerate() {
                    assert!(i < c.dim());
                    assert_eq!(i / c.tiles_per_tiling(), k);
                }
            }
        }
        assert!(c.encode_position(11, 0).is_err());
    }

    #[test]
    fn encoding_is_deterministic() {
        let c = TileCoder::four_rooms();
        assert_eq!(c.encode_position(3, 7).unwrap(), c.encode_position(3, 7).unwrap());
    }
}
