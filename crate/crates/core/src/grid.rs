//! Integer grids of candidate bids and valuations.

use alloc::vec::Vec;

use crate::error::Error;

/// An inclusive integer grid `lo..=hi`, used both as the candidate-valuation
/// set V and the candidate-bid set B. Search procedures are restricted to the
/// grid; logged bids themselves stay real-valued.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Grid {
    lo: u32,
    hi: u32,
}

impl Grid {
    pub fn new(lo: u32, hi: u32) -> Result<Self, Error> {
        if lo > hi {
            return Err(Error::Empty("grid"));
        }
        Ok(Grid { lo, hi })
    }

    pub fn lo(&self) -> u32 {
        self.lo
    }

    pub fn hi(&self) -> u32 {
        self.hi
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min_value(&self) -> f64 {
        self.lo as f64
    }

    pub fn max_value(&self) -> f64 {
        self.hi as f64
    }

    /// Grid points in ascending order as f64 coins.
    pub fn points(&self) -> impl Iterator<Item = f64> {
        (self.lo..=self.hi).map(|v| v as f64)
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.points().collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        x == libm::trunc(x) && x >= self.lo as f64 && x <= self.hi as f64
    }

    /// Nearest grid point to `x` (round half away from zero, then clamp).
    pub fn round_to(&self, x: f64) -> f64 {
        libm::round(x).clamp(self.lo as f64, self.hi as f64)
    }
}

impl Default for Grid {
    /// The grid used in the experiment analysis: {1, 2, ..., 60}.
    fn default() -> Self {
        Grid { lo: 1, hi: 60 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_is_1_to_60() {
        let g = Grid::default();
        assert_eq!(g.len(), 60);
        assert_eq!(g.min_value(), 1.0);
        assert_eq!(g.max_value(), 60.0);
        assert!(g.contains(33.0));
        assert!(!g.contains(33.5));
        assert!(!g.contains(61.0));
    }

    #[test]
    fn round_to_clamps() {
        let g = Grid::default();
        assert_eq!(g.round_to(0.2), 1.0);
        assert_eq!(g.round_to(30.6), 31.0);
        assert_eq!(g.round_to(99.0), 60.0);
    }

    #[test]
    fn degenerate_grid_rejected() {
        assert!(Grid::new(5, 4).is_err());
        assert_eq!(Grid::new(5, 5).unwrap().len(), 1);
    }
}
