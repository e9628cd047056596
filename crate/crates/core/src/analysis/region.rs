use serde::{Deserialize, Serialize};

use crate::optics::GridSpec;

/// Axis-aligned lateral window, inclusive bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl Region {
    pub fn new(x: [f64; 2], y: [f64; 2]) -> Self {
        Region { x, y }
    }

    /// Central half of a square array with lattice indices
    /// `-(cells/2) .. cells - cells/2`, padded by half a pitch so that border
    /// sites are not cut in half.
    pub fn central_half(pitch: f64, cells: usize) -> Self {
        let lo = -((cells / 2) as f64);
        let hi = lo + cells as f64 - 1.0;
        let centre = 0.5 * (lo + hi) * pitch;
        let half = 0.25 * (hi - lo) * pitch + 0.5 * pitch;
        Region { x: [centre - half, centre + half], y: [centre - half, centre + half] }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x[0] && x <= self.x[1] && y >= self.y[0] && y <= self.y[1]
    }

    /// Half-open sample index ranges `[ix0, ix1) × [iy0, iy1)` covered by the
    /// region, clamped to the grid.
    pub fn sample_rect(&self, grid: &GridSpec) -> (usize, usize, usize, usize) {
        let (x0, y0) = grid.to_sample(self.x[0], self.y[0]);
        let (x1, y1) = grid.to_sample(self.x[1], self.y[1]);
        let clamp = |v: f64, n: usize| (v.max(0.0) as usize).min(n);
        (
            clamp(x0.ceil(), grid.nx),
            clamp(x1.floor() + 1.0, grid.nx),
            clamp(y0.ceil(), grid.ny),
            clamp(y1.floor() + 1.0, grid.ny),
        )
    }
}
