use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform sampling grid centred on the optical axis.
///
/// Sample `ix` sits at `x = (ix - nx/2)·dx`, so the axis passes through a
/// sample for every grid size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::Sampling(format!("grid needs at least 2×2 samples, got {nx}×{ny}")));
        }
        if !(dx > 0.0) || !(dy > 0.0) {
            return Err(Error::Sampling(format!("grid spacing must be positive, got {dx}, {dy}")));
        }
        Ok(GridSpec { nx, ny, dx, dy })
    }

    pub fn square(n: usize, d: f64) -> Result<Self> {
        Self::new(n, n, d, d)
    }

    /// Square power-of-two grid for an array of `cells` sites per axis with
    /// `samples_per_waist` samples across `waist` and `guard_cells` pitches of
    /// margin in total.
    pub fn for_array(
        pitch: f64,
        cells: usize,
        waist: f64,
        samples_per_waist: f64,
        guard_cells: f64,
    ) -> Result<Self> {
        if !(samples_per_waist > 0.0) {
            return Err(Error::Sampling("samples_per_waist must be positive".into()));
        }
        let d = waist / samples_per_waist;
        let extent = (cells.saturating_sub(1) as f64 + guard_cells) * pitch;
        let n = ((extent / d).ceil() as usize).max(2).next_power_of_two();
        Self::square(n, d)
    }

    /// Grid that spans exactly `cells` pitches per axis, for periodic boundaries.
    pub fn periodic(pitch: f64, cells: usize, n: usize) -> Result<Self> {
        Self::square(n, cells as f64 * pitch / n as f64)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x(&self, ix: usize) -> f64 {
        (ix as f64 - (self.nx / 2) as f64) * self.dx
    }

    pub fn y(&self, iy: usize) -> f64 {
        (iy as f64 - (self.ny / 2) as f64) * self.dy
    }

    /// Fractional sample coordinates of a physical position.
    pub fn to_sample(&self, x: f64, y: f64) -> (f64, f64) {
        (x / self.dx + (self.nx / 2) as f64, y / self.dy + (self.ny / 2) as f64)
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        (0..self.ny).map(|i| self.y(i)).collect()
    }

    pub fn extent_x(&self) -> f64 {
        self.nx as f64 * self.dx
    }

    pub fn extent_y(&self) -> f64 {
        self.ny as f64 * self.dy
    }

    pub fn same_geometry(&self, other: &GridSpec) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.dx == other.dx && self.dy == other.dy
    }
}

/// Complex amplitude sampled on a grid at axial position `z`, row-major
/// (`amplitude[iy * nx + ix]`).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: GridSpec,
    pub z: f64,
    pub amplitude: Vec<Complex64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, z: f64, amplitude: Vec<Complex64>) -> Result<Self> {
        if amplitude.len() != grid.len() {
            return Err(Error::Sampling(format!(
                "amplitude has {} samples, grid needs {}",
                amplitude.len(),
                grid.len()
            )));
        }
        Ok(ScalarField { grid, z, amplitude })
    }

    pub fn zeros(grid: GridSpec, z: f64) -> Self {
        ScalarField { grid, z, amplitude: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    /// Fills the grid from a function of `(x, y)`.
    pub fn from_fn(grid: GridSpec, z: f64, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let xs = grid.xs();
        let mut amplitude = Vec::with_capacity(grid.len());
        for iy in 0..grid.ny {
            let y = grid.y(iy);
            amplitude.extend(xs.iter().map(|&x| f(x, y)));
        }
        ScalarField { grid, z, amplitude }
    }

    pub fn at(&self, ix: usize, iy: usize) -> Complex64 {
        self.amplitude[iy * self.grid.nx + ix]
    }

    /// Total power `Σ|E|²·dx·dy`.
    pub fn power(&self) -> f64 {
        self.amplitude.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dx * self.grid.dy
    }

    pub fn intensity(&self) -> IntensityMap {
        IntensityMap {
            grid: self.grid,
            z: self.z,
            values: self.amplitude.iter().map(|a| a.norm_sqr()).collect(),
        }
    }

    /// Pointwise product, e.g. illumination times a transmission mask.
    pub fn multiply(&self, other: &ScalarField) -> Result<ScalarField> {
        if !self.grid.same_geometry(&other.grid) {
            return Err(Error::Sampling("fields live on different grids".into()));
        }
        let amplitude = self.amplitude.iter().zip(&other.amplitude).map(|(a, b)| a * b).collect();
        Ok(ScalarField { grid: self.grid, z: self.z, amplitude })
    }
}

/// Intensity raster, row-major like [`ScalarField`].
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityMap {
    pub grid: GridSpec,
    pub z: f64,
    pub values: Vec<f64>,
}

impl IntensityMap {
    pub fn new(grid: GridSpec, z: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Sampling(format!(
                "raster has {} samples, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(IntensityMap { grid, z, values })
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.grid.nx + ix]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> IntensityMap {
        IntensityMap {
            grid: self.grid,
            z: self.z,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Circular shift by whole samples: content at `(ix, iy)` moves to
    /// `(ix + sx, iy + sy)` modulo the grid.
    pub fn rolled(&self, sx: isize, sy: isize) -> IntensityMap {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let mut values = vec![0.0; self.values.len()];
        for iy in 0..ny {
            let ty = (iy as isize + sy).rem_euclid(ny as isize) as usize;
            for ix in 0..nx {
                let tx = (ix as isize + sx).rem_euclid(nx as isize) as usize;
                values[ty * nx + tx] = self.values[iy * nx + ix];
            }
        }
        IntensityMap { grid: self.grid, z: self.z, values }
    }

    /// Row of samples closest to `y`.
    pub fn row_near(&self, y: f64) -> &[f64] {
        let (_, sy) = self.grid.to_sample(0.0, y);
        let iy = (sy.round().max(0.0) as usize).min(self.grid.ny - 1);
        &self.values[iy * self.grid.nx..(iy + 1) * self.grid.nx]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_centred() {
        let g = GridSpec::square(8, 0.5).unwrap();
        assert_eq!(g.x(4), 0.0);
        assert_eq!(g.x(0), -2.0);
        assert_eq!(g.to_sample(0.0, 0.0), (4.0, 4.0));
    }

    #[test]
    fn array_grid_is_power_of_two_and_covers_span() {
        let g = GridSpec::for_array(14.1e-6, 16, 1.45e-6, 16.0, 8.0).unwrap();
        assert!(g.nx.is_power_of_two());
        assert!(g.extent_x() >= 23.0 * 14.1e-6);
        assert!((g.dx - 1.45e-6 / 16.0).abs() < 1e-18);
    }

    #[test]
    fn rejects_mismatched_amplitude() {
        let g = GridSpec::square(4, 1.0).unwrap();
        assert!(ScalarField::new(g, 0.0, vec![Complex64::new(1.0, 0.0); 3]).is_err());
    }

    #[test]
    fn roll_moves_content() {
        let g = GridSpec::square(4, 1.0).unwrap();
        let mut v = vec![0.0; 16];
        v[5] = 1.0;
        let m = IntensityMap::new(g, 0.0, v).unwrap().rolled(1, -2);
        assert_eq!(m.at(2, 3), 1.0);
    }
}
