use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{rayleigh_range, OpticalConfig};
use super::field::{GridSpec, ScalarField};
use crate::error::{Error, Result};

/// Minimum samples across the smallest waist.
pub(crate) const MIN_SAMPLES_PER_WAIST: f64 = 8.0;

/// One paraxial Gaussian beam of the array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianBeamlet {
    /// Lateral focus position at `focus_z`.
    pub center: [f64; 2],
    pub waist: f64,
    pub focus_z: f64,
    pub amplitude: f64,
    pub phase: f64,
    /// Propagation direction relative to the axis, per axis (paraxial angles).
    #[serde(default)]
    pub tilt: [f64; 2],
}

impl GaussianBeamlet {
    pub fn new(center: [f64; 2], waist: f64) -> Self {
        GaussianBeamlet { center, waist, focus_z: 0.0, amplitude: 1.0, phase: 0.0, tilt: [0.0, 0.0] }
    }
}

/// One transverse factor of a (possibly tilted) paraxial Gaussian beam.
///
/// Uses the `exp(+ikz)` convention with `q = (z - z_f) - i·z_R`; the product
/// of the x and y factors is `(w0/w)·exp(-r²/w²)·exp(ikr²/2R)·exp(-iψ)`.
#[derive(Clone, Copy)]
struct AxisProfile {
    k: f64,
    q: Complex64,
    prefactor: Complex64,
    /// Beam centre at this z.
    center: f64,
    tilt: f64,
    /// Lateral half-width beyond which the factor is below e^-36.
    reach: f64,
}

impl AxisProfile {
    fn new(center: f64, tilt: f64, waist: f64, wavelength: f64, dz: f64) -> Self {
        let k = 2.0 * std::f64::consts::PI / wavelength;
        let zr = rayleigh_range(waist, wavelength);
        let q = Complex64::new(dz, -zr);
        let prefactor = (Complex64::new(0.0, -zr) / q).sqrt()
            * Complex64::from_polar(1.0, -0.5 * k * tilt * tilt * dz);
        let w = waist * (1.0 + (dz / zr).powi(2)).sqrt();
        AxisProfile { k, q, prefactor, center: center + tilt * dz, tilt, reach: 6.0 * w }
    }

    fn eval(&self, x: f64) -> Complex64 {
        let u = x - self.center;
        if u.abs() > self.reach {
            return Complex64::new(0.0, 0.0);
        }
        self.prefactor
            * (Complex64::new(0.0, 0.5 * self.k * u * u) / self.q).exp()
            * Complex64::from_polar(1.0, self.k * self.tilt * x)
    }
}

fn check_sampling(grid: &GridSpec, min_waist: f64) -> Result<()> {
    let d = grid.dx.max(grid.dy);
    if min_waist < MIN_SAMPLES_PER_WAIST * d {
        return Err(Error::Sampling(format!(
            "grid spacing {d:e} m resolves waist {min_waist:e} m with fewer than {MIN_SAMPLES_PER_WAIST} samples"
        )));
    }
    Ok(())
}

/// Coherent superposition of analytic paraxial Gaussian beams at plane `z`.
pub fn beam_array_field(
    beamlets: &[GaussianBeamlet],
    wavelength: f64,
    grid: GridSpec,
    z: f64,
) -> Result<ScalarField> {
    if !(wavelength > 0.0) {
        return Err(Error::Domain(format!("wavelength must be positive, got {wavelength}")));
    }
    if let Some(b) = beamlets.iter().find(|b| !(b.waist > 0.0)) {
        return Err(Error::Domain(format!("beamlet waist must be positive, got {}", b.waist)));
    }
    let min_waist = beamlets.iter().map(|b| b.waist).fold(f64::INFINITY, f64::min);
    if beamlets.is_empty() {
        return Ok(ScalarField::zeros(grid, z));
    }
    check_sampling(&grid, min_waist)?;

    let k = 2.0 * std::f64::consts::PI / wavelength;
    let xs = grid.xs();
    let ys = grid.ys();
    // Per beamlet: x factors over the whole row and the complex weight.
    let profiles: Vec<(Vec<Complex64>, AxisProfile, Complex64)> = beamlets
        .iter()
        .map(|b| {
            let dz = z - b.focus_z;
            let px = AxisProfile::new(b.center[0], b.tilt[0], b.waist, wavelength, dz);
            let py = AxisProfile::new(b.center[1], b.tilt[1], b.waist, wavelength, dz);
            let row: Vec<Complex64> = xs.iter().map(|&x| px.eval(x)).collect();
            let weight = Complex64::from_polar(b.amplitude, b.phase + k * dz);
            (row, py, weight)
        })
        .collect();

    let nx = grid.nx;
    let mut amplitude = vec![Complex64::new(0.0, 0.0); grid.len()];
    amplitude.par_chunks_mut(nx).zip(ys.par_iter()).for_each(|(row, &y)| {
        for (fx, py, weight) in &profiles {
            let fy = py.eval(y);
            if fy == Complex64::new(0.0, 0.0) {
                continue;
            }
            let c = weight * fy;
            for (out, v) in row.iter_mut().zip(fx) {
                *out += c * v;
            }
        }
    });
    ScalarField::new(grid, z, amplitude)
}

/// Rectangular array of identical beamlets whose amplitudes factor into a
/// column weight times a row weight. The field is then an outer product of
/// two 1D sums, which makes large arrays and fine grids cheap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeBeamArray {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub weights_x: Vec<f64>,
    pub weights_y: Vec<f64>,
    pub waist: f64,
    pub wavelength: f64,
    pub focus_z: f64,
    pub tilt: [f64; 2],
    pub phase: f64,
}

/// Lattice indices `-(n/2) .. n - n/2`, so index 0 is on the axis.
pub(crate) fn centred_indices(n: usize) -> impl Iterator<Item = i64> {
    let lo = -((n / 2) as i64);
    lo..lo + n as i64
}

impl LatticeBeamArray {
    /// `n × n` beamlets at `(i·pitch, j·pitch)` with unit amplitude.
    pub fn square(n: usize, pitch: f64, waist: f64, wavelength: f64) -> Self {
        let pos: Vec<f64> = centred_indices(n).map(|i| i as f64 * pitch).collect();
        LatticeBeamArray {
            xs: pos.clone(),
            ys: pos,
            weights_x: vec![1.0; n],
            weights_y: vec![1.0; n],
            waist,
            wavelength,
            focus_z: 0.0,
            tilt: [0.0, 0.0],
            phase: 0.0,
        }
    }

    /// Beamlet array of the reimaged focal plane described by `config`.
    ///
    /// A tilt of the illumination by `θ` moves the focal spots by `M·f0·θ`
    /// and tilts every reimaged beamlet by `θ/M`.
    pub fn from_config(config: &OpticalConfig) -> Result<Self> {
        config.validate()?;
        let mut array = Self::square(
            config.lenslet_count,
            config.pitch_m,
            config.trap_waist_m,
            config.wavelength_m,
        );
        if let Some(w) = config.envelope_waist() {
            array = array.with_envelope(w);
        }
        if config.tilt_rad != [0.0, 0.0] {
            let f0 = config.lenslet_focal_m.ok_or_else(|| {
                Error::Config("tilted illumination needs lenslet_focal_m".into())
            })?;
            let m = config.demagnification;
            array = array
                .with_offset(m * f0 * config.tilt_rad[0], m * f0 * config.tilt_rad[1])
                .with_tilt([config.tilt_rad[0] / m, config.tilt_rad[1] / m]);
        }
        Ok(array)
    }

    /// Weights each beamlet by a Gaussian illumination amplitude
    /// `exp(-r²/w²)` sampled at its centre.
    pub fn with_envelope(mut self, envelope_waist: f64) -> Self {
        let g = |c: f64| (-(c / envelope_waist).powi(2)).exp();
        self.weights_x = self.xs.iter().zip(&self.weights_x).map(|(&c, &w)| w * g(c)).collect();
        self.weights_y = self.ys.iter().zip(&self.weights_y).map(|(&c, &w)| w * g(c)).collect();
        self
    }

    pub fn with_offset(mut self, dx: f64, dy: f64) -> Self {
        self.xs.iter_mut().for_each(|x| *x += dx);
        self.ys.iter_mut().for_each(|y| *y += dy);
        self
    }

    pub fn with_tilt(mut self, tilt: [f64; 2]) -> Self {
        self.tilt = tilt;
        self
    }

    pub fn len(&self) -> usize {
        self.xs.len() * self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn beamlets(&self) -> Vec<GaussianBeamlet> {
        let mut out = Vec::with_capacity(self.len());
        for (&y, &wy) in self.ys.iter().zip(&self.weights_y) {
            for (&x, &wx) in self.xs.iter().zip(&self.weights_x) {
                out.push(GaussianBeamlet {
                    center: [x, y],
                    waist: self.waist,
                    focus_z: self.focus_z,
                    amplitude: wx * wy,
                    phase: self.phase,
                    tilt: self.tilt,
                });
            }
        }
        out
    }

    fn axis_sum(&self, coords: &[f64], centers: &[f64], weights: &[f64], tilt: f64, dz: f64) -> Vec<Complex64> {
        let profiles: Vec<(AxisProfile, f64)> = centers
            .iter()
            .zip(weights)
            .map(|(&c, &w)| (AxisProfile::new(c, tilt, self.waist, self.wavelength, dz), w))
            .collect();
        coords
            .par_iter()
            .map(|&x| profiles.iter().map(|(p, w)| p.eval(x) * *w).sum())
            .collect()
    }

    pub fn field(&self, grid: GridSpec, z: f64) -> Result<ScalarField> {
        if !(self.waist > 0.0) || !(self.wavelength > 0.0) {
            return Err(Error::Domain("beam array needs positive waist and wavelength".into()));
        }
        check_sampling(&grid, self.waist)?;
        let dz = z - self.focus_z;
        let gx = self.axis_sum(&grid.xs(), &self.xs, &self.weights_x, self.tilt[0], dz);
        let gy = self.axis_sum(&grid.ys(), &self.ys, &self.weights_y, self.tilt[1], dz);
        let k = 2.0 * std::f64::consts::PI / self.wavelength;
        let carrier = Complex64::from_polar(1.0, self.phase + k * dz);
        let mut amplitude = vec![Complex64::new(0.0, 0.0); grid.len()];
        amplitude.par_chunks_mut(grid.nx).zip(gy.par_iter()).for_each(|(row, &fy)| {
            let c = carrier * fy;
            for (out, fx) in row.iter_mut().zip(&gx) {
                *out = c * fx;
            }
        });
        ScalarField::new(grid, z, amplitude)
    }
}
