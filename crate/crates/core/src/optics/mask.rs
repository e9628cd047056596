use num_complex::Complex64;

use super::beam::centred_indices;
use super::config::OpticalConfig;
use super::field::{GridSpec, ScalarField};
use crate::error::{Error, Result};

/// Complex transmission of the microlens array on a grid in the array plane.
///
/// Inside each circular lenslet aperture the transmission is the thin-lens
/// phase `exp(−iπr²/(λf0))` about the lenslet centre (unit phase when no
/// focal length is configured); elsewhere it is the flat
/// `interspace_transmission`.
pub fn mla_phase_mask(config: &OpticalConfig, grid: GridSpec) -> Result<ScalarField> {
    config.validate()?;
    let pitch = config.mla_pitch();
    let diameter = config.lenslet_diameter_m.unwrap_or(pitch);
    if diameter > pitch * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "lenslet diameter {diameter:e} m exceeds array pitch {pitch:e} m"
        )));
    }
    let mut idx = centred_indices(config.lenslet_count);
    let lo = idx.next().unwrap_or(0);
    let hi = lo + config.lenslet_count as i64 - 1;
    let r_ap2 = (0.5 * diameter).powi(2);
    let outside = Complex64::new(config.interspace_transmission, 0.0);
    let chirp = config
        .lenslet_focal_m
        .map(|f0| -std::f64::consts::PI / (config.wavelength_m * f0));
    let nearest = |c: f64| ((c / pitch).round() as i64).clamp(lo, hi) as f64 * pitch;

    Ok(ScalarField::from_fn(grid, 0.0, |x, y| {
        let (dx, dy) = (x - nearest(x), y - nearest(y));
        let r2 = dx * dx + dy * dy;
        if r2 > r_ap2 {
            return outside;
        }
        match chirp {
            Some(c) => Complex64::from_polar(1.0, c * r2),
            None => Complex64::new(1.0, 0.0),
        }
    }))
}

/// Trapping beam incident on the array: Gaussian amplitude `exp(−r²/w²)`
/// (flat when no waist is configured) with the linear phase of the tilt.
pub fn illumination_field(config: &OpticalConfig, grid: GridSpec) -> Result<ScalarField> {
    config.validate()?;
    let k = 2.0 * std::f64::consts::PI / config.wavelength_m;
    let [tx, ty] = config.tilt_rad;
    let w = config.illumination_waist_m;
    Ok(ScalarField::from_fn(grid, 0.0, |x, y| {
        let a = w.map_or(1.0, |w| (-(x * x + y * y) / (w * w)).exp());
        Complex64::from_polar(a, k * (tx * x + ty * y))
    }))
}
