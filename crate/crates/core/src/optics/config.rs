use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Axial self-imaging period `2a²/λ` of a lattice with pitch `a`.
pub fn talbot_length(pitch: f64, wavelength: f64) -> Result<f64> {
    if !(pitch > 0.0) || !(wavelength > 0.0) {
        return domain(format!(
            "talbot length needs positive pitch and wavelength, got a={pitch}, λ={wavelength}"
        ));
    }
    Ok(2.0 * pitch * pitch / wavelength)
}

/// Rayleigh range `π w0²/λ`.
pub fn rayleigh_range(waist: f64, wavelength: f64) -> f64 {
    std::f64::consts::PI * waist * waist / wavelength
}

fn default_demagnification() -> f64 {
    1.0
}

fn default_beam_count() -> usize {
    1
}

fn default_lenslet_count() -> usize {
    16
}

/// Geometry and optics of the microlens source and its relay.
///
/// `pitch_m` and `trap_waist_m` refer to the reimaged lattice (the frame in
/// which traps live); `mla_pitch_m`, `lenslet_*` and `illumination_waist_m`
/// refer to the physical array before reimaging.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpticalConfig {
    pub wavelength_m: f64,
    pub pitch_m: f64,
    #[serde(default)]
    pub mla_pitch_m: Option<f64>,
    #[serde(default)]
    pub lenslet_focal_m: Option<f64>,
    #[serde(default)]
    pub lenslet_diameter_m: Option<f64>,
    pub trap_waist_m: f64,
    /// Illumination waist at the array; `None` means flat illumination.
    #[serde(default)]
    pub illumination_waist_m: Option<f64>,
    #[serde(default = "default_demagnification")]
    pub demagnification: f64,
    /// Incidence angle of the trapping beam on the array, per axis.
    #[serde(default)]
    pub tilt_rad: [f64; 2],
    #[serde(default = "default_beam_count")]
    pub beam_count: usize,
    /// Lenslets per axis that carry light.
    #[serde(default = "default_lenslet_count")]
    pub lenslet_count: usize,
    #[serde(default)]
    pub interspace_transmission: f64,
}

impl OpticalConfig {
    /// 14.1 µm lattice at 798.6 nm from a 30 µm array demagnified by 0.47.
    pub fn dense_lattice() -> Self {
        OpticalConfig {
            wavelength_m: 798.6e-9,
            pitch_m: 14.1e-6,
            mla_pitch_m: Some(30.0e-6),
            lenslet_focal_m: None,
            lenslet_diameter_m: None,
            trap_waist_m: 1.45e-6,
            illumination_waist_m: Some(200e-6),
            demagnification: 0.47,
            tilt_rad: [0.0, 0.0],
            beam_count: 1,
            lenslet_count: 16,
            interspace_transmission: 0.0,
        }
    }

    /// 10.3 µm lattice at 796.3 nm from a 110 µm array.
    pub fn assembly_lattice() -> Self {
        OpticalConfig {
            wavelength_m: 796.3e-9,
            pitch_m: 10.3e-6,
            mla_pitch_m: Some(110.0e-6),
            lenslet_focal_m: None,
            lenslet_diameter_m: Some(106e-6),
            trap_waist_m: 1.45e-6,
            illumination_waist_m: Some(1923e-6),
            demagnification: 10.3 / 110.0,
            tilt_rad: [0.0, 0.0],
            beam_count: 1,
            lenslet_count: 19,
            interspace_transmission: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("wavelength_m", self.wavelength_m),
            ("pitch_m", self.pitch_m),
            ("trap_waist_m", self.trap_waist_m),
            ("demagnification", self.demagnification),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [
            ("mla_pitch_m", self.mla_pitch_m),
            ("lenslet_focal_m", self.lenslet_focal_m),
            ("lenslet_diameter_m", self.lenslet_diameter_m),
            ("illumination_waist_m", self.illumination_waist_m),
        ] {
            if let Some(v) = v {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::Config(format!("{name} must be positive, got {v}")));
                }
            }
        }
        if let Some(mla) = self.mla_pitch_m {
            let expected = self.demagnification * mla;
            if ((self.pitch_m - expected) / expected).abs() > 1e-6 {
                return Err(Error::Config(format!(
                    "pitch_m {} inconsistent with demagnification × mla_pitch_m = {}",
                    self.pitch_m, expected
                )));
            }
        }
        if self.beam_count == 0 || self.lenslet_count == 0 {
            return Err(Error::Config("beam_count and lenslet_count must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.interspace_transmission) {
            return Err(Error::Config(format!(
                "interspace_transmission must lie in [0,1], got {}",
                self.interspace_transmission
            )));
        }
        Ok(())
    }

    /// Pitch of the physical array, given or inferred from `pitch_m / M`.
    pub fn mla_pitch(&self) -> f64 {
        self.mla_pitch_m.unwrap_or(self.pitch_m / self.demagnification)
    }

    /// Talbot length of the reimaged lattice.
    pub fn talbot_length(&self) -> Result<f64> {
        talbot_length(self.pitch_m, self.wavelength_m)
    }

    /// Talbot length in front of the relay optics.
    pub fn talbot_length_pre(&self) -> Result<f64> {
        talbot_length(self.mla_pitch(), self.wavelength_m)
    }

    pub fn rayleigh_range(&self) -> f64 {
        rayleigh_range(self.trap_waist_m, self.wavelength_m)
    }

    /// Illumination waist expressed in the reimaged frame.
    pub fn envelope_waist(&self) -> Option<f64> {
        self.illumination_waist_m.map(|w| w * self.demagnification)
    }
}
