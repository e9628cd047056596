use serde::{Deserialize, Serialize};

use super::Register;
use crate::analysis::PlaneLabel;
use crate::error::{domain, Result};

/// Second trapping beam on the same array, tilted to displace its lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterleaveSpec {
    /// Incidence angle on the array, per axis.
    pub tilt_rad: [f64; 2],
    pub lenslet_focal_m: f64,
    pub plane: PlaneLabel,
    /// Talbot length in front of the relay.
    pub talbot_length_pre_m: f64,
    pub magnification: f64,
    /// Detuning between the two beams; must be non-zero so they add
    /// incoherently.
    pub frequency_offset_hz: f64,
}

impl InterleaveSpec {
    /// Equal tilt on both axes: displacement along the lattice diagonal.
    pub fn diagonal(
        tilt: f64,
        lenslet_focal_m: f64,
        plane: PlaneLabel,
        talbot_length_pre_m: f64,
        magnification: f64,
        frequency_offset_hz: f64,
    ) -> Self {
        InterleaveSpec {
            tilt_rad: [tilt, tilt],
            lenslet_focal_m,
            plane,
            talbot_length_pre_m,
            magnification,
            frequency_offset_hz,
        }
    }

    /// `f0` enlarged by the plane's distance from the focal plane before the
    /// relay, `|n/d|·z_T,pre`.
    pub fn effective_focal_length(&self) -> f64 {
        self.lenslet_focal_m + self.plane.value().abs() * self.talbot_length_pre_m
    }

    /// Lateral displacement `M·θ·f_eff` per axis in the reimaged frame.
    pub fn displacement(&self) -> [f64; 2] {
        let l = self.effective_focal_length();
        [
            self.magnification * self.tilt_rad[0] * l,
            self.magnification * self.tilt_rad[1] * l,
        ]
    }

    fn check(&self) -> Result<()> {
        if !(self.magnification > 0.0) {
            return domain(format!("magnification must be positive, got {}", self.magnification));
        }
        if !(self.lenslet_focal_m > 0.0) || !(self.talbot_length_pre_m >= 0.0) {
            return domain("interleave needs a positive focal length and non-negative Talbot length");
        }
        if !(self.frequency_offset_hz > 0.0) {
            return domain("beams sharing a plane need a non-zero frequency offset");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Interleaved {
    pub register: Register,
    /// Displacement actually applied (after wrapping).
    pub displacement_m: [f64; 2],
    /// Set when the raw displacement reached a full pitch and was wrapped
    /// back into the unit cell.
    pub wrapped: bool,
}

/// Sublattice produced by the tilted beam described by `spec`, displaced
/// relative to `base`.
pub fn interleave(base: &Register, spec: &InterleaveSpec) -> Result<Interleaved> {
    spec.check()?;
    if spec.plane != base.plane {
        return domain(format!("interleave spec targets {} but base register is in {}", spec.plane, base.plane));
    }
    let raw = spec.displacement();
    let p = base.pitch_m;
    let mut wrapped = false;
    let mut d = raw;
    for v in d.iter_mut() {
        if v.abs() >= p {
            *v = v.rem_euclid(p);
            wrapped = true;
        }
    }
    if wrapped {
        log::warn!(
            "interleave displacement ({:e}, {:e}) m reaches the pitch {:e} m; wrapped to ({:e}, {:e}) m",
            raw[0], raw[1], p, d[0], d[1]
        );
    }
    Ok(Interleaved { register: base.translated(d, base.sublattice_id + 1), displacement_m: d, wrapped })
}
