use super::field::{GridSpec, ScalarField};
use crate::analysis::{PlaneLabel, TrapSite};
use crate::error::{domain, Result};

/// Demagnifying relay between the array focal plane and the trap region.
///
/// Lateral coordinates scale by `M`, axial ones by `M²`. Planes on both sides
/// of the reimaged focal plane become accessible, so the stack is indexed
/// symmetrically around `T_0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reimaging {
    magnification: f64,
}

impl Reimaging {
    pub fn new(magnification: f64) -> Result<Self> {
        if !(magnification > 0.0) || !magnification.is_finite() {
            return domain(format!("magnification must be positive, got {magnification}"));
        }
        Ok(Reimaging { magnification })
    }

    pub fn magnification(&self) -> f64 {
        self.magnification
    }

    pub fn lateral(&self, x: f64) -> f64 {
        self.magnification * x
    }

    pub fn axial(&self, z: f64) -> f64 {
        self.magnification * self.magnification * z
    }

    /// Reimaged lattice pitch of an array with pitch `mla_pitch`.
    pub fn pitch(&self, mla_pitch: f64) -> f64 {
        self.lateral(mla_pitch)
    }

    pub fn talbot_length(&self, talbot_length_pre: f64) -> f64 {
        self.axial(talbot_length_pre)
    }

    /// Field in the reimaged frame; amplitudes rescale so power is unchanged.
    pub fn field(&self, field: &ScalarField) -> ScalarField {
        let m = self.magnification;
        let g = field.grid;
        let grid = GridSpec { nx: g.nx, ny: g.ny, dx: g.dx * m, dy: g.dy * m };
        ScalarField {
            grid,
            z: self.axial(field.z),
            amplitude: field.amplitude.iter().map(|a| a / m).collect(),
        }
    }

    pub fn sites(&self, sites: &[TrapSite]) -> Vec<TrapSite> {
        sites
            .iter()
            .map(|s| TrapSite {
                position: [self.lateral(s.position[0]), self.lateral(s.position[1]), self.axial(s.position[2])],
                waist: self.lateral(s.waist),
                ..s.clone()
            })
            .collect()
    }

    /// Planes `n/denominator` for `|n/denominator| ≤ max_order`, with their
    /// reimaged axial positions.
    pub fn plane_stack(&self, talbot_length_pre: f64, max_order: u32, denominator: u32) -> Result<Vec<(PlaneLabel, f64)>> {
        if !matches!(denominator, 1 | 2 | 4) {
            return domain(format!("plane denominator must be 1, 2 or 4, got {denominator}"));
        }
        let zt = self.talbot_length(talbot_length_pre);
        let k = (max_order * denominator) as i64;
        (-k..=k)
            .map(|n| {
                let label = PlaneLabel::new(n, denominator)?;
                Ok((label, label.value() * zt))
            })
            .collect()
    }
}
