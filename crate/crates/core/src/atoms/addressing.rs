use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{AtomState, Spin};
use crate::error::{domain, Error, Result};
use crate::register::Register;
use crate::rng::rng_from_seed;

/// Spin-flip probability on unaddressed sites when nothing else is known.
pub const DEFAULT_CROSSTALK: f64 = 0.02;

fn default_crosstalk() -> f64 {
    DEFAULT_CROSSTALK
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AddressingModel {
    pub transfer_prob_at_unit_intensity: f64,
    /// Relative addressing intensity per site of the addressed register, in
    /// its site order. Empty means unit intensity everywhere.
    #[serde(default)]
    pub addressing_intensity: Vec<f64>,
    #[serde(default = "default_crosstalk")]
    pub crosstalk_floor: f64,
}

impl AddressingModel {
    pub fn uniform(transfer: f64, crosstalk: f64) -> Self {
        AddressingModel { transfer_prob_at_unit_intensity: transfer, addressing_intensity: Vec::new(), crosstalk_floor: crosstalk }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("transfer probability", self.transfer_prob_at_unit_intensity), ("crosstalk floor", self.crosstalk_floor)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        if self.addressing_intensity.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::Config("addressing intensities must be non-negative".into()));
        }
        Ok(())
    }
}

/// Drives F2 → F3 on the sites of `addressed` with probability
/// `transfer·intensity` and on all other sites with the crosstalk floor.
/// Occupancy never changes. One uniform number is drawn per site in site
/// order.
pub fn address_subregister(state: &AtomState, addressed: &Register, model: &AddressingModel, seed: u64) -> Result<AtomState> {
    model.validate()?;
    let idx = state.sites().indices_of(addressed)?;
    if !model.addressing_intensity.is_empty() && model.addressing_intensity.len() != idx.len() {
        return domain(format!(
            "{} addressing intensities for {} addressed sites",
            model.addressing_intensity.len(),
            idx.len()
        ));
    }
    let mut p = vec![model.crosstalk_floor; state.len()];
    for (n, &k) in idx.iter().enumerate() {
        let intensity = model.addressing_intensity.get(n).copied().unwrap_or(1.0);
        p[k] = (model.transfer_prob_at_unit_intensity * intensity).clamp(0.0, 1.0);
    }
    let mut rng = rng_from_seed(seed);
    let mut out = state.clone();
    out.seed = seed;
    for (k, &pk) in p.iter().enumerate() {
        let u: f64 = rng.random();
        if u < pk && out.spin(k) == Some(Spin::F2) {
            out.set_spin(k, Spin::F3);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::{state_selective_detect, SiteSet};
    use super::*;
    use crate::analysis::PlaneLabel;
    use crate::units::UM;

    fn setup() -> (Register, Register, AtomState) {
        let a = Register::grid(14.1 * UM, PlaneLabel::half(1), 3, 3).unwrap();
        let b = a.translated([7.05 * UM, 7.05 * UM], 1);
        let sites = SiteSet::from_registers(&[a.clone(), b.clone()]).unwrap();
        let st = AtomState::from_occupancy(sites, 0, &[true; 18]).unwrap();
        (a, b, st)
    }

    #[test]
    fn perfect_addressing_flips_only_the_subregister() {
        let (a, _, st) = setup();
        let out = address_subregister(&st, &a, &AddressingModel::uniform(1.0, 0.0), 4).unwrap();
        let det = state_selective_detect(&out);
        assert_eq!(&det[..9], &[false; 9]);
        assert_eq!(&det[9..], &[true; 9]);
        assert_eq!(out.occupancy(), st.occupancy());
    }

    #[test]
    fn f3_atoms_stay_f3() {
        let (a, _, st) = setup();
        let st = super::super::initialize_spins(&st, Spin::F3);
        let out = address_subregister(&st, &a, &AddressingModel::uniform(1.0, 1.0), 4).unwrap();
        assert_eq!(out.atoms(), st.atoms());
    }

    #[test]
    fn intensity_scales_transfer() {
        let (a, _, st) = setup();
        let mut m = AddressingModel::uniform(1.0, 0.0);
        m.addressing_intensity = vec![0.0; 9];
        let out = address_subregister(&st, &a, &m, 4).unwrap();
        assert_eq!(out.atoms(), st.atoms());
        m.addressing_intensity = vec![0.0; 4];
        assert!(address_subregister(&st, &a, &m, 4).is_err());
    }

    #[test]
    fn foreign_register_is_rejected() {
        let (a, _, st) = setup();
        let c = a.translated([1.0 * UM, 0.0], 5);
        assert!(address_subregister(&st, &c, &AddressingModel::uniform(1.0, 0.0), 4).is_err());
    }
}
