use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{AtomState, SiteSet};
use crate::analysis::TrapSite;
use crate::error::{domain, Error, Result};
use crate::register::Register;
use crate::rng::rng_from_seed;

fn default_exponent() -> f64 {
    2.0
}

/// Single-shot loading probability as a function of relative trap depth:
/// `p = p_max·depth^γ`, zero below `depth_cutoff`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadingModel {
    pub p_max: f64,
    #[serde(default = "default_exponent")]
    pub depth_exponent: f64,
    #[serde(default)]
    pub depth_cutoff: f64,
}

impl LoadingModel {
    /// Same probability `p` on every site with non-zero depth.
    pub fn uniform(p: f64) -> Self {
        LoadingModel { p_max: p, depth_exponent: 0.0, depth_cutoff: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_max) {
            return Err(Error::Config(format!("p_max must lie in [0, 1], got {}", self.p_max)));
        }
        if !(self.depth_exponent >= 0.0) {
            return Err(Error::Config(format!("depth_exponent must be >= 0, got {}", self.depth_exponent)));
        }
        if !(0.0..1.0).contains(&self.depth_cutoff) {
            return Err(Error::Config(format!("depth_cutoff must lie in [0, 1), got {}", self.depth_cutoff)));
        }
        Ok(())
    }

    pub fn probability(&self, rel_depth: f64) -> f64 {
        if rel_depth < self.depth_cutoff || !(rel_depth > 0.0) {
            return 0.0;
        }
        (self.p_max * rel_depth.min(1.0).powf(self.depth_exponent)).clamp(0.0, 1.0)
    }
}

/// Relative depth of each site of `sites`, taken from the nearest trap within
/// a quarter pitch.
pub fn trap_depths(sites: &SiteSet, traps: &[TrapSite]) -> Result<Vec<f64>> {
    let tol = 0.25 * sites.pitch();
    sites
        .positions()
        .iter()
        .zip(sites.keys())
        .map(|(p, key)| {
            traps
                .iter()
                .map(|t| ((t.position[0] - p[0]).hypot(t.position[1] - p[1]), t.rel_depth))
                .filter(|(d, _)| *d <= tol)
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .map(|(_, depth)| depth)
                .ok_or_else(|| Error::Domain(format!("no trap within {tol:e} m of site ({}, {})", key.i, key.j)))
        })
        .collect()
}

/// Gaussian depth envelope `exp(−2r²/w²)` of an illumination with 1/e²
/// radius `waist`, centred on the optical axis.
pub fn envelope_depths(sites: &SiteSet, waist: f64) -> Vec<f64> {
    sites
        .positions()
        .iter()
        .map(|p| (-2.0 * (p[0] * p[0] + p[1] * p[1]) / (waist * waist)).exp())
        .collect()
}

/// Independent Bernoulli draw per site. One uniform number is drawn for
/// every site in site order, occupied or not, so equal seeds give aligned
/// streams across models.
pub fn load_with_depths(sites: Arc<SiteSet>, depths: &[f64], model: &LoadingModel, seed: u64) -> Result<AtomState> {
    model.validate()?;
    if depths.len() != sites.len() {
        return domain(format!("{} depths for {} sites", depths.len(), sites.len()));
    }
    let mut rng = rng_from_seed(seed);
    let mut state = AtomState::empty(sites, seed);
    for (k, &d) in depths.iter().enumerate() {
        let u: f64 = rng.random();
        if u < model.probability(d) {
            state.fill(k);
        }
    }
    Ok(state)
}

/// Loads `register` with depths read off the extracted `traps`.
pub fn load_atoms(register: &Register, traps: &[TrapSite], model: &LoadingModel, seed: u64) -> Result<AtomState> {
    let sites = SiteSet::from_register(register);
    let depths = trap_depths(&sites, traps)?;
    load_with_depths(sites, &depths, model, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::PlaneLabel;
    use crate::units::UM;

    fn sites(n: usize) -> Arc<SiteSet> {
        SiteSet::from_register(&Register::grid(10.3 * UM, PlaneLabel::ZERO, n, n).unwrap())
    }

    #[test]
    fn certain_loading_fills_everything() {
        let s = sites(5);
        let st = load_with_depths(s.clone(), &[0.3; 25], &LoadingModel { p_max: 1.0, depth_exponent: 0.0, depth_cutoff: 0.0 }, 9).unwrap();
        assert_eq!(st.atom_count(), 25);
        let none = load_with_depths(s, &[1.0; 25], &LoadingModel::uniform(0.0), 9).unwrap();
        assert_eq!(none.atom_count(), 0);
    }

    #[test]
    fn probability_model() {
        let m = LoadingModel { p_max: 0.6, depth_exponent: 2.0, depth_cutoff: 0.2 };
        assert_eq!(m.probability(1.0), 0.6);
        assert!((m.probability(0.5) - 0.15).abs() < 1e-15);
        assert_eq!(m.probability(0.1), 0.0);
        assert!(LoadingModel { p_max: 1.2, ..m }.validate().is_err());
        assert!(LoadingModel { depth_cutoff: 1.0, ..m }.validate().is_err());
    }

    #[test]
    fn envelope_peaks_on_axis() {
        let s = sites(19);
        let d = envelope_depths(&s, 100.0 * UM);
        let centre = s.index_of(super::super::SiteKey { sublattice: 0, i: 0, j: 0 }).unwrap();
        assert_eq!(d[centre], 1.0);
        assert!(d.iter().all(|&v| v <= 1.0 && v > 0.0));
    }

    #[test]
    fn same_seed_same_state() {
        let s = sites(19);
        let m = LoadingModel::uniform(0.529);
        let a = load_with_depths(s.clone(), &vec![1.0; 361], &m, 77).unwrap();
        let b = load_with_depths(s.clone(), &vec![1.0; 361], &m, 77).unwrap();
        let c = load_with_depths(s, &vec![1.0; 361], &m, 78).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_ne!(a, c);
    }

    #[test]
    fn depths_come_from_nearest_trap() {
        let r = Register::grid(10.3 * UM, PlaneLabel::ZERO, 1, 2).unwrap();
        let trap = |x: f64, depth| TrapSite {
            position: [x, 0.0, 0.0],
            waist: 1.45 * UM,
            rel_depth: depth,
            plane: PlaneLabel::ZERO,
            site_index: (0, 0),
        };
        let s = SiteSet::from_register(&r);
        let traps = [trap(-10.3 * UM + 0.2 * UM, 0.5), trap(0.1 * UM, 1.0)];
        assert_eq!(trap_depths(&s, &traps).unwrap(), vec![0.5, 1.0]);
        assert!(trap_depths(&s, &traps[1..]).is_err());
        let full = load_atoms(&r, &traps, &LoadingModel::uniform(1.0), 0).unwrap();
        assert_eq!(full.atom_count(), 2);
    }
}
