//! Phenomenological single-atom layer: stochastic loading, plane-selective
//! push-out, spin preparation, subregister addressing and state-selective
//! detection.
//!
//! A site holds `Option<Spin>`, so "at most one atom per site" and "no spin
//! without an atom" hold by construction.

mod addressing;
mod loading;
mod stats;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::PlaneLabel;
use crate::error::{domain, Result};
use crate::register::Register;

pub use addressing::{address_subregister, AddressingModel, DEFAULT_CROSSTALK};
pub use loading::{envelope_depths, load_atoms, load_with_depths, trap_depths, LoadingModel};
pub use stats::{binomial_chi_square, occupancy_stats, write_stats_csv, OccupancyStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    F2,
    F3,
}

/// Site identity across interleaved sublattices. Orders by sublattice, then
/// lexicographically by `(i, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SiteKey {
    pub sublattice: u32,
    pub i: i64,
    pub j: i64,
}

/// The site universe an [`AtomState`] lives on: one or more registers in a
/// single plane.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteSet {
    reference: String,
    plane: PlaneLabel,
    pitch: f64,
    keys: Vec<SiteKey>,
    positions: Vec<[f64; 2]>,
}

impl SiteSet {
    pub fn from_register(register: &Register) -> Arc<SiteSet> {
        Self::from_registers(std::slice::from_ref(register)).expect("a single register is consistent")
    }

    pub fn from_registers(registers: &[Register]) -> Result<Arc<SiteSet>> {
        let Some(first) = registers.first() else {
            return domain("site set needs at least one register");
        };
        let mut entries = Vec::new();
        for r in registers {
            if r.plane != first.plane {
                return domain(format!("registers span planes {} and {}", first.plane, r.plane));
            }
            for s in &r.sites {
                entries.push((SiteKey { sublattice: r.sublattice_id, i: s.i, j: s.j }, [s.x_m, s.y_m]));
            }
        }
        entries.sort_by_key(|e| e.0);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return domain("duplicate site keys; give interleaved registers distinct sublattice ids");
        }
        let mut h = Sha256::new();
        for (k, p) in &entries {
            h.update(k.sublattice.to_le_bytes());
            h.update(k.i.to_le_bytes());
            h.update(k.j.to_le_bytes());
            h.update(p[0].to_le_bytes());
            h.update(p[1].to_le_bytes());
        }
        let digest = hex::encode(&h.finalize()[..6]);
        let reference = format!("{}/{}sites/{}", first.plane, entries.len(), digest);
        let (keys, positions) = entries.into_iter().unzip();
        Ok(Arc::new(SiteSet { reference, plane: first.plane, pitch: first.pitch_m, keys, positions }))
    }

    /// Plane label, site count and a geometry digest.
    pub fn reference(&self) -> &str {
        &self.reference
    }

    pub fn plane(&self) -> PlaneLabel {
        self.plane
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[SiteKey] {
        &self.keys
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn index_of(&self, key: SiteKey) -> Option<usize> {
        self.keys.binary_search(&key).ok()
    }

    /// Indices of `register`'s sites in this set.
    pub fn indices_of(&self, register: &Register) -> Result<Vec<usize>> {
        register
            .sites
            .iter()
            .map(|s| {
                let key = SiteKey { sublattice: register.sublattice_id, i: s.i, j: s.j };
                self.index_of(key).ok_or_else(|| {
                    crate::Error::Domain(format!(
                        "site ({}, {}) of sublattice {} is not in {}",
                        s.i, s.j, register.sublattice_id, self.reference
                    ))
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomState {
    sites: Arc<SiteSet>,
    /// Seed of the operation that produced this state.
    pub seed: u64,
    atoms: Vec<Option<Spin>>,
}

impl AtomState {
    pub fn empty(sites: Arc<SiteSet>, seed: u64) -> Self {
        let atoms = vec![None; sites.len()];
        AtomState { sites, seed, atoms }
    }

    /// Occupied sites get spin F2.
    pub fn from_occupancy(sites: Arc<SiteSet>, seed: u64, occupied: &[bool]) -> Result<Self> {
        if occupied.len() != sites.len() {
            return domain(format!("occupancy has {} entries for {} sites", occupied.len(), sites.len()));
        }
        let atoms = occupied.iter().map(|&o| o.then_some(Spin::F2)).collect();
        Ok(AtomState { sites, seed, atoms })
    }

    pub fn sites(&self) -> &Arc<SiteSet> {
        &self.sites
    }

    pub fn register_ref(&self) -> &str {
        self.sites.reference()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Option<Spin>] {
        &self.atoms
    }

    pub fn is_occupied(&self, k: usize) -> bool {
        self.atoms[k].is_some()
    }

    pub fn spin(&self, k: usize) -> Option<Spin> {
        self.atoms[k]
    }

    pub fn occupancy(&self) -> Vec<bool> {
        self.atoms.iter().map(Option::is_some).collect()
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.is_some()).count()
    }

    pub fn occupied_indices(&self) -> Vec<usize> {
        (0..self.atoms.len()).filter(|&k| self.atoms[k].is_some()).collect()
    }

    /// Places an atom with spin F2 on an empty site.
    pub(crate) fn fill(&mut self, k: usize) {
        debug_assert!(self.atoms[k].is_none(), "site {k} already holds an atom");
        self.atoms[k] = Some(Spin::F2);
    }

    pub(crate) fn take(&mut self, k: usize) -> Option<Spin> {
        self.atoms[k].take()
    }

    /// Moves the atom on `from` to the empty site `to`, keeping its spin.
    pub(crate) fn transfer(&mut self, from: usize, to: usize) {
        debug_assert!(self.atoms[to].is_none(), "site {to} already holds an atom");
        self.atoms[to] = self.atoms[from].take();
    }

    pub(crate) fn set_spin(&mut self, k: usize, spin: Spin) {
        if let Some(s) = self.atoms[k].as_mut() {
            *s = spin;
        }
    }

    pub fn to_snapshot(&self) -> Snapshot {
        Snapshot {
            register_ref: self.sites.reference().to_string(),
            seed: self.seed,
            sites: self
                .sites
                .keys()
                .iter()
                .zip(&self.atoms)
                .map(|(k, a)| SnapshotSite {
                    sublattice: k.sublattice,
                    i: k.i,
                    j: k.j,
                    occupied: a.is_some(),
                    spin: match a {
                        None => "none",
                        Some(Spin::F2) => "F2",
                        Some(Spin::F3) => "F3",
                    }
                    .to_string(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_snapshot())?)
    }

    /// Rebuilds a state on `sites` from a snapshot taken on the same sites.
    pub fn from_snapshot(sites: Arc<SiteSet>, snap: &Snapshot) -> Result<Self> {
        if snap.register_ref != sites.reference() {
            return domain(format!("snapshot of {} does not match {}", snap.register_ref, sites.reference()));
        }
        let mut state = AtomState::empty(sites, snap.seed);
        for s in &snap.sites {
            let key = SiteKey { sublattice: s.sublattice, i: s.i, j: s.j };
            let Some(k) = state.sites.index_of(key) else {
                return domain(format!("snapshot site ({}, {}) is unknown", s.i, s.j));
            };
            state.atoms[k] = match (s.occupied, s.spin.as_str()) {
                (false, "none") => None,
                (true, "F2") => Some(Spin::F2),
                (true, "F3") => Some(Spin::F3),
                (o, sp) => return domain(format!("inconsistent snapshot site: occupied={o}, spin={sp}")),
            };
        }
        Ok(state)
    }
}

fn is_zero(v: &u32) -> bool {
    *v == 0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSite {
    #[serde(default, skip_serializing_if = "is_zero")]
    pub sublattice: u32,
    pub i: i64,
    pub j: i64,
    pub occupied: bool,
    pub spin: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub register_ref: String,
    pub seed: u64,
    pub sites: Vec<SnapshotSite>,
}

/// Every occupied site gets `spin`.
pub fn initialize_spins(state: &AtomState, spin: Spin) -> AtomState {
    let mut out = state.clone();
    for a in out.atoms.iter_mut().flatten() {
        *a = spin;
    }
    out
}

/// True where a site holds an F2 atom: F3 population is removed before
/// imaging.
pub fn state_selective_detect(state: &AtomState) -> Vec<bool> {
    state.atoms.iter().map(|a| *a == Some(Spin::F2)).collect()
}

/// Atom states of several Talbot planes loaded in one shot.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneStack {
    planes: Vec<(PlaneLabel, AtomState)>,
}

impl PlaneStack {
    pub fn new(planes: Vec<(PlaneLabel, AtomState)>) -> Result<Self> {
        let mut labels: Vec<_> = planes.iter().map(|p| p.0).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return domain("plane stack lists a plane twice");
        }
        Ok(PlaneStack { planes })
    }

    pub fn planes(&self) -> &[(PlaneLabel, AtomState)] {
        &self.planes
    }

    pub fn get(&self, plane: PlaneLabel) -> Option<&AtomState> {
        self.planes.iter().find(|p| p.0 == plane).map(|p| &p.1)
    }

    /// Empties every plane except `keep`.
    pub fn push_out(&self, keep: PlaneLabel) -> Result<PlaneStack> {
        if self.get(keep).is_none() {
            return domain(format!("{keep} is not in the plane stack"));
        }
        let planes = self
            .planes
            .iter()
            .map(|(l, s)| {
                if *l == keep {
                    (*l, s.clone())
                } else {
                    (*l, AtomState::empty(s.sites.clone(), s.seed))
                }
            })
            .collect();
        Ok(PlaneStack { planes })
    }
}

/// Resonant push-out of all planes but `keep`; returns the surviving plane.
pub fn push_out(stack: &PlaneStack, keep: PlaneLabel) -> Result<AtomState> {
    let cleared = stack.push_out(keep)?;
    Ok(cleared.get(keep).expect("checked by push_out").clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::UM;

    pub(crate) fn sites(n: usize) -> Arc<SiteSet> {
        SiteSet::from_register(&Register::grid(10.0 * UM, PlaneLabel::ZERO, n, n).unwrap())
    }

    fn state_from(atoms: &[Option<Spin>]) -> AtomState {
        let s = sites(2);
        AtomState { sites: s, seed: 0, atoms: atoms.to_vec() }
    }

    #[test]
    fn spins_follow_occupancy() {
        let s = AtomState::empty(sites(3), 1);
        assert_eq!(initialize_spins(&s, Spin::F2), s);
        let full = AtomState::from_occupancy(sites(2), 0, &[true; 4]).unwrap();
        let f3 = initialize_spins(&full, Spin::F3);
        assert!(f3.atoms().iter().all(|a| *a == Some(Spin::F3)));
        let mixed = state_from(&[Some(Spin::F3), None, Some(Spin::F2), None]);
        let out = initialize_spins(&mixed, Spin::F2);
        assert_eq!(out.occupancy(), mixed.occupancy());
        assert_eq!(out.atoms()[0], Some(Spin::F2));
    }

    #[test]
    fn detection_is_occupied_and_f2_exhaustively() {
        let labels = [None, Some(Spin::F2), Some(Spin::F3)];
        for code in 0..81usize {
            let atoms: Vec<_> = (0..4).map(|k| labels[(code / 3usize.pow(k)) % 3]).collect();
            let st = state_from(&atoms);
            let det = state_selective_detect(&st);
            for k in 0..4 {
                assert_eq!(det[k], atoms[k].is_some() && atoms[k] == Some(Spin::F2));
            }
        }
        let all_f2 = AtomState::from_occupancy(sites(2), 0, &[true, false, true, true]).unwrap();
        assert_eq!(state_selective_detect(&all_f2), all_f2.occupancy());
    }

    #[test]
    fn push_out_keeps_only_the_selected_plane() {
        let s = sites(2);
        let a = AtomState::from_occupancy(s.clone(), 1, &[true, true, false, true]).unwrap();
        let b = AtomState::from_occupancy(s, 2, &[true, false, true, true]).unwrap();
        let stack = PlaneStack::new(vec![(PlaneLabel::ZERO, a.clone()), (PlaneLabel::half(1), b)]).unwrap();
        let cleared = stack.push_out(PlaneLabel::ZERO).unwrap();
        assert_eq!(cleared.get(PlaneLabel::half(1)).unwrap().atom_count(), 0);
        assert_eq!(cleared.get(PlaneLabel::ZERO).unwrap(), &a);
        assert!(stack.push_out(PlaneLabel::integer(3)).is_err());
        let single = PlaneStack::new(vec![(PlaneLabel::ZERO, a.clone())]).unwrap();
        assert_eq!(push_out(&single, PlaneLabel::ZERO).unwrap(), a);
    }

    #[test]
    fn snapshot_round_trip() {
        let st = state_from(&[Some(Spin::F3), None, Some(Spin::F2), None]);
        let json = st.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["sites"][0]["spin"], "F3");
        assert_eq!(v["sites"][1]["spin"], "none");
        assert_eq!(v["sites"][1]["occupied"], false);
        assert!(v["sites"][0].get("sublattice").is_none());
        let snap: Snapshot = serde_json::from_str(&json).unwrap();
        assert_eq!(AtomState::from_snapshot(st.sites().clone(), &snap).unwrap(), st);
    }

    #[test]
    fn interleaved_site_sets_need_distinct_ids() {
        let base = Register::grid(10.0 * UM, PlaneLabel::ZERO, 2, 2).unwrap();
        let clash = base.translated([5.0 * UM, 0.0], 0);
        assert!(SiteSet::from_registers(&[base.clone(), clash]).is_err());
        let other = base.translated([5.0 * UM, 0.0], 1);
        let set = SiteSet::from_registers(&[base, other]).unwrap();
        assert_eq!(set.len(), 8);
        assert_eq!(set.keys()[4].sublattice, 1);
    }
}
