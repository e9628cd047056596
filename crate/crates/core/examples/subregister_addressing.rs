//! Two interleaved sublattices; a spin flip addressed to one of them hides
//! its atoms from state-selective imaging while the other stays visible.

use talbot_lattice::analysis::PlaneLabel;
use talbot_lattice::atoms::{
    address_subregister, load_with_depths, state_selective_detect, AddressingModel, LoadingModel, SiteSet,
    DEFAULT_CROSSTALK,
};
use talbot_lattice::register::Register;
use talbot_lattice::units::UM;

fn main() -> talbot_lattice::Result<()> {
    let a = 14.1 * UM;
    let first = Register::grid(a, PlaneLabel::half(1), 10, 10)?;
    let second = first.translated([a / 2.0, a / 2.0], 1);
    let sites = SiteSet::from_registers(&[first.clone(), second.clone()])?;
    let loaded = load_with_depths(sites.clone(), &vec![1.0; sites.len()], &LoadingModel::uniform(0.47), 7)?;

    let model = AddressingModel::uniform(0.98, DEFAULT_CROSSTALK);
    let flipped = address_subregister(&loaded, &first, &model, 8)?;
    let seen = state_selective_detect(&flipped);

    for (name, reg) in [("addressed", &first), ("spectator", &second)] {
        let idx = sites.indices_of(reg)?;
        let before = idx.iter().filter(|&&k| loaded.is_occupied(k)).count();
        let after = idx.iter().filter(|&&k| seen[k]).count();
        println!("{name}: {before} loaded, {after} visible after the flip");
    }
    Ok(())
}
