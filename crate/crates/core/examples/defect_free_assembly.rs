//! One load-and-rearrange run on the 19×19 preset, printing the occupancy
//! before and after and the moves each cycle needed.

use talbot_lattice::analysis::PlaneLabel;
use talbot_lattice::assembly::{assemble, LossModel, PlannerOptions, TargetPattern};
use talbot_lattice::atoms::{load_with_depths, AtomState, LoadingModel, SiteSet};
use talbot_lattice::optics::OpticalConfig;
use talbot_lattice::register::build_register;

fn show(state: &AtomState, target: &TargetPattern) {
    let occ = state.occupancy();
    for (r, row) in occ.chunks(19).enumerate() {
        let line: String = row
            .iter()
            .enumerate()
            .map(|(c, o)| match (*o, target.contains_index(r * 19 + c)) {
                (true, _) => '#',
                (false, true) => 'o',
                (false, false) => '.',
            })
            .collect();
        println!("  {line}");
    }
}

fn main() -> talbot_lattice::Result<()> {
    let cfg = OpticalConfig::assembly_lattice();
    let sites = SiteSet::from_register(&build_register(&cfg, PlaneLabel::ZERO, 19, 19)?);
    let target = TargetPattern::centred_block(sites.clone(), 0, 9)?;
    let loaded = load_with_depths(sites.clone(), &vec![1.0; sites.len()], &LoadingModel::uniform(0.529), 42)?;
    let loss = LossModel { alpha_pickup: 0.99, alpha_release: 0.99, alpha_per_length: 200.0, cycle_survival: 0.98 };

    println!("loaded {} atoms ('o' marks an empty target site):", loaded.atom_count());
    show(&loaded, &target);
    let result = assemble(&loaded, &target, &loss, 5, 42, PlannerOptions::default())?;
    for c in 1..=result.cycles_used {
        let n = result.log.iter().filter(|m| m.cycle == c).count();
        if n > 0 {
            println!("cycle {c}: {n} moves");
        }
    }
    println!("success: {}, {} atoms left", result.success, result.final_state.atom_count());
    show(&result.final_state, &target);
    Ok(())
}
