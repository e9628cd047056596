//! Success probability of 9×9 assembly against the pickup efficiency, with
//! Wilson 95% intervals.

use talbot_lattice::analysis::PlaneLabel;
use talbot_lattice::assembly::{estimate_success_rate, AssemblyScenario, LossModel, PlannerOptions, TargetPattern};
use talbot_lattice::atoms::{LoadingModel, SiteSet};
use talbot_lattice::optics::OpticalConfig;
use talbot_lattice::register::build_register;

fn main() -> talbot_lattice::Result<()> {
    let cfg = OpticalConfig::assembly_lattice();
    let sites = SiteSet::from_register(&build_register(&cfg, PlaneLabel::ZERO, 19, 19)?);
    let trials = 400;
    for pickup in [0.95, 0.98, 0.99, 0.999] {
        let scenario = AssemblyScenario {
            depths: vec![1.0; sites.len()],
            target: TargetPattern::centred_block(sites.clone(), 0, 9)?,
            sites: sites.clone(),
            loading: LoadingModel::uniform(0.529),
            loss: LossModel { alpha_pickup: pickup, alpha_release: 0.99, alpha_per_length: 200.0, cycle_survival: 0.98 },
            max_cycles: 5,
            planner: PlannerOptions::default(),
        };
        let est = estimate_success_rate(&scenario, trials, 2024)?;
        println!(
            "pickup {pickup:.3}: {}/{trials} filled, rate {:.3} [{:.3}, {:.3}]",
            est.successes, est.rate, est.ci[0], est.ci[1]
        );
    }
    Ok(())
}
