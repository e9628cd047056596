//! Loads a 19×19 register many times and compares site frequencies with the
//! binomial expectation.

use talbot_lattice::analysis::PlaneLabel;
use talbot_lattice::atoms::{binomial_chi_square, load_with_depths, occupancy_stats, LoadingModel, SiteSet};
use talbot_lattice::optics::OpticalConfig;
use talbot_lattice::register::build_register;
use talbot_lattice::rng::{par_trials, stream_seed, Stage};

fn main() -> talbot_lattice::Result<()> {
    let cfg = OpticalConfig::assembly_lattice();
    let sites = SiteSet::from_register(&build_register(&cfg, PlaneLabel::ZERO, 19, 19)?);
    let depths = vec![1.0; sites.len()];
    let model = LoadingModel::uniform(0.529);
    let trials = 5000;

    let states = par_trials(trials, |t| load_with_depths(sites.clone(), &depths, &model, stream_seed(1, Stage::Load, t)))
        .into_iter()
        .collect::<talbot_lattice::Result<Vec<_>>>()?;
    let stats = occupancy_stats(&states)?;
    let (chi2, dof) = binomial_chi_square(&stats.site_frequency, trials, &vec![0.529; sites.len()]);
    println!("{} sites, {trials} loads: mean {:.2} atoms, std {:.2}", sites.len(), stats.mean, stats.std);
    println!("site-frequency chi-square {chi2:.1} on {dof} dof");

    for row in states[0].occupancy().chunks(19) {
        println!("{}", row.iter().map(|o| if *o { '#' } else { '.' }).collect::<String>());
    }
    Ok(())
}
