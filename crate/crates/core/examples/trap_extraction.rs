//! Finds traps in the focal plane and in the half plane, fits the lattice
//! and reports the half-pitch offset between them.

use talbot_lattice::analysis::{estimate_pitch, extract_traps, ExtractOptions, Region};
use talbot_lattice::optics::{compute_carpet, FieldModel, GridSpec, OpticalConfig};
use talbot_lattice::units::UM;

fn main() -> talbot_lattice::Result<()> {
    let mut cfg = OpticalConfig::dense_lattice();
    cfg.lenslet_count = 10;
    let zt = cfg.talbot_length()?;
    let grid = GridSpec::for_array(cfg.pitch_m, 10, cfg.trap_waist_m, 8.0, 4.0)?;
    let carpet = compute_carpet(&cfg, &[0.0, 0.5 * zt], FieldModel::Beamlets, grid)?;
    let opts = ExtractOptions::new(0.1, zt)
        .with_expected_waist(cfg.trap_waist_m)
        .with_region(Region::central_half(cfg.pitch_m, 10));

    let mut fits = Vec::new();
    for slice in &carpet.slices {
        let traps = extract_traps(&slice.intensity(), &opts)?;
        let fit = estimate_pitch(&traps)?;
        let waist = traps.iter().map(|t| t.waist).sum::<f64>() / traps.len() as f64;
        println!(
            "{}: {} traps, pitch ({:.3}, {:.3}) um, mean waist {:.3} um",
            traps[0].plane,
            traps.len(),
            fit.pitch[0] / UM,
            fit.pitch[1] / UM,
            waist / UM
        );
        fits.push(fit);
    }
    let shift = fits[1].offset_relative_to(&fits[0]);
    println!("half-plane shift ({:.3}, {:.3}) um", shift[0].abs() / UM, shift[1].abs() / UM);
    Ok(())
}
