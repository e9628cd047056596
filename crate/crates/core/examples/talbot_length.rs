//! Talbot lengths of the two lattice presets and where the fractional
//! planes land after the relay optics.

use talbot_lattice::optics::{rayleigh_range, OpticalConfig, Reimaging};
use talbot_lattice::units::UM;

fn main() -> talbot_lattice::Result<()> {
    for (name, cfg) in [("dense", OpticalConfig::dense_lattice()), ("assembly", OpticalConfig::assembly_lattice())] {
        let relay = Reimaging::new(cfg.demagnification)?;
        let pre = cfg.talbot_length_pre()?;
        println!(
            "{name}: a = {:.2} um, z_T = {:.2} um (array side {:.1} um), z_R = {:.2} um",
            cfg.pitch_m / UM,
            cfg.talbot_length()? / UM,
            pre / UM,
            rayleigh_range(cfg.trap_waist_m, cfg.wavelength_m) / UM,
        );
        for (label, z) in relay.plane_stack(pre, 1, 4)? {
            if label.value() >= 0.0 {
                println!("  {label:>7}  z = {:8.2} um", z / UM);
            }
        }
    }
    Ok(())
}
