//! A second, tilted beam on the same array fills the cell centres of the
//! half plane. Checks the composite spacing against a separation limit.

use talbot_lattice::analysis::PlaneLabel;
use talbot_lattice::optics::OpticalConfig;
use talbot_lattice::register::{build_register, composite_pitch, interleave, validate_separation, InterleaveSpec};
use talbot_lattice::units::{MHZ, MRAD, UM};

fn main() -> talbot_lattice::Result<()> {
    let cfg = OpticalConfig::dense_lattice();
    let plane = PlaneLabel::half(1);
    let base = build_register(&cfg, plane, 8, 8)?;
    let f0 = 92.0 * UM;

    for tilt in [3.0, 5.0, 12.3] {
        let spec = InterleaveSpec::diagonal(tilt * MRAD, f0, plane, cfg.talbot_length_pre()?, cfg.demagnification, 30.0 * MHZ);
        let second = interleave(&base, &spec)?;
        let regs = [base.clone(), second.register];
        let violations = validate_separation(&regs, 3.0 * UM)?;
        println!(
            "tilt {tilt:4.1} mrad: shift ({:.3}, {:.3}) um, nearest neighbour {:.3} um, {} pairs closer than 3 um",
            second.displacement_m[0] / UM,
            second.displacement_m[1] / UM,
            composite_pitch(&regs) / UM,
            violations.len()
        );
    }
    Ok(())
}
