//! Propagates the illuminated lenslet mask instead of summing beamlets, on a
//! periodic window that stands in for a large array. Light through the
//! interspaces shows up as a background the beamlet model does not have.

use talbot_lattice::analysis::{extract_traps, self_image_fidelity_in, ExtractOptions, Region};
use talbot_lattice::optics::{
    compute_carpet, FieldModel, GridSpec, OpticalConfig, PropagationOptions, TransferFunction,
};
use talbot_lattice::units::UM;

fn main() -> talbot_lattice::Result<()> {
    let cells = 8;
    let mut cfg = OpticalConfig::dense_lattice();
    cfg.lenslet_count = cells;
    cfg.illumination_waist_m = None;
    cfg.lenslet_focal_m = Some(92.0 * UM);
    cfg.lenslet_diameter_m = Some(26.0 * UM);
    let zt = cfg.talbot_length()?;
    let grid = GridSpec::periodic(cfg.pitch_m, cells, 1024)?;
    let z = [0.0, 0.5 * zt, zt];
    let region = Region::central_half(cfg.pitch_m, cells);
    let opts = ExtractOptions::new(0.2, zt).with_region(region);
    let mask_model = FieldModel::MaskPropagation(PropagationOptions::periodic(TransferFunction::Exact));

    for leak in [0.0, 0.3] {
        cfg.interspace_transmission = leak;
        let carpet = compute_carpet(&cfg, &z, mask_model, grid)?;
        let first = carpet.slices[0].intensity();
        for (slice, zk) in carpet.slices.iter().zip(&z) {
            let map = slice.intensity();
            let traps = extract_traps(&map, &opts)?;
            let fill = map.values.iter().sum::<f64>() / map.values.len() as f64 / map.max();
            let f = self_image_fidelity_in(&first, &map, &region, 0.75 * cfg.pitch_m)?;
            println!(
                "interspace {leak:.1}, z = {:6.1} um: {:2} traps, mean/peak {fill:.4}, match to focal plane {:.3} at ({:.2}, {:.2}) um",
                zk / UM,
                traps.len(),
                f.value,
                f.shift[0] / UM,
                f.shift[1] / UM
            );
        }
    }
    Ok(())
}
