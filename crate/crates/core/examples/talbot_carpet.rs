//! Coarse text rendering of a Talbot carpet of a 20×20 beamlet array, from
//! the focal plane to one Talbot length. Each character is the brightest
//! point over one cell in y, so spots of the shifted planes show too.

use talbot_lattice::optics::{GridSpec, LatticeBeamArray, OpticalConfig};

const SHADES: &[u8] = b" .:-=+*#%@";

fn main() -> talbot_lattice::Result<()> {
    let cfg = OpticalConfig::dense_lattice();
    let a = cfg.pitch_m;
    let zt = cfg.talbot_length()?;
    let array = LatticeBeamArray::square(20, a, cfg.trap_waist_m, cfg.wavelength_m);
    let grid = GridSpec::for_array(a, 20, cfg.trap_waist_m, 8.0, 4.0)?;

    // Two cells either side of the axis, 72 columns.
    let cols: Vec<usize> = (0..72)
        .map(|c| {
            let x = -2.0 * a + 4.0 * a * c as f64 / 71.0;
            ((x / grid.dx).round() as isize + (grid.nx / 2) as isize) as usize
        })
        .collect();
    let rows = 33;
    let mut lines = Vec::with_capacity(rows);
    let mut peak: f64 = 0.0;
    for k in 0..rows {
        let z = k as f64 * zt / (rows - 1) as f64;
        let map = array.field(grid, z)?.intensity();
        let band = (0..grid.ny).filter(|&iy| grid.y(iy).abs() <= 0.5 * a);
        let row: Vec<f64> = cols.iter().map(|&c| band.clone().map(|iy| map.at(c, iy)).fold(0.0, f64::max)).collect();
        peak = peak.max(row.iter().cloned().fold(0.0, f64::max));
        lines.push((z, row));
    }
    for (z, row) in lines {
        let text: String = row
            .iter()
            .map(|v| {
                let s = (v / peak).sqrt() * (SHADES.len() - 1) as f64;
                SHADES[(s.round() as usize).min(SHADES.len() - 1)] as char
            })
            .collect();
        println!("{:5.3} |{text}|", z / zt);
    }
    Ok(())
}
