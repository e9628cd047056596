use rayon::prelude::*;

use super::beam::LatticeBeamArray;
use super::config::OpticalConfig;
use super::field::{GridSpec, ScalarField};
use super::mask::{illumination_field, mla_phase_mask};
use super::propagate::{propagate_with, PropagationOptions};
use super::reimaging::Reimaging;
use crate::error::{domain, Error, Result};

/// How slices of the carpet are produced.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum FieldModel {
    /// Analytic superposition of reimaged Gaussian beamlets.
    #[default]
    Beamlets,
    /// Illumination times the lenslet mask, propagated from the array by
    /// `f0 + z/M²` and reimaged. Captures light through the interspaces.
    MaskPropagation(PropagationOptions),
}

/// Intensity-bearing slices along the axis, all on one grid.
#[derive(Debug, Clone)]
pub struct TalbotCarpet {
    pub config: OpticalConfig,
    pub slices: Vec<ScalarField>,
}

impl TalbotCarpet {
    pub fn z_values(&self) -> Vec<f64> {
        self.slices.iter().map(|s| s.z).collect()
    }

    pub fn grid(&self) -> GridSpec {
        self.slices[0].grid
    }

    pub fn nearest_slice(&self, z: f64) -> &ScalarField {
        self.slices
            .iter()
            .min_by(|a, b| (a.z - z).abs().total_cmp(&(b.z - z).abs()))
            .expect("carpet has at least one slice")
    }

    /// Intensity along the grid row nearest `y` for every slice: the x–z
    /// cross-section of the carpet, one row per slice.
    pub fn xz_section(&self, y: f64) -> Vec<Vec<f64>> {
        self.slices.iter().map(|s| s.intensity().row_near(y).to_vec()).collect()
    }
}

/// Computes one slice per entry of `z_samples` (reimaged axial positions
/// relative to `T_0`, sorted ascending). `grid` is in the reimaged frame.
pub fn compute_carpet(
    config: &OpticalConfig,
    z_samples: &[f64],
    model: FieldModel,
    grid: GridSpec,
) -> Result<TalbotCarpet> {
    config.validate()?;
    if z_samples.is_empty() {
        return domain("carpet needs at least one z sample");
    }
    if z_samples.windows(2).any(|w| !(w[0] <= w[1])) {
        return domain("z samples must be sorted ascending");
    }
    let slices = match model {
        FieldModel::Beamlets => {
            let array = LatticeBeamArray::from_config(config)?;
            z_samples.par_iter().map(|&z| array.field(grid, z)).collect::<Result<Vec<_>>>()?
        }
        FieldModel::MaskPropagation(opts) => {
            let f0 = config.lenslet_focal_m.ok_or_else(|| {
                Error::Config("mask propagation needs lenslet_focal_m".into())
            })?;
            let relay = Reimaging::new(config.demagnification)?;
            let m = config.demagnification;
            let pre_grid = GridSpec::new(grid.nx, grid.ny, grid.dx / m, grid.dy / m)?;
            let source = illumination_field(config, pre_grid)?.multiply(&mla_phase_mask(config, pre_grid)?)?;
            z_samples
                .par_iter()
                .map(|&z| {
                    let at = propagate_with(&source, config.wavelength_m, f0 + z / (m * m), opts)?;
                    let mut out = relay.field(&at);
                    out.z = z;
                    Ok(out)
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(TalbotCarpet { config: config.clone(), slices })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{TransferFunction};
    use crate::units::UM;

    fn small_config() -> OpticalConfig {
        let mut c = OpticalConfig::dense_lattice();
        c.lenslet_count = 4;
        c
    }

    #[test]
    fn single_sample_equals_beam_array_field() {
        let c = small_config();
        let g = GridSpec::for_array(c.pitch_m, 4, c.trap_waist_m, 8.0, 8.0).unwrap();
        let carpet = compute_carpet(&c, &[0.0], FieldModel::Beamlets, g).unwrap();
        let direct = LatticeBeamArray::from_config(&c).unwrap().field(g, 0.0).unwrap();
        assert_eq!(carpet.slices.len(), 1);
        assert_eq!(carpet.slices[0], direct);
    }

    #[test]
    fn rejects_empty_and_unsorted_samples() {
        let c = small_config();
        let g = GridSpec::for_array(c.pitch_m, 4, c.trap_waist_m, 8.0, 8.0).unwrap();
        assert!(matches!(compute_carpet(&c, &[], FieldModel::Beamlets, g), Err(Error::Domain(_))));
        assert!(matches!(
            compute_carpet(&c, &[1e-6, 0.0], FieldModel::Beamlets, g),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn mask_model_conserves_power_across_slices() {
        let mut c = small_config();
        c.lenslet_focal_m = Some(200.0 * UM);
        c.illumination_waist_m = Some(50.0 * UM);
        c.demagnification = 1.0;
        c.mla_pitch_m = None;
        c.pitch_m = 30.0 * UM;
        let g = GridSpec::square(512, 0.5 * UM).unwrap();
        let zs = [-100.0 * UM, 0.0, 150.0 * UM];
        let opts = PropagationOptions::periodic(TransferFunction::Exact);
        let carpet = compute_carpet(&c, &zs, FieldModel::MaskPropagation(opts), g).unwrap();
        let p0 = carpet.slices[0].power();
        for s in &carpet.slices {
            assert!(((s.power() - p0) / p0).abs() < 1e-6);
        }
        assert_eq!(carpet.z_values(), zs.to_vec());
    }

    #[test]
    fn mask_model_needs_focal_length() {
        let c = small_config();
        let g = GridSpec::square(64, 1.0 * UM).unwrap();
        let r = compute_carpet(&c, &[0.0], FieldModel::MaskPropagation(PropagationOptions::default()), g);
        assert!(matches!(r, Err(Error::Config(_))));
    }
}
