use num_complex::Complex64;
use rayon::prelude::*;

use super::fft;
use super::field::ScalarField;
use crate::error::{Error, Result};

/// Spectral transfer function used by the propagator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransferFunction {
    /// `exp(i2πΔz·√(1/λ² − f²))`, evanescent components removed.
    #[default]
    Exact,
    /// Fresnel approximation `exp(i2πΔz/λ)·exp(−iπλΔz·f²)`; the Talbot
    /// length `2a²/λ` is exact for this propagator.
    Paraxial,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationOptions {
    pub transfer: TransferFunction,
    /// Treat the grid as one period of an infinite periodic field. Disables
    /// the walk-off guard because wrap-around is then physical.
    pub periodic: bool,
    /// Fraction of spectral power allowed outside the band used for the
    /// walk-off guard.
    pub guard_tail: f64,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        PropagationOptions { transfer: TransferFunction::Exact, periodic: false, guard_tail: 1e-6 }
    }
}

impl PropagationOptions {
    pub fn periodic(transfer: TransferFunction) -> Self {
        PropagationOptions { transfer, periodic: true, ..Default::default() }
    }
}

/// Exact scalar propagation by `delta_z` (negative values propagate backwards).
pub fn propagate_angular_spectrum(field: &ScalarField, wavelength: f64, delta_z: f64) -> Result<ScalarField> {
    propagate_with(field, wavelength, delta_z, PropagationOptions::default())
}

/// Smallest |f| such that the spectral power beyond it, along one axis, is at
/// most `tail` of the total.
fn band_edge(marginal: &[f64], d: f64, tail: f64) -> f64 {
    let n = marginal.len();
    let total: f64 = marginal.iter().sum();
    let mut bins: Vec<(f64, f64)> =
        marginal.iter().enumerate().map(|(k, &p)| (fft::frequency(k, n, d).abs(), p)).collect();
    bins.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut acc = 0.0;
    for (f, p) in bins {
        acc += p;
        if acc > tail * total {
            return f;
        }
    }
    0.0
}

pub fn propagate_with(
    field: &ScalarField,
    wavelength: f64,
    delta_z: f64,
    opts: PropagationOptions,
) -> Result<ScalarField> {
    if !(wavelength > 0.0) {
        return Err(Error::Domain(format!("wavelength must be positive, got {wavelength}")));
    }
    if !delta_z.is_finite() {
        return Err(Error::Domain(format!("propagation distance must be finite, got {delta_z}")));
    }
    let power = field.power();
    if !power.is_finite() {
        return Err(Error::Domain("field power is not finite".into()));
    }
    let g = field.grid;
    if delta_z == 0.0 {
        return Ok(field.clone());
    }
    let mut spec = field.amplitude.clone();
    fft::forward(&mut spec, g.nx, g.ny);

    let inv_l2 = 1.0 / (wavelength * wavelength);
    let fxs: Vec<f64> = (0..g.nx).map(|k| fft::frequency(k, g.nx, g.dx)).collect();
    let fys: Vec<f64> = (0..g.ny).map(|k| fft::frequency(k, g.ny, g.dy)).collect();

    if !opts.periodic {
        // Lateral walk-off of the significant band must stay inside half the
        // window. Evanescent components are truncated below, so they cannot
        // wrap around and are left out.
        let evanescent = |fx: f64, fy: f64| opts.transfer == TransferFunction::Exact && fx * fx + fy * fy >= inv_l2;
        let mut mx = vec![0.0; g.nx];
        let mut my = vec![0.0; g.ny];
        for (iy, row) in spec.chunks(g.nx).enumerate() {
            for (ix, v) in row.iter().enumerate() {
                if evanescent(fxs[ix], fys[iy]) {
                    continue;
                }
                let p = v.norm_sqr();
                mx[ix] += p;
                my[iy] += p;
            }
        }
        for (marginal, d, extent, axis) in
            [(&mx, g.dx, g.extent_x(), 'x'), (&my, g.dy, g.extent_y(), 'y')]
        {
            let f = band_edge(marginal, d, opts.guard_tail);
            let slope = match opts.transfer {
                TransferFunction::Paraxial => wavelength * f,
                TransferFunction::Exact => {
                    let kz2 = inv_l2 - f * f;
                    if kz2 <= 0.0 {
                        f64::INFINITY
                    } else {
                        f / kz2.sqrt()
                    }
                }
            };
            if delta_z.abs() * slope > 0.5 * extent {
                return Err(Error::Sampling(format!(
                    "propagating {delta_z:e} m walks significant content {:e} m along {axis}, beyond half the {extent:e} m window",
                    delta_z.abs() * slope
                )));
            }
        }
    }

    let two_pi = 2.0 * std::f64::consts::PI;
    let carrier = Complex64::from_polar(1.0, two_pi * delta_z / wavelength);
    spec.par_chunks_mut(g.nx).zip(fys.par_iter()).for_each(|(row, &fy)| {
        for (v, &fx) in row.iter_mut().zip(&fxs) {
            let f2 = fx * fx + fy * fy;
            let h = match opts.transfer {
                TransferFunction::Exact => {
                    let kz2 = inv_l2 - f2;
                    if kz2 < 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::from_polar(1.0, two_pi * delta_z * kz2.sqrt())
                    }
                }
                TransferFunction::Paraxial => {
                    carrier * Complex64::from_polar(1.0, -std::f64::consts::PI * wavelength * delta_z * f2)
                }
            };
            *v *= h;
        }
    });
    fft::inverse(&mut spec, g.nx, g.ny);
    ScalarField::new(g, field.z + delta_z, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{beam_array_field, rayleigh_range, GaussianBeamlet, GridSpec};
    use crate::units::{NM, UM};

    const LAMBDA: f64 = 798.6 * NM;
    const W0: f64 = 1.45 * UM;

    fn gaussian(n: usize) -> ScalarField {
        let g = GridSpec::square(n, W0 / 8.0).unwrap();
        beam_array_field(&[GaussianBeamlet::new([0.0, 0.0], W0)], LAMBDA, g, 0.0).unwrap()
    }

    #[test]
    fn zero_distance_is_identity() {
        let f = gaussian(128);
        let p = propagate_angular_spectrum(&f, LAMBDA, 0.0).unwrap();
        let err = f.amplitude.iter().zip(&p.amplitude).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn forward_then_backward_restores_field() {
        let f = gaussian(256);
        let dz = 12.0 * UM;
        let there = propagate_angular_spectrum(&f, LAMBDA, dz).unwrap();
        assert_eq!(there.z, dz);
        let back = propagate_angular_spectrum(&there, LAMBDA, -dz).unwrap();
        assert!(((back.power() - f.power()) / f.power()).abs() < 1e-10);
        let err = f.amplitude.iter().zip(&back.amplitude).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn matches_analytic_gaussian_phase_and_amplitude() {
        // The analytic beam carries the same exp(+ikz) carrier and Gouy phase.
        let f = gaussian(256);
        let z = rayleigh_range(W0, LAMBDA);
        let num = propagate_angular_spectrum(&f, LAMBDA, z).unwrap();
        let ana = beam_array_field(&[GaussianBeamlet::new([0.0, 0.0], W0)], LAMBDA, f.grid, z).unwrap();
        let c = 128 * 256 + 128;
        let ratio = num.amplitude[c] / ana.amplitude[c];
        assert!((ratio.norm() - 1.0).abs() < 0.01, "{ratio}");
        assert!(ratio.arg().abs() < 0.02, "{ratio}");
    }

    #[test]
    fn walk_off_guard_trips_for_long_distances() {
        let f = gaussian(64);
        let r = propagate_angular_spectrum(&f, LAMBDA, 2e-3);
        assert!(matches!(r, Err(Error::Sampling(_))));
        let ok = propagate_with(&f, LAMBDA, 2e-3, PropagationOptions::periodic(TransferFunction::Exact));
        assert!(ok.is_ok());
    }

    #[test]
    fn power_is_conserved_over_many_steps() {
        let f = gaussian(128);
        let p0 = f.power();
        let mut cur = f;
        let opts = PropagationOptions::periodic(TransferFunction::Exact);
        for _ in 0..100 {
            cur = propagate_with(&cur, LAMBDA, 1.0 * UM, opts).unwrap();
        }
        assert!(((cur.power() - p0) / p0).abs() < 1e-8);
    }
}
