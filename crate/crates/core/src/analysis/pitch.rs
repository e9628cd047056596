use super::traps::TrapSite;
use crate::error::{Error, Result};

/// Least-squares lattice parameters of a near-regular quadratic grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeFit {
    pub pitch: [f64; 2],
    /// Grid offset from the coordinate origin, reduced into `[0, pitch)`.
    pub offset: [f64; 2],
}

impl LatticeFit {
    /// Offset of `self` relative to `other`, per axis, wrapped into
    /// `[-pitch/2, pitch/2)`.
    pub fn offset_relative_to(&self, other: &LatticeFit) -> [f64; 2] {
        std::array::from_fn(|k| {
            let p = self.pitch[k];
            (self.offset[k] - other.offset[k] + 0.5 * p).rem_euclid(p) - 0.5 * p
        })
    }
}

/// Fits `coord ≈ offset + n·pitch` along one axis.
fn fit_axis(coords: &[f64], axis: char) -> Result<(f64, f64)> {
    let mut sorted = coords.to_vec();
    sorted.sort_by(f64::total_cmp);
    let max_gap = sorted.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if !(max_gap > 0.0) {
        return Err(Error::Fit(format!("all sites share one {axis} coordinate")));
    }
    let tol = 0.3 * max_gap;
    let mut centres: Vec<f64> = Vec::new();
    let mut acc = (sorted[0], 1usize);
    for w in sorted.windows(2) {
        if w[1] - w[0] > tol {
            centres.push(acc.0 / acc.1 as f64);
            acc = (w[1], 1);
        } else {
            acc.0 += w[1];
            acc.1 += 1;
        }
    }
    centres.push(acc.0 / acc.1 as f64);
    if centres.len() < 2 {
        return Err(Error::Fit(format!("sites form a single line along {axis}")));
    }
    let mut steps: Vec<f64> = centres.windows(2).map(|w| w[1] - w[0]).collect();
    steps.sort_by(f64::total_cmp);
    let guess = steps[0];
    let base = centres[0];

    let n: Vec<f64> = coords.iter().map(|c| ((c - base) / guess).round()).collect();
    let m = coords.len() as f64;
    let mean_n = n.iter().sum::<f64>() / m;
    let mean_c = coords.iter().sum::<f64>() / m;
    let snn: f64 = n.iter().map(|v| (v - mean_n).powi(2)).sum();
    let snc: f64 = n.iter().zip(coords).map(|(v, c)| (v - mean_n) * (c - mean_c)).sum();
    if snn == 0.0 {
        return Err(Error::Fit(format!("degenerate index spread along {axis}")));
    }
    let pitch = snc / snn;
    let intercept = mean_c - pitch * mean_n;
    Ok((pitch, intercept.rem_euclid(pitch)))
}

pub fn estimate_pitch_points(points: &[[f64; 2]]) -> Result<LatticeFit> {
    if points.len() < 4 {
        return Err(Error::Fit(format!("need at least 2×2 sites, got {}", points.len())));
    }
    let xs: Vec<f64> = points.iter().map(|p| p[0]).collect();
    let ys: Vec<f64> = points.iter().map(|p| p[1]).collect();
    let (px, ox) = fit_axis(&xs, 'x')?;
    let (py, oy) = fit_axis(&ys, 'y')?;
    Ok(LatticeFit { pitch: [px, py], offset: [ox, oy] })
}

/// Lattice vectors and offset of extracted sites, assuming the grid axes
/// are aligned with x and y.
pub fn estimate_pitch(sites: &[TrapSite]) -> Result<LatticeFit> {
    let pts: Vec<[f64; 2]> = sites.iter().map(|s| [s.position[0], s.position[1]]).collect();
    estimate_pitch_points(&pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand_distr_free::normal;

    /// Box–Muller, kept local so the test does not need a distribution crate.
    mod rand_distr_free {
        use rand::Rng;
        pub fn normal(rng: &mut impl Rng) -> f64 {
            let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
            let u2: f64 = rng.random();
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        }
    }

    fn grid(a: f64, n: i64, off: [f64; 2]) -> Vec<[f64; 2]> {
        let mut v = Vec::new();
        for j in -n..n {
            for i in -n..n {
                v.push([off[0] + i as f64 * a, off[1] + j as f64 * a]);
            }
        }
        v
    }

    #[test]
    fn perfect_grid() {
        let a = 14.1e-6;
        let fit = estimate_pitch_points(&grid(a, 4, [0.0, 0.0])).unwrap();
        assert!((fit.pitch[0] - a).abs() < 1e-15 && (fit.pitch[1] - a).abs() < 1e-15);
        let shifted = estimate_pitch_points(&grid(a, 4, [a / 2.0, a / 2.0])).unwrap();
        let rel = shifted.offset_relative_to(&fit);
        assert!((rel[0].abs() - a / 2.0).abs() < 1e-12);
    }

    #[test]
    fn noisy_grid_recovers_pitch() {
        let a = 14.1e-6;
        let mut rng = rng_from_seed(11);
        let pts: Vec<[f64; 2]> = grid(a, 5, [1e-6, -2e-6])
            .into_iter()
            .map(|p| [p[0] + 0.01 * a * normal(&mut rng), p[1] + 0.01 * a * normal(&mut rng)])
            .collect();
        let fit = estimate_pitch_points(&pts).unwrap();
        for p in fit.pitch {
            assert!((p / a - 1.0).abs() < 0.005);
        }
    }

    #[test]
    fn missing_columns_do_not_break_the_fit() {
        let a = 10.3e-6;
        let pts: Vec<[f64; 2]> = grid(a, 3, [0.0, 0.0]).into_iter().filter(|p| (p[0] / a).round() as i64 != 1).collect();
        let fit = estimate_pitch_points(&pts).unwrap();
        assert!((fit.pitch[0] - a).abs() < 1e-15);
    }

    #[test]
    fn collinear_sites_are_rejected() {
        let pts: Vec<[f64; 2]> = (0..5).map(|i| [i as f64, 0.0]).collect();
        assert!(matches!(estimate_pitch_points(&pts), Err(Error::Fit(_))));
        assert!(matches!(estimate_pitch_points(&pts[..3]), Err(Error::Fit(_))));
    }
}
