use num_complex::Complex64;

use super::region::Region;
use crate::error::{domain, Error, Result};
use crate::optics::IntensityMap;

/// Peak normalised cross-correlation of two intensity slices and the
/// lateral shift `s` that maximises it (`b(r + s) ≈ a(r)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fidelity {
    pub value: f64,
    pub shift: [f64; 2],
}

fn check_pair(a: &IntensityMap, b: &IntensityMap) -> Result<()> {
    if !a.grid.same_geometry(&b.grid) {
        return Err(Error::Sampling("fidelity needs identical grid geometry".into()));
    }
    for (name, m) in [("first", a), ("second", b)] {
        if !(m.values.iter().sum::<f64>() > 0.0) {
            return domain(format!("{name} slice carries no power"));
        }
    }
    Ok(())
}

fn centred(values: &[f64]) -> (Vec<f64>, f64) {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let c: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    (c, norm)
}

/// `c(s) = Σ_r t(r)·b(r + s)` for all circular shifts.
fn correlate(t: &[f64], b: &[f64], nx: usize, ny: usize) -> Vec<f64> {
    let mut ft: Vec<Complex64> = t.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut fb: Vec<Complex64> = b.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    crate::optics::fft_forward(&mut ft, nx, ny);
    crate::optics::fft_forward(&mut fb, nx, ny);
    for (p, q) in ft.iter_mut().zip(&fb) {
        *p = p.conj() * q;
    }
    crate::optics::fft_inverse(&mut ft, nx, ny);
    ft.into_iter().map(|v| v.re).collect()
}

fn signed(k: usize, n: usize) -> f64 {
    if k > n / 2 {
        k as f64 - n as f64
    } else {
        k as f64
    }
}

/// Sub-sample offset of the maximum of a parabola through three samples.
fn vertex(a: f64, b: f64, c: f64) -> f64 {
    let curv = a - 2.0 * b + c;
    if curv >= 0.0 {
        0.0
    } else {
        (0.5 * (a - c) / curv).clamp(-0.5, 0.5)
    }
}

/// Pearson correlation maximised over all circular lateral shifts of the
/// full grid. Symmetric in its arguments.
pub fn self_image_fidelity(a: &IntensityMap, b: &IntensityMap) -> Result<Fidelity> {
    check_pair(a, b)?;
    let (nx, ny) = (a.grid.nx, a.grid.ny);
    let (ca, na) = centred(&a.values);
    let (cb, nb) = centred(&b.values);
    if na == 0.0 || nb == 0.0 {
        let value = if na == 0.0 && nb == 0.0 { 1.0 } else { 0.0 };
        return Ok(Fidelity { value, shift: [0.0, 0.0] });
    }
    let c = correlate(&ca, &cb, nx, ny);
    let (best, _) = c.iter().enumerate().max_by(|p, q| p.1.total_cmp(q.1)).expect("non-empty grid");
    let (kx, ky) = (best % nx, best / nx);
    let at = |x: usize, y: usize| c[y * nx + x];
    let tx = vertex(at((kx + nx - 1) % nx, ky), at(kx, ky), at((kx + 1) % nx, ky));
    let ty = vertex(at(kx, (ky + ny - 1) % ny), at(kx, ky), at(kx, (ky + 1) % ny));
    Ok(Fidelity {
        value: (c[best] / (na * nb)).clamp(-1.0, 1.0),
        shift: [(signed(kx, nx) + tx) * a.grid.dx, (signed(ky, ny) + ty) * a.grid.dy],
    })
}

/// Template matching of `a` restricted to `region` against `b`, over shifts
/// up to `max_shift` per axis. The correlation is normalised over the
/// shifted window of `b`, so edge content outside the region does not
/// contribute.
pub fn self_image_fidelity_in(
    a: &IntensityMap,
    b: &IntensityMap,
    region: &Region,
    max_shift: f64,
) -> Result<Fidelity> {
    check_pair(a, b)?;
    let g = a.grid;
    let (nx, ny) = (g.nx, g.ny);
    let (x0, x1, y0, y1) = region.sample_rect(&g);
    if x1 <= x0 + 2 || y1 <= y0 + 2 {
        return domain("fidelity region covers fewer than 3×3 samples");
    }
    let (w, h) = (x1 - x0, y1 - y0);
    let count = (w * h) as f64;

    let mut sum = 0.0;
    for y in y0..y1 {
        for x in x0..x1 {
            sum += a.at(x, y);
        }
    }
    let mean = sum / count;
    let mut template = vec![0.0; g.len()];
    let mut tnorm = 0.0;
    for y in y0..y1 {
        for x in x0..x1 {
            let v = a.at(x, y) - mean;
            template[y * nx + x] = v;
            tnorm += v * v;
        }
    }
    let tnorm = tnorm.sqrt();
    let num = correlate(&template, &b.values, nx, ny);

    // Summed-area tables of b and b².
    let mut s1 = vec![0.0; (nx + 1) * (ny + 1)];
    let mut s2 = vec![0.0; (nx + 1) * (ny + 1)];
    for y in 0..ny {
        for x in 0..nx {
            let v = b.at(x, y);
            let k = (y + 1) * (nx + 1) + x + 1;
            s1[k] = v + s1[k - 1] + s1[k - nx - 1] - s1[k - nx - 2];
            s2[k] = v * v + s2[k - 1] + s2[k - nx - 1] - s2[k - nx - 2];
        }
    }
    let rect = |s: &[f64], xa: usize, ya: usize| {
        let (xb, yb) = (xa + w, ya + h);
        s[yb * (nx + 1) + xb] - s[ya * (nx + 1) + xb] - s[yb * (nx + 1) + xa] + s[ya * (nx + 1) + xa]
    };
    let ncc = |sx: isize, sy: isize| -> Option<f64> {
        let xa = x0 as isize + sx;
        let ya = y0 as isize + sy;
        if xa < 0 || ya < 0 || xa as usize + w > nx || ya as usize + h > ny {
            return None;
        }
        let (xa, ya) = (xa as usize, ya as usize);
        let m1 = rect(&s1, xa, ya);
        let var = rect(&s2, xa, ya) - m1 * m1 / count;
        if !(var > 0.0) || tnorm == 0.0 {
            return Some(0.0);
        }
        let k = sy.rem_euclid(ny as isize) as usize * nx + sx.rem_euclid(nx as isize) as usize;
        Some(num[k] / (tnorm * var.sqrt()))
    };

    let rx = (max_shift / g.dx).ceil() as isize;
    let ry = (max_shift / g.dy).ceil() as isize;
    let mut best: Option<(f64, isize, isize)> = None;
    for sy in -ry..=ry {
        for sx in -rx..=rx {
            if let Some(v) = ncc(sx, sy) {
                // Ties go to the smaller shift.
                let better = match best {
                    None => true,
                    Some((bv, bx, by)) => v > bv || (v == bv && sx * sx + sy * sy < bx * bx + by * by),
                };
                if better {
                    best = Some((v, sx, sy));
                }
            }
        }
    }
    let (value, sx, sy) = best.ok_or_else(|| Error::Sampling("no admissible shift for the region".into()))?;
    let tx = match (ncc(sx - 1, sy), ncc(sx + 1, sy)) {
        (Some(l), Some(r)) => vertex(l, value, r),
        _ => 0.0,
    };
    let ty = match (ncc(sx, sy - 1), ncc(sx, sy + 1)) {
        (Some(d), Some(u)) => vertex(d, value, u),
        _ => 0.0,
    };
    Ok(Fidelity {
        value: value.clamp(-1.0, 1.0),
        shift: [(sx as f64 + tx) * g.dx, (sy as f64 + ty) * g.dy],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{GridSpec, LatticeBeamArray};
    use crate::units::{NM, UM};

    fn lattice(z: f64) -> IntensityMap {
        let arr = LatticeBeamArray::square(4, 8.0 * UM, 1.0 * UM, 800.0 * NM);
        arr.field(GridSpec::square(256, 0.125 * UM).unwrap(), z).unwrap().intensity()
    }

    #[test]
    fn identical_slices_are_perfect() {
        let a = lattice(0.0);
        let f = self_image_fidelity(&a, &a).unwrap();
        assert!((f.value - 1.0).abs() < 1e-12);
        assert_eq!(f.shift, [0.0, 0.0]);
        let r = Region::new([-8.0 * UM, 4.0 * UM], [-8.0 * UM, 4.0 * UM]);
        let f = self_image_fidelity_in(&a, &a, &r, 3.0 * UM).unwrap();
        assert!((f.value - 1.0).abs() < 1e-9);
        assert!(f.shift[0].abs() < 0.05 * 0.125 * UM && f.shift[1].abs() < 0.05 * 0.125 * UM);
    }

    #[test]
    fn recovers_integer_roll() {
        let a = lattice(0.0);
        let b = a.rolled(5, -3);
        let f = self_image_fidelity(&a, &b).unwrap();
        assert!((f.value - 1.0).abs() < 1e-9);
        assert!((f.shift[0] - 5.0 * 0.125 * UM).abs() < 0.2 * 0.125 * UM);
        assert!((f.shift[1] + 3.0 * 0.125 * UM).abs() < 0.2 * 0.125 * UM);
        let r = Region::new([-8.0 * UM, 4.0 * UM], [-8.0 * UM, 4.0 * UM]);
        let f = self_image_fidelity_in(&a, &b, &r, 2.0 * UM).unwrap();
        assert!((f.value - 1.0).abs() < 1e-9);
        assert!((f.shift[0] - 5.0 * 0.125 * UM).abs() < 0.2 * 0.125 * UM);
    }

    #[test]
    fn symmetric_in_arguments() {
        let a = lattice(0.0);
        let b = lattice(20.0 * UM);
        let ab = self_image_fidelity(&a, &b).unwrap();
        let ba = self_image_fidelity(&b, &a).unwrap();
        assert!((ab.value - ba.value).abs() < 1e-12);
    }

    #[test]
    fn zero_power_is_a_domain_error() {
        let a = lattice(0.0);
        let z = a.scaled(0.0);
        assert!(matches!(self_image_fidelity(&a, &z), Err(Error::Domain(_))));
    }
}
