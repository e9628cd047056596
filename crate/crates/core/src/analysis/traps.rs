use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::plane::{classify_plane, PlaneLabel};
use super::region::Region;
use crate::error::{Error, Result};
use crate::optics::IntensityMap;

/// A trap found in an intensity slice.
#[derive(Debug, Clone, PartialEq)]
pub struct TrapSite {
    pub position: [f64; 3],
    /// 1/e² intensity radius.
    pub waist: f64,
    /// Peak intensity over the slice maximum, in (0, 1].
    pub rel_depth: f64,
    pub plane: PlaneLabel,
    pub site_index: (i64, i64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractOptions {
    /// Keep maxima at or above this fraction of the slice maximum.
    pub min_rel_depth: f64,
    /// Used to label the slice's plane.
    pub talbot_length: f64,
    /// Seed for the waist fit patch; estimated from the profile if absent.
    pub expected_waist: Option<f64>,
    /// Only report sites whose refined position lies inside this window.
    pub region: Option<Region>,
}

impl ExtractOptions {
    pub fn new(min_rel_depth: f64, talbot_length: f64) -> Self {
        ExtractOptions { min_rel_depth, talbot_length, expected_waist: None, region: None }
    }

    pub fn with_expected_waist(mut self, w: f64) -> Self {
        self.expected_waist = Some(w);
        self
    }

    pub fn with_region(mut self, r: Region) -> Self {
        self.region = Some(r);
        self
    }
}

/// Vertex of the parabola through `(-1, a), (0, b), (1, c)`: offset and value.
fn parabola_vertex(a: f64, b: f64, c: f64) -> (f64, f64) {
    let curv = a - 2.0 * b + c;
    if curv >= 0.0 {
        return (0.0, b);
    }
    let t = (0.5 * (a - c) / curv).clamp(-0.5, 0.5);
    (t, b + 0.25 * (c - a) * t)
}

/// Sub-sample refinement in log intensity, which is exact for Gaussian peaks;
/// falls back to linear intensity if a neighbour is not positive.
fn refine(map: &IntensityMap, ix: usize, iy: usize) -> (f64, f64, f64) {
    let v = |x: usize, y: usize| map.at(x, y);
    let (l, c, r) = (v(ix - 1, iy), v(ix, iy), v(ix + 1, iy));
    let (d, u) = (v(ix, iy - 1), v(ix, iy + 1));
    if l > 0.0 && r > 0.0 && d > 0.0 && u > 0.0 && c > 0.0 {
        let (tx, px) = parabola_vertex(l.ln(), c.ln(), r.ln());
        let (ty, py) = parabola_vertex(d.ln(), c.ln(), u.ln());
        (tx, ty, (px + py - c.ln()).exp())
    } else {
        let (tx, px) = parabola_vertex(l, c, r);
        let (ty, py) = parabola_vertex(d, c, u);
        (tx, ty, px + py - c)
    }
}

/// 1/e² radius along +x and −x from the peak sample, by linear interpolation.
fn profile_waist(map: &IntensityMap, ix: usize, iy: usize) -> Option<f64> {
    let peak = map.at(ix, iy);
    let target = peak * (-2.0f64).exp();
    let nx = map.grid.nx;
    let walk = |step: isize| -> Option<f64> {
        let mut k = ix as isize;
        loop {
            let next = k + step;
            if next < 0 || next >= nx as isize {
                return None;
            }
            let (a, b) = (map.at(k as usize, iy), map.at(next as usize, iy));
            if b > a {
                return None; // climbing into a neighbour before reaching 1/e²
            }
            if b < target {
                let t = (a - target) / (a - b);
                return Some(((k - ix as isize).abs() as f64 + t) * map.grid.dx);
            }
            k = next;
        }
    };
    match (walk(1), walk(-1)) {
        (Some(a), Some(b)) => Some(0.5 * (a + b)),
        (Some(a), None) | (None, Some(a)) => Some(a),
        (None, None) => None,
    }
}

/// Weighted fit of `ln I = a − 2r²/w²` over samples within `radius` of
/// `(cx, cy)`; weights `I²` keep the fit on the core of the spot.
fn fit_waist(map: &IntensityMap, cx: f64, cy: f64, radius: f64) -> Option<f64> {
    let g = &map.grid;
    let (sx, sy) = g.to_sample(cx, cy);
    let rx = (radius / g.dx).ceil() as isize;
    let ry = (radius / g.dy).ceil() as isize;
    let (mut sw, mut sx_, mut sy_, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for iy in (sy.round() as isize - ry)..=(sy.round() as isize + ry) {
        if iy < 0 || iy >= g.ny as isize {
            continue;
        }
        for ix in (sx.round() as isize - rx)..=(sx.round() as isize + rx) {
            if ix < 0 || ix >= g.nx as isize {
                continue;
            }
            let (x, y) = (g.x(ix as usize), g.y(iy as usize));
            let r2 = (x - cx).powi(2) + (y - cy).powi(2);
            let i = map.at(ix as usize, iy as usize);
            if r2 > radius * radius || i <= 0.0 {
                continue;
            }
            let w = i * i;
            let l = i.ln();
            sw += w;
            sx_ += w * r2;
            sy_ += w * l;
            sxx += w * r2 * r2;
            sxy += w * r2 * l;
        }
    }
    let det = sw * sxx - sx_ * sx_;
    if sw == 0.0 || det.abs() <= f64::EPSILON * sw * sxx {
        return None;
    }
    let slope = (sw * sxy - sx_ * sy_) / det;
    (slope < 0.0).then(|| (-2.0 / slope).sqrt())
}

/// Groups sorted coordinates whose gaps are at most `tol`; returns one
/// integer label per input, with 0 for the group closest to the origin.
fn cluster_axis(values: &[f64], tol: f64) -> Vec<i64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut labels = vec![0i64; values.len()];
    let mut centres: Vec<(f64, usize)> = Vec::new();
    let mut current = -1i64;
    let mut last = f64::NEG_INFINITY;
    for &k in &order {
        if values[k] - last > tol {
            current += 1;
            centres.push((0.0, 0));
        }
        last = values[k];
        labels[k] = current;
        let c = centres.last_mut().expect("pushed above");
        c.0 += values[k];
        c.1 += 1;
    }
    let zero = centres
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 .0 / a.1 .1 as f64).abs().total_cmp(&(b.1 .0 / b.1 .1 as f64).abs()))
        .map_or(0, |(i, _)| i as i64);
    labels.iter().map(|l| l - zero).collect()
}

/// Local intensity maxima above `min_rel_depth` of the slice maximum,
/// refined to sub-sample precision, with fitted waists.
///
/// Returns an empty list when nothing clears the threshold.
pub fn extract_traps(map: &IntensityMap, opts: &ExtractOptions) -> Result<Vec<TrapSite>> {
    let g = map.grid;
    if g.nx < 3 || g.ny < 3 {
        return Err(Error::Sampling("trap extraction needs at least 3×3 samples".into()));
    }
    let global = map.max();
    if !(global > 0.0) {
        return Ok(Vec::new());
    }
    let threshold = opts.min_rel_depth * global;
    let plane = classify_plane(map.z, opts.talbot_length, 4)?;

    struct Peak {
        x: f64,
        y: f64,
        value: f64,
        seed_waist: Option<f64>,
    }
    let mut peaks = Vec::new();
    for iy in 1..g.ny - 1 {
        for ix in 1..g.nx - 1 {
            let c = map.at(ix, iy);
            if c < threshold || c <= 0.0 {
                continue;
            }
            // Strictly above neighbours earlier in raster order, at least
            // equal to later ones: one winner per plateau.
            let mut is_max = true;
            'n: for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let n = map.at((ix as isize + dx) as usize, (iy as isize + dy) as usize);
                    let earlier = dy < 0 || (dy == 0 && dx < 0);
                    if (earlier && n >= c) || (!earlier && n > c) {
                        is_max = false;
                        break 'n;
                    }
                }
            }
            if !is_max {
                continue;
            }
            let (tx, ty, value) = refine(map, ix, iy);
            let x = g.x(ix) + tx * g.dx;
            let y = g.y(iy) + ty * g.dy;
            if let Some(r) = opts.region {
                if !r.contains(x, y) {
                    continue;
                }
            }
            let seed_waist = opts.expected_waist.or_else(|| profile_waist(map, ix, iy));
            peaks.push(Peak { x, y, value, seed_waist });
        }
    }
    if peaks.is_empty() {
        return Ok(Vec::new());
    }

    let norm = peaks.iter().map(|p| p.value).fold(global, f64::max);
    let mut sites: Vec<TrapSite> = peaks
        .iter()
        .map(|p| {
            let seed = p.seed_waist.unwrap_or(2.0 * g.dx.max(g.dy));
            let waist = fit_waist(map, p.x, p.y, 2.5 * seed).unwrap_or(seed);
            TrapSite {
                position: [p.x, p.y, map.z],
                waist,
                rel_depth: (p.value / norm).clamp(f64::MIN_POSITIVE, 1.0),
                plane,
                site_index: (0, 0),
            }
        })
        .collect();

    let mut waists: Vec<f64> = sites.iter().map(|s| s.waist).collect();
    waists.sort_by(f64::total_cmp);
    let tol = waists[waists.len() / 2].max(2.0 * g.dx.max(g.dy));
    let xs: Vec<f64> = sites.iter().map(|s| s.position[0]).collect();
    let ys: Vec<f64> = sites.iter().map(|s| s.position[1]).collect();
    let ix = cluster_axis(&xs, tol);
    let iy = cluster_axis(&ys, tol);
    for (k, s) in sites.iter_mut().enumerate() {
        s.site_index = (ix[k], iy[k]);
    }
    sites.sort_by_key(|s| s.site_index);
    Ok(sites)
}

#[derive(Debug, Serialize, Deserialize)]
struct TrapRow {
    x_m: f64,
    y_m: f64,
    z_m: f64,
    waist_m: f64,
    rel_depth: f64,
    plane: PlaneLabel,
    i: i64,
    j: i64,
}

/// CSV with header `x_m,y_m,z_m,waist_m,rel_depth,plane,i,j`.
pub fn write_trap_table<W: Write>(out: W, sites: &[TrapSite]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if sites.is_empty() {
        w.write_record(["x_m", "y_m", "z_m", "waist_m", "rel_depth", "plane", "i", "j"])?;
    }
    for s in sites {
        w.serialize(TrapRow {
            x_m: s.position[0],
            y_m: s.position[1],
            z_m: s.position[2],
            waist_m: s.waist,
            rel_depth: s.rel_depth,
            plane: s.plane,
            i: s.site_index.0,
            j: s.site_index.1,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trap_table<R: Read>(input: R) -> Result<Vec<TrapSite>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize::<TrapRow>()
        .map(|row| {
            let row = row?;
            Ok(TrapSite {
                position: [row.x_m, row.y_m, row.z_m],
                waist: row.waist_m,
                rel_depth: row.rel_depth,
                plane: row.plane,
                site_index: (row.i, row.j),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{beam_array_field, GaussianBeamlet, GridSpec, LatticeBeamArray};
    use crate::units::{NM, UM};

    const LAMBDA: f64 = 798.6 * NM;
    const W0: f64 = 1.45 * UM;
    const ZT: f64 = 497.9 * UM;

    fn single(center: [f64; 2]) -> IntensityMap {
        let g = GridSpec::square(128, W0 / 10.0).unwrap();
        beam_array_field(&[GaussianBeamlet::new(center, W0)], LAMBDA, g, 0.0).unwrap().intensity()
    }

    #[test]
    fn single_gaussian_is_one_site_with_its_waist() {
        let c = [0.37 * UM, -0.21 * UM];
        let sites = extract_traps(&single(c), &ExtractOptions::new(0.5, ZT)).unwrap();
        assert_eq!(sites.len(), 1);
        let s = &sites[0];
        assert!((s.position[0] - c[0]).abs() < 1e-12);
        assert!((s.position[1] - c[1]).abs() < 1e-12);
        assert!((s.waist / W0 - 1.0).abs() < 0.02, "{}", s.waist / W0);
        assert!((s.rel_depth - 1.0).abs() < 1e-12);
        assert_eq!(s.plane, PlaneLabel::ZERO);
    }

    #[test]
    fn threshold_above_one_gives_empty_list() {
        let sites = extract_traps(&single([0.0, 0.0]), &ExtractOptions::new(1.01, ZT)).unwrap();
        assert!(sites.is_empty());
    }

    #[test]
    fn lattice_sites_are_indexed_from_the_axis() {
        let arr = LatticeBeamArray::square(4, 14.1 * UM, W0, LAMBDA);
        let g = GridSpec::for_array(14.1 * UM, 4, W0, 8.0, 4.0).unwrap();
        let map = arr.field(g, 0.0).unwrap().intensity();
        let sites = extract_traps(&map, &ExtractOptions::new(0.1, ZT)).unwrap();
        assert_eq!(sites.len(), 16);
        let origin = sites.iter().find(|s| s.site_index == (0, 0)).unwrap();
        assert!(origin.position[0].abs() < 1e-9 && origin.position[1].abs() < 1e-9);
        let far = sites.iter().find(|s| s.site_index == (-2, 1)).unwrap();
        assert!((far.position[0] + 28.2 * UM).abs() < 1e-9);
        for s in &sites {
            assert!((s.waist / W0 - 1.0).abs() < 0.02);
        }
    }

    #[test]
    fn trap_table_round_trip() {
        let sites = extract_traps(&single([0.0, 0.0]), &ExtractOptions::new(0.5, ZT)).unwrap();
        let mut buf = Vec::new();
        write_trap_table(&mut buf, &sites).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x_m,y_m,z_m,waist_m,rel_depth,plane,i,j\n"));
        assert_eq!(read_trap_table(buf.as_slice()).unwrap(), sites);

        let mut empty = Vec::new();
        write_trap_table(&mut empty, &[]).unwrap();
        assert_eq!(String::from_utf8(empty).unwrap(), "x_m,y_m,z_m,waist_m,rel_depth,plane,i,j\n");
    }
}
