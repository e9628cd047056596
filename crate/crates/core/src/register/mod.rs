//! Site geometry of single-atom registers in one Talbot plane, including
//! sublattices displaced by tilted illumination.

mod geometry;
mod interleave;

use serde::{Deserialize, Serialize};

use crate::analysis::PlaneLabel;
use crate::error::{domain, Result};
use crate::optics::OpticalConfig;

pub use geometry::{composite_pitch, validate_separation, Violation};
pub use interleave::{interleave, InterleaveSpec, Interleaved};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegisterSite {
    pub i: i64,
    pub j: i64,
    pub x_m: f64,
    pub y_m: f64,
}

/// Ordered sites of one (sub)lattice in one plane. Sites are kept sorted by
/// `(i, j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Register {
    pub plane: PlaneLabel,
    pub pitch_m: f64,
    pub origin_offset_m: [f64; 2],
    #[serde(default, skip_serializing_if = "is_zero")]
    pub sublattice_id: u32,
    pub sites: Vec<RegisterSite>,
}

fn is_zero(v: &u32) -> bool {
    *v == 0
}

fn centred(n: usize) -> std::ops::Range<i64> {
    let lo = -((n / 2) as i64);
    lo..lo + n as i64
}

/// Site `(i, j)` of a square register sits at `origin_offset + (i, j)·pitch`;
/// indices run over `-(n/2) .. n - n/2` per axis so the register is centred
/// on the optical axis.
pub fn build_register(config: &OpticalConfig, plane: PlaneLabel, rows: usize, cols: usize) -> Result<Register> {
    config.validate()?;
    Register::grid(config.pitch_m, plane, rows, cols)
}

impl Register {
    pub fn grid(pitch: f64, plane: PlaneLabel, rows: usize, cols: usize) -> Result<Register> {
        if rows == 0 || cols == 0 {
            return domain(format!("register needs at least one row and column, got {rows}×{cols}"));
        }
        if !(pitch > 0.0) {
            return domain(format!("register pitch must be positive, got {pitch}"));
        }
        if !plane.is_principal() {
            return domain(format!(
                "{plane} is a fractional plane; registers are built in integer and half-integer planes only"
            ));
        }
        let off = if plane.is_half_integer() { 0.5 * pitch } else { 0.0 };
        let mut sites = Vec::with_capacity(rows * cols);
        for i in centred(cols) {
            for j in centred(rows) {
                sites.push(RegisterSite { i, j, x_m: off + i as f64 * pitch, y_m: off + j as f64 * pitch });
            }
        }
        Ok(Register { plane, pitch_m: pitch, origin_offset_m: [off, off], sublattice_id: 0, sites })
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn index_of(&self, i: i64, j: i64) -> Option<usize> {
        self.sites.binary_search_by(|s| (s.i, s.j).cmp(&(i, j))).ok()
    }

    pub fn position(&self, k: usize) -> [f64; 2] {
        [self.sites[k].x_m, self.sites[k].y_m]
    }

    /// Copy shifted laterally by `d`, relabelled as sublattice `id`.
    pub fn translated(&self, d: [f64; 2], id: u32) -> Register {
        Register {
            plane: self.plane,
            pitch_m: self.pitch_m,
            origin_offset_m: [self.origin_offset_m[0] + d[0], self.origin_offset_m[1] + d[1]],
            sublattice_id: id,
            sites: self
                .sites
                .iter()
                .map(|s| RegisterSite { x_m: s.x_m + d[0], y_m: s.y_m + d[1], ..*s })
                .collect(),
        }
    }

    /// Checks that every site sits at `origin_offset + (i, j)·pitch` within
    /// `tol` and that sites are sorted and unique.
    pub fn check(&self, tol: f64) -> Result<()> {
        for w in self.sites.windows(2) {
            if (w[0].i, w[0].j) >= (w[1].i, w[1].j) {
                return domain("register sites must be sorted by (i, j) without duplicates");
            }
        }
        for s in &self.sites {
            let ex = self.origin_offset_m[0] + s.i as f64 * self.pitch_m;
            let ey = self.origin_offset_m[1] + s.j as f64 * self.pitch_m;
            if (s.x_m - ex).abs() > tol || (s.y_m - ey).abs() > tol {
                return domain(format!("site ({}, {}) is off its lattice position", s.i, s.j));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Register> {
        let r: Register = serde_json::from_str(s)?;
        r.check(1e-6 * r.pitch_m)?;
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::UM;

    #[test]
    fn integer_plane_register() {
        let c = OpticalConfig::assembly_lattice();
        let r = build_register(&c, PlaneLabel::ZERO, 19, 19).unwrap();
        assert_eq!(r.len(), 361);
        assert_eq!(r.origin_offset_m, [0.0, 0.0]);
        let k = r.index_of(0, 0).unwrap();
        assert_eq!(r.position(k), [0.0, 0.0]);
        let k = r.index_of(9, -9).unwrap();
        assert!((r.position(k)[0] - 9.0 * 10.3 * UM).abs() < 1e-15);
        assert!(r.index_of(10, 0).is_none());
        r.check(1e-15).unwrap();
    }

    #[test]
    fn half_integer_plane_is_shifted() {
        let c = OpticalConfig::dense_lattice();
        let r = build_register(&c, PlaneLabel::half(1), 2, 2).unwrap();
        let a = c.pitch_m;
        assert_eq!(r.origin_offset_m, [a / 2.0, a / 2.0]);
        assert_eq!(r.len(), 4);
    }

    #[test]
    fn single_site_sits_at_offset() {
        let c = OpticalConfig::dense_lattice();
        let r = build_register(&c, PlaneLabel::half(-1), 1, 1).unwrap();
        assert_eq!(r.position(0), r.origin_offset_m);
    }

    #[test]
    fn quarter_planes_and_empty_shapes_are_rejected() {
        let c = OpticalConfig::dense_lattice();
        assert!(build_register(&c, PlaneLabel::new(-3, 4).unwrap(), 3, 3).is_err());
        assert!(build_register(&c, PlaneLabel::ZERO, 0, 3).is_err());
    }

    #[test]
    fn json_round_trip_keeps_schema() {
        let c = OpticalConfig::dense_lattice();
        let r = build_register(&c, PlaneLabel::half(1), 2, 3).unwrap();
        let s = r.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["plane"], "1/2");
        assert!(v["pitch_m"].is_f64());
        assert_eq!(v["origin_offset_m"].as_array().unwrap().len(), 2);
        let site = &v["sites"][0];
        for k in ["i", "j", "x_m", "y_m"] {
            assert!(site.get(k).is_some());
        }
        assert_eq!(Register::from_json(&s).unwrap(), r);
    }
}
