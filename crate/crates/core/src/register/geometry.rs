use std::collections::HashMap;

use super::Register;
use crate::error::{domain, Result};

/// Two sites of different registers closer than the minimum separation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    /// `(register index, site index)`, with the lower register index first.
    pub first: (usize, usize),
    pub second: (usize, usize),
    pub distance_m: f64,
}

/// Relative slack below which a distance counts as equal to `min_sep`.
const BOUNDARY_SLACK: f64 = 1e-9;

/// All cross-register site pairs with `distance < min_sep`. A pair at
/// exactly `min_sep` (to one part in 10⁹) is not a violation.
pub fn validate_separation(registers: &[Register], min_sep: f64) -> Result<Vec<Violation>> {
    if let Some(r) = registers.iter().find(|r| r.plane != registers[0].plane) {
        return domain(format!("registers span planes {} and {}", registers[0].plane, r.plane));
    }
    if !(min_sep > 0.0) {
        return Ok(Vec::new());
    }
    let limit = min_sep * (1.0 - BOUNDARY_SLACK);
    let cell = |x: f64, y: f64| ((x / min_sep).floor() as i64, (y / min_sep).floor() as i64);
    let mut out = Vec::new();
    for (rb, b) in registers.iter().enumerate() {
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (k, s) in b.sites.iter().enumerate() {
            buckets.entry(cell(s.x_m, s.y_m)).or_default().push(k);
        }
        for (ra, a) in registers.iter().enumerate().take(rb) {
            for (ka, s) in a.sites.iter().enumerate() {
                let (cx, cy) = cell(s.x_m, s.y_m);
                let mut near: Vec<(usize, f64)> = Vec::new();
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        for &kb in buckets.get(&(cx + dx, cy + dy)).into_iter().flatten() {
                            let t = &b.sites[kb];
                            let d = (s.x_m - t.x_m).hypot(s.y_m - t.y_m);
                            if d < limit {
                                near.push((kb, d));
                            }
                        }
                    }
                }
                near.sort_by_key(|p| p.0);
                out.extend(near.into_iter().map(|(kb, d)| Violation { first: (ra, ka), second: (rb, kb), distance_m: d }));
            }
        }
    }
    out.sort_by_key(|v| (v.first, v.second));
    Ok(out)
}

/// Smallest nearest-neighbour distance in the union of all sites;
/// infinite when fewer than two sites exist.
pub fn composite_pitch(registers: &[Register]) -> f64 {
    let pts: Vec<(f64, f64)> =
        registers.iter().flat_map(|r| r.sites.iter().map(|s| (s.x_m, s.y_m))).collect();
    let mut best = f64::INFINITY;
    for (k, p) in pts.iter().enumerate() {
        for q in &pts[k + 1..] {
            best = best.min((p.0 - q.0).hypot(p.1 - q.1));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::PlaneLabel;
    use crate::units::UM;

    fn pair(offset: [f64; 2]) -> Vec<Register> {
        let base = Register::grid(14.1 * UM, PlaneLabel::half(1), 5, 5).unwrap();
        let other = base.translated(offset, 1);
        vec![base, other]
    }

    #[test]
    fn five_micron_offset_is_valid_at_three() {
        assert!(validate_separation(&pair([0.0, 5.0 * UM]), 3.0 * UM).unwrap().is_empty());
    }

    #[test]
    fn two_micron_offset_violates_once_per_site() {
        let regs = pair([2.0 * UM, 0.0]);
        let v = validate_separation(&regs, 3.0 * UM).unwrap();
        assert_eq!(v.len(), 25);
        for (k, viol) in v.iter().enumerate() {
            assert_eq!(viol.first, (0, k));
            assert_eq!(viol.second, (1, k));
            assert!((viol.distance_m - 2.0 * UM).abs() < 1e-15);
        }
    }

    #[test]
    fn single_register_never_violates() {
        let r = Register::grid(1.0 * UM, PlaneLabel::ZERO, 4, 4).unwrap();
        assert!(validate_separation(&[r], 3.0 * UM).unwrap().is_empty());
    }

    #[test]
    fn boundary_distance_is_not_a_violation() {
        let regs = pair([0.0, 5.0 * UM]);
        assert!(validate_separation(&regs, 5.0 * UM).unwrap().is_empty());
        assert_eq!(validate_separation(&regs, 5.01 * UM).unwrap().len(), 25);
    }

    #[test]
    fn composite_pitches() {
        let a = 14.1 * UM;
        let one = Register::grid(a, PlaneLabel::half(1), 4, 4).unwrap();
        assert!((composite_pitch(std::slice::from_ref(&one)) - a).abs() < 1e-15);
        let diag = composite_pitch(&pair([a / 2.0, a / 2.0]));
        assert!((diag - a / 2f64.sqrt()).abs() < 1e-12);
        assert!((diag / UM - 9.97).abs() < 0.01);
        assert!((composite_pitch(&pair([0.0, 5.0 * UM])) - 5.0 * UM).abs() < 1e-12);
        let single = Register::grid(a, PlaneLabel::ZERO, 1, 1).unwrap();
        assert!(composite_pitch(&[single]).is_infinite());
    }
}
