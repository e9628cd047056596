use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, Error, Result};

/// Axial position of a Talbot plane in units of the Talbot length, as a
/// reduced fraction with denominator 1, 2 or 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PlaneLabel {
    numerator: i64,
    denominator: u32,
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

impl PlaneLabel {
    pub const ZERO: PlaneLabel = PlaneLabel { numerator: 0, denominator: 1 };

    pub fn new(numerator: i64, denominator: u32) -> Result<Self> {
        if !matches!(denominator, 1 | 2 | 4) {
            return domain(format!("plane denominator must be 1, 2 or 4, got {denominator}"));
        }
        let g = gcd(numerator, denominator as i64).max(1);
        Ok(PlaneLabel { numerator: numerator / g, denominator: (denominator as i64 / g) as u32 })
    }

    pub fn integer(n: i64) -> Self {
        PlaneLabel { numerator: n, denominator: 1 }
    }

    pub fn half(n: i64) -> Self {
        Self::new(n, 2).expect("denominator 2 is valid")
    }

    pub fn numerator(&self) -> i64 {
        self.numerator
    }

    pub fn denominator(&self) -> u32 {
        self.denominator
    }

    pub fn value(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    /// Integer and half-integer planes reproduce the generating grid.
    pub fn is_principal(&self) -> bool {
        self.denominator <= 2
    }

    /// Half-integer planes, whose grid is displaced by half a pitch per axis.
    pub fn is_half_integer(&self) -> bool {
        self.denominator == 2
    }

    /// `"0"`, `"1/2"`, `"-3/4"`.
    pub fn fraction(&self) -> String {
        if self.denominator == 1 {
            self.numerator.to_string()
        } else {
            format!("{}/{}", self.numerator, self.denominator)
        }
    }
}

impl fmt::Display for PlaneLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T_{}", self.fraction())
    }
}

impl FromStr for PlaneLabel {
    type Err = Error;

    /// Accepts `1/2`, `-3/4`, `0`, `T_1/2`, `T_{-3/4}`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let t = t.strip_prefix("T_").or_else(|| t.strip_prefix('T')).unwrap_or(t);
        let t = t.trim_start_matches('{').trim_end_matches('}');
        let bad = || Error::Config(format!("cannot parse plane label {s:?}"));
        let (n, d) = match t.split_once('/') {
            Some((n, d)) => (n.trim().parse::<i64>().map_err(|_| bad())?, d.trim().parse::<u32>().map_err(|_| bad())?),
            None => (t.parse::<i64>().map_err(|_| bad())?, 1),
        };
        PlaneLabel::new(n, d).map_err(|_| bad())
    }
}

impl PartialOrd for PlaneLabel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PlaneLabel {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.numerator * other.denominator as i64).cmp(&(other.numerator * self.denominator as i64))
    }
}

impl Serialize for PlaneLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.fraction())
    }
}

impl<'de> Deserialize<'de> for PlaneLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Nearest fraction `n/d` of `z / z_t` with `d ∈ {1, 2, 4}` and
/// `d ≤ max_denominator`; ties go to the smaller denominator.
pub fn classify_plane(z: f64, talbot_length: f64, max_denominator: u32) -> Result<PlaneLabel> {
    if !(talbot_length > 0.0) {
        return domain(format!("talbot length must be positive, got {talbot_length}"));
    }
    let r = z / talbot_length;
    let mut best: Option<(f64, PlaneLabel)> = None;
    for d in [1u32, 2, 4].into_iter().filter(|&d| d <= max_denominator.max(1)) {
        let n = (r * d as f64).round() as i64;
        let dist = (r - n as f64 / d as f64).abs();
        if best.is_none_or(|(b, _)| dist < b - 1e-12) {
            best = Some((dist, PlaneLabel::new(n, d)?));
        }
    }
    Ok(best.expect("denominator 1 is always a candidate").1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_fractions() {
        let l = PlaneLabel::new(2, 4).unwrap();
        assert_eq!((l.numerator(), l.denominator()), (1, 2));
        assert_eq!(PlaneLabel::new(-4, 2).unwrap(), PlaneLabel::integer(-2));
        assert!(PlaneLabel::new(1, 3).is_err());
    }

    #[test]
    fn classifies_quoted_planes() {
        assert_eq!(classify_plane(248e-6, 497e-6, 4).unwrap(), PlaneLabel::half(1));
        assert_eq!(classify_plane(0.0, 497e-6, 4).unwrap(), PlaneLabel::ZERO);
        assert_eq!(classify_plane(-0.75 * 497e-6, 497e-6, 4).unwrap(), PlaneLabel::new(-3, 4).unwrap());
    }

    #[test]
    fn ties_prefer_small_denominators() {
        // 1/8 lies halfway between 0 and 1/4.
        assert_eq!(classify_plane(0.125, 1.0, 4).unwrap(), PlaneLabel::ZERO);
        assert_eq!(classify_plane(0.3, 1.0, 2).unwrap(), PlaneLabel::half(1));
        assert_eq!(classify_plane(0.3, 1.0, 1).unwrap(), PlaneLabel::ZERO);
    }

    #[test]
    fn rejects_non_positive_talbot_length() {
        assert!(classify_plane(1.0, 0.0, 4).is_err());
    }

    #[test]
    fn parses_and_prints() {
        for s in ["0", "1/2", "-3/4", "T_-1", "T_{1/4}"] {
            let l: PlaneLabel = s.parse().unwrap();
            assert_eq!(l.fraction().parse::<PlaneLabel>().unwrap(), l);
        }
        assert_eq!(PlaneLabel::new(-3, 4).unwrap().to_string(), "T_-3/4");
        assert!("1/3".parse::<PlaneLabel>().is_err());
        let mut v = [PlaneLabel::half(1), PlaneLabel::new(-3, 4).unwrap(), PlaneLabel::ZERO];
        v.sort();
        assert_eq!(v[0].fraction(), "-3/4");
    }
}
