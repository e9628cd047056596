//! Unit multipliers. Internally everything is SI.

pub const UM: f64 = 1e-6;
pub const NM: f64 = 1e-9;
pub const MM: f64 = 1e-3;
pub const MRAD: f64 = 1e-3;
pub const MHZ: f64 = 1e6;
