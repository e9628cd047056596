//! Simulation of microlens-array-generated Talbot optical lattices and of the
//! single-atom registers stored in their planes.
//!
//! The crate is organised bottom-up:
//!
//! - [`optics`] builds and propagates scalar fields (Gaussian beamlet arrays,
//!   microlens masks, angular-spectrum propagation, relay reimaging, carpets).
//! - [`analysis`] turns intensity slices into trap sites, lattice pitch,
//!   self-image fidelity and Talbot plane labels.
//! - [`register`] describes site geometry per plane, including interleaved
//!   sublattices produced by tilted illumination.
//! - [`atoms`] is the phenomenological single-atom layer: loading, push-out,
//!   spin preparation, subregister addressing, state-selective detection.
//! - [`assembly`] plans and executes defect-free target assembly with repair
//!   cycles and estimates success rates.
//! - [`scenario`] and [`commands`] drive reproducible runs from a JSON
//!   scenario; the `talbot` binary is a thin front end over them.
//!
//! All lengths are in meters and all angles in radians.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod assembly;
pub mod atoms;
pub mod commands;
pub mod error;
pub mod optics;
pub mod register;
pub mod rng;
pub mod scenario;
pub mod units;

pub use error::{Error, Result};
