//! Scalar optical fields of the microlens-generated Talbot lattice.

mod beam;
mod carpet;
mod config;
mod fft;
mod field;
pub mod io;
mod mask;
mod propagate;
mod reimaging;

pub(crate) use fft::{forward as fft_forward, inverse as fft_inverse};
pub use beam::{beam_array_field, GaussianBeamlet, LatticeBeamArray};
pub use carpet::{compute_carpet, FieldModel, TalbotCarpet};
pub use config::{rayleigh_range, talbot_length, OpticalConfig};
pub use field::{GridSpec, IntensityMap, ScalarField};
pub use mask::{illumination_field, mla_phase_mask};
pub use propagate::{
    propagate_angular_spectrum, propagate_with, PropagationOptions, TransferFunction,
};
pub use reimaging::Reimaging;
