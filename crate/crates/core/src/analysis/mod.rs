//! From intensity slices to trap sites, lattice parameters, self-image
//! fidelity and Talbot plane labels.

mod fidelity;
mod pitch;
mod plane;
mod region;
mod traps;

pub use fidelity::{self_image_fidelity, self_image_fidelity_in, Fidelity};
pub use pitch::{estimate_pitch, estimate_pitch_points, LatticeFit};
pub use plane::{classify_plane, PlaneLabel};
pub use region::Region;
pub use traps::{extract_traps, read_trap_table, write_trap_table, ExtractOptions, TrapSite};
