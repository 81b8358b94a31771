//! ℓ2 machinery: linear sketches, collision norm estimates and rounded rotations.

mod ams;
mod collision;
mod rotation;

pub use ams::{estimate_distance_sq, sketch, L2Sketch};
pub use collision::{collision_norm_estimate, collision_norm_estimate_occ, norms_agree, NORM_AGREEMENT_FACTOR};
pub use rotation::{apply_rotation_coord, RoundedRotation, DEFAULT_FLATNESS_K};
