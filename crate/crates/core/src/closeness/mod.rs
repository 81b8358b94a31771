//! Closeness testers: the threshold rule, the insecure protocol and the
//! plaintext reference of the secure protocol.

mod insecure;
mod instances;
mod params;
mod secure;
mod threshold;

pub use insecure::{ct2p_insecure, InsecureOutcome};
pub use instances::{paired_bias, ClosenessFamily, ClosenessInstance};
pub use params::{CTParams, CtConstants, SecureCTParams, SecureConstants, ALPHA_MAX};
pub use secure::{
    capped_split_adjustment, ct2p_secure_reference, full_split_distance_sq, secure_reference_direct, SecureOutcome,
    SecureVote,
};
pub use threshold::{distinguish, threshold_tau};
