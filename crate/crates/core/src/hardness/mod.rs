//! Hard-instance generators from the communication lower bounds, with
//! validators for the Poisson approximations they rely on.

mod bhh;
mod ghd;
mod poisson_tv;

pub use bhh::{bhh_generate, bhh_reduce, BhhInstance};
pub use ghd::{
    ghd_beta, ghd_gap, ghd_generate_inputs, ghd_reduce, ghd_reduce_traced, ghd_reference_sampler, GhdInput, GhdParams,
    GhdReduction, DEFAULT_LARGE_CONSTANT,
};
pub use poisson_tv::poisson_multinomial_tv_check;
