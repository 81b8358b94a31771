//! Independence testing: alphabet reduction through a random rectangle of
//! the split alphabet, index pairing and a closeness test on the result.

mod it2p;
mod joint;
mod one_way;
mod params;
mod usi;

pub use it2p::{draw_index_subsets, it2p, it2p_direct, ItOutcome, ItVote};
pub use joint::{
    conditioned, conditioned_rectangle, reduced_distributions, IndependenceFamily, JointDistribution, JointSampleSet,
};
pub use one_way::{
    decode_one_way_message, encode_one_way_message, one_way_it2p, predicted_one_way_bits, OneWayMessage,
    OneWayRepetition,
};
pub use params::{ITParams, ItConstants};
pub use usi::{indices_set_vector, usi_pmf, usi_sample, IndicesSetVector};
