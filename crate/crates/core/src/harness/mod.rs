//! Two-party execution: a metered channel, transcripts and the trusted evaluator.

mod evaluator;
mod runner;
mod transcript;

pub use evaluator::{
    polylog_charge, trusted_evaluate, CircuitSpec, CostModel, Rom, RomSource, RomView, TrustedEvaluation,
};
pub use runner::{run_protocol, PartyContext, PartyProgram, Role, Turn, Verdict};
pub use transcript::{MessageRecord, Transcript, FRAME_BYTES};

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Decision {
    Same,
    Far,
    Product,
}

impl Decision {
    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Same => "SAME",
            Decision::Far => "FAR",
            Decision::Product => "PRODUCT",
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Majority of votes; a tie goes to `accept`.
pub fn majority(votes: &[Decision], accept: Decision, reject: Decision) -> Decision {
    let yes = votes.iter().filter(|&&v| v == accept).count();
    if 2 * yes >= votes.len() {
        accept
    } else {
        reject
    }
}
