use super::{Decision, Transcript};
use crate::error::{execution, Result};
use crate::rng::{RandomStream, SharedRandomness};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    Alice,
    Bob,
}

impl Role {
    pub fn other(self) -> Self {
        match self {
            Role::Alice => Role::Bob,
            Role::Bob => Role::Alice,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Alice => "alice",
            Role::Bob => "bob",
        })
    }
}

/// What a party sees on each of its turns.
pub struct PartyContext {
    pub role: Role,
    pub shared: SharedRandomness,
    /// Randomness the other party never sees.
    pub private: RandomStream,
}

/// The result of one turn.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Turn {
    pub send: Vec<Vec<u8>>,
    pub output: Option<Decision>,
    pub done: bool,
}

impl Turn {
    pub fn wait() -> Self {
        Self::default()
    }

    pub fn send(msg: Vec<u8>) -> Self {
        Self { send: vec![msg], ..Self::default() }
    }

    pub fn finish(output: Option<Decision>) -> Self {
        Self { output, done: true, ..Self::default() }
    }

    pub fn send_and_finish(msg: Vec<u8>, output: Option<Decision>) -> Self {
        Self { send: vec![msg], output, done: true }
    }
}

pub trait PartyProgram {
    /// Called on each of this party's turns with the messages delivered
    /// since its previous turn.
    fn turn(&mut self, ctx: &mut PartyContext, inbox: Vec<Vec<u8>>) -> Result<Turn>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub decision: Decision,
    pub transcript: Transcript,
}

const MAX_ROUNDS: usize = 1 << 20;

/// Runs two programs in alternating turns, Alice first.
///
/// Every sent message is delivered before the recipient's next turn and
/// metered in the transcript. The run ends once both parties are done. A
/// full round in which nobody sends and nobody finishes is a deadlock.
pub fn run_protocol(alice: &mut dyn PartyProgram, bob: &mut dyn PartyProgram, seed: u64) -> Result<Verdict> {
    let shared = SharedRandomness::new(seed).child("shared");
    let private = SharedRandomness::new(seed).child("private");
    let mut ctx = [
        PartyContext { role: Role::Alice, shared: shared.clone(), private: private.stream("alice") },
        PartyContext { role: Role::Bob, shared, private: private.stream("bob") },
    ];
    let mut inbox: [Vec<Vec<u8>>; 2] = [Vec::new(), Vec::new()];
    let mut done = [false, false];
    let mut transcript = Transcript::new();
    let mut decision: Option<Decision> = None;
    let mut idle_turns = 0;

    for turn_no in 0..2 * MAX_ROUNDS {
        if done[0] && done[1] {
            break;
        }
        let me = turn_no % 2;
        if done[me] {
            // Messages to a finished party are dropped after being charged.
            inbox[me].clear();
            idle_turns += 1;
        } else {
            let msgs = std::mem::take(&mut inbox[me]);
            let program: &mut dyn PartyProgram = if me == 0 { &mut *alice } else { &mut *bob };
            let turn = program.turn(&mut ctx[me], msgs)?;
            let progressed = !turn.send.is_empty() || turn.done;
            for m in turn.send {
                transcript.record(ctx[me].role, m.len());
                inbox[1 - me].push(m);
            }
            if let Some(d) = turn.output {
                match decision {
                    Some(prev) if prev != d => {
                        return Err(execution(format!("parties disagree on output: {prev} vs {d}")));
                    }
                    _ => decision = Some(d),
                }
            }
            done[me] |= turn.done;
            idle_turns = if progressed { 0 } else { idle_turns + 1 };
        }
        if idle_turns >= 2 && inbox.iter().all(Vec::is_empty) && !(done[0] && done[1]) {
            return Err(execution("protocol deadlock: both parties waiting"));
        }
    }
    if !(done[0] && done[1]) {
        return Err(execution("protocol exceeded the round limit"));
    }
    let decision = decision.ok_or_else(|| execution("protocol finished without an output"))?;
    Ok(Verdict { decision, transcript })
}
