use super::it2p::{abstain, check_samples, pair_and_test, prepare_alice, prepare_bob, AliceRep, ItOutcome, ItVote};
use super::{draw_index_subsets, ITParams, JointSampleSet};
use crate::error::{execution, parse, Result};
use crate::harness::{majority, run_protocol, Decision, PartyContext, PartyProgram, Turn};
use crate::rng::RandomStream;
use crate::wire::{width_for, BitReader, BitWriter};
use rand::seq::index;

/// Alice's samples for one repetition: `(split letter, index in block)`
/// pairs, sorted and distinct.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneWayRepetition {
    pub split_alphabet: usize,
    pub samples: Vec<(usize, usize)>,
}

impl OneWayRepetition {
    /// Number of distinct letters sent.
    pub fn lambda(&self) -> usize {
        let mut k = 0;
        let mut prev = None;
        for &(l, _) in &self.samples {
            if prev != Some(l) {
                k += 1;
                prev = Some(l);
            }
        }
        k
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneWayMessage {
    pub t: usize,
    pub repetitions: Vec<OneWayRepetition>,
}

/// Bit-packed: 16-bit repetition count and 32-bit t, then per repetition
/// 32-bit λ and, unless λ = 0, 32-bit split alphabet and sample count
/// followed by the samples, each
/// a letter in `width_for(alphabet)` bits and an index in `width_for(t)`
/// bits. Padded with zero bits to a whole byte.
pub fn encode_one_way_message(msg: &OneWayMessage) -> Vec<u8> {
    let mut w = BitWriter::new();
    w.push(msg.repetitions.len() as u64, 16);
    w.push(msg.t as u64, 32);
    let iw = width_for(msg.t as u64);
    for r in &msg.repetitions {
        w.push(r.lambda() as u64, 32);
        if r.samples.is_empty() {
            continue;
        }
        w.push(r.split_alphabet as u64, 32);
        w.push(r.samples.len() as u64, 32);
        let lw = width_for(r.split_alphabet as u64);
        for &(l, j) in &r.samples {
            w.push(l as u64, lw);
            w.push(j as u64, iw);
        }
    }
    w.into_bytes()
}

pub fn decode_one_way_message(bytes: &[u8]) -> Result<OneWayMessage> {
    let total_bits = 8 * bytes.len() as u64;
    let mut r = BitReader::new(bytes);
    let k = r.read(16)? as usize;
    let t = r.read(32)?;
    let iw = width_for(t);
    let mut repetitions = Vec::with_capacity(k.min(bytes.len()));
    for _ in 0..k {
        let lambda = r.read(32)? as usize;
        if lambda == 0 {
            repetitions.push(OneWayRepetition { split_alphabet: 0, samples: Vec::new() });
            continue;
        }
        let alphabet = r.read(32)?;
        let count = r.read(32)?;
        let lw = width_for(alphabet);
        let per = u64::from(lw + iw);
        if count > alphabet.saturating_mul(t) || count.saturating_mul(per) > total_bits - r.position() {
            return Err(parse(1, "sample count exceeds the message"));
        }
        let mut samples = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let l = r.read(lw)?;
            let j = r.read(iw)?;
            if l >= alphabet || j >= t {
                return Err(parse(1, "sample outside its range"));
            }
            let pair = (l as usize, j as usize);
            if samples.last().is_some_and(|&prev| prev >= pair) {
                return Err(parse(1, "samples not strictly increasing"));
            }
            samples.push(pair);
        }
        let rep = OneWayRepetition { split_alphabet: alphabet as usize, samples };
        if rep.lambda() != lambda {
            return Err(parse(1, "letter count disagrees with samples"));
        }
        repetitions.push(rep);
    }
    let rest = total_bits - r.position();
    if rest >= 8 || r.read(rest as u32)? != 0 {
        return Err(parse(1, "trailing data after message"));
    }
    Ok(OneWayMessage { t: t as usize, repetitions })
}

/// Expected message length in bits: per repetition t′·l/(n + |S_a|)
/// samples of ⌈log₂(n + |S_a|)⌉ + ⌈log₂ t⌉ bits each.
pub fn predicted_one_way_bits(params: &ITParams) -> f64 {
    let alphabet = (params.n + params.split_a_size()) as f64;
    let per_rep = params.t_prime() as f64 * params.subset_size() as f64 / alphabet;
    let width = alphabet.log2().ceil() + (params.t as f64).log2().ceil();
    params.repetitions as f64 * per_rep * width
}

fn select(rep: &AliceRep, params: &ITParams, rng: &mut RandomStream) -> OneWayRepetition {
    let alphabet = rep.split_alphabet;
    let l = params.subset_size().min(alphabet);
    let mut hit: Vec<usize> =
        index::sample(rng, alphabet, l).into_iter().filter(|&u| !rep.isv.set(u).is_empty()).collect();
    if hit.len() > params.lambda_cap() {
        let keep = index::sample(rng, hit.len(), params.lambda_cap());
        hit = keep.into_iter().map(|i| hit[i]).collect();
    }
    hit.sort_unstable();
    let samples: Vec<(usize, usize)> = hit.iter().flat_map(|&u| rep.isv.set(u).iter().map(move |&j| (u, j))).collect();
    OneWayRepetition { split_alphabet: if samples.is_empty() { 0 } else { alphabet }, samples }
}

struct Alice<'a> {
    samples: &'a JointSampleSet,
    params: ITParams,
}

impl PartyProgram for Alice<'_> {
    fn turn(&mut self, ctx: &mut PartyContext, _: Vec<Vec<u8>>) -> Result<Turn> {
        let mut reps = Vec::with_capacity(self.params.repetitions);
        for i in 0..self.params.repetitions {
            let rep = prepare_alice(&self.samples.alice, &self.params, i, &mut ctx.private)?;
            reps.push(select(&rep, &self.params, &mut ctx.private));
        }
        let msg = OneWayMessage { t: self.params.t, repetitions: reps };
        Ok(Turn::send_and_finish(encode_one_way_message(&msg), None))
    }
}

struct Bob<'a> {
    samples: &'a JointSampleSet,
    params: ITParams,
    votes: Vec<ItVote>,
}

impl Bob<'_> {
    fn test(&self, rep: &OneWayRepetition, i: usize, rng: &mut RandomStream) -> Result<ItVote> {
        let b = prepare_bob(&self.samples.bob, &self.params, i, rng)?;
        let tp = self.params.t_prime();
        if rep.samples.iter().any(|&(_, j)| j >= tp) {
            return Err(execution("sample index outside the block"));
        }
        let lambda = rep.lambda();
        let pool = rep.samples.len();
        let s = self.params.target_pairs().min(pool / 4);
        if lambda == 0 || s < 2 {
            return Ok(abstain(lambda, pool));
        }
        let mut position = Vec::with_capacity(pool);
        let mut u = 0;
        for (k, &(l, _)) in rep.samples.iter().enumerate() {
            if k > 0 && rep.samples[k - 1].0 != l {
                u += 1;
            }
            position.push(u);
        }
        let subsets = draw_index_subsets(pool, s, rng)?;
        let picks = subsets.map(|set| set.iter().map(|&p| (position[p], rep.samples[p].1)).collect());
        pair_and_test(
            &picks,
            lambda,
            pool,
            b.split_alphabet,
            &self.params,
            |j| Ok(b.bp.letters()[j]),
            |j| Ok(b.bq.letters()[j]),
        )
    }
}

impl PartyProgram for Bob<'_> {
    fn turn(&mut self, ctx: &mut PartyContext, inbox: Vec<Vec<u8>>) -> Result<Turn> {
        let msg = match inbox.as_slice() {
            [] => return Ok(Turn::wait()),
            [m] => decode_one_way_message(m)?,
            _ => return Err(execution("bob expected a single message")),
        };
        if msg.repetitions.len() != self.params.repetitions || msg.t != self.params.t {
            return Err(execution("message does not match the parameters"));
        }
        for (i, rep) in msg.repetitions.iter().enumerate() {
            let v = self.test(rep, i, &mut ctx.private)?;
            self.votes.push(v);
        }
        let d: Vec<Decision> = self.votes.iter().map(|v| v.decision).collect();
        Ok(Turn::finish(Some(majority(&d, Decision::Product, Decision::Far))))
    }
}

/// Independence tester with a single message from Alice to Bob and no
/// secure computation.
pub fn one_way_it2p(samples: &JointSampleSet, params: &ITParams, seed: u64) -> Result<ItOutcome> {
    check_samples(samples, params)?;
    let mut alice = Alice { samples, params: *params };
    let mut bob = Bob { samples, params: *params, votes: Vec::new() };
    let verdict = run_protocol(&mut alice, &mut bob, seed)?;
    Ok(ItOutcome { verdict, votes: bob.votes })
}
