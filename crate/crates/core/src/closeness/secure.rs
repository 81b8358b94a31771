use super::{threshold_tau, SecureCTParams};
use crate::dist::{
    cap, occurrence_vector, split_occurrence_matrix, IndexedSampleSet, Multiset, OccurrenceVector,
    SplitOccurrenceMatrix,
};
use crate::error::{invalid, Result};
use crate::harness::{
    majority, trusted_evaluate, CircuitSpec, CostModel, Decision, Role, RomSource, RomView, Transcript, Verdict,
};
use crate::rng::SharedRandomness;
use crate::sketch::RoundedRotation;
use rand::Rng;

/// One sample set's contribution to the majority.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecureVote {
    pub delta1: i64,
    pub delta2: f64,
    pub tau: f64,
    /// Some Bernoulli bias exceeded 1.
    pub clamped: bool,
    pub decision: Decision,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SecureOutcome {
    pub verdict: Verdict,
    pub votes: Vec<SecureVote>,
}

/// Letters whose split rows differ from the capped coordinates:
/// `{i : i ∈ S ∨ A_i > L ∨ B_i > L}`.
fn marked(s: &Multiset, x: &OccurrenceVector, l: u64) -> Vec<usize> {
    (0..x.n()).filter(|&i| s.contains(i) || x.get(i) > l).collect()
}

fn row_distance_sq(a: &[u64], b: &[u64]) -> i64 {
    a.iter().zip(b).map(|(&x, &y)| (x as i64 - y as i64).pow(2)).sum()
}

fn capped_sq(a: u64, b: u64, l: u64) -> i64 {
    (a.min(l) as i64 - b.min(l) as i64).pow(2)
}

fn check_pair(
    a_sm: &SplitOccurrenceMatrix,
    b_sm: &SplitOccurrenceMatrix,
    s_a: &Multiset,
    s_b: &Multiset,
) -> Result<u64> {
    let n = a_sm.source().n();
    if b_sm.source().n() != n || s_a.n() != n || s_b.n() != n {
        return Err(invalid("split inputs over different alphabets"));
    }
    let need = 1 + s_a.size() + s_b.size();
    if a_sm.max_buckets() < need || b_sm.max_buckets() < need {
        return Err(invalid(format!("split matrices need at least {need} buckets")));
    }
    Ok(need)
}

/// Δ₁ = ‖A_S − B_S‖² − ‖A′ − B′‖², summed only over the marked letters.
///
/// `A` and `B` are the sources of the two split matrices, `S = S_a ⊎ S_b`
/// and letter `i` is split into `1 + S_a(i) + S_b(i)` buckets.
pub fn capped_split_adjustment(
    a_sm: &SplitOccurrenceMatrix,
    b_sm: &SplitOccurrenceMatrix,
    s_a: &Multiset,
    s_b: &Multiset,
    l: u64,
) -> Result<i64> {
    check_pair(a_sm, b_sm, s_a, s_b)?;
    let (a, b) = (a_sm.source(), b_sm.source());
    let mut letters = marked(s_a, a, l);
    letters.extend(marked(s_b, b, l));
    letters.sort_unstable();
    letters.dedup();
    let mut total = 0i64;
    for i in letters {
        let m = 1 + s_a.multiplicity(i) + s_b.multiplicity(i);
        total += row_distance_sq(&a_sm.row(i, m)?, &b_sm.row(i, m)?) - capped_sq(a.get(i), b.get(i), l);
    }
    Ok(total)
}

/// ‖A_S − B_S‖² over every letter.
pub fn full_split_distance_sq(
    a_sm: &SplitOccurrenceMatrix,
    b_sm: &SplitOccurrenceMatrix,
    s_a: &Multiset,
    s_b: &Multiset,
) -> Result<i64> {
    check_pair(a_sm, b_sm, s_a, s_b)?;
    (0..a_sm.source().n())
        .map(|i| {
            let m = 1 + s_a.multiplicity(i) + s_b.multiplicity(i);
            Ok(row_distance_sq(&a_sm.row(i, m)?, &b_sm.row(i, m)?))
        })
        .sum()
}

/// One party's data for one sample set.
struct PreparedSet {
    s: Multiset,
    capped: OccurrenceVector,
    split: SplitOccurrenceMatrix,
    marked: Vec<usize>,
    rotated: Vec<f64>,
}

struct Prepared {
    alice: Vec<PreparedSet>,
    bob: Vec<PreparedSet>,
    shared: SharedRandomness,
}

fn prepare_party(
    samples: &IndexedSampleSet,
    params: &SecureCTParams,
    rot: &RoundedRotation,
    rng: &mut crate::rng::RandomStream,
) -> Result<Vec<PreparedSet>> {
    let (n, tp, ss, asz, l) = (params.n, params.t_prime(), params.split_size(), params.a_size(), params.cap());
    let max_buckets = 1 + 2 * ss as u64;
    (0..params.repetitions)
        .map(|j| {
            let block = samples.slice(j * tp..(j + 1) * tp);
            let s = Multiset::from_letters(&block.letters()[..ss], n)?;
            let occ = occurrence_vector(&block.slice(ss..ss + asz), n)?;
            let capped = cap(&occ, l);
            let v: Vec<i64> = capped.counts().iter().map(|&c| c as i64).collect();
            let marked = marked(&s, &occ, l);
            let split = split_occurrence_matrix(&occ, max_buckets, rng)?;
            Ok(PreparedSet { s, capped, split, marked, rotated: rot.apply(&v) })
        })
        .collect()
}

fn prepare(alice: &IndexedSampleSet, bob: &IndexedSampleSet, params: &SecureCTParams, seed: u64) -> Result<Prepared> {
    for (who, s) in [("alice", alice), ("bob", bob)] {
        if s.len() != params.t || s.n() != params.n {
            return Err(invalid(format!("{who} needs t = {} samples over n = {}", params.t, params.n)));
        }
    }
    let shared = SharedRandomness::new(seed).child("shared");
    let private = SharedRandomness::new(seed).child("private");
    let rot = RoundedRotation::new(params.n, shared.stream("rotation").random(), params.rotation_k)?;
    Ok(Prepared {
        alice: prepare_party(alice, params, &rot, &mut private.stream("alice"))?,
        bob: prepare_party(bob, params, &rot, &mut private.stream("bob"))?,
        shared,
    })
}

trait VoteLookup {
    fn adjustment(&self) -> Result<i64>;
    fn rotated_diff(&self, i: usize) -> Result<f64>;
}

struct Direct<'a> {
    a: &'a PreparedSet,
    b: &'a PreparedSet,
}

impl VoteLookup for Direct<'_> {
    fn adjustment(&self) -> Result<i64> {
        let full = full_split_distance_sq(&self.a.split, &self.b.split, &self.a.s, &self.b.s)?;
        let capped = self.a.capped.distance_sq(&self.b.capped)? as i64;
        Ok(full - capped)
    }

    fn rotated_diff(&self, i: usize) -> Result<f64> {
        Ok(self.a.rotated[i] - self.b.rotated[i])
    }
}

/// Word layout of a party's ROM for one sample set.
#[derive(Clone, Copy)]
struct Layout {
    n: u64,
    marked_cap: u64,
    max_buckets: u64,
}

impl Layout {
    fn new(params: &SecureCTParams) -> Self {
        let ss = params.split_size() as u64;
        let marked_cap = ss + params.a_size() as u64 / (params.cap() + 1);
        Self { n: params.n as u64, marked_cap, max_buckets: 1 + 2 * ss }
    }
    fn rotated(&self, i: u64) -> u64 {
        i
    }
    fn capped(&self, i: u64) -> u64 {
        self.n + i
    }
    fn split_mult(&self, i: u64) -> u64 {
        2 * self.n + i
    }
    fn marked_len(&self) -> u64 {
        3 * self.n
    }
    fn marked(&self, k: u64) -> u64 {
        3 * self.n + 1 + k
    }
    fn split_base(&self) -> u64 {
        3 * self.n + 1 + self.marked_cap
    }
    fn split(&self, i: u64, j: u64, bucket: u64) -> u64 {
        self.split_base() + (i * self.max_buckets + (j - 1)) * self.max_buckets + bucket
    }
    fn entries(&self) -> u64 {
        self.split_base() + self.n * self.max_buckets * self.max_buckets
    }

    /// Declared lookups of one vote.
    fn lookups(&self, split_size: u64, l: u64) -> u64 {
        let union = 2 * self.marked_cap;
        2 + union + 4 * union + 2 * (union + 2 * split_size) + 2 * l
    }
}

struct PartyRom<'a> {
    set: &'a PreparedSet,
    layout: Layout,
}

impl RomSource for PartyRom<'_> {
    fn word_bits(&self) -> u32 {
        64
    }

    fn charged_entries(&self) -> u64 {
        self.layout.entries()
    }

    fn read(&self, index: u64) -> Option<u64> {
        let lay = &self.layout;
        let n = lay.n;
        if index < n {
            Some(self.set.rotated[index as usize].to_bits())
        } else if index < 2 * n {
            Some(self.set.capped.get((index - n) as usize))
        } else if index < 3 * n {
            Some(self.set.s.multiplicity((index - 2 * n) as usize))
        } else if index == lay.marked_len() {
            Some(self.set.marked.len() as u64)
        } else if index < lay.split_base() {
            Some(self.set.marked.get((index - lay.marked(0)) as usize).map_or(0, |&l| l as u64))
        } else if index < lay.entries() {
            let k = index - lay.split_base();
            let bucket = k % lay.max_buckets;
            let j = (k / lay.max_buckets) % lay.max_buckets + 1;
            let i = k / (lay.max_buckets * lay.max_buckets);
            if bucket >= j {
                return Some(0);
            }
            self.set.split.row(i as usize, j).ok().map(|r| r[bucket as usize])
        } else {
            None
        }
    }
}

struct ViaRom<'a, 'v> {
    view: &'a RomView<'v>,
    layout: Layout,
}

impl ViaRom<'_, '_> {
    fn marked_letters(&self, read: impl Fn(u64) -> Result<u64>) -> Result<Vec<u64>> {
        let len = read(self.layout.marked_len())?.min(self.layout.marked_cap);
        (0..len).map(|k| read(self.layout.marked(k))).collect()
    }
}

impl VoteLookup for ViaRom<'_, '_> {
    fn adjustment(&self) -> Result<i64> {
        let v = self.view;
        let lay = self.layout;
        let mut letters = self.marked_letters(|k| v.read_a(k))?;
        letters.extend(self.marked_letters(|k| v.read_b(k))?);
        letters.sort_unstable();
        letters.dedup();
        let mut total = 0i64;
        for i in letters {
            let m = 1 + v.read_a(lay.split_mult(i))? + v.read_b(lay.split_mult(i))?;
            let (ca, cb) = (v.read_a(lay.capped(i))?, v.read_b(lay.capped(i))?);
            let mut row = 0i64;
            for bucket in 0..m {
                let x = v.read_a(lay.split(i, m, bucket))? as i64;
                let y = v.read_b(lay.split(i, m, bucket))? as i64;
                row += (x - y).pow(2);
            }
            total += row - (ca as i64 - cb as i64).pow(2);
        }
        Ok(total)
    }

    fn rotated_diff(&self, i: usize) -> Result<f64> {
        let i = self.layout.rotated(i as u64);
        Ok(f64::from_bits(self.view.read_a(i)?) - f64::from_bits(self.view.read_b(i)?))
    }
}

fn vote(
    lk: &impl VoteLookup,
    tau: f64,
    params: &SecureCTParams,
    rng: &mut crate::rng::RandomStream,
) -> Result<SecureVote> {
    let delta1 = lk.adjustment()?;
    let t_gap = 2.0 * (tau - delta1 as f64);
    if t_gap <= 0.0 {
        return Ok(SecureVote { delta1, delta2: 0.0, tau, clamped: false, decision: Decision::Far });
    }
    let n = params.n;
    let l = params.trials();
    let scale = t_gap * f64::from(params.rotation_k);
    let mut hits = 0u64;
    let mut clamped = false;
    for _ in 0..l {
        let i = rng.random_range(0..n);
        let d = lk.rotated_diff(i)?;
        let mut bias = n as f64 * d * d / scale;
        if bias > 1.0 {
            clamped = true;
            bias = 1.0;
        }
        if rng.random::<f64>() < bias {
            hits += 1;
        }
    }
    let delta2 = scale / l as f64 * hits as f64;
    let decision = if clamped || delta1 as f64 + delta2 > tau { Decision::Far } else { Decision::Same };
    Ok(SecureVote { delta1, delta2, tau, clamped, decision })
}

fn set_tau(params: &SecureCTParams, a: &PreparedSet, b: &PreparedSet) -> f64 {
    let split_alphabet = params.n as u64 + a.s.size() + b.s.size();
    threshold_tau(split_alphabet as f64, params.a_size() as f64, params.eps)
}

/// The tester's function evaluated directly, with Δ₁ taken from the full
/// split distance rather than from the marked letters.
pub fn secure_reference_direct(
    alice: &IndexedSampleSet,
    bob: &IndexedSampleSet,
    params: &SecureCTParams,
    seed: u64,
) -> Result<(Decision, Vec<SecureVote>)> {
    let prep = prepare(alice, bob, params, seed)?;
    let votes = prep
        .alice
        .iter()
        .zip(&prep.bob)
        .enumerate()
        .map(|(j, (a, b))| {
            let mut rng = prep.shared.indexed_stream("circuit", j as u64);
            vote(&Direct { a, b }, set_tau(params, a, b), params, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let decisions: Vec<Decision> = votes.iter().map(|v| v.decision).collect();
    Ok((majority(&decisions, Decision::Same, Decision::Far), votes))
}

/// Runs the secure closeness tester with every vote computed by the
/// trusted evaluator over both parties' ROMs.
pub fn ct2p_secure_reference(
    alice: &IndexedSampleSet,
    bob: &IndexedSampleSet,
    params: &SecureCTParams,
    cost: &CostModel,
    seed: u64,
) -> Result<SecureOutcome> {
    let prep = prepare(alice, bob, params, seed)?;
    let layout = Layout::new(params);
    let l = params.trials();
    let mut transcript = Transcript::new();
    // Seed exchange.
    transcript.record(Role::Alice, 8);
    transcript.record(Role::Bob, 8);
    let mut votes = Vec::with_capacity(params.repetitions);
    for (j, (a, b)) in prep.alice.iter().zip(&prep.bob).enumerate() {
        debug_assert!(a.marked.len() as u64 <= layout.marked_cap);
        let lookups = layout.lookups(params.split_size() as u64, l);
        let spec = CircuitSpec { gates: lookups + 2 * l + 5, rom_lookups: lookups, output_bits: 1 };
        let (rom_a, rom_b) = (PartyRom { set: a, layout }, PartyRom { set: b, layout });
        let tau = set_tau(params, a, b);
        let mut rng = prep.shared.indexed_stream("circuit", j as u64);
        let (v, eval) =
            trusted_evaluate(spec, cost, &rom_a, &rom_b, |view| vote(&ViaRom { view, layout }, tau, params, &mut rng))?;
        transcript.add_secure_bits(eval.modeled_secure_bits);
        votes.push(v);
    }
    let decisions: Vec<Decision> = votes.iter().map(|v| v.decision).collect();
    let k = decisions.len() as u64;
    let empty = crate::harness::Rom::empty();
    let spec = CircuitSpec { gates: k + 1, rom_lookups: 0, output_bits: 1 };
    let (decision, eval) =
        trusted_evaluate(spec, cost, &empty, &empty, |_| Ok(majority(&decisions, Decision::Same, Decision::Far)))?;
    transcript.add_secure_bits(eval.modeled_secure_bits);
    Ok(SecureOutcome { verdict: Verdict { decision, transcript }, votes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closeness::SecureConstants;
    use crate::dist::{sample, Distribution};
    use crate::rng::stream;

    fn sm(counts: &[u64], maxb: u64, seed: u64) -> SplitOccurrenceMatrix {
        split_occurrence_matrix(&OccurrenceVector::from_counts(counts.to_vec()), maxb, &mut stream(seed)).unwrap()
    }

    #[test]
    fn no_split_no_cap_is_zero() {
        let e = Multiset::empty(3);
        let d = capped_split_adjustment(&sm(&[3, 1, 0], 1, 1), &sm(&[0, 2, 2], 1, 2), &e, &e, 10).unwrap();
        assert_eq!(d, 0);
    }

    #[test]
    fn capped_only() {
        let e = Multiset::empty(1);
        assert_eq!(capped_split_adjustment(&sm(&[4], 1, 1), &sm(&[0], 1, 2), &e, &e, 2).unwrap(), 12);
    }

    #[test]
    fn single_split_expectation() {
        // Letter 0 split in two: Δ₁ = x² + (4 − x)² − 16 with x ~ Bin(4, ½).
        let s = Multiset::from_letters(&[0], 2).unwrap();
        let e = Multiset::empty(2);
        let b = sm(&[0, 0], 2, 0);
        let trials = 20_000;
        let mut sum = 0i64;
        for seed in 0..trials {
            let d = capped_split_adjustment(&sm(&[4, 0], 2, seed + 1), &b, &s, &e, 10).unwrap();
            assert!(d <= 0);
            sum += d;
        }
        let mean = sum as f64 / trials as f64;
        assert!((mean + 6.0).abs() < 0.1, "mean {mean}");
    }

    #[test]
    fn identical_inputs_shared_splits() {
        let s = Multiset::from_letters(&[1, 1, 2], 4).unwrap();
        let a = sm(&[5, 9, 2, 0], 7, 42);
        let b = sm(&[5, 9, 2, 0], 7, 42);
        assert_eq!(capped_split_adjustment(&a, &b, &s, &s, 3).unwrap(), 0);
        assert_eq!(full_split_distance_sq(&a, &b, &s, &s).unwrap(), 0);
    }

    #[test]
    fn evaluator_matches_direct() {
        let p = SecureCTParams::new(40, 2000, 1.0, 2, SecureConstants::default()).unwrap();
        let u = Distribution::uniform(40).unwrap();
        let far = crate::closeness::paired_bias(40, 1.0).unwrap();
        for seed in 0..6 {
            let mut rng = stream(seed);
            let b_dist = if seed % 2 == 0 { &u } else { &far.b };
            let a = sample(&u, p.t, &mut rng);
            let b = sample(b_dist, p.t, &mut rng);
            let out = ct2p_secure_reference(&a, &b, &p, &CostModel::default(), seed).unwrap();
            let (d, votes) = secure_reference_direct(&a, &b, &p, seed).unwrap();
            assert_eq!(out.verdict.decision, d);
            assert_eq!(out.votes, votes);
            assert!(out.verdict.transcript.modeled_secure_bits() > 0.0);
        }
    }
}
