use super::{indices_set_vector, usi_sample, ITParams, IndicesSetVector, JointSampleSet};
use crate::closeness::threshold_tau;
use crate::dist::{split_map, split_samples, IndexedSampleSet, Multiset, OccurrenceVector};
use crate::error::{execution, invalid, Result};
use crate::harness::{
    majority, trusted_evaluate, CircuitSpec, CostModel, Decision, Role, RomSource, RomView, Transcript, Verdict,
};
use crate::rng::{RandomStream, SharedRandomness};
use crate::sketch::{collision_norm_estimate_occ, norms_agree};
use rand::seq::index;

/// One repetition's vote and the quantities behind it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ItVote {
    pub lambda: usize,
    /// |I|, the number of indices under U′.
    pub pool: usize,
    /// Size of each of the four index subsets.
    pub s: usize,
    pub chi: bool,
    pub delta: u128,
    pub tau: f64,
    /// Too little data to test; counted as PRODUCT.
    pub abstained: bool,
    pub decision: Decision,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ItOutcome {
    pub verdict: Verdict,
    pub votes: Vec<ItVote>,
}

impl ItOutcome {
    pub fn lambda_mean(&self) -> f64 {
        self.votes.iter().map(|v| v.lambda as f64).sum::<f64>() / self.votes.len().max(1) as f64
    }
}

/// Four pairwise disjoint uniform subsets of `0..pool`, each of size `s`.
pub fn draw_index_subsets(pool: usize, s: usize, rng: &mut RandomStream) -> Result<[Vec<usize>; 4]> {
    if 4 * s > pool {
        return Err(invalid(format!("cannot draw four disjoint {s}-subsets from {pool} indices")));
    }
    let all = index::sample(rng, pool, 4 * s).into_vec();
    Ok([all[..s].to_vec(), all[s..2 * s].to_vec(), all[2 * s..3 * s].to_vec(), all[3 * s..].to_vec()])
}

pub(super) struct AliceRep {
    pub(super) split_alphabet: usize,
    pub(super) isv: IndicesSetVector,
    pub(super) gamma: Vec<usize>,
}

pub(super) struct BobRep {
    pub(super) split_alphabet: usize,
    pub(super) bp: IndexedSampleSet,
    pub(super) bq: IndexedSampleSet,
}

pub(super) fn check_samples(samples: &JointSampleSet, params: &ITParams) -> Result<()> {
    let (a, b) = (&samples.alice, &samples.bob);
    if a.len() != params.t || b.len() != params.t {
        return Err(invalid(format!("both parties need exactly t = {} samples", params.t)));
    }
    if a.n() != params.n || b.n() != params.m {
        return Err(invalid("sample alphabets differ from parameters"));
    }
    Ok(())
}

fn block(s: &IndexedSampleSet, params: &ITParams, k: usize) -> IndexedSampleSet {
    let tp = params.t_prime();
    s.slice(k * tp..(k + 1) * tp)
}

pub(super) fn prepare_alice(
    samples: &IndexedSampleSet,
    params: &ITParams,
    i: usize,
    rng: &mut RandomStream,
) -> Result<AliceRep> {
    let sa = Multiset::from_letters(&block(samples, params, 3 * i).letters()[..params.split_a_size()], params.n)?;
    let sm = split_map(&sa, params.n)?;
    let a = split_samples(&block(samples, params, 3 * i + 1), &sm, rng);
    let isv = indices_set_vector(&a, sm.total())?;
    let gamma = isv.nonempty();
    Ok(AliceRep { split_alphabet: sm.total(), isv, gamma })
}

pub(super) fn prepare_bob(
    samples: &IndexedSampleSet,
    params: &ITParams,
    i: usize,
    rng: &mut RandomStream,
) -> Result<BobRep> {
    let sb = Multiset::from_letters(&block(samples, params, 3 * i).letters()[..params.split_b_size()], params.m)?;
    let sm = split_map(&sb, params.m)?;
    let bp = split_samples(&block(samples, params, 3 * i + 1), &sm, rng);
    let bq = split_samples(&block(samples, params, 3 * i + 2), &sm, rng);
    Ok(BobRep { split_alphabet: sm.total(), bp, bq })
}

/// Everything the vote reads from the two parties.
trait ItLookup {
    fn alice_alphabet(&self) -> Result<usize>;
    fn gamma_len(&self) -> Result<usize>;
    fn gamma(&self, pos: usize) -> Result<usize>;
    fn set_len(&self, letter: usize) -> Result<usize>;
    fn set_entry(&self, letter: usize, k: usize) -> Result<usize>;
    fn bob_alphabet(&self) -> Result<usize>;
    fn bp(&self, j: usize) -> Result<usize>;
    fn bq(&self, j: usize) -> Result<usize>;
}

struct Direct<'a> {
    a: &'a AliceRep,
    b: &'a BobRep,
}

impl ItLookup for Direct<'_> {
    fn alice_alphabet(&self) -> Result<usize> {
        Ok(self.a.split_alphabet)
    }
    fn gamma_len(&self) -> Result<usize> {
        Ok(self.a.gamma.len())
    }
    fn gamma(&self, pos: usize) -> Result<usize> {
        Ok(self.a.gamma[pos])
    }
    fn set_len(&self, letter: usize) -> Result<usize> {
        Ok(self.a.isv.set(letter).len())
    }
    fn set_entry(&self, letter: usize, k: usize) -> Result<usize> {
        Ok(self.a.isv.set(letter)[k])
    }
    fn bob_alphabet(&self) -> Result<usize> {
        Ok(self.b.split_alphabet)
    }
    fn bp(&self, j: usize) -> Result<usize> {
        Ok(self.b.bp.letters()[j])
    }
    fn bq(&self, j: usize) -> Result<usize> {
        Ok(self.b.bq.letters()[j])
    }
}

/// Pairs sampled indices and runs the gated closeness test on the
/// reduced alphabet `U′ × [m + |S_b|]`.
///
/// `picks[k]` lists `(position of the letter in U′, sample index)`.
pub(super) fn pair_and_test(
    picks: &[Vec<(usize, usize)>; 4],
    lambda: usize,
    pool: usize,
    bob_alphabet: usize,
    params: &ITParams,
    bp: impl Fn(usize) -> Result<usize>,
    bq: impl Fn(usize) -> Result<usize>,
) -> Result<ItVote> {
    let s = picks[0].len();
    let cells = lambda * bob_alphabet;
    let occ = |set: &[(usize, usize)], partner: &dyn Fn(usize) -> Result<usize>| -> Result<OccurrenceVector> {
        let mut v = OccurrenceVector::zeros(cells);
        for &(u, j) in set {
            let b = partner(j)?;
            if b >= bob_alphabet {
                return Err(execution("paired letter outside bob's alphabet"));
            }
            v.add(u * bob_alphabet + b, 1);
        }
        Ok(v)
    };
    let x1 = occ(&picks[0], &bp)?;
    let y1 = occ(&picks[1], &bq)?;
    let x2 = occ(&picks[2], &bp)?;
    let y2 = occ(&picks[3], &bq)?;
    let chi = norms_agree(collision_norm_estimate_occ(&x1)?, collision_norm_estimate_occ(&y1)?);
    let delta = x2.distance_sq(&y2)?;
    let tau = threshold_tau((lambda * params.m) as f64, s as f64, params.eps_prime());
    let decision = if chi && delta as f64 <= tau { Decision::Product } else { Decision::Far };
    Ok(ItVote { lambda, pool, s, chi, delta, tau, abstained: false, decision })
}

pub(super) fn abstain(lambda: usize, pool: usize) -> ItVote {
    ItVote { lambda, pool, s: 0, chi: true, delta: 0, tau: 0.0, abstained: true, decision: Decision::Product }
}

fn vote(lk: &impl ItLookup, params: &ITParams, rng: &mut RandomStream) -> Result<ItVote> {
    let l = params.subset_size() as u64;
    let alphabet = lk.alice_alphabet()? as u64;
    let gamma_len = lk.gamma_len()?;
    let mu = usi_sample(alphabet, gamma_len as u64, l.min(alphabet), rng)? as usize;
    let lambda = mu.min(params.lambda_cap());
    if lambda == 0 {
        return Ok(abstain(0, 0));
    }
    let chosen: Vec<usize> =
        index::sample(rng, gamma_len, lambda).into_iter().map(|pos| lk.gamma(pos)).collect::<Result<_>>()?;
    let mut starts = Vec::with_capacity(lambda + 1);
    starts.push(0usize);
    for &u in &chosen {
        starts.push(starts.last().expect("nonempty") + lk.set_len(u)?);
    }
    let pool = *starts.last().expect("nonempty");
    let s = params.target_pairs().min(pool / 4);
    if s < 2 {
        return Ok(abstain(lambda, pool));
    }
    let subsets = draw_index_subsets(pool, s, rng)?;
    let locate = |pos: usize| -> Result<(usize, usize)> {
        let u = starts.partition_point(|&st| st <= pos) - 1;
        Ok((u, lk.set_entry(chosen[u], pos - starts[u])?))
    };
    let picks: [Vec<(usize, usize)>; 4] = [
        subsets[0].iter().map(|&p| locate(p)).collect::<Result<_>>()?,
        subsets[1].iter().map(|&p| locate(p)).collect::<Result<_>>()?,
        subsets[2].iter().map(|&p| locate(p)).collect::<Result<_>>()?,
        subsets[3].iter().map(|&p| locate(p)).collect::<Result<_>>()?,
    ];
    pair_and_test(&picks, lambda, pool, lk.bob_alphabet()?, params, |j| lk.bp(j), |j| lk.bq(j))
}

/// Alice's ROM layout for one repetition.
#[derive(Clone, Copy)]
struct AliceLayout {
    max_alphabet: u64,
    tp: u64,
}

impl AliceLayout {
    fn gamma_len(&self) -> u64 {
        1
    }
    fn gamma(&self, pos: u64) -> u64 {
        2 + pos
    }
    fn start(&self, letter: u64) -> u64 {
        2 + self.max_alphabet + letter
    }
    fn len(&self, letter: u64) -> u64 {
        2 + 2 * self.max_alphabet + letter
    }
    fn entry(&self, k: u64) -> u64 {
        2 + 3 * self.max_alphabet + k
    }
    fn entries(&self) -> u64 {
        2 + 3 * self.max_alphabet + self.tp
    }
}

struct AliceRom<'a> {
    rep: &'a AliceRep,
    layout: AliceLayout,
    starts: Vec<u64>,
}

impl<'a> AliceRom<'a> {
    fn new(rep: &'a AliceRep, layout: AliceLayout) -> Self {
        let mut starts = Vec::with_capacity(rep.split_alphabet);
        let mut acc = 0u64;
        for l in 0..rep.split_alphabet {
            starts.push(acc);
            acc += rep.isv.set(l).len() as u64;
        }
        Self { rep, layout, starts }
    }
}

impl RomSource for AliceRom<'_> {
    fn word_bits(&self) -> u32 {
        64
    }
    fn charged_entries(&self) -> u64 {
        self.layout.entries()
    }
    fn read(&self, index: u64) -> Option<u64> {
        let lay = &self.layout;
        let n = self.rep.split_alphabet as u64;
        if index == 0 {
            Some(n)
        } else if index == lay.gamma_len() {
            Some(self.rep.gamma.len() as u64)
        } else if index < lay.start(0) {
            let pos = (index - lay.gamma(0)) as usize;
            Some(self.rep.gamma.get(pos).map_or(0, |&g| g as u64))
        } else if index < lay.len(0) {
            Some(self.starts.get((index - lay.start(0)) as usize).copied().unwrap_or(0))
        } else if index < lay.entry(0) {
            let l = (index - lay.len(0)) as usize;
            Some(if l < self.rep.split_alphabet { self.rep.isv.set(l).len() as u64 } else { 0 })
        } else if index < lay.entries() {
            let k = index - lay.entry(0);
            // Flattened index sets, letter by letter.
            let l = self.starts.partition_point(|&s| s <= k).checked_sub(1)?;
            self.rep.isv.set(l).get((k - self.starts[l]) as usize).map(|&j| j as u64)
        } else {
            None
        }
    }
}

struct BobRom<'a> {
    rep: &'a BobRep,
    tp: u64,
}

impl RomSource for BobRom<'_> {
    fn word_bits(&self) -> u32 {
        64
    }
    fn charged_entries(&self) -> u64 {
        1 + 2 * self.tp
    }
    fn read(&self, index: u64) -> Option<u64> {
        if index == 0 {
            Some(self.rep.split_alphabet as u64)
        } else if index <= self.tp {
            self.rep.bp.letters().get(index as usize - 1).map(|&b| b as u64)
        } else {
            self.rep.bq.letters().get((index - 1 - self.tp) as usize).map(|&b| b as u64)
        }
    }
}

struct ViaRom<'a, 'v> {
    view: &'a RomView<'v>,
    layout: AliceLayout,
}

impl ItLookup for ViaRom<'_, '_> {
    fn alice_alphabet(&self) -> Result<usize> {
        Ok(self.view.read_a(0)? as usize)
    }
    fn gamma_len(&self) -> Result<usize> {
        Ok(self.view.read_a(self.layout.gamma_len())? as usize)
    }
    fn gamma(&self, pos: usize) -> Result<usize> {
        Ok(self.view.read_a(self.layout.gamma(pos as u64))? as usize)
    }
    fn set_len(&self, letter: usize) -> Result<usize> {
        Ok(self.view.read_a(self.layout.len(letter as u64))? as usize)
    }
    fn set_entry(&self, letter: usize, k: usize) -> Result<usize> {
        let start = self.view.read_a(self.layout.start(letter as u64))?;
        Ok(self.view.read_a(self.layout.entry(start + k as u64))? as usize)
    }
    fn bob_alphabet(&self) -> Result<usize> {
        Ok(self.view.read_b(0)? as usize)
    }
    fn bp(&self, j: usize) -> Result<usize> {
        Ok(self.view.read_b(1 + j as u64)? as usize)
    }
    fn bq(&self, j: usize) -> Result<usize> {
        Ok(self.view.read_b(1 + self.layout.tp + j as u64)? as usize)
    }
}

struct Prepared {
    alice: Vec<AliceRep>,
    bob: Vec<BobRep>,
    shared: SharedRandomness,
}

fn prepare(samples: &JointSampleSet, params: &ITParams, seed: u64) -> Result<Prepared> {
    check_samples(samples, params)?;
    let private = SharedRandomness::new(seed).child("private");
    let (mut ra, mut rb) = (private.stream("alice"), private.stream("bob"));
    let alice =
        (0..params.repetitions).map(|i| prepare_alice(&samples.alice, params, i, &mut ra)).collect::<Result<_>>()?;
    let bob = (0..params.repetitions).map(|i| prepare_bob(&samples.bob, params, i, &mut rb)).collect::<Result<_>>()?;
    Ok(Prepared { alice, bob, shared: SharedRandomness::new(seed).child("shared") })
}

/// The tester's function evaluated directly, without the evaluator.
pub fn it2p_direct(samples: &JointSampleSet, params: &ITParams, seed: u64) -> Result<(Decision, Vec<ItVote>)> {
    let prep = prepare(samples, params, seed)?;
    let votes = prep
        .alice
        .iter()
        .zip(&prep.bob)
        .enumerate()
        .map(|(i, (a, b))| vote(&Direct { a, b }, params, &mut prep.shared.indexed_stream("circuit", i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let d: Vec<Decision> = votes.iter().map(|v| v.decision).collect();
    Ok((majority(&d, Decision::Product, Decision::Far), votes))
}

/// Runs the independence tester with every vote computed by the trusted
/// evaluator over both parties' ROMs.
pub fn it2p(samples: &JointSampleSet, params: &ITParams, cost: &CostModel, seed: u64) -> Result<ItOutcome> {
    let prep = prepare(samples, params, seed)?;
    let tp = params.t_prime() as u64;
    let layout = AliceLayout { max_alphabet: (params.n + params.split_a_size()) as u64, tp };
    let lambda_max = params.lambda_cap().min(params.subset_size()) as u64;
    let s_max = params.target_pairs() as u64;
    let lookups = 3 + 2 * lambda_max + 12 * s_max;
    let spec = CircuitSpec { gates: lookups + 8 * s_max + 8, rom_lookups: lookups, output_bits: 1 };
    let mut transcript = Transcript::new();
    transcript.record(Role::Alice, 8);
    transcript.record(Role::Bob, 8);
    let mut votes = Vec::with_capacity(params.repetitions);
    for (i, (a, b)) in prep.alice.iter().zip(&prep.bob).enumerate() {
        let rom_a = AliceRom::new(a, layout);
        let rom_b = BobRom { rep: b, tp };
        let mut rng = prep.shared.indexed_stream("circuit", i as u64);
        let (v, eval) =
            trusted_evaluate(spec, cost, &rom_a, &rom_b, |view| vote(&ViaRom { view, layout }, params, &mut rng))?;
        transcript.add_secure_bits(eval.modeled_secure_bits);
        votes.push(v);
    }
    let d: Vec<Decision> = votes.iter().map(|v| v.decision).collect();
    let empty = crate::harness::Rom::empty();
    let mspec = CircuitSpec { gates: d.len() as u64 + 1, rom_lookups: 0, output_bits: 1 };
    let (decision, eval) =
        trusted_evaluate(mspec, cost, &empty, &empty, |_| Ok(majority(&d, Decision::Product, Decision::Far)))?;
    transcript.add_secure_bits(eval.modeled_secure_bits);
    Ok(ItOutcome { verdict: Verdict { decision, transcript }, votes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::independence::{ItConstants, JointDistribution};
    use crate::rng::stream;
    use proptest::prelude::*;

    #[test]
    fn evaluator_matches_direct() {
        let p = ITParams::new(12, 12, 3000, 1.0, 2, ItConstants::default()).unwrap();
        for (seed, inst) in
            [JointDistribution::uniform_product(12, 12).unwrap(), JointDistribution::diagonal(12).unwrap()]
                .iter()
                .cycle()
                .take(6)
                .enumerate()
        {
            let s = inst.sample(p.t, &mut stream(seed as u64));
            let out = it2p(&s, &p, &CostModel::default(), seed as u64).unwrap();
            let (d, votes) = it2p_direct(&s, &p, seed as u64).unwrap();
            assert_eq!(out.verdict.decision, d);
            assert_eq!(out.votes, votes);
        }
    }

    proptest! {
        #[test]
        fn subsets_disjoint(pool in 0usize..200, s in 0usize..60, seed: u64) {
            let mut rng = stream(seed);
            match draw_index_subsets(pool, s, &mut rng) {
                Ok(sets) => {
                    let mut all: Vec<usize> = sets.iter().flatten().copied().collect();
                    prop_assert!(sets.iter().all(|x| x.len() == s));
                    all.sort_unstable();
                    all.dedup();
                    prop_assert_eq!(all.len(), 4 * s);
                    prop_assert!(all.iter().all(|&x| x < pool));
                }
                Err(_) => prop_assert!(4 * s > pool),
            }
        }
    }
}
