use super::{distinguish, threshold_tau, CTParams};
use crate::dist::{occurrence_vector, poisson_sample, split_map, split_samples, IndexedSampleSet, Multiset};
use crate::error::{execution, invalid, Result};
use crate::harness::{run_protocol, Decision, PartyContext, PartyProgram, Turn, Verdict};
use crate::sketch::{collision_norm_estimate, estimate_distance_sq, norms_agree, sketch, L2Sketch};
use crate::wire;
use rand::Rng;

/// A verdict together with the quantities it was decided from.
#[derive(Clone, Debug, PartialEq)]
pub struct InsecureOutcome {
    pub verdict: Verdict,
    pub split_size: usize,
    pub norm_mismatch: bool,
    pub delta_estimate: Option<f64>,
    pub tau: f64,
}

fn sketch_seed(ctx: &PartyContext) -> u64 {
    ctx.shared.stream("sketch").random()
}

struct Bob<'a> {
    samples: &'a IndexedSampleSet,
    params: CTParams,
    sent: bool,
}

impl PartyProgram for Bob<'_> {
    fn turn(&mut self, ctx: &mut PartyContext, inbox: Vec<Vec<u8>>) -> Result<Turn> {
        if !self.sent {
            self.sent = true;
            let n = self.params.n;
            let t = self.samples.len();
            let size = (poisson_sample(self.params.split_rate(), &mut ctx.private)? as usize).min(t / 2);
            let s = Multiset::from_letters(&self.samples.letters()[..size], n)?;
            let sm = split_map(&s, n)?;
            let kept = split_samples(&self.samples.slice(size..t), &sm, &mut ctx.private);
            let norm = collision_norm_estimate(&kept)?;
            let occ = occurrence_vector(&kept, sm.total())?;
            let sk = sketch(&occ, self.params.alpha(), self.params.constants.sketch_delta, sketch_seed(ctx))?;
            return Ok(Turn {
                send: vec![wire::encode_multiset(&s), wire::encode_f64(norm), sk.to_bytes()],
                output: None,
                done: false,
            });
        }
        match inbox.as_slice() {
            [] => Ok(Turn::wait()),
            [d] => Ok(Turn::finish(Some(wire::decode_decision(d)?))),
            _ => Err(execution("bob expected a single decision message")),
        }
    }
}

struct Alice<'a> {
    samples: &'a IndexedSampleSet,
    params: CTParams,
    report: Option<(usize, bool, Option<f64>, f64)>,
}

impl PartyProgram for Alice<'_> {
    fn turn(&mut self, ctx: &mut PartyContext, inbox: Vec<Vec<u8>>) -> Result<Turn> {
        let [s, norm_b, sk_b] = inbox.as_slice() else {
            return if inbox.is_empty() { Ok(Turn::wait()) } else { Err(execution("alice expected three messages")) };
        };
        let n = self.params.n;
        let s = wire::decode_multiset(s)?;
        let norm_b = wire::decode_f64(norm_b)?;
        let sk_b = L2Sketch::from_bytes(sk_b)?;
        let size = s.size() as usize;
        let t = self.samples.len();
        let sm = split_map(&s, n)?;
        let kept = split_samples(&self.samples.slice(size..t), &sm, &mut ctx.private);
        let tau = threshold_tau(sm.total() as f64, kept.len() as f64, self.params.eps);
        let norm_a = collision_norm_estimate(&kept)?;
        let decision;
        let mut delta = None;
        if !norms_agree(norm_a, norm_b) {
            decision = Decision::Far;
        } else {
            let occ = occurrence_vector(&kept, sm.total())?;
            let sk_a = sketch(&occ, self.params.alpha(), self.params.constants.sketch_delta, sketch_seed(ctx))?;
            let d = estimate_distance_sq(&sk_a, &sk_b)?;
            delta = Some(d);
            decision = distinguish(d, tau);
        }
        self.report = Some((size, delta.is_none(), delta, tau));
        Ok(Turn::send_and_finish(wire::encode_decision(decision), Some(decision)))
    }
}

/// Runs the insecure closeness protocol.
///
/// Bob draws `S` from his first `Poi(c_split·n²/(t²ε⁴))` samples (at most
/// `t/2`) and sends it with his norm estimate and the sketch of his split
/// occurrence vector; Alice drops the same number of her samples, compares
/// norms within factor 4, estimates Δ and announces the decision.
pub fn ct2p_insecure(
    alice: &IndexedSampleSet,
    bob: &IndexedSampleSet,
    params: &CTParams,
    seed: u64,
) -> Result<InsecureOutcome> {
    if alice.len() != params.t || bob.len() != params.t {
        return Err(invalid(format!("both parties need exactly t = {} samples", params.t)));
    }
    if alice.n() != params.n || bob.n() != params.n {
        return Err(invalid("sample alphabet differs from parameters"));
    }
    let mut a = Alice { samples: alice, params: *params, report: None };
    let mut b = Bob { samples: bob, params: *params, sent: false };
    let verdict = run_protocol(&mut a, &mut b, seed)?;
    let (split_size, norm_mismatch, delta_estimate, tau) = a.report.expect("alice decided");
    Ok(InsecureOutcome { verdict, split_size, norm_mismatch, delta_estimate, tau })
}
