use super::{cell_params, run_trial, trial_seed, Cell, Constants, Protocol};
use crate::closeness::{CTParams, SecureCTParams};
use crate::error::{config, infeasible, Result};
use crate::independence::ITParams;
use rayon::prelude::*;
use std::fmt::Write as _;

/// Rates both families must reach.
const TARGET: f64 = 0.75;

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationPoint {
    pub constants: Constants,
    pub t: usize,
    pub accept_rate: f64,
    pub reject_rate: f64,
}

impl CalibrationPoint {
    pub fn score(&self) -> f64 {
        self.accept_rate.min(self.reject_rate)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Calibration {
    pub protocol: Protocol,
    pub n: usize,
    pub m: usize,
    pub eps: f64,
    pub k: usize,
    pub best: CalibrationPoint,
    pub table: Vec<CalibrationPoint>,
}

impl Calibration {
    /// The chosen constants as TOML, preceded by comment lines with the
    /// rates that selected them.
    pub fn fixture(&self) -> String {
        let mut s = String::new();
        let b = &self.best;
        writeln!(
            s,
            "# calibrated protocol={} n={} m={} eps={} k={} t={} accept={:.3} reject={:.3}",
            self.protocol, self.n, self.m, self.eps, self.k, b.t, b.accept_rate, b.reject_rate
        )
        .expect("writing to a String");
        s.push_str(&b.constants.to_toml());
        s
    }
}

fn min_t(protocol: Protocol, c: &Constants, n: usize, m: usize, eps: f64, k: usize) -> f64 {
    match protocol {
        Protocol::Closeness => CTParams { n, t: 0, eps, constants: c.closeness }.min_t(),
        Protocol::ClosenessSecure => SecureCTParams {
            n,
            t: 0,
            eps,
            k,
            repetitions: k,
            rotation_k: crate::sketch::DEFAULT_FLATNESS_K,
            constants: c.secure,
        }
        .min_t(),
        _ => ITParams { n, m, t: 0, eps, k, repetitions: k, constants: c.independence }.min_t(),
    }
}

fn candidates(protocol: Protocol, base: &Constants) -> Vec<Constants> {
    let mut out = Vec::new();
    for pre in [1.0, 2.0, 4.0] {
        for a in [0.5, 1.0, 2.0] {
            for b in [0.5, 1.0, 2.0] {
                let mut c = *base;
                match protocol {
                    Protocol::Closeness => {
                        c.closeness.c_precondition *= pre;
                        c.closeness.c_split *= a;
                        c.closeness.c_alpha *= b;
                    }
                    Protocol::ClosenessSecure => {
                        c.secure.c_precondition *= pre;
                        c.secure.c *= a;
                        c.secure.c_a *= b;
                    }
                    _ => {
                        c.independence.c_precondition *= pre;
                        c.independence.c1 *= a;
                        c.independence.c_eps *= b;
                    }
                }
                out.push(c);
            }
        }
    }
    out
}

/// Grid search over multipliers of `base`, run at the precondition-minimal
/// t of each candidate. Picks the candidate maximizing the smaller of the
/// two success rates, among those with both rates at least 0.75; the
/// candidates are scanned cheapest t first and the first best wins.
pub fn calibrate(
    protocol: Protocol,
    n: usize,
    m: usize,
    eps: f64,
    k: usize,
    trials: usize,
    seed: u64,
    base: &Constants,
) -> Result<Calibration> {
    if protocol == Protocol::Hardgen {
        return Err(config("hardgen has no tester constants to calibrate"));
    }
    if trials == 0 {
        return Err(config("trials must be at least 1"));
    }
    let domain = if matches!(protocol, Protocol::Independence | Protocol::IndependenceOneWay) { n * m } else { n };
    let floor = min_t(protocol, base, n, m, eps, k);
    if floor > (domain * domain) as f64 {
        return Err(infeasible(format!(
            "precondition t ≥ {floor:.1} exceeds the squared domain size {} at n = {n}",
            domain * domain
        )));
    }
    let mut cands = candidates(protocol, base);
    cands.sort_by(|a, b| min_t(protocol, a, n, m, eps, k).total_cmp(&min_t(protocol, b, n, m, eps, k)));
    let families = protocol.families();
    let mut table = Vec::with_capacity(cands.len());
    for (ci, c) in cands.iter().enumerate() {
        let t = min_t(protocol, c, n, m, eps, k).ceil() as usize;
        let cell = Cell { index: ci, n, m: Some(m), t, eps, k: Some(k) };
        let params = cell_params(protocol, &cell, c)?;
        let jobs: Vec<(usize, usize)> = (0..trials).flat_map(|i| (0..families.len()).map(move |f| (i, f))).collect();
        let hits = jobs
            .par_iter()
            .map(|&(i, f)| {
                let fam = families[f];
                run_trial(protocol, &params, fam, trial_seed(seed, ci, i, fam))
                    .map(|r| (f, r.verdict == fam.expected()))
            })
            .collect::<Result<Vec<_>>>()?;
        let rate = |f: usize| hits.iter().filter(|&&(g, ok)| g == f && ok).count() as f64 / trials as f64;
        table.push(CalibrationPoint { constants: *c, t, accept_rate: rate(0), reject_rate: rate(1) });
    }
    let feasible = table.iter().filter(|p| p.accept_rate >= TARGET && p.reject_rate >= TARGET);
    let best = feasible.fold(None::<&CalibrationPoint>, |acc, p| match acc {
        Some(b) if b.score() >= p.score() => Some(b),
        _ => Some(p),
    });
    match best {
        Some(b) => Ok(Calibration { protocol, n, m, eps, k, best: b.clone(), table }),
        None => {
            let top = table.iter().max_by(|a, b| a.score().total_cmp(&b.score())).expect("nonempty grid");
            Err(infeasible(format!(
                "no constants reach {TARGET} on both families; best {} had {} {:.3} and {} {:.3} at t = {}",
                top.constants.to_toml().replace('\n', " "),
                families[0].label(),
                top.accept_rate,
                families[1].label(),
                top.reject_rate,
                top.t
            )))
        }
    }
}
