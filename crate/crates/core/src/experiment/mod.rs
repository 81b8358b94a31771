//! Parameter sweeps over the testers, CSV reporting and calibration of the
//! hidden constants.

mod calibrate;
mod csv_out;

pub use calibrate::{calibrate, Calibration, CalibrationPoint};
pub use csv_out::{trial_csv, write_experiment_csv};

use crate::closeness::{
    ct2p_insecure, ct2p_secure_reference, distinguish, threshold_tau, CTParams, ClosenessFamily, CtConstants,
    SecureCTParams, SecureConstants,
};
use crate::dist::sample;
use crate::error::{config, parse, Result};
use crate::hardness::{ghd_generate_inputs, ghd_reduce, ghd_reference_sampler, GhdParams, DEFAULT_LARGE_CONSTANT};
use crate::harness::{CostModel, Decision};
use crate::independence::{it2p, one_way_it2p, ITParams, IndependenceFamily, ItConstants};
use crate::rng::{derive_seed, label_hash, stream};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Protocol {
    Closeness,
    ClosenessSecure,
    Independence,
    IndependenceOneWay,
    Hardgen,
}

impl Protocol {
    pub const ALL: [Protocol; 5] = [
        Protocol::Closeness,
        Protocol::ClosenessSecure,
        Protocol::Independence,
        Protocol::IndependenceOneWay,
        Protocol::Hardgen,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Closeness => "closeness",
            Protocol::ClosenessSecure => "closeness-secure",
            Protocol::Independence => "independence",
            Protocol::IndependenceOneWay => "independence-oneway",
            Protocol::Hardgen => "hardgen",
        }
    }

    fn uses_m(self) -> bool {
        matches!(self, Protocol::Independence | Protocol::IndependenceOneWay)
    }

    fn uses_k(self) -> bool {
        matches!(self, Protocol::ClosenessSecure | Protocol::Independence | Protocol::IndependenceOneWay)
    }

    pub fn families(self) -> &'static [Family] {
        match self {
            Protocol::Closeness | Protocol::ClosenessSecure => {
                &[Family::Closeness(ClosenessFamily::Same), Family::Closeness(ClosenessFamily::Far)]
            }
            Protocol::Independence | Protocol::IndependenceOneWay => {
                &[Family::Independence(IndependenceFamily::Product), Family::Independence(IndependenceFamily::Diagonal)]
            }
            Protocol::Hardgen => &[
                Family::Ghd { case: ClosenessFamily::Same, reference: false },
                Family::Ghd { case: ClosenessFamily::Far, reference: false },
                Family::Ghd { case: ClosenessFamily::Same, reference: true },
                Family::Ghd { case: ClosenessFamily::Far, reference: true },
            ],
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Protocol {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Protocol::ALL.into_iter().find(|p| p.as_str() == s).ok_or_else(|| config(format!("unknown protocol {s:?}")))
    }
}

/// Instance family of one trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Closeness(ClosenessFamily),
    Independence(IndependenceFamily),
    /// GHD reduction output, or samples from the distributions it imitates.
    Ghd {
        case: ClosenessFamily,
        reference: bool,
    },
}

impl Family {
    pub fn label(self) -> &'static str {
        match self {
            Family::Closeness(f) => f.label(),
            Family::Independence(f) => f.label(),
            Family::Ghd { case: ClosenessFamily::Same, reference: false } => "ghd-same",
            Family::Ghd { case: ClosenessFamily::Far, reference: false } => "ghd-far",
            Family::Ghd { case: ClosenessFamily::Same, reference: true } => "reference-same",
            Family::Ghd { case: ClosenessFamily::Far, reference: true } => "reference-far",
        }
    }

    pub fn expected(self) -> Decision {
        match self {
            Family::Closeness(f) | Family::Ghd { case: f, .. } => f.expected(),
            Family::Independence(f) => f.expected(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HardnessConstants {
    /// C in l = C·t·ln n.
    pub c_large: f64,
}

impl Default for HardnessConstants {
    fn default() -> Self {
        Self { c_large: DEFAULT_LARGE_CONSTANT }
    }
}

/// Every tunable constant, as stored in a TOML fixture.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Constants {
    pub closeness: CtConstants,
    pub secure: SecureConstants,
    pub independence: ItConstants,
    pub hardness: HardnessConstants,
}

impl Constants {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(0, |s| text[..s.start.min(text.len())].lines().count().max(1));
            parse(line, e.message().to_string())
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("constants serialize")
    }

    /// Applies `section.key=value`, e.g. `closeness.c_split=2`.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let bad = || config(format!("override {assignment:?} is not section.key=number"));
        let (key, value) = assignment.split_once('=').ok_or_else(bad)?;
        let (section, field) = key.trim().split_once('.').ok_or_else(bad)?;
        let value: f64 = value.trim().parse().map_err(|_| bad())?;
        let mut table: toml::Table = toml::from_str(&self.to_toml()).expect("own TOML parses");
        let sec = table
            .get_mut(section)
            .and_then(|v| v.as_table_mut())
            .ok_or_else(|| config(format!("unknown constants section {section:?}")))?;
        if !sec.contains_key(field) {
            return Err(config(format!("unknown constant {section}.{field}")));
        }
        sec.insert(field.to_string(), toml::Value::Float(value));
        *self = Self::from_toml(&toml::to_string(&table).expect("table serializes"))?;
        Ok(())
    }
}

/// Lists of values swept; unused axes are ignored.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub n: Vec<usize>,
    /// Empty means m = n.
    pub m: Vec<usize>,
    pub t: Vec<usize>,
    pub eps: Vec<f64>,
    pub k: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub protocol: Protocol,
    pub grid: Grid,
    pub trials: usize,
    pub seed: u64,
    pub constants: Constants,
}

/// One grid point; `m` and `k` are `None` when the protocol ignores them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub n: usize,
    pub m: Option<usize>,
    pub t: usize,
    pub eps: f64,
    pub k: Option<usize>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if g.n.is_empty() || g.t.is_empty() || g.eps.is_empty() || (self.protocol.uses_k() && g.k.is_empty()) {
            return Err(config("parameter grid is empty"));
        }
        if self.trials == 0 {
            return Err(config("trials must be at least 1"));
        }
        Ok(())
    }

    /// Grid points in (n, m, t, eps, k) lexicographic order.
    pub fn cells(&self) -> Vec<Cell> {
        let g = &self.grid;
        let ms: Vec<Option<usize>> = if self.protocol.uses_m() && !g.m.is_empty() {
            g.m.iter().copied().map(Some).collect()
        } else {
            vec![None]
        };
        let ks: Vec<Option<usize>> =
            if self.protocol.uses_k() { g.k.iter().copied().map(Some).collect() } else { vec![None] };
        let mut cells = Vec::new();
        for &n in &g.n {
            for &m in &ms {
                let m = if self.protocol.uses_m() { Some(m.unwrap_or(n)) } else { None };
                for &t in &g.t {
                    for &eps in &g.eps {
                        for &k in &ks {
                            cells.push(Cell { index: cells.len(), n, m, t, eps, k });
                        }
                    }
                }
            }
        }
        cells
    }
}

/// Validated parameters for one cell.
#[derive(Clone, Debug)]
pub enum CellParams {
    Closeness(CTParams),
    Secure(SecureCTParams),
    Independence(ITParams),
    Hardgen(GhdParams),
}

pub fn cell_params(protocol: Protocol, cell: &Cell, constants: &Constants) -> Result<CellParams> {
    let (n, t, eps) = (cell.n, cell.t, cell.eps);
    let k = cell.k.unwrap_or(1);
    Ok(match protocol {
        Protocol::Closeness => CellParams::Closeness(CTParams::new(n, t, eps, constants.closeness)?),
        Protocol::ClosenessSecure => CellParams::Secure(SecureCTParams::new(n, t, eps, k, constants.secure)?),
        Protocol::Independence | Protocol::IndependenceOneWay => {
            CellParams::Independence(ITParams::new(n, cell.m.unwrap_or(n), t, eps, k, constants.independence)?)
        }
        Protocol::Hardgen => CellParams::Hardgen(GhdParams::new(n, t, constants.hardness.c_large, None)?),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialResult {
    pub verdict: Decision,
    pub plaintext_bits: u64,
    pub secure_bits: f64,
    pub lambda_mean: Option<f64>,
}

/// Seed of one trial: the root mixed with the cell, trial and family.
pub fn trial_seed(root: u64, cell: usize, trial: usize, family: Family) -> u64 {
    derive_seed(root, &[cell as u64, trial as u64, label_hash(family.label())])
}

/// Runs one trial: draws the instance's samples, then the protocol.
pub fn run_trial(protocol: Protocol, params: &CellParams, family: Family, seed: u64) -> Result<TrialResult> {
    let mut rng = stream(derive_seed(seed, &[label_hash("samples")]));
    let proto_seed = derive_seed(seed, &[label_hash("protocol")]);
    let plain =
        |verdict, plaintext_bits, secure_bits| TrialResult { verdict, plaintext_bits, secure_bits, lambda_mean: None };
    match (params, family) {
        (CellParams::Closeness(p), Family::Closeness(f)) => {
            let inst = f.instance(p.n, p.eps)?;
            let (a, b) = (sample(&inst.a, p.t, &mut rng), sample(&inst.b, p.t, &mut rng));
            let out = ct2p_insecure(&a, &b, p, proto_seed)?;
            Ok(plain(out.verdict.decision, out.verdict.transcript.total_bits(), 0.0))
        }
        (CellParams::Secure(p), Family::Closeness(f)) => {
            let inst = f.instance(p.n, p.eps)?;
            let (a, b) = (sample(&inst.a, p.t, &mut rng), sample(&inst.b, p.t, &mut rng));
            let out = ct2p_secure_reference(&a, &b, p, &CostModel::default(), proto_seed)?;
            let tr = &out.verdict.transcript;
            Ok(plain(out.verdict.decision, tr.total_bits(), tr.modeled_secure_bits()))
        }
        (CellParams::Independence(p), Family::Independence(f)) => {
            let joint = f.instance(p.n, p.m)?.sample(p.t, &mut rng);
            let out = match protocol {
                Protocol::IndependenceOneWay => one_way_it2p(&joint, p, proto_seed)?,
                _ => it2p(&joint, p, &CostModel::default(), proto_seed)?,
            };
            let tr = &out.verdict.transcript;
            Ok(TrialResult {
                verdict: out.verdict.decision,
                plaintext_bits: tr.total_bits(),
                secure_bits: tr.modeled_secure_bits(),
                lambda_mean: Some(out.lambda_mean()),
            })
        }
        (CellParams::Hardgen(p), Family::Ghd { case, reference }) => {
            let input = ghd_generate_inputs(p.m, case, p.beta, &mut rng)?;
            let (a, b) = if reference {
                ghd_reference_sampler(p, input.delta(), &mut rng)?
            } else {
                ghd_reduce(&input, p, &mut rng)?
            };
            let delta = a.distance_sq(&b)? as f64;
            Ok(plain(distinguish(delta, threshold_tau(p.n as f64, p.t as f64, 1.0)), 0, 0.0))
        }
        _ => Err(config(format!("family {} does not belong to protocol {protocol}", family.label()))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    Trial,
    Summary,
    Skipped,
}

impl RowKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RowKind::Trial => "trial",
            RowKind::Summary => "summary",
            RowKind::Skipped => "skipped",
        }
    }
}

/// One CSV row. Summary rows carry the success rate and geometric-mean
/// bits of a (cell, family); skipped rows carry the violated precondition.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub cell: Cell,
    pub kind: RowKind,
    pub trial: Option<usize>,
    pub instance: &'static str,
    pub verdict: Option<Decision>,
    pub success: Option<f64>,
    pub plaintext_bits: Option<f64>,
    pub secure_bits: Option<f64>,
    pub lambda_mean: Option<f64>,
    pub reason: String,
}

/// exp(mean ln x); zero if any value is zero.
pub fn geometric_mean(xs: &[f64]) -> f64 {
    if xs.is_empty() || xs.iter().any(|&x| x <= 0.0) {
        return 0.0;
    }
    (xs.iter().map(|x| x.ln()).sum::<f64>() / xs.len() as f64).exp()
}

/// Least-squares slope of ln y against ln x.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let len = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / len, pts.iter().map(|p| p.1).sum::<f64>() / len);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Runs every (cell, trial, family) on the rayon pool. The row order is
/// fixed: per cell, trials by (trial, family), then one summary per family.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let families = cfg.protocol.families();
    let mut rows = Vec::new();
    for cell in cfg.cells() {
        let params = match cell_params(cfg.protocol, &cell, &cfg.constants) {
            Ok(p) => p,
            Err(e) => {
                rows.push(ResultRow {
                    cell,
                    kind: RowKind::Skipped,
                    trial: None,
                    instance: "",
                    verdict: None,
                    success: None,
                    plaintext_bits: None,
                    secure_bits: None,
                    lambda_mean: None,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let jobs: Vec<(usize, Family)> = (0..cfg.trials).flat_map(|i| families.iter().map(move |&f| (i, f))).collect();
        let results = jobs
            .par_iter()
            .map(|&(i, f)| run_trial(cfg.protocol, &params, f, trial_seed(cfg.seed, cell.index, i, f)))
            .collect::<Result<Vec<_>>>()?;
        for (&(i, f), r) in jobs.iter().zip(&results) {
            rows.push(ResultRow {
                cell,
                kind: RowKind::Trial,
                trial: Some(i),
                instance: f.label(),
                verdict: Some(r.verdict),
                success: Some(if r.verdict == f.expected() { 1.0 } else { 0.0 }),
                plaintext_bits: Some(r.plaintext_bits as f64),
                secure_bits: Some(r.secure_bits),
                lambda_mean: r.lambda_mean,
                reason: String::new(),
            });
        }
        for &f in families {
            let mine: Vec<&TrialResult> = jobs.iter().zip(&results).filter(|(j, _)| j.1 == f).map(|(_, r)| r).collect();
            let ok = mine.iter().filter(|r| r.verdict == f.expected()).count();
            let plain: Vec<f64> = mine.iter().map(|r| r.plaintext_bits as f64).collect();
            let secure: Vec<f64> = mine.iter().map(|r| r.secure_bits).collect();
            let lambda = mine.iter().map(|r| r.lambda_mean).collect::<Option<Vec<f64>>>();
            rows.push(ResultRow {
                cell,
                kind: RowKind::Summary,
                trial: None,
                instance: f.label(),
                verdict: None,
                success: Some(ok as f64 / mine.len() as f64),
                plaintext_bits: Some(geometric_mean(&plain)),
                secure_bits: Some(geometric_mean(&secure)),
                lambda_mean: lambda.map(|l| l.iter().sum::<f64>() / l.len() as f64),
                reason: String::new(),
            });
        }
    }
    Ok(rows)
}
