//! Checks shared by the integration tests and the acceptance runner.
#![allow(dead_code)]

use dtp_core::closeness::{
    capped_split_adjustment, ct2p_secure_reference, distinguish, full_split_distance_sq, secure_reference_direct,
    threshold_tau, CTParams, ClosenessFamily, SecureCTParams,
};
use dtp_core::dist::{
    cap, l1_distance, l2_norm_sq, occurrence_vector, poisson_sample, sample, split_distribution, split_map,
    split_occurrence_matrix, Distribution, Multiset, OccurrenceVector,
};
use dtp_core::experiment::{
    log_log_slope, run_experiment, write_experiment_csv, Constants, ExperimentConfig, Grid, Protocol, RowKind,
};
use dtp_core::hardness::{
    bhh_generate, bhh_reduce, ghd_generate_inputs, ghd_reduce, ghd_reduce_traced, ghd_reference_sampler,
    poisson_multinomial_tv_check, GhdParams,
};
use dtp_core::harness::{CostModel, Decision};
use dtp_core::independence::{
    conditioned_rectangle, it2p, it2p_direct, reduced_distributions, usi_sample, ITParams, IndependenceFamily,
    JointDistribution,
};
use dtp_core::rng::{derive_seed, stream, RandomStream};
use dtp_core::sketch::{estimate_distance_sq, sketch};
use dtp_core::stats::{chi_square_gof, chi_square_homogeneity};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::index;
use rand::Rng;

pub fn fixture() -> Constants {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/constants.toml");
    let text = std::fs::read_to_string(path).expect("fixture readable");
    Constants::from_toml(&text).expect("fixture parses")
}

fn random_dist(n: usize, rng: &mut RandomStream) -> Distribution {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
    Distribution::from_weights(&w).unwrap()
}

fn random_multiset(n: usize, max_size: usize, rng: &mut RandomStream) -> Multiset {
    let size = rng.random_range(0..=max_size);
    let letters: Vec<usize> = (0..size).map(|_| rng.random_range(0..n)).collect();
    Multiset::from_letters(&letters, n).unwrap()
}

/// Largest `| ‖p_S − q_S‖₁ − ‖p − q‖₁ |` over random triples.
pub fn split_l1_max_error(cases: usize, seed: u64) -> f64 {
    let mut rng = stream(seed);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let n = rng.random_range(2..=20);
        let (p, q) = (random_dist(n, &mut rng), random_dist(n, &mut rng));
        let sm = split_map(&random_multiset(n, 10, &mut rng), n).unwrap();
        let split = l1_distance(&split_distribution(&p, &sm).unwrap(), &split_distribution(&q, &sm).unwrap()).unwrap();
        worst = worst.max((split - l1_distance(&p, &q).unwrap()).abs());
    }
    worst
}

/// Worst `m · mean ‖p_S‖²` over a few shapes of `p`, S ~ Poi(m) draws.
pub fn split_norm_ratio(n: usize, m: f64, trials: usize, seed: u64) -> f64 {
    let mut rng = stream(seed);
    let heavy: Vec<f64> = (0..n).map(|i| if i == 0 { n as f64 } else { 1.0 }).collect();
    let zipf: Vec<f64> = (0..n).map(|i| 1.0 / (i + 1) as f64).collect();
    let shapes = [
        Distribution::uniform(n).unwrap(),
        Distribution::from_weights(&heavy).unwrap(),
        Distribution::from_weights(&zipf).unwrap(),
    ];
    shapes
        .iter()
        .map(|p| {
            let total: f64 = (0..trials)
                .map(|_| {
                    let size = poisson_sample(m, &mut rng).unwrap() as usize;
                    let s = sample(p, size, &mut rng);
                    let sm = split_map(&Multiset::from_letters(s.letters(), n).unwrap(), n).unwrap();
                    l2_norm_sq(&split_distribution(p, &sm).unwrap())
                })
                .sum();
            m * total / trials as f64
        })
        .fold(0.0, f64::max)
}

fn poissonized(p: &Distribution, t: usize, rng: &mut RandomStream) -> OccurrenceVector {
    let counts = p.probs().iter().map(|&x| poisson_sample(t as f64 * x, rng).unwrap()).collect();
    OccurrenceVector::from_counts(counts)
}

/// Accuracy of the sketched decision rule on uniform pairs and on pairs
/// at ℓ1 distance `far_eps`, each `trials` times.
pub fn decision_rule_accuracy(n: usize, t: usize, eps: f64, far_eps: f64, trials: usize, seed: u64) -> f64 {
    let params = CTParams::new(n, t, eps, Default::default()).unwrap();
    let tau = threshold_tau(n as f64, t as f64, eps);
    let mut rng = stream(seed);
    let mut correct = 0;
    for (family, e) in [(ClosenessFamily::Same, eps), (ClosenessFamily::Far, far_eps)] {
        let inst = family.instance(n, e).unwrap();
        for _ in 0..trials {
            let (a, b) = (poissonized(&inst.a, t, &mut rng), poissonized(&inst.b, t, &mut rng));
            let seed: u64 = rng.random();
            let sa = sketch(&a, params.alpha(), params.constants.sketch_delta, seed).unwrap();
            let sb = sketch(&b, params.alpha(), params.constants.sketch_delta, seed).unwrap();
            if distinguish(estimate_distance_sq(&sa, &sb).unwrap(), tau) == family.expected() {
                correct += 1;
            }
        }
    }
    correct as f64 / (2 * trials) as f64
}

pub struct Rates {
    pub accept: f64,
    pub reject: f64,
}

fn summary_rates(rows: &[dtp_core::experiment::ResultRow], cell: usize) -> Rates {
    let get = |i: usize| rows.iter().filter(|r| r.kind == RowKind::Summary && r.cell.index == cell).nth(i).unwrap();
    Rates { accept: get(0).success.unwrap(), reject: get(1).success.unwrap() }
}

fn config(
    protocol: Protocol,
    n: usize,
    t: Vec<usize>,
    k: usize,
    trials: usize,
    seed: u64,
    c: Constants,
) -> ExperimentConfig {
    ExperimentConfig {
        protocol,
        grid: Grid { n: vec![n], m: vec![], t, eps: vec![1.0], k: vec![k] },
        trials,
        seed,
        constants: c,
    }
}

/// Plaintext closeness rates at `t` and the bits-vs-t slope over `sweep`.
pub fn closeness_rates_and_slope(
    n: usize,
    t: usize,
    sweep: &[usize],
    trials: usize,
    seed: u64,
    c: Constants,
) -> (Rates, f64) {
    let rows = run_experiment(&config(Protocol::Closeness, n, vec![t], 1, trials, seed, c)).unwrap();
    let rates = summary_rates(&rows, 0);
    let rows = run_experiment(&config(Protocol::Closeness, n, sweep.to_vec(), 1, trials.min(20), seed, c)).unwrap();
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.kind == RowKind::Summary && r.instance == "same")
        .map(|r| (r.cell.t as f64, r.plaintext_bits.unwrap()))
        .collect();
    (rates, log_log_slope(&points))
}

/// Instances where capped distance plus Δ₁ differs from a brute-force
/// recomputation of the full split distance.
pub fn capped_identity_failures(cases: usize, seed: u64) -> usize {
    let mut rng = stream(seed);
    let mut failures = 0;
    for _ in 0..cases {
        let n = rng.random_range(1..=30);
        let occ =
            |rng: &mut RandomStream| OccurrenceVector::from_counts((0..n).map(|_| rng.random_range(0..12)).collect());
        let (a, b) = (occ(&mut rng), occ(&mut rng));
        let (s_a, s_b) = (random_multiset(n, 6, &mut rng), random_multiset(n, 6, &mut rng));
        let l = rng.random_range(1..=6u64);
        let need = 1 + s_a.size() + s_b.size();
        let a_sm = split_occurrence_matrix(&a, need + rng.random_range(0..3), &mut rng).unwrap();
        let b_sm = split_occurrence_matrix(&b, need + rng.random_range(0..3), &mut rng).unwrap();
        let (rows_a, rows_b) = (a_sm.materialize(), b_sm.materialize());
        let mut full = 0i64;
        for i in 0..n {
            let m = (s_a.multiplicity(i) + s_b.multiplicity(i)) as usize;
            let (ra, rb) = (&rows_a[i][m], &rows_b[i][m]);
            assert_eq!(ra.iter().sum::<u64>(), a.get(i));
            full += ra.iter().zip(rb).map(|(&x, &y)| (x as i64 - y as i64).pow(2)).sum::<i64>();
        }
        let capped: i64 = (0..n).map(|i| (a.get(i).min(l) as i64 - b.get(i).min(l) as i64).pow(2)).sum();
        let adj = capped_split_adjustment(&a_sm, &b_sm, &s_a, &s_b, l).unwrap();
        if capped + adj != full || full_split_distance_sq(&a_sm, &b_sm, &s_a, &s_b).unwrap() != full {
            failures += 1;
        }
    }
    failures
}

/// Fraction of trials with ‖A′ − B′‖² > 100·ln(n)·‖A_S − B_S‖², S_a and
/// S_b of size ⌊t/L⌋ drawn from a and b, over both instance families.
pub fn capped_bound_violations(n: usize, t: usize, k: usize, trials: usize, seed: u64) -> (u64, f64) {
    let params = SecureCTParams::new(n, t, 1.0, k, Default::default()).unwrap();
    let l = params.cap();
    let s_size = t / l as usize;
    let mut rng = stream(seed);
    let mut bad = 0;
    for trial in 0..trials {
        let family = if trial % 2 == 0 { ClosenessFamily::Same } else { ClosenessFamily::Far };
        let inst = family.instance(n, 1.0).unwrap();
        let a = occurrence_vector(&sample(&inst.a, t, &mut rng), n).unwrap();
        let b = occurrence_vector(&sample(&inst.b, t, &mut rng), n).unwrap();
        let s_a = Multiset::from_letters(sample(&inst.a, s_size, &mut rng).letters(), n).unwrap();
        let s_b = Multiset::from_letters(sample(&inst.b, s_size, &mut rng).letters(), n).unwrap();
        let need = 1 + s_a.size() + s_b.size();
        let a_sm = split_occurrence_matrix(&a, need, &mut rng).unwrap();
        let b_sm = split_occurrence_matrix(&b, need, &mut rng).unwrap();
        let split = full_split_distance_sq(&a_sm, &b_sm, &s_a, &s_b).unwrap() as f64;
        let capped = cap(&a, l).distance_sq(&cap(&b, l)).unwrap() as f64;
        if capped > 100.0 * (n as f64).ln() * split {
            bad += 1;
        }
    }
    (l, bad as f64 / trials as f64)
}

pub struct SecureCheck {
    pub rates: Rates,
    pub agreement: f64,
}

/// Secure closeness through the trusted evaluator, each verdict compared
/// against the directly evaluated function.
pub fn secure_closeness(n: usize, t: usize, k: usize, trials: usize, seed: u64, c: Constants) -> SecureCheck {
    let params = SecureCTParams::new(n, t, 1.0, k, c.secure).unwrap();
    let mut rng = stream(seed);
    let (mut ok, mut agree) = ([0usize; 2], 0usize);
    for trial in 0..trials {
        for (fi, family) in [ClosenessFamily::Same, ClosenessFamily::Far].into_iter().enumerate() {
            let inst = family.instance(n, 1.0).unwrap();
            let (a, b) = (sample(&inst.a, t, &mut rng), sample(&inst.b, t, &mut rng));
            let s = derive_seed(seed, &[trial as u64, fi as u64]);
            let out = ct2p_secure_reference(&a, &b, &params, &CostModel::default(), s).unwrap();
            let (direct, _) = secure_reference_direct(&a, &b, &params, s).unwrap();
            ok[fi] += (out.verdict.decision == family.expected()) as usize;
            agree += (out.verdict.decision == direct) as usize;
        }
    }
    let tr = trials as f64;
    SecureCheck {
        rates: Rates { accept: ok[0] as f64 / tr, reject: ok[1] as f64 / tr },
        agreement: agree as f64 / (2.0 * tr),
    }
}

/// IT2p rates on the uniform product and the diagonal, with agreement of
/// the evaluator path against the direct function.
pub fn independence(n: usize, t: usize, k: usize, trials: usize, seed: u64, c: Constants) -> SecureCheck {
    let params = ITParams::new(n, n, t, 1.0, k, c.independence).unwrap();
    let mut rng = stream(seed);
    let (mut ok, mut agree) = ([0usize; 2], 0usize);
    for trial in 0..trials {
        for (fi, family) in [IndependenceFamily::Product, IndependenceFamily::Diagonal].into_iter().enumerate() {
            let joint = family.instance(n, n).unwrap().sample(t, &mut rng);
            let s = derive_seed(seed, &[trial as u64, fi as u64]);
            let out = it2p(&joint, &params, &CostModel::default(), s).unwrap();
            let (direct, _) = it2p_direct(&joint, &params, s).unwrap();
            ok[fi] += (out.verdict.decision == family.expected()) as usize;
            agree += (out.verdict.decision == direct) as usize;
        }
    }
    let tr = trials as f64;
    SecureCheck {
        rates: Rates { accept: ok[0] as f64 / tr, reject: ok[1] as f64 / tr },
        agreement: agree as f64 / (2.0 * tr),
    }
}

/// Chi-square p-value comparing Γ ∩ U for a uniform β-subset U against a
/// uniform subset of Γ whose size is drawn from μ(n, α, β).
pub fn subset_intersection_p(n: usize, alpha: usize, beta: usize, draws: usize, seed: u64) -> f64 {
    let mut rng = stream(seed);
    let gamma: Vec<usize> = index::sample(&mut rng, n, alpha).into_vec();
    let mask =
        |set: &[usize]| set.iter().map(|&g| 1usize << gamma.iter().position(|&x| x == g).unwrap()).sum::<usize>();
    let (mut direct, mut staged) = (vec![0u64; 1 << alpha], vec![0u64; 1 << alpha]);
    for _ in 0..draws {
        let u = index::sample(&mut rng, n, beta).into_vec();
        let hit: Vec<usize> = u.into_iter().filter(|x| gamma.contains(x)).collect();
        direct[mask(&hit)] += 1;
        let mu = usi_sample(n as u64, alpha as u64, beta as u64, &mut rng).unwrap() as usize;
        let pick: Vec<usize> = index::sample(&mut rng, alpha, mu).into_iter().map(|i| gamma[i]).collect();
        staged[mask(&pick)] += 1;
    }
    chi_square_homogeneity(&direct, &staged, 5.0).p_value
}

/// Fraction of uniform l-subsets U whose mass lies in [l/4n, 4l/n], for a
/// two-level p with ‖p‖² = 1.25/n and l = 100·n·‖p‖².
pub fn subset_mass_containment(n: usize, trials: usize, seed: u64) -> f64 {
    let p: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.5 } else { 0.5 } / n as f64).collect();
    let norm: f64 = p.iter().map(|x| x * x).sum();
    let l = (100.0 * norm * n as f64).ceil() as usize;
    let mut rng = stream(seed);
    let (lo, hi) = (l as f64 / (4 * n) as f64, 4.0 * l as f64 / n as f64);
    let inside = (0..trials)
        .filter(|_| {
            let mass: f64 = index::sample(&mut rng, n, l).into_iter().map(|i| p[i]).sum();
            (lo..=hi).contains(&mass)
        })
        .count();
    inside as f64 / trials as f64
}

fn random_rational_dist(len: usize, rng: &mut RandomStream) -> Vec<BigRational> {
    let w: Vec<i64> = (0..len).map(|_| rng.random_range(1..=20)).collect();
    let total: i64 = w.iter().sum();
    w.into_iter().map(|x| BigRational::new(BigInt::from(x), BigInt::from(total))).collect()
}

/// Product instances over exact rationals where p̂ ≠ q̂ after conditioning.
pub fn product_conditioning_mismatches(cases: usize, seed: u64) -> usize {
    let mut rng = stream(seed);
    let mut bad = 0;
    for _ in 0..cases {
        let (n, m) = (rng.random_range(1..=12), rng.random_range(1..=12));
        let (p1, p2) = (random_rational_dist(n, &mut rng), random_rational_dist(m, &mut rng));
        let joint: Vec<BigRational> = p1.iter().flat_map(|a| p2.iter().map(move |b| a * b)).collect();
        assert!(joint.iter().fold(BigRational::zero(), |s, x| s + x).is_one());
        let size = rng.random_range(1..=n);
        let mut u = index::sample(&mut rng, n, size).into_vec();
        u.sort_unstable();
        let (p_hat, q_hat) = conditioned_rectangle(&joint, n, m, &u);
        bad += (p_hat != q_hat) as usize;
    }
    bad
}

/// Fraction of uniform U of the protocol's subset size for which the
/// conditioned diagonal keeps ‖p̂ − q̂‖₁ ≥ ε.
pub fn diagonal_gap_rate(n: usize, t: usize, trials: usize, seed: u64, c: Constants) -> f64 {
    let params = ITParams::new(n, n, t, 1.0, 2, c.independence).unwrap();
    let p = JointDistribution::diagonal(n).unwrap();
    let mut rng = stream(seed);
    let l = params.subset_size().min(n);
    let hits = (0..trials)
        .filter(|_| {
            let u = index::sample(&mut rng, n, l).into_vec();
            let (a, b) = reduced_distributions(&p, &u).unwrap();
            l1_distance(&a, &b).unwrap() >= params.eps
        })
        .count();
    hits as f64 / trials as f64
}

pub struct CellFit {
    pub worst_z: f64,
    pub cells: usize,
}

/// Per-cell large-item counts of the traced reduction against l·L(i)·L(j).
pub fn ghd_large_cells(n: usize, t: usize, runs: usize, seed: u64, c: Constants) -> CellFit {
    let params = GhdParams::new(n, t, c.hardness.c_large, None).unwrap();
    let k = params.k;
    let mut rng = stream(seed);
    let mut sums = vec![0u64; (k + 1) * (k + 1)];
    for run in 0..runs {
        let case = if run % 2 == 0 { ClosenessFamily::Same } else { ClosenessFamily::Far };
        let input = ghd_generate_inputs(params.m, case, params.beta, &mut rng).unwrap();
        let red = ghd_reduce_traced(&input, &params, &mut rng).unwrap();
        for (s, x) in sums.iter_mut().zip(&red.large) {
            *s += x;
        }
    }
    let mut worst_z = 0.0f64;
    let mut cells = 0;
    for i in 0..=k {
        for j in 0..=k {
            if i == 0 && j == 0 {
                continue;
            }
            let mean = params.large_cell_mean(i, j) * runs as f64;
            if mean < 1e-9 {
                assert_eq!(sums[i * (k + 1) + j], 0);
                continue;
            }
            cells += 1;
            worst_z = worst_z.max((sums[i * (k + 1) + j] as f64 - mean).abs() / mean.sqrt());
        }
    }
    CellFit { worst_z, cells }
}

/// Largest gap, over SAME and FAR, between the SAME-verdict rates of the
/// centralized tester on reduced and on reference-sampled instances.
pub fn ghd_fidelity_gap(n: usize, t: usize, trials: usize, seed: u64, c: Constants) -> f64 {
    let params = GhdParams::new(n, t, c.hardness.c_large, None).unwrap();
    let tau = threshold_tau(n as f64, t as f64, 1.0);
    let mut rng = stream(seed);
    let mut worst = 0.0f64;
    for case in [ClosenessFamily::Same, ClosenessFamily::Far] {
        let (mut reduced, mut reference) = (0usize, 0usize);
        for _ in 0..trials {
            let input = ghd_generate_inputs(params.m, case, params.beta, &mut rng).unwrap();
            let (a, b) = ghd_reduce(&input, &params, &mut rng).unwrap();
            reduced += (distinguish(a.distance_sq(&b).unwrap() as f64, tau) == Decision::Same) as usize;
            let (a, b) = ghd_reference_sampler(&params, input.delta(), &mut rng).unwrap();
            reference += (distinguish(a.distance_sq(&b).unwrap() as f64, tau) == Decision::Same) as usize;
        }
        worst = worst.max((reduced as f64 - reference as f64).abs() / trials as f64);
    }
    worst
}

pub struct BhhCheck {
    pub product_joint_p: f64,
    pub product_marginal_p: [f64; 2],
    pub far_off_support: u64,
    pub far_support_cells_hit: bool,
    pub far_marginal_p: [f64; 2],
}

fn marginal_p(letters: &[usize], n: usize) -> f64 {
    let mut h = vec![0u64; n];
    for &x in letters {
        h[x] += 1;
    }
    chi_square_gof(&h, &vec![1.0 / n as f64; n], 5.0).p_value
}

pub fn bhh(n: usize, t: usize, seed: u64) -> BhhCheck {
    let mut rng = stream(seed);
    let inst = bhh_generate(n, true, &mut rng).unwrap();
    let joint = bhh_reduce(&inst, t, &mut rng).unwrap();
    let mut h = vec![0u64; n * n];
    for (&a, &b) in joint.alice.letters().iter().zip(joint.bob.letters()) {
        h[a * n + b] += 1;
    }
    let product_joint_p = chi_square_gof(&h, &vec![1.0 / (n * n) as f64; n * n], 5.0).p_value;
    let product_marginal_p = [marginal_p(joint.alice.letters(), n), marginal_p(joint.bob.letters(), n)];

    let inst = bhh_generate(n, false, &mut rng).unwrap();
    let joint = bhh_reduce(&inst, t, &mut rng).unwrap();
    let mut h = vec![0u64; n * n];
    for (&a, &b) in joint.alice.letters().iter().zip(joint.bob.letters()) {
        h[a * n + b] += 1;
    }
    let on = |c: usize| inst.x[c / n] == inst.x[c % n];
    BhhCheck {
        product_joint_p,
        product_marginal_p,
        far_off_support: (0..n * n).filter(|&c| !on(c)).map(|c| h[c]).sum(),
        far_support_cells_hit: (0..n * n).filter(|&c| on(c)).all(|c| h[c] > 0),
        far_marginal_p: [marginal_p(joint.alice.letters(), n), marginal_p(joint.bob.letters(), n)],
    }
}

/// TV between Multinomial(n, p) and independent Poisson counts.
pub fn poisson_tv(n: u64, p: f64, trials: usize, seed: u64) -> f64 {
    poisson_multinomial_tv_check(n, &[p], trials, &mut stream(seed)).unwrap()
}

/// Two runs of every protocol with the same config and seed, written as
/// CSV; returns the protocols whose bytes differ.
pub fn rerun_mismatches(seed: u64) -> Vec<&'static str> {
    let grids = [
        (Protocol::Closeness, Grid { n: vec![40, 60], m: vec![], t: vec![400, 800], eps: vec![1.0], k: vec![1] }),
        (Protocol::ClosenessSecure, Grid { n: vec![40], m: vec![], t: vec![1600], eps: vec![1.0], k: vec![2] }),
        (Protocol::Independence, Grid { n: vec![12], m: vec![], t: vec![3000], eps: vec![1.0], k: vec![2] }),
        (Protocol::IndependenceOneWay, Grid { n: vec![12], m: vec![], t: vec![3000], eps: vec![1.0], k: vec![2] }),
        (Protocol::Hardgen, Grid { n: vec![2000], m: vec![], t: vec![62], eps: vec![1.0], k: vec![1] }),
    ];
    let mut bad = Vec::new();
    for (protocol, grid) in grids {
        let cfg = ExperimentConfig { protocol, grid, trials: 6, seed, constants: Constants::default() };
        let csv = || {
            let mut buf = Vec::new();
            write_experiment_csv(&run_experiment(&cfg).unwrap(), protocol, &mut buf).unwrap();
            buf
        };
        if csv() != csv() {
            bad.push(protocol.as_str());
        }
    }
    bad
}
