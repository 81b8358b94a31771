use crate::closeness::ClosenessFamily;
use crate::dist::{poisson_sample, OccurrenceVector};
use crate::error::{config, execution, invalid, Result};
use crate::rng::RandomStream;
use rand::seq::SliceRandom;
use rand::Rng;
use statrs::function::gamma::ln_gamma;

/// Gap Hamming input: equal-weight bit vectors whose distance is either
/// exactly m/2 or m/2 + 2δ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GhdInput {
    pub x: Vec<bool>,
    pub y: Vec<bool>,
    pub case: ClosenessFamily,
}

impl GhdInput {
    pub fn m(&self) -> usize {
        self.x.len()
    }

    pub fn hamming(&self) -> usize {
        self.x.iter().zip(&self.y).filter(|(a, b)| a != b).count()
    }

    /// δ = ½(‖x − y‖₁ − m/2).
    pub fn delta(&self) -> usize {
        (self.hamming() - self.m() / 2) / 2
    }
}

/// Large-item constant C; larger values make some rates negative at
/// n = 2000, t = n/32.
pub const DEFAULT_LARGE_CONSTANT: f64 = 0.4;

/// Default gap scale √(m/2)/4.
pub fn ghd_beta(m: usize) -> f64 {
    (m as f64 / 2.0).sqrt() / 4.0
}

/// Integer gap Δ = max(1, ⌈β⌉).
pub fn ghd_gap(beta: f64) -> usize {
    (beta.ceil() as usize).max(1)
}

/// Builds `x, y` of weight m/2 with distance m/2 (SAME) or m/2 + 2δ for
/// a uniform δ ∈ [⌈Δ/2⌉, Δ] (FAR), coordinates in uniformly random order.
pub fn ghd_generate_inputs(m: usize, case: ClosenessFamily, beta: f64, rng: &mut RandomStream) -> Result<GhdInput> {
    if m == 0 || !m.is_multiple_of(4) {
        return Err(invalid(format!("GHD length must be a positive multiple of 4, got {m}")));
    }
    let gap = ghd_gap(beta);
    let delta = match case {
        ClosenessFamily::Same => 0,
        ClosenessFamily::Far => rng.random_range(gap.div_ceil(2)..=gap),
    };
    if delta > m / 4 {
        return Err(invalid(format!("gap {gap} does not fit in length {m}")));
    }
    let q = m / 4;
    let mut pairs = Vec::with_capacity(m);
    pairs.extend(std::iter::repeat_n((true, true), q - delta));
    pairs.extend(std::iter::repeat_n((false, false), q - delta));
    pairs.extend(std::iter::repeat_n((true, false), q + delta));
    pairs.extend(std::iter::repeat_n((false, true), q + delta));
    pairs.shuffle(rng);
    let (x, y) = pairs.into_iter().unzip();
    Ok(GhdInput { x, y, case })
}

/// Parameters of the GHD-to-closeness reduction.
#[derive(Clone, Debug, PartialEq)]
pub struct GhdParams {
    pub n: usize,
    pub t: usize,
    /// Dense items, n/10.
    pub d: usize,
    /// Large items, ⌈C·t·ln n⌉.
    pub l: usize,
    /// Highest per-item count generated, ⌈3 ln n⌉.
    pub k: usize,
    /// GHD length n²/(t² ln³ n), rounded up to a multiple of 4.
    pub m: usize,
    pub beta: f64,
    /// Δ.
    pub gap: usize,
    dense: Vec<f64>,
    large: Vec<f64>,
}

fn poisson_pmf(lambda: f64, k: usize) -> f64 {
    (-lambda + k as f64 * lambda.ln() - ln_gamma(k as f64 + 1.0)).exp()
}

impl GhdParams {
    /// `beta` defaults to [`ghd_beta`] of the derived length.
    pub fn new(n: usize, t: usize, c_large: f64, beta: Option<f64>) -> Result<Self> {
        if n < 20 || t == 0 {
            return Err(config(format!("need n ≥ 20 and t ≥ 1, got n = {n}, t = {t}")));
        }
        if !(c_large > 0.0) {
            return Err(config("large-item constant must be positive"));
        }
        let ln = (n as f64).ln();
        let d = n / 10;
        let l = (c_large * t as f64 * ln).ceil() as usize;
        let k = (3.0 * ln).ceil() as usize;
        let raw_m = (n * n) as f64 / ((t * t) as f64 * ln.powi(3));
        let m = ((raw_m / 4.0).ceil() as usize).max(1) * 4;
        let beta = beta.unwrap_or_else(|| ghd_beta(m));
        let gap = ghd_gap(beta);
        if gap > m / 4 {
            return Err(config(format!("gap Δ = {gap} exceeds m/4 = {}", m / 4)));
        }
        let dense = (0..=k).map(|i| poisson_pmf(t as f64 / (2 * d) as f64, i)).collect();
        let large = (0..=k).map(|i| poisson_pmf(t as f64 / (2 * l) as f64, i)).collect();
        let p = Self { n, t, d, l, k, m, beta, gap, dense, large };
        p.validate()?;
        Ok(p)
    }

    /// D(i) = Pr[Poi(t/2d) = i].
    pub fn dense_pmf(&self, i: usize) -> f64 {
        self.dense[i]
    }

    /// L(i) = Pr[Poi(t/2l) = i].
    pub fn large_pmf(&self, i: usize) -> f64 {
        self.large[i]
    }

    /// m_c = m/4 − Δ.
    pub fn m_c(&self) -> usize {
        self.m / 4 - self.gap
    }

    fn ratio(&self) -> f64 {
        self.d as f64 / self.gap as f64
    }

    fn dense_tail(&self) -> f64 {
        self.dense[1..].iter().sum()
    }

    /// Copies of each nonzero coordinate per count pair (i, j), i, j ≥ 1.
    pub fn step1_rate(&self, i: usize, j: usize) -> f64 {
        self.ratio() * self.dense[i] * self.dense[j]
    }

    /// One-sided dense pairs (i, 0).
    pub fn step2_rate(&self, i: usize) -> f64 {
        self.d as f64 * self.dense[i] * self.dense[0]
    }

    /// Large pairs (i, j), i, j ≥ 1.
    pub fn step3_rate(&self, i: usize, j: usize) -> f64 {
        self.l as f64 * self.large[i] * self.large[j] - self.m_c() as f64 * self.step1_rate(i, j)
    }

    /// One-sided large pairs (i, 0).
    pub fn step4_rate(&self, i: usize) -> f64 {
        self.l as f64 * self.large[i] * self.large[0]
            - (self.m / 4) as f64 * self.ratio() * self.dense[i] * self.dense_tail()
    }

    /// Mean of the large (i, j) count, l·L(i)·L(j).
    pub fn large_cell_mean(&self, i: usize, j: usize) -> f64 {
        self.l as f64 * self.large[i] * self.large[j]
    }

    fn validate(&self) -> Result<()> {
        for i in 1..=self.k {
            for j in 1..=self.k {
                if self.step3_rate(i, j) < 0.0 {
                    return Err(config(format!("negative large-pair rate at (i, j) = ({i}, {j})")));
                }
            }
            if self.step4_rate(i) < 0.0 {
                return Err(config(format!("negative one-sided large rate at (i, j) = ({i}, 0)")));
            }
        }
        if self.expected_letters() > self.n as f64 {
            return Err(config(format!(
                "expected {:.0} nonzero letters exceed n = {}",
                self.expected_letters(),
                self.n
            )));
        }
        Ok(())
    }

    /// Expected number of letters with a nonzero count on either side.
    pub fn expected_letters(&self) -> f64 {
        let one_sided: f64 = (1..=self.k).map(|i| self.step2_rate(i) + self.step4_rate(i)).sum::<f64>();
        let two_sided: f64 =
            (1..=self.k).flat_map(|i| (1..=self.k).map(move |j| (i, j))).map(|(i, j)| self.step3_rate(i, j)).sum();
        let per_coord: f64 = (1..=self.k).map(|i| self.ratio() * self.dense[i] * self.dense_tail()).sum();
        2.0 * one_sided + two_sided + self.m as f64 * per_coord
    }
}

/// Count pairs of the reduced instance split by the item class they
/// simulate, indexed `i·(k+1) + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct GhdReduction {
    pub a: OccurrenceVector,
    pub b: OccurrenceVector,
    pub large: Vec<u64>,
    pub dense: Vec<u64>,
}

/// Maps a GHD input to occurrence vectors (A, B) over [n].
pub fn ghd_reduce(
    input: &GhdInput,
    params: &GhdParams,
    rng: &mut RandomStream,
) -> Result<(OccurrenceVector, OccurrenceVector)> {
    ghd_reduce_traced(input, params, rng).map(|r| (r.a, r.b))
}

pub fn ghd_reduce_traced(input: &GhdInput, params: &GhdParams, rng: &mut RandomStream) -> Result<GhdReduction> {
    let (m, k) = (params.m, params.k);
    if input.m() != m || input.y.len() != m {
        return Err(invalid(format!("GHD input has length {}, parameters need {m}", input.m())));
    }
    let weight = |v: &[bool]| v.iter().filter(|&&b| b).count();
    if weight(&input.x) != m / 2
        || weight(&input.y) != m / 2
        || input.hamming() < m / 2
        || !input.hamming().is_multiple_of(2)
    {
        return Err(invalid("GHD input violates the weight or distance promise"));
    }
    let delta = input.delta();
    if delta > params.gap {
        return Err(invalid(format!("δ = {delta} exceeds Δ = {}", params.gap)));
    }
    let cells = (k + 1) * (k + 1);
    let mut large = vec![0u64; cells];
    let mut dense = vec![0u64; cells];
    let mut pairs: Vec<(u64, u64)> = Vec::new();
    let mut emit = |tally: &mut Vec<u64>, i: usize, j: usize, rate: f64, rng: &mut RandomStream| -> Result<()> {
        let c = poisson_sample(rate, rng)?;
        tally[i * (k + 1) + j] += c;
        pairs.extend(std::iter::repeat_n((i as u64, j as u64), c as usize));
        Ok(())
    };

    // Step 1. The first m_c (1,1) and first m/4 one-sided coordinates
    // simulate large items, the rest dense ones.
    let (mut seen_11, mut seen_10, mut seen_01) = (0, 0, 0);
    for (&xc, &yc) in input.x.iter().zip(&input.y) {
        let seen = match (xc, yc) {
            (false, false) => continue,
            (true, true) => (&mut seen_11, params.m_c()),
            (true, false) => (&mut seen_10, m / 4),
            (false, true) => (&mut seen_01, m / 4),
        };
        let is_large = *seen.0 < seen.1;
        *seen.0 += 1;
        for i in 1..=k {
            for j in 1..=k {
                let tally = if is_large { &mut large } else { &mut dense };
                emit(tally, i * xc as usize, j * yc as usize, params.step1_rate(i, j), rng)?;
            }
        }
    }
    for i in 1..=k {
        emit(&mut dense, i, 0, params.step2_rate(i), rng)?;
        emit(&mut dense, 0, i, params.step2_rate(i), rng)?;
    }
    for i in 1..=k {
        for j in 1..=k {
            emit(&mut large, i, j, params.step3_rate(i, j), rng)?;
        }
    }
    for i in 1..=k {
        emit(&mut large, i, 0, params.step4_rate(i), rng)?;
        emit(&mut large, 0, i, params.step4_rate(i), rng)?;
    }
    if pairs.len() > params.n {
        return Err(execution(format!("reduction emitted {} letters, more than n = {}", pairs.len(), params.n)));
    }
    pairs.resize(params.n, (0, 0));
    pairs.shuffle(rng);
    let (a, b): (Vec<u64>, Vec<u64>) = pairs.into_iter().unzip();
    Ok(GhdReduction { a: OccurrenceVector::from_counts(a), b: OccurrenceVector::from_counts(b), large, dense })
}

/// Poissonized occurrence vectors of `a, b` themselves: half the mass
/// uniform on d dense items (supports overlapping in d·(Δ−δ)/Δ letters),
/// half uniform on l shared large items, letters randomly placed in [n].
pub fn ghd_reference_sampler(
    params: &GhdParams,
    delta: usize,
    rng: &mut RandomStream,
) -> Result<(OccurrenceVector, OccurrenceVector)> {
    if delta > params.gap {
        return Err(invalid(format!("δ = {delta} exceeds Δ = {}", params.gap)));
    }
    let d = params.d;
    let shift = (d as f64 * delta as f64 / params.gap as f64).round() as usize;
    let used = d + shift + params.l;
    if used > params.n {
        return Err(invalid(format!("supports need {used} letters, more than n = {}", params.n)));
    }
    let mut letters: Vec<usize> = (0..params.n).collect();
    letters.shuffle(rng);
    let t = params.t as f64;
    let (dense_rate, large_rate) = (t / (2 * d) as f64, t / (2 * params.l) as f64);
    let mut a = vec![0u64; params.n];
    let mut b = vec![0u64; params.n];
    for pos in 0..used {
        let letter = letters[pos];
        let (ra, rb) = if pos >= d + shift {
            (large_rate, large_rate)
        } else {
            (if pos < d { dense_rate } else { 0.0 }, if pos >= shift { dense_rate } else { 0.0 })
        };
        a[letter] = poisson_sample(ra, rng)?;
        b[letter] = poisson_sample(rb, rng)?;
    }
    Ok((OccurrenceVector::from_counts(a), OccurrenceVector::from_counts(b)))
}
