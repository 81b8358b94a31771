use crate::dist::OccurrenceVector;
use crate::error::{invalid, parse, Result};
use crate::rng::{derive_seed, mix64};

const MERSENNE_61: u64 = (1 << 61) - 1;

fn mul_mod(a: u64, b: u64) -> u64 {
    let p = u128::from(a) * u128::from(b);
    let lo = (p as u64) & MERSENNE_61;
    let hi = (p >> 61) as u64;
    let s = lo + hi;
    if s >= MERSENNE_61 {
        s - MERSENNE_61
    } else {
        s
    }
}

fn add_mod(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= MERSENNE_61 {
        s - MERSENNE_61
    } else {
        s
    }
}

/// Degree-3 polynomial over GF(2^61 − 1): a 4-wise independent hash.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct SignHash([u64; 4]);

impl SignHash {
    fn from_seed(seed: u64) -> Self {
        let mut c = [0u64; 4];
        let mut s = seed;
        for x in &mut c {
            s = mix64(s);
            *x = s % MERSENNE_61;
        }
        Self(c)
    }

    fn sign(&self, x: u64) -> i64 {
        let x = x % MERSENNE_61;
        let [a0, a1, a2, a3] = self.0;
        let h = add_mod(mul_mod(add_mod(mul_mod(add_mod(mul_mod(a3, x), a2), x), a1), x), a0);
        if h & 1 == 0 {
            1
        } else {
            -1
        }
    }
}

/// Median-of-means AMS sketch of an integer vector.
///
/// `groups` groups of `per_group` counters each, counter `c` holding
/// `Σ_i s_c(i) X_i` for a 4-wise independent sign function `s_c`.
/// Counters are integers, so linearity is exact.
#[derive(Clone, Debug, PartialEq)]
pub struct L2Sketch {
    seed: u64,
    alpha: f64,
    delta: f64,
    dim: u64,
    groups: usize,
    per_group: usize,
    counters: Vec<i64>,
}

fn shape(alpha: f64, delta: f64) -> Result<(usize, usize)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("sketch alpha {alpha} must lie in (0,1)")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("sketch delta {delta} must lie in (0,1)")));
    }
    let groups = (9.0 * (1.0 / delta).ln()).ceil().max(1.0) as usize;
    let per_group = (6.0 / (alpha * alpha)).ceil() as usize;
    Ok((groups, per_group))
}

fn hashes(seed: u64, count: usize) -> Vec<SignHash> {
    (0..count).map(|c| SignHash::from_seed(derive_seed(seed, &[c as u64]))).collect()
}

pub fn sketch(x: &OccurrenceVector, alpha: f64, delta: f64, seed: u64) -> Result<L2Sketch> {
    let (groups, per_group) = shape(alpha, delta)?;
    let hs = hashes(seed, groups * per_group);
    let nonzero: Vec<(u64, i64)> =
        x.counts().iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, &c)| (i as u64, c as i64)).collect();
    let counters = hs.iter().map(|h| nonzero.iter().map(|&(i, c)| h.sign(i) * c).sum()).collect();
    Ok(L2Sketch { seed, alpha, delta, dim: x.n() as u64, groups, per_group, counters })
}

impl L2Sketch {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn counters(&self) -> &[i64] {
        &self.counters
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.seed != other.seed
            || self.alpha != other.alpha
            || self.delta != other.delta
            || self.dim != other.dim
            || self.counters.len() != other.counters.len()
        {
            return Err(invalid("sketches built with different seeds or parameters"));
        }
        Ok(())
    }

    /// Coordinatewise difference; a sketch of `X − Y`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let counters = self
            .counters
            .iter()
            .zip(&other.counters)
            .map(|(a, b)| a.checked_sub(*b).ok_or_else(|| invalid("sketch counter difference overflows")))
            .collect::<Result<_>>()?;
        Ok(Self { counters, ..self.clone() })
    }

    /// Median of group means of squared counters.
    pub fn estimate_norm_sq(&self) -> f64 {
        let mut means: Vec<f64> = self
            .counters
            .chunks(self.per_group)
            .map(|g| g.iter().map(|&c| (c as f64) * (c as f64)).sum::<f64>() / g.len() as f64)
            .collect();
        means.sort_by(f64::total_cmp);
        let m = means.len();
        if m % 2 == 1 {
            means[m / 2]
        } else {
            0.5 * (means[m / 2 - 1] + means[m / 2])
        }
    }

    /// Header of five 8-byte words followed by one 8-byte word per counter.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 * (5 + self.counters.len()));
        out.extend_from_slice(&self.seed.to_le_bytes());
        out.extend_from_slice(&self.alpha.to_le_bytes());
        out.extend_from_slice(&self.delta.to_le_bytes());
        out.extend_from_slice(&self.dim.to_le_bytes());
        out.extend_from_slice(&(self.counters.len() as u64).to_le_bytes());
        for c in &self.counters {
            out.extend_from_slice(&c.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let word = |k: usize| -> Result<[u8; 8]> {
            bytes
                .get(8 * k..8 * k + 8)
                .map(|w| w.try_into().expect("eight bytes"))
                .ok_or_else(|| parse(1, "truncated sketch message"))
        };
        let seed = u64::from_le_bytes(word(0)?);
        let alpha = f64::from_le_bytes(word(1)?);
        let delta = f64::from_le_bytes(word(2)?);
        let dim = u64::from_le_bytes(word(3)?);
        let len = u64::from_le_bytes(word(4)?);
        let (groups, per_group) = shape(alpha, delta).map_err(|e| parse(1, e.to_string()))?;
        if groups.checked_mul(per_group).map(|c| c as u64) != Some(len) {
            return Err(parse(1, format!("sketch declares {len} counters, parameters disagree")));
        }
        if len > bytes.len() as u64 / 8 || bytes.len() as u64 != 8 * (5 + len) {
            return Err(parse(1, "sketch message length does not match its counter count"));
        }
        let counters = (0..len as usize).map(|k| word(5 + k).map(i64::from_le_bytes)).collect::<Result<_>>()?;
        Ok(Self { seed, alpha, delta, dim, groups, per_group, counters })
    }
}

pub fn estimate_distance_sq(sa: &L2Sketch, sb: &L2Sketch) -> Result<f64> {
    Ok(sa.sub(sb)?.estimate_norm_sq())
}
